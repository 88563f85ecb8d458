"""Detection and tracking of moving objects in videos with a moving camera.

The pipeline filters sliding frame blocks with a bank of 3-D Gabor energy
filters, fuses the per-filter energies into motion blobs, merges blob
fragments into objects with a minimum-spanning-tree cut, and tracks
objects across frames by gated histogram matching with Kalman-filter
coasting through occlusion.
"""

from .blob_extract import Blob, EnergyFrame, extract_blobs, fuse_energy
from .blob_merge import (
    ObjectFeature,
    WeightMatrix,
    cut_and_cluster,
    kruskal_mst,
    make_object,
    merge_blobs,
    prune_clusters,
    weight_matrix,
)
from .config import PipelineConfig
from .evaluation import (
    MetricsReport,
    classify_frame,
    ope,
    overlap,
    score_run,
    sequence_metrics,
    sre,
    tre_harness,
)
from .gabor_bank import (
    EnergyStack,
    EnergyStream,
    GaborPair,
    GaborParams,
    apply_bank,
    convolve_block,
    energy_map,
    make_bank,
)
from .sequence_io import (
    FrameGrid,
    GroundTruthBox,
    STBlock,
    TrackSnapshot,
    block_stream,
    load_groundtruth,
    load_sequence,
    write_outputs,
)
from .synth import SynthSpec, TargetSpec, generate
from .tracker import (
    Track,
    TrackerConfig,
    TrackerState,
    assign,
    cost_matrix,
    run_pipeline,
)

__version__ = "0.1.0"
