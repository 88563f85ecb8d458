import numpy as np
import pytest
from PIL import Image

from gabortrack.sequence_io import (
    FrameGrid,
    GroundTruthBox,
    SequenceError,
    block_stream,
    load_groundtruth,
    load_sequence,
    to_grayscale,
    write_groundtruth,
    write_outputs,
    write_trajectories,
    read_trajectories,
    TrackSnapshot,
)


def _write_png(path, array):
    Image.fromarray(array).save(path)


class TestLoadSequence:
    def test_white_frames_identity(self, tmp_path):
        white = np.full((4, 4, 3), 255, dtype=np.uint8)
        for i in range(3):
            _write_png(tmp_path / f"{i:03d}.png", white)
        frames = load_sequence(tmp_path)
        assert len(frames) == 3
        assert all((f.pixels == 255).all() for f in frames)
        assert [f.index for f in frames] == [0, 1, 2]

    def test_red_pixel_luma(self, tmp_path):
        red = np.zeros((2, 2, 3), dtype=np.uint8)
        red[..., 0] = 255
        _write_png(tmp_path / "0.png", red)
        frames = load_sequence(tmp_path)
        # round(0.299 * 255) = 76
        assert (frames[0].pixels == 76).all()

    def test_green_pixel_luma_rounds(self):
        green = np.zeros((1, 1, 3), dtype=np.uint8)
        green[..., 1] = 255
        # 0.587 * 255 = 149.685, rounds up
        assert to_grayscale(green)[0, 0] == 150

    def test_dimension_mismatch_names_offender(self, tmp_path):
        _write_png(tmp_path / "0.png", np.zeros((4, 4), dtype=np.uint8))
        _write_png(tmp_path / "1.png", np.zeros((5, 5), dtype=np.uint8))
        with pytest.raises(SequenceError, match="1.png"):
            load_sequence(tmp_path)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(SequenceError, match="no image files"):
            load_sequence(tmp_path)

    def test_corrupt_file_named(self, tmp_path):
        (tmp_path / "0.png").write_bytes(b"not a png")
        with pytest.raises(SequenceError, match="0.png"):
            load_sequence(tmp_path)

    def test_numeric_ordering(self, tmp_path):
        for i in (10, 2, 1):
            _write_png(tmp_path / f"img{i}.png", np.full((2, 2), i, dtype=np.uint8))
        frames = load_sequence(tmp_path)
        assert [int(f.pixels[0, 0]) for f in frames] == [1, 2, 10]

    def test_grayscale_idempotent(self, tmp_path):
        rng = np.random.default_rng(3)
        gray = rng.integers(0, 256, size=(6, 6), dtype=np.uint8)
        _write_png(tmp_path / "0.png", gray)
        frames = load_sequence(tmp_path)
        np.testing.assert_array_equal(frames[0].pixels, gray)


class TestGroundTruth:
    def test_comma_separated(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("10,20,30,40\n")
        boxes = load_groundtruth(path)
        assert boxes == [GroundTruthBox(frame=0, x=10, y=20, w=30, h=40)]

    @pytest.mark.parametrize("sep", ["\t", " ", ", "])
    def test_separator_styles(self, tmp_path, sep):
        path = tmp_path / "gt.txt"
        path.write_text(sep.join(["10", "20", "30", "40"]) + "\n")
        assert load_groundtruth(path)[0] == GroundTruthBox(0, 10, 20, 30, 40)

    def test_short_line_errors_with_line_number(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("10,20,30\n")
        with pytest.raises(SequenceError, match=":1"):
            load_groundtruth(path)

    def test_non_numeric_errors(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("10,20,30,abc\n")
        with pytest.raises(SequenceError, match="non-numeric"):
            load_groundtruth(path)

    def test_round_trip(self, tmp_path):
        boxes = [
            GroundTruthBox(frame=i, x=i * 3, y=i + 1, w=10 + i, h=7)
            for i in range(5)
        ]
        path = tmp_path / "gt.txt"
        write_groundtruth(boxes, path)
        assert load_groundtruth(path) == boxes


def _frames(count, shape=(8, 8)):
    return [
        FrameGrid(index=i, pixels=np.full(shape, i, dtype=np.uint8))
        for i in range(count)
    ]


class TestBlockStream:
    def test_ten_frames_four_blocks(self):
        blocks = list(block_stream(_frames(10), 7))
        assert len(blocks) == 4
        assert [b.target_index for b in blocks] == [6, 7, 8, 9]
        assert [f.index for f in blocks[0].frames] == list(range(7))

    def test_exact_length_single_block(self):
        blocks = list(block_stream(_frames(7), 7))
        assert len(blocks) == 1

    def test_too_short_errors(self):
        with pytest.raises(SequenceError):
            list(block_stream(_frames(6), 7))

    def test_overlap_and_target_coverage(self):
        frames = _frames(12)
        blocks = list(block_stream(frames, 7))
        for a, b in zip(blocks, blocks[1:]):
            assert a.frames[1:] == b.frames[:-1]  # overlap of n-1 frames
        targets = [b.frames[-1] for b in blocks]
        assert targets == frames[6:]


class TestOutputs:
    def test_trajectory_records(self, tmp_path):
        snaps = [
            (0, [TrackSnapshot(0, 1, (5.0, 6.0), (4, 3, 4, 4))]),
            (1, [TrackSnapshot(1, 1, (6.0, 7.0), (5, 4, 4, 4))]),
        ]
        path = tmp_path / "t.jsonl"
        assert write_trajectories(snaps, path) == 2
        back = read_trajectories(path)
        assert back[0][0].track_id == 1 and back[1][0].track_id == 1
        assert back[0][0].box == (4, 3, 4, 4)

    def test_empty_trajectory_file(self, tmp_path):
        paths = write_outputs([], tmp_path / "out")
        assert paths["trajectories"].exists()
        assert paths["trajectories"].read_text() == ""

    def test_annotated_count_matches_processed_frames(self, tmp_path):
        frames = _frames(10, shape=(16, 16))
        per_frame = [(i, []) for i in range(6, 10)]
        per_frame[1] = (7, [TrackSnapshot(7, 1, (8.0, 8.0), (6, 6, 4, 4))])
        paths = write_outputs(
            per_frame, tmp_path / "out", frames=frames, annotate=True
        )
        pngs = sorted(paths["annotated"].glob("*.png"))
        assert len(pngs) == len(frames) - 6
