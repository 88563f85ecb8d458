"""Three-dimensional Gabor energy filter bank.

Each filter is a quadrature pair of Gaussian-windowed sinusoids sampled on
an integer (y, x, t) grid:

    g_odd  = N * exp(-(x^2/sx^2 + y^2/sy^2 + t^2/st^2) / 2) * sin(2*pi*phi)
    g_even = N * exp(-(x^2/sx^2 + y^2/sy^2 + t^2/st^2) / 2) * cos(2*pi*phi)

with phase phi = wx0*x + wy0*y + wt0*t and normalization
N = 1 / ((2*pi)^(3/2) * sx * sy * st). Center frequencies are in
cycles/pixel (spatial) and cycles/frame (temporal); note the 2*pi factor
sits inside the sinusoid, so a frequency of 1/4 means one full cycle per
four samples. The spatial pair (wx0, wy0) comes from a base frequency and
an orientation angle: wx0 = w*cos(theta), wy0 = w*sin(theta), with x the
column axis, y the row axis, and theta in degrees from the horizontal.

Energy is the squared sum of the two phase responses, which makes the
output invariant to the phase of the stimulus. Convolution consumes the
full temporal depth of a frame block (one output slice, assigned to the
block's newest frame) and replicates edge pixels spatially.

The default bank is 9 filters: orientations {0, 35, 75} degrees crossed
with temporal frequencies {1/9, 1/8, 1/7} cycles/frame at a base spatial
frequency of 1/4 cycles/pixel, sigma_x = sigma_y = 4, sigma_t = 1, kernel
extent 25 x 25 x 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from .sequence_io import FrameGrid, STBlock

DEFAULT_OMEGA = 0.25
DEFAULT_THETAS = (0.0, 35.0, 75.0)
DEFAULT_OMEGA_T0S = (1.0 / 7.0, 1.0 / 8.0, 1.0 / 9.0)
DEFAULT_SIGMA_SPATIAL = 4.0
DEFAULT_SIGMA_TEMPORAL = 1.0
DEFAULT_SPATIAL_EXTENT = 25
DEFAULT_TEMPORAL_EXTENT = 7


class GaborError(ValueError):
    pass


@dataclass(frozen=True)
class GaborParams:
    """Parameters of one filter; spatial center frequencies are derived
    from the base frequency and orientation."""

    omega: float
    theta: float  # degrees
    omega_t0: float
    sigma_x: float = DEFAULT_SIGMA_SPATIAL
    sigma_y: float = DEFAULT_SIGMA_SPATIAL
    sigma_t: float = DEFAULT_SIGMA_TEMPORAL
    spatial_extent: int = DEFAULT_SPATIAL_EXTENT
    temporal_extent: int = DEFAULT_TEMPORAL_EXTENT

    def __post_init__(self):
        for name in ("spatial_extent", "temporal_extent"):
            extent = getattr(self, name)
            if extent < 3 or extent % 2 == 0:
                raise GaborError(f"{name} must be odd and >= 3, got {extent}")
        for name in ("sigma_x", "sigma_y", "sigma_t"):
            if getattr(self, name) <= 0:
                raise GaborError(f"{name} must be positive")

    @property
    def omega_x0(self) -> float:
        return self.omega * np.cos(np.deg2rad(self.theta))

    @property
    def omega_y0(self) -> float:
        return self.omega * np.sin(np.deg2rad(self.theta))


@dataclass(frozen=True)
class GaborPair:
    """Sampled odd/even kernels, axes (y, x, t), plus their 1-D complex
    factors used by the separable fast path."""

    params: GaborParams
    odd: np.ndarray
    even: np.ndarray
    kx: np.ndarray = field(repr=False)
    ky: np.ndarray = field(repr=False)
    kt: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EnergyStack:
    """The per-filter energy maps for one target frame."""

    maps: np.ndarray  # (n_filters, H, W), non-negative
    frame_index: int

    def __post_init__(self):
        if self.maps.ndim != 3:
            raise GaborError("energy stack must be (n_filters, H, W)")


def sample_pair(params: GaborParams) -> GaborPair:
    """Sample one quadrature pair on integer offsets centered at 0."""
    s = params.spatial_extent
    tk = params.temporal_extent
    xs = np.arange(s, dtype=np.float64) - s // 2
    ts = np.arange(tk, dtype=np.float64) - tk // 2
    norm = 1.0 / ((2.0 * np.pi) ** 1.5 * params.sigma_x * params.sigma_y * params.sigma_t)

    dy = xs[:, None, None]
    dx = xs[None, :, None]
    dt = ts[None, None, :]
    envelope = norm * np.exp(
        -0.5
        * (
            dx**2 / params.sigma_x**2
            + dy**2 / params.sigma_y**2
            + dt**2 / params.sigma_t**2
        )
    )
    phase = 2.0 * np.pi * (params.omega_x0 * dx + params.omega_y0 * dy + params.omega_t0 * dt)

    # 1-D complex factors whose outer product is even + i*odd; the
    # normalization rides on the temporal factor.
    kx = np.exp(-0.5 * xs**2 / params.sigma_x**2) * np.exp(
        2j * np.pi * params.omega_x0 * xs
    )
    ky = np.exp(-0.5 * xs**2 / params.sigma_y**2) * np.exp(
        2j * np.pi * params.omega_y0 * xs
    )
    kt = norm * np.exp(-0.5 * ts**2 / params.sigma_t**2) * np.exp(
        2j * np.pi * params.omega_t0 * ts
    )
    return GaborPair(
        params=params,
        odd=envelope * np.sin(phase),
        even=envelope * np.cos(phase),
        kx=kx,
        ky=ky,
        kt=kt,
    )


def make_bank(
    base_omega: float = DEFAULT_OMEGA,
    thetas: Sequence[float] = DEFAULT_THETAS,
    omega_t0s: Sequence[float] = DEFAULT_OMEGA_T0S,
    sigma_x: float = DEFAULT_SIGMA_SPATIAL,
    sigma_y: float = DEFAULT_SIGMA_SPATIAL,
    sigma_t: float = DEFAULT_SIGMA_TEMPORAL,
    spatial_extent: int = DEFAULT_SPATIAL_EXTENT,
    temporal_extent: int = DEFAULT_TEMPORAL_EXTENT,
) -> list[GaborPair]:
    """Build the filter bank, one pair per (theta, omega_t0) combination.

    Bank order is fixed regardless of argument order: orientations
    ascending on the outside, temporal frequencies ascending inside.
    """
    if not thetas or not omega_t0s:
        raise GaborError("thetas and omega_t0s must be non-empty")
    bank = []
    for theta in sorted(thetas):
        for omega_t0 in sorted(omega_t0s):
            bank.append(
                sample_pair(
                    GaborParams(
                        omega=base_omega,
                        theta=theta,
                        omega_t0=omega_t0,
                        sigma_x=sigma_x,
                        sigma_y=sigma_y,
                        sigma_t=sigma_t,
                        spatial_extent=spatial_extent,
                        temporal_extent=temporal_extent,
                    )
                )
            )
    return bank


def _spatial_filter(frame: np.ndarray, pair: GaborPair) -> np.ndarray:
    """Complex 2-D convolution of one frame with the spatial kernel factor,
    edge-replicate padded so the output matches the frame shape."""
    pad = pair.params.spatial_extent // 2
    padded = np.pad(frame, pad, mode="edge")
    kernel2d = np.outer(pair.ky, pair.kx)
    return signal.fftconvolve(padded, kernel2d, mode="valid")


def _temporal_collapse(filtered: Sequence[np.ndarray], kt: np.ndarray) -> np.ndarray:
    """Fully-overlapping temporal convolution step: with frames oldest
    first, out = sum_j kt[n-1-j] * filtered[j]."""
    n = len(kt)
    out = np.zeros_like(filtered[0])
    for j in range(n):
        out += kt[n - 1 - j] * filtered[j]
    return out


def convolve_block(block: STBlock | np.ndarray, pair: GaborPair) -> tuple[np.ndarray, np.ndarray]:
    """Convolve a frame block with one quadrature pair.

    Returns (odd_response, even_response), each with the frame's shape.
    The temporal axis is consumed entirely; spatial borders use
    edge-replicate padding. Internally runs the separable complex path,
    which is numerically identical to direct 3-D convolution with the
    sampled kernels up to float round-off.
    """
    arr = block.as_array() if isinstance(block, STBlock) else np.asarray(block, dtype=np.float64)
    n = arr.shape[0]
    if n != pair.params.temporal_extent:
        raise GaborError(
            f"block has {n} frames but kernel temporal extent is "
            f"{pair.params.temporal_extent}"
        )
    filtered = [_spatial_filter(arr[j], pair) for j in range(n)]
    response = _temporal_collapse(filtered, pair.kt)
    return response.imag.copy(), response.real.copy()


def energy_map(odd_resp: np.ndarray, even_resp: np.ndarray) -> np.ndarray:
    """Quadrature energy: element-wise odd^2 + even^2."""
    if odd_resp.shape != even_resp.shape:
        raise GaborError(
            f"response shapes differ: {odd_resp.shape} vs {even_resp.shape}"
        )
    return odd_resp**2 + even_resp**2


def apply_bank(block: STBlock, bank: Sequence[GaborPair]) -> EnergyStack:
    """Energy maps of every filter in the bank for one block."""
    maps = []
    for pair in bank:
        odd_resp, even_resp = convolve_block(block, pair)
        maps.append(energy_map(odd_resp, even_resp))
    return EnergyStack(maps=np.stack(maps), frame_index=block.target_index)


class EnergyStream:
    """Incremental bank evaluation over a frame sequence.

    Spatially filters each incoming frame once per filter and keeps the
    last `temporal_extent` results, so each new frame costs one spatial
    pass plus a temporal weighted sum. Produces the same energy stacks as
    apply_bank over a sliding block, frame for frame.
    """

    def __init__(self, bank: Sequence[GaborPair]):
        if not bank:
            raise GaborError("empty filter bank")
        extents = {p.params.temporal_extent for p in bank}
        if len(extents) != 1:
            raise GaborError("bank mixes temporal extents")
        self.bank = list(bank)
        self.temporal_extent = extents.pop()
        self._buffers: list[list[np.ndarray]] = [[] for _ in bank]
        self._count = 0

    def push(self, frame: FrameGrid) -> EnergyStack | None:
        """Add a frame; returns the energy stack for it once enough
        frames have been seen, else None."""
        arr = frame.pixels.astype(np.float64)
        self._count += 1
        for buf, pair in zip(self._buffers, self.bank):
            buf.append(_spatial_filter(arr, pair))
            if len(buf) > self.temporal_extent:
                buf.pop(0)
        if self._count < self.temporal_extent:
            return None
        maps = []
        for buf, pair in zip(self._buffers, self.bank):
            response = _temporal_collapse(buf, pair.kt)
            maps.append(energy_map(response.imag, response.real))
        return EnergyStack(maps=np.stack(maps), frame_index=frame.index)
