"""Constant-velocity Kalman filter used to coast tracks through occlusion.

State is (row, col, v_row, v_col) with one frame per time step. The
measurement is the detected centroid. Defaults: P = 100*I, Q = 0.01*I,
R = I, velocities start at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# position += velocity each frame
TRANSITION = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)
# measurement extracts (row, col)
MEASUREMENT = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)

DEFAULT_P0 = 100.0
DEFAULT_Q = 0.01
DEFAULT_R = 1.0


@dataclass(frozen=True)
class KalmanState:
    x: np.ndarray  # (4,) state vector
    P: np.ndarray  # (4, 4) error covariance
    A: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    @property
    def position(self) -> tuple[float, float]:
        return (float(self.x[0]), float(self.x[1]))

    @property
    def velocity(self) -> tuple[float, float]:
        return (float(self.x[2]), float(self.x[3]))


def init(
    centroid: tuple[float, float],
    p0: float = DEFAULT_P0,
    q: float = DEFAULT_Q,
    r: float = DEFAULT_R,
) -> KalmanState:
    """New filter at a detected centroid, velocity zero."""
    row, col = centroid
    return KalmanState(
        x=np.array([row, col, 0.0, 0.0]),
        P=p0 * np.eye(4),
        A=TRANSITION,
        H=MEASUREMENT,
        Q=q * np.eye(4),
        R=r * np.eye(2),
    )


def predict(state: KalmanState) -> KalmanState:
    """A priori update: x <- A x, P <- A P A^T + Q."""
    x = state.A @ state.x
    P = state.A @ state.P @ state.A.T + state.Q
    return replace(state, x=x, P=P)


def correct(state: KalmanState, measurement: tuple[float, float]) -> KalmanState:
    """A posteriori update with a measured (row, col) position.

    P is re-symmetrized after the update to keep it positive
    semi-definite under round-off.
    """
    y = np.asarray(measurement, dtype=np.float64)
    innovation_cov = state.H @ state.P @ state.H.T + state.R
    gain = state.P @ state.H.T @ np.linalg.inv(innovation_cov)
    x = state.x + gain @ (y - state.H @ state.x)
    P = (np.eye(4) - gain @ state.H) @ state.P
    P = (P + P.T) / 2.0
    return replace(state, x=x, P=P)
