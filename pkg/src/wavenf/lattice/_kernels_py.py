"""Pure-numpy stepping kernels.

Selected at import time when the compiled extension is unavailable or
when ``WAVENF_PURE_PYTHON`` is set.  Both backends expose the same
in-place ``run_verlet`` / ``run_yoshida4`` entry points and must agree
to rounding error; the parity test in the suite holds them together.
"""

from __future__ import annotations

import numpy as np

# Fourth-order composition weights (triple-jump splitting).
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


def _pull(q: np.ndarray, alpha: float, beta: float, gamma: float, degree: int) -> np.ndarray:
    """Spring tension phi'(z) on each bond z_j = q_{j+1} - q_j."""
    z = np.roll(q, -1) - q
    out = z + alpha * z * z + beta * z * z * z
    if degree:
        out = out + gamma * z ** (degree - 1)
    return out


def _verlet(q: np.ndarray, p: np.ndarray, dt: float, alpha: float, beta: float, gamma: float, degree: int) -> None:
    pull = _pull(q, alpha, beta, gamma, degree)
    p += (0.5 * dt) * (pull - np.roll(pull, 1))
    q += dt * p
    pull = _pull(q, alpha, beta, gamma, degree)
    p += (0.5 * dt) * (pull - np.roll(pull, 1))


def run_verlet(
    q: np.ndarray,
    p: np.ndarray,
    dt: float,
    steps: int,
    alpha: float,
    beta: float,
    gamma: float,
    degree: int,
) -> None:
    for _ in range(steps):
        _verlet(q, p, dt, alpha, beta, gamma, degree)


def run_yoshida4(
    q: np.ndarray,
    p: np.ndarray,
    dt: float,
    steps: int,
    alpha: float,
    beta: float,
    gamma: float,
    degree: int,
) -> None:
    for _ in range(steps):
        _verlet(q, p, dt * _W1, alpha, beta, gamma, degree)
        _verlet(q, p, dt * _W0, alpha, beta, gamma, degree)
        _verlet(q, p, dt * _W1, alpha, beta, gamma, degree)
