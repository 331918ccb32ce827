"""Linear-ramp angle schedules and (delta_beta, delta_gamma) scan grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

DEFAULT_DELTA_BETA = 0.3
DEFAULT_DELTA_GAMMA = 0.6
SCAN_MAX = 3 * math.pi / 4


@dataclass(frozen=True)
class LinearRampSchedule:
    delta_beta: float
    delta_gamma: float
    layers: int
    betas: tuple
    gammas: tuple

    @property
    def p(self) -> int:
        return self.layers

    def to_dict(self) -> dict:
        return {"delta_beta": self.delta_beta, "delta_gamma": self.delta_gamma, "p": self.layers}

    @classmethod
    def from_dict(cls, data) -> "LinearRampSchedule":
        return build_schedule(data["delta_beta"], data["delta_gamma"], data["p"])


def build_schedule(delta_beta: float, delta_gamma: float, p: int) -> LinearRampSchedule:
    """``beta_i = (1 - i/p) delta_beta`` and ``gamma_i = (i + 1)/p delta_gamma`` for i < p."""
    if int(p) != p or p < 1:
        raise ParameterError(f"number of layers must be a positive integer, got {p}")
    if delta_beta < 0 or delta_gamma < 0:
        raise ParameterError("ramp amplitudes must be non-negative")
    p = int(p)
    db, dg = float(delta_beta), float(delta_gamma)
    betas = tuple((1 - i / p) * db for i in range(p))
    gammas = tuple(((i + 1) / p) * dg for i in range(p))
    return LinearRampSchedule(db, dg, p, betas, gammas)


def grid_axis(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ParameterError("a scan axis needs at least 2 steps")
    if hi < lo:
        raise ParameterError("scan range must satisfy lo <= hi")
    return np.linspace(lo, hi, int(steps))


def delta_grid(
    beta_range: tuple[float, float] = (0.0, SCAN_MAX),
    gamma_range: tuple[float, float] = (0.0, SCAN_MAX),
    steps: int | tuple[int, int] = 4,
) -> list[tuple[float, float]]:
    """Cartesian product of the two axes, beta-major.

    ``steps`` may be a single count (square grid) or ``(beta_steps, gamma_steps)``.
    """
    nb, ng = (steps, steps) if isinstance(steps, int) else steps
    betas = grid_axis(*beta_range, nb)
    gammas = grid_axis(*gamma_range, ng)
    return [(float(b), float(g)) for b in betas for g in gammas]
