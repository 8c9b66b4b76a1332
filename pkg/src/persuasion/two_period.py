"""Two-period bias/precision example: closed form and a brute-force grid oracle.

Period 1 state ``theta_1 ~ N(0, sigma1_sq)``; ``theta_2 = rho theta_1 + eps`` with
``eps ~ N(0, sigma^2)``.  The sender picks first-period bias ``b1`` and posterior
variance ``v1`` to maximize ``-(b1 - beta)^2 - v1 - delta beta^2`` subject to
``b1^2 <= delta (rho^2 v1 + sigma^2)`` and ``0 <= v1 <= sigma1_sq``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from persuasion.exceptions import DomainError, InfeasibleError

__all__ = [
    "TwoPeriodParams",
    "TwoPeriodSolution",
    "binding_grid_v",
    "brute_force_two_period",
    "solve_two_period",
]


@dataclass(frozen=True)
class TwoPeriodParams:
    beta: float
    delta: float
    rho: float
    sigma: float
    sigma1_sq: float

    def __post_init__(self):
        for name in ("beta", "delta", "rho", "sigma", "sigma1_sq"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if not 0 < self.delta <= 1:
            raise DomainError("delta must lie in (0, 1]")
        if self.sigma < 0 or self.sigma1_sq < 0:
            raise DomainError("sigma and sigma1_sq must be nonnegative")

    def objective(self, b1, v1):
        return -((b1 - self.beta) ** 2) - v1 - self.delta * self.beta**2

    def slack(self, b1, v1):
        """``delta (rho^2 v1 + sigma^2) - b1^2``; nonnegative when obedient."""
        return self.delta * (self.rho**2 * v1 + self.sigma**2) - b1**2


@dataclass(frozen=True)
class TwoPeriodSolution:
    """Optimal first-period bias and variance.

    ``case`` is "i" (constraint slack), "ii" (no persistence), "iii" (binding
    constraint, interior variance), "iii-corner" (binding, variance at zero)
    or "iii-capped" (the interior variance exceeds the prior variance, so the
    variance sits at ``sigma1_sq``; ``signal_feasible`` is then False and
    ``v1_interior`` keeps the uncapped value).
    """

    b1: float
    v1: float
    case: str
    signal_feasible: bool = True
    v1_interior: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def solve_two_period(tp: TwoPeriodParams) -> TwoPeriodSolution:
    root = math.sqrt(tp.delta) * tp.sigma
    if tp.beta <= root:
        return TwoPeriodSolution(tp.beta, 0.0, "i")
    if tp.rho**2 == 0:  # also catches rho so small its square underflows
        return TwoPeriodSolution(min(tp.beta, root), 0.0, "ii")
    dr2 = tp.delta * tp.rho**2
    b1 = tp.beta * dr2 / (1 + dr2)
    v1 = tp.beta**2 * dr2 / (1 + dr2) ** 2 - tp.sigma**2 / tp.rho**2
    if v1 < 0:
        return TwoPeriodSolution(root, 0.0, "iii-corner", v1_interior=v1)
    if v1 > tp.sigma1_sq:
        capped = math.sqrt(tp.delta * (tp.rho**2 * tp.sigma1_sq + tp.sigma**2))
        return TwoPeriodSolution(capped, tp.sigma1_sq, "iii-capped", signal_feasible=False, v1_interior=v1)
    return TwoPeriodSolution(b1, v1, "iii", v1_interior=v1)


def brute_force_two_period(tp: TwoPeriodParams, grid_b, grid_v, feas_tol: float = 1e-12) -> tuple[float, float]:
    """Exhaustive argmax of the sender objective over the feasible grid points.

    Ties go to the smaller ``v1``, then the smaller ``b1``.
    """
    gb = np.asarray(grid_b, dtype=float)
    gv = np.asarray(grid_v, dtype=float)
    gv = gv[(gv >= 0) & (gv <= tp.sigma1_sq + feas_tol)]
    B, V = np.meshgrid(gb, gv, indexing="ij")
    feasible = tp.slack(B, V) >= -feas_tol
    if not feasible.any():
        raise InfeasibleError("no feasible grid point")
    obj = np.where(feasible, tp.objective(B, V), -np.inf)
    best = obj.max()
    ib, iv = np.nonzero(obj == best)
    order = np.lexsort((gb[ib], gv[iv]))
    k = order[0]
    return float(gb[ib[k]]), float(gv[iv[k]])


def binding_grid_v(tp: TwoPeriodParams, grid_b) -> np.ndarray:
    """Variance grid on which every ``b1`` in ``grid_b`` has an exactly binding partner.

    On a uniform grid the optimum sits on the curved constraint between grid
    points, and the grid argmax can land O(sqrt(step)) away from it.  Pairing
    each ``b1`` with ``(b1^2/delta - sigma^2)/rho^2`` (clipped to
    ``[0, sigma1_sq]``) restores one-step accuracy while the search stays
    exhaustive and blind to the first-order conditions.
    """
    if tp.rho**2 == 0:  # also catches rho so small its square underflows
        raise DomainError("the constraint does not involve v1 when rho = 0")
    gb = np.asarray(grid_b, dtype=float)
    gv = (gb**2 / tp.delta - tp.sigma**2) / tp.rho**2
    return np.unique(np.clip(gv, 0.0, tp.sigma1_sq))
