"""Discounted losses, reservation values and obedience checks for bias/variance paths.

All losses are positive numbers (negated utilities).  Integrals over
``[t, inf)`` are split at the start of the stationary tail: adaptive
quadrature on the bounded transition part, exact closed form on the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from persuasion.exceptions import DomainError

__all__ = [
    "ObedienceReport",
    "PathPair",
    "continuation_loss",
    "ode_residual",
    "reservation_loss",
    "sender_loss",
    "verify_obedience",
]

DEFAULT_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class PathPair:
    """A bias path and a variance path, each scalar or per-component.

    From ``tail_start`` on the paths are constant at ``b_tail`` and ``v_tail``;
    ``tail_start = inf`` means there is no stationary tail.  ``b`` may return a
    vector (multidimensional bias) and ``v`` a vector of component variances.
    """

    b: Callable[[float], float | np.ndarray]
    v: Callable[[float], float | np.ndarray]
    tail_start: float = math.inf
    b_tail: float | np.ndarray = 0.0
    v_tail: float | np.ndarray = 0.0
    breakpoints: Sequence[float] = field(default_factory=tuple)

    @classmethod
    def constant(cls, b, v) -> "PathPair":
        b_arr = np.asarray(b, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        return cls(
            b=lambda t: b_arr,
            v=lambda t: v_arr,
            tail_start=0.0,
            b_tail=b_arr,
            v_tail=v_arr,
        )

    def receiver_flow(self, t: float) -> float:
        b = np.asarray(self.b(t), dtype=float)
        return float(np.sum(b * b) + np.sum(self.v(t)))

    def sender_flow(self, t: float, beta) -> float:
        gap = np.asarray(self.b(t), dtype=float) - np.asarray(beta, dtype=float)
        return float(np.sum(gap * gap) + np.sum(self.v(t)))


def _discounted_integral(
    flow: Callable[[float], float],
    t: float,
    r: float,
    tail_start: float,
    tail_value: float,
    breakpoints: Sequence[float],
    quad_tol: float,
) -> float:
    """``int_t^inf r e^{-r(s-t)} flow(s) ds`` with a constant tail from ``tail_start``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    total = 0.0
    if t < tail_start:
        upper = tail_start
        pts = sorted(bp for bp in breakpoints if t < bp < upper)
        integrand = lambda s: r * math.exp(-r * (s - t)) * flow(s)  # noqa: E731
        if math.isfinite(upper):
            val, _ = quad(integrand, t, upper, points=pts or None, epsabs=quad_tol, epsrel=0, limit=200)
            total += val
        else:
            edges = [t, *pts]
            for a, b in zip(edges[:-1], edges[1:]):
                val, _ = quad(integrand, a, b, epsabs=quad_tol, epsrel=0, limit=200)
                total += val
            val, _ = quad(integrand, edges[-1], math.inf, epsabs=quad_tol, epsrel=0, limit=200)
            total += val
    if math.isfinite(tail_start):
        total += math.exp(-r * max(tail_start - t, 0.0)) * tail_value
    if not math.isfinite(total):
        raise DomainError("discounted integral diverges")
    return total


def continuation_loss(pp: PathPair, t: float, r: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Receiver's discounted loss from following the paths from time ``t`` on."""
    b_tail = np.asarray(pp.b_tail, dtype=float)
    tail_value = float(np.sum(b_tail * b_tail) + np.sum(pp.v_tail))
    return _discounted_integral(pp.receiver_flow, t, r, pp.tail_start, tail_value, pp.breakpoints, quad_tol)


def sender_loss(pp: PathPair, beta, r: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Sender's discounted loss ``int_0^inf r e^{-rt} (|b - beta|^2 + sum v) dt``."""
    gap = np.asarray(pp.b_tail, dtype=float) - np.asarray(beta, dtype=float)
    tail_value = float(np.sum(gap * gap) + np.sum(pp.v_tail))
    return _discounted_integral(
        lambda s: pp.sender_flow(s, beta), 0.0, r, pp.tail_start, tail_value, pp.breakpoints, quad_tol
    )


def _components(p):
    """(kappa array, sigma array, r) for scalar or multidimensional parameters."""
    kappa = np.atleast_1d(np.asarray(p.kappa, dtype=float))
    sigma = np.atleast_1d(np.asarray(p.sigma, dtype=float))
    return kappa, sigma, float(p.r)


def reservation_loss(v_t, p) -> float:
    """Deviator's loss ``(sigma^2 + r v)/(r - 2 kappa)``, summed over components."""
    kappa, sigma, r = _components(p)
    v = np.atleast_1d(np.asarray(v_t, dtype=float))
    if np.any(v < 0):
        raise DomainError("variance must be nonnegative")
    return float(np.sum((sigma**2 + r * v) / (r - 2 * kappa)))


@dataclass
class ObedienceReport:
    """Obedience excess ``continuation - reservation`` on a grid (positive = violated)."""

    t: np.ndarray
    excess: np.ndarray
    binding: np.ndarray
    tol: float

    @property
    def max_excess(self) -> float:
        return float(np.max(self.excess))

    @property
    def max_abs_excess(self) -> float:
        return float(np.max(np.abs(self.excess)))

    @property
    def worst_time(self) -> float:
        return float(self.t[int(np.argmax(self.excess))])

    @property
    def obedient(self) -> bool:
        return self.max_excess <= self.tol

    @property
    def all_binding(self) -> bool:
        return bool(np.all(self.binding))

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "excess": self.excess.tolist(),
            "binding": self.binding.tolist(),
            "max_excess": self.max_excess,
            "obedient": self.obedient,
        }


def verify_obedience(pp: PathPair, p, grid, tol: float = 1e-6, quad_tol: float = DEFAULT_QUAD_TOL) -> ObedienceReport:
    """Evaluate the obedience constraint at every grid time."""
    grid = np.asarray(grid, dtype=float)
    excess = np.empty_like(grid)
    for k, t in enumerate(grid):
        excess[k] = continuation_loss(pp, t, p.r, quad_tol) - reservation_loss(pp.v(t), p)
    return ObedienceReport(t=grid, excess=excess, binding=np.abs(excess) < tol, tol=tol)


def ode_residual(pp: PathPair, p, t: float, fd_step: float | None = None) -> float:
    """Residual of the binding-obedience differential equation at ``t``.

    Scalar: ``(r-2kappa) b^2 - 2 kappa v - sigma^2 + v'``.  Vector:
    ``|b|^2 - sum_i (2 kappa_i v_i + sigma_i^2 - v_i') / (r - 2 kappa_i)``.
    ``v'`` is a central finite difference; times within ``10 * fd_step`` of a
    breakpoint are rejected.
    """
    if fd_step is None:
        fd_step = 1e-6 * max(1.0, t)
    if t - fd_step < 0:
        raise DomainError("t too close to 0 for a central difference")
    for bp in pp.breakpoints:
        if abs(t - bp) < 10 * fd_step:
            raise DomainError(f"t={t} is within the exclusion window of breakpoint {bp}")
    kappa, sigma, r = _components(p)
    b = np.asarray(pp.b(t), dtype=float)
    v = np.atleast_1d(np.asarray(pp.v(t), dtype=float))
    dv = (np.atleast_1d(pp.v(t + fd_step)) - np.atleast_1d(pp.v(t - fd_step))) / (2 * fd_step)
    if kappa.size == 1:
        c = r - 2 * kappa[0]
        return float(c * np.sum(b * b) - 2 * kappa[0] * v[0] - sigma[0] ** 2 + dv[0])
    return float(np.sum(b * b) - np.sum((2 * kappa * v + sigma**2 - dv) / (r - 2 * kappa)))
