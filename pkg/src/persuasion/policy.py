"""Optimal one-dimensional bias and variance paths.

Two regimes.  When ``beta <= sigma / sqrt(r - 2 kappa)`` the sender keeps the
receiver fully informed and obtains her preferred bias forever.  Otherwise the
optimum has a transition phase on ``[0, T)``, during which bias and variance
both fall, followed by a stationary phase with zero variance and constant bias
``sigma / sqrt(r - 2 kappa)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from persuasion._mathutil import growth
from persuasion.exceptions import DomainError
from persuasion.state_process import ProcessParams

__all__ = [
    "Ordering",
    "PolicySolution",
    "Regime",
    "comparative_statics_report",
    "eval_bias",
    "eval_variance",
    "pareto_point",
    "relaxed_variance",
    "solve",
    "solve_deterministic",
]

ROOT_XTOL = 1e-15


class Regime(str, Enum):
    FIRST_BEST = "first_best"
    CONSTRAINED = "constrained"


def relaxed_variance(x, p: ProcessParams):
    """Transition-phase variance as a function of the time ``x >= 0`` left until full disclosure.

    Equal to ``-sigma^2/(2 kappa) + sigma^2 (r-2kappa) / (2(r-kappa)) *
    (e^{-2 kappa x} / kappa + e^{2 (r-2kappa) x} / (r-2kappa))``, rearranged so
    that it vanishes exactly at ``x = 0`` and has a finite kappa -> 0 limit.
    """
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    k, c = p.kappa, p.price
    lead = -2.0 * growth(-2 * k, x)
    out = p.sigma**2 / (2 * (p.r - k)) * (c * lead + np.expm1(2 * c * x))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PolicySolution:
    """Optimal bias/variance paths for a scalar state.

    Attributes:
        regime: first-best or constrained.
        T: full-disclosure time; ``math.inf`` for the deterministic-state solution.
        t0: shift into the relaxed solution when the initial variance constraint binds.
        T_relaxed: full-disclosure time of the solution with the initial variance
            constraint dropped (equals ``T + t0``).
        beta: the sender's preference bias.
        params: process parameters.
        b0: initial bias of the deterministic-state solution (``None`` otherwise).
    """

    regime: Regime
    T: float
    t0: float
    T_relaxed: float
    beta: float
    params: ProcessParams
    b0: float | None = None

    @property
    def deterministic(self) -> bool:
        return self.b0 is not None

    @property
    def stationary_bias(self) -> float:
        if self.regime is Regime.FIRST_BEST:
            return self.beta
        if self.deterministic:
            return 0.0
        return self.params.sigma / math.sqrt(self.params.price)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.regime is Regime.CONSTRAINED and 0 < self.T < math.inf:
            return (self.T,)
        return ()

    def bias(self, t):
        return eval_bias(self, t)

    def variance(self, t):
        return eval_variance(self, t)

    def path_pair(self):
        from persuasion.obedience import PathPair

        return PathPair(
            b=self.bias,
            v=self.variance,
            tail_start=self.T,
            b_tail=self.stationary_bias,
            v_tail=0.0,
            breakpoints=self.breakpoints,
        )

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "T": self.T if math.isfinite(self.T) else None,
            "t0": self.t0,
            "T_relaxed": self.T_relaxed if math.isfinite(self.T_relaxed) else None,
            "beta": self.beta,
            "b0": self.b0,
            "params": self.params.to_dict(),
            "stationary_bias": self.stationary_bias,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicySolution":
        """Rebuild a solution from :meth:`to_dict` output without re-solving."""
        params = ProcessParams(**d["params"])
        inf_if_none = lambda x: math.inf if x is None else float(x)  # noqa: E731
        return cls(
            regime=Regime(d["regime"]),
            T=inf_if_none(d["T"]),
            t0=float(d["t0"]),
            T_relaxed=inf_if_none(d["T_relaxed"]),
            beta=float(d["beta"]),
            params=params,
            b0=None if d.get("b0") is None else float(d["b0"]),
        )


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def eval_bias(sol: PolicySolution, t):
    """Optimal bias ``b(t)``; ``sigma/sqrt(r-2kappa) * e^{(r-2kappa)(T-t)+}`` when constrained."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    p = sol.params
    if sol.regime is Regime.FIRST_BEST:
        return _scalar_or_array(np.full(t.shape, sol.beta))
    if sol.deterministic:
        return _scalar_or_array(sol.b0 * np.exp(-p.price * t))
    x = np.maximum(sol.T - t, 0.0)
    return _scalar_or_array(sol.stationary_bias * np.exp(p.price * x))


def eval_variance(sol: PolicySolution, t):
    """Optimal posterior variance ``v(t)``; zero from the full-disclosure time on."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    p = sol.params
    if sol.regime is Regime.FIRST_BEST:
        return _scalar_or_array(np.zeros(t.shape))
    if sol.deterministic:
        c = p.price
        return _scalar_or_array(c / (2 * (p.r - p.kappa)) * sol.b0**2 * np.exp(-2 * c * t))
    return _scalar_or_array(relaxed_variance(sol.T - t, p))


def solve(p: ProcessParams, beta: float) -> PolicySolution:
    """Sender-optimal policy for a stochastic scalar state.

    The relaxed full-disclosure time solves ``beta e^{-(r-2kappa) T} =
    sigma/sqrt(r-2kappa)``.  If the relaxed initial variance exceeds
    ``sigma0_sq`` the relaxed solution is entered at the time ``t0`` where its
    variance has fallen to ``sigma0_sq``.
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    if p.sigma == 0:
        raise DomainError("sigma = 0 is the deterministic-state model; use solve_deterministic")
    c = p.price
    level = p.sigma / math.sqrt(c)
    if beta <= level:
        return PolicySolution(Regime.FIRST_BEST, T=0.0, t0=0.0, T_relaxed=0.0, beta=beta, params=p)
    T_rel = math.log(beta / level) / c
    if relaxed_variance(T_rel, p) <= p.sigma0_sq:
        return PolicySolution(Regime.CONSTRAINED, T=T_rel, t0=0.0, T_relaxed=T_rel, beta=beta, params=p)
    if p.sigma0_sq == 0:
        T = 0.0
    else:
        # relaxed_variance is strictly increasing in the remaining time.
        T = brentq(
            lambda x: relaxed_variance(x, p) - p.sigma0_sq,
            0.0,
            T_rel,
            xtol=ROOT_XTOL,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    return PolicySolution(Regime.CONSTRAINED, T=T, t0=T_rel - T, T_relaxed=T_rel, beta=beta, params=p)


def solve_deterministic(p: ProcessParams, beta: float) -> PolicySolution:
    """Optimal policy when the state evolves deterministically (``sigma = 0``).

    Bias and variance decay exponentially and never reach zero; the initial
    bias is ``min(beta, sqrt(2 sigma0_sq (r-kappa)/(r-2kappa)))``.
    """
    if p.sigma != 0:
        raise DomainError(f"solve_deterministic requires sigma = 0, got {p.sigma}")
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    c = p.price
    b0 = min(beta, math.sqrt(2 * p.sigma0_sq * (p.r - p.kappa) / c))
    t0 = math.log(beta / b0) / c if b0 > 0 else math.inf
    return PolicySolution(
        Regime.CONSTRAINED, T=math.inf, t0=t0, T_relaxed=math.inf, beta=beta, params=p, b0=b0
    )


def pareto_point(p: ProcessParams, beta: float, pi: float) -> PolicySolution:
    """Policy maximizing ``pi * u_S + (1 - pi) * u_R``.

    The weighted objective equals the loss of a sender with bias ``pi * beta``
    up to a constant, so this is ``solve(p, pi * beta)``; at ``pi = 0`` it is
    zero-bias full disclosure.
    """
    if not 0 <= pi < 1:
        raise DomainError(f"pi must lie in [0, 1), got {pi}")
    if pi * beta == 0:
        return PolicySolution(Regime.FIRST_BEST, T=0.0, t0=0.0, T_relaxed=0.0, beta=0.0, params=p)
    if p.sigma == 0:
        return solve_deterministic(p, pi * beta)
    return solve(p, pi * beta)


@dataclass(frozen=True)
class Ordering:
    """Pointwise comparison of two solutions on a grid ("hi" relative to "lo")."""

    bias: str
    variance: str
    bias_strict: bool
    variance_strict: bool
    max_bias_gap: float
    max_variance_gap: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _direction(diff: np.ndarray, tol: float) -> tuple[str, bool]:
    up = bool(np.any(diff > tol))
    down = bool(np.any(diff < -tol))
    if up and down:
        return "mixed", False
    if up:
        return "increasing", True
    if down:
        return "decreasing", True
    return "equal", False


def comparative_statics_report(
    sol_lo: PolicySolution, sol_hi: PolicySolution, grid, tol: float = 1e-12
) -> Ordering:
    """Classify how bias and variance move from ``sol_lo`` to ``sol_hi`` on ``grid``.

    "increasing" means weakly higher everywhere and strictly higher somewhere.
    """
    grid = np.asarray(grid, dtype=float)
    db = eval_bias(sol_hi, grid) - eval_bias(sol_lo, grid)
    dv = eval_variance(sol_hi, grid) - eval_variance(sol_lo, grid)
    b_dir, b_strict = _direction(np.atleast_1d(db), tol)
    v_dir, v_strict = _direction(np.atleast_1d(dv), tol)
    return Ordering(
        bias=b_dir,
        variance=v_dir,
        bias_strict=b_strict,
        variance_strict=v_strict,
        max_bias_gap=float(np.max(np.abs(db))),
        max_variance_gap=float(np.max(np.abs(dv))),
    )
