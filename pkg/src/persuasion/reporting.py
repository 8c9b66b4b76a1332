"""Bayes plausibility of variance paths and their delayed-reporting implementation.

A reporting function ``phi`` tells the sender to report, at time ``t``, the
realized state at the earlier time ``phi(t)``.  Negative report times refer to
the fictitious pre-history ``theta_0 + Y_{-t}``; ``NO_REPORT`` means nothing has
been disclosed yet.  Any Bayes-plausible variance path is induced by the
reporting function built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from persuasion.exceptions import DomainError
from persuasion.state_process import (
    NO_REPORT,
    ProcessParams,
    eta,
    eta_inverse,
    posterior_given_report,
    report_delay,
)

__all__ = [
    "PlausibilityVerdict",
    "ReportingFunction",
    "VariancePath",
    "Violation",
    "build_reporting_function",
    "decision_rule_action",
    "induced_variance",
    "is_bayes_plausible",
]

# Relative tolerance for treating v(t) as equal to the no-information variance.
TANGENCY_TOL = 1e-12

NONE, PREHISTORY, DELAY = "none", "prehistory", "delay"
_CASE_ORDER = {NONE: 0, PREHISTORY: 1, DELAY: 2}


@dataclass(frozen=True)
class VariancePath:
    """A nonnegative variance path on ``[0, inf)``.

    Either a closed-form evaluator (``fn``) with known breakpoints, or samples
    ``(times, values)`` interpolated linearly and held constant past the last
    sample.
    """

    fn: Callable | None = None
    times: np.ndarray | None = None
    values: np.ndarray | None = None
    breakpoints: tuple[float, ...] = ()
    horizon: float | None = None

    def __post_init__(self):
        if (self.fn is None) == (self.times is None):
            raise DomainError("give exactly one of fn or (times, values)")
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size == 0:
                raise DomainError("times and values must be equal-length 1-d arrays")
            if t[0] != 0 or np.any(np.diff(t) <= 0):
                raise DomainError("sample times must start at 0 and strictly increase")
            if np.any(v < 0):
                raise DomainError("variance samples must be nonnegative")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, breakpoints: Sequence[float] = (), horizon: float | None = None):
        return cls(fn=fn, breakpoints=tuple(b for b in breakpoints if math.isfinite(b)), horizon=horizon)

    @classmethod
    def from_grid(cls, times, values):
        return cls(times=times, values=values)

    @classmethod
    def from_solution(cls, sol):
        """Variance path of a :class:`~persuasion.policy.PolicySolution`."""
        return cls.from_function(sol.variance, breakpoints=sol.breakpoints)

    def __call__(self, t):
        if self.fn is not None:
            return self.fn(t)
        out = np.interp(t, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def default_horizon(self) -> float:
        if self.horizon is not None:
            return self.horizon
        if self.times is not None:
            return float(self.times[-1]) + 1.0
        return 1.5 * max(self.breakpoints, default=1.0) + 1.0

    def default_grid(self, n: int = 2001) -> np.ndarray:
        if self.times is not None:
            return self.times.copy()
        grid = np.linspace(0.0, self.default_horizon, n)
        return np.unique(np.concatenate([grid, self.breakpoints]))

    def to_dict(self, grid=None) -> dict:
        times = self.default_grid() if grid is None else np.asarray(grid, dtype=float)
        return {"times": times.tolist(), "values": np.asarray(self(times), dtype=float).tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "VariancePath":
        return cls.from_grid(np.asarray(d["times"], dtype=float), np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class Violation:
    kind: str  # "initial", "no_disclosure" or "negative"
    t: float
    s: float | None
    magnitude: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PlausibilityVerdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return {"plausible": self.ok, "violations": [v.to_dict() for v in self.violations]}


def is_bayes_plausible(v: VariancePath, p: ProcessParams, grid=None, tol: float = 1e-9) -> PlausibilityVerdict:
    """Check the initial-variance constraint and the no-disclosure upper bound.

    The upper bound ``v(s) <= eta(v(t), s - t)`` is checked on adjacent grid
    points only; by the semigroup property of ``eta`` this implies it for all
    grid pairs.
    """
    grid = v.default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing from 0")
    values = np.atleast_1d(np.asarray(v(grid), dtype=float))
    verdict = PlausibilityVerdict()
    for t, val in zip(grid, values):
        if val < -tol:
            verdict.violations.append(Violation("negative", float(t), None, float(-val)))
    if values[0] > p.sigma0_sq + tol:
        verdict.violations.append(Violation("initial", 0.0, None, float(values[0] - p.sigma0_sq)))
    bound = eta(np.maximum(values[:-1], 0.0), np.diff(grid), p)
    excess = values[1:] - bound
    for k in np.flatnonzero(excess > tol):
        verdict.violations.append(
            Violation("no_disclosure", float(grid[k]), float(grid[k + 1]), float(excess[k]))
        )
    verdict.violations.sort(key=lambda x: x.t)
    return verdict


def _classify(v_t: float, t: float, p: ProcessParams) -> str:
    top = eta(p.sigma0_sq, t, p)
    if v_t >= top - TANGENCY_TOL * max(1.0, top):
        return NONE
    if v_t > eta(0.0, t, p):
        return PREHISTORY
    return DELAY


def _phi_value(v_t: float, t: float, p: ProcessParams, case: str):
    if case == NONE:
        return NO_REPORT
    if case == PREHISTORY:
        w = eta_inverse(v_t, t, p)
        if w <= 0:
            return 0.0
        return 1.0 / (1.0 / p.sigma0_sq - 1.0 / w)
    return t - report_delay(max(v_t, 0.0), p)


@dataclass(frozen=True)
class Piece:
    start: float
    end: float
    kind: str

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end if math.isfinite(self.end) else None, "kind": self.kind}


@dataclass(frozen=True)
class ReportingFunction:
    """Delayed-reporting schedule implementing a variance path.

    ``pieces`` lists the consecutive intervals on which no report, a
    pre-history report, or a delayed report of the true state is sent.
    """

    variance: VariancePath
    params: ProcessParams
    pieces: tuple[Piece, ...]

    def case(self, t: float) -> str:
        return _classify(float(self.variance(t)), t, self.params)

    def __call__(self, t: float):
        if t < 0:
            raise DomainError("t must be nonnegative")
        v_t = float(self.variance(t))
        return _phi_value(v_t, t, self.params, _classify(v_t, t, self.params))

    def evaluate(self, times) -> tuple[np.ndarray, np.ndarray]:
        """Report times on a grid as ``(values, reported)``; ``values`` is NaN where nothing is reported."""
        times = np.asarray(times, dtype=float)
        out = np.full(times.shape, np.nan)
        reported = np.zeros(times.shape, dtype=bool)
        for k, t in enumerate(times):
            phi = self(float(t))
            if phi is not NO_REPORT:
                out[k] = phi
                reported[k] = True
        return out, reported

    def is_monotone(self, grid, tol: float = 1e-9) -> bool:
        """Weakly increasing, below the diagonal, and never returning to an earlier case."""
        grid = np.unique(np.concatenate([np.asarray(grid, dtype=float), [pc.start for pc in self.pieces]]))
        last_case, last_phi = -1, -math.inf
        for t in grid:
            t = float(t)
            case = _CASE_ORDER[self.case(t)]
            phi = self(t)
            if case < last_case:
                return False
            if phi is not NO_REPORT:
                if phi > t + tol or phi < last_phi - tol * max(1.0, abs(last_phi)):
                    return False
                last_phi = phi
            elif last_case > 0:
                return False
            last_case = case
        return True

    def to_dict(self) -> dict:
        return {"pieces": [pc.to_dict() for pc in self.pieces]}


def _case_boundary(v: VariancePath, p: ProcessParams, lo: float, hi: float, rank: int) -> float:
    """Smallest time in ``(lo, hi]`` where the case rank reaches ``rank``."""
    f = lambda t: _CASE_ORDER[_classify(float(v(t)), t, p)] >= rank  # noqa: E731
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _pieces(v: VariancePath, p: ProcessParams, grid: np.ndarray) -> tuple[Piece, ...]:
    cases = [_CASE_ORDER[_classify(float(v(t)), float(t), p)] for t in grid]
    kinds = [NONE, PREHISTORY, DELAY]
    starts: dict[int, float] = {}
    for k, c in enumerate(cases):
        if c in starts:
            continue
        if k == 0:
            starts[c] = 0.0
        else:
            starts[c] = _case_boundary(v, p, float(grid[k - 1]), float(grid[k]), c)
    ordered = sorted(starts.items())
    pieces = []
    for j, (c, start) in enumerate(ordered):
        end = ordered[j + 1][1] if j + 1 < len(ordered) else math.inf
        pieces.append(Piece(start, end, kinds[c]))
    return tuple(pieces)


def build_reporting_function(v: VariancePath, p: ProcessParams, grid=None, tol: float = 1e-9) -> ReportingFunction:
    """Construct the reporting function inducing ``v``.

    For each ``t``: no report if ``v(t)`` equals the no-information variance
    ``eta(sigma0_sq, t)``; a pre-history report at ``phi < 0`` if ``v(t)`` lies
    strictly between ``eta(0, t)`` and that level; otherwise a report of the
    true state with delay ``d`` solving ``eta(0, d) = v(t)``.

    Raises:
        DomainError: if ``v`` is not Bayes plausible on the check grid.
    """
    grid = v.default_grid() if grid is None else np.asarray(grid, dtype=float)
    verdict = is_bayes_plausible(v, p, grid, tol)
    if not verdict:
        first = verdict.first
        raise DomainError(
            f"variance path is not Bayes plausible: {first.kind} constraint violated at t={first.t}"
            f" by {first.magnitude:.3g}"
        )
    return ReportingFunction(variance=v, params=p, pieces=_pieces(v, p, grid))


def induced_variance(phi: ReportingFunction, t: float, p: ProcessParams) -> float:
    """Posterior variance of the state at ``t`` given the single report ``theta_{phi(t)}``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    _, var = posterior_given_report(0.0, phi(t), t, p)
    return float(var)


def decision_rule_action(report, phi_t, t: float, b_t: float, p: ProcessParams):
    """Recommended action: posterior mean of the state given the report, plus the bias."""
    mean, _ = posterior_given_report(report, phi_t, t, p)
    return mean + b_t
