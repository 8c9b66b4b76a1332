"""Gaussian state process: moments, the variance-updating map, exact sampling.

The state follows ``d theta = kappa * theta dt + sigma dZ`` with a normal
initial condition.  For negative times the state is extended by an
independent Brownian motion, ``theta_t = theta_0 + Y_{-t}``, which serves as
the sender's randomization device under delayed reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from persuasion._mathutil import growth
from persuasion.exceptions import DomainError

__all__ = [
    "NO_REPORT",
    "ProcessParams",
    "StatePath",
    "conditional_mean",
    "eta",
    "eta_inverse",
    "make_rng",
    "posterior_given_report",
    "report_delay",
    "sample_path",
    "sample_prehistory",
]


class _NoReport:
    """Sentinel for a reporting time of minus infinity (nothing disclosed yet)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NO_REPORT"

    def __reduce__(self):
        return (_NoReport, ())


NO_REPORT = _NoReport()


@dataclass(frozen=True)
class ProcessParams:
    """Parameters of the scalar state process and the common discount rate.

    Attributes:
        kappa: persistence rate; negative is mean reverting, positive explosive.
        sigma: volatility. Zero only for the deterministic-state model.
        r: discount rate, must exceed ``2 * kappa``.
        mu0: mean of the initial state.
        sigma0_sq: variance of the initial state.
    """

    kappa: float
    sigma: float
    r: float
    mu0: float = 0.0
    sigma0_sq: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "sigma", "r", "mu0", "sigma0_sq"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.r <= 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not 2 * self.kappa < self.r:
            raise DomainError(
                f"2*kappa < r is required for finite payoffs (kappa={self.kappa}, r={self.r})"
            )
        if self.sigma < 0:
            raise DomainError(f"sigma must be nonnegative, got {self.sigma}")
        if self.sigma0_sq < 0:
            raise DomainError(f"sigma0_sq must be nonnegative, got {self.sigma0_sq}")

    @property
    def price(self) -> float:
        """The rate ``r - 2*kappa`` at which squared bias is paid for in variance."""
        return self.r - 2 * self.kappa

    def replace(self, **changes) -> "ProcessParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "sigma": self.sigma,
            "r": self.r,
            "mu0": self.mu0,
            "sigma0_sq": self.sigma0_sq,
        }


@dataclass(frozen=True)
class StatePath:
    times: np.ndarray
    values: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise DomainError("times and values must have equal shape")
        if self.times.size and self.times[0] < 0:
            raise DomainError("state paths start at a nonnegative time")


def make_rng(seed: int, *counter: int) -> np.random.Generator:
    """Counter-based generator: the stream depends only on ``(seed, *counter)``."""
    ss = np.random.SeedSequence([int(seed), *(int(c) for c in counter)])
    return np.random.Generator(np.random.Philox(ss))


def eta(v, h, p: ProcessParams):
    """Posterior variance after a duration ``h`` without new information.

    ``e^{2 kappa h} v + (e^{2 kappa h} - 1) sigma^2 / (2 kappa)``, or
    ``v + sigma^2 h`` in the limit kappa -> 0.  Works elementwise on arrays.
    """
    v_arr = np.asarray(v, dtype=float)
    h_arr = np.asarray(h, dtype=float)
    if np.any(v_arr < 0) or np.any(h_arr < 0):
        raise DomainError("eta requires v >= 0 and h >= 0")
    return _eta_unchecked(v, h, p.kappa, p.sigma)


def _eta_unchecked(v, h, kappa: float, sigma: float):
    # Also used with negative h to run the no-information law backwards.
    if np.ndim(v) == 0 and np.ndim(h) == 0:
        return math.exp(2 * kappa * h) * v + sigma**2 * growth(2 * kappa, h)
    h = np.asarray(h, dtype=float)
    g = growth(2 * kappa, h)
    return np.exp(2 * kappa * h) * np.asarray(v, dtype=float) + sigma**2 * g


def eta_inverse(target: float, h: float, p: ProcessParams) -> float:
    """Solve ``eta(w, h) = target`` for the starting variance ``w``."""
    if h < 0:
        raise DomainError("h must be nonnegative")
    return (target - p.sigma**2 * growth(2 * p.kappa, h)) * math.exp(-2 * p.kappa * h)


def report_delay(v: float, p: ProcessParams) -> float:
    """Solve ``eta(0, d) = v`` for the delay ``d >= 0``."""
    if v < 0:
        raise DomainError("variance must be nonnegative")
    if v == 0:
        return 0.0
    if p.sigma == 0:
        raise DomainError("with sigma = 0 no positive variance is reached from zero")
    s2 = p.sigma**2
    arg = 2 * p.kappa * v / s2
    if abs(arg) < 1e-200:
        return v / s2
    if arg <= -1:
        raise DomainError(
            f"variance {v} exceeds the stationary level {-s2 / (2 * p.kappa)}"
        )
    return math.log1p(arg) / (2 * p.kappa)


def conditional_mean(theta_t, dt, p: ProcessParams):
    """Expected state ``dt`` time units ahead: ``e^{kappa dt} theta_t``."""
    if np.any(np.asarray(dt) < 0):
        raise DomainError("dt must be nonnegative")
    return np.exp(p.kappa * np.asarray(dt, dtype=float)) * theta_t


def sample_path(p: ProcessParams, grid, seed: int) -> StatePath:
    """Draw the state exactly on ``grid`` using the Gaussian transition law."""
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("grid must be a nonempty 1-d array")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise DomainError("grid must be strictly increasing from a nonnegative time")
    rng = make_rng(seed, 0)
    z = rng.standard_normal(times.size)
    values = np.empty_like(times)
    t0 = times[0]
    mean0 = math.exp(p.kappa * t0) * p.mu0
    values[0] = mean0 + math.sqrt(eta(p.sigma0_sq, t0, p)) * z[0]
    for k in range(1, times.size):
        h = times[k] - times[k - 1]
        values[k] = math.exp(p.kappa * h) * values[k - 1] + math.sqrt(eta(0.0, h, p)) * z[k]
    return StatePath(times=times, values=values, seed=seed)


def sample_prehistory(theta0, pre_times, seed: int | None = None, rng=None):
    """Values ``theta_0 + Y_{-t}`` of the fictitious history at negative times.

    ``Y`` is a standard Brownian motion independent of the state; increments are
    drawn in order of increasing ``|t|`` so that the joint law is exact.
    ``theta0`` may be an array of per-path initial states; the result then has
    shape ``theta0.shape + (len(pre_times),)``.
    """
    pre = np.asarray(pre_times, dtype=float)
    if pre.ndim != 1:
        raise DomainError("pre_times must be 1-d")
    if np.any(pre >= 0):
        raise DomainError("prehistory times must be strictly negative")
    if rng is None:
        rng = make_rng(0 if seed is None else seed, 1)
    theta0 = np.asarray(theta0, dtype=float)
    lags = -pre
    order = np.argsort(lags, kind="stable")
    steps = np.diff(np.concatenate([[0.0], lags[order]]))
    z = rng.standard_normal(theta0.shape + (pre.size,))
    y_sorted = np.cumsum(np.sqrt(steps) * z, axis=-1)
    y = np.empty_like(y_sorted)
    y[..., order] = y_sorted
    return theta0[..., None] + y if theta0.ndim else float(theta0) + y


def posterior_given_report(report, phi_t, t: float, p: ProcessParams):
    """Mean and variance of the state at time ``t`` given the report ``theta_{phi_t}``.

    Args:
        report: reported realization (ignored when ``phi_t`` is ``NO_REPORT``);
            may be an array of per-path reports.
        phi_t: reporting time, ``NO_REPORT`` or a float ``<= t``.
        t: current time.
        p: process parameters.

    Returns:
        ``(mean, variance)``.
    """
    if phi_t is NO_REPORT:
        mean = math.exp(p.kappa * t) * p.mu0
        if np.ndim(report):
            mean = np.full(np.shape(report), mean)
        return mean, _eta_unchecked(p.sigma0_sq, t, p.kappa, p.sigma)
    phi_t = float(phi_t)
    if phi_t > t:
        raise DomainError(f"report time {phi_t} lies after current time {t}")
    if phi_t >= 0:
        lag = t - phi_t
        return math.exp(p.kappa * lag) * np.asarray(report) * 1.0, eta(0.0, lag, p)
    # Report is theta_0 + Y_{-phi}; Gaussian conjugate update for theta_0.
    s0 = p.sigma0_sq
    if s0 == 0:
        post_var0 = 0.0
        post_mean0 = p.mu0 + 0.0 * np.asarray(report)
    else:
        post_var0 = 1.0 / (1.0 / s0 - 1.0 / phi_t)
        post_mean0 = p.mu0 + s0 / (s0 - phi_t) * (np.asarray(report) - p.mu0)
    mean = math.exp(p.kappa * t) * post_mean0
    return mean, eta(post_var0, t, p)
