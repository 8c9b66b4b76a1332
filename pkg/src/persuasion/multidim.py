"""Optimal policy for a state with independent components.

Components are revealed one after another in order of increasing persistence.
Full-disclosure times come from a shooting procedure: starting from a bias
magnitude ``alpha`` and initial variances ``nu``, run the binding-obedience
dynamics phase by phase until the variances are exhausted or the bias reaches
the stationary level ``sigma_hat``.  The miss distance

    f(alpha, nu) = |b(T)| - sigma_hat - sum_i v_i(T)

is single-crossing in ``alpha`` (from below) and in ``nu`` along a chain of
variance vectors (from above); nested root finds on it pin down the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from persuasion._mathutil import KAPPA_EPS, growth
from persuasion.exceptions import DomainError
from persuasion.policy import Regime
from persuasion.state_process import _eta_unchecked

__all__ = [
    "MultiDimSolution",
    "MultiParams",
    "ShootResult",
    "chain_point",
    "eval_multi",
    "shoot",
    "sigma_hat",
    "solve_multidim",
]

ROOT_XTOL = 1e-14
_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class MultiParams:
    """Parameters of an n-component state.

    Components must be sorted by ``kappa`` ascending; :meth:`sorted` returns a
    sorted copy and the permutation applied.
    """

    kappa: np.ndarray
    sigma: np.ndarray
    sigma0_sq: np.ndarray
    r: float
    beta: np.ndarray
    mu0: np.ndarray | None = None

    def __post_init__(self):
        kappa = np.atleast_1d(np.asarray(self.kappa, dtype=float))
        n = kappa.size
        arrays = {}
        for name in ("sigma", "sigma0_sq", "beta"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if arr.shape != (n,):
                raise DomainError(f"{name} must have {n} components, got shape {arr.shape}")
            arrays[name] = arr
        mu0 = np.zeros(n) if self.mu0 is None else np.atleast_1d(np.asarray(self.mu0, dtype=float))
        if mu0.shape != (n,):
            raise DomainError(f"mu0 must have {n} components")
        for name, arr in [("kappa", kappa), *arrays.items(), ("mu0", mu0)]:
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} must be finite")
        if n == 0:
            raise DomainError("need at least one component")
        if not self.r > 0 or not math.isfinite(self.r):
            raise DomainError(f"r must be positive, got {self.r}")
        if np.any(2 * kappa >= self.r):
            raise DomainError("2*kappa_i < r is required for every component")
        if np.any(arrays["sigma"] <= 0):
            raise DomainError("every sigma_i must be positive")
        if np.any(arrays["sigma0_sq"] < 0):
            raise DomainError("sigma0_sq must be nonnegative")
        if np.any(np.diff(kappa) < 0):
            raise DomainError("components must be sorted by increasing kappa; use MultiParams.sorted")
        if not np.any(arrays["beta"] != 0):
            raise DomainError("beta must not be the zero vector")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "mu0", mu0)
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @classmethod
    def sorted(cls, kappa, sigma, sigma0_sq, r, beta, mu0=None) -> tuple["MultiParams", np.ndarray]:
        kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
        perm = np.argsort(kappa, kind="stable")
        take = lambda x: None if x is None else np.atleast_1d(np.asarray(x, dtype=float))[perm]  # noqa: E731
        return cls(kappa[perm], take(sigma), take(sigma0_sq), r, take(beta), take(mu0)), perm

    @property
    def n(self) -> int:
        return self.kappa.size

    @property
    def price(self) -> np.ndarray:
        return self.r - 2 * self.kappa

    @property
    def beta_norm(self) -> float:
        return float(np.linalg.norm(self.beta))

    @property
    def direction(self) -> np.ndarray:
        return self.beta / self.beta_norm

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa.tolist(),
            "sigma": self.sigma.tolist(),
            "sigma0_sq": self.sigma0_sq.tolist(),
            "r": self.r,
            "beta": self.beta.tolist(),
            "mu0": self.mu0.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MultiParams":
        return cls(d["kappa"], d["sigma"], d["sigma0_sq"], d["r"], d["beta"], d.get("mu0"))


def sigma_hat(p: MultiParams) -> tuple[np.ndarray, float]:
    """Partial sums ``sigma_hat_j^2 = sum_{i<=j} sigma_i^2/(r-2kappa_i)`` and ``sigma_hat``."""
    partial = np.cumsum(p.sigma**2 / p.price)
    return partial, float(math.sqrt(partial[-1]))


def _phase_variance(u, v_start, b_start, k, c, s_hat_i_sq):
    """Own-component variance ``u`` after the start of its disclosure phase.

    Solves ``v' = 2 k v - c (|b|^2 - s_hat_i^2)`` with
    ``|b| = b_start e^{-c u}`` in closed form.
    """
    amp = c * b_start**2 / (2 * (c + k))
    return (
        amp * math.exp(-2 * c * u)
        + (v_start - amp) * math.exp(2 * k * u)
        + c * s_hat_i_sq * growth(2 * k, u)
    )


@dataclass
class ShootResult:
    """Outcome of one shooting run from ``(alpha, nu)``."""

    alpha: float
    nu: np.ndarray
    times: np.ndarray  # t_1..t_n; components not reached keep the terminal time
    T: float
    f: float
    b_start: np.ndarray  # |b| at the start of each phase
    v_start: np.ndarray  # variances at the start of each phase, shape (n, n)
    last_phase: int
    params: MultiParams = field(repr=False)

    def bias_norm(self, t):
        """Bias magnitude along the shot trajectory."""
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape)
        for idx, s in np.ndenumerate(t):
            i = self._phase_of(s)
            start = 0.0 if i == 0 else self.times[i - 1]
            out[idx] = self.b_start[i] * math.exp(-self.params.price[i] * (min(s, self.T) - start))
        return float(out) if out.ndim == 0 else out

    def variances(self, t):
        """Component variances along the shot trajectory (shape ``t.shape + (n,)``)."""
        p = self.params
        partial, _ = sigma_hat(p)
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (p.n,))
        for idx, s in np.ndenumerate(t):
            s = min(s, self.T)
            i = self._phase_of(s)
            start = 0.0 if i == 0 else self.times[i - 1]
            u = s - start
            vs = self.v_start[i]
            row = np.zeros(p.n)
            for j in range(i + 1, p.n):
                row[j] = _eta_unchecked(vs[j], u, p.kappa[j], p.sigma[j])
            row[i] = _phase_variance(u, vs[i], self.b_start[i], p.kappa[i], p.price[i], partial[i])
            out[idx] = row
        return out

    def _phase_of(self, s: float) -> int:
        for i in range(self.last_phase):
            if s < self.times[i]:
                return i
        return self.last_phase


def shoot(alpha: float, nu, p: MultiParams) -> ShootResult:
    """Run the phase-by-phase binding-obedience dynamics from ``(alpha, nu)``.

    In phase ``i`` the bias magnitude decays at rate ``r - 2 kappa_i``,
    components below ``i`` stay fully revealed, components above ``i`` evolve
    without information, and ``v_i`` follows its linear ODE.  The phase ends at
    the first time ``v_i`` hits zero or the bias reaches ``sigma_hat``.
    """
    partial, s_hat = sigma_hat(p)
    if alpha < s_hat * (1 - 1e-14):
        raise DomainError(f"alpha={alpha} is below sigma_hat={s_hat}")
    nu = np.asarray(nu, dtype=float)
    n = p.n
    times = np.zeros(n)
    b_start = np.zeros(n)
    v_start = np.zeros((n, n))
    t, b, v = 0.0, float(alpha), nu.copy()
    last = n - 1
    for i in range(n):
        b_start[i] = b
        v_start[i] = v
        k, c = p.kappa[i], p.price[i]
        u_bias = math.log(b / s_hat) / c if b > s_hat else 0.0
        vi0 = v[i]

        def v_own(u, vi0=vi0, b=b, k=k, c=c, s2=partial[i]):
            return _phase_variance(u, vi0, b, k, c, s2)

        # While |b| > sigma_hat, v_i can only cross zero downwards, so at most once.
        if vi0 <= 0:
            u_end, hit_zero = 0.0, True
        elif u_bias > 0 and v_own(u_bias) <= 0:
            u_end = brentq(v_own, 0.0, u_bias, xtol=ROOT_XTOL, rtol=_RTOL, maxiter=500)
            hit_zero = True
        else:
            u_end, hit_zero = u_bias, False
        new_v = v.copy()
        new_v[:i] = 0.0
        for j in range(i + 1, n):
            new_v[j] = _eta_unchecked(v[j], u_end, p.kappa[j], p.sigma[j])
        new_v[i] = 0.0 if hit_zero else max(v_own(u_end), 0.0)
        t += u_end
        b = b * math.exp(-c * u_end) if not (u_end == u_bias and not hit_zero) else s_hat
        v = new_v
        times[i] = t
        if not hit_zero or b <= s_hat or i == n - 1:
            last = i
            break
    times[last + 1 :] = t
    f = b - s_hat - float(np.sum(v))
    return ShootResult(
        alpha=float(alpha), nu=nu, times=times, T=t, f=f,
        b_start=b_start, v_start=v_start, last_phase=last, params=p,
    )


def chain_point(xi: float, p: MultiParams) -> np.ndarray:
    """Map ``xi`` in ``[0, n]`` onto the totally ordered chain of initial variances.

    ``xi`` in ``(n - i, n - i + 1]`` (0-based component ``i``) gives
    ``(0, ..., 0, frac * sigma0_sq[i], sigma0_sq[i+1], ..., sigma0_sq[n-1])``.
    """
    n = p.n
    xi = min(max(xi, 0.0), float(n))
    nu = np.zeros(n)
    for i in range(n - 1, -1, -1):
        lo = n - 1 - i
        if xi <= lo:
            break
        frac = min(xi - lo, 1.0)
        nu[i] = frac * p.sigma0_sq[i]
    return nu


def alpha_star(nu, p: MultiParams) -> float:
    """Initial bias magnitude at which the shot lands exactly (``f = 0``)."""
    _, s_hat = sigma_hat(p)
    nu = np.asarray(nu, dtype=float)
    if not np.any(nu > 0):
        return s_hat
    hi = s_hat + 1.0
    while shoot(hi, nu, p).f <= 0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("could not bracket alpha*")
    return brentq(lambda a: shoot(a, nu, p).f, s_hat, hi, xtol=ROOT_XTOL, rtol=_RTOL, maxiter=500)


@dataclass(frozen=True)
class MultiDimSolution:
    """Optimal vector bias and variance paths.

    Attributes:
        regime: first-best or constrained.
        i0: 0-based critical component (``n`` if every initial variance is zero).
        times: full-disclosure times ``t_1 <= ... <= t_n``.
        alpha: initial bias magnitude.
        nu: initial variances.
        sigma_hat: stationary bias magnitude.
        params: the (sorted) parameters.
        non_unique: True when tied persistence rates make the split across tied
            components non-unique; disclosure then goes to the lowest index first.
        permutation: order applied to the caller's components, if any.
    """

    regime: Regime
    i0: int
    times: np.ndarray
    alpha: float
    nu: np.ndarray
    sigma_hat: float
    params: MultiParams
    non_unique: bool = False
    permutation: np.ndarray | None = None

    @property
    def tau(self) -> np.ndarray:
        """``tau_j = sum_{i>=j} (r-2kappa_i)(t_i - t_{i-1})`` with ``t_0 = 0``; length ``n + 1``."""
        steps = self.params.price * np.diff(np.concatenate([[0.0], self.times]))
        return np.concatenate([np.cumsum(steps[::-1])[::-1], [0.0]])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({float(t) for t in self.times if t > 0}))

    def bias_norm(self, t):
        return eval_multi(self, t)[0] if np.ndim(t) == 0 else np.array([eval_multi(self, s)[0] for s in t])

    def bias(self, t):
        return self.bias_norm(t) * self.params.direction if np.ndim(t) == 0 else np.outer(self.bias_norm(t), self.params.direction)

    def variances(self, t):
        if np.ndim(t) == 0:
            return eval_multi(self, t)[1]
        return np.array([eval_multi(self, s)[1] for s in t])

    def path_pair(self):
        from persuasion.obedience import PathPair

        b_tail = (self.params.beta if self.regime is Regime.FIRST_BEST else self.sigma_hat * self.params.direction)
        return PathPair(
            b=self.bias,
            v=self.variances,
            tail_start=self.T,
            b_tail=b_tail,
            v_tail=np.zeros(self.params.n),
            breakpoints=self.breakpoints,
        )

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "i0": self.i0 + 1,
            "times": self.times.tolist(),
            "tau": self.tau[:-1].tolist(),
            "sigma_hat": self.sigma_hat,
            "alpha": self.alpha,
            "nu": self.nu.tolist(),
            "non_unique": self.non_unique,
            "permutation": None if self.permutation is None else self.permutation.tolist(),
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MultiDimSolution":
        """Rebuild from :meth:`to_dict` output without re-solving."""
        perm = d.get("permutation")
        return cls(
            regime=Regime(d["regime"]),
            i0=int(d["i0"]) - 1,
            times=np.asarray(d["times"], dtype=float),
            alpha=float(d["alpha"]),
            nu=np.asarray(d["nu"], dtype=float),
            sigma_hat=float(d["sigma_hat"]),
            params=MultiParams.from_dict(d["params"]),
            non_unique=bool(d.get("non_unique", False)),
            permutation=None if perm is None else np.asarray(perm, dtype=int),
        )


def eval_multi(sol: MultiDimSolution, t: float) -> tuple[float, np.ndarray]:
    """Bias magnitude and component variances at time ``t`` from the closed forms."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    p = sol.params
    n = p.n
    if sol.regime is Regime.FIRST_BEST:
        return sol.params.beta_norm, np.zeros(n)
    times = sol.times
    prev = np.concatenate([[0.0], times[:-1]])
    price = p.price
    expo = 0.0
    for i in range(sol.i0, n):
        expo += price[i] * max(times[i] - max(t, prev[i]), 0.0)
    b_norm = sol.sigma_hat * math.exp(expo)
    partial, _ = sigma_hat(p)
    tau = sol.tau
    s_hat_sq = sol.sigma_hat**2
    v = np.zeros(n)
    for i in range(sol.i0, n):
        k, c = p.kappa[i], price[i]

        def own(s, i=i, k=k, c=c):
            x = max(times[i] - s, 0.0)
            # sigma_hat_i^2 c/(2k) (e^{-2kx} - 1) written via growth() for the k -> 0 limit.
            first = -partial[i] * c * growth(-2 * k, x)
            second = s_hat_sq * c * math.exp(2 * tau[i + 1]) / (2 * (p.r - k)) * (
                math.exp(2 * c * x) - math.exp(-2 * k * x)
            )
            return first + second

        if t >= prev[i]:
            v[i] = own(t)
        else:
            v[i] = _eta_unchecked(own(prev[i]), t - prev[i], k, p.sigma[i])
    return b_norm, v


def _tied(p: MultiParams) -> bool:
    return bool(np.any(np.diff(p.kappa) < KAPPA_EPS))


def solve_multidim(p: MultiParams, permutation=None) -> MultiDimSolution:
    """Sender-optimal policy for an n-component state."""
    _, s_hat = sigma_hat(p)
    beta_norm = p.beta_norm
    n = p.n
    if beta_norm <= s_hat:
        return MultiDimSolution(
            Regime.FIRST_BEST, i0=n, times=np.zeros(n), alpha=beta_norm, nu=np.zeros(n),
            sigma_hat=s_hat, params=p, permutation=permutation,
        )
    nu_full = p.sigma0_sq.copy()
    if not np.any(nu_full > 0):
        return MultiDimSolution(
            Regime.CONSTRAINED, i0=n, times=np.zeros(n), alpha=s_hat, nu=nu_full,
            sigma_hat=s_hat, params=p, permutation=permutation,
        )
    alpha_hat = alpha_star(nu_full, p)
    if beta_norm >= alpha_hat:
        alpha, nu = alpha_hat, nu_full
    else:
        # f(|beta|, .) is single-crossing from above along the chain.
        g = lambda xi: shoot(beta_norm, chain_point(xi, p), p).f  # noqa: E731
        xi = brentq(g, 0.0, float(n), xtol=ROOT_XTOL, rtol=_RTOL, maxiter=1000)
        alpha, nu = beta_norm, chain_point(xi, p)
    shot = shoot(alpha, nu, p)
    positive = np.flatnonzero(nu > 0)
    i0 = int(positive[0]) if positive.size else n
    times = shot.times.copy()
    times[:i0] = 0.0
    return MultiDimSolution(
        Regime.CONSTRAINED, i0=i0, times=times, alpha=float(alpha), nu=nu, sigma_hat=s_hat,
        params=p, non_unique=_tied(p), permutation=permutation,
    )
