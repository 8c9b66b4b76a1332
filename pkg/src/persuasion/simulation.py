"""Monte Carlo check of delayed-reporting policies.

State paths are sampled exactly (Gaussian transitions) on the union of the
cell midpoints, the report times they reference, and the deviation times.
Discounted losses use the exact discount weight of each cell times the loss
at the cell midpoint; the part beyond the horizon is added in closed form.

Each path draws from its own counter-based generator keyed by
``(base_seed, path_index)``, so estimates do not depend on chunking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from persuasion._mathutil import growth
from persuasion.exceptions import DomainError, IncompatibleError
from persuasion.obedience import _discounted_integral, continuation_loss, reservation_loss, sender_loss
from persuasion.reporting import ReportingFunction, induced_variance
from persuasion.state_process import NO_REPORT, make_rng, posterior_given_report

__all__ = ["DeviationTest", "SimConfig", "SimResult", "simulate_deviation", "simulate_policy"]

log = logging.getLogger(__name__)

CHUNK = 500
N_CHECKPOINTS = 20


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 10_000
    dt: float = 1e-3
    horizon: float | None = None  # default: T + 10/r
    tail_correction: bool = True
    base_seed: int = 0
    n_deviation_times: int = 50
    trace_paths: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError("n_paths must be positive")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.horizon is not None and self.horizon <= 0:
            raise DomainError("horizon must be positive")


@dataclass
class Estimate:
    mean: float
    se: float | None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se}


def _estimate(x: np.ndarray) -> Estimate:
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else None
    return Estimate(mean, se)


@dataclass
class DeviationTest:
    """Follow-vs-deviate comparison at one deviation time (common random numbers)."""

    t_dev: float
    deviation: Estimate
    follow: Estimate
    diff_se: float | None
    reservation: float
    continuation: float

    @property
    def verdict(self) -> str:
        if self.diff_se is None:
            return "inconclusive"
        if self.deviation.mean >= self.follow.mean - 4 * self.diff_se:
            return "no profitable deviation"
        return "profitable deviation"

    def to_dict(self) -> dict:
        return {
            "t_dev": self.t_dev,
            "deviation_loss": self.deviation.to_dict(),
            "follow_loss": self.follow.to_dict(),
            "diff_se": self.diff_se,
            "analytic_reservation": self.reservation,
            "analytic_continuation": self.continuation,
            "verdict": self.verdict,
        }


@dataclass
class Checkpoint:
    t: float
    bias: Estimate
    error_variance: Estimate
    bias_target: float
    variance_target: float

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "bias": self.bias.to_dict(),
            "error_variance": self.error_variance.to_dict(),
            "bias_target": self.bias_target,
            "variance_target": self.variance_target,
        }


@dataclass
class SimResult:
    sender_loss: Estimate
    receiver_loss: Estimate
    sender_loss_analytic: float
    receiver_loss_analytic: float
    deviation_tests: list[DeviationTest] = field(default_factory=list)
    checkpoints: list[Checkpoint] = field(default_factory=list)
    config: SimConfig | None = None
    trace: dict | None = None

    def to_dict(self) -> dict:
        return {
            "sender_loss": self.sender_loss.to_dict(),
            "receiver_loss": self.receiver_loss.to_dict(),
            "sender_loss_analytic": self.sender_loss_analytic,
            "receiver_loss_analytic": self.receiver_loss_analytic,
            "deviation_tests": [d.to_dict() for d in self.deviation_tests],
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "config": None if self.config is None else dict(self.config.__dict__),
        }


def _check_compatible(sol, phi: ReportingFunction, horizon: float, tol: float = 1e-8) -> None:
    p = sol.params
    if phi.params != p:
        raise IncompatibleError("reporting function and policy use different process parameters")
    for t in np.linspace(0.0, horizon, 201):
        gap = abs(induced_variance(phi, float(t), p) - float(sol.variance(float(t))))
        if gap > tol:
            raise IncompatibleError(f"reporting function does not induce the policy variance at t={t} (gap {gap:.3g})")


class _Design:
    """Time points, report lookups and affine posterior-mean coefficients."""

    def __init__(self, sol, phi: ReportingFunction, cfg: SimConfig, dev_times):
        p = sol.params
        self.p = p
        T = sol.T
        if not math.isfinite(T) and cfg.horizon is None:
            raise DomainError("policies without a full-disclosure time need an explicit horizon")
        H = cfg.horizon if cfg.horizon is not None else T + 10.0 / p.r
        K = max(1, int(math.ceil(H / cfg.dt - 1e-9)))
        self.dt = cfg.dt
        self.H = H = K * cfg.dt
        self.K = K
        edges = np.arange(K + 1) * cfg.dt
        self.mid = edges[:-1] + 0.5 * cfg.dt
        # exact discount mass of each cell
        self.w = np.exp(-p.r * edges[:-1]) * -np.expm1(-p.r * cfg.dt)

        dev_idx = np.unique(np.clip(np.rint(np.asarray(dev_times, dtype=float) / cfg.dt).astype(int), 0, K - 1))
        self.dev_idx = dev_idx
        self.dev_t = dev_idx * cfg.dt

        query = np.concatenate([self.mid, self.dev_t])
        alpha = np.empty(query.size)
        gamma = np.empty(query.size)
        rep_time = np.full(query.size, np.nan)
        for k, t in enumerate(query):
            ph = phi(float(t))
            a, _ = posterior_given_report(0.0, ph, float(t), p)
            if ph is NO_REPORT:
                alpha[k], gamma[k] = float(a), 0.0
            else:
                one, _ = posterior_given_report(1.0, ph, float(t), p)
                alpha[k], gamma[k] = float(a), float(one) - float(a)
                rep_time[k] = ph
        self.alpha, self.gamma, self.rep_time = alpha, gamma, rep_time
        self.b = np.asarray(sol.bias(query), dtype=float)

        fwd = rep_time[np.isfinite(rep_time) & (rep_time >= 0)]
        self.grid = np.unique(np.concatenate([[0.0], self.mid, fwd, [H]]))
        self.pre = np.unique(-rep_time[np.isfinite(rep_time) & (rep_time < 0)])  # positive lags
        # index of each query's report in grid (>= 0) or prehistory (encoded as -1 - j)
        src = np.zeros(query.size, dtype=int)
        ok = np.isfinite(rep_time)
        fw = ok & (rep_time >= 0)
        src[fw] = np.searchsorted(self.grid, rep_time[fw])
        bw = ok & (rep_time < 0)
        src[bw] = -1 - np.searchsorted(self.pre, -rep_time[bw])
        self.src = src
        self.has_report = ok
        self.mid_idx = np.searchsorted(self.grid, self.mid)
        self.H_idx = self.grid.size - 1

        dU = np.diff(self.grid)
        k_ = p.kappa
        var = p.sigma**2 * growth(2 * k_, dU)
        self.sd = np.sqrt(var)
        self.decay = np.exp(-k_ * self.grid[1:])
        self.grow = np.exp(k_ * self.grid)
        self.pre_sd = np.sqrt(np.diff(np.concatenate([[0.0], self.pre])))


def _draw(design: _Design, seed: int, paths: range) -> tuple[np.ndarray, np.ndarray]:
    """Exact joint samples of the state on the grid and of the pre-history."""
    p = design.p
    M = design.grid.size
    P = design.pre.size
    theta = np.empty((len(paths), M))
    pre = np.empty((len(paths), P))
    for row, idx in enumerate(paths):
        rng = make_rng(seed, idx)
        z = rng.standard_normal(M + P)
        theta0 = p.mu0 + math.sqrt(p.sigma0_sq) * z[0]
        scaled = np.cumsum(design.decay * design.sd * z[1:M])
        theta[row, 0] = theta0
        theta[row, 1:] = design.grow[1:] * (theta0 + scaled)
        pre[row] = theta0 + np.cumsum(design.pre_sd * z[M:])
    return theta, pre


def _run(sol, phi: ReportingFunction, cfg: SimConfig, dev_times) -> SimResult:
    p = sol.params
    beta = sol.beta
    pp = sol.path_pair()
    design = _Design(sol, phi, cfg, dev_times)
    _check_compatible(sol, phi, min(design.H, (sol.T if math.isfinite(sol.T) else design.H) + 1.0))
    K, H, r = design.K, design.H, p.r
    nd = design.dev_idx.size
    c = r - 2 * p.kappa

    tail_R = tail_S = 0.0
    if cfg.tail_correction:
        disc = math.exp(-r * H)
        tail_R = disc * _discounted_integral(
            pp.receiver_flow, H, r, pp.tail_start, float(pp.b_tail) ** 2, pp.breakpoints, 1e-12
        )
        tail_S = disc * _discounted_integral(
            lambda s: pp.sender_flow(s, beta), H, r, pp.tail_start, (float(pp.b_tail) - beta) ** 2,
            pp.breakpoints, 1e-12,
        )

    chk_k = np.unique(np.linspace(0, K - 1, N_CHECKPOINTS).astype(int))
    recv, send = [], []
    dev_loss, fol_loss = [], []
    chk_bias, chk_err = [], []
    trace = None
    # exp(kappa * (mid - t_dev)) factors via exp(kappa*mid) and exp(-kappa*t_dev)
    e_mid = np.exp(p.kappa * design.mid)
    w = design.w
    for start in range(0, cfg.n_paths, CHUNK):
        paths = range(start, min(start + CHUNK, cfg.n_paths))
        theta, pre = _draw(design, cfg.base_seed, paths)
        src = design.src
        report = np.zeros((len(paths), src.size))
        fw = design.has_report & (src >= 0)
        bw = design.has_report & (src < 0)
        report[:, fw] = theta[:, src[fw]]
        report[:, bw] = pre[:, -1 - src[bw]]
        mean = design.alpha + design.gamma * report
        action = mean + design.b

        th_mid = theta[:, design.mid_idx]
        err = action[:, :K] - th_mid
        R = err**2
        S = (err - beta) ** 2
        recv.append(R @ w + tail_R)
        send.append(S @ w + tail_S)
        chk_bias.append(err[:, chk_k])
        chk_err.append((th_mid[:, chk_k] - mean[:, chk_k]) ** 2)

        if nd:
            # suffix sums over cells k >= d, discounted back to t_dev
            wR = np.cumsum((R * w)[:, ::-1], axis=1)[:, ::-1]
            a2 = np.cumsum((w * e_mid**2)[::-1])[::-1]
            a1 = np.cumsum((w * e_mid * th_mid)[:, ::-1], axis=1)[:, ::-1]
            a0 = np.cumsum((w * th_mid**2)[:, ::-1], axis=1)[:, ::-1]
            d = design.dev_idx
            t_dev = design.dev_t
            back = np.exp(r * t_dev)
            m_dev = mean[:, K:]  # receiver's estimate of theta_{t_dev}
            scale = m_dev * np.exp(-p.kappa * t_dev)  # so that A'_s = scale * e^{kappa s}
            devi = (scale**2 * a2[d] - 2 * scale * a1[:, d] + a0[:, d]) * back
            foll = wR[:, d] * back
            if cfg.tail_correction:
                th_H = theta[:, design.H_idx][:, None]
                a_H = scale * math.exp(p.kappa * H)
                devi += np.exp(-r * (H - t_dev)) * (r / c * (a_H - th_H) ** 2 + p.sigma**2 / c)
                foll += np.exp(-r * (H - t_dev)) * (tail_R / math.exp(-r * H))
            dev_loss.append(devi)
            fol_loss.append(foll)
        if trace is None and cfg.trace_paths > 0:
            n_tr = min(cfg.trace_paths, len(paths))
            rt = design.rep_time[:K]
            trace = {
                "t": design.mid,
                "phi": rt,
                "theta": th_mid[:n_tr],
                "action": action[:n_tr, :K],
                "receiver_flow": R[:n_tr],
                "sender_flow": S[:n_tr],
            }

    recv = np.concatenate(recv)
    send = np.concatenate(send)
    result = SimResult(
        sender_loss=_estimate(send),
        receiver_loss=_estimate(recv),
        sender_loss_analytic=_analytic_sender(pp, beta, r),
        receiver_loss_analytic=_analytic_receiver(pp, r),
        config=cfg,
        trace=trace,
    )
    cb = np.concatenate(chk_bias)
    ce = np.concatenate(chk_err)
    for j, k in enumerate(chk_k):
        t = float(design.mid[k])
        result.checkpoints.append(
            Checkpoint(t, _estimate(cb[:, j]), _estimate(ce[:, j]), float(sol.bias(t)), float(sol.variance(t)))
        )
    if nd:
        dev_all = np.concatenate(dev_loss)
        fol_all = np.concatenate(fol_loss)
        for j, t_dev in enumerate(design.dev_t):
            diff = _estimate(dev_all[:, j] - fol_all[:, j])
            result.deviation_tests.append(
                DeviationTest(
                    t_dev=float(t_dev),
                    deviation=_estimate(dev_all[:, j]),
                    follow=_estimate(fol_all[:, j]),
                    diff_se=diff.se,
                    reservation=reservation_loss(float(sol.variance(float(t_dev))), p),
                    continuation=continuation_loss(pp, float(t_dev), r),
                )
            )
    log.info("simulated %d paths on %d cells (horizon %.4g)", cfg.n_paths, K, H)
    return result


def _analytic_receiver(pp, r: float) -> float:
    return continuation_loss(pp, 0.0, r)


def _analytic_sender(pp, beta: float, r: float) -> float:
    return sender_loss(pp, beta, r)


def simulate_policy(sol, phi: ReportingFunction, cfg: SimConfig | None = None) -> SimResult:
    """Simulate the decision rule ``A_t = E[theta_t | theta_{phi(t)}] + b(t)``.

    Also runs grim-trigger deviation tests at ``cfg.n_deviation_times`` times
    spread over ``[0, T + 1]``.

    Raises:
        IncompatibleError: if ``phi`` does not induce the policy's variance path.
    """
    cfg = cfg or SimConfig()
    T = sol.T if math.isfinite(sol.T) else 0.0
    dev_times = np.linspace(0.0, T + 1.0, cfg.n_deviation_times) if cfg.n_deviation_times else []
    return _run(sol, phi, cfg, dev_times)


def simulate_deviation(sol, phi: ReportingFunction, t_dev: float, cfg: SimConfig | None = None) -> DeviationTest:
    """Receiver follows until ``t_dev``, then plays myopically with no further information.

    Returns the deviator's and the follower's continuation losses at ``t_dev``
    (snapped to the simulation grid).
    """
    if t_dev < 0:
        raise DomainError("t_dev must be nonnegative")
    cfg = cfg or SimConfig()
    return _run(sol, phi, cfg, [t_dev]).deviation_tests[0]
