import math

import numpy as np
import pytest

from persuasion import ProcessParams, Regime, pareto_point, solve, solve_deterministic
from persuasion.exceptions import DomainError
from persuasion.obedience import PathPair, sender_loss, verify_obedience
from persuasion.policy import PolicySolution, comparative_statics_report, relaxed_variance
from persuasion.state_process import make_rng

LN3_4 = math.log(3) / 4


class TestClosedForm:
    def test_full_disclosure_time(self, sol_large):
        assert sol_large.regime is Regime.CONSTRAINED
        assert sol_large.T == pytest.approx(LN3_4, abs=1e-12)
        assert sol_large.stationary_bias == 1.0

    def test_initial_variance(self, sol_large):
        assert sol_large.variance(0.0) == pytest.approx(3.1265187979, abs=1e-9)

    def test_bias_values(self, sol_large):
        assert sol_large.bias(0.0) == pytest.approx(3.0, rel=1e-14)
        assert sol_large.bias(sol_large.T / 2) == pytest.approx(math.sqrt(3), rel=1e-13)
        assert sol_large.bias(sol_large.T) == 1.0
        assert sol_large.bias(5.0) == 1.0

    def test_variance_vanishes_from_T(self, sol_large):
        assert sol_large.variance(sol_large.T) == 0.0
        assert sol_large.variance(sol_large.T + 3) == 0.0

    def test_plotted_variance_curve(self, sol_large):
        # [PAPER] v(x) = 4 + 2.28571 (-2 e^{T-x} + 0.25 e^{8(T-x)}) for x <= T
        T = 0.274653
        for x in np.linspace(0, T, 30):
            ref = 4 + 2.28571 * (-2 * math.exp(T - x) + 0.25 * math.exp(8 * (T - x)))
            assert sol_large.variance(x) == pytest.approx(ref, abs=2e-5)

    def test_plotted_bias_curve(self, sol_large):
        # [PAPER] b(x) = 3 e^{-4x} for x < T, 1 after
        for x in np.linspace(0, 0.35, 36):
            ref = 3 * math.exp(-4 * x) if x < LN3_4 else 1.0
            assert sol_large.bias(x) == pytest.approx(ref, rel=1e-12)

    def test_vectorized_evaluation(self, sol_large):
        t = np.array([0.0, 0.1, 1.0])
        np.testing.assert_array_equal(sol_large.bias(t), [sol_large.bias(x) for x in t])


class TestShiftedSolution:
    def test_t0_and_marked_values(self, sol_shifted):
        # [PAPER] t0 = 0.0381103 and b(t0) = 2.57583 are marked on the policy figure
        assert sol_shifted.t0 == pytest.approx(0.0381103, abs=5e-7)
        assert relaxed_variance(sol_shifted.T_relaxed - sol_shifted.t0, sol_shifted.params) == pytest.approx(2.0, abs=1e-12)
        assert sol_shifted.bias(0.0) == pytest.approx(2.57583, abs=5e-6)
        assert sol_shifted.T == pytest.approx(LN3_4 - sol_shifted.t0, abs=1e-14)

    def test_boundary_conditions(self, sol_shifted):
        assert sol_shifted.variance(0.0) == pytest.approx(2.0, abs=1e-12)
        assert sol_shifted.bias(0.0) < 3.0

    def test_zero_prior_variance(self, base_large):
        sol = solve(base_large.replace(sigma0_sq=0.0), 3.0)
        assert sol.T == 0.0 and sol.bias(0.0) == 1.0 and sol.variance(0.0) == 0.0


class TestRegimes:
    def test_first_best(self, base_large):
        sol = solve(base_large, 0.5)
        assert sol.regime is Regime.FIRST_BEST
        assert sol.bias(2.0) == 0.5 and sol.variance(2.0) == 0.0

    def test_threshold_is_first_best(self, base_large):
        sol = solve(base_large, 1.0)
        assert sol.regime is Regime.FIRST_BEST and sol.T == 0.0

    def test_just_above_threshold(self, base_large):
        sol = solve(base_large, 1.0 + 1e-9)
        assert sol.regime is Regime.CONSTRAINED
        assert sol.T == pytest.approx(1e-9 / 4, rel=1e-6)

    def test_deterministic_state_needs_other_solver(self):
        with pytest.raises(DomainError, match="solve_deterministic"):
            solve(ProcessParams(kappa=-0.5, sigma=0.0, r=3.0), 3.0)

    @pytest.mark.parametrize("beta", [0.0, -1.0, math.inf])
    def test_bad_beta(self, base_large, beta):
        with pytest.raises(DomainError):
            solve(base_large, beta)

    def test_kappa_limit_branch(self):
        near = solve(ProcessParams(kappa=1e-10, sigma=1.0, r=1.0, sigma0_sq=100.0), 2.0)
        at = solve(ProcessParams(kappa=0.0, sigma=1.0, r=1.0, sigma0_sq=100.0), 2.0)
        for t in np.linspace(0, at.T, 11):
            assert near.variance(t) == pytest.approx(at.variance(t), rel=1e-8, abs=1e-12)

    def test_serialization_round_trip(self, sol_shifted):
        again = PolicySolution.from_dict(sol_shifted.to_dict())
        assert again == sol_shifted


class TestDeterministic:
    def test_no_prior_uncertainty(self):
        sol = solve_deterministic(ProcessParams(kappa=-0.5, sigma=0.0, r=3.0, sigma0_sq=0.0), 3.0)
        assert sol.bias(0.0) == 0.0 and sol.variance(1.0) == 0.0

    def test_exponential_decay(self):
        sol = solve_deterministic(ProcessParams(kappa=0.0, sigma=0.0, r=3.0, sigma0_sq=1e6), 1.0)
        for t in (0.0, 0.2, 1.0):
            assert sol.bias(t) == pytest.approx(math.exp(-3 * t), rel=1e-14)
            assert sol.variance(t) == pytest.approx(0.5 * math.exp(-6 * t), rel=1e-14)
        assert sol.T == math.inf

    def test_binding_initial_variance(self):
        sol = solve_deterministic(ProcessParams(kappa=-0.5, sigma=0.0, r=3.0, sigma0_sq=1.0), 3.0)
        assert sol.b0 == pytest.approx(math.sqrt(7 / 4), rel=1e-15)
        assert sol.variance(0.0) == pytest.approx(1.0, rel=1e-14)

    def test_requires_zero_sigma(self, base_large):
        with pytest.raises(DomainError):
            solve_deterministic(base_large, 3.0)

    def test_small_sigma_limit(self):
        base = ProcessParams(kappa=-0.5, sigma=0.0, r=3.0, sigma0_sq=1.0)
        d = solve_deterministic(base, 3.0)
        grid = np.linspace(0, 5, 501)
        gaps = []
        for s in (1e-1, 1e-2, 1e-3, 1e-4):
            sol = solve(base.replace(sigma=s), 3.0)
            gaps.append(np.max(np.abs(sol.bias(grid) - d.bias(grid))))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-2


class TestPareto:
    def test_receiver_optimum(self, base_large):
        sol = pareto_point(base_large, 3.0, 0.0)
        assert sol.bias(0.3) == 0.0 and sol.variance(0.3) == 0.0

    def test_half_weight(self, base_large):
        assert pareto_point(base_large, 3.0, 0.5) == solve(base_large, 1.5)

    def test_near_sender_optimum(self, base_large):
        a = pareto_point(base_large, 3.0, 1 - 1e-12)
        b = solve(base_large, 3.0)
        assert a.T == pytest.approx(b.T, abs=1e-10)

    def test_weight_domain(self, base_large):
        with pytest.raises(DomainError):
            pareto_point(base_large, 3.0, 1.0)


class TestComparativeStatics:
    grid = np.linspace(0, 2, 801)

    def test_beta_increase(self, base_large):
        order = comparative_statics_report(solve(base_large, 3.0), solve(base_large, 3.5), self.grid)
        assert (order.bias, order.variance) == ("increasing", "increasing")

    def test_sigma_increase(self, base_large):
        lo = solve(base_large, 3.0)
        hi = solve(base_large.replace(sigma=2.5), 3.0)
        order = comparative_statics_report(lo, hi, self.grid)
        assert (order.bias, order.variance) == ("increasing", "decreasing")

    def test_identical(self, sol_large):
        order = comparative_statics_report(sol_large, sol_large, self.grid)
        assert (order.bias, order.variance) == ("equal", "equal")
        assert not order.bias_strict


class TestStructure:
    @pytest.mark.parametrize("s0", [2.0, 1e6])
    def test_boundary_conditions_one_binding(self, base_large, s0):
        sol = solve(base_large.replace(sigma0_sq=s0), 3.0)
        b0, v0 = sol.bias(0.0), sol.variance(0.0)
        assert b0 <= 3.0 + 1e-12 and v0 <= s0 + 1e-12
        assert math.isclose(b0, 3.0, rel_tol=1e-12) or math.isclose(v0, s0, rel_tol=1e-12)

    def test_strictly_decreasing_transition(self, sol_shifted):
        t = np.linspace(0, sol_shifted.T, 400)
        assert np.all(np.diff(sol_shifted.bias(t)) < 0)
        assert np.all(np.diff(sol_shifted.variance(t)) < 0)

    @pytest.mark.parametrize("shift", [-1e-3, 1e-3])
    def test_perturbed_T_breaks_boundary_conditions(self, base_large, shift):
        p = base_large
        sol = solve(p, 3.0)
        T = sol.T + shift
        b0 = sol.stationary_bias * math.exp(p.price * T)
        v0 = relaxed_variance(T, p)
        feasible = b0 <= 3.0 and v0 <= p.sigma0_sq
        one_equal = math.isclose(b0, 3.0, rel_tol=1e-12) or math.isclose(v0, p.sigma0_sq, rel_tol=1e-12)
        assert not (feasible and one_equal)


def _perturbed_pair(sol, a, b, eps):
    """Shrink the variance on (a, b) and recompute the largest bias the binding ODE allows."""
    p = sol.params
    c, k, s2 = p.price, p.kappa, p.sigma**2
    w = b - a

    def bump(t):
        return math.sin(math.pi * (t - a) / w) ** 2 if a < t < b else 0.0

    def dbump(t):
        return math.pi / w * math.sin(2 * math.pi * (t - a) / w) if a < t < b else 0.0

    def v(t):
        return float(sol.variance(t)) * (1 - eps * bump(t))

    def dv(t):
        v0 = float(sol.variance(t))
        dv0 = 2 * k * v0 + s2 - c * float(sol.bias(t)) ** 2 if t < sol.T else 0.0
        return dv0 * (1 - eps * bump(t)) - eps * v0 * dbump(t)

    def bias(t):
        if t >= sol.T:
            return sol.stationary_bias
        sq = (2 * k * v(t) + s2 - dv(t)) / c
        return math.sqrt(max(sq, 0.0))

    feasible = all((2 * k * v(t) + s2 - dv(t)) >= 0 for t in np.linspace(0, sol.T, 400))
    pp = PathPair(b=bias, v=v, tail_start=sol.T, b_tail=sol.stationary_bias, v_tail=0.0, breakpoints=(a, b))
    return pp, feasible


def test_optimality_against_random_perturbations(sol_large):
    sol = sol_large
    p = sol.params
    best = sender_loss(sol.path_pair(), sol.beta, p.r)
    rng = make_rng(12345)
    checked = 0
    while checked < 100:
        a, b = np.sort(rng.uniform(0.0, sol.T, size=2))
        if b - a < 0.02:
            continue
        eps = rng.uniform(0.01, 0.6)
        pp, feasible = _perturbed_pair(sol, a, b, eps)
        if not feasible:
            continue
        checked += 1
        if checked <= 5:
            rep = verify_obedience(pp, p, np.linspace(0, sol.T + 0.5, 40), tol=1e-6)
            assert rep.obedient
        assert sender_loss(pp, sol.beta, p.r) >= best - 1e-9
