import math

import numpy as np
import pytest

from persuasion.exceptions import DomainError, InfeasibleError
from persuasion.state_process import make_rng
from persuasion.two_period import TwoPeriodParams, binding_grid_v, brute_force_two_period, solve_two_period

GRID_N = 2001


def grids(tp, n=GRID_N):
    gb = np.linspace(0.0, tp.beta + 1.0, n)
    gv = np.linspace(0.0, tp.sigma1_sq, n)
    return gb, gv


def random_case_iii(rng):
    while True:
        tp = TwoPeriodParams(
            beta=rng.uniform(0.5, 3.0),
            delta=rng.uniform(0.1, 1.0),
            rho=rng.uniform(0.3, 1.5),
            sigma=rng.uniform(0.0, 0.5),
            sigma1_sq=rng.uniform(1.0, 4.0),
        )
        if solve_two_period(tp).case == "iii":
            return tp


class TestClosedForm:
    def test_reference_example(self):
        tp = TwoPeriodParams(1.0, 0.25, 1.0, 0.2, 1.0)
        sol = solve_two_period(tp)
        assert sol.case == "iii"
        assert sol.b1 == pytest.approx(0.2, abs=1e-15)
        assert sol.v1 == pytest.approx(0.12, abs=1e-15)
        assert tp.slack(sol.b1, sol.v1) == pytest.approx(0.0, abs=1e-15)

    def test_constraint_slack(self):
        sol = solve_two_period(TwoPeriodParams(0.1, 0.25, 1.0, 0.2, 1.0))
        assert (sol.b1, sol.v1, sol.case) == (0.1, 0.0, "i")

    def test_no_persistence(self):
        # [PAPER] with rho = 0: b1 = min(beta, sqrt(delta) sigma), v1 = 0
        sol = solve_two_period(TwoPeriodParams(1.0, 0.25, 0.0, 0.2, 1.0))
        assert sol.case == "ii"
        assert sol.b1 == pytest.approx(0.1) and sol.v1 == 0.0

    def test_corner_when_interior_variance_negative(self):
        tp = TwoPeriodParams(0.3, 0.25, 0.5, 0.5, 1.0)
        sol = solve_two_period(tp)
        assert sol.case == "iii-corner" and sol.v1 == 0.0
        assert sol.b1 == pytest.approx(math.sqrt(0.25) * 0.5)
        bb, bv = brute_force_two_period(tp, *grids(tp))
        assert abs(bb - sol.b1) <= 1.3 / (GRID_N - 1) and bv == 0.0

    def test_capped_prior_variance(self):
        tp = TwoPeriodParams(50.0, 0.9, 1.0, 0.1, 0.5)
        sol = solve_two_period(tp)
        assert sol.case == "iii-capped" and not sol.signal_feasible
        assert sol.v1 == 0.5 and sol.v1_interior > 0.5
        gb = np.linspace(0, 51, 20001)
        gv = binding_grid_v(tp, gb)
        bb, bv = brute_force_two_period(tp, gb, gv)
        assert bv == pytest.approx(0.5, abs=np.max(np.diff(gv[-3:])))
        assert bb == pytest.approx(sol.b1, abs=gb[1])

    def test_first_order_condition(self):
        tp = TwoPeriodParams(2.0, 0.5, 0.8, 0.1, 10.0)
        sol = solve_two_period(tp)
        dr2 = tp.delta * tp.rho**2
        assert 2 * (tp.beta - sol.b1) == pytest.approx(2 * sol.b1 / dr2, rel=1e-13)

    def test_comparative_statics(self):
        base = dict(beta=2.0, delta=0.5, rho=0.8, sigma=0.1, sigma1_sq=10.0)
        lo = solve_two_period(TwoPeriodParams(**base))
        hi = solve_two_period(TwoPeriodParams(**{**base, "sigma": 0.2}))
        assert hi.b1 == lo.b1 and hi.v1 < lo.v1
        more = solve_two_period(TwoPeriodParams(**{**base, "delta": 0.7}))
        assert more.b1 > lo.b1

    @pytest.mark.parametrize("field,value", [("beta", 0.0), ("delta", 1.5), ("sigma", -1.0), ("rho", math.nan)])
    def test_invalid(self, field, value):
        base = dict(beta=1.0, delta=0.25, rho=1.0, sigma=0.2, sigma1_sq=1.0)
        base[field] = value
        with pytest.raises(DomainError):
            TwoPeriodParams(**base)


class TestBruteForce:
    def test_reference_example(self):
        tp = TwoPeriodParams(1.0, 0.25, 1.0, 0.2, 1.0)
        gb, gv = grids(tp)
        bb, bv = brute_force_two_period(tp, gb, gv)
        assert abs(bb - 0.2) <= gb[1] and abs(bv - 0.12) <= gv[1]

    def test_case_i_exact(self):
        tp = TwoPeriodParams(0.1, 0.25, 1.0, 0.2, 1.0)
        assert brute_force_two_period(tp, [0.0, 0.05, 0.1, 0.2], [0.0, 0.5, 1.0]) == (0.1, 0.0)

    def test_empty_grid(self):
        tp = TwoPeriodParams(1.0, 0.25, 1.0, 0.0, 1.0)
        with pytest.raises(InfeasibleError):
            brute_force_two_period(tp, [0.5, 1.0], [0.0])

    def test_random_case_iii_draws_adapted_grid(self):
        rng = make_rng(31)
        for _ in range(20):
            tp = random_case_iii(rng)
            sol = solve_two_period(tp)
            gb = np.linspace(0.0, tp.beta + 1.0, GRID_N)
            gv = binding_grid_v(tp, gb)
            bb, bv = brute_force_two_period(tp, gb, gv)
            assert abs(bb - sol.b1) <= gb[1] + 1e-12
            j = np.searchsorted(gv, sol.v1)
            step = np.max(np.diff(gv[max(j - 2, 0) : j + 2]))
            assert abs(bv - sol.v1) <= step + 1e-12

    def test_random_case_iii_draws_uniform_grid(self):
        # the grid point nearest the curved constraint decides the argmax, so the
        # error in b1 scales like sqrt(step) rather than step
        rng = make_rng(31)
        for _ in range(20):
            tp = random_case_iii(rng)
            sol = solve_two_period(tp)
            gb, gv = grids(tp)
            bb, _ = brute_force_two_period(tp, gb, gv)
            dr2 = tp.delta * tp.rho**2
            bound = math.sqrt((gv[1] + 2 * tp.beta * gb[1]) / (1 + 1 / dr2)) + gb[1]
            assert abs(bb - sol.b1) <= bound

    def test_binding_grid_partners(self):
        tp = TwoPeriodParams(1.0, 0.25, 1.0, 0.2, 1.0)
        gv = binding_grid_v(tp, [0.1, 0.2, 0.3, 0.6])
        np.testing.assert_allclose(gv, [0.0, 0.12, 0.32, 1.0])
        with pytest.raises(DomainError):
            binding_grid_v(TwoPeriodParams(1.0, 0.25, 0.0, 0.2, 1.0), [0.1])
