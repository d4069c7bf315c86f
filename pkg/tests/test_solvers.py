import numpy as np
import pytest

import marketclear as mc
from marketclear import specio
from marketclear.solvers import (
    ConfigError,
    RateFitError,
    SolverConfig,
    Trace,
    UnproductiveMarketError,
    fit_rate,
    gamma_next,
    reference_solve,
    solve,
    step_basic,
)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def small_market(seed, n=5):
    return specio.market_from_document(specio.generate_market(n, 2, 2, seed=seed))


class TestStepBasic:
    def test_fixed_point_at_equilibrium(self, single_good_market):
        p = np.array([3.0])
        np.testing.assert_allclose(step_basic(single_good_market, p, 0.2), p, atol=1e-12)

    def test_projection_absorbs_excess_supply(self, single_good_market):
        # at p = 0 supply still undercuts demand here, so build a flooded market
        ns = mc.NestStructure.single(1)
        ct = mc.ConsumerType(count=1.0, a=[0.0], nests=ns)
        s = mc.Supplier(y_nat=[5.0], gamma=1.0, lo=[0.0], hi=[10.0], c=[0.0])
        m = mc.Market(n=1, consumers=(ct,), suppliers=(s,))
        z0 = m.ter_gradient([0.0])
        assert np.all(z0 >= 0)
        np.testing.assert_array_equal(step_basic(m, np.zeros(1), 0.1), np.zeros(1))

    def test_monotone_approach_from_below(self, single_good_market):
        # scalar fixed-point iteration: p <- p - h (y(p) - 2) climbs to 3;
        # strict growth is asserted away from the floating-point fixed
        # point, where the update underflows to a no-op
        p = np.zeros(1)
        values = [p[0]]
        for _ in range(200):
            p = step_basic(single_good_market, p, 1.0 / 6.0)
            values.append(p[0])
        diffs = np.diff(values)
        assert np.all(diffs >= 0)
        assert np.all(diffs[:100] > 0)
        assert p[0] == pytest.approx(3.0, abs=1e-6)


class TestGammaSequence:
    def test_first_values(self):
        g1 = gamma_next(1.0)
        assert g1 == pytest.approx(GOLDEN, abs=1e-12)
        assert gamma_next(g1) == pytest.approx(2.193527085331054, abs=1e-12)

    def test_growth_law(self):
        g = 1.0
        for t in range(101):
            assert g >= (t + 2.0) / 2.0 - 1e-12
            g = gamma_next(g)


class TestSolve:
    def test_single_good_basic(self, single_good_market):
        trace = solve(single_good_market,
                      SolverConfig(scheme="basic", step=1.0 / 6.0, tol=1e-10))
        assert trace.converged
        assert trace.price[0] == pytest.approx(3.0, abs=1e-8)

    def test_single_good_accelerated(self, single_good_market):
        # momentum beats the h = 1/6 basic run above; on this perfectly
        # conditioned scalar market the full-step basic contraction is
        # faster than momentum, so the decisive iteration-count
        # comparison lives in the random-market batch tests
        basic = solve(single_good_market,
                      SolverConfig(scheme="basic", step=1.0 / 6.0, tol=1e-10))
        accel = solve(single_good_market, SolverConfig(scheme="accelerated", tol=1e-10))
        assert accel.price[0] == pytest.approx(3.0, abs=1e-8)
        assert accel.iterations < basic.iterations

    def test_refuses_unproductive_market(self):
        ns = mc.NestStructure.single(2)
        ct = mc.ConsumerType(count=5.0, a=[0.0, 0.0], nests=ns)
        s = mc.Supplier(y_nat=[0, 0], gamma=1.0, lo=[0, 0], hi=[1.0, 1.0], c=[0, 0])
        m = mc.Market(n=2, consumers=(ct,), suppliers=(s,))
        with pytest.raises(UnproductiveMarketError):
            solve(m)

    def test_rejects_oversized_step(self, single_good_market):
        lip = single_good_market.smoothness_constant()
        with pytest.raises(ConfigError, match="smoothness"):
            solve(single_good_market, SolverConfig(step=1.5 / lip))
        solve(single_good_market, SolverConfig(step=1.0 / lip))  # cap itself is fine

    def test_max_iters_cap(self, single_good_market):
        trace = solve(single_good_market, SolverConfig(max_iters=3))
        assert not trace.converged
        assert trace.iterations == 3

    def test_trace_feasible_iterates(self, six_good_market):
        trace = solve(six_good_market, SolverConfig(scheme="basic"))
        assert np.all(trace.price >= 0)
        assert trace.grad_norm[-1] <= SolverConfig().tol

    def test_monotone_descent_basic(self, six_good_market):
        trace = solve(six_good_market, SolverConfig(scheme="basic"))
        assert np.max(np.diff(trace.ter)) <= 1e-12

    def test_fixed_point_once_converged(self, six_good_market):
        trace = solve(six_good_market, SolverConfig(scheme="basic", tol=1e-9))
        h = trace.step
        moved = step_basic(six_good_market, trace.price, h) - trace.price
        assert np.linalg.norm(moved) <= h * 1e-9 + 1e-12

    def test_schemes_agree(self):
        for seed in (1, 2, 3):
            m = small_market(seed)
            basic = solve(m, SolverConfig(scheme="basic"))
            accel = solve(m, SolverConfig(scheme="accelerated"))
            assert np.max(np.abs(basic.price - accel.price)) <= 1e-6

    def test_deterministic(self, six_good_market):
        a = solve(six_good_market, SolverConfig(scheme="accelerated"))
        b = solve(six_good_market, SolverConfig(scheme="accelerated"))
        np.testing.assert_array_equal(a.price, b.price)
        np.testing.assert_array_equal(a.ter, b.ter)

    def test_divergence_guard_names_iteration(self, single_good_market):
        from marketclear.solvers import DivergedError, _Recorder

        rec = _Recorder(single_good_market, 0.1)
        rec.record(np.array([1.0]), np.array([0.5]))
        with pytest.raises(DivergedError, match="iteration 2") as err:
            rec.record(np.array([np.inf]), np.array([0.0]))
        assert err.value.iteration == 2


class TestConvergenceBounds:
    @pytest.mark.parametrize("seed", [4, 5])
    def test_gap_bounds_both_schemes(self, seed):
        m = small_market(seed)
        ref = reference_solve(m)
        ter_star = m.ter(ref.price)
        p0 = np.zeros(m.n)
        dist2 = float(np.dot(p0 - ref.price, p0 - ref.price))
        basic = solve(m, SolverConfig(scheme="basic"))
        t = basic.iters
        assert np.max((basic.ter - ter_star) - dist2 / (2.0 * t * basic.step)) <= 0.0
        accel = solve(m, SolverConfig(scheme="accelerated"))
        t = accel.iters
        assert np.max(
            (accel.ter - ter_star) - 2.0 * dist2 / (accel.step * (t + 1.0) ** 2)
        ) <= 0.0


class TestRateFit:
    def _synthetic(self, gaps):
        n = len(gaps)
        return Trace(
            scheme="basic", step=0.1, ter=np.asarray(gaps, dtype=float),
            grad_norm=np.zeros(n), min_excess=np.zeros(n),
            complementarity=np.zeros(n), steps=np.full(n, 0.1),
            price=np.zeros(1), converged=True,
        )

    def test_exact_power_law(self):
        t = np.arange(1, 301)
        trace = self._synthetic(5.0 / t)  # gap C/t around ter_star = 0
        assert fit_rate(trace, 0.0) == pytest.approx(-1.0, abs=0.01)

    def test_quadratic_power_law(self):
        t = np.arange(1, 301)
        trace = self._synthetic(5.0 / t**2)
        assert fit_rate(trace, 0.0) == pytest.approx(-2.0, abs=0.01)

    def test_too_few_points(self):
        trace = self._synthetic(1.0 / np.arange(1, 31))
        with pytest.raises(RateFitError):
            fit_rate(trace, 0.0)

    def test_scheme_rates_on_a_market(self):
        m = small_market(6, n=8)
        ref = reference_solve(m)
        ter_star = m.ter(ref.price)
        basic = solve(m, SolverConfig(scheme="basic"))
        accel = solve(m, SolverConfig(scheme="accelerated"))
        assert fit_rate(basic, ter_star) <= -0.85
        assert fit_rate(accel, ter_star) <= -1.75
