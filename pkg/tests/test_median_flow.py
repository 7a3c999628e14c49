"""Space changes, reversed drivers, the driven flow, and the median."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvarsim import (
    DriverSequence,
    PvarsimError,
    cond_exp_median,
    diffusion_sigma,
    direct_median_oracle,
    euler_flow,
    flow_derivative,
    flow_inverse_check,
    lamperti,
    lamperti_inv,
    median_from_flow,
    rademacher_driver,
    reversed_driver,
    scale_lamperti,
    scale_lamperti_inv,
    scale_map,
)
from pvarsim.median_flow import flow_derivative_batch

from conftest import ks_distance

units = st.floats(min_value=1e-6, max_value=1.0 - 1e-6)


def zero_driver(n: int, dt: float) -> DriverSequence:
    return DriverSequence(increments=np.zeros(n), dt=dt, kind="rademacher")


class TestSpaceChanges:
    def test_seam_values(self):
        assert lamperti(0.5) == 0.0
        assert scale_map(0.0) == 0.0
        assert scale_lamperti_inv(0.0) == 0.5
        assert diffusion_sigma(0.25) == 0.25
        assert diffusion_sigma(0.75) == 0.25

    def test_quarter_point(self):
        # lamperti(1/4) = log(1/2); scale_map(log 1/2) = -(2 - 1) = -1
        assert scale_lamperti(0.25) == pytest.approx(-1.0, rel=1e-14)

    @pytest.mark.parametrize("x", [0.01, 0.3, 0.5, 0.7, 0.99])
    def test_roundtrip_pinned_points(self, x):
        assert scale_lamperti_inv(scale_lamperti(x)) == pytest.approx(x, abs=1e-12)

    @given(units)
    @settings(max_examples=200, deadline=None)
    def test_roundtrips(self, x):
        assert lamperti_inv(lamperti(x)) == pytest.approx(x, rel=1e-9, abs=1e-12)
        assert scale_lamperti_inv(scale_lamperti(x)) == pytest.approx(x, rel=1e-9, abs=1e-12)

    @given(units)
    @settings(max_examples=200, deadline=None)
    def test_composition_matches_closed_form(self, x):
        assert scale_map(lamperti(x)) == pytest.approx(scale_lamperti(x), rel=1e-9, abs=1e-12)

    def test_mirror_symmetry_is_bit_exact(self):
        for y in np.concatenate([np.linspace(-30, 30, 101), [0.0, 1e-300, 1e300]]):
            assert scale_lamperti_inv(-y) == 1.0 - scale_lamperti_inv(y)

    def test_domain_errors(self):
        for x in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(PvarsimError):
                lamperti(x)
            with pytest.raises(PvarsimError):
                scale_lamperti(x)


class TestDrivers:
    def test_reversal_is_negate_and_flip(self):
        fwd = np.array([0.1, -0.2, 0.3])
        rev = reversed_driver(fwd, dt=0.04, kind="gaussian")
        assert np.array_equal(rev.increments, [-0.3, 0.2, -0.1])

    def test_reversal_twice_is_identity(self):
        fwd = rademacher_driver(64, 1e-2, seed=5).increments
        back = reversed_driver(-np.asarray(reversed_driver(fwd, 1e-2).increments)[::-1], 1e-2)
        assert np.array_equal(-np.asarray(back.increments)[::-1], fwd)

    def test_reversed_path_relation_on_five_steps(self):
        # reversed path of the longer horizon = shifted short-horizon reversed
        # path plus the reversed tail, checked at every grid time
        dt = 0.2
        fwd1 = np.array([0.3, -0.1, 0.4])            # increments on [0, T1]
        tail = np.array([-0.2, 0.5])                 # increments on (T1, T2]
        fwd2 = np.concatenate([fwd1, tail])
        rev1 = np.concatenate([[0.0], np.cumsum(reversed_driver(fwd1, dt, kind='gaussian').increments)])
        rev2 = np.concatenate([[0.0], np.cumsum(reversed_driver(fwd2, dt, kind='gaussian').increments)])
        dT = tail.size  # T2 - T1 in steps
        for u in range(rev2.size):
            short = rev1[max(u - dT, 0)]
            head = rev2[min(u, dT)]
            assert rev2[u] == pytest.approx(short + head, abs=1e-12)

    def test_extension_prepends(self):
        dt = 0.2
        fwd1 = np.array([0.3, -0.1, 0.4])
        tail = np.array([-0.2, 0.5])
        rev2 = reversed_driver(np.concatenate([fwd1, tail]), dt, kind='gaussian')
        assert np.array_equal(rev2.increments[tail.size:],
                              reversed_driver(fwd1, dt, kind='gaussian').increments)
        assert np.array_equal(rev2.increments[: tail.size], [-0.5, 0.2])

    def test_rademacher_lattice_enforced(self):
        with pytest.raises(PvarsimError):
            DriverSequence(increments=np.array([0.1, 0.2]), dt=0.04)
        DriverSequence(increments=np.array([0.2, -0.2, 0.0]), dt=0.04)  # ok

    def test_rademacher_driver_is_deterministic(self):
        a = rademacher_driver(100, 1e-2, seed=1)
        b = rademacher_driver(100, 1e-2, seed=1)
        assert np.array_equal(a.increments, b.increments)
        assert a.horizon == pytest.approx(1.0)


class TestEulerFlow:
    def test_zero_driver_stays_put(self):
        state = euler_flow(zero_driver(50, 1e-2), x0=0.37)
        assert state.x == 0.37
        assert state.steps_consumed == 50

    def test_single_step_from_zero(self):
        dt = 1e-2
        drv = DriverSequence(increments=np.array([math.sqrt(dt)]), dt=dt)
        assert euler_flow(drv, 0.0).x == math.sqrt(dt)

    def test_flow_composition_is_exact(self):
        # concatenated drivers: long run == short run started at fine endpoint
        dt = 1e-3
        fine = rademacher_driver(32, dt, seed=8).increments
        coarse = rademacher_driver(1000, dt, seed=9).increments
        combined = DriverSequence(increments=np.concatenate([fine, coarse]), dt=dt)
        y = euler_flow(DriverSequence(increments=fine, dt=dt), 0.0).x
        direct = euler_flow(combined, 0.0).x
        via = euler_flow(DriverSequence(increments=coarse, dt=dt), y).x
        assert direct == via  # bitwise: same operations in the same order

    def test_strictly_increasing_in_x0(self):
        dt = 1e-3
        for seed in range(100):
            drv = rademacher_driver(200, dt, seed=seed)
            xs = np.array([-0.5, -0.1, 0.0, 0.2, 0.9])
            ends = [euler_flow(drv, x).x for x in xs]
            assert np.all(np.diff(ends) > 0)

    def test_steps_bound(self):
        with pytest.raises(PvarsimError):
            euler_flow(zero_driver(5, 0.1), 0.0, steps=6)


class TestMedian:
    def test_zero_driver_gives_half(self):
        assert median_from_flow(zero_driver(100, 1e-2)).m == 0.5

    def test_negating_driver_mirrors_median_exactly(self):
        for seed in range(50):
            drv = rademacher_driver(500, 1e-3, seed=seed)
            neg = DriverSequence(increments=-np.asarray(drv.increments), dt=drv.dt)
            assert median_from_flow(neg).m == 1.0 - median_from_flow(drv).m

    def test_median_in_unit_interval(self):
        for seed in range(20):
            m = median_from_flow(rademacher_driver(2000, 1e-3, seed=seed)).m
            assert 0.0 < m < 1.0


class TestFlowDerivative:
    def test_zero_driver_nonzero_start(self):
        # flat trajectory at x0 != 0: N = 0 and bracket = T, so f = e^{-T/2}
        assert flow_derivative(zero_driver(1000, 1e-3), 0.3) == pytest.approx(
            math.exp(-0.5), rel=1e-12
        )

    def test_zero_driver_zero_start_tie_rule(self):
        # sign(0) = 0 pins the degenerate case to f = 1
        assert flow_derivative(zero_driver(1000, 1e-3), 0.0) == 1.0

    def test_positive(self):
        for seed in range(10):
            assert flow_derivative(rademacher_driver(500, 1e-3, seed=seed), 0.0) > 0

    def test_matches_central_finite_difference(self):
        dt = 1e-4
        h = 1e-6
        rng = np.random.default_rng(12)
        worst = 0.0
        for seed in range(100):
            drv = rademacher_driver(int(1.0 / dt), dt, seed=seed)
            x0 = float(rng.uniform(-1.0, 1.0))
            fd = (euler_flow(drv, x0 + h).x - euler_flow(drv, x0 - h).x) / (2 * h)
            f = flow_derivative(drv, x0)
            worst = max(worst, abs(f - fd) / max(1.0, abs(f)))
        assert worst <= 1e-3

    def test_second_moment_sanity(self):
        # E f_1^2 = e on the lattice up to O(dt); 2000 drivers, 4 SE band
        dt = 1e-3
        root = math.sqrt(dt)
        rng = np.random.default_rng(0)
        drivers = np.where(rng.integers(0, 2, size=(2000, 1000)) == 1, root, -root)
        sq = flow_derivative_batch(drivers, dt, 0.0) ** 2
        se = sq.std(ddof=1) / math.sqrt(sq.size)
        assert abs(sq.mean() - math.e) <= 4 * se

    @pytest.mark.parametrize("p", [1.5, 2.0])
    def test_moment_bound(self, p):
        # E f_t^p <= exp(p (p - 1/2) t) within 5 SE, unit Lipschitz constant
        dt = 1e-3
        root = math.sqrt(dt)
        rng = np.random.default_rng(1)
        drivers = np.where(rng.integers(0, 2, size=(4000, 1000)) == 1, root, -root)
        f = flow_derivative_batch(drivers, dt, 0.0) ** p
        bound = math.exp(p * (p - 0.5))
        se = f.std(ddof=1) / math.sqrt(f.size)
        assert f.mean() <= bound * 1.0 + 5 * se


class TestCondExpMedian:
    def test_delta_zero_collapses_to_median(self):
        fwd = rademacher_driver(400, 1e-3, seed=3).increments
        m = median_from_flow(reversed_driver(fwd, 1e-3)).m
        assert cond_exp_median(fwd, 1e-3, 0.0, inner_n=64, seed=9) == m

    def test_zero_driver_antithetic_is_exactly_half(self):
        fwd = np.zeros(400)
        est = cond_exp_median(fwd, 1e-3, 1e-2, inner_n=1000, seed=4, antithetic=True)
        assert est == 0.5

    def test_inner_n_validation(self):
        fwd = np.zeros(10)
        with pytest.raises(PvarsimError):
            cond_exp_median(fwd, 1e-3, 1e-2, inner_n=1)
        with pytest.raises(PvarsimError):
            cond_exp_median(fwd, 1e-3, 1e-2, inner_n=7, antithetic=True)

    def test_average_raw_option_differs(self):
        fwd = rademacher_driver(500, 1e-3, seed=5).increments
        a = cond_exp_median(fwd, 1e-3, 1e-2, inner_n=200, seed=6, average_raw_F=False)
        b = cond_exp_median(fwd, 1e-3, 1e-2, inner_n=200, seed=6, average_raw_F=True)
        assert a != b
        assert 0.0 < a < 1.0 and 0.0 < b < 1.0


class TestDirectOracle:
    def test_zero_increments_identity_flow(self):
        m = direct_median_oracle(np.zeros(100), 1e-3)
        assert m.m == pytest.approx(0.5, abs=1e-12)
        assert m.method == "direct_oracle"

    def test_single_euler_step_formula(self):
        dt = 1e-2
        inc = math.sqrt(dt)
        x_grid = np.array([0.2, 0.5, 0.8])
        from pvarsim._kernels import direct_flow_batch

        ends, clamped = direct_flow_batch(np.array([[inc]]), x_grid, 1e-12)
        expected = x_grid + np.minimum(x_grid, 1 - x_grid) * inc
        assert np.allclose(ends[0], expected, rtol=0, atol=0)
        assert clamped[0] == 0

    def test_matched_randomness_agreement(self):
        # same forward increments through both schemes; the two 500-sample
        # median clouds must be close in Kolmogorov distance
        dt = 1e-4
        n = int(0.25 / dt)
        root = math.sqrt(dt)
        rng = np.random.default_rng(42)
        flow_m = np.empty(500)
        oracle_m = np.empty(500)
        for i in range(500):
            fwd = np.where(rng.integers(0, 2, size=n) == 1, root, -root)
            flow_m[i] = median_from_flow(reversed_driver(fwd, dt)).m
            oracle_m[i] = direct_median_oracle(fwd, dt).m
        ks = ks_distance(flow_m, oracle_m)
        assert ks <= 0.02

    def test_pathwise_agreement_matched(self):
        dt = 1e-4
        n = int(0.25 / dt)
        root = math.sqrt(dt)
        rng = np.random.default_rng(7)
        errs = []
        for _ in range(50):
            fwd = np.where(rng.integers(0, 2, size=n) == 1, root, -root)
            a = median_from_flow(reversed_driver(fwd, dt)).m
            b = direct_median_oracle(fwd, dt).m
            errs.append(abs(a - b))
        assert np.median(errs) < 5e-3


class TestFlowInverse:
    def test_zero_increments_from_origin(self):
        dt = 1e-3
        err = flow_inverse_check(np.zeros(1000), dt, [0.0])
        assert err <= 2 * dt

    def test_roundtrip_error_shrinks_with_step(self):
        rng = np.random.default_rng(11)
        errs = {}
        for dt in (1e-3, 1e-4):
            n = int(1.0 / dt)
            incs = rng.normal(0.0, math.sqrt(dt), size=n)
            errs[dt] = flow_inverse_check(incs, dt, np.linspace(-1.5, 1.5, 7))
        assert errs[1e-4] <= errs[1e-3] / 2.0

    def test_sign_constant_regime_is_exact_to_rounding(self):
        dt = 1e-3
        n = 1000
        rng = np.random.default_rng(13)
        incs = rng.normal(0.0, math.sqrt(dt), size=n)
        span = float(np.max(np.abs(np.cumsum(incs)))) + 0.5 * n * dt
        xs = np.array([-(span + 1.0), span + 1.0])  # flows never change sign
        err = flow_inverse_check(incs, dt, xs)
        assert err <= 10 * dt
