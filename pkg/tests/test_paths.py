"""Covariance kernels and exact-in-law samplers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvarsim import (
    DomainError,
    Grid,
    GridError,
    PvarsimError,
    fbm_cov,
    fbm_cov_matrix,
    mixing_bound,
    mixing_bound_sharp,
    sample_bm,
    sample_fbm,
    translated_cov,
)
from pvarsim.csvio import read_columns, write_path_csv
from pvarsim.paths import require_in_domain

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
hursts = st.floats(min_value=0.05, max_value=0.95)


class TestFbmCov:
    def test_known_values(self):
        assert fbm_cov(1, 1, 0.5) == pytest.approx(1.0)
        assert fbm_cov(1, -1, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert fbm_cov(2, 2, 0.25) == pytest.approx(2**0.5)

    @given(finite, finite, hursts)
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, x, y, h):
        assert fbm_cov(x, y, h) == fbm_cov(y, x, h)

    def test_rejects_bad_hurst(self):
        for h in (0.0, 1.0, -0.3, 1.5):
            with pytest.raises(PvarsimError):
                fbm_cov(1.0, 1.0, h)


class TestTranslatedCov:
    def test_bm_disjoint_increments_vanish(self):
        assert translated_cov(0.3, 0.2, 2.0, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_closed_form_value(self):
        # direct arithmetic on the four-term closed form
        expected = 0.5 * (1.1**0.5 - 1.0**0.5 - 1.0**0.5 + 0.9**0.5)
        assert translated_cov(0.1, 0.1, 1.0, 0.25) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(-0.001255, abs=2e-6)

    @pytest.mark.parametrize("x,xp,y", [(0.1, 0.3, 1.0), (0.2, 0.1, 0.7), (0.5, 0.4, 5.0)])
    def test_bm_same_side_disjoint_is_zero(self, x, xp, y):
        # intervals (y, y+x) and (0, xp) disjoint and on the same side
        assert xp <= y
        assert translated_cov(x, xp, y, 0.5) == pytest.approx(0.0, abs=1e-13)

    @given(
        st.floats(min_value=-1.0, max_value=1.0),
        st.floats(min_value=-1.0, max_value=1.0),
        st.floats(min_value=2.0, max_value=40.0),
        hursts,
    )
    @settings(max_examples=300, deadline=None)
    def test_sharp_mixing_bound(self, x, xp, y, h):
        # pointwise analytic inequality on the admissible cone
        assert max(abs(x), abs(xp)) / abs(y) <= 0.5
        bound = mixing_bound_sharp(x, xp, y, h)
        assert abs(translated_cov(x, xp, y, h)) <= bound * (1 + 1e-12) + 1e-15

    def test_sharp_bound_attained_at_corner(self):
        for h in (0.25, 0.4, 0.6, 0.75):
            y = 3.0
            got = abs(translated_cov(-y / 2, y / 2, y, h))
            assert got == pytest.approx(mixing_bound_sharp(-y / 2, y / 2, y, h), rel=1e-12)

    def test_nominal_bound_exact_at_h_half(self):
        # both sides vanish on the cone at H = 1/2
        for x, xp, y in [(0.4, -0.3, 1.0), (-0.5, 0.5, 1.0), (1.0, 1.0, 2.0)]:
            assert mixing_bound(x, xp, y, 0.5) == 0.0
            assert translated_cov(x, xp, y, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_nominal_bound_counterexample(self):
        # the |1-2H|/2 constant understates the covariance for H != 1/2;
        # the acceptance suite tracks the as-stated inequality as a known red
        assert translated_cov(0.01, 0.01, 1.0, 0.75) > mixing_bound(0.01, 0.01, 1.0, 0.75)


class TestCovMatrix:
    @pytest.mark.parametrize("h", [0.25, 0.5, 0.75])
    def test_small_grids_psd(self, h):
        pts = np.linspace(-2.0, 2.0, 33)
        mat = fbm_cov_matrix(pts, h)
        assert np.allclose(mat, mat.T)
        eig = np.linalg.eigvalsh(mat)
        assert eig.min() >= -1e-10 * max(eig.max(), 1.0)


class TestSampleFbm:
    def test_anchored_at_zero(self):
        g = Grid.symmetric_grid(2.0, 128)
        for h in (0.25, 0.5, 0.75):
            path = sample_fbm(g, h, seed=1)
            assert path.values[path.zero_index] == 0.0

    def test_deterministic(self):
        g = Grid.symmetric_grid(2.0, 64)
        a = sample_fbm(g, 0.3, seed=99)
        b = sample_fbm(g, 0.3, seed=99)
        assert np.array_equal(a.values, b.values)
        c = sample_fbm(g, 0.3, seed=100)
        assert not np.array_equal(a.values, c.values)

    def test_increment_variance_h_half(self):
        # at H = 1/2 increments are independent with variance = step
        g = Grid.symmetric_grid(1.0, 32)
        incs = []
        for i in range(10_000):
            incs.append(np.diff(sample_fbm(g, 0.5, seed=i).values))
        incs = np.asarray(incs)
        emp = incs.var(axis=0).mean()
        assert abs(emp - g.step) / g.step < 0.05

    def test_empirical_covariance_matches_kernel(self):
        g = Grid.symmetric_grid(1.0, 16)
        h = 0.7
        vals = np.array([sample_fbm(g, h, seed=i).values for i in range(10_000)])
        pairs = [(-0.75, 0.5), (0.25, 0.875), (-0.5, -0.125)]
        for x, y in pairs:
            ix, iy = g.index_of(x), g.index_of(y)
            prods = vals[:, ix] * vals[:, iy]
            se = prods.std(ddof=1) / np.sqrt(prods.size)
            assert abs(prods.mean() - fbm_cov(x, y, h)) <= 4 * se

    def test_halves_uncorrelated_at_h_half(self):
        g = Grid.symmetric_grid(1.0, 16)
        i0 = g.index_of(0.0)
        left, right = [], []
        for i in range(8000):
            v = sample_fbm(g, 0.5, seed=i).values
            left.append(v[0] - v[i0])      # increment over the left half
            right.append(v[-1] - v[i0])    # increment over the right half
        corr = np.corrcoef(left, right)[0, 1]
        assert abs(corr) <= 4.0 / np.sqrt(len(left))

    def test_dense_matches_circulant_in_law(self):
        g = Grid.symmetric_grid(1.0, 16)
        var_c = np.var([sample_fbm(g, 0.25, seed=i).values[-1] for i in range(4000)])
        var_d = np.var(
            [sample_fbm(g, 0.25, seed=i, method="dense").values[-1] for i in range(4000)]
        )
        assert var_c == pytest.approx(1.0, rel=0.1)  # |x|^{2H} at x = 1
        assert var_d == pytest.approx(1.0, rel=0.1)

    def test_circulant_needs_uniform_grid(self):
        pts = np.array([-1.0, -0.5, 0.0, 0.25, 1.0])
        with pytest.raises(GridError):
            sample_fbm(Grid(pts), 0.5, seed=0, method="circulant")
        # dense handles it
        path = sample_fbm(Grid(pts), 0.5, seed=0, method="dense")
        assert path.values[2] == 0.0

    def test_dense_size_cap(self):
        g = Grid.symmetric_grid(1.0, 3000)
        with pytest.raises(GridError):
            sample_fbm(g, 0.5, seed=0, method="dense")

    def test_grid_must_contain_zero(self):
        with pytest.raises(GridError):
            sample_fbm(Grid.uniform_grid(0.5, 1.5, 10), 0.5, seed=0)


class TestSampleBm:
    def test_starts_at_zero_and_deterministic(self):
        g = Grid.uniform_grid(0.0, 2.0, 512)
        a = sample_bm(g, seed=5)
        assert a.values[0] == 0.0
        b = sample_bm(g, seed=5)
        assert np.array_equal(a.values, b.values)

    def test_terminal_variance(self):
        g = Grid.uniform_grid(0.0, 2.0, 64)
        ends = np.array([sample_bm(g, seed=i).values[-1] for i in range(10_000)])
        assert abs(ends.var() - 2.0) / 2.0 < 0.05

    def test_non_uniform_grid(self):
        pts = np.concatenate([[0.0], np.cumsum([0.1, 0.2, 0.05, 0.3])])
        bm = sample_bm(Grid(pts), seed=3)
        assert bm.values.size == pts.size

    def test_domain_guard(self, fbm_path):
        with pytest.raises(DomainError):
            require_in_domain(fbm_path, np.array([0.0, 9.0]))


class TestPathCsv:
    def test_17_digit_roundtrip(self, tmp_path):
        g = Grid.symmetric_grid(1.0, 8)
        path = sample_fbm(g, 0.5, seed=11)
        dest = tmp_path / "fbm.csv"
        write_path_csv(dest, "x", path.grid.points, path.values)
        header = dest.read_text().splitlines()[0]
        assert header == "x,value"
        xs, vs = read_columns(dest, ["x", "value"])
        assert np.array_equal(xs, path.grid.points)
        assert np.array_equal(vs, path.values)
