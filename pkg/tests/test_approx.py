import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbmnet.approx import (IntervalSpec, MonomialBasis, approx_error_bound,
                           best_poly_approx, choose_degree, l1_budget,
                           monomial_features)
from rbmnet.errors import DegreeCapError, ValidationError
from rbmnet.rbm import f_beta

GRID = np.linspace(-1.0, 1.0, 2001)


def measured_sup_error(beta, iv, D):
    q = best_poly_approx(beta, iv, D)
    return float(np.abs(f_beta(beta, iv.R * GRID + iv.h) - q(GRID)).max())


class TestErrorBound:
    def test_closed_form_values(self):
        assert approx_error_bound(1.0, 10) == pytest.approx(12 / 1.5 ** 10,
                                                            rel=1e-12)
        assert approx_error_bound(1.0, 0) == 12.0

    def test_geometric_ratio(self):
        for R in (0.5, 1.0, 3.0):
            for D in (0, 4, 9):
                ratio = approx_error_bound(R, D + 1) / approx_error_bound(R, D)
                assert ratio == pytest.approx(1 / (1 + 1 / (2 * R)), rel=1e-12)

    def test_rejects_bad_args(self):
        with pytest.raises(ValidationError):
            approx_error_bound(0.0, 3)
        with pytest.raises(ValidationError):
            approx_error_bound(1.0, -1)


class TestBestPolyApprox:
    def test_linear_case_exact(self):
        q = best_poly_approx(1.0, IntervalSpec(2.0, 0.7), 1)
        assert measured_sup_error(1.0, IntervalSpec(2.0, 0.7), 1) <= 1e-12
        assert q.coeffs[1] == pytest.approx(2.0, abs=1e-12)
        assert q.coeffs[0] == pytest.approx(0.7, abs=1e-12)

    def test_degree_zero_tanh(self):
        # odd target: the best constant is 0 and the error is tanh(1)
        iv = IntervalSpec(1.0, 0.0)
        q = best_poly_approx(0.0, iv, 0)
        assert abs(q.coeffs[0]) <= 1e-12
        err = measured_sup_error(0.0, iv, 0)
        grid_oracle = float(np.abs(np.tanh(GRID)).max())
        assert err == pytest.approx(grid_oracle, abs=1e-12)
        assert err == pytest.approx(np.tanh(1.0), abs=1e-9)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("R", [0.5, 2.0])
    def test_certified_on_subgrid(self, beta, R):
        for D in (3, 9, 15):
            for h in (0.0, -1.3):
                err = measured_sup_error(beta, IntervalSpec(R, h), D)
                assert err <= 2.0 * approx_error_bound(R, D)

    def test_strip_lipschitz_consequence(self):
        # |f_beta'| <= 2 near the real axis: difference quotients stay <= 2
        xs = np.linspace(-6, 6, 121)
        for beta in (0.0, 0.25, 0.75, 1.0):
            for dx in (1e-4, 0.05, 0.8):
                diff = np.abs(f_beta(beta, xs + dx) - f_beta(beta, xs))
                assert diff.max() <= 2.0 * dx + 1e-12

    def test_sherstov_coefficient_bound(self):
        for beta in (0.0, 0.6):
            for R in (0.5, 2.0):
                for D in (4, 12):
                    q = best_poly_approx(beta, IntervalSpec(R, 0.4), D)
                    M = float(np.abs(q(GRID)).max())
                    lhs = float((q.coeffs ** 2).sum())
                    rhs = (D + 1) * (4 * np.e) ** (2 * D) * M * M
                    assert lhs <= rhs


class TestChooseDegree:
    def test_zero_network(self):
        assert choose_degree(2.0, 0.0, 0.1) == 0

    def test_spec_value(self):
        assert choose_degree(2.0, 1.0, 0.1) == 11

    def test_smallest_property(self):
        lam, w1, eps = 3.0, 2.0, 0.05
        D = choose_degree(lam, w1, eps, max_degree=100)
        base = 8 * w1 * (lam + 2 * lam ** 2)
        assert base / (1 + 2 / lam) ** D <= eps / 2
        assert base / (1 + 2 / lam) ** (D - 1) > eps / 2

    def test_monotone_in_eps(self):
        degs = [choose_degree(2.0, 1.0, e, max_degree=200)
                for e in (0.2, 0.1, 0.05, 0.01)]
        assert degs == sorted(degs)

    def test_cap(self):
        with pytest.raises(DegreeCapError) as err:
            choose_degree(2.0, 100.0, 1e-9, max_degree=10)
        assert err.value.needed > 10

    def test_rejects_bad_args(self):
        with pytest.raises(ValidationError):
            choose_degree(2.0, 1.0, 0.0)
        with pytest.raises(ValidationError):
            choose_degree(1.0, 1.0, 0.1)


class TestL1Budget:
    def test_bias_only(self):
        assert l1_budget(0.3, [], [], 4) == pytest.approx(0.3)

    def test_single_unit_value(self):
        got = l1_budget(0.0, [1.0], [1.0], 1)
        want = np.sqrt(2.0) * (4 * np.e) ** 2 * 4.0
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(668.9, abs=0.2)

    def test_monotone_in_everything(self):
        base = l1_budget(0.1, [1.0, 0.5], [1.0, 2.0], 2)
        assert l1_budget(0.2, [1.0, 0.5], [1.0, 2.0], 2) > base
        assert l1_budget(0.1, [1.5, 0.5], [1.0, 2.0], 2) > base
        assert l1_budget(0.1, [1.0, 0.5], [1.5, 2.0], 2) > base
        assert l1_budget(0.1, [1.0, 0.5], [1.0, 2.0], 3) > base


class TestMonomialBasis:
    def test_subset_count_and_order(self):
        basis = MonomialBasis(4, 2)
        assert len(basis) == basis.expected_size == 1 + 4 + 6
        assert basis.subsets[0] == ()
        sizes = [len(s) for s in basis.subsets]
        assert sizes == sorted(sizes)
        assert basis.subsets[1:5] == [(0,), (1,), (2,), (3,)]
        assert basis.subsets[5] == (0, 1)

    def test_spec_feature_vector(self):
        basis = MonomialBasis(3, 2)
        got = monomial_features(basis, np.array([1, -1, 1]))
        assert got.tolist() == [1, 1, -1, 1, -1, 1, -1]

    def test_all_ones(self):
        basis = MonomialBasis(5, 3)
        assert (monomial_features(basis, np.ones(5, dtype=np.int8)) == 1).all()

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from([-1, 1]), min_size=4, max_size=4))
    def test_parity_multiplicative(self, x):
        basis = MonomialBasis(4, 4)
        feats = dict(zip(basis.subsets,
                         monomial_features(basis, np.array(x, dtype=np.int8))))
        assert feats[(0, 1)] * feats[(2, 3)] == feats[(0, 1, 2, 3)]
        assert feats[(0,)] * feats[(1, 2)] == feats[(0, 1, 2)]

    def test_entries_are_signs(self, rng):
        basis = MonomialBasis(6, 2)
        x = rng.choice(np.array([-1, 1], dtype=np.int8), size=(50, 6))
        f = basis.features(x)
        assert set(np.unique(f)) <= {-1, 1}

    def test_rejects_non_spins(self):
        with pytest.raises(ValidationError):
            monomial_features(MonomialBasis(2, 1), np.array([1, 0]))
