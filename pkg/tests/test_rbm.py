import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbmnet import exact
from rbmnet.dataset import SpinDataset, all_configs, collapse
from rbmnet.errors import EnumerationCapError, ValidationError
from rbmnet.rbm import (Rbm, conditional_mean, conditional_mean_oracle,
                        exact_visible_pmf, f_beta, gibbs_sample, load_model,
                        min_marginal_bound, norm_bounds,
                        rbm_from_tanh_network, save_model)
from conftest import random_rbm


class TestFBeta:
    def test_identity_at_beta_one(self):
        x = np.linspace(-30, 30, 401)
        assert np.abs(f_beta(1.0, x) - x).max() <= 1e-12

    def test_tanh_at_beta_zero(self):
        x = np.linspace(-10, 10, 401)
        assert np.abs(f_beta(0.0, x) - np.tanh(x)).max() <= 1e-12

    def test_zero_maps_to_zero(self):
        for beta in (0.0, 0.3, 0.9, 1.0):
            assert f_beta(beta, 0.0) == 0.0

    def test_high_precision_value(self):
        import mpmath
        mpmath.mp.dps = 50
        want = float(mpmath.atanh(mpmath.mpf("0.5") * mpmath.tanh(2)) / mpmath.mpf("0.5"))
        assert abs(f_beta(0.5, 2.0) - want) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 1), st.floats(-20, 20))
    def test_odd(self, beta, x):
        assert f_beta(beta, -x) == pytest.approx(-f_beta(beta, x), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 1), st.floats(-10, 10), st.floats(1e-6, 5))
    def test_monotone(self, beta, x, dx):
        assert f_beta(beta, x + dx) > f_beta(beta, x) - 1e-15

    def test_rejects_bad_beta(self):
        with pytest.raises(ValidationError):
            f_beta(1.5, 0.0)


class TestConditionalMean:
    def test_zero_couplings_give_bias_tanh(self):
        m = Rbm(np.zeros((3, 2)), np.array([0.3, -0.1, 0.0]), np.zeros(2))
        for i, b in enumerate(m.b_vis):
            got = conditional_mean(m, i, np.ones(2))
            assert got == pytest.approx(np.tanh(b), abs=1e-14)

    def test_matches_oracle_on_spec_instance(self):
        m = Rbm(np.array([[0.8], [0.6]]), np.zeros(2), np.zeros(1))
        a = conditional_mean(m, 0, [1])
        b = conditional_mean_oracle(m, 0, [1])
        assert a == pytest.approx(b, abs=1e-10)

    def test_ising_edge_effect(self, edge_rbm):
        # one hidden unit linking two spins acts like an Ising edge J = 0.5
        eff = np.arctanh(np.tanh(edge_rbm.W[0, 0]) * np.tanh(edge_rbm.W[1, 0]))
        assert eff == pytest.approx(0.5, abs=1e-12)
        for x in (-1, 1):
            want = np.tanh(0.5 * x)
            assert conditional_mean(edge_rbm, 0, [x]) == pytest.approx(
                want, abs=1e-12)
        # cross-check against direct 2-spin Ising enumeration
        p_ising = exact.ising_pmf(2, {(0, 1): 0.5})
        tab = exact.conditional_table(p_ising, 2, 0, [1])
        assert conditional_mean(edge_rbm, 0, [-1]) == pytest.approx(
            tab[0], abs=1e-12)
        assert conditional_mean(edge_rbm, 0, [1]) == pytest.approx(
            tab[1], abs=1e-12)

    def test_oracle_equivalence_random_models(self, rng):
        worst = 0.0
        for _ in range(25):
            m = random_rbm(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)))
            rest = all_configs(m.n_visible - 1)
            for i in range(m.n_visible):
                net = conditional_mean(m, i, rest)
                for r, x in enumerate(rest):
                    worst = max(worst, abs(net[r] - conditional_mean_oracle(m, i, x)))
        assert worst <= 1e-9

    def test_oracle_disconnected_spin(self):
        m = Rbm(np.array([[0.5], [0.0], [0.0]]), np.zeros(3), np.zeros(1))
        assert conditional_mean_oracle(m, 0, [1, -1]) == pytest.approx(0.0, abs=1e-14)

    def test_index_errors(self):
        m = Rbm(np.zeros((2, 1)), np.zeros(2), np.zeros(1))
        with pytest.raises(IndexError):
            conditional_mean(m, 5, [1])
        with pytest.raises(IndexError):
            conditional_mean_oracle(m, -1, [1])

    def test_oracle_cap(self, rng):
        m = random_rbm(rng, 2, 21, w_scale=0.1)
        with pytest.raises(EnumerationCapError):
            conditional_mean_oracle(m, 0, [1])


class TestExactPmf:
    def test_zero_model_uniform(self):
        p = exact_visible_pmf(Rbm(np.zeros((3, 2)), np.zeros(3), np.zeros(2)))
        assert np.abs(p - 1 / 8).max() <= 1e-14

    def test_normalization(self, rng):
        for _ in range(5):
            p = exact_visible_pmf(random_rbm(rng, 4, 3))
            assert abs(p.sum() - 1.0) <= 1e-12

    def test_matches_ising_for_degree_two(self, rng):
        # hidden units of degree 2: marginal is the Ising model with
        # edge weights atanh(tanh(W_a) tanh(W_b))
        w = rng.uniform(-1.2, 1.2, size=3)
        W = np.zeros((3, 3))
        edges = [(0, 1), (1, 2), (0, 2)]
        js = {}
        for col, (a, b) in enumerate(edges):
            W[a, col] = w[col]
            W[b, col] = 0.8
            js[(a, b)] = float(np.arctanh(np.tanh(w[col]) * np.tanh(0.8)))
        fields = rng.uniform(-0.5, 0.5, size=3)
        m = Rbm(W, fields, np.zeros(3))
        assert np.abs(exact_visible_pmf(m)
                      - exact.ising_pmf(3, js, fields)).max() <= 1e-9

    def test_bias_negation_flips_spins(self, rng):
        m = random_rbm(rng, 3, 2)
        flipped = Rbm(-m.W, -m.b_vis, m.b_hid)
        p = exact_visible_pmf(m)
        q = exact_visible_pmf(flipped)
        # config g maps to its complement 2^n - 1 - g
        assert np.abs(p - q[::-1]).max() <= 1e-12

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            exact_visible_pmf(Rbm(np.zeros((20, 5)), np.zeros(20), np.zeros(5)))


class TestNormBounds:
    def test_zero_model(self):
        nb = norm_bounds(Rbm(np.zeros((2, 1)), np.zeros(2), np.zeros(1)))
        assert nb.lambda1 == 0.0 and nb.lambda2 == 0.0

    def test_spec_instance(self):
        nb = norm_bounds(Rbm(np.array([[0.5], [-0.5]]),
                             np.array([0.1, 0.0]), np.zeros(1)))
        assert nb.lambda1 == pytest.approx(np.tanh(0.5) + 0.1, abs=1e-12)
        assert nb.lambda2 == pytest.approx(1.0, abs=1e-12)

    def test_sign_invariance(self, rng):
        m = random_rbm(rng, 3, 2)
        neg = Rbm(-m.W, m.b_vis, m.b_hid)
        assert norm_bounds(m) == norm_bounds(neg)


class TestMinMarginalBound:
    def test_zero_lambda(self):
        from rbmnet.rbm import NormBounds
        assert min_marginal_bound(NormBounds(0.0, 0.0), 5) == 1.0

    def test_formula_value(self):
        from rbmnet.rbm import NormBounds
        want = (1.0 - np.tanh(1.0)) ** 3
        got = min_marginal_bound(NormBounds(1.0, 0.0), 3)
        assert got == pytest.approx(want, abs=1e-15)
        assert got == pytest.approx(0.013551, abs=1e-6)

    def test_monotone(self):
        from rbmnet.rbm import NormBounds
        vals = [min_marginal_bound(NormBounds(lam, 0.0), d)
                for lam in (0.2, 0.5, 1.0) for d in (1, 3, 6)]
        for lam in (0.2, 0.5):
            for d in (1, 3):
                assert min_marginal_bound(NormBounds(lam, 0), d) \
                    > min_marginal_bound(NormBounds(lam, 0), d + 1)
                assert min_marginal_bound(NormBounds(lam, 0), d) \
                    > min_marginal_bound(NormBounds(lam + 0.2, 0), d)
        assert all(v > 0 for v in vals)

    def test_enumerated_marginals_respect_bound(self, rng):
        for _ in range(8):
            m = random_rbm(rng, 4, 2, w_scale=1.0)
            nb = norm_bounds(m)
            p = exact_visible_pmf(m)
            lhs = (2 ** m.n_visible) * p.min()
            assert lhs >= min_marginal_bound(nb, m.n_visible) - 1e-12


class TestMgfIdentity:
    def test_grid(self):
        lam = np.linspace(-2, 2, 21)
        z = np.linspace(-2, 2, 17)
        for l in lam:
            for zz in z:
                mu = np.tanh(zz)
                lhs = (1 + mu) / 2 * np.exp(l) + (1 - mu) / 2 * np.exp(-l)
                rhs = np.cosh(l) + np.sinh(l) * mu
                assert abs(lhs - rhs) <= 1e-12


class TestGibbs:
    def test_deterministic_under_seed(self, rng):
        m = random_rbm(rng, 4, 2, w_scale=0.8)
        a = gibbs_sample(m, 50, 500, 2, seed=11)
        b = gibbs_sample(m, 50, 500, 2, seed=11)
        assert np.array_equal(a.samples, b.samples)
        c = gibbs_sample(m, 50, 500, 2, seed=12)
        assert not np.array_equal(a.samples, c.samples)

    def test_fair_coins(self):
        m = Rbm(np.zeros((3, 1)), np.zeros(3), np.zeros(1))
        ds = gibbs_sample(m, 10, 20000, 1, seed=3)
        assert np.abs(ds.samples.mean(axis=0)).max() <= 3 / np.sqrt(20000)

    def test_single_spin_bias(self):
        m = Rbm(np.zeros((1, 0)), np.array([0.5]), np.zeros(0))
        ds = gibbs_sample(m, 10, 100000, 1, seed=4)
        assert ds.samples.mean() == pytest.approx(np.tanh(0.5), abs=0.01)

    def test_matches_exact_pmf(self, rng):
        m = random_rbm(rng, 4, 2, w_scale=0.7, b_scale=0.3)
        ds = gibbs_sample(m, 500, 200000, 1, seed=5)
        from rbmnet.dataset import pack_columns
        key = pack_columns(ds.samples, range(4))
        emp = np.bincount(key, minlength=16) / ds.m
        assert exact.total_variation(emp, exact_visible_pmf(m)) <= 0.02

    def test_chains_split_counts(self, rng):
        m = random_rbm(rng, 3, 1)
        ds = gibbs_sample(m, 20, 101, 1, seed=6, n_chains=4)
        assert ds.m == 101


class TestNetworkEmbedding:
    def test_constant_network_exact(self):
        for K in (1, 8):
            model, tgt, dev = rbm_from_tanh_network(0.4, [0.0], [0.3],
                                                    [[1.0]], K=K)
            assert conditional_mean(model, tgt, [1]) == pytest.approx(
                np.tanh(0.4), abs=1e-12)
            assert dev <= 1e-12

    def test_deviation_shrinks_with_replication(self):
        _, _, d8 = rbm_from_tanh_network(0.0, [0.5], [0.0], [[1.0]], K=8)
        _, _, d64 = rbm_from_tanh_network(0.0, [0.5], [0.0], [[1.0]], K=64)
        assert d64 <= d8
        assert d64 <= 1e-4

    def test_negating_outer_weights_negates_prediction(self):
        mp, tgt, _ = rbm_from_tanh_network(0.0, [0.7], [0.2], [[0.9]], K=16)
        mn, _, _ = rbm_from_tanh_network(0.0, [-0.7], [0.2], [[0.9]], K=16)
        for x in (-1, 1):
            assert conditional_mean(mp, tgt, [x]) == pytest.approx(
                -conditional_mean(mn, tgt, [x]), abs=1e-12)

    def test_rejects_bad_k(self):
        with pytest.raises(ValidationError):
            rbm_from_tanh_network(0.0, [0.5], [0.0], [[1.0]], K=0)


class TestSerialization:
    def test_model_roundtrip(self, rng, tmp_path):
        m = random_rbm(rng, 3, 2)
        path = tmp_path / "model.json"
        save_model(m, path)
        back = load_model(path)
        assert np.array_equal(back.W, m.W)
        assert np.array_equal(back.b_vis, m.b_vis)
        assert np.array_equal(back.b_hid, m.b_hid)
        doc = json.loads(path.read_text())
        assert doc["format_version"] == 1 and doc["kind"] == "rbm"

    def test_dataset_roundtrip(self, rng, tmp_path):
        samples = rng.choice(np.array([-1, 1], dtype=np.int8), size=(20, 5))
        labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=20)
        ds = SpinDataset(samples, labels)
        path = tmp_path / "data.txt"
        ds.save(path)
        back = SpinDataset.load(path)
        assert np.array_equal(back.samples, ds.samples)
        assert np.array_equal(back.labels, ds.labels)
        header = path.read_text().splitlines()[0]
        assert header.startswith("# spins") and "labels=1" in header

    def test_dataset_validation(self):
        with pytest.raises(ValidationError):
            SpinDataset(np.array([[1, 2]]))
        with pytest.raises(ValidationError):
            SpinDataset(np.array([[1, -1]]), labels=np.array([0]))


class TestCollapse:
    def test_weights_and_splits(self):
        samples = np.array([[1, 1], [1, 1], [-1, 1], [1, 1]], dtype=np.int8)
        labels = np.array([1, -1, 1, 1], dtype=np.int8)
        wc = collapse(SpinDataset(samples, labels))
        assert wc.weights.sum() == pytest.approx(1.0)
        assert wc.configs.shape[0] == 2
        idx = int(np.flatnonzero((wc.configs == [1, 1]).all(axis=1))[0])
        assert wc.weights[idx] == pytest.approx(0.75)
        assert wc.label_split[idx, 0] == pytest.approx(0.5)   # +1 labels
        assert wc.label_split[idx, 1] == pytest.approx(0.25)  # -1 labels
