import numpy as np
import pytest

from rbmnet import _rng, exact
from rbmnet.dataset import SpinDataset, all_configs, pack_columns
from rbmnet.errors import ValidationError
from rbmnet.generators import (GeneratorSpec, generate_model,
                               supervised_assumption_report)
from rbmnet.rbm import Rbm, norm_bounds
from rbmnet.polynomial import coefficient_l1_distance
from rbmnet.supervised import (LabelPredictor, SupervisedConfig,
                               SupervisedRbm, avg_conditional_covariance,
                               avg_conditional_covariance_exact,
                               bayes_label_loss, bayes_label_mean,
                               conditional_potential_exact, fit_bias,
                               fit_bias_exact, fit_conditional_mrfs,
                               joint_label_pmf, label_balance,
                               learn_supervised_nbhd, predict_label,
                               predictor_population_loss, split_by_label,
                               tau_threshold, two_hop_neighbors)


def supervised_cycle(n=6, j=0.25, scale=0.3, bias=0.1, seed=3):
    return generate_model(GeneratorSpec(
        "cycle", n, weight_scale=j, seed=seed,
        label_coupling={"scale": scale, "mode": "alternating", "bias": bias}))


def labeled_sample(model, m, seed, stream=0):
    joint = joint_label_pmf(model)
    flat = np.concatenate([joint[:, 1], joint[:, 0]])
    return exact.sample_exact(flat, model.n_visible + 1, m, seed,
                              labeled=True, stream=stream)


class TestJointPmf:
    def test_balance_and_shape(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        assert joint.shape == (64, 2)
        assert joint.sum() == pytest.approx(1.0, abs=1e-12)
        assert label_balance(joint) >= 0.3

    def test_conditional_rbm_matches_conditioned_joint(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        for y, col in ((1, 0), (-1, 1)):
            from rbmnet.rbm import exact_visible_pmf
            direct = exact_visible_pmf(model.conditional_rbm(y))
            sliced = joint[:, col] / joint[:, col].sum()
            assert np.abs(direct - sliced).max() <= 1e-12


class TestAvgConditionalCovariance:
    def test_independent_spins_near_zero(self):
        rng = _rng.substream(8, _rng.TRIAL)
        samples = rng.choice(np.array([-1, 1], dtype=np.int8),
                             size=(30000, 3))
        labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=30000)
        data = SpinDataset(samples, labels)
        got = avg_conditional_covariance(data, 0, 1, [], min_bin=25)
        assert abs(got) <= 0.02

    def test_exact_bound_for_shared_unit(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        rep = supervised_assumption_report(model)
        alpha = rep["alpha"]
        lam = max(rep["hidden_l1_y+"], rep["visible_l1"])
        beta = label_balance(joint)
        floor = beta * alpha * alpha * np.exp(-12.0 * lam)
        truth = two_hop_neighbors(model)
        for u in range(model.n_visible):
            for v in truth[u]:
                got = avg_conditional_covariance_exact(joint, 6, u, v, [])
                assert got >= floor

    def test_separating_set_kills_covariance(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        # 0 and 2 are not two-hop neighbors; conditioning on {1, 3, 4, 5}
        # separates them given the label
        got = avg_conditional_covariance_exact(joint, 6, 0, 2, [1, 3, 4, 5])
        assert abs(got) <= 1e-10

    def test_fkg_nonnegative_bins(self):
        # every conditional covariance bin is nonnegative (ferromagnetic W)
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        configs = all_configs(6)
        for s in ([], [2], [2, 4]):
            key = pack_columns(configs, s)
            for y in (0, 1):
                w = joint[:, y]
                for b in range(1 << len(s)):
                    sel = key == b
                    pw = w[sel]
                    tot = pw.sum()
                    if tot <= 0:
                        continue
                    xu = configs[sel, 0].astype(float)
                    xv = configs[sel, 1].astype(float)
                    cov = (pw * xu * xv).sum() / tot \
                        - (pw * xu).sum() / tot * (pw * xv).sum() / tot
                    assert cov >= -1e-12

    def test_bin_probability_floor(self):
        # Pr[X_S = x_S, Y = y] >= beta * delta^|S| with delta = e^{-2 lam}/2
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        rep = supervised_assumption_report(model)
        lam = max(rep["hidden_l1_y+"], rep["hidden_l1_y-"], rep["visible_l1"])
        beta = label_balance(joint)
        delta = np.exp(-2 * lam) / 2
        configs = all_configs(6)
        for s in ([0], [0, 3], [1, 2, 5]):
            key = pack_columns(configs, s)
            for y in (0, 1):
                bins = np.bincount(key, weights=joint[:, y],
                                   minlength=1 << len(s))
                assert bins.min() >= beta * delta ** len(s)

    def test_validation(self):
        model = supervised_cycle()
        data = labeled_sample(model, 100, seed=1)
        with pytest.raises(ValidationError):
            avg_conditional_covariance(data, 0, 0, [])
        with pytest.raises(ValidationError):
            avg_conditional_covariance(data, 0, 1, [1])
        unlabeled = SpinDataset(data.samples)
        with pytest.raises(ValidationError):
            avg_conditional_covariance(unlabeled, 0, 1, [])


class TestGreedyNeighborhood:
    def test_exact_mode_recovers_every_node(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        truth = two_hop_neighbors(model)
        cfg = SupervisedConfig(tau=float(tau_threshold(0.3, 1.5, 0.3)))
        for u in range(6):
            assert learn_supervised_nbhd(None, u, cfg,
                                         exact_joint=(joint, 6)) == truth[u]

    def test_star_with_pruning(self):
        # 3 visibles sharing one hidden unit plus label couplings
        W = np.full((3, 1), 0.5)
        model = SupervisedRbm(Rbm(W, np.zeros(3), np.zeros(1)),
                              np.array([0.4]), 0.0)
        joint = joint_label_pmf(model)
        truth = two_hop_neighbors(model)
        cfg = SupervisedConfig(tau=1e-6)
        for u in range(3):
            got, diag = learn_supervised_nbhd(None, u, cfg,
                                              exact_joint=(joint, 3),
                                              return_diagnostics=True)
            assert got == truth[u]

    def test_isolated_node_empty(self):
        W = np.zeros((3, 1))
        W[0, 0] = 0.6
        model = SupervisedRbm(Rbm(W, np.zeros(3), np.zeros(1)),
                              np.array([0.3]), 0.0)
        joint = joint_label_pmf(model)
        cfg = SupervisedConfig(tau=1e-4)
        assert learn_supervised_nbhd(None, 2, cfg,
                                     exact_joint=(joint, 3)) == []

    def test_huge_tau_returns_empty(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        cfg = SupervisedConfig(tau=10.0)
        assert learn_supervised_nbhd(None, 0, cfg,
                                     exact_joint=(joint, 6)) == []

    def test_sampled_mode_matches_truth(self):
        model = supervised_cycle()
        truth = two_hop_neighbors(model)
        data = labeled_sample(model, 50000, seed=2)
        cfg = SupervisedConfig(tau=0.02, min_bin=25, seed=2)
        for u in range(6):
            assert learn_supervised_nbhd(data, u, cfg) == truth[u]

    def test_variance_stop_rule_runs(self):
        model = supervised_cycle()
        data = labeled_sample(model, 20000, seed=3)
        cfg = SupervisedConfig(tau=0.02, stop_rule="variance", seed=3)
        got, diag = learn_supervised_nbhd(data, 0, cfg,
                                          return_diagnostics=True)
        assert diag.stop_rule == "variance"
        assert set(got) <= set(range(1, 6))

    def test_cap_reported(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        cfg = SupervisedConfig(tau=1e-9, t_star=1)
        got, diag = learn_supervised_nbhd(None, 0, cfg,
                                          exact_joint=(joint, 6),
                                          return_diagnostics=True)
        assert diag.cap_hit


class TestConditionalMrfs:
    def test_label_independent_gives_equal_potentials(self):
        model = generate_model(GeneratorSpec(
            "chain", 4, weight_scale=0.4, seed=5,
            label_coupling={"scale": 0.0, "mode": "constant", "bias": 0.2}))
        data = labeled_sample(model, 100000, seed=5)
        truth = two_hop_neighbors(model)
        bounds = norm_bounds(model.base)
        f_plus, f_minus = fit_conditional_mrfs(data, truth, bounds)
        assert coefficient_l1_distance(f_plus, f_minus) <= 0.1

    def test_known_conditional_potentials_recovered(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        truth = two_hop_neighbors(model)
        data = labeled_sample(model, 200000, seed=6)
        bounds = {1: norm_bounds(model.conditional_rbm(1)),
                  -1: norm_bounds(model.conditional_rbm(-1))}
        f_plus, f_minus = fit_conditional_mrfs(data, truth, bounds)
        for y, got in ((1, f_plus), (-1, f_minus)):
            want = conditional_potential_exact(joint, 6, y)
            assert coefficient_l1_distance(want, got) <= 0.06

    def test_label_flip_swaps_outputs(self):
        model = supervised_cycle()
        data = labeled_sample(model, 30000, seed=7)
        flipped = SpinDataset(data.samples, -data.labels)
        truth = two_hop_neighbors(model)
        bounds = norm_bounds(model.base)
        fp, fm = fit_conditional_mrfs(data, truth, bounds)
        gp, gm = fit_conditional_mrfs(flipped, truth, bounds)
        assert coefficient_l1_distance(fp, gm) == 0.0
        assert coefficient_l1_distance(fm, gp) == 0.0

    def test_small_class_rejected(self):
        model = supervised_cycle()
        data = labeled_sample(model, 30, seed=8)
        with pytest.raises(ValidationError):
            split_by_label(data, min_class=1000)


class TestBiasFit:
    def test_balanced_symmetric_bias_near_zero(self):
        model = supervised_cycle(bias=0.0)
        joint = joint_label_pmf(model)
        f1 = conditional_potential_exact(joint, 6, 1)
        f2 = conditional_potential_exact(joint, 6, -1)
        pred = fit_bias_exact(joint, 6, f1, f2)
        assert abs(pred.bias) <= 1e-6

    def test_uninformative_potentials_match_label_mean(self):
        model = supervised_cycle()
        data = labeled_sample(model, 50000, seed=9)
        zero = conditional_potential_exact(joint_label_pmf(model), 6, 1)
        pred = fit_bias(data, zero, zero, mode="scalar")
        assert np.tanh(pred.bias) == pytest.approx(
            float(data.labels.mean()), abs=1e-9)

    def test_population_identity(self):
        model = supervised_cycle()
        joint = joint_label_pmf(model)
        f1 = conditional_potential_exact(joint, 6, 1)
        f2 = conditional_potential_exact(joint, 6, -1)
        pred = fit_bias_exact(joint, 6, f1, f2)
        mu_hat = predict_label(all_configs(6), pred)
        mu = bayes_label_mean(joint)
        assert np.abs(mu_hat - mu).max() <= 1e-9
        got = predictor_population_loss(pred, joint, 6)
        assert got == pytest.approx(bayes_label_loss(joint), abs=1e-9)

    def test_scalar_objective_convex(self):
        model = supervised_cycle()
        data = labeled_sample(model, 5000, seed=10)
        zero = conditional_potential_exact(joint_label_pmf(model), 6, 1)
        y = data.labels.astype(np.float64)

        def obj(b):
            return float(np.mean(np.logaddexp(0.0, -2.0 * b * y)))

        h = 1e-3
        for b in (-1.0, 0.0, 0.7):
            second = (obj(b + h) - 2 * obj(b) + obj(b - h)) / h ** 2
            assert second > 0

    def test_all_same_labels_constant_predictor(self):
        model = supervised_cycle()
        data = labeled_sample(model, 200, seed=11)
        forced = SpinDataset(data.samples, np.ones(200, dtype=np.int8))
        f1 = conditional_potential_exact(joint_label_pmf(model), 6, 1)
        pred = fit_bias(forced, f1, f1, mode="scalar")
        assert pred.meta["mode"] == "constant"
        assert pred.bias == pytest.approx(np.arctanh(1 - 1 / 200), abs=1e-12)
        v = predict_label(data.samples[:5], pred)
        assert np.allclose(v, v[0])

    def test_extended_mode(self):
        model = supervised_cycle()
        data = labeled_sample(model, 50000, seed=12)
        truth = two_hop_neighbors(model)
        bounds = norm_bounds(model.base)
        fp, fm = fit_conditional_mrfs(data, truth, bounds)
        scalar = fit_bias(data, fp, fm, mode="scalar")
        extended = fit_bias(data, fp, fm, mode="extended", budget=8.0)
        assert extended.extended_coeffs is not None
        assert extended.extended_coeffs.shape == (6,)
        joint = joint_label_pmf(model)
        ls = predictor_population_loss(scalar, joint, 6)
        le = predictor_population_loss(extended, joint, 6)
        assert le <= ls + 0.02


class TestPredict:
    def test_zero_predictor(self):
        from rbmnet.polynomial import SparsePolynomial
        pred = LabelPredictor(SparsePolynomial(3), SparsePolynomial(3), 0.0)
        assert predict_label(np.ones(3, dtype=np.int8), pred) == 0.0

    def test_monotone_in_bias(self):
        from rbmnet.polynomial import SparsePolynomial
        x = np.ones(3, dtype=np.int8)
        vals = [predict_label(x, LabelPredictor(SparsePolynomial(3),
                                                SparsePolynomial(3), b))
                for b in (-1.0, 0.0, 1.0)]
        assert vals == sorted(vals)

    def test_roundtrip_serialization(self, tmp_path):
        model = supervised_cycle()
        data = labeled_sample(model, 20000, seed=13)
        truth = two_hop_neighbors(model)
        fp, fm = fit_conditional_mrfs(data, truth, norm_bounds(model.base))
        pred = fit_bias(data, fp, fm, mode="extended", budget=5.0)
        path = tmp_path / "pred.json"
        pred.save(path)
        back = LabelPredictor.load(path)
        x = data.samples[:50]
        assert np.allclose(predict_label(x, back), predict_label(x, pred),
                           atol=1e-12)
        assert back.meta["mode"] == "extended"
