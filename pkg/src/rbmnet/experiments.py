"""Experiment drivers: generate models, run pipelines, emit reports.

A report is a JSON document whose ``metrics`` section is byte-reproducible
for a fixed (config, seed); wall-clock timings live in a separate section.
Every sampled metric carries a standard error; exact metrics are tagged
"exact".
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng, exact
from .dataset import SpinDataset, all_configs
from .distlearn import (ExactMoments, distribution_from_structure,
                        sample_mrf_glauber, skl_divergence, tv_distance_exact)
from .errors import ValidationError
from .generators import (GeneratorSpec, generate_model, true_ising_potential)
from .images import sample_grid, write_pgm
from .logistic import RegressionConfig
from .polynomial import coefficient_l1_distance
from .rbm import (PMF_CAP, exact_visible_pmf, gibbs_sample, load_model,
                  norm_bounds)
from .structure import StructureConfig, recover_structure
from .supervised import (LabelPredictor, SupervisedConfig, SupervisedRbm,
                         bayes_label_loss, fit_bias, fit_conditional_mrfs,
                         joint_label_pmf, learn_supervised_nbhd,
                         predict_label, predictor_population_loss,
                         two_hop_neighbors)

EXPERIMENT_KINDS = ("structure", "distribution", "supervised", "sample")


def metric(value, method, stderr=None):
    if method not in ("exact", "sampled"):
        raise ValidationError("metric method must be exact or sampled")
    doc = {"value": float(value), "method": method}
    if method == "sampled":
        doc["stderr"] = float(stderr if stderr is not None else 0.0)
    return doc


def _mean_metric(values):
    arr = np.asarray(values, dtype=np.float64)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return metric(arr.mean(), "sampled", se)


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    config: dict
    metrics: dict = field(default_factory=dict)
    trials: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_doc(self):
        return {
            "format_version": 1,
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "metrics": self.metrics,
            "trials": self.trials,
            "artifacts": self.artifacts,
            "timings": self.timings,
        }

    def metrics_bytes(self):
        """The reproducible part of the report, serialized canonically."""
        return json.dumps({"metrics": self.metrics, "trials": self.trials},
                          sort_keys=True).encode()

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_doc(), fh, sort_keys=True, indent=1)
            fh.write("\n")


def _resolve_model(config, seed):
    spec_doc = config.get("model")
    if spec_doc is None:
        raise ValidationError("config needs a 'model' section",
                              paths=["model"])
    if "path" in spec_doc:
        return load_model(spec_doc["path"]), None
    known = {f.name for f in GeneratorSpec.__dataclass_fields__.values()}
    unknown = [k for k in spec_doc if k not in known]
    if unknown:
        raise ValidationError(f"unknown model keys {unknown}",
                              paths=[f"model.{k}" for k in unknown])
    spec = GeneratorSpec(**{"seed": seed, **spec_doc})
    return generate_model(spec), spec


def _visible_pmf_if_enumerable(model):
    base = model.base if isinstance(model, SupervisedRbm) else model
    if base.n_visible + base.n_hidden <= PMF_CAP:
        if isinstance(model, SupervisedRbm):
            return joint_label_pmf(model)
        return exact_visible_pmf(model)
    return None


def _draw_dataset(model, pmf, m, seed, trial, sampler):
    """One trial's dataset: exact inversion sampling when the model is
    enumerable, block Gibbs otherwise (or when forced)."""
    labeled = isinstance(model, SupervisedRbm)
    kind = sampler.get("kind", "auto")
    if kind not in ("auto", "exact", "gibbs"):
        raise ValidationError("sampler.kind must be auto, exact or gibbs",
                              paths=["sampler.kind"])
    if kind in ("auto", "exact") and pmf is not None:
        if labeled:
            flat = np.concatenate([pmf[:, 1], pmf[:, 0]])
            return exact.sample_exact(flat, model.n_visible + 1, m, seed,
                                      labeled=True, stream=trial)
        return exact.sample_exact(pmf, model.n_visible, m, seed,
                                  stream=trial)
    if kind == "exact":
        raise ValidationError("exact sampler requested beyond enumeration cap",
                              paths=["sampler.kind"])
    target = model.joint_rbm() if labeled else model
    ds = gibbs_sample(target, sampler.get("burn_in", 2000), m,
                      sampler.get("thin", 4), seed, stream=trial)
    if labeled:
        return SpinDataset(ds.samples[:, :-1], ds.samples[:, -1])
    return ds


def _adjacency_scores(est, truth):
    tp = fp = fn = 0
    n = len(truth)
    for i in range(n):
        e = set(est.get(i, ()))
        t = set(truth[i])
        tp += len(e & t)
        fp += len(e - t)
        fn += len(t - e)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return precision, recall, fp == 0 and fn == 0


def _auto_eta(pmf, truth, n):
    """Half the minimum conditional mutual information over true edges."""
    vals = [exact.cond_mutual_information(pmf, n, i, j)
            for i in truth for j in truth[i] if i < j]
    if not vals:
        raise ValidationError("auto eta needs at least one true edge")
    return 0.5 * min(vals)


def _run_trials(trials, threads, fn):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


def _merge_defaults(config, **defaults):
    """Resolved config with defaults filled in (one level of nesting), so
    reports echo every value a run actually used."""
    out = dict(config)
    for key, val in defaults.items():
        if isinstance(val, dict):
            out[key] = {**val, **dict(config.get(key, {}))}
        else:
            out.setdefault(key, val)
    return out


def _structure_experiment(config, seed, out_dir, threads):
    config = _merge_defaults(
        config, m=50000, trials=1, eta="auto", delta=0.05, sampler={},
        regression={"D": 2, "R": 4.0, "max_iters": 600, "tol": 1e-3})
    if "dataset" in config:
        return _structure_from_file(config, seed, out_dir)
    model, _ = _resolve_model(config, seed)
    if isinstance(model, SupervisedRbm):
        raise ValidationError("structure experiment expects a plain RBM",
                              paths=["model"])
    truth = two_hop_neighbors(model)
    pmf = _visible_pmf_if_enumerable(model)
    m = int(config["m"])
    trials = int(config["trials"])
    reg_doc = config["regression"]
    eta = config["eta"]
    eta_method = "config"
    if eta == "auto":
        if pmf is None:
            raise ValidationError("eta=auto needs an enumerable model",
                                  paths=["eta"])
        eta = _auto_eta(pmf, truth, model.n_visible)
        eta_method = "exact"
    sampler = config["sampler"]

    def one(t):
        tseed = _rng.derive_seed(seed, _rng.TRIAL, t)
        data = _draw_dataset(model, pmf, m, seed, t, sampler)
        cfg = StructureConfig(
            eta=float(eta),
            regression=RegressionConfig(
                D=int(reg_doc["D"]), R=float(reg_doc["R"]),
                max_iters=int(reg_doc["max_iters"]),
                tol=float(reg_doc["tol"]), seed=tseed),
            delta=float(config["delta"]))
        nmap = recover_structure(data, cfg)
        precision, recall, exact_match = _adjacency_scores(
            nmap.adjacency(), truth)
        return {"trial": t, "precision": precision, "recall": recall,
                "exact": bool(exact_match),
                "samples_sufficient": bool(nmap.pairs[0].samples_sufficient
                                           if nmap.pairs else True)}, nmap

    results = _run_trials(trials, threads, one)
    rows = [r for r, _ in results]
    report = ExperimentReport("structure", seed, config)
    report.trials = rows
    report.metrics["eta"] = metric(eta, eta_method if eta_method == "exact"
                                   else "exact")
    report.metrics["exact_recovery_rate"] = _mean_metric(
        [float(r["exact"]) for r in rows])
    report.metrics["precision"] = _mean_metric([r["precision"] for r in rows])
    report.metrics["recall"] = _mean_metric([r["recall"] for r in rows])
    if out_dir:
        path_json = os.path.join(out_dir, "neighborhoods.json")
        path_csv = os.path.join(out_dir, "pair_diagnostics.csv")
        results[-1][1].save(path_json, path_csv)
        report.artifacts += [path_json, path_csv]
    return report


def _structure_from_file(config, seed, out_dir):
    """Structure recovery on a dataset file; eta must be supplied."""
    data = SpinDataset.load(config["dataset"])
    eta = config["eta"]
    if eta == "auto":
        raise ValidationError("eta=auto needs a known model; give a value",
                              paths=["eta"])
    reg_doc = config["regression"]
    cfg = StructureConfig(
        eta=float(eta),
        regression=RegressionConfig(
            D=int(reg_doc["D"]), R=float(reg_doc["R"]),
            max_iters=int(reg_doc["max_iters"]), tol=float(reg_doc["tol"]),
            seed=seed),
        delta=float(config["delta"]))
    nmap = recover_structure(data, cfg)
    report = ExperimentReport("structure", seed, config)
    sizes = [len(v) for v in nmap.neighbors.values()]
    report.metrics["eta"] = metric(float(eta), "exact")
    report.metrics["mean_neighborhood"] = metric(
        float(np.mean(sizes)), "sampled", float(np.std(sizes)))
    report.metrics["edges_declared"] = metric(
        float(sum(p.neighbor for p in nmap.pairs)), "sampled", 0.0)
    report.trials = [{"m": data.m, "n": data.n,
                      "borderline_pairs": int(sum(p.borderline
                                                  for p in nmap.pairs)),
                      "samples_sufficient": bool(
                          nmap.pairs[0].samples_sufficient
                          if nmap.pairs else True)}]
    if out_dir:
        path_json = os.path.join(out_dir, "neighborhoods.json")
        path_csv = os.path.join(out_dir, "pair_diagnostics.csv")
        nmap.save(path_json, path_csv)
        report.artifacts += [path_json, path_csv]
    return report


def _distribution_from_file(config, seed, out_dir):
    """Distribution recovery on a dataset file with given neighborhoods.

    The clip radius comes from the CLI-supplied ``clip_lambda1`` bound since
    the generator is unknown.
    """
    from .rbm import NormBounds
    from .structure import load_adjacency
    data = SpinDataset.load(config["dataset"])
    nb_path = config.get("neighborhoods")
    if not nb_path:
        raise ValidationError("dataset-mode distill needs 'neighborhoods' "
                              "(a structure run's JSON output)",
                              paths=["neighborhoods"])
    adjacency = load_adjacency(nb_path)
    lam1 = float(config.get("clip_lambda1", 2.0))
    est = distribution_from_structure(data, adjacency,
                                      NormBounds(lam1, 0.0))
    report = ExperimentReport("distribution", seed, config)
    report.metrics["potential_l1"] = metric(est.l1(), "sampled",
                                            float(1.0 / np.sqrt(data.m)))
    report.metrics["terms"] = metric(float(len(est.terms)), "exact")
    if out_dir:
        path = os.path.join(out_dir, "potential.json")
        est.save(path)
        report.artifacts.append(path)
        if data.n <= 16:
            from .distlearn import export_pmf_csv
            pmf_path = os.path.join(out_dir, "pmf.csv")
            export_pmf_csv(exact.pmf_from_potential(est, data.n), data.n,
                           pmf_path)
            report.artifacts.append(pmf_path)
    return report


def _distribution_experiment(config, seed, out_dir, threads):
    config = _merge_defaults(config, m=200000, trials=1, sampler={},
                             structure="true")
    if "dataset" in config:
        return _distribution_from_file(config, seed, out_dir)
    model, spec = _resolve_model(config, seed)
    if isinstance(model, SupervisedRbm):
        raise ValidationError("distribution experiment expects a plain RBM",
                              paths=["model"])
    truth_adj = two_hop_neighbors(model)
    pmf = _visible_pmf_if_enumerable(model)
    n = model.n_visible
    true_pot = None
    if spec is not None and spec.topology != "random-bipartite" \
            and not spec.dobrushin_scale:
        true_pot = true_ising_potential(spec)
    elif pmf is not None:
        true_pot = exact.potential_from_pmf(pmf, n)
    m = int(config["m"])
    trials = int(config["trials"])
    sampler = config["sampler"]
    bounds = norm_bounds(model)

    def one(t):
        data = _draw_dataset(model, pmf, m, seed, t, sampler)
        est = distribution_from_structure(data, truth_adj, bounds)
        row = {"trial": t}
        if true_pot is not None:
            row["coeff_l1_error"] = coefficient_l1_distance(true_pot, est)
        if pmf is not None and true_pot is not None:
            est_pmf = exact.pmf_from_potential(est, n)
            skl = skl_divergence(true_pot, est, ExactMoments(true_pot, est, n))
            tv = tv_distance_exact(pmf, est_pmf)
            # the divergences themselves are enumerated, not estimated
            row.update(skl=skl, tv=tv, divergence_method="exact",
                       pinsker_ok=bool(2.0 * tv * tv <= skl + 1e-9),
                       chain_ok=bool(skl <= row["coeff_l1_error"] + 1e-9))
        return row, est

    results = _run_trials(trials, threads, one)
    rows = [r for r, _ in results]
    report = ExperimentReport("distribution", seed, config)
    report.trials = rows
    if true_pot is not None:
        report.metrics["coeff_l1_error"] = _mean_metric(
            [r["coeff_l1_error"] for r in rows])
    if pmf is not None and true_pot is not None:
        if trials == 1:
            report.metrics["skl"] = metric(rows[0]["skl"], "exact")
            report.metrics["tv"] = metric(rows[0]["tv"], "exact")
        else:
            report.metrics["skl"] = _mean_metric([r["skl"] for r in rows])
            report.metrics["tv"] = _mean_metric([r["tv"] for r in rows])
        report.metrics["pinsker_ok_rate"] = _mean_metric(
            [float(r["pinsker_ok"]) for r in rows])
    if out_dir:
        path = os.path.join(out_dir, "potential.json")
        results[-1][1].save(path)
        report.artifacts.append(path)
    return report


def _supervised_experiment(config, seed, out_dir, threads):
    config = _merge_defaults(
        config, m=100000, trials=1, sampler={},
        supervised={"tau": None, "alpha": None, "lam": None,
                    "beta_bal": None, "t_star": None, "min_bin": 25,
                    "stop_rule": "tau", "bias_mode": "scalar",
                    "budget": 10.0})
    model, _ = _resolve_model(config, seed)
    if not isinstance(model, SupervisedRbm):
        raise ValidationError("supervised experiment needs label_coupling",
                              paths=["model.label_coupling"])
    joint = _visible_pmf_if_enumerable(model)
    if joint is None:
        raise ValidationError("supervised experiment requires an enumerable "
                              "model at desk scale", paths=["model"])
    n = model.n_visible
    truth = two_hop_neighbors(model)
    sup_doc = config["supervised"]
    m = int(config["m"])
    trials = int(config["trials"])
    sampler = config["sampler"]
    bayes = bayes_label_loss(joint)
    bounds = {1: norm_bounds(model.conditional_rbm(1)),
              -1: norm_bounds(model.conditional_rbm(-1))}

    def one(t):
        tseed = _rng.derive_seed(seed, _rng.TRIAL, t)
        data = _draw_dataset(model, joint, m, seed, t, sampler)
        cfg = SupervisedConfig(
            tau=sup_doc["tau"], alpha=sup_doc["alpha"], lam=sup_doc["lam"],
            beta_bal=sup_doc["beta_bal"], t_star=sup_doc["t_star"],
            min_bin=int(sup_doc["min_bin"]),
            stop_rule=sup_doc["stop_rule"], seed=tseed)
        nbhds = {u: learn_supervised_nbhd(data, u, cfg) for u in range(n)}
        f_plus, f_minus = fit_conditional_mrfs(
            data, nbhds, bounds, min_class=cfg.min_class)
        pred = fit_bias(data, f_plus, f_minus, mode=sup_doc["bias_mode"],
                        budget=float(sup_doc["budget"]), seed=tseed)
        pred.meta.update(m=m, trial=t)
        loss = predictor_population_loss(pred, joint, n)
        mu = predict_label(all_configs(n), pred)
        agree = np.where(mu >= 0, joint[:, 0], joint[:, 1]).sum()
        nb_ok = all(sorted(nbhds[u]) == truth[u] for u in range(n))
        return {"trial": t, "population_loss": loss, "bayes_loss": bayes,
                "excess_loss": loss - bayes, "accuracy": float(agree),
                "neighborhoods_exact": bool(nb_ok)}, pred

    results = _run_trials(trials, threads, one)
    rows = [r for r, _ in results]
    report = ExperimentReport("supervised", seed, config)
    report.trials = rows
    report.metrics["bayes_loss"] = metric(bayes, "exact")
    report.metrics["population_loss"] = _mean_metric(
        [r["population_loss"] for r in rows])
    report.metrics["excess_loss"] = _mean_metric(
        [r["excess_loss"] for r in rows])
    report.metrics["accuracy"] = _mean_metric([r["accuracy"] for r in rows])
    report.metrics["neighborhood_exact_rate"] = _mean_metric(
        [float(r["neighborhoods_exact"]) for r in rows])
    if out_dir:
        path = os.path.join(out_dir, "predictor.json")
        results[-1][1].save(path)
        report.artifacts.append(path)
    return report


def _sample_experiment(config, seed, out_dir, threads):
    if "predictor" in config:
        config = _merge_defaults(config, sweeps=6000, n_samples=25)
    else:
        config = _merge_defaults(config, n_samples=1000, burn_in=6000,
                                 thin=1, chains=1)
    report = ExperimentReport("sample", seed, config)
    if "predictor" in config:
        pred = LabelPredictor.load(config["predictor"])
        shape = config.get("image_shape")
        if shape is None:
            raise ValidationError("sampling a predictor needs image_shape",
                                  paths=["image_shape"])
        sweeps = int(config["sweeps"])
        count = int(config["n_samples"])
        for tag, pot in (("plus", pred.f_plus), ("minus", pred.f_minus)):
            probs = sample_mrf_glauber(pot, count, sweeps, seed, emit="probs")
            report.trials.append({"class": tag,
                                  "mean_intensity": float(probs.mean())})
            if out_dir:
                path = os.path.join(out_dir, f"samples_{tag}.pgm")
                write_pgm(path, sample_grid(probs, tuple(shape)))
                report.artifacts.append(path)
        return report
    model, _ = _resolve_model(config, seed)
    labeled = isinstance(model, SupervisedRbm)
    target = model.joint_rbm() if labeled else model
    m = int(config["n_samples"])
    ds = gibbs_sample(target, int(config["burn_in"]), m,
                      int(config["thin"]), seed,
                      n_chains=int(config["chains"]))
    if labeled:
        ds = SpinDataset(ds.samples[:, :-1], ds.samples[:, -1])
    means = ds.samples.mean(axis=0)
    report.metrics["mean_abs_spin"] = metric(
        float(np.abs(means).mean()), "sampled",
        float(1.0 / np.sqrt(max(m, 1))))
    if out_dir:
        path = os.path.join(out_dir, "dataset.txt")
        ds.save(path)
        report.artifacts.append(path)
    return report


_HANDLERS = {
    "structure": _structure_experiment,
    "distribution": _distribution_experiment,
    "supervised": _supervised_experiment,
    "sample": _sample_experiment,
}


def run_experiment(kind, config, out_dir=None, threads=None):
    """Run one experiment kind from a config document; returns the report."""
    if kind not in _HANDLERS:
        raise ValidationError(f"unknown experiment kind {kind!r}",
                              paths=["kind"])
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    seed = int(config.get("seed", 0))
    if threads is None:
        threads = int(config.get(
            "threads", os.environ.get("RBMNET_THREADS", "1")))
    start = time.perf_counter()
    report = _HANDLERS[kind](config, seed, out_dir, max(1, threads))
    report.timings["total_seconds"] = time.perf_counter() - start
    report.config = {"seed": seed, "threads": threads, **report.config}
    return report


# ---------------------------------------------------------------------------
# supervised train / eval entry points (CLI subcommands)

def constant_baseline_bias(labels):
    """Optimal constant decision value for a label sample, clipped."""
    y = np.asarray(labels, dtype=np.float64)
    mean = float(y.mean())
    cap = 1.0 - 1.0 / max(len(y), 2)
    return float(np.arctanh(np.clip(mean, -cap, cap)))


def train_supervised(config, out_dir=None):
    """Fit neighborhoods, per-label MRFs and the bias on a labeled dataset."""
    path = config.get("dataset")
    if not path:
        raise ValidationError("train-supervised needs dataset",
                              paths=["dataset"])
    data = SpinDataset.load(path)
    if data.labels is None:
        raise ValidationError("dataset has no label column",
                              paths=["dataset"])
    seed = int(config.get("seed", 0))
    sup_doc = config.get("supervised", {})
    cfg = SupervisedConfig(
        tau=sup_doc.get("tau", 0.02),
        t_star=sup_doc.get("t_star"),
        min_bin=int(sup_doc.get("min_bin", 25)),
        stop_rule=sup_doc.get("stop_rule", "tau"),
        min_class=int(sup_doc.get("min_class", 25)),
        seed=seed)
    lam1 = float(config.get("clip_lambda1", 2.0))
    from .rbm import NormBounds
    bounds = NormBounds(lam1, 0.0)
    n = data.n
    nbhds = {u: learn_supervised_nbhd(data, u, cfg) for u in range(n)}
    f_plus, f_minus = fit_conditional_mrfs(data, nbhds, bounds,
                                           min_class=cfg.min_class)
    pred = fit_bias(data, f_plus, f_minus,
                    mode=config.get("bias_mode", "scalar"),
                    budget=float(config.get("budget", 10.0)), seed=seed)
    pred.meta.update(m=data.m, seed=seed, tau=cfg.tau,
                     clip_lambda1=lam1, bias_mode=config.get(
                         "bias_mode", "scalar"))
    mu = predict_label(data.samples, pred)
    y = data.labels.astype(np.float64)
    train_loss = float(np.mean(np.logaddexp(0.0, -2.0 * np.arctanh(
        np.clip(mu, -1 + 1e-15, 1 - 1e-15)) * y)))
    train_acc = float(np.mean(np.sign(mu + 1e-300) == y))
    report = ExperimentReport("train-supervised", seed, config)
    report.metrics["train_loss"] = metric(
        train_loss, "sampled", float(1.0 / np.sqrt(data.m)))
    report.metrics["train_accuracy"] = metric(
        train_acc, "sampled", float(0.5 / np.sqrt(data.m)))
    report.metrics["mean_neighborhood"] = metric(
        float(np.mean([len(v) for v in nbhds.values()])), "sampled", 0.0)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        ppath = os.path.join(out_dir, "predictor.json")
        pred.save(ppath)
        report.artifacts.append(ppath)
    return report, pred


def eval_supervised(config, out_dir=None):
    """Evaluate a saved predictor against a labeled dataset and the
    constant-majority baseline."""
    dpath = config.get("dataset")
    ppath = config.get("predictor")
    if not dpath or not ppath:
        raise ValidationError("eval-supervised needs dataset and predictor",
                              paths=["dataset", "predictor"])
    data = SpinDataset.load(dpath)
    if data.labels is None:
        raise ValidationError("dataset has no label column", paths=["dataset"])
    pred = LabelPredictor.load(ppath)
    y = data.labels.astype(np.float64)
    v = pred.decision_value(data.samples)
    loss = float(np.mean(np.logaddexp(0.0, -2.0 * v * y)))
    acc = float(np.mean(np.sign(np.tanh(v) + 1e-300) == y))
    b0 = float(config.get("baseline_bias", constant_baseline_bias(y)))
    base_loss = float(np.mean(np.logaddexp(0.0, -2.0 * b0 * y)))
    report = ExperimentReport("eval-supervised", int(config.get("seed", 0)),
                              config)
    se = float(1.0 / np.sqrt(data.m))
    report.metrics["loss"] = metric(loss, "sampled", se)
    report.metrics["accuracy"] = metric(acc, "sampled", 0.5 * se)
    report.metrics["baseline_loss"] = metric(base_loss, "sampled", se)
    report.metrics["beats_baseline"] = metric(
        float(loss < base_loss), "sampled", 0.0)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    return report
