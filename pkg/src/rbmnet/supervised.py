"""Supervised RBMs: a label spin coupled to the hidden layer.

Conditioning on the label leaves a ferromagnetic RBM over the inputs, so
two-hop neighborhoods are found by greedily maximizing the label-averaged
conditional covariance, the per-label distributions are fitted as sparse
MRFs, and Bayes' rule turns the two potentials into the label predictor
tanh((f_plus(x) - f_minus(x))/2 + b) with a one-dimensional fit for b.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import exact
from .dataset import all_configs, pack_columns
from .distlearn import MrfPotential, distribution_from_structure
from .errors import ValidationError
from .polynomial import SparsePolynomial
from .rbm import Rbm


@dataclass(frozen=True)
class SupervisedRbm:
    """An RBM plus a label spin coupled to every hidden unit."""

    base: Rbm
    w_label: np.ndarray
    b_label: float

    def __post_init__(self):
        w = np.asarray(self.w_label, dtype=np.float64)
        if w.shape != (self.base.n_hidden,):
            raise ValidationError("w_label must have one entry per hidden unit")
        if not (np.isfinite(w).all() and np.isfinite(self.b_label)):
            raise ValidationError("label parameters must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "w_label", w)
        object.__setattr__(self, "b_label", float(self.b_label))

    @property
    def n_visible(self):
        return self.base.n_visible

    @property
    def n_hidden(self):
        return self.base.n_hidden

    def joint_rbm(self):
        """Equivalent RBM in which the label is visible unit n_visible."""
        W = np.vstack([self.base.W, self.w_label])
        b_vis = np.append(self.base.b_vis, self.b_label)
        return Rbm(W, b_vis, self.base.b_hid)

    def conditional_rbm(self, y):
        """The input model given Y = y: hidden biases shift by y * w_label."""
        if y not in (-1, 1):
            raise ValidationError("label must be +-1")
        return Rbm(self.base.W, self.base.b_vis,
                   self.base.b_hid + y * self.w_label)


def tau_threshold(alpha, lam, beta_bal):
    """Greedy covariance threshold beta * alpha^2 * exp(-12 lam) / 2."""
    return 0.5 * beta_bal * alpha * alpha * np.exp(-12.0 * lam)


@dataclass(frozen=True)
class SupervisedConfig:
    """Thresholds and caps for the supervised pipeline.

    ``tau`` may be None, in which case it is derived from (alpha, lam,
    beta_bal) by the covariance threshold formula.  ``stop_rule`` selects
    the tau threshold or the alternative 1%-variance-shrink stopping.
    """

    tau: float | None = None
    alpha: float | None = None
    lam: float | None = None
    beta_bal: float | None = None
    bias_bound: float = 10.0
    t_star: int | None = None
    min_bin: int = 25
    stop_rule: str = "tau"
    variance_shrink: float = 0.01
    min_class: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.tau is None:
            if None in (self.alpha, self.lam, self.beta_bal):
                raise ValidationError(
                    "either tau or (alpha, lam, beta_bal) must be given")
            object.__setattr__(
                self, "tau",
                float(tau_threshold(self.alpha, self.lam, self.beta_bal)))
        if self.tau <= 0:
            raise ValidationError("tau must be positive")
        if self.stop_rule not in ("tau", "variance"):
            raise ValidationError("stop_rule must be 'tau' or 'variance'")
        if self.min_bin < 1 or self.min_class < 1:
            raise ValidationError("min_bin and min_class must be positive")

    def additions_cap(self, n):
        if self.t_star is not None:
            cap = self.t_star
        else:
            cap = int(min(8.0 / (self.tau * self.tau), 30))
        return min(max(cap, 1), n - 1)


class _SampleBins:
    """Empirical (x_S, y) bin statistics; bins below min_bin contribute 0."""

    def __init__(self, data, min_bin):
        if data.labels is None:
            raise ValidationError("supervised estimators need labels")
        if data.m == 0:
            raise ValidationError("no labeled samples")
        self.x = data.samples
        self.y01 = (data.labels < 0).astype(np.int64)
        self.m = data.m
        self.min_bin = min_bin
        self.small_bins = 0

    def _keys(self, cols):
        key = pack_columns(self.x, cols) * 2 + self.y01
        return key, 2 << len(cols)

    def avg_cov(self, u, v, cols):
        key, size = self._keys(cols)
        xu = self.x[:, u].astype(np.float64)
        xv = self.x[:, v].astype(np.float64)
        cnt = np.bincount(key, minlength=size).astype(np.float64)
        su = np.bincount(key, weights=xu, minlength=size)
        sv = np.bincount(key, weights=xv, minlength=size)
        suv = np.bincount(key, weights=xu * xv, minlength=size)
        keep = cnt >= self.min_bin
        self.small_bins += int(((cnt > 0) & ~keep).sum())
        cnt_k = np.where(keep, cnt, 1.0)
        cov = suv / cnt_k - (su / cnt_k) * (sv / cnt_k)
        return float(((cnt / self.m) * cov)[keep].sum())

    def avg_var(self, u, cols):
        key, size = self._keys(cols)
        xu = self.x[:, u].astype(np.float64)
        cnt = np.bincount(key, minlength=size).astype(np.float64)
        su = np.bincount(key, weights=xu, minlength=size)
        keep = cnt >= self.min_bin
        cnt_k = np.where(keep, cnt, 1.0)
        var = 1.0 - (su / cnt_k) ** 2
        return float(((cnt / self.m) * var)[keep].sum())


class _ExactBins:
    """Exact (x_S, y) bin statistics from an enumerated joint pmf."""

    def __init__(self, joint, n):
        self.jp = np.asarray(joint, dtype=np.float64)   # (2^n, 2)
        if self.jp.shape != (1 << n, 2):
            raise ValidationError("joint table must be (2^n, 2)")
        self.n = n
        self.configs = all_configs(n)
        self.small_bins = 0

    def _stats(self, cols, vals):
        key = pack_columns(self.configs, cols)
        size = 1 << len(cols)
        out = np.empty((2, size, len(vals) + 1))
        for yi in range(2):
            w = self.jp[:, yi]
            out[yi, :, 0] = np.bincount(key, weights=w, minlength=size)
            for t, val in enumerate(vals):
                out[yi, :, t + 1] = np.bincount(key, weights=w * val,
                                                minlength=size)
        return out

    def avg_cov(self, u, v, cols):
        xu = self.configs[:, u].astype(np.float64)
        xv = self.configs[:, v].astype(np.float64)
        st = self._stats(cols, [xu, xv, xu * xv])
        p = st[:, :, 0]
        keep = p > 0
        pk = np.where(keep, p, 1.0)
        cov = st[:, :, 3] / pk - (st[:, :, 1] / pk) * (st[:, :, 2] / pk)
        return float((p * cov)[keep].sum())

    def avg_var(self, u, cols):
        xu = self.configs[:, u].astype(np.float64)
        st = self._stats(cols, [xu])
        p = st[:, :, 0]
        keep = p > 0
        pk = np.where(keep, p, 1.0)
        var = 1.0 - (st[:, :, 1] / pk) ** 2
        return float((p * var)[keep].sum())


def avg_conditional_covariance(data, u, v, s, min_bin=25):
    """Label-averaged conditional covariance of (X_u, X_v) given X_S.

    Sums empirical-frequency-weighted within-bin covariances over observed
    (x_S, y) bins; bins with fewer than ``min_bin`` samples contribute 0.
    """
    s = sorted(set(s))
    if u == v or u in s or v in s:
        raise ValidationError("u, v must be distinct and outside S")
    return _SampleBins(data, min_bin).avg_cov(u, v, s)


def avg_conditional_covariance_exact(joint, n, u, v, s):
    """Exact label-averaged conditional covariance from a joint pmf table."""
    s = sorted(set(s))
    if u == v or u in s or v in s:
        raise ValidationError("u, v must be distinct and outside S")
    return _ExactBins(joint, n).avg_cov(u, v, s)


@dataclass
class NbhdDiagnostics:
    u: int
    added: list = field(default_factory=list)
    pruned: list = field(default_factory=list)
    cap_hit: bool = False
    small_bins: int = 0
    stop_rule: str = "tau"


def learn_supervised_nbhd(data, u, cfg, exact_joint=None,
                          return_diagnostics=False):
    """Greedy conditional-covariance neighborhood of node u, then pruning.

    ``exact_joint`` may carry (joint_pmf, n) to run in exact-covariance mode
    (used for population-level verification); otherwise covariances are
    empirical with the min_bin floor.
    """
    if exact_joint is not None:
        bins = _ExactBins(*exact_joint)
        n = exact_joint[1]
    else:
        bins = _SampleBins(data, cfg.min_bin)
        n = data.n
    if not 0 <= u < n:
        raise IndexError("node out of range")
    diag = NbhdDiagnostics(u, stop_rule=cfg.stop_rule)
    cap = cfg.additions_cap(n)
    s = []
    var_cur = bins.avg_var(u, s) if cfg.stop_rule == "variance" else None
    while True:
        if len(s) >= cap:
            diag.cap_hit = len(s) < n - 1
            break
        cand = [v for v in range(n) if v != u and v not in s]
        if not cand:
            break
        scores = [bins.avg_cov(u, v, s) for v in cand]
        best = int(np.argmax(scores))   # ties: lowest index, argmax is first
        if cfg.stop_rule == "variance":
            var_new = bins.avg_var(u, sorted(s + [cand[best]]))
            if var_cur - var_new < cfg.variance_shrink * max(var_cur, 1e-12):
                break
            var_cur = var_new
        elif scores[best] < cfg.tau:
            break
        s.append(cand[best])
        s.sort()
        diag.added.append(cand[best])
    for v in sorted(s):
        rest = [k for k in s if k != v]
        if bins.avg_cov(u, v, rest) < cfg.tau:
            s.remove(v)
            diag.pruned.append(v)
    diag.small_bins = getattr(bins, "small_bins", 0)
    result = sorted(s)
    return (result, diag) if return_diagnostics else result


def split_by_label(data, min_class=1):
    if data.labels is None:
        raise ValidationError("dataset has no labels")
    pos = data.subset(np.flatnonzero(data.labels > 0))
    neg = data.subset(np.flatnonzero(data.labels < 0))
    if pos.m < min_class or neg.m < min_class:
        raise ValidationError(
            f"label class below minimum count {min_class} "
            f"(got {pos.m} positive / {neg.m} negative)")
    return pos, neg


def fit_conditional_mrfs(data, nbhds, bounds, min_class=25):
    """Per-label sparse-MRF fits of X | Y = y.

    ``bounds`` is a NormBounds shared by both labels or a {+1, -1} dict.
    Returns (f_plus, f_minus).
    """
    pos, neg = split_by_label(data, min_class)
    if isinstance(bounds, dict):
        b_pos, b_neg = bounds[1], bounds[-1]
    else:
        b_pos = b_neg = bounds
    f_plus = distribution_from_structure(pos, nbhds, b_pos)
    f_minus = distribution_from_structure(neg, nbhds, b_neg)
    return f_plus, f_minus


@dataclass
class LabelPredictor:
    """tanh((f_plus - f_minus)/2 + bias), optionally with per-node rescaling."""

    f_plus: MrfPotential
    f_minus: MrfPotential
    bias: float
    extended_coeffs: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def _diff_poly(self):
        keys = set(self.f_plus.terms) | set(self.f_minus.terms)
        return SparsePolynomial(
            self.f_plus.n,
            {s: 0.5 * (self.f_plus.coefficient(s) - self.f_minus.coefficient(s))
             for s in keys})

    def node_features(self, x):
        """Per-node sums z_i(x) = sum_{S containing i} (f+_S - f-_S)/2 x_S."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = self.f_plus.n
        z = np.zeros((x.shape[0], n))
        diff = self._diff_poly()
        for s, c in diff.terms.items():
            if not s or c == 0.0:
                continue
            term = c * x[:, s].prod(axis=1)
            for i in s:
                z[:, i] += term
        return z

    def decision_value(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xm = np.atleast_2d(x)
        if self.extended_coeffs is not None:
            h = self.node_features(xm) @ self.extended_coeffs + self.bias
        else:
            h = self._diff_poly().evaluate(xm) + self.bias
        return float(h[0]) if single else h

    def save(self, path):
        doc = {
            "format_version": 1,
            "kind": "label_predictor",
            "f_plus": self.f_plus.to_doc(),
            "f_minus": self.f_minus.to_doc(),
            "bias": self.bias,
            "extended_coeffs": (None if self.extended_coeffs is None
                                else list(map(float, self.extended_coeffs))),
            "meta": self.meta,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path):
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("kind") != "label_predictor":
            raise ValidationError(f"{path}: not a label predictor")
        ext = doc.get("extended_coeffs")
        return LabelPredictor(
            SparsePolynomial.from_doc(doc["f_plus"]),
            SparsePolynomial.from_doc(doc["f_minus"]),
            float(doc["bias"]),
            None if ext is None else np.asarray(ext, dtype=np.float64),
            doc.get("meta", {}))


def predict_label(x, pred):
    """E-hat[Y | X = x] = tanh of the predictor's decision value."""
    h = pred.decision_value(x)
    return np.tanh(h)


def _scalar_bias_fit(scores, wpos, wneg, grad_tol=1e-10):
    """1-d convex logistic fit of the bias; Newton with bisection safeguard."""

    def grad(b):
        return float(-2.0 * np.dot(wpos, expit(-2.0 * (scores + b)))
                     + 2.0 * np.dot(wneg, expit(2.0 * (scores + b))))

    def curv(b):
        return float(np.dot(wpos + wneg,
                            2.0 / (1.0 + np.cosh(2.0 * (scores + b)))))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if grad(lo) < 0:
            break
        lo *= 2.0
    for _ in range(200):
        if grad(hi) > 0:
            break
        hi *= 2.0
    b = 0.5 * (lo + hi)
    for _ in range(200):
        g = grad(b)
        if abs(g) <= grad_tol:
            return b
        if g > 0:
            hi = b
        else:
            lo = b
        c = curv(b)
        step = b - g / c if c > 0 else None
        b = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
    return b


def fit_bias(data, f_plus, f_minus, mode="scalar", budget=10.0,
             max_iters=600, tol=1e-4, seed=0):
    """Fit the Bayes-rule predictor's free constants on labeled data.

    scalar mode fits only b in tanh((f+ - f-)/2 + b); extended mode also
    fits one multiplier per node on the per-node potential sums (useful when
    per-coordinate influence needs more dynamic range).
    """
    if data.labels is None:
        raise ValidationError("fit_bias needs labels")
    pred = LabelPredictor(f_plus, f_minus, 0.0)
    y = data.labels.astype(np.float64)
    m = data.m
    if np.all(y == y[0]):
        b = float(np.sign(y[0]) * np.arctanh(1.0 - 1.0 / max(m, 2)))
        return LabelPredictor(MrfPotential(f_plus.n), MrfPotential(f_minus.n),
                              b, None, {"mode": "constant", "m": m})
    wpos = (y > 0).astype(np.float64) / m
    wneg = (y < 0).astype(np.float64) / m
    x = data.samples.astype(np.float64)
    if mode == "scalar":
        scores = pred._diff_poly().evaluate(x)
        b = _scalar_bias_fit(scores, wpos, wneg)
        return LabelPredictor(f_plus, f_minus, b, None,
                              {"mode": "scalar", "m": m, "seed": seed})
    if mode != "extended":
        raise ValidationError("mode must be 'scalar' or 'extended'")
    z = pred.node_features(x)
    scale = float(np.abs(z).max())
    scale = scale if scale > 0 else 1.0
    from .logistic import RegressionConfig, _fit_weighted
    F = np.concatenate([np.ones((m, 1)), z / scale], axis=1)
    cfg = RegressionConfig(D=1, R=budget, max_iters=max_iters, tol=tol,
                           seed=seed)
    w, _, _, _ = _fit_weighted(F, wpos, wneg, cfg)
    return LabelPredictor(f_plus, f_minus, float(w[0]), w[1:] / scale,
                          {"mode": "extended", "m": m, "seed": seed,
                           "budget": budget})


def fit_bias_exact(joint, n, f_plus, f_minus):
    """Population bias fit against an enumerated joint pmf table."""
    jp = np.asarray(joint, dtype=np.float64)
    pred = LabelPredictor(f_plus, f_minus, 0.0)
    scores = pred._diff_poly().evaluate(all_configs(n).astype(np.float64))
    b = _scalar_bias_fit(scores, jp[:, 0], jp[:, 1])
    return LabelPredictor(f_plus, f_minus, b, None, {"mode": "scalar-exact"})


# ---------------------------------------------------------------------------
# exact references for enumerable supervised models

def joint_label_pmf(model):
    """Joint pmf over (X, Y) as a (2^n_visible, 2) table; [:, 0] is Y=+1."""
    from .rbm import exact_visible_pmf
    p = exact_visible_pmf(model.joint_rbm())
    half = p.size // 2
    return np.stack([p[half:], p[:half]], axis=1)


def label_balance(joint):
    jp = np.asarray(joint)
    return float(min(jp[:, 0].sum(), jp[:, 1].sum()))


def bayes_label_mean(joint):
    """E[Y | X = x] for every x, from the joint table."""
    jp = np.asarray(joint, dtype=np.float64)
    tot = jp.sum(axis=1)
    out = np.zeros(jp.shape[0])
    np.divide(jp[:, 0] - jp[:, 1], tot, out=out, where=tot > 0)
    return out


def bayes_label_loss(joint):
    """Population logistic loss of the Bayes-optimal label predictor."""
    jp = np.asarray(joint, dtype=np.float64)
    mu = np.clip(bayes_label_mean(joint), -1 + 1e-15, 1 - 1e-15)
    v = np.arctanh(mu)
    return float(jp[:, 0] @ np.logaddexp(0.0, -2.0 * v)
                 + jp[:, 1] @ np.logaddexp(0.0, 2.0 * v))


def predictor_population_loss(pred, joint, n):
    """Population logistic loss of a fitted predictor on an enumerated model."""
    jp = np.asarray(joint, dtype=np.float64)
    v = pred.decision_value(all_configs(n).astype(np.float64))
    return float(jp[:, 0] @ np.logaddexp(0.0, -2.0 * v)
                 + jp[:, 1] @ np.logaddexp(0.0, 2.0 * v))


def conditional_potential_exact(joint, n, y):
    """Exact MRF potential of X | Y = y from the joint table."""
    jp = np.asarray(joint, dtype=np.float64)
    col = 0 if y > 0 else 1
    p = jp[:, col] / jp[:, col].sum()
    return exact.potential_from_pmf(p, n)


def two_hop_neighbors(model):
    """Ground-truth two-hop sets through the hidden layer (nonzero couplings)."""
    W = model.base.W if isinstance(model, SupervisedRbm) else model.W
    nz = W != 0.0
    share = nz @ nz.T
    return {i: sorted(int(k) for k in np.flatnonzero(share[i]) if k != i)
            for i in range(W.shape[0])}
