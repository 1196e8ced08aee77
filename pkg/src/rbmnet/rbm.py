"""RBM semantics: conditional means, brute-force oracles, Gibbs sampling.

The central fact used everywhere is that the conditional mean of a visible
spin given the others is a two-layer network with activations
``f_beta(x) = atanh(beta * tanh(x)) / beta`` indexed by ``beta = |tanh(W_ij)|``:

    E[X_i | rest] = tanh(b_i + sum_j tanh(W_ij) * f_beta_ij(c_j + sum_k W_kj x_k))

``conditional_mean`` evaluates that network; ``conditional_mean_oracle``
computes the same quantity by direct enumeration of the hidden layer and is
kept deliberately independent of the network route.
"""

from dataclasses import dataclass

import json
import numpy as np

from . import _kernels, _rng
from .dataset import SpinDataset, all_configs
from .errors import EnumerationCapError, ValidationError

PMF_CAP = 24        # n_visible + n_hidden for exact_visible_pmf
ORACLE_CAP = 20     # n_hidden for conditional_mean_oracle
SMALL_BETA = 1e-8   # below this, f_beta is evaluated as its tanh limit


@dataclass(frozen=True)
class Rbm:
    """Coupling matrix W (n_visible x n_hidden) plus visible/hidden biases."""

    W: np.ndarray
    b_vis: np.ndarray
    b_hid: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=np.float64))
        b_vis = np.asarray(self.b_vis, dtype=np.float64)
        b_hid = np.asarray(self.b_hid, dtype=np.float64)
        if W.shape != (b_vis.size, b_hid.size):
            raise ValidationError("W must be n_visible x n_hidden")
        if b_vis.size < 1:
            raise ValidationError("need at least one visible unit")
        for a in (W, b_vis, b_hid):
            if not np.isfinite(a).all():
                raise ValidationError("model parameters must be finite")
            a.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b_vis", b_vis)
        object.__setattr__(self, "b_hid", b_hid)

    @property
    def n_visible(self):
        return self.b_vis.size

    @property
    def n_hidden(self):
        return self.b_hid.size


@dataclass(frozen=True)
class NormBounds:
    """lambda1 bounds sum_j |tanh(W_ij)| + |b_i| per visible unit; lambda2
    bounds the l1 norm of each column of W."""

    lambda1: float
    lambda2: float


def f_beta(beta, x):
    """Evaluate atanh(beta*tanh(x))/beta, the tanh-to-identity interpolation.

    beta may be a scalar or an array broadcastable against x; beta=1 is the
    identity and small beta falls back to the tanh limit.
    """
    beta = np.asarray(beta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(beta < 0) or np.any(beta > 1):
        raise ValidationError("beta must lie in [0, 1]")
    beta, x = np.broadcast_arrays(beta, x)
    out = np.empty(x.shape)
    tiny = beta < SMALL_BETA
    one = beta == 1.0
    mid = ~(tiny | one)
    out[tiny] = np.tanh(x[tiny])
    out[one] = x[one]
    out[mid] = np.arctanh(beta[mid] * np.tanh(x[mid])) / beta[mid]
    return out if out.shape else float(out)


def _hidden_field_without(model, i, x_rest):
    """b_hid + sum over visible units except i, for a batch of x_rest rows."""
    x_rest = np.asarray(x_rest, dtype=np.float64)
    w_rest = np.delete(model.W, i, axis=0)
    return model.b_hid + x_rest @ w_rest


def conditional_mean(model, i, x_rest):
    """E[X_i | other visibles] through the two-layer f_beta network.

    ``x_rest`` lists the other visible spins in index order with i removed.
    """
    if not 0 <= i < model.n_visible:
        raise IndexError(f"visible index {i} out of range")
    x_rest = np.asarray(x_rest, dtype=np.float64)
    single = x_rest.ndim == 1
    x_rest = np.atleast_2d(x_rest)
    if x_rest.shape[1] != model.n_visible - 1:
        raise ValidationError("x_rest must have length n_visible - 1")
    z = _hidden_field_without(model, i, x_rest)
    t = np.tanh(model.W[i])
    vals = np.tanh(model.b_vis[i] + (t * f_beta(np.abs(t), z)).sum(axis=1))
    return float(vals[0]) if single else vals


def conditional_mean_oracle(model, i, x_rest):
    """E[X_i | rest] by direct enumeration of X_i and the hidden layer."""
    if not 0 <= i < model.n_visible:
        raise IndexError(f"visible index {i} out of range")
    if model.n_hidden > ORACLE_CAP:
        raise EnumerationCapError(
            f"oracle caps at {ORACLE_CAP} hidden units, got {model.n_hidden}")
    x_rest = np.asarray(x_rest, dtype=np.float64)
    h = all_configs(model.n_hidden).astype(np.float64)       # (2^nh, nh)
    field = _hidden_field_without(model, i, x_rest[None, :])[0]
    # potential for (x_i, h): x_i*(b_i + W_i.h) + field.h
    base = h @ field
    coup = model.b_vis[i] + h @ model.W[i]
    energies = np.stack([base + coup, base - coup])          # x_i = +1, -1
    energies -= energies.max()
    weights = np.exp(energies)
    num = weights[0].sum() - weights[1].sum()
    den = weights.sum()
    return float(num / den)


def norm_bounds(model):
    """The (lambda1, lambda2) complexity pair of the model."""
    lam1 = float((np.abs(np.tanh(model.W)).sum(axis=1)
                  + np.abs(model.b_vis)).max())
    lam2 = float(np.abs(model.W).sum(axis=0).max()) if model.n_hidden else 0.0
    return NormBounds(lam1, lam2)


def min_marginal_bound(bounds, d):
    """Lower bound (1 - tanh(lambda1))^d on 2^d times any d-spin marginal."""
    if d < 0:
        raise ValidationError("d must be nonnegative")
    return float((1.0 - np.tanh(bounds.lambda1)) ** d)


def exact_visible_pmf(model):
    """Brute-force visible marginal, indexed like ``all_configs(n_visible)``.

    Enumerates all (x, h) pairs; log-domain accumulation with running max
    subtraction.  Requires n_visible + n_hidden <= PMF_CAP.
    """
    if model.n_visible + model.n_hidden > PMF_CAP:
        raise EnumerationCapError(
            f"exact pmf caps at {PMF_CAP} total units, got "
            f"{model.n_visible + model.n_hidden}")
    v = all_configs(model.n_visible).astype(np.float64)
    h = all_configs(model.n_hidden).astype(np.float64)
    hb = h @ model.b_hid
    logw = np.empty(v.shape[0])
    block = max(1, (1 << 22) // max(1, h.shape[0]))
    for lo in range(0, v.shape[0], block):
        vb = v[lo:lo + block]
        e = (vb @ model.W) @ h.T + (vb @ model.b_vis)[:, None] + hb[None, :]
        mx = e.max(axis=1, keepdims=True)
        logw[lo:lo + block] = mx[:, 0] + np.log(np.exp(e - mx).sum(axis=1))
    logw -= logw.max()
    p = np.exp(logw)
    return p / p.sum()


def gibbs_sample(model, burn_in, n_samples, thin, seed, n_chains=1, stream=0):
    """Block Gibbs samples of the visible layer as a SpinDataset.

    Chains are initialized with i.i.d. fair spins and use independent
    counter-based substreams keyed by (seed, chain), so results are
    reproducible regardless of how chains are scheduled.  ``stream`` offsets
    the chain indices so several sampling jobs can share one seed.
    """
    if burn_in < 0 or n_samples < 0 or n_chains < 1:
        raise ValidationError("counts must be nonnegative, n_chains >= 1")
    thin = max(1, thin)
    nv, nh = model.n_visible, model.n_hidden
    per = [n_samples // n_chains + (1 if c < n_samples % n_chains else 0)
           for c in range(n_chains)]
    parts = []
    for chain, cnt in enumerate(per):
        rng = _rng.substream(seed, _rng.GIBBS, (stream << 16) + chain)
        x0 = rng.choice(np.array([-1, 1], dtype=np.int8), size=nv)
        total = burn_in + cnt * thin
        uniforms = rng.random((total, nh + nv))
        parts.append(_kernels.gibbs_chain(
            model.W, model.b_vis, model.b_hid, x0, uniforms,
            burn_in, cnt, thin))
    samples = np.concatenate(parts) if parts else np.zeros((0, nv), np.int8)
    return SpinDataset(samples)


def rbm_from_tanh_network(u0, u, hidden_biases, M, K=64):
    """Embed a two-layer tanh network as the conditional mean of an RBM.

    The network tanh(u0 + sum_j u_j tanh(M_j0 + M_j . x)) becomes the
    conditional mean of visible unit 0 in an RBM with K replicas of each
    hidden unit, each coupled to unit 0 with weight u_j / K.  Returns
    (model, target_index, sup_dev) where sup_dev is the measured sup norm
    deviation from the network over a grid of input corners.
    """
    if K < 1:
        raise ValidationError("K must be >= 1")
    u = np.asarray(u, dtype=np.float64)
    hidden_biases = np.asarray(hidden_biases, dtype=np.float64)
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    T = u.size
    if M.shape[0] != T or hidden_biases.size != T:
        raise ValidationError("u, hidden_biases and M rows must align")
    n = M.shape[1]
    W = np.zeros((n + 1, K * T))
    W[0] = np.repeat(u / K, K)
    W[1:] = np.repeat(M.T, K, axis=1)
    b_vis = np.zeros(n + 1)
    b_vis[0] = u0
    b_hid = np.repeat(hidden_biases, K)
    model = Rbm(W, b_vis, b_hid)

    if n <= 12:
        grid = all_configs(n).astype(np.float64)
    else:
        rng = _rng.substream(0, _rng.GENERATE)
        grid = rng.choice(np.array([-1.0, 1.0]), size=(512, n))
    net = np.tanh(u0 + np.tanh(hidden_biases + grid @ M.T) @ u)
    got = conditional_mean(model, 0, grid)
    sup_dev = float(np.abs(got - net).max()) if grid.size else 0.0
    return model, 0, sup_dev


def save_model(model, path):
    from .supervised import SupervisedRbm  # local: avoids import cycle
    doc = {
        "format_version": 1,
        "n_visible": model.n_visible if isinstance(model, Rbm)
                     else model.base.n_visible,
    }
    if isinstance(model, SupervisedRbm):
        base = model.base
        doc.update(kind="supervised_rbm",
                   w_label=model.w_label.tolist(),
                   b_label=model.b_label)
    else:
        base = model
        doc.update(kind="rbm")
    doc.update(n_hidden=base.n_hidden,
               W=base.W.ravel().tolist(),
               b_vis=base.b_vis.tolist(),
               b_hid=base.b_hid.tolist())
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != 1:
        raise ValidationError(f"{path}: unsupported format_version")
    nv, nh = doc["n_visible"], doc["n_hidden"]
    base = Rbm(np.array(doc["W"]).reshape(nv, nh), doc["b_vis"], doc["b_hid"])
    if doc["kind"] == "rbm":
        return base
    if doc["kind"] == "supervised_rbm":
        from .supervised import SupervisedRbm
        return SupervisedRbm(base, np.array(doc["w_label"]), doc["b_label"])
    raise ValidationError(f"{path}: unknown model kind {doc['kind']!r}")
