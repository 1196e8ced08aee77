"""Synthetic model generators for experiments and verification.

Pairwise topologies (chain, cycle, grid, star) are realized as hidden-
degree-2 RBMs whose visible marginal equals the Ising model with the
requested edge weights, which keeps exact ground truth available: the edge
potential of a hidden unit with couplings (w_a, w_b) is
atanh(tanh(w_a) tanh(w_b)).
"""

from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import ValidationError
from .polynomial import SparsePolynomial
from .rbm import Rbm, norm_bounds
from .supervised import SupervisedRbm

TOPOLOGIES = ("chain", "cycle", "grid", "star", "random-bipartite")


@dataclass(frozen=True)
class GeneratorSpec:
    topology: str
    n_visible: int
    n_hidden: int | None = None          # random-bipartite only
    weight_scale: float = 0.4            # Ising edge weight for pairwise
    sign_mode: str = "ferromagnetic"
    dobrushin_scale: bool = False
    bias_scale: float = 0.0
    density: float = 0.4                 # random-bipartite edge probability
    grid_shape: tuple | None = None
    label_coupling: dict | None = None   # {"scale","mode","bias"} -> supervised
    seed: int = 0

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValidationError(f"unknown topology {self.topology!r}",
                                  paths=["topology"])
        if self.n_visible < 1:
            raise ValidationError("n_visible must be positive",
                                  paths=["n_visible"])
        if self.sign_mode not in ("ferromagnetic", "mixed"):
            raise ValidationError("sign_mode must be ferromagnetic or mixed",
                                  paths=["sign_mode"])
        if self.topology == "random-bipartite" and not self.n_hidden:
            raise ValidationError("random-bipartite needs n_hidden",
                                  paths=["n_hidden"])


def pair_edges(spec):
    """Edge list of a pairwise topology."""
    n = spec.n_visible
    if spec.topology == "chain":
        return [(k, k + 1) for k in range(n - 1)]
    if spec.topology == "cycle":
        return [(k, (k + 1) % n) for k in range(n)]
    if spec.topology == "star":
        return [(0, k) for k in range(1, n)]
    if spec.topology == "grid":
        if spec.grid_shape is not None:
            rows, cols = spec.grid_shape
        else:
            rows = int(np.floor(np.sqrt(n)))
            while n % rows:
                rows -= 1
            cols = n // rows
        if rows * cols != n:
            raise ValidationError("grid_shape must multiply to n_visible",
                                  paths=["grid_shape"])
        edges = []
        for r in range(rows):
            for c in range(cols):
                k = r * cols + c
                if c + 1 < cols:
                    edges.append((k, k + 1))
                if r + 1 < rows:
                    edges.append((k, k + cols))
        return edges
    raise ValidationError(f"{spec.topology} has no pairwise edge list")


def ising_coupling_to_rbm(j):
    """Hidden-degree-2 coupling magnitude w with atanh(tanh(w)^2) = |j|."""
    if j == 0:
        return 0.0
    return float(np.arctanh(np.sqrt(np.tanh(abs(j)))))


def _edge_js(spec, rng):
    js = {}
    for e in pair_edges(spec):
        j = spec.weight_scale
        if spec.sign_mode == "mixed" and rng.random() < 0.5:
            j = -j
        js[e] = j
    return js


def _dobrushin_rescale(W, b_vis, b_hid):
    def lam_max(scale):
        nb = norm_bounds(Rbm(W * scale, b_vis, b_hid))
        return max(nb.lambda1, nb.lambda2)

    if lam_max(1.0) <= 1.0:
        return W
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if lam_max(mid) <= 0.999:
            lo = mid
        else:
            hi = mid
    return W * lo


def true_ising_potential(spec):
    """Ground-truth MRF potential of a generated pairwise model.

    Only valid with bias_scale == 0 on hidden units (the generator keeps
    hidden biases at zero), where the visible marginal is exactly the Ising
    model on the topology edges.
    """
    if spec.topology == "random-bipartite":
        raise ValidationError("no closed-form potential for random-bipartite")
    rng = _rng.substream(spec.seed, _rng.GENERATE)
    js = _edge_js(spec, rng)
    if spec.dobrushin_scale:
        raise ValidationError("true potential of a rescaled model is not "
                              "the requested Ising model; enumerate instead")
    terms = {tuple(sorted(e)): j for e, j in js.items()}
    if spec.bias_scale:
        fields = _vis_bias(spec, rng)
        for k in range(spec.n_visible):
            if fields[k]:
                terms[(k,)] = fields[k]
    return SparsePolynomial(spec.n_visible, terms)


def _vis_bias(spec, rng):
    if not spec.bias_scale:
        return np.zeros(spec.n_visible)
    return spec.bias_scale * rng.uniform(-1.0, 1.0, size=spec.n_visible)


def generate_model(spec):
    """Deterministic model construction from a GeneratorSpec."""
    rng = _rng.substream(spec.seed, _rng.GENERATE)
    n = spec.n_visible
    if spec.topology == "random-bipartite":
        nh = spec.n_hidden
        mask = rng.random((n, nh)) < spec.density
        mag = spec.weight_scale * rng.uniform(0.5, 1.0, size=(n, nh))
        sign = np.ones((n, nh))
        if spec.sign_mode == "mixed":
            sign = np.where(rng.random((n, nh)) < 0.5, 1.0, -1.0)
        W = np.where(mask, mag * sign, 0.0)
        b_vis = _vis_bias(spec, rng)
        b_hid = np.zeros(nh)
    else:
        js = _edge_js(spec, rng)
        edges = list(js)
        W = np.zeros((n, len(edges)))
        for col, (a, b) in enumerate(edges):
            w = ising_coupling_to_rbm(js[(a, b)])
            W[a, col] = w
            W[b, col] = w if js[(a, b)] > 0 else -w
        b_vis = _vis_bias(spec, rng)
        b_hid = np.zeros(len(edges))
    if spec.dobrushin_scale:
        W = _dobrushin_rescale(W, b_vis, b_hid)
    base = Rbm(W, b_vis, b_hid)
    if spec.label_coupling is None:
        return base
    lc = dict(spec.label_coupling)
    scale = float(lc.get("scale", 0.3))
    mode = lc.get("mode", "alternating")
    nh = base.n_hidden
    if mode == "alternating":
        w_label = scale * np.where(np.arange(nh) % 2 == 0, 1.0, -1.0)
    elif mode == "random":
        w_label = scale * rng.choice(np.array([-1.0, 1.0]), size=nh)
    elif mode == "constant":
        w_label = np.full(nh, scale)
    else:
        raise ValidationError("label_coupling mode must be alternating, "
                              "random or constant",
                              paths=["label_coupling.mode"])
    return SupervisedRbm(base, w_label, float(lc.get("bias", 0.0)))


def supervised_assumption_report(model):
    """Check the structural assumptions a supervised model is meant to satisfy.

    Reports the minimum nonzero coupling, the per-label conditional sparsity
    max over units of (column sum + |b2_j + y w_j|) next to the visible-side
    sum, and whether W is ferromagnetic.
    """
    if not isinstance(model, SupervisedRbm):
        raise ValidationError("expected a SupervisedRbm")
    W = model.base.W
    nz = W[W != 0.0]
    report = {
        "ferromagnetic": bool((W >= 0.0).all()),
        "alpha": float(nz.min()) if nz.size and (W >= 0).all() else 0.0,
        "visible_l1": float((W.sum(axis=1) + np.abs(model.base.b_vis)).max())
        if (W >= 0).all() else None,
    }
    for y in (1, -1):
        cond = np.abs(model.base.b_hid + y * model.w_label)
        col = W.sum(axis=0) + cond
        report[f"hidden_l1_y{'+' if y > 0 else '-'}"] = (
            float(col.max()) if col.size else 0.0)
    return report
