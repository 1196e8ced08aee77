"""L1-ball-constrained logistic regression over monomial features.

The loss convention is loss(v, y) = log(1 + exp(-2 v y)) for labels in
{-1, +1}, the negative log-likelihood of a spin with mean tanh(v).  Fitting
reduces the L1 ball to a scaled 2p-simplex and runs full-batch exponentiated
gradient (see ``_kernels``); the returned certificate is the Frank-Wolfe
duality gap, an upper bound on suboptimality over the ball.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import _kernels
from .approx import MonomialBasis
from .dataset import collapse, SpinDataset
from .errors import ValidationError
from .polynomial import SparsePolynomial


def _check_labels(y):
    y = np.asarray(y)
    if not np.isin(y, (-1, 1)).all():
        raise ValidationError("labels must be +-1")
    return y.astype(np.float64)


def logistic_loss(v, y):
    """log(1 + exp(-2 v y)); nonnegative, convex and 2-Lipschitz in v."""
    y = _check_labels(y)
    out = np.logaddexp(0.0, -2.0 * np.asarray(v, dtype=np.float64) * y)
    return float(out) if out.ndim == 0 else out

def logistic_grad(v, y):
    """d/dv loss(v, y) = -2 y exp(-2vy) / (1 + exp(-2vy))."""
    y = _check_labels(y)
    v = np.asarray(v, dtype=np.float64)
    out = -2.0 * y * expit(-2.0 * v * y)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RegressionConfig:
    """Degree, L1 budget and optimizer knobs for one regression problem."""

    D: int
    R: float
    max_iters: int = 600
    tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.R < 0:
            raise ValidationError("R must be nonnegative")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.D < 0 or self.max_iters < 0:
            raise ValidationError("D and max_iters must be nonnegative")


@dataclass(frozen=True)
class FitResult:
    coeffs: SparsePolynomial
    weights: np.ndarray
    loss: float
    gap: float
    iters: int


def excess_loss_bound(R, m, p, delta):
    """Uniform generalization slack for all predictors with ||w||_1 <= R:

    4R sqrt(2 log(2p)/m) + 2R sqrt(2 log(2/delta)/m).
    """
    if m < 1 or p < 1:
        raise ValidationError("m and p must be at least 1")
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    return (4.0 * R * np.sqrt(2.0 * np.log(2.0 * p) / m)
            + 2.0 * R * np.sqrt(2.0 * np.log(2.0 / delta) / m))


def samples_needed(R, p, delta, eps):
    """Smallest m with excess_loss_bound(R, m, p, delta) <= eps."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if R == 0:
        return 1
    root = (4.0 * R * np.sqrt(2.0 * np.log(2.0 * p))
            + 2.0 * R * np.sqrt(2.0 * np.log(2.0 / delta)))
    return int(np.ceil((root / eps) ** 2))


def _fit_weighted(F, wpos, wneg, cfg):
    """EG fit on weighted rows; weights wpos/wneg must sum to 1 jointly."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    w, loss, gap, iters = _kernels.eg_fit(
        F, np.ascontiguousarray(wpos, dtype=np.float64),
        np.ascontiguousarray(wneg, dtype=np.float64),
        float(cfg.R), int(cfg.max_iters), float(cfg.tol))
    return np.asarray(w), float(loss), float(gap), int(iters)


def _constant_fit(subsets, n, sign, m, R):
    # all labels equal: clipped constant predictor atanh(sign*(1 - 1/m))
    v = min(np.arctanh(1.0 - 1.0 / max(m, 2)), R) * sign
    poly = SparsePolynomial(n, {(): v})
    weights = np.zeros(len(subsets))
    if () in subsets:
        weights[subsets.index(())] = v
    loss = float(np.logaddexp(0.0, -2.0 * v * sign))
    return FitResult(poly, weights, loss, 0.0, 0)


def fit_l1_logistic(features, labels, cfg, basis=None, n=None):
    """Constrained logistic fit; returns coefficients over the basis subsets.

    ``features`` is an m x p matrix with entries in [-1, 1]; when ``basis``
    is given its subsets name the columns (and ``n`` defaults to basis.n),
    otherwise column k is reported as the singleton subset {k}.
    """
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2:
        raise ValidationError("features must be a matrix")
    if F.size and np.abs(F).max() > 1 + 1e-12:
        raise ValidationError("features must lie in [-1, 1]")
    y = _check_labels(labels)
    if y.shape[0] != F.shape[0]:
        raise ValidationError("feature/label row mismatch")
    m, p = F.shape
    if m == 0:
        raise ValidationError("cannot fit an empty dataset")
    if basis is not None:
        if len(basis) != p:
            raise ValidationError("basis size must match feature columns")
        subsets = list(basis.subsets)
        n = basis.n if n is None else n
    else:
        subsets = [(k,) for k in range(p)]
        n = p if n is None else n

    if np.all(y == y[0]):
        return _constant_fit(subsets, n, float(y[0]), m, cfg.R)

    wpos = np.where(y > 0, 1.0, 0.0) / m
    wneg = np.where(y < 0, 1.0, 0.0) / m
    w, loss, gap, iters = _fit_weighted(F, wpos, wneg, cfg)
    poly = SparsePolynomial(n, {s: c for s, c in zip(subsets, w) if c != 0.0})
    return FitResult(poly, w, loss, gap, iters)


def _weighted_rows(data, target, kept):
    """Collapse (X_kept, X_target) to distinct rows with +/- label weights."""
    labeled = SpinDataset(data.samples[:, kept], data.samples[:, target])
    wc = collapse(labeled)
    return wc.configs, wc.label_split[:, 0], wc.label_split[:, 1]


def learn_network_predictor(data, target, excluded, cfg):
    """Fit the monomial-basis predictor of spin ``target`` from the others.

    Returns (SparsePolynomial over original node indices, training loss).
    Coordinates in ``excluded`` are dropped from the input set.
    """
    if data.m == 0:
        raise ValidationError("empty dataset")
    excluded = set(excluded)
    if target in excluded:
        raise ValidationError("target cannot be excluded")
    kept = [k for k in range(data.n) if k != target and k not in excluded]
    configs, wpos, wneg = _weighted_rows(data, target, kept)
    basis = MonomialBasis(len(kept), cfg.D)
    F = basis.features(configs).astype(np.float64)
    if wpos.sum() == 0.0 or wneg.sum() == 0.0:
        sign = 1.0 if wneg.sum() == 0.0 else -1.0
        res = _constant_fit(basis.subsets, len(kept), sign, data.m, cfg.R)
        poly = SparsePolynomial(data.n, {(): res.coeffs.coefficient(())})
        return poly, res.loss
    w, loss, _, _ = _fit_weighted(F, wpos, wneg, cfg)
    terms = {}
    for s, c in zip(basis.subsets, w):
        if c != 0.0:
            terms[tuple(kept[k] for k in s)] = c
    return SparsePolynomial(data.n, terms), loss


def predictor_loss(poly, data, target):
    """Average logistic loss of a fitted predictor of spin ``target``.

    The polynomial's terms never involve the target node, so it is safe to
    evaluate on the full sample matrix.
    """
    v = poly.evaluate(data.samples.astype(np.float64))
    y = data.samples[:, target].astype(np.float64)
    return float(np.mean(np.logaddexp(0.0, -2.0 * v * y)))
