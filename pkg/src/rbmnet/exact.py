"""Exact small-instance computations on enumerated pmf tables.

A pmf table is a flat array of length 2^n indexed like ``all_configs(n)``
(config g has spin k = +1 iff bit k of g is set).  These routines are the
verification oracles for the learning pipeline: conditional tables, moments,
conditional mutual information, Bayes-optimal logistic losses and the
potential <-> pmf transforms.
"""

import numpy as np

from . import _rng
from .dataset import SpinDataset, all_configs, pack_columns
from .errors import ValidationError
from .polynomial import SparsePolynomial


def _check(p, n):
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (1 << n,):
        raise ValidationError(f"pmf table must have length 2^{n}")
    return p


def fwht(a):
    """Walsh-Hadamard transform: out[S] = sum_g a[g] * prod_{k in S} spin_k(g).

    Subset S is encoded in the output index by its membership bits.
    """
    a = np.asarray(a, dtype=np.float64).copy()
    h = 1
    while h < a.size:
        a = a.reshape(-1, 2 * h)
        lo = a[:, :h].copy()
        hi = a[:, h:].copy()
        a[:, :h] = lo + hi
        a[:, h:] = hi - lo
        a = a.ravel()
        h *= 2
    return a


def moment(p, n, s):
    """E_P[prod_{k in s} X_k]."""
    p = _check(p, n)
    if not s:
        return 1.0
    signs = all_configs(n)[:, sorted(s)].prod(axis=1)
    return float(np.dot(p, signs))


def marginal(p, n, cols):
    """Marginal table over ``cols``, indexed by packed column assignment."""
    p = _check(p, n)
    key = pack_columns(all_configs(n), sorted(cols))
    return np.bincount(key, weights=p, minlength=1 << len(cols))


def conditional_table(p, n, i, nbhd):
    """E[X_i | X_nbhd] for each assignment, indexed by packed assignment.

    Cells with zero marginal mass are 0.
    """
    p = _check(p, n)
    nbhd = sorted(nbhd)
    if i in nbhd:
        raise ValidationError("node cannot condition on itself")
    configs = all_configs(n)
    key = pack_columns(configs, nbhd)
    size = 1 << len(nbhd)
    den = np.bincount(key, weights=p, minlength=size)
    num = np.bincount(key, weights=p * configs[:, i], minlength=size)
    out = np.zeros(size)
    np.divide(num, den, out=out, where=den > 0)
    return out


def conditional_entropy(p, n, i, given):
    """H(X_i | X_given) in nats, computed from raw conditional probabilities."""
    p = _check(p, n)
    configs = all_configs(n)
    key = pack_columns(configs, sorted(given))
    size = 1 << len(given)
    den = np.bincount(key, weights=p, minlength=size)
    pos = np.bincount(key, weights=p * (configs[:, i] > 0), minlength=size)
    out = 0.0
    for q, qp in zip(den, pos):
        if q <= 0:
            continue
        a = qp / q
        for t in (a, 1.0 - a):
            if t > 0:
                out -= q * t * np.log(t)
    return float(out)


def logistic_loss_table(v, y):
    return np.logaddexp(0.0, -2.0 * np.asarray(v) * y)


def bayes_logistic_loss(p, n, i, exclude=()):
    """Population logistic loss of the Bayes predictor of X_i.

    The predictor conditions on all other spins minus ``exclude``; its loss
    is E[loss(atanh(E[X_i | X_C]), X_i)].
    """
    p = _check(p, n)
    cols = [k for k in range(n) if k != i and k not in set(exclude)]
    configs = all_configs(n)
    key = pack_columns(configs, cols)
    size = 1 << len(cols)
    den = np.bincount(key, weights=p, minlength=size)
    wpos = np.bincount(key, weights=p * (configs[:, i] > 0), minlength=size)
    wneg = den - wpos
    mu = np.zeros(size)
    np.divide(wpos - wneg, den, out=mu, where=den > 0)
    v = np.arctanh(np.clip(mu, -1 + 1e-15, 1 - 1e-15))
    loss = wpos @ logistic_loss_table(v, 1) + wneg @ logistic_loss_table(v, -1)
    return float(loss)


def cond_mutual_information(p, n, i, j):
    """I(X_i ; X_j | X_rest) in nats, from the definition via KL."""
    p = _check(p, n)
    rest = [k for k in range(n) if k not in (i, j)]
    configs = all_configs(n)
    key = pack_columns(configs, rest)
    size = 1 << len(rest)
    # joint of (x_i, x_j) within each rest-bin
    cell = ((configs[:, i] > 0).astype(np.int64) * 2
            + (configs[:, j] > 0).astype(np.int64))
    q = np.zeros((size, 4))
    np.add.at(q, (key, cell), p)
    tot = q.sum(axis=1)
    out = 0.0
    for b in range(size):
        t = tot[b]
        if t <= 0:
            continue
        jt = q[b] / t
        pi = {1: jt[2] + jt[3], 0: jt[0] + jt[1]}   # keyed by bit of x_i
        pj = {1: jt[1] + jt[3], 0: jt[0] + jt[2]}   # keyed by bit of x_j
        for c in range(4):
            if jt[c] > 0:
                out += t * jt[c] * np.log(jt[c] / (pi[c // 2] * pj[c % 2]))
    return float(out)


def potential_from_pmf(p, n):
    """Fourier expansion of log p; the empty-set coefficient is dropped."""
    p = _check(p, n)
    if (p <= 0).any():
        raise ValidationError("potential requires a strictly positive pmf")
    coeffs = fwht(np.log(p)) / (1 << n)
    terms = {}
    for s_bits in range(1, 1 << n):
        c = coeffs[s_bits]
        if abs(c) > 1e-13:
            terms[tuple(k for k in range(n) if s_bits >> k & 1)] = c
    return SparsePolynomial(n, terms)


def pmf_from_potential(poly, n=None):
    """Normalized pmf exp(sum_S w_S x_S) / Z over all configurations."""
    n = poly.n if n is None else n
    logp = poly.evaluate(all_configs(n).astype(np.float64))
    logp -= logp.max()
    p = np.exp(logp)
    return p / p.sum()


def ising_pmf(n, edges, fields=None):
    """Direct enumeration of an Ising model pmf (independent oracle)."""
    configs = all_configs(n).astype(np.float64)
    e = np.zeros(configs.shape[0])
    for (a, b), j in edges.items():
        e += j * configs[:, a] * configs[:, b]
    if fields is not None:
        e += configs @ np.asarray(fields, dtype=np.float64)
    e -= e.max()
    p = np.exp(e)
    return p / p.sum()


def sample_exact(p, n, m, seed, labeled=False, stream=0):
    """i.i.d. samples from an enumerated pmf as a SpinDataset.

    With ``labeled=True`` the last spin is split off as the label column.
    """
    p = _check(p, n)
    rng = _rng.substream(seed, _rng.TRIAL, stream)
    idx = rng.choice(p.size, size=m, p=p)
    configs = all_configs(n)
    rows = configs[idx]
    if labeled:
        return SpinDataset(rows[:, :n - 1], rows[:, n - 1])
    return SpinDataset(rows)


def total_variation(p, q):
    """Half L1 distance between two pmf tables."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValidationError("pmf tables must have equal shape")
    return 0.5 * float(np.abs(p - q).sum())
