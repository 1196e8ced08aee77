"""Distribution recovery as a sparse MRF over the visible spins.

Given per-node neighborhoods, each node's clipped empirical conditional mean
is expanded in the Fourier basis of its neighborhood hypercube (atanh of the
predictor), per-set estimates are averaged across the member nodes, and the
result is the log-potential of the recovered MRF.  The symmetrized KL between
two such potentials reduces to sum_S (p_S - q_S)(E_P[X_S] - E_Q[X_S]).
"""

from dataclasses import dataclass

import numpy as np

from . import _rng, exact
from .dataset import all_configs, pack_columns
from .errors import EnumerationCapError, ValidationError
from .polynomial import SparsePolynomial

NBHD_CAP = 16

# an MRF log-potential is just a sparse polynomial over the visible spins
MrfPotential = SparsePolynomial


@dataclass(frozen=True)
class ClipSpec:
    """Conditional-mean clip radius; estimates are forced into [-r, r]."""

    r: float

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ValidationError("clip radius must lie in (0, 1)")


def empirical_conditional_table(data, i, nbhd, clip):
    """Clipped sample mean of X_i per assignment of its neighborhood.

    The table is indexed by the packed assignment of ``sorted(nbhd)`` (bit b
    set iff the b-th smallest neighbor is +1).  Unobserved assignments map
    to 0.
    """
    nbhd = sorted(set(nbhd))
    if i in nbhd:
        raise ValidationError("node cannot be its own neighbor")
    if len(nbhd) > NBHD_CAP:
        raise EnumerationCapError(
            f"neighborhood size {len(nbhd)} exceeds cap {NBHD_CAP}; "
            "raise eta to shrink recovered neighborhoods")
    size = 1 << len(nbhd)
    key = pack_columns(data.samples, nbhd)
    den = np.bincount(key, minlength=size).astype(np.float64)
    num = np.bincount(key, weights=data.samples[:, i].astype(np.float64),
                      minlength=size)
    table = np.zeros(size)
    np.divide(num, den, out=table, where=den > 0)
    return np.clip(table, -clip.r, clip.r)


def fourier_from_predictor(table, nbhd, i):
    """Fourier coefficients of atanh(predictor), reattached to node i.

    The predictor depends only on the neighborhood, so the uniform-measure
    expectation collapses to an exact sum over the 2^|nbhd| assignments.
    Returns {S -> coefficient} with i in S and S \\ {i} a subset of nbhd.
    """
    nbhd = sorted(set(nbhd))
    table = np.asarray(table, dtype=np.float64)
    if table.shape != (1 << len(nbhd),):
        raise ValidationError("table size must be 2^|nbhd|")
    if (np.abs(table) >= 1).any():
        raise ValidationError("table entries must lie in (-1, 1)")
    coeffs = exact.fwht(np.arctanh(table)) / table.size
    out = {}
    for bits in range(table.size):
        s = tuple(sorted([i] + [nbhd[b] for b in range(len(nbhd))
                                if bits >> b & 1]))
        out[s] = float(coeffs[bits])
    return out


def distribution_from_predictors(predictors):
    """Assemble the MRF potential from per-node conditional tables.

    ``predictors`` maps node -> (table, nbhd).  Every set S that appears in
    some node's expansion receives the average (1/|S|) sum over its member
    nodes; members whose neighborhood does not cover S contribute exactly 0
    and are counted in the normalization.
    """
    if not predictors:
        raise ValidationError("no predictors given")
    n = max(predictors) + 1
    sums = {}
    for i, (table, nbhd) in predictors.items():
        for s, c in fourier_from_predictor(table, nbhd, i).items():
            sums[s] = sums.get(s, 0.0) + c
    terms = {s: c / len(s) for s, c in sums.items() if s}
    return MrfPotential(n, terms)


def distribution_from_structure(data, nbhds, bounds):
    """Clipped empirical tables for every node, then potential assembly.

    The clip radius is tanh(lambda1): the conditional mean of any spin in a
    (lambda1, .)-bounded model cannot exceed it, so clipping never biases
    the estimate of a valid model.
    """
    neighbors = nbhds.neighbors if hasattr(nbhds, "neighbors") else nbhds
    n = data.n
    missing = [i for i in range(n) if i not in neighbors]
    if missing:
        raise ValidationError(f"missing neighborhoods for nodes {missing}")
    r = min(max(np.tanh(bounds.lambda1), 1e-12), 1.0 - 1e-12)
    clip = ClipSpec(r)
    predictors = {}
    for i in range(n):
        nbhd = sorted(set(neighbors[i]))
        predictors[i] = (empirical_conditional_table(data, i, nbhd, clip),
                         nbhd)
    return distribution_from_predictors(predictors)


class ExactMoments:
    """Moment source backed by full enumeration of both potentials."""

    def __init__(self, p_pot, q_pot, n=None):
        self.n = n if n is not None else max(p_pot.n, q_pot.n)
        self._pp = exact.pmf_from_potential(p_pot, self.n)
        self._pq = exact.pmf_from_potential(q_pot, self.n)

    def expectations(self, s):
        return (exact.moment(self._pp, self.n, s),
                exact.moment(self._pq, self.n, s))


class SampledMoments:
    """Moment source estimating E[X_S] from one dataset per distribution."""

    def __init__(self, data_p, data_q):
        self._p = data_p.samples.astype(np.float64)
        self._q = data_q.samples.astype(np.float64)

    def expectations(self, s):
        cols = sorted(s)
        return (float(self._p[:, cols].prod(axis=1).mean()),
                float(self._q[:, cols].prod(axis=1).mean()))


def skl_divergence(p_pot, q_pot, moments):
    """Symmetrized KL via sum_S (p_S - q_S)(E_P[X_S] - E_Q[X_S])."""
    out = 0.0
    for s in set(p_pot.terms) | set(q_pot.terms):
        diff = p_pot.coefficient(s) - q_pot.coefficient(s)
        if diff == 0.0 or not s:
            continue
        ep, eq = moments.expectations(s)
        out += diff * (ep - eq)
    return float(out)


def tv_distance_exact(p_table, q_table):
    """Half L1 distance between two enumerated pmf tables."""
    return exact.total_variation(p_table, q_table)


def export_pmf_csv(p, n, path):
    """Write an enumerated pmf as CSV rows of spins plus probability."""
    import csv

    p = np.asarray(p, dtype=np.float64)
    if p.shape != (1 << n,):
        raise ValidationError(f"pmf table must have length 2^{n}")
    configs = all_configs(n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k}" for k in range(n)] + ["probability"])
        for row, prob in zip(configs, p):
            w.writerow(list(map(int, row)) + [repr(float(prob))])


def sample_mrf_glauber(potential, n_samples, sweeps, seed, emit="spins"):
    """Glauber dynamics on an MRF potential, one full sweep per step.

    With emit="probs" the final sweep reports P(X_k = +1) at each site
    instead of the sampled spins (grayscale output for image models).
    """
    n = potential.n
    site_terms = {k: [] for k in range(n)}
    for s, c in potential.terms.items():
        for k in s:
            site_terms[k].append((c, tuple(q for q in s if q != k)))
    rng = _rng.substream(seed, _rng.GLAUBER)
    x = rng.choice(np.array([-1.0, 1.0]), size=(n_samples, n))
    probs = np.full((n_samples, n), 0.5)
    for _ in range(max(1, sweeps)):
        for k in range(n):
            field = np.zeros(n_samples)
            for c, rest in site_terms[k]:
                field += c * (x[:, rest].prod(axis=1) if rest else 1.0)
            p_plus = 0.5 * (1.0 + np.tanh(field))
            probs[:, k] = p_plus
            x[:, k] = np.where(rng.random(n_samples) < p_plus, 1.0, -1.0)
    if emit == "probs":
        return probs
    from .dataset import SpinDataset
    return SpinDataset(x.astype(np.int8))
