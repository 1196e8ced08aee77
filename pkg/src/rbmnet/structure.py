"""Two-hop neighborhood recovery through regression loss-drop tests.

A pair (i, j) is declared neighboring when excluding j from the inputs of
the monomial-basis predictor of i (or vice versa) raises the held-out
logistic loss by at least 3*eta/4.  On the population level that loss drop
equals the conditional mutual information I(X_i; X_j | rest), which is what
the eta-nondegeneracy assumption lower-bounds for real neighbors.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

from . import _rng
from .errors import ValidationError
from .logistic import (RegressionConfig, learn_network_predictor,
                       predictor_loss, samples_needed)


@dataclass(frozen=True)
class StructureConfig:
    """eta is the nondegeneracy floor; delta the overall failure budget."""

    eta: float
    regression: RegressionConfig
    delta: float = 0.05
    holdout_fraction: float = 0.2

    def __post_init__(self):
        if self.eta <= 0:
            raise ValidationError("eta must be positive")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if not 0 < self.holdout_fraction < 1:
            raise ValidationError("holdout_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class PairTest:
    """Diagnostics for one unordered pair; drops are held-out loss increases."""

    i: int
    j: int
    loss_full_i: float
    loss_excl_i: float
    loss_full_j: float
    loss_excl_j: float
    drop: float
    neighbor: bool
    borderline: bool          # drop landed in the untestable window
    samples_sufficient: bool  # m reached the regression sample bound
    samples_required: int

    @property
    def drop_i(self):
        return self.loss_excl_i - self.loss_full_i

    @property
    def drop_j(self):
        return self.loss_excl_j - self.loss_full_j


@dataclass
class NeighborhoodMap:
    n: int
    neighbors: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)
    eta: float = 0.0

    def adjacency(self):
        return {i: sorted(self.neighbors.get(i, ())) for i in range(self.n)}

    def save(self, path_json, path_csv=None):
        doc = {
            "format_version": 1,
            "kind": "neighborhood_map",
            "n": self.n,
            "eta": self.eta,
            "neighbors": {str(i): v for i, v in self.adjacency().items()},
        }
        with open(path_json, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        if path_csv is not None:
            with open(path_csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["i", "j", "loss_full", "loss_excl", "drop",
                            "decision"])
                for p in self.pairs:
                    dec = "neighbor" if p.neighbor else "non-neighbor"
                    w.writerow([p.i, p.j, p.loss_full_i, p.loss_excl_i,
                                p.drop_i, dec])
                    w.writerow([p.j, p.i, p.loss_full_j, p.loss_excl_j,
                                p.drop_j, dec])


def load_adjacency(path):
    """Read the neighbor sets from a saved NeighborhoodMap document."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "neighborhood_map":
        raise ValidationError(f"{path}: not a neighborhood map")
    return {int(i): set(v) for i, v in doc["neighbors"].items()}


def _split(data, cfg):
    rng = _rng.substream(cfg.regression.seed, _rng.SPLIT)
    perm = rng.permutation(data.m)
    cut = data.m - max(1, int(round(cfg.holdout_fraction * data.m)))
    if cut < 1:
        raise ValidationError("dataset too small for a holdout split")
    return data.subset(perm[:cut]), data.subset(perm[cut:])


def _is_constant(data, k):
    col = data.samples[:, k]
    return bool((col == col[0]).all())


def _fit_and_score(train, held, target, excluded, cfg):
    poly, _ = learn_network_predictor(train, target, excluded, cfg.regression)
    return predictor_loss(poly, held, target)


def _pair_budget(cfg, n):
    return cfg.delta / max(n * (n - 1), 1)


def _required_samples(cfg, n):
    # regression accuracy budget eps = eta/8, per the two-sided loss test
    p = sum(comb(n - 1, k) for k in range(min(cfg.regression.D, n - 1) + 1))
    return samples_needed(cfg.regression.R, max(p, 1),
                          _pair_budget(cfg, n), cfg.eta / 8.0)


def test_two_hop(data, i, j, cfg, _session=None):
    """Loss-drop test for one pair, both directions; returns PairTest."""
    if i == j:
        raise ValidationError("i and j must differ")
    i, j = min(i, j), max(i, j)
    if _session is None:
        _session = _Session(data, cfg)
    full_i = _session.full_loss(i)
    full_j = _session.full_loss(j)
    if _session.constant(i) or _session.constant(j):
        # constant columns carry no information: auto non-neighbor
        return PairTest(i, j, full_i, full_i, full_j, full_j, 0.0, False,
                        False, _session.sufficient, _session.required)
    excl_i = _fit_and_score(_session.train, _session.held, i, {j}, cfg)
    excl_j = _fit_and_score(_session.train, _session.held, j, {i}, cfg)
    drop = max(excl_i - full_i, excl_j - full_j)
    neighbor = drop >= 0.75 * cfg.eta
    borderline = 0.5 * cfg.eta <= drop < 0.75 * cfg.eta
    return PairTest(i, j, full_i, excl_i, full_j, excl_j, drop, neighbor,
                    borderline, _session.sufficient, _session.required)


class _Session:
    """Shared state for a structure run: one split, cached no-exclusion fits."""

    def __init__(self, data, cfg):
        if data.m == 0:
            raise ValidationError("empty dataset")
        self.cfg = cfg
        self.train, self.held = _split(data, cfg)
        self.required = _required_samples(cfg, data.n)
        self.sufficient = data.m >= self.required
        self._full = {}
        self._const = {k: _is_constant(self.train, k) for k in range(data.n)}

    def constant(self, k):
        return self._const[k]

    def full_loss(self, target):
        if target not in self._full:
            self._full[target] = _fit_and_score(
                self.train, self.held, target, set(), self.cfg)
        return self._full[target]


def recover_structure(data, cfg, threads=1):
    """Run the pair test over all pairs and assemble the neighborhood map."""
    n = data.n
    session = _Session(data, cfg)
    for k in range(n):
        session.full_loss(k)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def run(pair):
        return test_two_hop(data, pair[0], pair[1], cfg, _session=session)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, pairs))
    else:
        results = [run(p) for p in pairs]

    nmap = NeighborhoodMap(n, {k: set() for k in range(n)}, results, cfg.eta)
    for res in results:
        if res.neighbor:
            nmap.neighbors[res.i].add(res.j)
            nmap.neighbors[res.j].add(res.i)
    return nmap
