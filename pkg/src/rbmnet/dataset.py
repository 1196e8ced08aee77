"""Spin datasets: immutable matrices of ±1 samples with optional ±1 labels.

The on-disk format is one sample per line of space-separated ``+1``/``-1``
tokens.  A header line records the shape and whether a trailing label
column is present.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _as_spins(a, name):
    a = np.asarray(a)
    if a.size and not np.isin(a, (-1, 1)).all():
        raise ValidationError(f"{name} entries must be exactly +1 or -1")
    return a.astype(np.int8)


@dataclass(frozen=True)
class SpinDataset:
    """``m`` samples of ``n`` spins, entries in {-1,+1}, optionally labeled."""

    samples: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        samples = _as_spins(self.samples, "sample")
        if samples.ndim != 2:
            raise ValidationError("samples must be a 2-d array")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        if self.labels is not None:
            labels = _as_spins(self.labels, "label")
            if labels.shape != (samples.shape[0],):
                raise ValidationError("labels must be one per sample")
            labels.flags.writeable = False
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.samples.shape[1]

    @property
    def m(self):
        return self.samples.shape[0]

    def subset(self, idx):
        labels = None if self.labels is None else self.labels[idx]
        return SpinDataset(self.samples[idx].copy(), labels)

    def save(self, path):
        with open(path, "w") as fh:
            labeled = int(self.labels is not None)
            fh.write(f"# spins n={self.n} m={self.m} labels={labeled}\n")
            cols = [self.samples]
            if self.labels is not None:
                cols.append(self.labels[:, None])
            mat = np.concatenate(cols, axis=1)
            for row in mat:
                fh.write(" ".join("+1" if v > 0 else "-1" for v in row))
                fh.write("\n")

    @staticmethod
    def load(path):
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("# spins"):
                raise ValidationError(f"{path}: missing spin dataset header")
            fields = dict(tok.split("=") for tok in header.split()[2:])
            n = int(fields["n"])
            labeled = bool(int(fields.get("labels", "0")))
            rows = np.loadtxt(fh, dtype=np.int8, ndmin=2)
        if rows.shape[1] != n + int(labeled):
            raise ValidationError(f"{path}: row width does not match header")
        labels = rows[:, n] if labeled else None
        return SpinDataset(rows[:, :n], labels)


@dataclass(frozen=True)
class WeightedConfigs:
    """Distinct spin configurations with nonnegative weights summing to 1.

    This is the common currency of every estimator in the package: empirical
    data collapses to its distinct rows (weights = frequencies, so the cost
    of downstream work is independent of the sample count), and an exact pmf
    enumerates all configurations (weights = probabilities).  ``label_split``
    carries, per configuration, the weight landing on label +1 and -1; it is
    None for unlabeled sources.
    """

    configs: np.ndarray              # (K, n) int8
    weights: np.ndarray              # (K,) float64, sums to 1
    label_split: np.ndarray | None = None   # (K, 2) float64: [:,0]=+1, [:,1]=-1

    @property
    def n(self):
        return self.configs.shape[1]


def pack_columns(x, cols):
    """Pack the ±1 entries of selected columns into integer keys."""
    cols = list(cols)
    if len(cols) > 63:
        raise ValidationError("cannot pack more than 63 columns")
    key = np.zeros(x.shape[0], dtype=np.int64)
    for b, c in enumerate(cols):
        key |= ((x[:, c] > 0).astype(np.int64)) << b
    return key


def collapse(dataset):
    """Collapse a SpinDataset into WeightedConfigs over its distinct rows."""
    x = dataset.samples
    if x.shape[1] <= 63:
        key = pack_columns(x, range(x.shape[1]))
        order = np.argsort(key, kind="stable")
        key_sorted = key[order]
        first = np.ones(len(key_sorted), dtype=bool)
        first[1:] = key_sorted[1:] != key_sorted[:-1]
        starts = np.flatnonzero(first)
        configs = x[order[starts]]
        group = np.cumsum(first) - 1
    else:
        configs, inverse = np.unique(x, axis=0, return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        group = inverse[order]
        starts = None
    m = dataset.m
    k = configs.shape[0]
    counts = np.bincount(group, minlength=k).astype(np.float64)
    split = None
    if dataset.labels is not None:
        lab = dataset.labels[order]
        split = np.zeros((k, 2))
        np.add.at(split, (group, (lab < 0).astype(np.int64)), 1.0)
        split /= m
    return WeightedConfigs(configs, counts / m, split)


def all_configs(n):
    """All 2^n spin configurations; config g has spin k = +1 iff bit k of g."""
    if n > 24:
        raise ValidationError(f"refusing to enumerate 2^{n} configurations")
    g = np.arange(1 << n, dtype=np.int64)
    bits = (g[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)
