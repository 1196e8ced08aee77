"""Sparse multilinear polynomials over spin variables.

A ``SparsePolynomial`` maps index subsets S of [n] to real coefficients and
is used both as a monomial-basis predictor and as an MRF log-potential.
Serialization lists terms as (sorted index array, coefficient) pairs in
size-major lexicographic order so files are portable across runs.
"""

from dataclasses import dataclass, field

import json
import numpy as np

from .errors import ValidationError

ORDERING_TAG = "size-major-lex"


def subset_key(s):
    return tuple(sorted(int(k) for k in s))


@dataclass
class SparsePolynomial:
    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for s, c in self.terms.items():
            c = float(c)
            if not np.isfinite(c):
                raise ValidationError("coefficients must be finite")
            key = subset_key(s)
            if key and (key[0] < 0 or key[-1] >= self.n):
                raise ValidationError(f"subset {key} out of range for n={self.n}")
            clean[key] = c
        self.terms = clean

    def coefficient(self, s):
        return self.terms.get(subset_key(s), 0.0)

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def degree(self):
        return max((len(s) for s in self.terms), default=0)

    def l1(self):
        return float(sum(abs(c) for c in self.terms.values()))

    def evaluate(self, x):
        """Evaluate sum_S w_S prod_{k in S} x_k for one row or a matrix."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.n:
            raise ValidationError(f"expected {self.n} columns, got {x.shape[1]}")
        out = np.zeros(x.shape[0])
        for s, c in self.terms.items():
            if c == 0.0 and s:
                continue
            out += c * (x[:, s].prod(axis=1) if s else 1.0)
        return float(out[0]) if single else out

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_doc(), fh, sort_keys=True)
            fh.write("\n")

    def to_doc(self):
        return {
            "format_version": 1,
            "kind": "sparse_polynomial",
            "n": self.n,
            "degree": self.degree(),
            "ordering": ORDERING_TAG,
            "terms": [[list(s), c] for s, c in self.items_sorted()],
        }

    @staticmethod
    def from_doc(doc):
        if doc.get("kind") != "sparse_polynomial" or doc.get("format_version") != 1:
            raise ValidationError("not a sparse_polynomial document")
        return SparsePolynomial(doc["n"],
                                {tuple(s): c for s, c in doc["terms"]})

    @staticmethod
    def load(path):
        with open(path) as fh:
            return SparsePolynomial.from_doc(json.load(fh))


def coefficient_l1_distance(p, q):
    """sum_S |p_S - q_S| over the union of supports."""
    keys = set(p.terms) | set(q.terms)
    return float(sum(abs(p.terms.get(s, 0.0) - q.terms.get(s, 0.0))
                     for s in keys))
