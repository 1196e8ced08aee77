"""Certified low-degree approximation of the f_beta activations.

``best_poly_approx`` projects f_beta(R t + h) onto Chebyshev polynomials
using Chebyshev-Gauss quadrature; the contract is that the sup error on
[-1, 1] stays within twice the closed-form bound 4R(1+2R)/(1+1/2R)^D, which
holds for every beta in [0, 1] and every shift h.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb, e as EULER_E

import numpy as np

from .errors import DegreeCapError, ValidationError
from .rbm import f_beta


@dataclass(frozen=True)
class IntervalSpec:
    """Evaluation window [h - R, h + R], parametrized as R*t + h, t in [-1,1]."""

    R: float
    h: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.R) and self.R > 0):
            raise ValidationError("interval half-width R must be positive")


@dataclass(frozen=True)
class Polynomial1D:
    """Dense univariate polynomial; coeffs[k] multiplies t^k."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if not np.isfinite(c).all():
            raise ValidationError("polynomial coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)


def approx_error_bound(R, D):
    """Best-approximation error bound 4R(1+2R)/(1+1/2R)^D; beta-independent."""
    if R <= 0:
        raise ValidationError("R must be positive")
    if D < 0:
        raise ValidationError("degree must be nonnegative")
    return 4.0 * R * (1.0 + 2.0 * R) / (1.0 + 1.0 / (2.0 * R)) ** D


def best_poly_approx(beta, iv, D):
    """Degree-D Chebyshev projection of t -> f_beta(R t + h) on [-1, 1]."""
    if D < 0:
        raise ValidationError("degree must be nonnegative")
    n_nodes = 4 * (D + 1)
    theta = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    x = np.cos(theta)
    vals = f_beta(beta, iv.R * x + iv.h)
    k = np.arange(D + 1)
    cheb = (2.0 / n_nodes) * np.cos(np.outer(k, theta)) @ vals
    cheb[0] /= 2.0
    return Polynomial1D(np.polynomial.chebyshev.cheb2poly(cheb))


def choose_degree(lam, w1, eps, max_degree=20):
    """Smallest D with 8*w1*(lam + 2 lam^2) / (1 + 2/lam)^D <= eps/2.

    This is the approximation half of the regression error budget under the
    column-norm bound lam (valid for lam >= 2).  Raises DegreeCapError when
    the needed degree exceeds ``max_degree``.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if lam < 2:
        raise ValidationError("the degree rule assumes lam >= 2")
    if w1 < 0:
        raise ValidationError("w1 must be nonnegative")
    if w1 == 0:
        return 0
    base = 8.0 * w1 * (lam + 2.0 * lam * lam)
    ratio = 1.0 + 2.0 / lam
    needed = int(np.ceil(np.log(base / (eps / 2.0)) / np.log(ratio)))
    needed = max(needed, 0)
    while needed > 0 and base / ratio ** (needed - 1) <= eps / 2.0:
        needed -= 1
    if needed > max_degree:
        raise DegreeCapError(needed, max_degree)
    return needed


def l1_budget(b1_abs, w_abs, col_norms, D):
    """The regression L1 constraint that certifies the approximating predictor.

    R = |b1| + sqrt(D+1) (4e)^{D+1} sum_j |w_j| (1 + ||W_j||_1)^{D+1}.
    """
    w_abs = np.abs(np.asarray(w_abs, dtype=np.float64))
    col_norms = np.asarray(col_norms, dtype=np.float64)
    if w_abs.shape != col_norms.shape:
        raise ValidationError("w_abs and col_norms must align")
    if (col_norms < 0).any():
        raise ValidationError("column norms must be nonnegative")
    s = float((w_abs * (1.0 + col_norms) ** (D + 1)).sum())
    return abs(b1_abs) + np.sqrt(D + 1.0) * (4.0 * EULER_E) ** (D + 1) * s


class MonomialBasis:
    """All subsets S of [n] with |S| <= D, size-major then lexicographic."""

    def __init__(self, n, degree):
        if n < 0 or degree < 0:
            raise ValidationError("n and degree must be nonnegative")
        self.n = n
        self.degree = min(degree, n)
        self.subsets = [()]
        for size in range(1, self.degree + 1):
            self.subsets.extend(combinations(range(n), size))

    def __len__(self):
        return len(self.subsets)

    @property
    def expected_size(self):
        return sum(comb(self.n, k) for k in range(self.degree + 1))

    def features(self, x):
        """The +-1 feature matrix; products are computed in integer arithmetic."""
        x = np.asarray(x)
        single = x.ndim == 1
        x = np.atleast_2d(x).astype(np.int8)
        if x.shape[1] != self.n:
            raise ValidationError(f"expected {self.n} columns")
        out = np.empty((x.shape[0], len(self.subsets)), dtype=np.int8)
        out[:, 0] = 1
        for col, s in enumerate(self.subsets[1:], start=1):
            out[:, col] = x[:, s].prod(axis=1)
        return out[0] if single else out


def monomial_features(basis, x):
    """Feature vector phi(x): entry for S is prod_{k in S} x_k."""
    x = np.asarray(x)
    if not np.isin(x, (-1, 1)).all():
        raise ValidationError("inputs must be +-1 spins")
    return basis.features(x)
