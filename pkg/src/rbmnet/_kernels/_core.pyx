# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: block-Gibbs chain stepping and the EG fit loop.

Semantics mirror ``fallback.py``; ``gibbs_chain`` consumes the caller's
pre-drawn uniforms in the identical order so sample paths agree with the
fallback up to floating-point summation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p

cnp.import_array()

IMPL = "compiled"


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _softplus(double t) noexcept nogil:
    if t > 0:
        return t + log1p(exp(-t))
    return log1p(exp(t))


def gibbs_chain(const double[:, ::1] W, const double[::1] b_vis, const double[::1] b_hid,
                const cnp.int8_t[::1] x0, const double[:, ::1] uniforms,
                Py_ssize_t burn_in, Py_ssize_t n_record, Py_ssize_t thin):
    cdef Py_ssize_t nv = W.shape[0]
    cdef Py_ssize_t nh = W.shape[1]
    cdef Py_ssize_t total = burn_in + n_record * thin
    if uniforms.shape[0] != total or uniforms.shape[1] != nh + nv:
        raise ValueError("uniforms shape mismatch")
    out_arr = np.empty((n_record, nv), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] out = out_arr
    x_arr = np.asarray(x0, dtype=np.float64).copy()
    cdef double[::1] x = x_arr
    h_arr = np.empty(nh, dtype=np.float64)
    cdef double[::1] h = h_arr
    cdef Py_ssize_t t, i, j, rec = 0
    cdef double z
    with nogil:
        for t in range(total):
            for j in range(nh):
                z = b_hid[j]
                for i in range(nv):
                    z += W[i, j] * x[i]
                h[j] = 1.0 if uniforms[t, j] < _sigmoid(2.0 * z) else -1.0
            for i in range(nv):
                z = b_vis[i]
                for j in range(nh):
                    z += W[i, j] * h[j]
                x[i] = 1.0 if uniforms[t, nh + i] < _sigmoid(2.0 * z) else -1.0
            if t >= burn_in and (t - burn_in + 1) % thin == 0:
                for i in range(nv):
                    out[rec, i] = <cnp.int8_t>(1 if x[i] > 0 else -1)
                rec += 1
    return out_arr


cdef void _mv(const double[:, ::1] F, const double[::1] w, double[::1] out) noexcept nogil:
    cdef Py_ssize_t K = F.shape[0], p = F.shape[1], r, c
    cdef double acc
    for r in range(K):
        acc = 0.0
        for c in range(p):
            acc += F[r, c] * w[c]
        out[r] = acc


cdef void _mtv(const double[:, ::1] F, const double[::1] s, double[::1] out) noexcept nogil:
    cdef Py_ssize_t K = F.shape[0], p = F.shape[1], r, c
    cdef double sr
    for c in range(p):
        out[c] = 0.0
    for r in range(K):
        sr = s[r]
        if sr != 0.0:
            for c in range(p):
                out[c] += F[r, c] * sr


cdef double _loss_slope(const double[::1] v, const double[::1] wpos, const double[::1] wneg,
                        double[::1] slope) noexcept nogil:
    cdef Py_ssize_t K = v.shape[0], r
    cdef double loss = 0.0, vr
    for r in range(K):
        vr = v[r]
        loss += wpos[r] * _softplus(-2.0 * vr) + wneg[r] * _softplus(2.0 * vr)
        slope[r] = -2.0 * wpos[r] * _sigmoid(-2.0 * vr) \
            + 2.0 * wneg[r] * _sigmoid(2.0 * vr)
    return loss


cdef void _unpack(const double[::1] theta, double R, double[::1] w) noexcept nogil:
    cdef Py_ssize_t p = w.shape[0], k
    cdef double mx = theta[0], z = 0.0
    for k in range(2 * p):
        if theta[k] > mx:
            mx = theta[k]
    for k in range(2 * p):
        z += exp(theta[k] - mx)
    for k in range(p):
        w[k] = R * (exp(theta[k] - mx) - exp(theta[p + k] - mx)) / z


cdef double _gap(const double[::1] w, const double[::1] g, double R) noexcept nogil:
    cdef Py_ssize_t p = w.shape[0], k
    cdef double dot = 0.0, gmax = 0.0
    for k in range(p):
        dot += w[k] * g[k]
        if fabs(g[k]) > gmax:
            gmax = fabs(g[k])
    return dot + R * gmax


def eg_fit(const double[:, ::1] F, const double[::1] wpos, const double[::1] wneg, double R,
           Py_ssize_t max_iters, double gap_tol, double rel_tol=1e-7):
    cdef Py_ssize_t K = F.shape[0], p = F.shape[1]
    cdef Py_ssize_t it = 0, k, ls
    if R == 0.0 or p == 0:
        v0 = np.zeros(K)
        s0 = np.zeros(K)
        loss0 = _loss_slope(v0, wpos, wneg, s0)
        return np.zeros(p), loss0, 0.0, 0

    theta_arr = np.zeros(2 * p)
    theta_try_arr = np.zeros(2 * p)
    w_arr = np.empty(p)
    w_try_arr = np.empty(p)
    g_arr = np.empty(p)
    v_arr = np.empty(K)
    v_try_arr = np.empty(K)
    slope_arr = np.empty(K)
    slope_try_arr = np.empty(K)
    best_w_arr = np.empty(p)
    wsum_arr = np.zeros(p)
    cdef double[::1] theta = theta_arr, theta_try = theta_try_arr
    cdef double[::1] w = w_arr, w_try = w_try_arr, g = g_arr
    cdef double[::1] v = v_arr, v_try = v_try_arr
    cdef double[::1] slope = slope_arr, slope_try = slope_try_arr
    cdef double[::1] best_w = best_w_arr, wsum = wsum_arr
    cdef double loss, loss_try, best_loss, gap, eta = 0.5, improved
    cdef bint accepted

    with nogil:
        _unpack(theta, R, w)
        _mv(F, w, v)
        loss = _loss_slope(v, wpos, wneg, slope)
        _mtv(F, slope, g)
        gap = _gap(w, g, R)
        best_loss = loss
        for k in range(p):
            best_w[k] = w[k]
        for it in range(1, max_iters + 1):
            if gap <= gap_tol:
                it -= 1
                break
            accepted = False
            for ls in range(40):
                for k in range(p):
                    theta_try[k] = theta[k] - eta * R * g[k]
                    theta_try[p + k] = theta[p + k] + eta * R * g[k]
                _unpack(theta_try, R, w_try)
                _mv(F, w_try, v_try)
                loss_try = _loss_slope(v_try, wpos, wneg, slope_try)
                if loss_try <= loss:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                it -= 1
                break
            improved = loss - loss_try
            for k in range(2 * p):
                theta[k] = theta_try[k]
            for k in range(p):
                w[k] = w_try[k]
                wsum[k] += w[k]
            loss = loss_try
            for k in range(K):
                slope[k] = slope_try[k]
            _mtv(F, slope, g)
            gap = _gap(w, g, R)
            if loss < best_loss:
                best_loss = loss
                for k in range(p):
                    best_w[k] = w[k]
            if improved < rel_tol * max(1.0, fabs(loss)):
                # zigzag near the optimum: shrink the step instead of stopping
                eta *= 0.5
                if eta < 1e-13:
                    break
            else:
                eta = min(eta * 1.25, 1e4)

    if it > 0 and wsum_arr.any():
        w_avg = wsum_arr / it
        v_avg = np.empty(K)
        s_avg = np.empty(K)
        _mv(F, w_avg, v_avg)
        loss_avg = _loss_slope(v_avg, wpos, wneg, s_avg)
        if loss_avg < best_loss:
            best_loss = loss_avg
            best_w_arr[:] = w_avg
    _mv(F, best_w, v)
    loss = _loss_slope(v, wpos, wneg, slope)
    _mtv(F, slope, g)
    gap = _gap(best_w, g, R)
    return best_w_arr, loss, gap, int(it)
