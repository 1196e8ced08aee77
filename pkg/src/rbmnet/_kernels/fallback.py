"""Pure-numpy reference implementations of the hot kernels.

The compiled extension in ``_core.pyx`` mirrors these semantics exactly:
``gibbs_chain`` consumes the same pre-drawn uniforms in the same order, so
both implementations produce bit-identical sample paths.
"""

import numpy as np

IMPL = "fallback"


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def gibbs_chain(W, b_vis, b_hid, x0, uniforms, burn_in, n_record, thin):
    """Block Gibbs on an RBM, recording visible states.

    One step samples H | X coordinate-wise (P(h=+1) = sigmoid(2 z)) and then
    X | H.  ``uniforms`` must have shape (burn_in + n_record*thin, nh + nv);
    row t supplies the hidden draws first, then the visible draws.
    """
    nv, nh = W.shape
    total = burn_in + n_record * thin
    assert uniforms.shape == (total, nh + nv)
    x = x0.astype(np.float64)
    out = np.empty((n_record, nv), dtype=np.int8)
    rec = 0
    for t in range(total):
        z_h = b_hid + W.T @ x
        h = np.where(uniforms[t, :nh] < _sigmoid(2.0 * z_h), 1.0, -1.0)
        z_v = b_vis + W @ h
        x = np.where(uniforms[t, nh:] < _sigmoid(2.0 * z_v), 1.0, -1.0)
        if t >= burn_in and (t - burn_in + 1) % thin == 0:
            out[rec] = x.astype(np.int8)
            rec += 1
    assert rec == n_record
    return out


def _loss_and_slope(v, wpos, wneg):
    # sum_r wpos_r*log(1+e^{-2v}) + wneg_r*log(1+e^{2v}), d/dv per row
    loss = float(np.dot(wpos, np.logaddexp(0.0, -2.0 * v))
                 + np.dot(wneg, np.logaddexp(0.0, 2.0 * v)))
    slope = -2.0 * wpos * _sigmoid(-2.0 * v) + 2.0 * wneg * _sigmoid(2.0 * v)
    return loss, slope


def eg_fit(F, wpos, wneg, R, max_iters, gap_tol, rel_tol=1e-7):
    """Exponentiated-gradient fit of an L1-ball-constrained logistic model.

    Minimizes sum_r [wpos_r * loss(v_r,+1) + wneg_r * loss(v_r,-1)] with
    v = F @ w over the ball ||w||_1 <= R, via mirror descent with the entropy
    mirror map on the 2p-simplex (w = R*(u_plus - u_minus)) and backtracking
    line search.  Returns (w, loss, gap, iters); ``gap`` is the Frank-Wolfe
    duality gap g.w + R*||g||_inf, an upper bound on the suboptimality.
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    K, p = F.shape
    if R == 0.0 or p == 0:
        v = np.zeros(K)
        loss, _ = _loss_and_slope(v, wpos, wneg)
        return np.zeros(p), loss, 0.0, 0

    theta = np.zeros(2 * p)

    def unpack(th):
        e = np.exp(th - th.max())
        u = e / e.sum()
        return R * (u[:p] - u[p:])

    w = unpack(theta)
    v = F @ w
    loss, slope = _loss_and_slope(v, wpos, wneg)
    g = F.T @ slope
    gap = float(w @ g + R * np.abs(g).max())

    best_w, best_loss = w.copy(), loss
    w_sum = np.zeros(p)
    eta = 0.5
    it = 0
    for it in range(1, max_iters + 1):
        if gap <= gap_tol:
            break
        step = np.concatenate([g, -g]) * R
        accepted = False
        for _ in range(40):
            theta_try = theta - eta * step
            w_try = unpack(theta_try)
            v_try = F @ w_try
            loss_try, slope_try = _loss_and_slope(v_try, wpos, wneg)
            if loss_try <= loss:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        improved = loss - loss_try
        theta, w, v, loss, slope = theta_try, w_try, v_try, loss_try, slope_try
        g = F.T @ slope
        gap = float(w @ g + R * np.abs(g).max())
        w_sum += w
        if loss < best_loss:
            best_loss, best_w = loss, w.copy()
        if improved < rel_tol * max(1.0, abs(loss)):
            # zigzag near the optimum: shrink the step instead of stopping
            eta *= 0.5
            if eta < 1e-13:
                break
        else:
            eta = min(eta * 1.25, 1e4)

    # averaged iterates are the theory-friendly output; keep whichever of
    # the average and the best visited point has the lower empirical loss
    if it > 0 and w_sum.any():
        w_avg = w_sum / it
        loss_avg, _ = _loss_and_slope(F @ w_avg, wpos, wneg)
        if loss_avg < best_loss:
            best_loss, best_w = loss_avg, w_avg
    _, slope = _loss_and_slope(F @ best_w, wpos, wneg)
    g = F.T @ slope
    gap = float(best_w @ g + R * np.abs(g).max())
    return best_w, best_loss, gap, it
