"""Pure numpy implementation of the batched hot kernels.

Every function takes a stack of tables ``P`` with shape ``(m, r, c)`` and
works on all ``m`` at once.  The compiled module ``_ckernels`` exposes the
same functions with the same signatures; :mod:`ctsmooth._backend` picks
one at import time.

Undefined measure values come back as NaN.  Derivative kernels return
non-finite entries at singular points (see ``calculus.singular_mask``);
callers check before trusting them.
"""

import math

import numpy as np

CRAMER_V = 0
SYMMETRY_PHI = 1

LN2 = math.log(2.0)


def _empty_row_term(lam):
    """Limit of a**(1 - lam) as a row marginal a -> 0+."""
    if lam < 1:
        return 0.0
    return 1.0 if lam == 1 else np.inf


def cramer_v_values(P, lam):
    P = np.ascontiguousarray(P, dtype=np.float64)
    m, r, c = P.shape
    a = P.sum(axis=2)
    b = P.sum(axis=1)
    pos = P > 0
    apos = a > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pos, P / (a[:, :, None] * b[:, None, :]), 1.0)
        if lam == 0:
            I = np.where(pos, P * np.log(ratio), 0.0).sum(axis=(1, 2))
            K = -np.where(apos, a * np.log(np.where(apos, a, 1.0)), 0.0).sum(axis=1)
        else:
            scale = 1.0 / (lam * (lam + 1.0))
            T = np.where(pos, P * ratio**lam, 0.0).sum(axis=(1, 2))
            S = P.sum(axis=(1, 2))
            I = scale * (T - S)
            A = np.where(apos, np.where(apos, a, 1.0) ** (1.0 - lam), _empty_row_term(lam)).sum(axis=1)
            K = scale * (A - 1.0)
        out = I / K
    out[apos.sum(axis=1) < 2] = np.nan
    return np.clip(out, 0.0, 1.0)


def _pair_weights(x, y, lam):
    """Per-pair contribution ``(x + y) * phi`` with zero-mass pairs giving 0."""
    s = x + y
    pos = s > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ss = np.where(pos, s, 1.0)
        xc = x / ss
        yc = y / ss
        if lam == 0:
            H = -(np.where(xc > 0, xc * np.log(np.where(xc > 0, xc, 1.0)), 0.0)
                  + np.where(yc > 0, yc * np.log(np.where(yc > 0, yc, 1.0)), 0.0))
            phi = 1.0 - H / LN2
        else:
            kappa = 2.0**lam / (2.0**lam - 1.0)
            phi = 1.0 - kappa * (1.0 - xc ** (lam + 1.0) - yc ** (lam + 1.0))
    return np.where(pos, s * phi, 0.0)


def symmetry_phi_values(P, lam):
    P = np.ascontiguousarray(P, dtype=np.float64)
    m, r, c = P.shape
    iu, ju = np.triu_indices(r, 1)
    x = P[:, iu, ju]
    y = P[:, ju, iu]
    delta = (x + y).sum(axis=1)
    W = _pair_weights(x, y, lam).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = W / delta
    out[delta <= 0] = np.nan
    return np.clip(out, 0.0, 1.0)


def _selection_matrix(r, c):
    """Jacobian of (p, row sums, col sums) with respect to p."""
    k = r * c
    J = np.zeros((k + r + c, k))
    J[:k] = np.eye(k)
    for i in range(r):
        for j in range(c):
            J[k + i, i * c + j] = 1.0
            J[k + r + j, i * c + j] = 1.0
    return J


def _quotient(N, gN, HN, D, gD, HD):
    f = N / D
    g = (gN - f[:, None] * gD) / D[:, None]
    H = HN - f[:, None, None] * HD
    H -= g[:, :, None] * gD[:, None, :] + gD[:, :, None] * g[:, None, :]
    H /= D[:, None, None]
    return f, g, H


def _cramer_v_derivatives(P, lam):
    m, r, c = P.shape
    k = r * c
    nz = k + r + c
    a = P.sum(axis=2)
    b = P.sum(axis=1)
    pa = slice(k, k + r)
    pb = slice(k + r, nz)
    ip = np.arange(k)
    ia = np.arange(k, k + r)
    ib = np.arange(k + r, nz)
    rows = np.repeat(np.arange(r), c)
    cols = np.tile(np.arange(c), r)

    gN = np.zeros((m, nz))
    HN = np.zeros((m, nz, nz))
    gD = np.zeros((m, nz))
    HD = np.zeros((m, nz, nz))
    pf = P.reshape(m, k)
    if lam == 0:
        la = np.log(a)
        lb = np.log(b)
        N = (pf * np.log(pf)).sum(axis=1) - (a * la).sum(axis=1) - (b * lb).sum(axis=1)
        D = -(a * la).sum(axis=1)
        gN[:, :k] = np.log(pf) + 1.0
        gN[:, pa] = -(la + 1.0)
        gN[:, pb] = -(lb + 1.0)
        HN[:, ip, ip] = 1.0 / pf
        HN[:, ia, ia] = -1.0 / a
        HN[:, ib, ib] = -1.0 / b
        gD[:, pa] = -(la + 1.0)
        HD[:, ia, ia] = -1.0 / a
    else:
        q = lam + 1.0
        # powers of p kept separate so zero cells stay finite when lam >= 1
        ab = (a[:, rows] * b[:, cols]) ** -lam
        t1 = pf**lam * ab
        t2 = pf ** (lam - 1.0) * ab if lam != 1 else ab
        t = pf * t1
        t3 = t.reshape(m, r, c)
        R = t3.sum(axis=2)
        C = t3.sum(axis=1)
        N = t.sum(axis=1) - pf.sum(axis=1)
        D = (a ** (1.0 - lam)).sum(axis=1) - 1.0
        gN[:, :k] = q * t1 - 1.0
        gN[:, pa] = -lam * R / a
        gN[:, pb] = -lam * C / b
        HN[:, ip, ip] = q * lam * t2
        cross_a = -q * lam * t1 / a[:, rows]
        cross_b = -q * lam * t1 / b[:, cols]
        HN[:, ip, k + rows] = cross_a
        HN[:, k + rows, ip] = cross_a
        HN[:, ip, k + r + cols] = cross_b
        HN[:, k + r + cols, ip] = cross_b
        HN[:, ia, ia] = lam * q * R / a**2
        HN[:, ib, ib] = lam * q * C / b**2
        hab = lam**2 * t / (a[:, rows] * b[:, cols])
        HN[:, k + rows, k + r + cols] = hab
        HN[:, k + r + cols, k + rows] = hab
        gD[:, pa] = (1.0 - lam) * a**-lam
        HD[:, ia, ia] = -lam * (1.0 - lam) * a ** (-lam - 1.0)

    J = _selection_matrix(r, c)
    JT = J.T
    return _quotient(N, gN @ J, JT @ HN @ J, D, gD @ J, JT @ HD @ J)


def _pair_partials(x, y, lam):
    """First and second partials of the pair weight w(x, y)."""
    s = x + y
    if lam == 0:
        ls = np.log(s)
        wx = 1.0 + (np.log(x) - ls) / LN2
        wy = 1.0 + (np.log(y) - ls) / LN2
        wxx = (1.0 / x - 1.0 / s) / LN2
        wyy = (1.0 / y - 1.0 / s) / LN2
        wxy = -1.0 / (s * LN2)
        return wx, wy, wxx, wyy, wxy
    q = lam + 1.0
    kappa = 2.0**lam / (2.0**lam - 1.0)
    u = x**q + y**q
    sl = s**-lam
    sl1 = sl / s
    sl2 = sl1 / s
    xl = x**lam
    yl = y**lam
    xl1 = x ** (lam - 1.0) if lam != 1 else np.ones_like(x)
    yl1 = y ** (lam - 1.0) if lam != 1 else np.ones_like(y)
    wx = (1.0 - kappa) + kappa * (q * xl * sl - lam * u * sl1)
    wy = (1.0 - kappa) + kappa * (q * yl * sl - lam * u * sl1)
    common = lam * q * u * sl2
    wxx = kappa * (q * lam * xl1 * sl - 2.0 * q * lam * xl * sl1 + common)
    wyy = kappa * (q * lam * yl1 * sl - 2.0 * q * lam * yl * sl1 + common)
    wxy = kappa * (-q * lam * (xl + yl) * sl1 + common)
    return wx, wy, wxx, wyy, wxy


def _symmetry_phi_derivatives(P, lam):
    m, r, _ = P.shape
    k = r * r
    iu, ju = np.triu_indices(r, 1)
    fi = iu * r + ju
    fj = ju * r + iu
    x = P[:, iu, ju]
    y = P[:, ju, iu]
    W = _pair_weights(x, y, lam).sum(axis=1)
    delta = (x + y).sum(axis=1)
    # an empty pair is flat along the symmetric direction the smoothing path
    # takes, and its cells carry zero weight in every covariance contraction
    empty = (x + y) == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        partials = _pair_partials(np.where(empty, 1.0, x), np.where(empty, 1.0, y), lam)
    wx, wy, wxx, wyy, wxy = (np.where(empty, 0.0, d) for d in partials)

    gW = np.zeros((m, k))
    HW = np.zeros((m, k, k))
    gW[:, fi] = wx
    gW[:, fj] = wy
    HW[:, fi, fi] = wxx
    HW[:, fj, fj] = wyy
    HW[:, fi, fj] = wxy
    HW[:, fj, fi] = wxy
    gd = np.zeros((m, k))
    gd[:, fi] = 1.0
    gd[:, fj] = 1.0
    return _quotient(W, gW, HW, delta, gd, np.zeros((m, k, k)))


def derivatives_batch(kind, P, lam):
    """Value, gradient ``(m, k)`` and Hessian ``(m, k, k)`` per table."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == CRAMER_V:
            return _cramer_v_derivatives(P, lam)
        return _symmetry_phi_derivatives(P, lam)


def mse_coefficients_batch(kind, P, lam):
    """Asymptotic MSE coefficients ``(a1, a2)`` per table."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    m = P.shape[0]
    k = P.shape[1] * P.shape[2]
    _, g, H = derivatives_batch(kind, P, lam)
    with np.errstate(invalid="ignore", over="ignore"):
        p = P.reshape(m, k)
        v = k * p - 1.0
        gv = (g * v).sum(axis=1)
        pg = (p * g).sum(axis=1)
        Hp = np.einsum("mij,mj->mi", H, p)
        tr_hs = np.einsum("mii,mi->m", H, p) - (p * Hp).sum(axis=1)
        gsg = (p * g * g).sum(axis=1) - pg**2
        sg = p * g - p * pg[:, None]
        vhsg = np.einsum("mi,mij,mj->m", v, H, sg)
        a1 = gv * gv
        a2 = 0.5 * gv * tr_hs + k * gsg + vhsg
    return a1, a2
