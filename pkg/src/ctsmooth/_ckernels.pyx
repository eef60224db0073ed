# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the batched kernels in ``_kernels_py``.

Same signatures and conventions; each table is processed by a C loop with
the GIL released, so callers may fan batches out over threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, pow, INFINITY, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double LN2 = 0.6931471805599453

CRAMER_V = 0
SYMMETRY_PHI = 1


cdef inline double _clip01(double v) noexcept nogil:
    if v != v:
        return v
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


cdef double _cramer_v_one(const double* p, int r, int c, double lam, double* a, double* b) noexcept nogil:
    cdef int i, j, nrows = 0
    cdef double pij, I = 0.0, K = 0.0, T = 0.0, S = 0.0, A = 0.0, scale
    for i in range(r):
        a[i] = 0.0
    for j in range(c):
        b[j] = 0.0
    for i in range(r):
        for j in range(c):
            pij = p[i * c + j]
            a[i] += pij
            b[j] += pij
    for i in range(r):
        if a[i] > 0:
            nrows += 1
    if nrows < 2:
        return NAN
    if lam == 0:
        for i in range(r):
            for j in range(c):
                pij = p[i * c + j]
                if pij > 0:
                    I += pij * log(pij / (a[i] * b[j]))
            if a[i] > 0:
                K -= a[i] * log(a[i])
        return _clip01(I / K)
    scale = 1.0 / (lam * (lam + 1.0))
    for i in range(r):
        for j in range(c):
            pij = p[i * c + j]
            S += pij
            if pij > 0:
                T += pij * pow(pij / (a[i] * b[j]), lam)
        if a[i] > 0:
            A += pow(a[i], 1.0 - lam)
        elif lam == 1:
            A += 1.0
        elif lam > 1:
            A = INFINITY
    I = scale * (T - S)
    K = scale * (A - 1.0)
    return _clip01(I / K)


def cramer_v_values(P, double lam):
    cdef const double[:, :, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pv.shape[0], t
    cdef int r = <int>Pv.shape[1], c = <int>Pv.shape[2]
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double* work = <double*>malloc((r + c) * sizeof(double))
    try:
        with nogil:
            for t in range(m):
                ov[t] = _cramer_v_one(&Pv[t, 0, 0], r, c, lam, work, work + r)
    finally:
        free(work)
    return out


cdef inline double _powq(double x, double lam) noexcept nogil:
    if lam == 1:
        return x * x
    return pow(x, lam + 1.0)


cdef inline double _pair_weight(double x, double y, double lam, double kappa) noexcept nogil:
    cdef double s = x + y, xc, yc, H
    if s <= 0:
        return 0.0
    xc = x / s
    yc = y / s
    if lam == 0:
        H = 0.0
        if xc > 0:
            H -= xc * log(xc)
        if yc > 0:
            H -= yc * log(yc)
        return s * (1.0 - H / LN2)
    return s * (1.0 - kappa * (1.0 - _powq(xc, lam) - _powq(yc, lam)))


cdef double _symmetry_phi_one(const double* p, int r, double lam) noexcept nogil:
    cdef int i, j
    cdef double x, y, W = 0.0, delta = 0.0, kappa = 0.0
    if lam != 0:
        kappa = pow(2.0, lam) / (pow(2.0, lam) - 1.0)
    for i in range(r):
        for j in range(i + 1, r):
            x = p[i * r + j]
            y = p[j * r + i]
            delta += x + y
            W += _pair_weight(x, y, lam, kappa)
    if delta <= 0:
        return NAN
    return _clip01(W / delta)


def symmetry_phi_values(P, double lam):
    cdef const double[:, :, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pv.shape[0], t
    cdef int r = <int>Pv.shape[1]
    out = np.empty(m)
    cdef double[::1] ov = out
    with nogil:
        for t in range(m):
            ov[t] = _symmetry_phi_one(&Pv[t, 0, 0], r, lam)
    return out


cdef void _quotient(int k, double N, double D, double* g, double* H,
                    const double* gD, const double* HD, double* f) noexcept nogil:
    """In place: (N, g=gN, H=HN) -> derivatives of N/D."""
    cdef int u, v
    cdef double fv = N / D
    f[0] = fv
    for u in range(k):
        g[u] = (g[u] - fv * gD[u]) / D
    for u in range(k):
        for v in range(k):
            H[u * k + v] = (H[u * k + v] - fv * HD[u * k + v]
                            - g[u] * gD[v] - gD[u] * g[v]) / D


cdef void _cramer_v_derivs(const double* p, int r, int c, double lam,
                           double* f, double* g, double* H, double* w) noexcept nogil:
    cdef int k = r * c, i, j, i2, j2, u, v
    cdef double* a = w
    cdef double* b = a + r
    cdef double* R = b + c
    cdef double* C = R + r
    cdef double* t = C + c
    cdef double* t1 = t + k
    cdef double* t2 = t1 + k
    cdef double* gD = t2 + k
    cdef double* HD = gD + k
    cdef double q = lam + 1.0, N = 0.0, D = 0.0, pij, ab, hpa_u, hpa_v, hpb_u, hpb_v, h
    for i in range(r):
        a[i] = 0.0
        R[i] = 0.0
    for j in range(c):
        b[j] = 0.0
        C[j] = 0.0
    for i in range(r):
        for j in range(c):
            a[i] += p[i * c + j]
            b[j] += p[i * c + j]
    for u in range(k * k):
        HD[u] = 0.0

    if lam == 0:
        for i in range(r):
            D -= a[i] * log(a[i])
            N -= a[i] * log(a[i])
        for j in range(c):
            N -= b[j] * log(b[j])
        for i in range(r):
            for j in range(c):
                u = i * c + j
                pij = p[u]
                N += pij * log(pij)
                g[u] = log(pij) - log(a[i]) - log(b[j]) - 1.0
                gD[u] = -(log(a[i]) + 1.0)
        for u in range(k):
            i = u // c
            j = u % c
            for v in range(k):
                i2 = v // c
                j2 = v % c
                h = 0.0
                if u == v:
                    h += 1.0 / p[u]
                if i == i2:
                    h -= 1.0 / a[i]
                    HD[u * k + v] = -1.0 / a[i]
                if j == j2:
                    h -= 1.0 / b[j]
                H[u * k + v] = h
    else:
        for i in range(r):
            for j in range(c):
                u = i * c + j
                pij = p[u]
                ab = pow(a[i] * b[j], -lam)
                t1[u] = pow(pij, lam) * ab
                t2[u] = ab if lam == 1 else pow(pij, lam - 1.0) * ab
                t[u] = pij * t1[u]
                R[i] += t[u]
                C[j] += t[u]
                N += t[u] - pij
        for i in range(r):
            D += pow(a[i], 1.0 - lam)
        D -= 1.0
        for u in range(k):
            i = u // c
            j = u % c
            g[u] = q * t1[u] - 1.0 - lam * R[i] / a[i] - lam * C[j] / b[j]
            gD[u] = (1.0 - lam) * pow(a[i], -lam)
            hpa_u = -q * lam * t1[u] / a[i]
            hpb_u = -q * lam * t1[u] / b[j]
            for v in range(k):
                i2 = v // c
                j2 = v % c
                h = lam * lam * (t[i * c + j2] / (a[i] * b[j2]) + t[i2 * c + j] / (a[i2] * b[j]))
                if u == v:
                    h += q * lam * t2[u]
                if i == i2:
                    hpa_v = -q * lam * t1[v] / a[i]
                    h += hpa_u + hpa_v + lam * q * R[i] / (a[i] * a[i])
                    HD[u * k + v] = -lam * (1.0 - lam) * pow(a[i], -lam - 1.0)
                if j == j2:
                    hpb_v = -q * lam * t1[v] / b[j]
                    h += hpb_u + hpb_v + lam * q * C[j] / (b[j] * b[j])
                H[u * k + v] = h
    _quotient(k, N, D, g, H, gD, HD, f)


cdef void _pair_partials(double x, double y, double lam, double* out) noexcept nogil:
    cdef double s = x + y, q, kappa, uu, sl, sl1, sl2, xl, yl, xl1, yl1, common
    if s <= 0:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
        out[3] = 0.0
        out[4] = 0.0
        return
    if lam == 0:
        out[0] = 1.0 + (log(x) - log(s)) / LN2
        out[1] = 1.0 + (log(y) - log(s)) / LN2
        out[2] = (1.0 / x - 1.0 / s) / LN2
        out[3] = (1.0 / y - 1.0 / s) / LN2
        out[4] = -1.0 / (s * LN2)
        return
    q = lam + 1.0
    kappa = pow(2.0, lam) / (pow(2.0, lam) - 1.0)
    uu = pow(x, q) + pow(y, q)
    sl = pow(s, -lam)
    sl1 = sl / s
    sl2 = sl1 / s
    xl = pow(x, lam)
    yl = pow(y, lam)
    if lam == 1:
        xl1 = 1.0
        yl1 = 1.0
    else:
        xl1 = pow(x, lam - 1.0)
        yl1 = pow(y, lam - 1.0)
    common = lam * q * uu * sl2
    out[0] = (1.0 - kappa) + kappa * (q * xl * sl - lam * uu * sl1)
    out[1] = (1.0 - kappa) + kappa * (q * yl * sl - lam * uu * sl1)
    out[2] = kappa * (q * lam * xl1 * sl - 2.0 * q * lam * xl * sl1 + common)
    out[3] = kappa * (q * lam * yl1 * sl - 2.0 * q * lam * yl * sl1 + common)
    out[4] = kappa * (-q * lam * (xl + yl) * sl1 + common)


cdef void _symmetry_phi_derivs(const double* p, int r, double lam,
                               double* f, double* g, double* H, double* w) noexcept nogil:
    cdef int k = r * r, i, j, u, v, fi, fj
    cdef double* gD = w
    cdef double* HD = w + k
    cdef double W = 0.0, delta = 0.0, x, y, kappa = 0.0
    cdef double d[5]
    if lam != 0:
        kappa = pow(2.0, lam) / (pow(2.0, lam) - 1.0)
    for u in range(k):
        g[u] = 0.0
        gD[u] = 0.0
    for u in range(k * k):
        H[u] = 0.0
        HD[u] = 0.0
    for i in range(r):
        for j in range(i + 1, r):
            fi = i * r + j
            fj = j * r + i
            x = p[fi]
            y = p[fj]
            W += _pair_weight(x, y, lam, kappa)
            delta += x + y
            _pair_partials(x, y, lam, d)
            g[fi] = d[0]
            g[fj] = d[1]
            H[fi * k + fi] = d[2]
            H[fj * k + fj] = d[3]
            H[fi * k + fj] = d[4]
            H[fj * k + fi] = d[4]
            gD[fi] = 1.0
            gD[fj] = 1.0
    _quotient(k, W, delta, g, H, gD, HD, f)


cdef inline Py_ssize_t _work_size(int kind, int r, int c) noexcept nogil:
    cdef int k = r * c
    if kind == 0:
        return 2 * (r + c) + 4 * k + k * k
    return k + k * k


cdef inline void _derivs(int kind, const double* p, int r, int c, double lam,
                         double* f, double* g, double* H, double* w) noexcept nogil:
    if kind == 0:
        _cramer_v_derivs(p, r, c, lam, f, g, H, w)
    else:
        _symmetry_phi_derivs(p, r, lam, f, g, H, w)


def derivatives_batch(int kind, P, double lam):
    cdef const double[:, :, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pv.shape[0], t
    cdef int r = <int>Pv.shape[1], c = <int>Pv.shape[2], k = r * c
    fo = np.empty(m)
    go = np.empty((m, k))
    Ho = np.empty((m, k, k))
    cdef double[::1] fv = fo
    cdef double[:, ::1] gv = go
    cdef double[:, :, ::1] Hv = Ho
    cdef double* w = <double*>malloc(_work_size(kind, r, c) * sizeof(double))
    try:
        with nogil:
            for t in range(m):
                _derivs(kind, &Pv[t, 0, 0], r, c, lam, &fv[t], &gv[t, 0], &Hv[t, 0, 0], w)
    finally:
        free(w)
    return fo, go, Ho


cdef void _mse_one(int k, const double* p, const double* g, const double* H,
                   double* sg, double* a1, double* a2) noexcept nogil:
    cdef int u, v
    cdef double gv = 0.0, pg = 0.0, tr_hs = 0.0, php = 0.0, gsg = 0.0, vhsg = 0.0
    cdef double row, vu
    for u in range(k):
        gv += g[u] * (k * p[u] - 1.0)
        pg += p[u] * g[u]
    for u in range(k):
        sg[u] = p[u] * g[u] - p[u] * pg
        gsg += p[u] * g[u] * g[u]
    gsg -= pg * pg
    for u in range(k):
        tr_hs += H[u * k + u] * p[u]
        vu = k * p[u] - 1.0
        row = 0.0
        for v in range(k):
            php += p[u] * H[u * k + v] * p[v]
            row += H[u * k + v] * sg[v]
        vhsg += vu * row
    tr_hs -= php
    a1[0] = gv * gv
    a2[0] = 0.5 * gv * tr_hs + k * gsg + vhsg


def mse_coefficients_batch(int kind, P, double lam):
    cdef const double[:, :, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pv.shape[0], t
    cdef int r = <int>Pv.shape[1], c = <int>Pv.shape[2], k = r * c
    a1o = np.empty(m)
    a2o = np.empty(m)
    cdef double[::1] a1v = a1o
    cdef double[::1] a2v = a2o
    cdef double f
    cdef double* w = <double*>malloc((_work_size(kind, r, c) + 2 * k + k * k) * sizeof(double))
    cdef double* g = w + _work_size(kind, r, c)
    cdef double* sg = g + k
    cdef double* H = sg + k
    try:
        with nogil:
            for t in range(m):
                _derivs(kind, &Pv[t, 0, 0], r, c, lam, &f, g, H, w)
                _mse_one(k, &Pv[t, 0, 0], g, H, sg, &a1v[t], &a2v[t])
    finally:
        free(w)
    return a1o, a2o
