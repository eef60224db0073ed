"""Derivatives of the measures and the MSE-optimal Dirichlet parameter.

For a measure ``f`` and a symmetric Dirichlet(alpha) posterior mean, the
alpha-dependent part of the MSE of ``f(p_hat(alpha))`` is, to order
``n**-2``::

    (a1 * alpha**2 - 2 * a2 * alpha) / n**2

with ``g`` and ``H`` the gradient and Hessian of ``f``, ``v = rc*p - 1``
and ``S = diag(p) - p p'``::

    a1 = (g'v)**2
    a2 = (g'v) tr(H S) / 2 + rc g'S g + v'H S g

so ``alpha* = a2 / a1``.  Derivatives are coordinatewise in the ambient
rc-dimensional space; ``S`` carries the simplex constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import kernels
from .errors import BoundaryPointError
from .measures import MeasureKind, MeasureSpec
from .tables import CountTable, ProbTable, smooth_counts

BOUNDARY_TOL = 1e-12
DEGENERATE_A1 = 1e-12
FALLBACK_ALPHA = 0.5


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class MseCoefficients:
    a1: float
    a2: float
    alpha_star: float | None
    clamped: bool = False

    @property
    def degenerate(self) -> bool:
        return self.alpha_star is None


def singular_mask(spec: MeasureSpec, P: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
    """Tables in the stack ``P`` at which the derivatives of ``spec`` diverge.

    Zero cells alone are harmless once ``lambda >= 1``: the partials stay
    finite.  Empty rows or columns (Cramer) and ``delta = 0`` (symmetry)
    are always singular.  An empty off-diagonal pair is not: the pair
    weight is flat along the symmetric direction and its cells drop out
    of every covariance-weighted term.
    """
    P = np.asarray(P, dtype=np.float64)
    m = P.shape[0]
    if spec.kind is MeasureKind.CRAMER_V:
        bad = (P.sum(axis=2) <= tol).any(axis=1) | (P.sum(axis=1) <= tol).any(axis=1)
        if spec.lam < 1:
            bad |= (P.reshape(m, -1) <= tol).any(axis=1)
        return bad
    iu, ju = np.triu_indices(P.shape[1], 1)
    x = P[:, iu, ju]
    y = P[:, ju, iu]
    s = x + y
    bad = s.sum(axis=1) <= tol
    if spec.lam < 1:
        live = s > tol
        bad |= (live & ((x <= tol) | (y <= tol))).any(axis=1)
    return bad


def finite_difference_derivatives(func: Callable[[np.ndarray], float], x, grad_step=1e-5, hess_step=1e-4) -> DerivativeBundle:
    """Central-difference gradient and Hessian of a scalar function.

    Kept independent of the analytic kernels so it can serve as their
    oracle.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    k = x.size
    f0 = float(func(x))
    grad = np.empty(k)
    hess = np.empty((k, k))
    e = np.eye(k)
    h = grad_step
    for i in range(k):
        grad[i] = (func(x + h * e[i]) - func(x - h * e[i])) / (2 * h)
    h = hess_step
    for i in range(k):
        for j in range(i, k):
            fpp = func(x + h * e[i] + h * e[j])
            fpm = func(x + h * e[i] - h * e[j])
            fmp = func(x - h * e[i] + h * e[j])
            fmm = func(x - h * e[i] - h * e[j])
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    return DerivativeBundle(f0, grad, hess)


def raw_measure(spec: MeasureSpec, dims) -> Callable[[np.ndarray], float]:
    """The measure as a function of an unconstrained flat vector.

    No renormalization and no [0, 1] clipping, so finite differences see
    exactly the function the analytic derivatives differentiate.
    """
    r, c = dims.r, dims.c
    lam = spec.lam

    def cramer(x):
        P = x.reshape(r, c)
        a = P.sum(axis=1)
        b = P.sum(axis=0)
        if lam == 0:
            return (P * np.log(P / np.outer(a, b))).sum() / -(a * np.log(a)).sum()
        num = (P ** (lam + 1) * np.outer(a, b) ** -lam).sum() - P.sum()
        return num / ((a ** (1 - lam)).sum() - 1.0)

    def phi(x):
        P = x.reshape(r, r)
        iu, ju = np.triu_indices(r, 1)
        u, w = P[iu, ju], P[ju, iu]
        s = u + w
        if lam == 0:
            wt = s + (u * np.log(u) + w * np.log(w) - s * np.log(s)) / np.log(2.0)
        else:
            kappa = 2.0**lam / (2.0**lam - 1.0)
            wt = (1 - kappa) * s + kappa * (u ** (lam + 1) + w ** (lam + 1)) * s**-lam
        return wt.sum() / s.sum()

    return cramer if spec.kind is MeasureKind.CRAMER_V else phi


def derivatives(f: MeasureSpec | Callable, p: ProbTable) -> DerivativeBundle:
    """Value, gradient and Hessian of a measure at ``p``.

    ``f`` is a :class:`MeasureSpec` (analytic path) or any callable on the
    flat probability vector, which is differentiated by central finite
    differences.  The callable form is the engine's test hook.
    """
    if not isinstance(f, MeasureSpec):
        return finite_difference_derivatives(f, p.probs)
    f.check_dims(p.dims)
    P = p.as_matrix()[None]
    if singular_mask(f, P)[0]:
        raise BoundaryPointError("derivatives diverge at this table (boundary point)")
    val, g, H = kernels.derivatives_batch(f.kind.code, P, f.lam)
    return DerivativeBundle(float(val[0]), g[0], H[0])


def trace_form_coefficients(p: np.ndarray, g: np.ndarray, H: np.ndarray) -> tuple[float, float]:
    """``(a1, a2)`` written out with explicit matrices and traces."""
    p = np.asarray(p, dtype=np.float64).ravel()
    k = p.size
    v = k * p - 1.0
    S = np.diag(p) - np.outer(p, p)
    gcol = g[:, None]
    a1 = np.trace(gcol @ gcol.T @ np.outer(v, v))
    a2 = (
        0.5 * float(v @ g) * np.trace(H @ S)
        + k * np.trace(gcol @ gcol.T @ S)
        + np.trace(gcol @ v[None, :] @ H @ S)
    )
    return float(a1), float(a2)


def resolve_alpha(a1, a2, alpha_max=np.inf):
    """Vectorized ``clip(a2 / a1, 0, alpha_max)`` with the degenerate fallback.

    Returns ``(alpha, clamped, degenerate)``.  Degenerate means ``a1`` is
    at most 1e-12 or not finite; alpha is then 0.
    """
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    alpha_max = np.asarray(alpha_max, dtype=np.float64)
    degenerate = ~(np.isfinite(a1) & np.isfinite(a2)) | (a1 <= DEGENERATE_A1)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(degenerate, 0.0, a2 / np.where(degenerate, 1.0, a1))
    alpha = np.clip(raw, 0.0, alpha_max)
    clamped = ~degenerate & (alpha != raw)
    return alpha, clamped, degenerate


def _coefficients(a1: float, a2: float, alpha_max: float) -> MseCoefficients:
    alpha, clamped, degenerate = resolve_alpha(a1, a2, alpha_max)
    return MseCoefficients(
        float(a1), float(a2), None if degenerate else float(alpha), bool(clamped)
    )


def mse_coefficients(f: MeasureSpec | Callable, p: ProbTable, alpha_max: float = np.inf) -> MseCoefficients:
    """Coefficients of the alpha-dependent MSE term at ``p`` and the minimizer."""
    if not isinstance(f, MeasureSpec):
        bundle = derivatives(f, p)
        return _coefficients(*trace_form_coefficients(p.probs, bundle.gradient, bundle.hessian), alpha_max)
    f.check_dims(p.dims)
    P = p.as_matrix()[None]
    if singular_mask(f, P)[0]:
        raise BoundaryPointError("derivatives diverge at this table (boundary point)")
    a1, a2 = kernels.mse_coefficients_batch(f.kind.code, P, f.lam)
    return _coefficients(a1[0], a2[0], alpha_max)


@dataclass(frozen=True)
class OptimalAlphaBatch:
    alpha: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    clamped: np.ndarray
    degenerate: np.ndarray
    smoothed_point: np.ndarray


def default_alpha_max(n, k):
    return np.asarray(n, dtype=np.float64) / k


def optimal_alpha_batch(spec: MeasureSpec, counts: np.ndarray, alpha_max=None) -> OptimalAlphaBatch:
    """Plug-in ``a2_hat / a1_hat`` for a stack of count tables ``(m, r, c)``.

    The coefficients are evaluated at the sample proportions, or at the
    Jeffreys-smoothed table (alpha = 1/2) where the derivatives diverge at
    the sample proportions.  The cap defaults to ``n / (rc)`` per table.
    """
    counts = np.asarray(counts)
    m, r, c = counts.shape
    k = r * c
    flat = counts.reshape(m, k)
    n = flat.sum(axis=1)
    P = smooth_counts(flat, 0.0).reshape(m, r, c)
    bad = singular_mask(spec, P)
    if bad.any():
        P[bad] = smooth_counts(flat[bad], FALLBACK_ALPHA).reshape(-1, r, c)
    a1, a2 = kernels.mse_coefficients_batch(spec.kind.code, P, spec.lam)
    cap = default_alpha_max(n, k) if alpha_max is None else alpha_max
    alpha, clamped, degenerate = resolve_alpha(a1, a2, cap)
    return OptimalAlphaBatch(alpha, a1, a2, clamped, degenerate, bad)


def optimal_alpha(spec: MeasureSpec, t: CountTable, alpha_max: float | None = None) -> float:
    spec.check_dims(t.dims)
    return float(optimal_alpha_batch(spec, t.as_matrix()[None], alpha_max).alpha[0])
