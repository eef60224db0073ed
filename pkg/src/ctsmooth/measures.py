"""Association and symmetry measures as functions of the cell probabilities.

Two measures are provided:

* the generalized Cramer coefficient ``V(lambda)``, a power divergence
  between the joint table and the product of its marginals, normalized by
  a diversity of the row marginals (columns explanatory, rows response);
* the symmetry measure ``Phi(lambda)`` on square tables, a weighted
  average over cell pairs ``(i, j), (j, i)`` of how unevenly the pair's
  mass is split.

Both lie in [0, 1].  ``lambda = 0`` is evaluated through the closed-form
limits (Kullback-Leibler divergence and Shannon entropy).

Zero cells follow ``0 * log 0 = 0`` and ``0 * (0 / q)**lambda = 0``.  A
row marginal that is exactly zero contributes the limit of
``a**(1 - lambda)`` as ``a -> 0+`` to the normalizer: nothing for
``lambda < 1``, one for ``lambda = 1`` and an infinite normalizer
(``V = 0``) for ``lambda > 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._backend import CRAMER_V, SYMMETRY_PHI, kernels
from .errors import (
    AllDiagonalError,
    DegenerateMarginalsError,
    DivergenceUndefinedError,
    MeasureDomainError,
    NotSquareError,
)
from .tables import Dims, ProbTable


class MeasureKind(enum.Enum):
    CRAMER_V = "cramer-v"
    SYMMETRY_PHI = "symmetry-phi"

    @property
    def code(self) -> int:
        return CRAMER_V if self is MeasureKind.CRAMER_V else SYMMETRY_PHI


@dataclass(frozen=True)
class MeasureSpec:
    kind: MeasureKind
    lam: float = 1.0

    def __post_init__(self):
        kind = MeasureKind(self.kind)
        object.__setattr__(self, "kind", kind)
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise MeasureDomainError(f"lambda must be finite, got {lam}")
        if kind is MeasureKind.CRAMER_V and lam < 0:
            raise MeasureDomainError(f"Cramer coefficient needs lambda >= 0, got {lam}")
        if kind is MeasureKind.SYMMETRY_PHI and lam <= -1:
            raise MeasureDomainError(f"symmetry measure needs lambda > -1, got {lam}")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def cramer_v(cls, lam: float = 1.0) -> MeasureSpec:
        return cls(MeasureKind.CRAMER_V, lam)

    @classmethod
    def symmetry_phi(cls, lam: float = 1.0) -> MeasureSpec:
        return cls(MeasureKind.SYMMETRY_PHI, lam)

    def check_dims(self, dims: Dims) -> None:
        if self.kind is MeasureKind.SYMMETRY_PHI and not dims.square:
            raise NotSquareError()


def power_divergence(p: ProbTable, q: ProbTable, lam: float) -> float:
    """Cressie-Read power divergence ``I(lambda)(p; q)`` for ``lambda >= 0``.

    ``lambda = 0`` is the Kullback-Leibler divergence and ``lambda = 1``
    half the Pearson chi-squared discrepancy.  Accepts ProbTables or plain
    probability vectors.
    """
    pv = np.ravel(getattr(p, "probs", p)).astype(np.float64)
    qv = np.ravel(getattr(q, "probs", q)).astype(np.float64)
    if pv.shape != qv.shape:
        raise ValueError("p and q must have the same shape")
    if lam < 0:
        raise MeasureDomainError(f"power divergence needs lambda >= 0, got {lam}")
    pos = pv > 0
    if np.any(pos & (qv <= 0)):
        raise DivergenceUndefinedError("q has a zero cell where p is positive")
    ratio = pv[pos] / qv[pos]
    if lam == 0:
        val = float(np.sum(pv[pos] * np.log(ratio)))
    else:
        val = float(np.sum(pv[pos] * (ratio**lam - 1.0)) / (lam * (lam + 1.0)))
    return max(val, 0.0)


def cramer_v(p: ProbTable, lam: float = 1.0) -> float:
    """Generalized Cramer coefficient of ``p``.

    Raises DegenerateMarginalsError when fewer than two row marginals are
    nonzero (the normalizer vanishes).
    """
    spec = MeasureSpec.cramer_v(lam)
    v = kernels.cramer_v_values(p.as_matrix()[None], spec.lam)[0]
    if np.isnan(v):
        raise DegenerateMarginalsError()
    return float(v)


def symmetry_phi(p: ProbTable, lam: float = 1.0) -> float:
    """Degree of departure from symmetry of a square table ``p``.

    Pairs with ``p_ij + p_ji = 0`` carry zero weight.  Raises
    NotSquareError for rectangular tables and AllDiagonalError when every
    off-diagonal cell is zero.
    """
    spec = MeasureSpec.symmetry_phi(lam)
    spec.check_dims(p.dims)
    v = kernels.symmetry_phi_values(p.as_matrix()[None], spec.lam)[0]
    if np.isnan(v):
        raise AllDiagonalError()
    return float(v)


def measure_value(spec: MeasureSpec, p: ProbTable) -> float:
    spec.check_dims(p.dims)
    if spec.kind is MeasureKind.CRAMER_V:
        return cramer_v(p, spec.lam)
    return symmetry_phi(p, spec.lam)


def measure_values(spec: MeasureSpec, P: np.ndarray) -> np.ndarray:
    """Batched evaluation over a stack ``(m, r, c)``; undefined entries are NaN."""
    if spec.kind is MeasureKind.CRAMER_V:
        return kernels.cramer_v_values(P, spec.lam)
    if P.shape[1] != P.shape[2]:
        raise NotSquareError()
    return kernels.symmetry_phi_values(P, spec.lam)


def undefined_error(spec: MeasureSpec) -> MeasureDomainError:
    """The error a NaN from :func:`measure_values` stands for."""
    if spec.kind is MeasureKind.CRAMER_V:
        return DegenerateMarginalsError()
    return AllDiagonalError()
