"""Contingency-table types, CSV parsing and Dirichlet smoothing.

Tables are stored flattened in row-major order, ``p11, p12, ..., p1c,
p21, ..., prc``.  Every gradient and Hessian in :mod:`ctsmooth.calculus`
is indexed the same way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroTableError,
    NegativeAlphaError,
    RaggedRowsError,
    SumOutOfToleranceError,
    TableError,
)

PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Dims:
    r: int
    c: int

    def __post_init__(self):
        if self.r < 2 or self.c < 2:
            raise TableError(f"table must have at least 2 rows and 2 columns, got {self.r}x{self.c}")

    @property
    def k(self) -> int:
        return self.r * self.c

    @property
    def square(self) -> bool:
        return self.r == self.c


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CountTable:
    """Observed r x c table of nonnegative integer counts."""

    dims: Dims
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).ravel()
        if counts.size != self.dims.k:
            raise TableError(f"expected {self.dims.k} counts, got {counts.size}")
        if np.any(counts < 0):
            raise TableError("counts must be nonnegative")
        if counts.sum() < 1:
            raise AllZeroTableError("table has no observations (n = 0)")
        object.__setattr__(self, "counts", _frozen(counts))

    @classmethod
    def from_array(cls, arr) -> CountTable:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise TableError("count table must be two-dimensional")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise TableError("counts must be integers")
        return cls(Dims(*arr.shape), arr.astype(np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def r(self) -> int:
        return self.dims.r

    @property
    def c(self) -> int:
        return self.dims.c

    def as_matrix(self) -> np.ndarray:
        return self.counts.reshape(self.dims.r, self.dims.c)

    def to_csv(self) -> str:
        return "".join(",".join(str(int(v)) for v in row) + "\n" for row in self.as_matrix())

    def to_json(self) -> dict:
        return {"r": self.r, "c": self.c, "counts": [int(v) for v in self.counts]}

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.counts, other.counts)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Cell probabilities of an r x c table, renormalized to sum to one."""

    dims: Dims
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).ravel()
        if probs.size != self.dims.k:
            raise TableError(f"expected {self.dims.k} probabilities, got {probs.size}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise TableError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise SumOutOfToleranceError(f"probabilities sum to {total!r}, not 1")
        # sub-1e-13 drift is float rounding from an exact construction; leave it
        if abs(total - 1.0) > 1e-13:
            probs = probs / total
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def from_array(cls, arr) -> ProbTable:
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise TableError("probability table must be two-dimensional")
        return cls(Dims(*arr.shape), arr)

    @property
    def r(self) -> int:
        return self.dims.r

    @property
    def c(self) -> int:
        return self.dims.c

    def as_matrix(self) -> np.ndarray:
        return self.probs.reshape(self.dims.r, self.dims.c)

    @property
    def row_marginals(self) -> np.ndarray:
        return self.as_matrix().sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.as_matrix().sum(axis=0)

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in self.as_matrix())

    def to_json(self) -> dict:
        return {"r": self.r, "c": self.c, "probs": [float(v) for v in self.probs]}

    def __eq__(self, other):
        if not isinstance(other, ProbTable):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.probs, other.probs)

    __hash__ = None


def _parse_grid(text: str) -> list[list[str]]:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise TableError("empty table")
    grid = [[cell.strip() for cell in ln.split(",")] for ln in lines]
    width = len(grid[0])
    for i, row in enumerate(grid):
        if len(row) != width:
            raise RaggedRowsError(f"row {i + 1} has {len(row)} entries, expected {width}")
    if len(grid) < 2 or width < 2:
        raise TableError(f"table must have at least 2 rows and 2 columns, got {len(grid)}x{width}")
    return grid


def parse_count_table(text: str) -> CountTable:
    """Parse headerless CSV of nonnegative integer counts.

    >>> parse_count_table("1,2\\n3,4").n
    10
    """
    grid = _parse_grid(text)
    values = []
    for row in grid:
        for cell in row:
            try:
                v = int(cell)
            except ValueError:
                raise TableError(f"not an integer count: {cell!r}") from None
            if v < 0:
                raise TableError(f"negative count: {v}")
            values.append(v)
    return CountTable(Dims(len(grid), len(grid[0])), np.array(values, dtype=np.int64))


def parse_prob_table(text: str) -> ProbTable:
    grid = _parse_grid(text)
    try:
        values = [float(cell) for row in grid for cell in row]
    except ValueError as exc:
        raise TableError(f"not a number: {exc}") from None
    return ProbTable(Dims(len(grid), len(grid[0])), np.array(values))


def table_from_json(obj: dict | str) -> CountTable | ProbTable:
    """Inverse of ``to_json`` for either table type."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    dims = Dims(int(obj["r"]), int(obj["c"]))
    if "counts" in obj:
        return CountTable(dims, np.array(obj["counts"], dtype=np.int64))
    return ProbTable(dims, np.array(obj["probs"], dtype=np.float64))


def sample_proportions(t: CountTable) -> ProbTable:
    return ProbTable(t.dims, t.counts / t.n)


def posterior_mean(t: CountTable, alpha: float) -> ProbTable:
    """Posterior mean of the cell probabilities under a symmetric Dirichlet(alpha) prior.

    Cell ``(i, j)`` is ``(n_ij + alpha) / (n + r*c*alpha)``; ``alpha = 0``
    gives the sample proportions.
    """
    if not alpha >= 0:
        raise NegativeAlphaError(f"alpha must be nonnegative, got {alpha!r}")
    return ProbTable(t.dims, smooth_counts(t.counts, alpha))


def smooth_counts(counts: np.ndarray, alpha) -> np.ndarray:
    """Vectorized posterior mean over the last axis of ``counts``.

    ``alpha`` may be a scalar or an array broadcastable against
    ``counts[..., 0]`` (one value per table).
    """
    counts = np.asarray(counts, dtype=np.float64)
    k = counts.shape[-1]
    alpha = np.asarray(alpha, dtype=np.float64)[..., None]
    return (counts + alpha) / (counts.sum(axis=-1, keepdims=True) + k * alpha)
