"""Simulation harness for the bias/MSE comparisons of the Dirichlet rules.

Replication ``i`` at ratio ``gamma`` draws its table from the substream
``(seed, gamma, i)``.  Every rule sees the same tables, and results are
bit-identical whatever the thread count: work is cut into fixed-size
blocks and per-replication errors are summed with ``math.fsum`` once all
blocks are in.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._rng import substream
from .calculus import mse_coefficients
from .errors import BoundaryPointError, CtSmoothError
from .estimators import AlphaRule, estimate_batch
from .measures import MeasureSpec, measure_value, measure_values
from .tables import CountTable, ProbTable, smooth_counts

BLOCK = 256

CSV_COLUMNS = ("measure", "lambda", "truth_table_id", "rule", "gamma", "n", "S",
               "bias", "abs_bias", "mse", "failures", "seed")


def sample_multinomial(truth: ProbTable, n: int, rng: np.random.Generator) -> CountTable:
    """Multinomial(n, truth) table, drawn by sequential conditional binomials."""
    if n < 1:
        raise CtSmoothError(f"sample size must be >= 1, got {n}")
    return CountTable(truth.dims, rng.multinomial(n, truth.probs))


def _draw_block(truth: ProbTable, n: int, seed: int, key: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, truth.dims.k), dtype=np.int64)
    for row, i in enumerate(range(start, stop)):
        out[row] = substream(seed, key, i).multinomial(n, truth.probs)
    return out


def _blocks(total: int):
    return [(s, min(s + BLOCK, total)) for s in range(0, total, BLOCK)]


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    truth: ProbTable
    spec: MeasureSpec
    rules: Sequence[AlphaRule]
    gammas: Sequence[int]
    replications: int = 10000
    seed: int = 0
    truth_id: str = "truth"
    threads: int = 1
    alpha_max: float | None = None

    def __post_init__(self):
        self.spec.check_dims(self.truth.dims)
        if self.replications < 1:
            raise CtSmoothError("replications must be >= 1")
        if not self.rules:
            raise CtSmoothError("at least one rule is required")
        for g in self.gammas:
            if int(g) != g or g < 1:
                raise CtSmoothError(f"gamma must be a positive integer, got {g}")
        if self.seed < 0:
            raise CtSmoothError("seed must be nonnegative")


@dataclass(frozen=True)
class ExperimentRow:
    rule: str
    gamma: int
    n: int
    S: int
    bias: float
    abs_bias: float
    mse: float
    failures: int
    mse_se: float = math.nan


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    truth_value: float
    rows: list[ExperimentRow] = field(default_factory=list)

    def row(self, rule, gamma: int) -> ExperimentRow:
        name = str(rule)
        for r in self.rows:
            if r.rule == name and r.gamma == gamma:
                return r
        raise KeyError((name, gamma))

    def to_csv(self) -> str:
        cfg = self.config
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            cells = (cfg.spec.kind.value, repr(cfg.spec.lam), cfg.truth_id, r.rule, r.gamma, r.n, r.S,
                     repr(r.bias), repr(r.abs_bias), repr(r.mse), r.failures, cfg.seed)
            buf.write(",".join(str(c) for c in cells) + "\n")
        return buf.getvalue()


def _moments(err: np.ndarray) -> tuple[float, float, int, float]:
    ok = err[~np.isnan(err)]
    if ok.size == 0:
        return math.nan, math.nan, err.size, math.nan
    sq = ok * ok
    bias = math.fsum(ok.tolist()) / ok.size
    mse = math.fsum(sq.tolist()) / ok.size
    se = float(np.std(sq, ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else math.nan
    return bias, mse, err.size - ok.size, se


def run_experiment(config: ExperimentConfig, observer: Callable | None = None) -> ExperimentResult:
    """Bias and MSE of every rule at every gamma against the true measure value.

    Replications where the measure is undefined (only possible at alpha
    = 0) are left out of the moments and counted in ``failures``.
    ``observer(gamma, start, rule, counts)`` sees each block of tables
    exactly as handed to the estimator.
    """
    truth = config.truth
    spec = config.spec
    r, c = truth.dims.r, truth.dims.c
    k = r * c
    f_true = measure_value(spec, truth)
    result = ExperimentResult(config, f_true)
    S = config.replications
    for gamma in config.gammas:
        gamma = int(gamma)
        n = gamma * k

        def work(bounds, gamma=gamma, n=n):
            start, stop = bounds
            counts = _draw_block(truth, n, config.seed, gamma, start, stop).reshape(-1, r, c)
            errs = []
            for rule in config.rules:
                if observer is not None:
                    observer(gamma, start, rule, counts)
                est = estimate_batch(spec, counts, rule, config.alpha_max)
                errs.append(est.values - f_true)
            return errs

        parts = _map(work, _blocks(S), config.threads)
        for j, rule in enumerate(config.rules):
            err = np.concatenate([p[j] for p in parts])
            bias, mse, failures, se = _moments(err)
            result.rows.append(ExperimentRow(str(rule), gamma, n, S, bias, abs(bias), mse, failures, se))
    return result


@dataclass(frozen=True)
class ExpansionRow:
    alpha: float
    simulated: float
    predicted: float
    std_error: float
    z: float


def validate_expansion(
    spec: MeasureSpec,
    truth: ProbTable,
    alphas: Sequence[float],
    n: int,
    S: int,
    seed: int = 0,
    threads: int = 1,
) -> list[ExpansionRow]:
    """Compare simulated ``n**2 (MSE(alpha) - MSE(0))`` with ``a1 alpha**2 - 2 a2 alpha``.

    Every alpha is scored on the same S tables.  Per replication the
    difference of squared errors is formed as ``d (d + 2 (f0 - f))`` with
    ``d = f_alpha - f0``, which avoids cancelling two nearly equal squares.
    """
    spec.check_dims(truth.dims)
    if np.any(truth.probs <= 1e-12):
        raise BoundaryPointError("the expansion check needs every true cell strictly positive")
    coef = mse_coefficients(spec, truth)
    f_true = measure_value(spec, truth)
    r, c = truth.dims.r, truth.dims.c
    alphas = [float(a) for a in alphas]

    def work(bounds):
        start, stop = bounds
        counts = _draw_block(truth, n, seed, n, start, stop)
        f0 = measure_values(spec, smooth_counts(counts, 0.0).reshape(-1, r, c))
        out = []
        for a in alphas:
            fa = measure_values(spec, smooth_counts(counts, a).reshape(-1, r, c))
            d = fa - f0
            out.append(float(n) ** 2 * d * (d + 2.0 * (f0 - f_true)))
        return out

    parts = _map(work, _blocks(S), threads)
    rows = []
    for j, a in enumerate(alphas):
        x = np.concatenate([p[j] for p in parts])
        mean = math.fsum(x.tolist()) / S
        se = float(np.std(x, ddof=1) / math.sqrt(S)) if S > 1 else math.nan
        pred = coef.a1 * a * a - 2.0 * coef.a2 * a
        if se == 0:
            z = 0.0 if mean == pred else math.copysign(math.inf, mean - pred)
        else:
            z = (mean - pred) / se
        rows.append(ExpansionRow(a, mean, pred, se, z))
    return rows
