"""Dirichlet posterior sampling and equal-tailed credible intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .errors import CtSmoothError, NonPositiveParameterError
from .estimators import AlphaRule, estimate
from .measures import MeasureSpec, measure_values, undefined_error
from .tables import CountTable

MIN_DRAWS = 100


def sample_dirichlet(params, rng: np.random.Generator) -> np.ndarray:
    """One Dirichlet draw via normalized independent gamma variates.

    The result has the shape of ``params``; all of its entries together
    sum to one.  numpy's gamma sampler handles shapes below one.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.size == 0 or not np.all(np.isfinite(params)) or np.any(params <= 0):
        raise NonPositiveParameterError("Dirichlet parameters must be finite and positive")
    g = rng.standard_gamma(params)
    return g / g.sum()


@dataclass(frozen=True)
class CredibleInterval:
    lower: float
    upper: float
    level: float
    draws: int
    point: float
    alpha_used: float

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "draws": self.draws,
            "alpha_used": self.alpha_used,
            "point": self.point,
        }


def posterior_draws(params: np.ndarray, draws: int, seed: int) -> np.ndarray:
    """``draws`` Dirichlet samples ``(draws, k)``; draw ``s`` uses substream ``(seed, s)``.

    Cells whose parameter is exactly zero (an empty cell with alpha = 0)
    are held at zero; the rest follow the Dirichlet on the remaining cells.
    """
    params = np.asarray(params, dtype=np.float64).ravel()
    live = params > 0
    shape = params[live]
    out = np.zeros((draws, params.size))
    for s in range(draws):
        g = substream(seed, s).standard_gamma(shape)
        out[s, live] = g / g.sum()
    return out


def credible_interval(
    spec: MeasureSpec,
    t: CountTable,
    rule: AlphaRule,
    level: float = 0.95,
    draws: int = 10000,
    seed: int = 0,
    alpha_max: float | None = None,
) -> CredibleInterval:
    """Equal-tailed credible interval for the measure under Dirichlet(n + alpha).

    Alpha is resolved by ``rule`` once and then held fixed.  Quantiles use
    linear interpolation between order statistics.
    """
    if not 0 < level < 1:
        raise CtSmoothError(f"level must lie strictly between 0 and 1, got {level}")
    if int(draws) != draws or draws < MIN_DRAWS:
        raise CtSmoothError(f"draws must be an integer >= {MIN_DRAWS}, got {draws}")
    draws = int(draws)
    est = estimate(spec, t, rule, alpha_max)
    params = t.counts + est.alpha_used
    P = posterior_draws(params, draws, seed).reshape(draws, t.r, t.c)
    values = measure_values(spec, P)
    if np.isnan(values).any():
        raise undefined_error(spec)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [tail, 1.0 - tail], method="linear")
    return CredibleInterval(float(lo), float(hi), float(level), draws, est.estimate, est.alpha_used)
