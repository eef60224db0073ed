"""Choice of the Dirichlet parameter and the smoothed plug-in estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import OptimalAlphaBatch, default_alpha_max, optimal_alpha_batch
from .errors import CtSmoothError, NegativeAlphaError
from .measures import MeasureSpec, measure_value, measure_values
from .tables import CountTable, ProbTable, posterior_mean, smooth_counts

FIXED = "fixed"
OPTIMAL = "optimal"
FHM = "fhm"


def _format_alpha(a: float) -> str:
    s = repr(float(a))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class AlphaRule:
    """How the Dirichlet parameter is picked.

    ``fixed`` uses ``alpha`` as given (0 is the raw sample proportions,
    1/2 the Jeffreys prior, 1 the uniform prior); ``optimal`` the plug-in
    MSE-optimal value for the measure; ``fhm`` the Fienberg-Holland value
    that is MSE-optimal for the cell probabilities themselves.
    """

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in (FIXED, OPTIMAL, FHM):
            raise CtSmoothError(f"unknown alpha rule {self.kind!r}")
        if self.kind == FIXED:
            a = float(self.alpha)
            if not (np.isfinite(a) and a >= 0):
                raise NegativeAlphaError(f"fixed alpha must be finite and nonnegative, got {self.alpha!r}")
            object.__setattr__(self, "alpha", a)
        elif self.alpha is not None:
            raise CtSmoothError(f"rule {self.kind!r} takes no alpha")

    @classmethod
    def fixed(cls, alpha: float) -> AlphaRule:
        return cls(FIXED, alpha)

    @classmethod
    def optimal(cls) -> AlphaRule:
        return cls(OPTIMAL)

    @classmethod
    def fhm(cls) -> AlphaRule:
        return cls(FHM)

    @classmethod
    def parse(cls, text: str) -> AlphaRule:
        """Parse ``fixed:<alpha>``, ``optimal`` or ``fhm``."""
        text = text.strip()
        if text in (OPTIMAL, FHM):
            return cls(text)
        head, sep, tail = text.partition(":")
        if head != FIXED or not sep:
            raise CtSmoothError(f"unknown alpha rule {text!r}; expected fixed:<alpha>, optimal or fhm")
        try:
            value = float(tail)
        except ValueError:
            raise CtSmoothError(f"bad alpha in rule {text!r}") from None
        return cls(FIXED, value)

    def __str__(self):
        if self.kind == FIXED:
            return f"fixed:{_format_alpha(self.alpha)}"
        return self.kind


STANDARD_RULES = tuple(AlphaRule.parse(s) for s in ("fixed:0", "fixed:0.5", "fixed:1", "fhm", "optimal"))


def fienberg_holland_alpha_batch(counts: np.ndarray, alpha_max=None) -> np.ndarray:
    """Fienberg-Holland parameter for a stack of flattened count vectors ``(m, k)``.

    ``K = k (n**2 - sum n_ij**2) / (k sum n_ij**2 - n**2)`` and
    ``alpha = K / k``.  The denominator vanishes only for exactly uniform
    counts, where ``alpha_max`` (default ``n / k``) is returned.  Integer
    arithmetic keeps that test exact.
    """
    counts = np.asarray(counts)
    m, k = counts.shape
    wide = counts.astype(object) if counts.max(initial=0) > 10**8 else counts.astype(np.int64)
    n = wide.sum(axis=1)
    ss = (wide * wide).sum(axis=1)
    num = n * n - ss
    den = k * ss - n * n
    cap = default_alpha_max(n.astype(np.float64), k) if alpha_max is None else np.broadcast_to(np.asarray(alpha_max, dtype=np.float64), (m,))
    out = np.empty(m)
    for t in range(m):
        out[t] = cap[t] if den[t] == 0 else max(int(num[t]) / int(den[t]), 0.0)
    return out


def fienberg_holland_alpha(t: CountTable, alpha_max: float | None = None) -> float:
    return float(fienberg_holland_alpha_batch(t.counts[None], alpha_max)[0])


@dataclass(frozen=True)
class BatchEstimate:
    alpha: np.ndarray
    values: np.ndarray
    optimal: OptimalAlphaBatch | None = None


def resolve_alpha_batch(spec: MeasureSpec, counts: np.ndarray, rule: AlphaRule, alpha_max=None):
    """Alpha for every table in a stack ``(m, r, c)``; also the optimal-rule diagnostics."""
    m = counts.shape[0]
    if rule.kind == FIXED:
        return np.full(m, rule.alpha), None
    if rule.kind == FHM:
        return fienberg_holland_alpha_batch(counts.reshape(m, -1), alpha_max), None
    opt = optimal_alpha_batch(spec, counts, alpha_max)
    return opt.alpha, opt


def estimate_batch(spec: MeasureSpec, counts: np.ndarray, rule: AlphaRule, alpha_max=None) -> BatchEstimate:
    """Smoothed plug-in estimates for a stack of count tables ``(m, r, c)``.

    Undefined values (possible only with zero cells at alpha = 0) are NaN.
    """
    counts = np.asarray(counts)
    m, r, c = counts.shape
    alpha, opt = resolve_alpha_batch(spec, counts, rule, alpha_max)
    P = smooth_counts(counts.reshape(m, r * c), alpha).reshape(m, r, c)
    return BatchEstimate(alpha, measure_values(spec, P), opt)


@dataclass(frozen=True, eq=False)
class EstimateResult:
    alpha_used: float
    p_smoothed: ProbTable
    estimate: float
    rule: AlphaRule
    a1_hat: float | None = None
    a2_hat: float | None = None
    clamped: bool | None = None

    def to_json(self, spec: MeasureSpec) -> dict:
        out = {
            "measure": spec.kind.value,
            "lambda": spec.lam,
            "rule": str(self.rule),
            "alpha_used": self.alpha_used,
            "estimate": self.estimate,
        }
        if self.rule.kind == OPTIMAL:
            out.update(a1_hat=self.a1_hat, a2_hat=self.a2_hat, clamped=self.clamped)
        return out


def estimate(spec: MeasureSpec, t: CountTable, rule: AlphaRule, alpha_max: float | None = None) -> EstimateResult:
    """Estimate the measure by ``f(p_hat(alpha))`` with alpha chosen by ``rule``.

    The estimate is recomputed from the returned smoothed table, so it is
    always ``measure_value(spec, result.p_smoothed)``.
    """
    spec.check_dims(t.dims)
    alpha, opt = resolve_alpha_batch(spec, t.as_matrix()[None], rule, alpha_max)
    a = float(alpha[0])
    p = posterior_mean(t, a)
    value = measure_value(spec, p)
    if opt is None:
        return EstimateResult(a, p, value, rule)
    return EstimateResult(a, p, value, rule, float(opt.a1[0]), float(opt.a2[0]), bool(opt.clamped[0]))
