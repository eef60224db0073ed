import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctsmooth.errors import AllDiagonalError, CtSmoothError, NegativeAlphaError
from ctsmooth.estimators import (
    STANDARD_RULES,
    AlphaRule,
    estimate,
    estimate_batch,
    fienberg_holland_alpha,
    fienberg_holland_alpha_batch,
    resolve_alpha_batch,
)
from ctsmooth.measures import MeasureSpec, cramer_v, measure_value
from ctsmooth.montecarlo import sample_multinomial
from ctsmooth.tables import CountTable, Dims, posterior_mean, sample_proportions

from conftest import counts_x1000, load_truth

RULES = list(STANDARD_RULES)


def test_rule_parsing():
    assert AlphaRule.parse("fixed:0") == AlphaRule.parse("fixed:0.0") == AlphaRule.fixed(0)
    assert str(AlphaRule.parse("fixed:0.0")) == "fixed:0"
    assert str(AlphaRule.parse("fixed:0.5")) == "fixed:0.5"
    assert AlphaRule.parse("optimal") == AlphaRule.optimal()
    assert AlphaRule.parse("fhm") == AlphaRule.fhm()
    for bad in ("fixed", "fixed:x", "best", "fixed:-1", "fixed:nan"):
        with pytest.raises(CtSmoothError):
            AlphaRule.parse(bad)
    with pytest.raises(NegativeAlphaError):
        AlphaRule.fixed(-0.5)


def test_fienberg_holland_examples():
    assert fienberg_holland_alpha(CountTable(Dims(2, 2), [10, 0, 0, 0])) == 0.0
    assert fienberg_holland_alpha(CountTable(Dims(2, 2), [3, 3, 3, 3])) == 3.0
    assert fienberg_holland_alpha(CountTable(Dims(2, 2), [3, 3, 3, 3]), alpha_max=7.5) == 7.5
    assert fienberg_holland_alpha(CountTable(Dims(2, 2), [4, 2, 2, 2])) == pytest.approx(6.0, rel=1e-15)


def test_fienberg_holland_minimizes_cell_risk():
    # simulated E|p_hat(alpha) - p|^2 over an alpha grid, common random numbers
    p = np.array([0.4, 0.2, 0.2, 0.2])
    n, S = 10, 40000
    rng = np.random.default_rng(5)
    counts = rng.multinomial(n, p, size=S)
    grid = np.linspace(1, 15, 57)
    risk = [np.mean(np.sum(((counts + a) / (n + 4 * a) - p) ** 2, axis=1)) for a in grid]
    best = grid[int(np.argmin(risk))]
    assert 4.5 <= best <= 8.0
    # the population version of the statistic at p is exactly 6
    ss = np.sum(p**2)
    assert (1 - ss) / (4 * ss - 1) == pytest.approx(6.0)


def test_fienberg_holland_large_counts_exact():
    big = np.array([[10**9, 10**9, 10**9, 10**9]])
    assert fienberg_holland_alpha_batch(big)[0] == pytest.approx(10**9)


def test_fixed_zero_is_plug_in():
    rng = np.random.default_rng(0)
    truth = load_truth("table1b")
    for _ in range(20):
        t = sample_multinomial(truth, 20, rng)
        if np.count_nonzero(t.as_matrix().sum(axis=1)) < 2:
            continue
        res = estimate(MeasureSpec.cramer_v(1), t, AlphaRule.fixed(0))
        assert res.estimate == cramer_v(sample_proportions(t), 1)


def test_optimal_on_table2b_is_consistent():
    res = estimate(MeasureSpec.symmetry_phi(1), counts_x1000("table2b"), AlphaRule.optimal())
    assert abs(res.estimate - 0.473) <= 0.02
    assert res.a1_hat > 0 and res.clamped is False


def test_fixed_one_has_no_zero_cells():
    t = CountTable(Dims(3, 3), [0, 0, 5, 0, 2, 0, 1, 0, 0])
    assert np.all(estimate(MeasureSpec.cramer_v(1), t, AlphaRule.fixed(1)).p_smoothed.probs > 0)


def test_errors_propagate():
    t = CountTable(Dims(2, 2), [4, 0, 0, 6])
    with pytest.raises(AllDiagonalError):
        estimate(MeasureSpec.symmetry_phi(1), t, AlphaRule.fixed(0))
    # any positive alpha makes it defined
    assert 0 <= estimate(MeasureSpec.symmetry_phi(1), t, AlphaRule.fixed(0.5)).estimate <= 1


def test_json_diagnostics_only_for_optimal():
    spec = MeasureSpec.cramer_v(1)
    t = counts_x1000("table1a")
    assert "a1_hat" in estimate(spec, t, AlphaRule.optimal()).to_json(spec)
    assert "a1_hat" not in estimate(spec, t, AlphaRule.fixed(1)).to_json(spec)


table_strategy = st.sampled_from([(2, 2), (3, 3), (4, 5)]).flatmap(
    lambda d: st.lists(st.integers(0, 12), min_size=d[0] * d[1], max_size=d[0] * d[1])
    .filter(lambda v: sum(v) > 0)
    .map(lambda v, d=d: CountTable(Dims(*d), np.array(v)))
)


@settings(max_examples=200, deadline=None)
@given(table_strategy, st.sampled_from(RULES), st.sampled_from([0.0, 1.0, 2.0]))
def test_estimate_in_range_and_consistent(t, rule, lam):
    for spec in (MeasureSpec.cramer_v(lam), MeasureSpec.symmetry_phi(lam)):
        if not t.dims.square and spec.kind.value == "symmetry-phi":
            continue
        try:
            res = estimate(spec, t, rule)
        except CtSmoothError:
            # only an unsmoothed table can leave the measure undefined
            alpha, _ = resolve_alpha_batch(spec, t.as_matrix()[None], rule)
            assert alpha[0] == 0
            continue
        assert 0 <= res.estimate <= 1
        assert res.estimate == measure_value(spec, res.p_smoothed)
        assert res.p_smoothed == posterior_mean(t, res.alpha_used)
        again = estimate(spec, t, rule)
        assert again.estimate == res.estimate and again.alpha_used == res.alpha_used


def test_batch_matches_scalar():
    rng = np.random.default_rng(9)
    truth = load_truth("table2c")
    counts = np.stack([sample_multinomial(truth, 32, rng).as_matrix() for _ in range(50)])
    spec = MeasureSpec.symmetry_phi(1)
    for rule in RULES:
        batch = estimate_batch(spec, counts, rule)
        for i in range(0, 50, 7):
            t = CountTable.from_array(counts[i])
            res = estimate(spec, t, rule)
            assert batch.alpha[i] == res.alpha_used
            assert batch.values[i] == pytest.approx(res.estimate, abs=1e-15)
