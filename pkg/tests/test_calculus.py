import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctsmooth.calculus import (
    default_alpha_max,
    derivatives,
    finite_difference_derivatives,
    mse_coefficients,
    optimal_alpha,
    optimal_alpha_batch,
    raw_measure,
    resolve_alpha,
    singular_mask,
    trace_form_coefficients,
)
from ctsmooth.errors import BoundaryPointError
from ctsmooth.measures import MeasureSpec
from ctsmooth.tables import CountTable, Dims, ProbTable, posterior_mean, sample_proportions

from conftest import counts_x1000, load_truth

SPECS = [MeasureSpec.cramer_v(lam) for lam in (0, 0.5, 1, 2)] + [
    MeasureSpec.symmetry_phi(lam) for lam in (0, 0.5, 1, 2)
]


def interior(rng, spec):
    r, c = (4, 5) if spec.kind.value == "cramer-v" else (4, 4)
    k = r * c
    p = 0.5 * rng.dirichlet(np.full(k, 2.0)) + 0.5 / k
    return ProbTable.from_array(p.reshape(r, c))


def rel_err(a, b):
    return np.max(np.abs(a - b) / (1 + np.abs(a)))


def oracle_coefficients(spec, p, hess_step=1e-4):
    """Trace expressions fed by finite-difference derivatives only."""
    fd = finite_difference_derivatives(raw_measure(spec, p.dims), p.probs, hess_step=hess_step)
    return trace_form_coefficients(p.probs, fd.gradient, fd.hessian)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_derivatives_match_finite_differences(spec):
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = interior(rng, spec)
        b = derivatives(spec, p)
        fd = finite_difference_derivatives(raw_measure(spec, p.dims), p.probs)
        assert rel_err(b.gradient, fd.gradient) < 1e-6
        assert rel_err(b.hessian, fd.hessian) < 1e-4
        assert b.value == pytest.approx(fd.value, rel=1e-12)


def test_table1b_gradient_small_step():
    spec = MeasureSpec.cramer_v(1)
    p = load_truth("table1b")
    b = derivatives(spec, p)
    fd = finite_difference_derivatives(raw_measure(spec, p.dims), p.probs, grad_step=1e-6)
    assert rel_err(b.gradient, fd.gradient) < 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_hessian_symmetric(spec):
    H = derivatives(spec, interior(np.random.default_rng(3), spec)).hessian
    assert np.max(np.abs(H - H.T)) <= 1e-8 * max(1.0, np.max(np.abs(H)))


def test_symmetric_table_hessian_symmetry():
    A = np.random.default_rng(1).random((4, 4)) + 0.1
    S = (A + A.T) / (A + A.T).sum()
    H = derivatives(MeasureSpec.symmetry_phi(1), ProbTable.from_array(S)).hessian
    assert np.max(np.abs(H - H.T)) < 1e-8


def test_constant_function_hook():
    p = load_truth("table1b")
    b = derivatives(lambda x: 3.0, p)
    assert b.value == 3.0
    assert not b.gradient.any() and not b.hessian.any()
    m = mse_coefficients(lambda x: 3.0, p)
    assert m.a1 == 0 and m.degenerate


def test_shift_invariance():
    spec = MeasureSpec.cramer_v(1)
    p = load_truth("table1b")
    f = raw_measure(spec, p.dims)
    m1 = mse_coefficients(f, p)
    m2 = mse_coefficients(lambda x: f(x) + 5.0, p)
    assert m2.a1 == pytest.approx(m1.a1, rel=1e-6)
    assert m2.a2 == pytest.approx(m1.a2, rel=1e-6)


@pytest.mark.parametrize("name, spec", [("table1b", MeasureSpec.cramer_v(1)), ("table2b", MeasureSpec.symmetry_phi(1)),
                                        ("table1c", MeasureSpec.cramer_v(0)), ("table2c", MeasureSpec.symmetry_phi(2))])
def test_mse_coefficients_match_oracle(name, spec):
    p = load_truth(name)
    m = mse_coefficients(spec, p)
    # cells of 0.003 under a log need a finer Hessian step
    a1, a2 = oracle_coefficients(spec, p, hess_step=1e-5 if name == "table1c" else 1e-4)
    assert m.a1 == pytest.approx(a1, rel=1e-4)
    assert m.a2 == pytest.approx(a2, rel=1e-4)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_a1_is_scalar_square_of_trace_form(spec):
    rng = np.random.default_rng(11)
    for _ in range(5):
        p = interior(rng, spec)
        b = derivatives(spec, p)
        a1, a2 = trace_form_coefficients(p.probs, b.gradient, b.hessian)
        v = p.dims.k * p.probs - 1
        assert (b.gradient @ v) ** 2 == pytest.approx(a1, rel=1e-10)
        m = mse_coefficients(spec, p)
        assert m.a1 >= 0
        assert m.a1 == pytest.approx(a1, rel=1e-10)
        assert m.a2 == pytest.approx(a2, rel=1e-8, abs=1e-10)


def test_uniform_point_is_degenerate():
    for spec in (MeasureSpec.cramer_v(1), MeasureSpec.symmetry_phi(1)):
        p = ProbTable(Dims(3, 3), np.full(9, 1 / 9))
        m = mse_coefficients(spec, p)
        assert m.a1 == pytest.approx(0, abs=1e-20)
        assert m.alpha_star is None


def test_optimal_alpha_uniform_counts_is_zero():
    t = CountTable(Dims(3, 3), np.full(9, 4))
    assert optimal_alpha(MeasureSpec.cramer_v(1), t) == 0.0


def test_optimal_alpha_matches_oracle_at_1000_counts():
    spec = MeasureSpec.cramer_v(1)
    t = counts_x1000("table1b")
    a1, a2 = oracle_coefficients(spec, sample_proportions(t))
    assert optimal_alpha(spec, t) == pytest.approx(a2 / a1, rel=1e-4)


def test_clamp_rule():
    alpha, clamped, degenerate = resolve_alpha([1.0, 1.0, 1.0, 0.0], [-2.0, 0.5, 9.0, 1.0], 3.0)
    assert alpha.tolist() == [0.0, 0.5, 3.0, 0.0]
    assert clamped.tolist() == [True, False, True, False]
    assert degenerate.tolist() == [False, False, False, True]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=12, max_size=12).filter(lambda v: sum(v) > 0))
def test_optimal_alpha_total_and_bounded(v):
    t = CountTable(Dims(3, 4), np.array(v))
    for spec in (MeasureSpec.cramer_v(1), MeasureSpec.cramer_v(0)):
        a = optimal_alpha(spec, t)
        assert 0 <= a <= t.n / 12
        assert np.isfinite(a)


def test_boundary_point_errors():
    p = ProbTable.from_array([[0.5, 0.5, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(BoundaryPointError):
        derivatives(MeasureSpec.cramer_v(1), p)
    p = ProbTable.from_array([[0.4, 0.1, 0.0], [0.2, 0.1, 0.2]])
    with pytest.raises(BoundaryPointError):
        derivatives(MeasureSpec.cramer_v(0.5), p)
    # a zero cell is a regular point once lambda >= 1
    b = derivatives(MeasureSpec.cramer_v(1), p)
    assert np.all(np.isfinite(b.hessian))
    with pytest.raises(BoundaryPointError):
        mse_coefficients(MeasureSpec.symmetry_phi(1), ProbTable.from_array([[0.5, 0], [0, 0.5]]))


def test_zero_cell_derivatives_are_limits():
    # lambda >= 1: the partials at a zero cell are the limits from the interior
    spec = MeasureSpec.cramer_v(2)
    P = np.array([[0.3, 0.1, 0.0], [0.2, 0.1, 0.3]])
    b0 = derivatives(spec, ProbTable.from_array(P))
    Q = P.copy()
    Q[0, 2] = 1e-9
    b1 = derivatives(spec, ProbTable.from_array(Q / Q.sum()))
    np.testing.assert_allclose(b0.gradient, b1.gradient, atol=1e-6)


def test_evaluation_point_falls_back_only_when_singular():
    spec = MeasureSpec.cramer_v(1)
    t = CountTable(Dims(2, 3), [5, 0, 3, 2, 4, 6])
    opt = optimal_alpha_batch(spec, t.as_matrix()[None])
    assert not opt.smoothed_point[0]
    expected = mse_coefficients(spec, sample_proportions(t))
    assert opt.a2[0] == pytest.approx(expected.a2, rel=1e-12)

    t = CountTable(Dims(2, 3), [5, 0, 3, 0, 0, 0])
    opt = optimal_alpha_batch(spec, t.as_matrix()[None])
    assert opt.smoothed_point[0]
    expected = mse_coefficients(spec, posterior_mean(t, 0.5))
    assert opt.a2[0] == pytest.approx(expected.a2, rel=1e-12)
    assert opt.alpha[0] <= default_alpha_max(t.n, 6)


def test_singular_mask_symmetry():
    spec = MeasureSpec.symmetry_phi(0.5)
    P = np.array([
        [[0.2, 0.1, 0.0], [0.1, 0.2, 0.1], [0.0, 0.1, 0.2]],
        [[0.2, 0.1, 0.1], [0.0, 0.2, 0.1], [0.0, 0.1, 0.2]],
        [[0.5, 0.0], [0.0, 0.5]],
    ][:2])
    assert singular_mask(spec, P).tolist() == [False, True]
    assert singular_mask(MeasureSpec.symmetry_phi(1), P).tolist() == [False, False]
