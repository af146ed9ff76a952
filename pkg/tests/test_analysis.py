import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shootproj.analysis import (
    SweepRow, SweepTable, convergence_check, estimate_order, root_slope, sweep,
)
from shootproj.expr import parse
from shootproj.ivp import Blowup, IntegratorConfig
from shootproj.problems import Tpbvp, builtin
from shootproj.shooting import IterationRecord, MethodSpec, solve

TOY = Tpbvp("toy", 0.0, 1.0, 0.0, 0.0, parse("0"))
EX2_ROOT = 2 ** -1.5


def synthetic(errors, root=0.0):
    return [IterationRecord(i, root + e, math.nan) for i, e in enumerate(errors)]


# -- sweep ---------------------------------------------------------------

def test_sweep_toy():
    table = sweep(TOY, -1, 1, 3)
    assert table.v.tolist() == [-1.0, 0.0, 1.0]
    assert table.E.tolist() == [-1.0, 0.0, 1.0]


def test_sweep_ex2_single_sign_change():
    table = sweep(builtin("paper-ex2"), 0, 5, 101)
    assert table.sign_changes() == 1
    v, E = table.v, table.E
    i = int(np.argmax(E > 0))
    assert v[i - 1] <= EX2_ROOT <= v[i]


def test_sweep_ex3_has_two_extrema_before_root():
    table = sweep(builtin("paper-ex3"), -0.5, 4, 181)
    extrema = [x for x in table.local_extrema() if 0 < x < 3.2232]
    assert len(extrema) >= 2


def test_sweep_records_blowups():
    table = sweep(builtin("paper-ex1"), -2, 6, 9)
    assert len(table) == 9
    assert not table.rows[-1].ok and table.rows[-1].E is None
    assert table.rows[0].ok
    assert np.isnan(table.E[-1])


def test_sweep_determinism_and_threads():
    p = builtin("paper-ex3")
    a = sweep(p, -0.5, 4, 31)
    b = sweep(p, -0.5, 4, 31)
    c = sweep(p, -0.5, 4, 31, workers=4)
    assert a.E.tobytes() == b.E.tobytes() == c.E.tobytes()


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 3), st.floats(-10, 0), st.floats(0.1, 10))
@settings(max_examples=25, deadline=None)
def test_sweep_affine_for_rhs_in_t_only(c0, c1, length, lo, width):
    p = Tpbvp("t-only", 0.0, length, 0.5, -0.25, parse(f"{c0!r}*t^2 + cos({c1!r}*t)"))
    table = sweep(p, lo, lo + width, 9, IntegratorConfig(100))
    coef = np.polyfit(table.v, table.E, 1)
    resid = table.E - np.polyval(coef, table.v)
    assert np.max(np.abs(resid)) <= 1e-9
    assert coef[0] == pytest.approx(length, rel=1e-12)


def test_sweep_preconditions():
    with pytest.raises(ValueError):
        sweep(TOY, 1, 1, 5)
    with pytest.raises(ValueError):
        sweep(TOY, 0, 1, 1)


def test_sweep_csv_round_trip(tmp_path):
    table = sweep(builtin("paper-ex1"), -2, 6, 9)
    path = tmp_path / "s.csv"
    table.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "v,E,status"
    assert lines[-1].endswith(",,blowup")
    back = SweepTable.read_csv(path)
    assert back == table


def test_sweep_table_invariants():
    with pytest.raises(ValueError):
        SweepTable((SweepRow(0.0, 1.0),))
    with pytest.raises(ValueError):
        SweepTable((SweepRow(1.0, 1.0), SweepRow(0.0, 1.0)))


# -- root slope ----------------------------------------------------------

def test_root_slope_affine_cases():
    assert abs(root_slope(TOY, 0.0) - 1.0) <= 1e-9
    p = Tpbvp("quad", 0.0, 1.0, 0.0, 1.0, parse("2"))
    assert abs(root_slope(p, 0.0) - 1.0) <= 1e-9


def test_root_slope_ex2_positive():
    # the sweep shows E increasing through the root
    table = sweep(builtin("paper-ex2"), EX2_ROOT - 0.05, EX2_ROOT + 0.05, 11)
    assert np.all(np.diff(table.E) > 0)
    assert root_slope(builtin("paper-ex2"), EX2_ROOT) > 0


def test_root_slope_blowup():
    with pytest.raises(Blowup):
        root_slope(builtin("paper-ex1"), 5.0)


# -- convergence check ---------------------------------------------------

def test_convergence_check_examples():
    v = convergence_check(1.0, 1.0)
    assert v.contraction == 0 and v.locally_convergent and v.quadratic
    v = convergence_check(0.0, 1.0)
    assert v.contraction == 1 and not v.locally_convergent and not v.quadratic
    v = convergence_check(3.0, 2 * math.sqrt(2))
    assert v.contraction == pytest.approx(0.0606601717798213, abs=1e-12)
    assert v.locally_convergent and not v.quadratic


def test_convergence_check_zero_k():
    with pytest.raises(ValueError):
        convergence_check(1.0, 0.0)


@given(st.floats(-10, 10), st.floats(0.01, 10))
def test_criterion_matches_slope_bands(m, k):
    # for k > 0: |1 - m/k| < 1  <=>  k >= m > 0  or  m/2 < k < m
    band = (k >= m > 0) or (m / 2 < k < m)
    verdict = convergence_check(m, k)
    if abs(abs(1 - m / k) - 1) > 1e-12:
        assert verdict.locally_convergent == band


def test_quadratic_relative_tolerance():
    assert convergence_check(2.0 * (1 + 5e-7), 2.0).quadratic
    assert not convergence_check(2.0 * (1 + 5e-6), 2.0).quadratic


def test_ex1_fixed_point_unit_slope_fails_criterion():
    p = builtin("paper-ex1")
    root = solve(p, MethodSpec(), 0.0, 1e-10).root
    m = root_slope(p, root)
    assert not convergence_check(m, 1.0).locally_convergent
    assert convergence_check(m, p.b - p.a).locally_convergent


# -- order estimate ------------------------------------------------------

def test_order_linear():
    assert estimate_order(synthetic([2.0 ** -n for n in range(12)]), 0.0) == pytest.approx(1.0, abs=1e-9)


def test_order_quadratic():
    assert estimate_order(synthetic([2.0 ** -(2 ** n) for n in range(8)]), 0.0) == pytest.approx(2.0, abs=1e-9)


def test_order_clamped():
    assert estimate_order(synthetic([10.0 ** -(4 ** n) for n in range(4)]), 0.0) == 3.0


def test_order_uses_tail_only():
    # a wild start followed by clean linear convergence
    errs = [5.0, 0.001, 3.0, 1e-5, 2.0] + [0.5 ** n for n in range(1, 10)]
    assert estimate_order(synthetic(errs), 0.0) == pytest.approx(1.0, abs=1e-9)


def test_order_ignores_exact_hits():
    errs = [0.5 ** n for n in range(6)] + [0.0]
    assert estimate_order(synthetic(errs), 0.0) == pytest.approx(1.0, abs=1e-9)


def test_order_too_few():
    with pytest.raises(ValueError):
        estimate_order(synthetic([1.0, 0.5, 0.25]), 0.0)


def test_order_ex2_projection_linear():
    p = builtin("paper-ex2")
    result = solve(p, MethodSpec(), 5.0, 1e-3)
    root = solve(p, MethodSpec(), 5.0, 1e-12).root
    assert abs(root - EX2_ROOT) < 1e-9
    assert estimate_order(result.trace, root) == pytest.approx(1.0, abs=0.3)
