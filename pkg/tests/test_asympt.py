import cmath
import math
import random

import pytest

from affine_rmatrix.asympt import (Divergent, convergence_order_test, corrected_rhs, lemma13_rhs, limit_constant,
                                   pochhammer_inf, pochhammer_inf_numeric, pochhammer_taylor, t_ladder)


def test_trivial_values():
    assert pochhammer_inf_numeric(0, 0.5) == 1
    assert pochhammer_inf_numeric(0.3, 0) == pytest.approx(0.7)
    with pytest.raises(Divergent):
        pochhammer_inf(0.3, 1.0)
    with pytest.raises(Divergent):
        pochhammer_taylor(0.3, 1.2)


def test_matches_taylor_example():
    assert abs(pochhammer_inf_numeric(0.3, 0.5) - pochhammer_taylor(0.3, 0.5)) < 1e-13


def test_matches_taylor_random():
    rng = random.Random(2024)
    for _ in range(20):
        z = cmath.rect(rng.uniform(0, 0.6), rng.uniform(-math.pi, math.pi))
        q = cmath.rect(rng.uniform(0, 0.6), rng.uniform(-math.pi, math.pi))
        assert abs(pochhammer_inf_numeric(z, q) - pochhammer_taylor(z, q)) < 1e-12


def test_tail_bound_is_honest():
    pv = pochhammer_inf(0.5, 0.9, tol=1e-6)
    exact = pochhammer_inf(0.5, 0.9, tol=1e-16).value
    assert abs(cmath.log(exact) - cmath.log(pv.value)) <= pv.tail_bound


def test_rhs_examples():
    assert lemma13_rhs(0, 0.5, 3) == 1
    # ell = 1: only the (1 - z)^(-1/2) factor survives next to the exponential
    z, q = 0.3, 0.9
    from affine_rmatrix.asympt import _li2
    expected = cmath.exp(_li2(z) / (q - 1)) * (1 - z) ** -0.5
    assert abs(lemma13_rhs(z, q, 1) - expected) < 1e-12 * abs(expected)
    eps = cmath.exp(2j * math.pi / 3)
    v = lemma13_rhs(0.2, eps * (1 - 1e-3), 3)
    assert math.isfinite(abs(v)) and abs(v) > 1e-3


def test_ladder():
    assert t_ladder() == [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4]


def test_zero_z_is_exact():
    rep = convergence_order_test(0, 3)
    assert rep["exact"] and rep["ok"]
    assert all(p["deviation"] == 0 for p in rep["probes"])


@pytest.mark.parametrize("z,ell", [(0.3, 1), (0.2, 3)])
def test_ratio_converges_to_limit_constant(z, ell):
    # LHS / stated RHS tends to a constant at rate O(t): both its increments and
    # the deviation from the limit constant shrink linearly
    rep = convergence_order_test(z, ell)
    assert rep["ratio_increment_order"] == pytest.approx(1.0, abs=0.1)
    c = limit_constant(z, ell)
    last = complex(*rep["probes"][-1]["ratio"])
    assert abs(last - c) < 1e-2


@pytest.mark.parametrize("z,ell", [(0.3, 1), (0.2, 3)])
def test_corrected_rhs_order_one(z, ell):
    rep = convergence_order_test(z, ell, rhs="corrected")
    assert rep["ok"] and 0.9 <= rep["fitted_order"] <= 1.2
    assert rep["monotone"] and not rep["excluded"]


def test_corrected_rhs_is_constant_multiple(z=0.25, ell=3):
    eps = cmath.exp(2j * math.pi / ell)
    q = eps * 0.99
    assert abs(corrected_rhs(z, q, ell) / lemma13_rhs(z, q, ell) - limit_constant(z, ell)) < 1e-12


def test_csv_output(tmp_path):
    path = tmp_path / "d.csv"
    convergence_order_test(0.3, 1, csv_path=str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,deviation" and len(lines) == 6


def test_branch_warning_near_cut():
    with pytest.warns(RuntimeWarning):
        lemma13_rhs(1.5 + 1e-9j, 0.5, 1)
