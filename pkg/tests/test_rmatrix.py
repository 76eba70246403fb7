import pickle
from fractions import Fraction
from math import floor

import pytest

from affine_rmatrix.operators import GradedOperator
from affine_rmatrix.qfield import ONE, RatQ
from affine_rmatrix.rmatrix import (TensorSetup, VariantMismatch, assemble_R, compare_with_oracle,
                                    coproduct_action, factor_argument_coefficient, quasiR_oracle, qT_operator,
                                    r1_factor, realize_R0, verify_intertwining, verify_ybe)
from affine_rmatrix.rootdata import Root
from affine_rmatrix.rootvec import RootVectorConventions

q = RatQ.q_power(1)
A1 = Root("real", (0, 1))
D1 = Root("imag", (1, 1), 1)


def _scalar_at(op: GradedOperator, z, etas):
    off = op.space.part_offset(z, etas)
    return op.blocks[z][off][off]


def _expect_power(op, z, etas, exponent: Fraction):
    whole = floor(exponent)
    assert op.prefactor == exponent - whole
    assert _scalar_at(op, z, etas) == q ** whole


@pytest.fixture(scope="module")
def small(cartan):
    return TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 2)


def test_qT_scalars(cartan, small):
    qt = qT_operator(small)
    l, m = (1, 2, 0), (2, 1, 0)
    _expect_power(qt, (0, 0), ((0, 0), (0, 0)), -cartan.weight_pairing(l, m))
    # F_1 v (x) v: weight l - alpha_1
    lma = Fraction(cartan.weight_pairing(l, m)) - cartan.root_weight_pairing((0, 1), m)
    _expect_power(qt, (0, 1), ((0, 1), (0, 0)), -lma)
    inv = qT_operator(small, inverse=True)
    assert (qt @ inv).equals(GradedOperator.identity(small.space))


def test_qT_half_integer_prefactor(cartan):
    s = TensorSetup(cartan, [(0, 1, 0), (0, 1, 0)], 1)
    qt = qT_operator(s)
    e = -Fraction(cartan.weight_pairing((0, 1, 0), (0, 1, 0)))
    assert e.denominator == 2
    _expect_power(qt, (0, 0), ((0, 0), (0, 0)), e)


def test_qT_zero_weight(cartan):
    s = TensorSetup(cartan, [(0, 0, 0), (0, 0, 0)], 2)
    qt = qT_operator(s)
    assert _scalar_at(qt, (0, 0), ((0, 0), (0, 0))) == ONE


def test_coproduct_examples(cartan, small):
    for mu in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        assert coproduct_action(small, "K", mu).equals(coproduct_action(small, "K", mu, opposite=True))
    for i in (0, 1):
        dE = coproduct_action(small, "E", i)
        assert dE.blocks.get((0, 0)) in (None, []) or not any(any(r) for r in dE.blocks[(0, 0)])
    dF = coproduct_action(small, "F", 1)
    img = dF.apply((0, 0), [ONE])
    space = small.space
    m1 = 1   # exponent of lambda_1 on the second leg is m_1 = 1
    expected = [RatQ(0)] * space.dim((0, 1))
    expected[space.part_offset((0, 1), ((0, 1), (0, 0)))] = q ** -m1
    expected[space.part_offset((0, 1), ((0, 0), (0, 1)))] = ONE
    assert img == expected
    with pytest.raises(ValueError):
        coproduct_action(small, "H", 1)


def test_r1_factor_basics(cartan):
    s = TensorSetup(cartan, [(0, 1, 0), (0, 1, 0)], 2)
    f = r1_factor(s, A1)
    # zero-shift part is the identity
    for z in s.space.degrees:
        for etas, off, dim in s.space.parts(z):
            blk = f.part_block(z, etas, etas)
            assert blk == [[ONE if i == j else RatQ(0) for j in range(dim)] for i in range(dim)]
    # single series term from (alpha_1, 0) to (0, alpha_1)
    rv0, rv1 = s.rootvecs(0), s.rootvecs(1)
    arg = factor_argument_coefficient(cartan, A1)
    term = s.leg_op({0: rv0[A1].E, 1: rv1[A1].F_dot}).scale(arg)
    z, src, tgt = (0, 1), ((0, 1), (0, 0)), ((0, 0), (0, 1))
    assert f.part_block(z, src, tgt) == term.part_block(z, src, tgt)
    assert f.part_block(z, src, tgt) == [[q.inverse() - q]]
    # roots beyond the truncation give the identity
    assert r1_factor(s, Root("imag", (2, 2), 1)).equals(GradedOperator.identity(s.space))
    with pytest.raises(ValueError):
        r1_factor(s, A1, variant="bogus")


def test_R_on_highest_vectors(cartan, pair_setups):
    for s, fact in pair_setups:
        l, m = s.weights
        _expect_power(fact.assembled, (0, 0), ((0, 0), (0, 0)), -cartan.weight_pairing(l, m))


def test_R_at_height_zero(cartan):
    s = TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 0)
    R = assemble_R(s, "both").assembled
    assert list(R.blocks) == [(0, 0)]
    _expect_power(R, (0, 0), ((0, 0), (0, 0)), -cartan.weight_pairing((1, 2, 0), (2, 1, 0)))


def test_R_unitriangular(pair_setups):
    for s, fact in pair_setups:
        for z in s.space.degrees:
            for etas, _, _ in s.space.parts(z):
                assert fact.assembled.part_block(z, etas, etas) == fact.qT.part_block(z, etas, etas)


def test_variants_agree(pair_setups):
    for s, fact in pair_setups:
        other = assemble_R(s, "Edot_F")
        assert other.assembled.equals(fact.assembled)
        assert assemble_R(s, "both").assembled.equals(fact.assembled)
        assert fact.check_product()


def test_variant_mismatch_detected(cartan, monkeypatch):
    import dataclasses

    from affine_rmatrix import rootvec
    orig = rootvec._variants

    def skewed(c, rt, e, f):
        v = orig(c, rt, e, f)
        # wrong mu on Fdot only: E (x) Fdot no longer matches Edot (x) F
        return dataclasses.replace(v, F_dot=v.F_dot.scale(RatQ(2))) if not rt.is_real else v
    monkeypatch.setattr(rootvec, "_variants", skewed)
    s = TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 2)
    with pytest.raises(VariantMismatch):
        assemble_R(s, "both")


def test_intertwining(pair_setups):
    for s, fact in pair_setups:
        rep = verify_intertwining(s, fact)
        assert rep["ok"], rep["violations"][:3]
        assert len(rep["generators"]) == 7
        assert rep["valid_bidegrees"]


def test_identity_R_fails_intertwining(pair_setups):
    s, _ = pair_setups[0]
    rep = verify_intertwining(s, GradedOperator.identity(s.space))
    bad = {v["generator"] for v in rep["violations"]}
    assert not rep["ok"] and "E1" in bad
    assert not any(g.startswith("K") for g in bad)


def test_oracle_matches(pair_setups):
    for s, fact in pair_setups:
        orc = quasiR_oracle(s)
        assert orc.consistency_checked > 0 and not orc.underdetermined
        rep = compare_with_oracle(s, fact, orc)
        assert rep["ok"], rep["violations"]
        # shift zero is the identity on Theta
        for z in s.space.degrees:
            for etas, _, dim in s.space.parts(z):
                assert orc.theta.part_block(z, etas, etas) == \
                    [[ONE if i == j else RatQ(0) for j in range(dim)] for i in range(dim)]


def test_oracle_matches_in_box(box_setup):
    s, fact = box_setup
    assert Root("imag", (3, 3), 1) in s.roots()
    assert compare_with_oracle(s, fact)["ok"]


def test_oracle_detects_scaled_root_vector(cartan):
    s = TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 4,
                    conventions=RootVectorConventions(scale={D1.label: 2}))
    rep = compare_with_oracle(s, assemble_R(s))
    assert not rep["ok"]
    assert [1, 1] in [v["bidegree"] for v in rep["violations"]]


def test_realize_R0(pair_setups):
    s, _ = pair_setups[0]
    rep = realize_R0(s)
    assert rep["ok"], rep["violations"][:3]


def test_ybe(cartan):
    rep = verify_ybe(cartan, [(0, 1, 0)] * 3, 3)
    assert rep["ok"] and rep["valid_bidegrees"]
    rep = verify_ybe(cartan, [(1, 2, 0), (2, 1, 0), (0, 1, 1)], 3)
    assert rep["ok"]


def test_ybe_height_zero(cartan):
    rep = verify_ybe(cartan, [(1, 2, 0), (2, 1, 0), (0, 1, 1)], 0)
    assert rep["ok"] and rep["valid_bidegrees"] == [[0, 0]]


def test_ybe_without_cartan_part_fails(cartan):
    rep = verify_ybe(cartan, [(0, 1, 0)] * 3, 3, drop_cartan=True)
    assert not rep["ok"]


def test_lowest_weight_intertwining(cartan):
    s = TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 3, lowest=True)
    assert verify_intertwining(s, assemble_R(s))["ok"]


def test_reverse_order_gives_same_R(cartan, pair_setups):
    s, fact = pair_setups[0]
    r = TensorSetup(cartan, s.weights, 4, order="reverse")
    rev = assemble_R(r)
    assert [rt.label for rt, _ in rev.factors] == [rt.label for rt, _ in fact.factors][::-1]
    assert verify_intertwining(r, rev)["ok"]


def test_factorization_pickles(pair_setups):
    s, fact = pair_setups[0]
    s2, f2 = pickle.loads(pickle.dumps((s, fact)))
    assert f2.assembled.space is s2.space
    assert f2.check_product()
