import pytest

from affine_rmatrix import linalg
from affine_rmatrix.operators import GradedSpace
from affine_rmatrix.qfield import ONE, RatQ, is_regular_at_root, q_bracket
from affine_rmatrix.rootdata import Root, UnsupportedType, affine_cartan
from affine_rmatrix.rootvec import (RootVectorConventions, aform_basis, build_root_vectors, dotted_variants,
                                    kostant_partitions, pbw_span_check)
from affine_rmatrix.verma import build_verma

q = RatQ.q_power(1)
A1 = Root("real", (0, 1))
A0 = Root("real", (1, 0))
D1 = Root("imag", (1, 1), 1)
D2 = Root("imag", (2, 2), 1)
A1D = Root("real", (1, 2))
D2A = Root("real", (2, 1))


@pytest.fixture(scope="module")
def mod(cartan):
    return build_verma(cartan, (1, 2, 0), 4)


@pytest.fixture(scope="module")
def rv(mod):
    return build_root_vectors(mod)


def test_base_cases(mod, rv):
    assert rv[A1].E.equals(mod.E(1)) and rv[A1].F.equals(mod.F(1))
    assert rv[A0].E.equals(mod.E(0)) and rv[A0].F.equals(mod.F(0))


def test_root_set(cartan, rv):
    assert rv.roots() == cartan.positive_roots_up_to(4)
    for rt in rv.roots():
        v = rv[rt]
        assert v.E.step == tuple(-c for c in rt.coords)
        assert v.F.step == rt.coords


def test_imaginary_dual_path(mod, rv):
    E0, E1 = mod.E(0), mod.E(1)
    q2 = q * q
    t1 = E1 @ E0 - (E0 @ E1).scale(q2)
    assert rv[D1].E.equals(t1)
    # alpha_1 + delta from the q-bracket with Et_1, normalized by [2]
    inv2 = RatQ.from_laurent(q_bracket(2)).inverse()
    up1 = (t1 @ E1 - E1 @ t1).scale(inv2)
    assert rv[A1D].E.equals(up1)
    # 2 delta - alpha_1 likewise from the other side
    down2 = (E0 @ t1 - t1 @ E0).scale(inv2)
    assert rv[D2A].E.equals(down2)
    # (2 delta, 1) from the logarithm: P_2 = Et_2 - (q - q^-1)/2 Et_1^2
    t2 = up1 @ E0 - (E0 @ up1).scale(q2)
    c = (q - q.inverse()) / RatQ(2)
    assert rv[D2].E.equals(t2 - (t1 @ t1).scale(c))


def test_F_side_mirrors(mod, rv):
    F0, F1 = mod.F(0), mod.F(1)
    qm2 = q ** -2
    # the F side applies the anti-automorphism E_i -> F_i, q -> q^-1
    assert rv[D1].F.equals(F0 @ F1 - (F1 @ F0).scale(qm2))


def test_dotted_and_checked(cartan, rv):
    dots = dotted_variants(rv)
    for rt in rv.roots():
        v = rv[rt]
        e_dot, f_dot = dots[rt]
        if rt.is_real:
            assert f_dot.equals(v.F)
        else:
            r = cartan.imaginary_degree(rt)
            assert f_dot.equals(v.F.scale(ONE / (q ** r + q ** -r)))
        assert v.E_check.equals(v.E.scale(q - q.inverse()))
        assert v.F_check.equals(v.F.scale(q.inverse() - q))
        assert v.E_check_dot.equals(e_dot.scale(q - q.inverse()))
        assert v.F_check_dot.equals(f_dot.scale(q - q.inverse()))


def test_pbw_span(rv):
    rep = pbw_span_check(rv)
    assert rep["ok"], rep["failing"]
    rows = {tuple(r["degree"]): r for r in rep["degrees"]}
    assert rows[(0, 1)]["rank"] == 1
    assert rows[(1, 1)]["rank"] == rows[(1, 1)]["dim"] == 2
    assert rows[(2, 2)]["rank"] == rows[(2, 2)]["dim"] == rows[(2, 2)]["monomials"]


def test_pbw_span_reverse_order(cartan):
    m = build_verma(cartan, (2, 1, 0), 4)
    from affine_rmatrix.rootvec import REVERSE_CONVENTIONS
    rv = build_root_vectors(m, conventions=REVERSE_CONVENTIONS)
    assert pbw_span_check(rv)["ok"]


def test_kostant_partitions(cartan):
    roots = cartan.positive_roots_up_to(4)
    parts = kostant_partitions(roots, (3, 1))
    assert len(parts) == 3
    assert len(kostant_partitions(roots, (0, 0))) == 1
    by_height = {}
    for a0 in range(5):
        for a1 in range(5 - a0):
            by_height[a0 + a1] = by_height.get(a0 + a1, 0) + len(kostant_partitions(roots, (a0, a1)))
    assert by_height == {0: 1, 1: 2, 2: 4, 3: 8, 4: 14}


def test_aform_basis(rv):
    ab = aform_basis(rv)
    assert ab.transition[(0, 0)] == [[ONE]]
    assert ab.transition[(0, 1)] == [[q.inverse() - q]]
    assert len(ab.monomials[(1, 1)]) == 2
    assert linalg.rank(ab.transition[(1, 1)]) == 2
    for z, t in ab.transition.items():
        assert linalg.equal(linalg.matmul(t, ab.inverse[z]), linalg.identity(len(t)))


@pytest.mark.parametrize("ell", [1, 3, 5, 7])
def test_aform_transition_regularity(rv, ell):
    # T is integral; (q^-1 - q)^|eta| T^-1 is integral (T^-1 itself has the
    # expected (q - 1) pole at ell = 1 from the checked normalization)
    ab = aform_basis(rv)
    for z, t in ab.transition.items():
        scale = (q.inverse() - q) ** sum(z)
        for row_t, row_i in zip(t, ab.inverse[z]):
            assert all(is_regular_at_root(x, ell) for x in row_t)
            assert all(is_regular_at_root(x * scale, ell) for x in row_i)
    if ell == 1:
        assert not all(is_regular_at_root(x, 1) for row in ab.inverse[(0, 1)] for x in row)


def test_fault_scale(mod):
    bad = build_root_vectors(mod, conventions=RootVectorConventions(scale={D1.label: 2}))
    good = build_root_vectors(mod)
    assert bad[D1].E.equals(good[D1].E.scale(RatQ(2)))
    assert bad[A1].E.equals(good[A1].E)


def test_box_space(cartan):
    m = build_verma(cartan, (1, 2, 0), 6)
    space = GradedSpace([m], 6, (3, 3))
    rv = build_root_vectors(m, space=space)
    assert Root("imag", (3, 3), 1) in rv
    assert pbw_span_check(rv)["ok"]


def test_unsupported_rank():
    c = affine_cartan("A2")
    m = build_verma(c, (0, 0, 0, 0), 1)
    with pytest.raises(UnsupportedType):
        build_root_vectors(m)


def test_to_json(rv):
    d = rv.to_json()
    assert set(d) == {rt.label for rt in rv.roots()}
