"""Truncated universal R-matrix on tensor products of Verma modules.

R = Theta * q^-T with Theta the ordered product of exponential factors over
the positive roots. Everything is exact; identities are checked blockwise on
the degrees a truncated tensor space can represent.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .operators import GradedOperator, GradedSpace, _zero_block, tensor_leg_operator, vadd
from .qfield import ONE, ZERO, RatQ
from .rootdata import AffineCartan, Root
from .rootvec import (RootVectorConventions, RootVectorSet, build_root_vectors,
                      conventions_for_order)
from .verma import TruncatedVerma, build_verma

VARIANTS = ("E_Fdot", "Edot_F")


class VariantMismatch(ArithmeticError):
    """The two ordered-product variants assembled to different operators."""


class NoSolution(ArithmeticError):
    """The oracle's linear system is inconsistent."""


# ---------------------------------------------------------------- setup
class TensorSetup:
    """Modules, their root vectors and the tensor space they span.

    With ``box`` the space keeps only total degrees bounded componentwise by
    it (legs are then built to height N as well, root vectors only inside the box).
    """

    def __init__(self, cartan: AffineCartan, weights: Sequence, N: int, box=None, lowest: bool = False,
                 conventions: RootVectorConventions | None = None, order: str = "default"):
        self.cartan = cartan
        self.N = N
        self.box = tuple(box) if box is not None else None
        self.lowest = lowest
        self.order = order
        self.conventions = conventions if conventions is not None else conventions_for_order(order)
        self.modules: list[TruncatedVerma] = [build_verma(cartan, w, N, lowest=lowest) for w in weights]
        self.space = GradedSpace(self.modules, N, self.box)
        self._rootvecs: list[RootVectorSet | None] = [None] * len(self.modules)

    @property
    def weights(self):
        return [m.weight.exponents for m in self.modules]

    def rootvecs(self, leg: int) -> RootVectorSet:
        if self._rootvecs[leg] is None:
            mod = self.modules[leg]
            legspace = GradedSpace([mod], self.N, self.box)
            self._rootvecs[leg] = build_root_vectors(mod, space=legspace, conventions=self.conventions)
        return self._rootvecs[leg]

    def roots(self) -> list[Root]:
        roots = self.cartan.positive_roots_up_to(max(self.N, 1), order=self.order)
        return [rt for rt in roots if rt.height <= self.N and self.space.contains(rt.coords)]

    def leg_op(self, ops: dict[int, GradedOperator], name: str = "") -> GradedOperator:
        """Tensor operator with the given single-leg operators, identity elsewhere."""
        return tensor_leg_operator(self.space, [ops.get(k) for k in range(len(self.modules))], name)


def _signed(mod: TruncatedVerma, eta) -> list[int]:
    # weight of component eta is l - eta (highest) or l + eta (lowest)
    return [e if mod.lowest else -e for e in eta]


# ---------------------------------------------------------------- Cartan part
def qT_operator(setup: TensorSetup, legs: tuple[int, int] = (0, 1), inverse: bool = False) -> GradedOperator:
    """q^-T on legs (a, b): scalar q^-(l - eta | m - xi) on each part."""
    a, b = legs
    c = setup.cartan
    ma, mb = setup.modules[a], setup.modules[b]
    l, m = ma.weight.exponents, mb.weight.exponents
    sign = 1 if inverse else -1
    base = sign * c.weight_pairing(l, m)
    whole = base.numerator // base.denominator
    frac = base - whole

    def scalar(etas):
        ea, eb = _signed(ma, etas[a]), _signed(mb, etas[b])
        # (l + ea | m + eb) - (l|m) = (ea|m) + (l|eb) + (ea|eb)
        ex = c.root_weight_pairing(ea, m) + c.root_weight_pairing(eb, l) + c.root_pairing(ea, eb)
        return RatQ.q_power(whole + sign * ex)

    name = f"q^{'+' if inverse else '-'}T{a + 1}{b + 1}"
    return GradedOperator.diagonal(setup.space, scalar, name, prefactor=frac)


# ---------------------------------------------------------------- coproduct
def _k_root(cartan: AffineCartan, coords, sign: int = 1) -> list[int]:
    v = [sign * x for x in coords] + [0] * (cartan.rank_inf - len(coords))
    return v


def coproduct_action(setup: TensorSetup, gen: str, index, opposite: bool = False) -> GradedOperator:
    """Delta(u) or Delta^op(u) on a two-leg setup.

    gen is "E", "F" (index i in I) or "K" (index: vector over I-infinity).
    """
    if len(setup.modules) != 2:
        raise ValueError("coproducts act on two-leg setups")
    m1, m2 = setup.modules
    c = setup.cartan
    if gen == "K":
        return setup.leg_op({0: m1.K(index), 1: m2.K(index)}, f"D(K{tuple(index)})")
    i = index
    ka = _k_root(c, c.simple_root(i)[: c.n + 1])
    kma = [-x for x in ka]
    if gen == "E":
        # E (x) 1 + K_a (x) E ; opposite: 1 (x) E + E (x) K_a
        if not opposite:
            t1 = setup.leg_op({0: m1.E(i)})
            t2 = setup.leg_op({0: m1.K(ka), 1: m2.E(i)})
        else:
            t1 = setup.leg_op({1: m2.E(i)})
            t2 = setup.leg_op({0: m1.E(i), 1: m2.K(ka)})
    elif gen == "F":
        # F (x) K_-a + 1 (x) F ; opposite: K_-a (x) F + F (x) 1
        if not opposite:
            t1 = setup.leg_op({0: m1.F(i), 1: m2.K(kma)})
            t2 = setup.leg_op({1: m2.F(i)})
        else:
            t1 = setup.leg_op({0: m1.K(kma), 1: m2.F(i)})
            t2 = setup.leg_op({0: m1.F(i)})
    else:
        raise ValueError(f"unknown generator {gen!r}")
    op = t1 + t2
    op.name = f"D{'op' if opposite else ''}({gen}{i})"
    return op


# ---------------------------------------------------------------- R^(1)
def _exp_coefficients(cartan: AffineCartan, root: Root, nmax: int) -> list[RatQ]:
    """c_n of exp_alpha: 1/(n)_{q_a^2}! for real roots, 1/n! for imaginary ones."""
    out = [ONE]
    if root.is_real:
        qa2 = RatQ.q_power(2 * cartan.q_alpha_exponent(root))
        for n in range(1, nmax + 1):
            rn = (qa2 ** n - ONE) / (qa2 - ONE)
            out.append(out[-1] / rn)
    else:
        for n in range(1, nmax + 1):
            out.append(out[-1] * RatQ(Fraction(1, n)))
    return out


def factor_argument_coefficient(cartan: AffineCartan, root: Root) -> RatQ:
    """a_alpha (q_alpha^-1 - q_alpha)."""
    qa = RatQ.q_power(cartan.q_alpha_exponent(root))
    return cartan.a_alpha(root) * (qa.inverse() - qa)


def r1_factor(setup: TensorSetup, root: Root, variant: str = "E_Fdot", legs: tuple[int, int] = (0, 1)) -> GradedOperator:
    """exp_alpha(a_alpha (q_a^-1 - q_a) X (x) Y) truncated to the space."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    a, b = legs
    if root.height > setup.N or not setup.space.contains(root.coords):
        return GradedOperator.identity(setup.space, f"R1[{root.label}]")
    va, vb = setup.rootvecs(a)[root], setup.rootvecs(b)[root]
    x, y = (va.E, vb.F_dot) if variant == "E_Fdot" else (va.E_dot, vb.F)
    nmax = setup.N // root.height
    coeffs = _exp_coefficients(setup.cartan, root, nmax)
    arg = factor_argument_coefficient(setup.cartan, root)
    total = GradedOperator.identity(setup.space)
    xp = yp = None
    for n in range(1, nmax + 1):
        xp = x if xp is None else xp @ x
        yp = y if yp is None else yp @ y
        term = setup.leg_op({a: xp, b: yp})
        if term.is_zero():
            break
        total = total + term.scale(coeffs[n] * arg ** n)
    total.name = f"R1[{root.label}]"
    return total


@dataclass
class RFactorization:
    factors: list[tuple[Root, GradedOperator]]
    qT: GradedOperator
    theta: GradedOperator
    assembled: GradedOperator
    variant: str
    legs: tuple[int, int] = (0, 1)

    def check_product(self) -> bool:
        prod = GradedOperator.identity(self.qT.space)
        for _, f in self.factors:
            prod = prod @ f
        return (prod @ self.qT).equals(self.assembled)


def assemble_R(setup: TensorSetup, variant: str = "E_Fdot", legs: tuple[int, int] = (0, 1),
               drop_cartan: bool = False) -> RFactorization:
    """Ordered product over the convex order, times q^-T on the chosen legs.

    ``variant="both"`` assembles both and raises VariantMismatch if they differ.
    ``drop_cartan`` omits q^-T (fault injection).
    """
    if variant == "both":
        r1 = assemble_R(setup, "E_Fdot", legs, drop_cartan)
        r2 = assemble_R(setup, "Edot_F", legs, drop_cartan)
        bad = r1.assembled.residual_blocks(r2.assembled)
        if bad:
            raise VariantMismatch(f"variants differ at degrees {bad}")
        return r1
    factors = [(rt, r1_factor(setup, rt, variant, legs)) for rt in setup.roots()]
    theta = GradedOperator.identity(setup.space, "Theta")
    for _, f in factors:
        theta = theta @ f
    qt = GradedOperator.identity(setup.space, "1") if drop_cartan else qT_operator(setup, legs)
    assembled = theta @ qt
    a, b = legs
    assembled.name = f"R{a + 1}{b + 1}"
    return RFactorization(factors, qt, theta, assembled, variant, legs)


# ---------------------------------------------------------------- reports
def _violation(z, m) -> dict:
    nz = sum(1 for row in m for x in row if x)
    return {"bidegree": list(z), "residual_norm_description": f"{nz} nonzero entries"}


def _compare(lhs: GradedOperator, rhs: GradedOperator):
    valid = sorted(lhs.blocks.keys() & rhs.blocks.keys(), key=lambda v: (sum(v), v))
    bad = lhs.residual_blocks(rhs)
    viol = []
    for z in bad:
        if lhs.prefactor == rhs.prefactor:
            viol.append(_violation(z, linalg.sub(lhs.blocks[z], rhs.blocks[z])))
        else:
            viol.append({"bidegree": list(z), "residual_norm_description": "fractional prefactors differ"})
    return valid, viol


def _report(identity: str, valid, violations, start: float, **extra) -> dict:
    rep = {
        "identity": identity,
        "valid_bidegrees": [list(z) for z in valid],
        "violations": violations,
        "ok": not violations,
        "elapsed": round(time.perf_counter() - start, 6),
    }
    rep.update(extra)
    return rep


def intertwining_generators(cartan: AffineCartan) -> list[tuple[str, object]]:
    gens: list[tuple[str, object]] = []
    for i in cartan.index_set:
        gens.append(("E", i))
        gens.append(("F", i))
    for j in range(cartan.rank_inf):
        mu = [0] * cartan.rank_inf
        mu[j] = 1
        gens.append(("K", tuple(mu)))
    return gens


def verify_intertwining(setup: TensorSetup, R: GradedOperator | RFactorization) -> dict:
    """R Delta(u) = Delta^op(u) R for u in {E_i, F_i, K_alpha_j}."""
    start = time.perf_counter()
    Rop = R.assembled if isinstance(R, RFactorization) else R
    checks = []
    ok = True
    for gen, idx in intertwining_generators(setup.cartan):
        d = coproduct_action(setup, gen, idx)
        dop = coproduct_action(setup, gen, idx, opposite=True)
        valid, viol = _compare(Rop @ d, dop @ Rop)
        ok = ok and not viol
        checks.append({"generator": f"{gen}{idx}", "valid_bidegrees": [list(z) for z in valid],
                       "violations": viol})
    valid_all = sorted({tuple(z) for ch in checks for z in ch["valid_bidegrees"]}, key=lambda v: (sum(v), v))
    viol_all = [dict(v, generator=ch["generator"]) for ch in checks for v in ch["violations"]]
    return _report("R*Delta(u) = Delta^op(u)*R", valid_all, viol_all, start, generators=checks)


def verify_ybe(cartan: AffineCartan, weights: Sequence, N: int, drop_cartan: bool = False,
               conventions: RootVectorConventions | None = None, setup: TensorSetup | None = None) -> dict:
    """R12 R13 R23 = R23 R13 R12 on the three-leg tensor space cut at N."""
    start = time.perf_counter()
    if setup is None:
        setup = TensorSetup(cartan, weights, N, conventions=conventions)
    r12 = assemble_R(setup, legs=(0, 1), drop_cartan=drop_cartan).assembled
    r13 = assemble_R(setup, legs=(0, 2), drop_cartan=drop_cartan).assembled
    r23 = assemble_R(setup, legs=(1, 2), drop_cartan=drop_cartan).assembled
    valid, viol = _compare(r12 @ r13 @ r23, r23 @ r13 @ r12)
    return _report("R12 R13 R23 = R23 R13 R12", valid, viol, start)


def realize_R0(setup: TensorSetup) -> dict:
    """q^-T X q^T against the Cartan-part automorphism on generators and checked root vectors."""
    start = time.perf_counter()
    c = setup.cartan
    qt, qti = qT_operator(setup), qT_operator(setup, inverse=True)
    m1, m2 = setup.modules
    cases = []

    def conj(x):
        return qt @ x @ qti

    def add(name, x, expected):
        valid, viol = _compare(conj(x), expected)
        cases.append({"case": name, "valid_bidegrees": [list(z) for z in valid], "violations": viol})

    for j in range(c.rank_inf):
        mu = [0] * c.rank_inf
        mu[j] = 1
        add(f"K{j} x 1", setup.leg_op({0: m1.K(mu)}), setup.leg_op({0: m1.K(mu)}))
        add(f"1 x K{j}", setup.leg_op({1: m2.K(mu)}), setup.leg_op({1: m2.K(mu)}))
    for i in c.index_set:
        ka = _k_root(c, c.simple_root(i)[: c.n + 1])
        kma = [-x for x in ka]
        add(f"E{i} x 1", setup.leg_op({0: m1.E(i)}), setup.leg_op({0: m1.E(i), 1: m2.K(kma)}))
        add(f"1 x E{i}", setup.leg_op({1: m2.E(i)}), setup.leg_op({0: m1.K(kma), 1: m2.E(i)}))
        add(f"F{i} x 1", setup.leg_op({0: m1.F(i)}), setup.leg_op({0: m1.F(i), 1: m2.K(ka)}))
        add(f"1 x F{i}", setup.leg_op({1: m2.F(i)}), setup.leg_op({0: m1.K(ka), 1: m2.F(i)}))
    rv1, rv2 = setup.rootvecs(0), setup.rootvecs(1)
    for rt in setup.roots():
        ka = _k_root(c, rt.coords)
        kma = [-x for x in ka]
        e1, e2 = rv1[rt].E_check, rv2[rt].E_check
        f1, f2 = rv1[rt].F_check, rv2[rt].F_check
        add(f"Echeck{rt.label} x 1", setup.leg_op({0: e1}), setup.leg_op({0: e1, 1: m2.K(kma)}))
        add(f"1 x Echeck{rt.label}", setup.leg_op({1: e2}), setup.leg_op({0: m1.K(kma), 1: e2}))
        add(f"Fcheck{rt.label} x 1", setup.leg_op({0: f1}), setup.leg_op({0: f1, 1: m2.K(ka)}))
        add(f"1 x Fcheck{rt.label}", setup.leg_op({1: f2}), setup.leg_op({0: m1.K(ka), 1: f2}))
    viol = [dict(v, case=cs["case"]) for cs in cases for v in cs["violations"]]
    valid = sorted({tuple(z) for cs in cases for z in cs["valid_bidegrees"]}, key=lambda v: (sum(v), v))
    return _report("q^-T X q^T = R0(X)", valid, viol, start, cases=[
        {"case": cs["case"], "ok": not cs["violations"]} for cs in cases])


# ---------------------------------------------------------------- oracle
@dataclass
class OracleResult:
    R: GradedOperator
    theta: GradedOperator
    underdetermined: list = field(default_factory=list)
    consistency_checked: int = 0


def quasiR_oracle(setup: TensorSetup, check_consistency: bool = True) -> OracleResult:
    """Independent R from R(v_l (x) w) = q^-T(v_l (x) w) and R Delta(F_i) = Delta^op(F_i) R.

    Since V(l) (x) M is spanned by F-words applied to v_l (x) M, these equations
    fix R uniquely: F_i b (x) w = k^-1 (Delta(F_i)(b (x) w) - b (x) F_i w) where
    K_-a_i w = k w. Columns are produced by this recursion on the first letter of
    each basis word; with ``check_consistency`` the equation is re-checked for
    every letter and every spanning vector F_i b, and any mismatch raises NoSolution.
    Uses no root vectors.
    """
    if len(setup.modules) != 2 or setup.lowest:
        raise ValueError("the oracle handles highest-weight two-leg setups")
    c = setup.cartan
    space = setup.space
    Vl, Vm = setup.modules
    qt = qT_operator(setup)
    dopF = {i: coproduct_action(setup, "F", i, opposite=True) for i in c.index_set}
    cols: dict[tuple, list] = {}

    def qt_scalar(e, x):
        z = vadd(e, x)
        off = space.part_offset(z, (e, x))
        return qt.blocks[z][off][off]

    def unit(z, e, a, x, b, s):
        v = [ZERO] * space.dim(z)
        v[space.part_offset(z, (e, x)) + a * Vm.dim(x) + b] = s
        return v

    def combo(coeffs, e, x, bidx):
        """R applied to (sum_a coeffs[a] basis_a) (x) w_bidx."""
        z = vadd(e, x)
        out = [ZERO] * space.dim(z)
        for a, cc in enumerate(coeffs):
            if cc:
                cv = col(e, a, x, bidx)
                out = [p + cc * r if r else p for p, r in zip(out, cv)]
        return out

    def via_letter(i, coeffs, ep, x, b):
        """R(F_i u (x) w) for u = sum coeffs * basis of degree ep."""
        z = vadd(ep, x)
        z2 = list(z)
        z2[i] += 1
        z2 = tuple(z2)
        inner = combo(coeffs, ep, x, b)
        acc = dopF[i].apply(z, inner)
        xp = list(x)
        xp[i] += 1
        xp = tuple(xp)
        fblk = Vm.F(i).blocks.get(x)
        if fblk is not None and Vm.dim(xp):
            for b2, row in enumerate(fblk):
                fc = row[b]
                if fc:
                    rv = combo(coeffs, ep, xp, b2)
                    acc = [p - fc * r if r else p for p, r in zip(acc, rv)]
        kap = RatQ.q_power(Vm.k_exponent(_k_root(c, c.simple_root(i)[: c.n + 1], -1), x))
        inv = kap.inverse()
        return [inv * t if t else t for t in acc]

    def col(e, a, x, b):
        key = (e, a, x, b)
        v = cols.get(key)
        if v is not None:
            return v
        z = vadd(e, x)
        if not any(e):
            v = unit(z, e, a, x, b, qt_scalar(e, x))
        else:
            w = Vl.components[e][a]
            i, rest = w[0], w[1:]
            ep = list(e)
            ep[i] -= 1
            v = via_letter(i, Vl.word_coords(rest), tuple(ep), x, b)
        cols[key] = v
        return v

    blocks = {}
    for z in space.degrees:
        d = space.dim(z)
        m = _zero_block(d, d)
        for (e, x), off, _ in space.parts(z):
            for a in range(Vl.dim(e)):
                for b in range(Vm.dim(x)):
                    v = col(e, a, x, b)
                    j = off + a * Vm.dim(x) + b
                    for r in range(d):
                        m[r][j] = v[r]
        blocks[z] = m
    R = GradedOperator(space, (0,) * space.size, blocks, qt.prefactor, "R_oracle")

    checked = 0
    if check_consistency:
        for z in space.degrees:
            for (ep, x), _, _ in space.parts(z):
                for i in c.index_set:
                    e = list(ep)
                    e[i] += 1
                    e = tuple(e)
                    if not space.contains(vadd(e, x)) or not Vl.dim(e):
                        continue
                    fblk = Vl.F(i).blocks[ep]
                    for a in range(Vl.dim(ep)):
                        image = [row[a] for row in fblk]   # F_i b_a in basis of degree e
                        unit_a = [ONE if k == a else ZERO for k in range(Vl.dim(ep))]
                        for b in range(Vm.dim(x)):
                            lhs = combo(image, e, x, b)
                            rhs = via_letter(i, unit_a, ep, x, b)
                            checked += 1
                            if lhs != rhs:
                                raise NoSolution(f"oracle equations inconsistent at {(e, x)} letter {i}")
    theta = R @ qT_operator(setup, inverse=True)
    theta.name = "Theta_oracle"
    return OracleResult(R, theta, [], checked)


def compare_with_oracle(setup: TensorSetup, factorization: RFactorization, oracle: OracleResult | None = None) -> dict:
    """Shift-by-shift comparison of the assembled R with the oracle.

    A shift beta collects the parts (eta, xi) -> (eta - beta, xi + beta); the
    report lists the shifts where they differ.
    """
    start = time.perf_counter()
    oracle = oracle or quasiR_oracle(setup)
    A, B = factorization.assembled, oracle.R
    space = setup.space
    bad_shifts: set[tuple] = set()
    valid = sorted(A.blocks.keys() & B.blocks.keys(), key=lambda v: (sum(v), v))
    for z in valid:
        if A.prefactor != B.prefactor:
            bad_shifts.add(("prefactor",))
            continue
        for src, _, _ in space.parts(z):
            for tgt, _, _ in space.parts(z):
                shift = tuple(s - t for s, t in zip(src[0], tgt[0]))
                if any(v < 0 for v in shift):
                    continue
                pa, pb = A.part_block(z, src, tgt), B.part_block(z, src, tgt)
                if not linalg.equal(pa, pb):
                    bad_shifts.add(shift)
    viol = [{"bidegree": list(s), "residual_norm_description": "shift block differs"}
            for s in sorted(bad_shifts, key=lambda v: (len(v), sum(v) if v and isinstance(v[0], int) else 0, v))]
    return _report("assembled R = oracle R", valid, viol, start,
                   oracle_consistency_checks=oracle.consistency_checked,
                   underdetermined=oracle.underdetermined)
