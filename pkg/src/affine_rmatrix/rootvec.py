"""Quantum root vectors of affine A1 as operators on truncated Verma modules.

E-side recursion (all products are operator compositions):

    E_{a1} = E_1,  E_{d-a1} = E_0
    Et_1 = E_1 E_0 - q^e E_0 E_1
    E_{a1+r d}     = (Et_1 E_{a1+(r-1)d} - E_{a1+(r-1)d} Et_1) / [2]
    E_{(r+1)d-a1}  = (E_{r d-a1} Et_1 - Et_1 E_{r d-a1}) / [2]
    Et_r = E_{a1+(r-1)d} E_0 - q^e E_0 E_{a1+(r-1)d}
    1 + (q - q^-1) sum_r Et_r u^r = exp((q - q^-1) sum_r E_{(r d,1)} u^r)

with e = 2 by default (the exponential's sign flips with ``log_sign``). For
the reversed convex order the mirrored choice e = -2, log_sign = -1 is the
one that reproduces the R-matrix. The F side is the image under the anti-automorphism
E_i -> F_i, q -> q^-1, so every product is reversed and q is inverted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import linalg
from .operators import GradedOperator, GradedSpace, vadd
from .qfield import ONE, ZERO, RatQ, q_bracket
from .rootdata import AffineCartan, Root, UnsupportedType


class RankDeficient(ArithmeticError):
    """Ordered root-vector monomials fail to span a weight component."""


@dataclass(frozen=True)
class RootVectorConventions:
    """Normalization choices for the recursion.

    ``scale`` multiplies the finished E_alpha (keyed by root label) and exists
    for fault injection only.
    """

    q_exponent: int = 2
    log_sign: int = 1
    scale: Mapping[str, object] = field(default_factory=dict)


DEFAULT_CONVENTIONS = RootVectorConventions()
REVERSE_CONVENTIONS = RootVectorConventions(q_exponent=-2, log_sign=-1)


def conventions_for_order(order: str) -> RootVectorConventions:
    if order == "default":
        return DEFAULT_CONVENTIONS
    if order == "reverse":
        return REVERSE_CONVENTIONS
    raise ValueError(f"unknown root order {order!r}")


def restrict_to(op: GradedOperator, space: GradedSpace) -> GradedOperator:
    """Re-home a single-leg operator on a smaller (box-cut) space of the same module."""
    blocks = {
        z: m for z, m in op.blocks.items()
        if space.contains(z) and z in space._parts and space.contains(vadd(z, op.step))
    }
    return GradedOperator(space, op.step, blocks, op.prefactor, op.name)


class _Side:
    """Either the E-side (products as written) or the F-side (mirrored)."""

    def __init__(self, gens, mirrored: bool):
        self.gens = gens
        self.mirrored = mirrored

    def mul(self, a, b):
        return b @ a if self.mirrored else a @ b

    def qpow(self, k: int) -> RatQ:
        return RatQ.q_power(-k if self.mirrored else k)

    @property
    def qq(self) -> RatQ:
        # q - q^-1 on the E side, its mirror image on the F side
        return self.qpow(1) - self.qpow(-1)


def _recursion(side: _Side, roots: list[Root], e: int, log_sign: int = 1) -> dict[Root, GradedOperator]:
    g1, g0 = side.gens[1], side.gens[0]
    inv2 = RatQ.from_laurent(q_bracket(2)).inverse()
    rmax = max((max(rt.coords) for rt in roots), default=0)

    def qcomm(a, b):  # a b - q^e b a, mirrored on the F side
        return side.mul(a, b) - side.mul(b, a).scale(side.qpow(e))

    out: dict[Root, GradedOperator] = {}
    up = {0: g1}      # E_{a1 + r d}
    down = {1: g0}    # E_{r d - a1}
    tilde = {}
    t1 = qcomm(g1, g0)
    for r in range(1, rmax + 1):
        tilde[r] = qcomm(up[r - 1], g0) if r > 1 else t1
        up[r] = (side.mul(t1, up[r - 1]) - side.mul(up[r - 1], t1)).scale(inv2)
        down[r + 1] = (side.mul(down[r], t1) - side.mul(t1, down[r])).scale(inv2)
    prim = _log_series(side, tilde, rmax, log_sign)
    for rt in roots:
        c0, c1 = rt.coords
        if not rt.is_real:
            out[rt] = prim[c0]
        elif c1 == c0 + 1:
            out[rt] = up[c0]
        elif c1 == c0 - 1:
            out[rt] = down[c0]
        else:
            raise ValueError(f"not a root of affine A1: {rt}")
    return out


def _log_series(side: _Side, tilde: dict[int, GradedOperator], rmax: int, sign: int = 1) -> dict[int, GradedOperator]:
    """Coefficients P_r with 1 + c sum Et_r u^r = exp(c sum P_r u^r), c = side.qq.

    Uses the Newton-type identity r P_r-part: if A(u) = 1 + c sum Et_r u^r and
    log A = c sum P_r u^r then u A' = A * u (log A)', i.e.
    r c Et_r = sum_{k=1}^{r} k c P_k * [u^{r-k}] A.
    """
    c = side.qq * RatQ(sign)
    prim: dict[int, GradedOperator] = {}
    for r in range(1, rmax + 1):
        acc = tilde[r].scale(RatQ(r))
        for k in range(1, r):
            # [u^{r-k}] A = c Et_{r-k}
            acc = acc - side.mul(prim[k], tilde[r - k]).scale(c * RatQ(k))
        prim[r] = acc.scale(RatQ(Fraction(1, r)))
    return prim


@dataclass
class RootVector:
    root: Root
    E: GradedOperator
    F: GradedOperator
    E_dot: GradedOperator
    F_dot: GradedOperator
    E_check: GradedOperator
    F_check: GradedOperator
    E_check_dot: GradedOperator
    F_check_dot: GradedOperator


class RootVectorSet:
    """Root vectors for every root of height <= N fitting the module's space."""

    def __init__(self, cartan: AffineCartan, module, space: GradedSpace, vectors: dict[Root, RootVector],
                 conventions: RootVectorConventions):
        self.cartan = cartan
        self.module = module
        self.space = space
        self.vectors = vectors
        self.conventions = conventions

    def __getitem__(self, root: Root) -> RootVector:
        return self.vectors[root]

    def __contains__(self, root: Root) -> bool:
        return root in self.vectors

    def roots(self) -> list[Root]:
        return list(self.vectors)

    def to_json(self) -> dict:
        return {
            rt.label: {
                "root": rt.to_json(),
                "E": operator_to_json(rv.E),
                "F": operator_to_json(rv.F),
            }
            for rt, rv in self.vectors.items()
        }


def operator_to_json(op: GradedOperator) -> dict:
    return {
        "step": list(op.step),
        "prefactor": str(op.prefactor),
        "blocks": [
            {"degree": list(z), "matrix": [[x.to_string() for x in row] for row in m]}
            for z, m in sorted(op.blocks.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        ],
    }


def roots_for_space(cartan: AffineCartan, space: GradedSpace, order: str = "default") -> list[Root]:
    """Roots of height <= N that fit the space's degree cut (box included)."""
    return [rt for rt in cartan.positive_roots_up_to(max(space.N, 1), order=order)
            if rt.height <= space.N and space.contains(rt.coords)]


def build_root_vectors(module, N: int | None = None, space: GradedSpace | None = None,
                       conventions: RootVectorConventions = DEFAULT_CONVENTIONS) -> RootVectorSet:
    """E_alpha, F_alpha and their dotted/checked variants on ``module``.

    ``space`` defaults to the module's own space cut at height N; pass a box-cut
    space to reach single high degrees cheaply.
    """
    cartan = module.cartan
    if cartan.n != 1:
        raise UnsupportedType(f"root-vector recursion is only fixed for A1, got {cartan.type_label}")
    if space is None:
        N = module.N if N is None else N
        if N > module.N:
            raise ValueError("module is truncated below the requested height")
        space = module.space if N == module.N else GradedSpace([module], N)
    roots = roots_for_space(cartan, space)
    eg = {i: restrict_to(module.E(i), space) for i in range(2)}
    fg = {i: restrict_to(module.F(i), space) for i in range(2)}
    e = conventions.q_exponent
    E = _recursion(_Side(eg, False), roots, e, conventions.log_sign)
    F = _recursion(_Side(fg, True), roots, e, conventions.log_sign)
    for rt in roots:
        s = conventions.scale.get(rt.label)
        if s is not None:
            E[rt] = E[rt].scale(RatQ.coerce(s))
    vectors = {rt: _variants(cartan, rt, E[rt], F[rt]) for rt in roots}
    return RootVectorSet(cartan, module, space, vectors, conventions)


def _variants(cartan: AffineCartan, rt: Root, e_op: GradedOperator, f_op: GradedOperator) -> RootVector:
    qa = RatQ.q_power(cartan.q_alpha_exponent(rt))
    if rt.is_real:
        e_dot, f_dot = e_op, f_op
    else:
        # rank one: Fdot_(r d,1) = mu_11 F_(r d,1), likewise for E
        _, minv = cartan.build_M_r(cartan.imaginary_degree(rt))
        mu = minv[0][0]
        e_dot, f_dot = e_op.scale(mu), f_op.scale(mu)
    up = qa - qa.inverse()
    return RootVector(
        root=rt, E=e_op, F=f_op, E_dot=e_dot, F_dot=f_dot,
        E_check=e_op.scale(up), F_check=f_op.scale(-up),
        E_check_dot=e_dot.scale(up), F_check_dot=f_dot.scale(up),
    )


def dotted_variants(rv: RootVectorSet) -> dict[Root, tuple[GradedOperator, GradedOperator]]:
    """(E_dot, F_dot) per root."""
    return {rt: (v.E_dot, v.F_dot) for rt, v in rv.vectors.items()}


# ---------------------------------------------------------------- PBW data
def kostant_partitions(roots: list[Root], eta) -> list[tuple[Root, ...]]:
    """Multisets of ``roots`` (listed in the given order) summing to eta."""
    eta = tuple(eta)
    out: list[tuple[Root, ...]] = []

    def rec(start, rest, acc):
        if not any(rest):
            out.append(tuple(acc))
            return
        for k in range(start, len(roots)):
            c = roots[k].coords
            if all(a <= b for a, b in zip(c, rest)):
                acc.append(roots[k])
                rec(k, tuple(b - a for a, b in zip(c, rest)), acc)
                acc.pop()

    rec(0, eta, [])
    return out


def _highest_vector(space: GradedSpace):
    z = (0,) * space.size
    return z, [ONE] * space.dim(z)


def monomial_vector(rv: RootVectorSet, mono: tuple[Root, ...], checked: bool = False) -> list:
    """F_{b1} F_{b2} ... F_{bk} v_lambda with b1 leftmost (so bk acts first)."""
    zeta, vec = _highest_vector(rv.space)
    for rt in reversed(mono):
        op = rv[rt].F_check if checked else rv[rt].F
        vec = op.apply(zeta, vec)
        zeta = vadd(zeta, op.step)
    return vec


def pbw_span_check(rv: RootVectorSet) -> dict:
    """Rank of ordered F-monomials per degree versus the component dimension."""
    space = rv.space
    roots = rv.roots()
    rows = []
    failing = []
    for z in space.degrees:
        if not any(z):
            continue
        monos = kostant_partitions(roots, z)
        vecs = [monomial_vector(rv, m) for m in monos]
        rk = linalg.rank(vecs) if vecs else 0
        dim = space.dim(z)
        rows.append({"degree": list(z), "monomials": len(monos), "rank": rk, "dim": dim})
        if rk != dim:
            failing.append(list(z))
    return {"degrees": rows, "failing": failing, "ok": not failing}


@dataclass
class AFormBasis:
    """Per degree: ordered checked monomials and the transition matrix T.

    Column k of T holds the word-basis coordinates of the k-th monomial applied
    to v_lambda; ``inverse`` is T^-1.
    """

    monomials: dict[tuple, list[tuple[Root, ...]]]
    transition: dict[tuple, list]
    inverse: dict[tuple, list]


def aform_basis(rv: RootVectorSet) -> AFormBasis:
    space = rv.space
    roots = rv.roots()
    monos, trans, inv = {}, {}, {}
    for z in space.degrees:
        dim = space.dim(z)
        if not any(z):
            monos[z] = [()]
            trans[z] = linalg.identity(dim)
            inv[z] = linalg.identity(dim)
            continue
        ms = kostant_partitions(roots, z)
        cols = [monomial_vector(rv, m, checked=True) for m in ms]
        if len(cols) != dim or linalg.rank(cols) != dim:
            raise RankDeficient(f"ordered monomials do not span degree {z}")
        t = linalg.transpose(cols)
        monos[z], trans[z], inv[z] = ms, t, linalg.inverse(t)
    return AFormBasis(monos, trans, inv)
