"""Graded spaces (a module or a truncated tensor product of modules) and
degree-homogeneous operators between their weight components.

A space is indexed by total multidegree ``zeta`` (a vector over I). For a
single module ``zeta`` is the usual Q_+-degree eta of the component; for a
tensor product it is eta_1 + ... + eta_k and the component is the direct sum
of V_{eta_1} (x) ... (x) V_{eta_k}. Truncation keeps |zeta| <= N.

An operator has a ``step``: it maps component zeta to component zeta + step.
Lowering-type actions (E) have negative step, F positive. Blocks exist
exactly where both source and target components lie inside the truncation;
a block is the matrix (target dim x source dim).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from . import linalg
from .qfield import ONE, ZERO, RatQ

__all__ = ["GradedSpace", "GradedOperator", "vadd", "vsub", "vneg", "height"]

Vec = tuple


def vadd(a: Sequence[int], b: Sequence[int]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[int], b: Sequence[int]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vneg(a: Sequence[int]) -> Vec:
    return tuple(-x for x in a)


def height(a: Sequence[int]) -> int:
    return sum(a)


def _multidegrees(size: int, N: int) -> list[Vec]:
    return sorted(
        (v for v in product(range(N + 1), repeat=size) if sum(v) <= N),
        key=lambda v: (sum(v), v),
    )


class GradedSpace:
    """Tensor product of truncated modules, cut at total height N.

    An optional ``box`` further keeps only total degrees bounded by it
    componentwise; this reaches single high degrees (such as 3*delta) without
    paying for every degree of that height. Both cuts are closed downward,
    so operators that lower degrees stay exact.
    """

    def __init__(self, legs: Sequence, N: int | None = None, box: Sequence[int] | None = None):
        self.legs = tuple(legs)
        if not self.legs:
            raise ValueError("a graded space needs at least one leg")
        self.size = self.legs[0].size
        self.N = min(leg.N for leg in self.legs) if N is None else N
        if any(leg.N < self.N for leg in self.legs):
            raise ValueError("legs must be built at least to the space's truncation height")
        self.box = tuple(box) if box is not None else None
        self._parts: dict[Vec, list[tuple[tuple[Vec, ...], int, int]]] = {}
        for zeta in _multidegrees(self.size, self.N):
            if self.box is None or all(a <= b for a, b in zip(zeta, self.box)):
                self._parts[zeta] = self._split(zeta)

    @property
    def n_legs(self) -> int:
        return len(self.legs)

    def _split(self, zeta: Vec):
        parts = []
        offset = 0
        for etas in _compositions(zeta, self.n_legs):
            dim = 1
            for leg, eta in zip(self.legs, etas):
                dim *= leg.dim(eta)
            if dim:
                parts.append((etas, offset, dim))
                offset += dim
        return parts

    @property
    def degrees(self) -> list[Vec]:
        return list(self._parts)

    def contains(self, zeta: Sequence[int]) -> bool:
        if sum(zeta) > self.N:
            return False
        return self.box is None or all(a <= b for a, b in zip(zeta, self.box))

    def parts(self, zeta: Vec):
        """List of (leg degrees, offset, dim) making up component ``zeta``."""
        if any(c < 0 for c in zeta):
            return []
        return self._parts.get(tuple(zeta), [])

    def dim(self, zeta: Sequence[int]) -> int:
        p = self.parts(tuple(zeta))
        return p[-1][1] + p[-1][2] if p else 0

    def part_offset(self, zeta: Vec, etas: tuple[Vec, ...]) -> int | None:
        for e, off, _ in self.parts(zeta):
            if e == etas:
                return off
        return None

    @cached_property
    def total_dim(self) -> int:
        return sum(self.dim(z) for z in self._parts)

    def same_as(self, other: "GradedSpace") -> bool:
        return self.N == other.N and self.box == other.box and len(self.legs) == len(other.legs) and all(
            a is b for a, b in zip(self.legs, other.legs)
        )

    def __repr__(self):
        return f"GradedSpace(legs={len(self.legs)}, N={self.N}, dim={self.total_dim})"


def _compositions(zeta: Vec, k: int):
    if k == 1:
        yield (tuple(zeta),)
        return
    for first in product(*(range(c + 1) for c in zeta)):
        rest = vsub(zeta, first)
        for tail in _compositions(rest, k - 1):
            yield (tuple(first),) + tail


def _zero_block(r: int, c: int, zero=ZERO):
    return [[zero] * c for _ in range(r)]


def _mm(a, b, r: int, c: int, zero=ZERO):
    out = _zero_block(r, c, zero)
    for i in range(r):
        ai = a[i]
        acc = out[i]
        for k, x in enumerate(ai):
            if not x:
                continue
            bk = b[k]
            for j in range(c):
                y = bk[j]
                if y:
                    acc[j] = acc[j] + x * y
    return out


class GradedOperator:
    """Homogeneous operator on a graded space.

    ``prefactor`` is a fractional exponent p with the whole operator scaled by
    q^p (0 <= p < 1); it carries half-integer Cartan scalars without leaving Q(q).
    """

    def __init__(self, space: GradedSpace, step: Sequence[int], blocks: Mapping[Vec, list],
                 prefactor: Fraction = Fraction(0), name: str = ""):
        self.space = space
        self.step = tuple(step)
        self.blocks = dict(blocks)
        self.prefactor = Fraction(prefactor)
        self.name = name
        if not 0 <= self.prefactor < 1:
            whole = self.prefactor.numerator // self.prefactor.denominator
            self.prefactor -= whole
            s = RatQ.q_power(whole)
            self.blocks = {z: linalg.scale(s, m) for z, m in self.blocks.items()}

    # ----------------------------------------------------------- construction
    @classmethod
    def build(cls, space: GradedSpace, step: Sequence[int],
              block_fn: Callable[[Vec], list], name: str = "", prefactor=Fraction(0)) -> "GradedOperator":
        step = tuple(step)
        blocks = {}
        for zeta in space.degrees:
            tgt = vadd(zeta, step)
            if not space.contains(tgt):
                continue
            blocks[zeta] = block_fn(zeta)
        return cls(space, step, blocks, prefactor, name)

    @classmethod
    def identity(cls, space: GradedSpace, name: str = "id") -> "GradedOperator":
        zero_step = (0,) * space.size
        return cls.build(space, zero_step, lambda z: linalg.identity(space.dim(z)), name)

    @classmethod
    def zero(cls, space: GradedSpace, step: Sequence[int], name: str = "0") -> "GradedOperator":
        return cls.build(space, step, lambda z: _zero_block(space.dim(vadd(z, step)), space.dim(z)), name)

    @classmethod
    def diagonal(cls, space: GradedSpace, scalar_fn: Callable[[tuple[Vec, ...]], RatQ],
                 name: str = "", prefactor=Fraction(0)) -> "GradedOperator":
        """Operator acting on each leg-degree part by ``scalar_fn(leg degrees)``."""
        def block(z):
            d = space.dim(z)
            m = _zero_block(d, d)
            for etas, off, dim in space.parts(z):
                s = scalar_fn(etas)
                for k in range(dim):
                    m[off + k][off + k] = s
            return m
        return cls.build(space, (0,) * space.size, block, name, prefactor)

    # ----------------------------------------------------------- algebra
    def _compatible(self, other: "GradedOperator"):
        if not self.space.same_as(other.space):
            raise ValueError("operators live on different spaces")

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        """Composition ``self o other``."""
        self._compatible(other)
        step = vadd(self.step, other.step)
        blocks = {}
        for zeta, b in other.blocks.items():
            mid = vadd(zeta, other.step)
            tgt = vadd(mid, self.step)
            r = self.space.dim(tgt)
            if any(c < 0 for c in mid):
                # passes through a zero space: the composite is zero wherever its target lives
                if all(c >= 0 for c in tgt) and self.space.contains(tgt):
                    blocks[zeta] = _zero_block(r, self.space.dim(zeta))
                continue
            a = self.blocks.get(mid)
            if a is None:
                continue
            blocks[zeta] = _mm(a, b, r, self.space.dim(zeta))
        return GradedOperator(self.space, step, blocks, self.prefactor + other.prefactor,
                              f"{self.name}*{other.name}")

    def _linear(self, other: "GradedOperator", sign: int) -> "GradedOperator":
        self._compatible(other)
        if self.step != other.step:
            raise ValueError(f"cannot add operators of steps {self.step} and {other.step}")
        if self.prefactor != other.prefactor:
            if self.is_zero():
                return other if sign > 0 else -other
            if other.is_zero():
                return self
            raise ValueError("cannot add operators with different fractional prefactors")
        keys = self.blocks.keys() & other.blocks.keys()
        blocks = {}
        for z in keys:
            a, b = self.blocks[z], other.blocks[z]
            blocks[z] = linalg.add(a, b) if sign > 0 else linalg.sub(a, b)
        return GradedOperator(self.space, self.step, blocks, self.prefactor, self.name)

    def __add__(self, other):
        return self._linear(other, 1)

    def __sub__(self, other):
        return self._linear(other, -1)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, c) -> "GradedOperator":
        c = RatQ.coerce(c)
        return GradedOperator(self.space, self.step,
                              {z: linalg.scale(c, m) for z, m in self.blocks.items()},
                              self.prefactor, self.name)

    def __rmul__(self, c):
        return self.scale(c)

    def map_entries(self, f: Callable) -> dict:
        return {z: linalg.apply(f, m) for z, m in self.blocks.items()}

    def restrict(self, keep: Callable[[Vec], bool]) -> "GradedOperator":
        return GradedOperator(self.space, self.step,
                              {z: m for z, m in self.blocks.items() if keep(z)},
                              self.prefactor, self.name)

    def apply(self, zeta: Sequence[int], vec: Sequence) -> list:
        """Image of a vector of component ``zeta`` (in component zeta+step)."""
        zeta = tuple(zeta)
        m = self.blocks.get(zeta)
        tdim = self.space.dim(vadd(zeta, self.step))
        if m is None or not tdim:
            return [ZERO] * tdim
        out = []
        for row in m:
            acc = ZERO
            for x, y in zip(row, vec):
                if x and y:
                    acc = acc + x * y
            out.append(acc)
        return out

    # ----------------------------------------------------------- queries
    def is_zero(self) -> bool:
        return all(linalg.is_zero(m) for m in self.blocks.values())

    def entries(self) -> Iterable[tuple[Vec, int, int, RatQ]]:
        for z, m in self.blocks.items():
            for i, row in enumerate(m):
                for j, x in enumerate(row):
                    if x:
                        yield z, i, j, x

    def residual_blocks(self, other: "GradedOperator") -> list[Vec]:
        """Degrees (common to both) where the two operators differ."""
        self._compatible(other)
        if self.step != other.step:
            raise ValueError("steps differ")
        bad = []
        for z in sorted(self.blocks.keys() & other.blocks.keys(), key=lambda v: (sum(v), v)):
            a, b = self.blocks[z], other.blocks[z]
            if self.prefactor != other.prefactor:
                if linalg.is_zero(a) and linalg.is_zero(b):
                    continue
                bad.append(z)
            elif not linalg.equal(a, b):
                bad.append(z)
        return bad

    def equals(self, other: "GradedOperator") -> bool:
        return not self.residual_blocks(other)

    def part_block(self, zeta: Vec, src: tuple[Vec, ...], tgt: tuple[Vec, ...]):
        """Sub-block from leg degrees ``src`` (in zeta) to ``tgt``."""
        sp = self.space
        z2 = vadd(zeta, self.step)
        so, to = sp.part_offset(zeta, src), sp.part_offset(z2, tgt)
        if so is None or to is None:
            return None
        sd = next(d for e, _, d in sp.parts(zeta) if e == src)
        td = next(d for e, _, d in sp.parts(z2) if e == tgt)
        m = self.blocks[zeta]
        return [row[so:so + sd] for row in m[to:to + td]]

    def __repr__(self):
        return f"GradedOperator({self.name!r}, step={self.step}, blocks={len(self.blocks)})"


def tensor_leg_operator(space: GradedSpace, leg_ops: Sequence[GradedOperator | None],
                        name: str = "") -> GradedOperator:
    """X_1 (x) ... (x) X_k acting on ``space``; ``None`` stands for the identity.

    Each X_j is an operator on the single-leg space of leg j.
    """
    if len(leg_ops) != space.n_legs:
        raise ValueError("one operator (or None) per leg required")
    steps = [op.step if op is not None else (0,) * space.size for op in leg_ops]
    total = (0,) * space.size
    for s in steps:
        total = vadd(total, s)
    prefactor = sum((op.prefactor for op in leg_ops if op is not None), Fraction(0))

    def block(zeta):
        tgt = vadd(zeta, total)
        out = _zero_block(space.dim(tgt), space.dim(zeta))
        for etas, off, dim in space.parts(zeta):
            tetas = tuple(vadd(e, s) for e, s in zip(etas, steps))
            toff = space.part_offset(tgt, tetas)
            if toff is None:
                continue
            mats = []
            for leg, op, e in zip(space.legs, leg_ops, etas):
                if op is None:
                    mats.append(None)
                else:
                    mats.append(op.blocks[e])
            sub = _kron_chain(mats, [leg.dim(e) for leg, e in zip(space.legs, etas)])
            for i, row in enumerate(sub):
                orow = out[toff + i]
                for j, x in enumerate(row):
                    if x:
                        orow[off + j] = x
        return out

    return GradedOperator.build(space, total, block, name, prefactor)


def _kron_chain(mats, dims):
    acc = [[ONE]]
    for m, d in zip(mats, dims):
        if m is None:
            m = linalg.identity(d)
        if not m or not acc:
            return []
        acc = linalg.kron(acc, m)
    return acc
