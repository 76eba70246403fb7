"""Affine Cartan data, positive roots with multiplicity, the invariant form,
and the imaginary-root correction matrices M_r."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence

from . import linalg
from .qfield import (
    ONE,
    LaurentPoly,
    RatQ,
    check_admissible,
    is_regular_at_root,
    q_bracket,
)

__all__ = [
    "AffineCartan",
    "Root",
    "Weight",
    "UnsupportedType",
    "SingularMatrix",
    "affine_cartan",
    "SUPPORTED_ORDERS",
]

SUPPORTED_ORDERS = ("default", "reverse")


class UnsupportedType(ValueError):
    pass


class SingularMatrix(ArithmeticError):
    pass


@dataclass(frozen=True, order=True)
class Root:
    """Positive root with multiplicity.

    ``coords`` expands the root over the simple roots alpha_0..alpha_n. For an
    imaginary root (r delta, i) ``imag_index`` is i in 1..n.
    """

    kind: str
    coords: tuple[int, ...]
    imag_index: int | None = None

    @property
    def height(self) -> int:
        return sum(self.coords)

    @property
    def is_real(self) -> bool:
        return self.kind == "real"

    def to_json(self) -> dict:
        out = {"kind": "real" if self.is_real else "imag", "coords": list(self.coords)}
        if not self.is_real:
            out["imag_index"] = self.imag_index
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Root":
        kind = "real" if data["kind"] == "real" else "imag"
        return cls(kind, tuple(data["coords"]), data.get("imag_index"))

    @property
    def label(self) -> str:
        c = ",".join(map(str, self.coords))
        return f"({c})" if self.is_real else f"({c};{self.imag_index})"


@dataclass(frozen=True)
class Weight:
    """Highest weight lambda_i = q^{l_i}, stored as the exponents (l_i) over I_infty
    in the order 0, 1, ..., n, infinity."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(x) for x in self.exponents))

    def __getitem__(self, i):
        return self.exponents[i]

    def __len__(self):
        return len(self.exponents)

    def to_json(self) -> list[int]:
        return list(self.exponents)


@dataclass(frozen=True)
class AffineCartan:
    type_label: str
    n: int
    cartan: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]
    o: tuple[int, ...]
    delta: tuple[int, ...]
    finite_positive: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        a, d = self.cartan, self.d
        size = self.n + 1
        for i in range(size):
            if a[i][i] != 2:
                raise ValueError("Cartan diagonal must be 2")
            for j in range(size):
                if i != j and a[i][j] > 0:
                    raise ValueError("off-diagonal Cartan entries must be <= 0")
                if d[i] * a[i][j] != d[j] * a[j][i]:
                    raise ValueError("Cartan matrix is not symmetrised by d")
        if d[0] != 1:
            raise ValueError("d_0 must be 1")
        for h in range(1, size):
            for k in range(1, size):
                if a[h][k] < 0 and self.o[h - 1] * self.o[k - 1] != -1:
                    raise ValueError("o(h) o(k) must be -1 on linked vertices")

    @property
    def index_set(self) -> tuple[int, ...]:
        return tuple(range(self.n + 1))

    @property
    def rank_inf(self) -> int:
        """Size of I_infty (vectors over I_infty have this length; infinity is last)."""
        return self.n + 2

    @cached_property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        """Gram matrix of the invariant form on alpha_0..alpha_n, alpha_infty."""
        size = self.n + 2
        inf = self.n + 1
        g = [[0] * size for _ in range(size)]
        for i in range(self.n + 1):
            for j in range(self.n + 1):
                g[i][j] = self.d[i] * self.cartan[i][j]
        g[inf][0] = g[0][inf] = 1
        return tuple(tuple(r) for r in g)

    @cached_property
    def dual_gram(self) -> tuple[tuple[Fraction, ...], ...]:
        """(omega_i | omega_j): inverse of the Gram matrix."""
        inv = linalg.inverse([[Fraction(x) for x in row] for row in self.gram], one=Fraction(1))
        return tuple(tuple(r) for r in inv)

    # ------------------------------------------------------------------ forms
    def pairing(self, mu: Sequence[int], nu: Sequence[int]) -> int:
        """(mu | nu) for vectors over I_infty written in the alpha basis."""
        mu, nu = _pad(mu, self.rank_inf), _pad(nu, self.rank_inf)
        g = self.gram
        return sum(mu[i] * g[i][j] * nu[j] for i in range(len(mu)) for j in range(len(nu)) if mu[i] and nu[j])

    def weight_pairing(self, l: Weight | Sequence[int], m: Weight | Sequence[int]) -> Fraction:
        """(l | m) for l = sum l_i omega_i, m = sum m_i omega_i."""
        l, m = _exps(l), _exps(m)
        g = self.dual_gram
        return sum((l[i] * g[i][j] * m[j] for i in range(len(l)) for j in range(len(m))), Fraction(0))

    @staticmethod
    def root_weight_pairing(eta: Sequence[int], m: Weight | Sequence[int]) -> int:
        """(eta | m) for eta in the alpha basis and m in the omega basis."""
        m = _exps(m)
        return sum(e * m[i] for i, e in enumerate(eta))

    def root_pairing(self, a: Sequence[int], b: Sequence[int]) -> int:
        """(a | b) for a, b in Q (coordinates over I only)."""
        return self.pairing(a, b)

    # ------------------------------------------------------------------ roots
    def simple_root(self, i: int) -> tuple[int, ...]:
        v = [0] * (self.n + 1)
        v[i] = 1
        return tuple(v)

    @cached_property
    def theta(self) -> tuple[int, ...]:
        """Highest root of the finite part, over alpha_1..alpha_n."""
        return self.delta[1:]

    def is_positive_root_coords(self, coords: Sequence[int]) -> bool:
        """Whether ``coords`` (over I) is a positive real or imaginary root.

        With delta = alpha_0 + theta the alpha_0-coefficient k is the delta
        multiple, so beta = gamma + k delta with gamma over alpha_1..alpha_n.
        """
        coords = tuple(coords)
        if any(c < 0 for c in coords) or not any(coords):
            return False
        k = coords[0]
        gamma = tuple(c - k * t for c, t in zip(coords[1:], self.theta))
        if not any(gamma):
            return k >= 1
        if gamma in self.finite_positive:
            return True
        return k >= 1 and tuple(-x for x in gamma) in self.finite_positive

    def positive_roots_up_to(self, N: int, order: str = "default") -> list[Root]:
        """All roots with multiplicity of height <= N in the fixed convex order."""
        if N < 1:
            raise ValueError("height bound must be >= 1")
        if order not in SUPPORTED_ORDERS:
            raise ValueError(f"unknown root order {order!r}")
        roots = self._roots_unordered(N)
        if self.type_label != "A1":
            # rank-generic enumeration; convexity is only asserted for A1
            return sorted(roots, key=lambda b: (b.height, b.kind, b.coords, b.imag_index or 0))
        def key(b: Root):
            a0, a1 = b.coords
            if b.kind == "imag":
                return (1, a0, 0)
            if a1 > a0:  # alpha_1 + k delta
                return (0, a0, 0)
            return (2, -a1, 0)  # (k+1) delta - alpha_1, larger k first

        out = sorted(roots, key=key)
        return out if order == "default" else out[::-1]

    @property
    def delta_height(self) -> int:
        return sum(self.delta)

    def _roots_unordered(self, N: int) -> list[Root]:
        out = []
        size = self.n + 1
        for coords in product(range(N + 1), repeat=size):
            if not 0 < sum(coords) <= N:
                continue
            if _delta_multiple(coords, self.delta):
                out.extend(Root("imag", coords, i) for i in range(1, self.n + 1))
            elif self.is_positive_root_coords(coords):
                out.append(Root("real", coords))
        return out

    def imaginary_degree(self, root: Root) -> int:
        return _delta_multiple(root.coords, self.delta)

    # ------------------------------------------------------- root scalars
    def root_norm(self, root: Root) -> int:
        """(alpha | alpha)."""
        return self.root_pairing(root.coords, root.coords)

    def q_alpha_exponent(self, root: Root) -> int:
        if root.is_real:
            return self.root_norm(root) // 2
        return self.d[root.imag_index]

    def q_alpha(self, root: Root) -> LaurentPoly:
        return LaurentPoly.monomial(self.q_alpha_exponent(root))

    def a_alpha(self, root: Root) -> RatQ:
        if root.is_real:
            return ONE
        r = self.imaginary_degree(root)
        return RatQ(r) / (
            RatQ.from_laurent(q_bracket(r)) * RatQ.from_laurent(q_bracket(self.d[root.imag_index]))
        )

    # ------------------------------------------------------- M_r
    @lru_cache(maxsize=None)
    def build_M_r(self, r: int, ell_bound: int = 7) -> tuple[tuple[tuple[RatQ, ...], ...], tuple[tuple[RatQ, ...], ...]]:
        """M_r = ((o(i)o(j))^r [a_ij]_{q_i^r}) over I_0 and its inverse.

        Every inverse entry is checked to be regular at all admissible orders
        up to ``ell_bound``.
        """
        if r < 1:
            raise ValueError("r must be >= 1")
        idx = range(1, self.n + 1)
        m = []
        for i in idx:
            row = []
            for j in idx:
                sign = (self.o[i - 1] * self.o[j - 1]) ** r
                a = self.cartan[i][j]
                qb = _signed_bracket(a).to_ratq().subs_power(self.d[i] * r) if a else RatQ(0)
                row.append(qb * sign)
            m.append(row)
        try:
            inv = linalg.inverse(m)
        except linalg.Singular as exc:
            raise SingularMatrix(f"M_{r} is singular") from exc
        for ell in range(1, ell_bound + 1, 2):
            try:
                check_admissible(ell, self.type_label)
            except ValueError:
                continue
            for row in inv:
                for x in row:
                    if not is_regular_at_root(x, ell, self.type_label):
                        raise SingularMatrix(f"entry {x} of M_{r}^-1 has a pole at order {ell}")
        return tuple(tuple(r_) for r_ in m), tuple(tuple(r_) for r_ in inv)


def _signed_bracket(a: int) -> LaurentPoly:
    return q_bracket(a) if a >= 0 else -q_bracket(-a)


def _delta_multiple(coords: Sequence[int], delta: Sequence[int]) -> int:
    r = None
    for c, dl in zip(coords, delta):
        if c % dl:
            return 0
        if r is None:
            r = c // dl
        elif r != c // dl:
            return 0
    return r or 0


def _pad(v: Sequence[int], size: int) -> list[int]:
    v = list(v)
    return v + [0] * (size - len(v))


def _exps(w) -> tuple[int, ...]:
    return w.exponents if isinstance(w, Weight) else tuple(w)


def _type_a_finite_positive(n: int) -> tuple[tuple[int, ...], ...]:
    roots = []
    for i in range(n):
        for j in range(i, n):
            v = [0] * n
            for k in range(i, j + 1):
                v[k] = 1
            roots.append(tuple(v))
    return tuple(roots)


def affine_cartan(type_label: str = "A1") -> AffineCartan:
    """Untwisted affine Cartan data. Type A_n (n >= 1) is available; the
    root-vector layer downstream is complete only for A1."""
    label = type_label.upper()
    if not label.startswith("A") or not label[1:].isdigit() or int(label[1:]) < 1:
        raise UnsupportedType(f"type {type_label!r} is not available")
    n = int(label[1:])
    size = n + 1
    a = [[0] * size for _ in range(size)]
    for i in range(size):
        a[i][i] = 2
    if n == 1:
        a[0][1] = a[1][0] = -2
    else:
        for i in range(size):
            a[i][(i + 1) % size] = -1
            a[(i + 1) % size][i] = -1
    o = tuple(1 if i % 2 == 0 else -1 for i in range(n))
    return AffineCartan(
        type_label=label,
        n=n,
        cartan=tuple(tuple(r) for r in a),
        d=tuple([1] * size),
        o=o,
        delta=tuple([1] * size),
        finite_positive=_type_a_finite_positive(n),
    )
