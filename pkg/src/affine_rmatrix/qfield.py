"""Exact arithmetic in Q(q): Laurent polynomials, rational functions with
cached cyclotomic splitting of the denominator, q-numbers, and evaluation at
odd roots of unity.

Polynomial kernels are delegated to python-flint's ``fmpq_poly``; everything
else (canonical forms, pole analysis, cyclotomic quotients) lives here.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Sequence

import flint

__all__ = [
    "LaurentPoly",
    "RatQ",
    "CycloValue",
    "PoleAtRoot",
    "NotDivisible",
    "InadmissibleOrder",
    "Q",
    "ONE",
    "ZERO",
    "cyclotomic_poly",
    "euler_phi",
    "check_admissible",
    "q_round",
    "q_bracket",
    "q_factorial_bracket",
    "q_factorial_round",
    "q_binomial_bracket",
    "q_binomial_round",
    "pochhammer_finite",
    "q_exponential_series",
    "is_regular_at_root",
    "evaluate_at_root",
    "poisson_limit_quotient",
    "DEFAULT_CYCLO_BOUND",
]

DEFAULT_CYCLO_BOUND = 56


class PoleAtRoot(ArithmeticError):
    """A rational function was evaluated at a root of unity where it has a pole."""


class NotDivisible(ArithmeticError):
    """An exact quotient by (q - 1) was requested for a function not vanishing at 1."""


class InadmissibleOrder(ValueError):
    """Order of a root of unity outside the admissible set for the Lie type."""


def _frac(c) -> Fraction:
    c = flint.fmpq(c)
    return Fraction(int(c.p), int(c.q))


def _fmpq(x) -> flint.fmpq:
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    return flint.fmpq(x)


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> flint.fmpq_poly:
    """The m-th cyclotomic polynomial as an ``fmpq_poly``."""
    if m < 1:
        raise ValueError("cyclotomic order must be positive")
    return flint.fmpq_poly(flint.fmpz_poly.cyclotomic(m))


@lru_cache(maxsize=None)
def euler_phi(m: int) -> int:
    return sum(1 for k in range(1, m + 1) if gcd(k, m) == 1)


def _split_type(type_label: str) -> tuple[str, int]:
    letter, rank = type_label[:1].upper(), type_label[1:]
    if letter not in "ABCDEFG" or not letter or not rank.isdigit():
        raise ValueError(f"unrecognised Lie type label {type_label!r}")
    return letter, int(rank)


def check_admissible(ell: int, type_label: str = "A1") -> int:
    """Validate that a root of unity of order ``ell`` is admissible for the type.

    Admissible orders are 1 and odd ``ell``, with gcd(ell, n+1) = 1 for A_n and
    3 not dividing ``ell`` for E6 and G2.
    """
    if not isinstance(ell, int) or isinstance(ell, bool) or ell < 1:
        raise InadmissibleOrder(f"order must be a positive integer, got {ell!r}")
    if ell == 1:
        return ell
    if ell % 2 == 0:
        raise InadmissibleOrder(f"even order {ell} is not admissible")
    letter, n = _split_type(type_label)
    if letter == "A" and gcd(ell, n + 1) != 1:
        raise InadmissibleOrder(f"order {ell} shares a factor with n+1={n + 1} (type {type_label})")
    if (letter, n) in {("E", 6), ("G", 2)} and ell % 3 == 0:
        raise InadmissibleOrder(f"order {ell} divisible by 3 is excluded for type {type_label}")
    return ell


def _valuation(p: flint.fmpq_poly) -> int:
    if p.is_zero():
        return 0
    for k, c in enumerate(p.coeffs()):
        if c != 0:
            return k
    return 0  # pragma: no cover


def _to_poly(x) -> flint.fmpq_poly:
    if isinstance(x, flint.fmpq_poly):
        return x
    if isinstance(x, (list, tuple)):
        return flint.fmpq_poly([_fmpq(c) for c in x])
    return flint.fmpq_poly([_fmpq(x)])


class LaurentPoly:
    """Finite Laurent polynomial in q with rational coefficients.

    Stored as a dict ``exponent -> Fraction`` with no zero entries.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = Fraction(v)
            if v:
                c[int(k)] = v
        self._c = c

    @classmethod
    def monomial(cls, k: int, c=1) -> "LaurentPoly":
        return cls({k: c})

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __add__(self, other):
        other = _as_laurent(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return LaurentPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        other = _as_laurent(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_laurent(other)
        if other is NotImplemented:
            return NotImplemented
        c: dict[int, Fraction] = {}
        for a, u in self._c.items():
            for b, v in other._c.items():
                c[a + b] = c.get(a + b, 0) + u * v
        return LaurentPoly(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers leave the Laurent ring; use RatQ")
        out = LaurentPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = _as_laurent(other)
        if other is NotImplemented:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def subs(self, k: int) -> "LaurentPoly":
        """Substitute q -> q^k."""
        return LaurentPoly({e * k: v for e, v in self._c.items()})

    def __call__(self, x):
        return sum((v * x**e for e, v in self._c.items()), Fraction(0))

    def to_ratq(self) -> "RatQ":
        return RatQ.from_laurent(self)

    def __str__(self):
        return _format_terms(self._c)

    def __repr__(self):
        return f"LaurentPoly({self})"


def _as_laurent(x):
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return LaurentPoly({0: x})
    return NotImplemented


def _format_terms(c: Mapping[int, Fraction]) -> str:
    if not c:
        return "0"
    return "+".join(f"{v}*q^{k}" for k, v in sorted(c.items(), reverse=True))


class RatQ:
    """Rational function of q in canonical form ``q^shift * num(q) / den(q)``.

    Canonical: ``num`` and ``den`` are polynomials with nonzero constant term,
    ``den`` monic and coprime to ``num``. Zero is ``(0, 0, 1)``. Two values are
    equal iff their canonical fields coincide.
    """

    __slots__ = ("_k", "_n", "_d", "_cyc", "_h")

    def __init__(self, num=0, den=1):
        """``num``/``den`` are scalars, coefficient lists (constant term first)
        or ``fmpq_poly`` values."""
        self._set(0, _to_poly(num), _to_poly(den))

    def _set(self, k: int, n: flint.fmpq_poly, d: flint.fmpq_poly, reduced: bool = False):
        if d.is_zero():
            raise ZeroDivisionError("zero denominator")
        if n.is_zero():
            self._k, self._n, self._d = 0, n, flint.fmpq_poly([1])
        else:
            vn, vd = _valuation(n), _valuation(d)
            if vn:
                n = n.right_shift(vn)
            if vd:
                d = d.right_shift(vd)
            k += vn - vd
            if not reduced:
                g = n.gcd(d)
                if g.degree() > 0:
                    n = n // g
                    d = d // g
            lc = d.leading_coefficient()
            if lc != 1:
                n, d = n / lc, d / lc
            self._k, self._n, self._d = k, n, d
        self._cyc = None
        self._h = None

    def __reduce__(self):
        return (_rebuild_ratq, (self._k, _poly_strings(self._n), _poly_strings(self._d)))

    @classmethod
    def _raw(cls, k, n, d, reduced=False) -> "RatQ":
        obj = cls.__new__(cls)
        obj._set(k, n, d, reduced)
        return obj

    @classmethod
    def q_power(cls, k: int, c=1) -> "RatQ":
        if c == 0:
            return ZERO
        obj = cls.__new__(cls)
        obj._k, obj._n, obj._d = int(k), flint.fmpq_poly([_fmpq(c)]), flint.fmpq_poly([1])
        obj._cyc = obj._h = None
        return obj

    @classmethod
    def from_laurent(cls, p: LaurentPoly) -> "RatQ":
        c = p.coeffs
        if not c:
            return ZERO
        lo = min(c)
        coeffs = [flint.fmpq(0)] * (max(c) - lo + 1)
        for e, v in c.items():
            coeffs[e - lo] = _fmpq(v)
        return cls._raw(lo, flint.fmpq_poly(coeffs), flint.fmpq_poly([1]), reduced=True)

    @classmethod
    def coerce(cls, x) -> "RatQ":
        if isinstance(x, RatQ):
            return x
        if isinstance(x, LaurentPoly):
            return cls.from_laurent(x)
        if isinstance(x, (int, Fraction)):
            return cls.q_power(0, x)
        raise TypeError(f"cannot coerce {type(x).__name__} to RatQ")

    # canonical fields
    @property
    def shift(self) -> int:
        return self._k

    @property
    def num_poly(self) -> flint.fmpq_poly:
        return self._n

    @property
    def den_poly(self) -> flint.fmpq_poly:
        return self._d

    @property
    def numerator(self) -> LaurentPoly:
        return LaurentPoly({self._k + i: _frac(c) for i, c in enumerate(self._n.coeffs())})

    @property
    def denominator(self) -> LaurentPoly:
        return LaurentPoly({i: _frac(c) for i, c in enumerate(self._d.coeffs())})

    def canonical(self) -> tuple:
        return (self._k, tuple(self._n.coeffs()), tuple(self._d.coeffs()))

    def canonicalize(self) -> "RatQ":
        return RatQ._raw(self._k, self._n, self._d)

    def is_zero(self) -> bool:
        return self._n.is_zero()

    def is_one(self) -> bool:
        return self._k == 0 and self._d.degree() == 0 and self._n.is_one()

    def is_laurent(self) -> bool:
        return self._d.degree() == 0

    def is_monomial(self) -> bool:
        return self._d.degree() == 0 and self._n.degree() == 0

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, RatQ):
            try:
                other = RatQ.coerce(other)
            except TypeError:
                return NotImplemented
        if self._n.is_zero():
            return other
        if other._n.is_zero():
            return self
        k1, k2 = self._k, other._k
        m = min(k1, k2)
        a = self._n.left_shift(k1 - m) if k1 > m else self._n
        b = other._n.left_shift(k2 - m) if k2 > m else other._n
        d1, d2 = self._d, other._d
        if d1 == d2:
            return RatQ._raw(m, a + b, d1)
        return RatQ._raw(m, a * d2 + b * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        if self._n.is_zero():
            return self
        return RatQ._raw(self._k, -self._n, self._d, reduced=True)

    def __sub__(self, other):
        if not isinstance(other, RatQ):
            try:
                other = RatQ.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return RatQ.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RatQ):
            try:
                other = RatQ.coerce(other)
            except TypeError:
                return NotImplemented
        if self._n.is_zero() or other._n.is_zero():
            return ZERO
        if self._d.degree() == 0 and other._d.degree() == 0:
            return RatQ._raw(self._k + other._k, self._n * other._n, self._d, reduced=True)
        return RatQ._raw(self._k + other._k, self._n * other._n, self._d * other._d)

    __rmul__ = __mul__

    def inverse(self) -> "RatQ":
        if self._n.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(q)")
        return RatQ._raw(-self._k, self._d, self._n, reduced=True)

    def __truediv__(self, other):
        if not isinstance(other, RatQ):
            try:
                other = RatQ.coerce(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatQ.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if self._n.is_zero():
            return ONE if n == 0 else ZERO
        return RatQ._raw(self._k * n, self._n**n, self._d**n, reduced=True)

    def __eq__(self, other):
        if not isinstance(other, RatQ):
            try:
                other = RatQ.coerce(other)
            except TypeError:
                return NotImplemented
        return self._k == other._k and self._n == other._n and self._d == other._d

    def __hash__(self):
        if self._h is None:
            self._h = hash(self.canonical())
        return self._h

    def __bool__(self):
        return not self._n.is_zero()

    def subs_power(self, k: int) -> "RatQ":
        """Substitute q -> q^k (k may be negative)."""
        def sub(p: flint.fmpq_poly, k: int):
            cs = p.coeffs()
            if k >= 0:
                out = [flint.fmpq(0)] * ((len(cs) - 1) * k + 1)
                for i, c in enumerate(cs):
                    out[i * k] = c
                return flint.fmpq_poly(out), 0
            k = -k
            deg = len(cs) - 1
            out = [flint.fmpq(0)] * (deg * k + 1)
            for i, c in enumerate(cs):
                out[(deg - i) * k] = c
            return flint.fmpq_poly(out), -deg * k

        if k == 0:
            raise ValueError("q -> 1 is an evaluation, not a substitution")
        n, sn = sub(self._n, k)
        d, sd = sub(self._d, k)
        return RatQ._raw(self._k * k + sn - sd, n, d)

    # cyclotomic structure of the denominator
    def cyclotomic_exponents(self, bound: int = DEFAULT_CYCLO_BOUND) -> dict[int, int]:
        """Exponents of Phi_m (m <= bound) in the canonical denominator; cached."""
        if self._cyc is not None and self._cyc[0] >= bound:
            return {m: e for m, e in self._cyc[1].items() if m <= bound}
        d = self._d
        out: dict[int, int] = {}
        for m in range(1, bound + 1):
            if d.degree() < euler_phi(m):
                continue
            phi = cyclotomic_poly(m)
            e = 0
            while True:
                quo, rem = divmod(d, phi)
                if not rem.is_zero():
                    break
                d, e = quo, e + 1
            if e:
                out[m] = e
            if d.degree() == 0:
                break
        self._cyc = (bound, out)
        return dict(out)

    def has_pole_at_order(self, ell: int) -> bool:
        if self._d.degree() < euler_phi(ell):
            return False
        return (self._d % cyclotomic_poly(ell)).is_zero() is True

    def __call__(self, x):
        """Numeric evaluation (exact for Fraction/int inputs)."""
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            n = sum((_frac(c) * x**i for i, c in enumerate(self._n.coeffs())), Fraction(0))
            d = sum((_frac(c) * x**i for i, c in enumerate(self._d.coeffs())), Fraction(0))
            if d == 0:
                raise PoleAtRoot(f"pole at q={x}")
            return x**self._k * n / d
        n = sum(complex(float(_frac(c))) * x**i for i, c in enumerate(self._n.coeffs()))
        d = sum(complex(float(_frac(c))) * x**i for i, c in enumerate(self._d.coeffs()))
        return x**self._k * n / d

    # serialization
    def to_string(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    @classmethod
    def from_string(cls, s: str) -> "RatQ":
        s = s.strip()
        if s.startswith("(") and s.endswith(")") and ")/(" in s:
            # the str() form "(num)/(den)"
            num, den = s[1:-1].split(")/(", 1)
        else:
            num, den = _split_top_slash(s)
        return cls.from_laurent(_parse_terms(num)) / cls.from_laurent(_parse_terms(den))

    def __str__(self):
        if self.is_laurent():
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"

    def __repr__(self):
        return f"RatQ({self})"


_TERM_END = re.compile(r"(\*q\^-?\d+|^0)$")


def _split_top_slash(s: str) -> tuple[str, str]:
    # coefficients may be fractions ("1/2*q^3"); the separating slash is the
    # one that directly follows a complete term
    for i, ch in enumerate(s):
        if ch == "/" and _TERM_END.search(s[:i]):
            return s[:i], s[i + 1:]
    return s, "1*q^0"


def _parse_terms(s: str) -> LaurentPoly:
    s = s.strip()
    if s == "0":
        return LaurentPoly()
    c: dict[int, Fraction] = {}
    # terms are "c*q^k" joined by "+"; negative c written with a leading "-"
    for term in s.split("+"):
        coef, exp = term.split("*q^")
        c[int(exp)] = c.get(int(exp), 0) + Fraction(coef)
    return LaurentPoly(c)


ZERO = RatQ._raw(0, flint.fmpq_poly([]), flint.fmpq_poly([1]), reduced=True)
ONE = RatQ._raw(0, flint.fmpq_poly([1]), flint.fmpq_poly([1]), reduced=True)
Q = RatQ._raw(1, flint.fmpq_poly([1]), flint.fmpq_poly([1]), reduced=True)


# ---------------------------------------------------------------------------
# values in Q(eps) = Q[x]/Phi_ell

def _poly_strings(p: flint.fmpq_poly) -> tuple[str, ...]:
    return tuple(str(c) for c in p.coeffs())


def _poly_from_strings(cs) -> flint.fmpq_poly:
    return flint.fmpq_poly([_fmpq(Fraction(c)) for c in cs])


def _rebuild_ratq(k, num, den) -> "RatQ":
    obj = RatQ.__new__(RatQ)
    obj._k, obj._n, obj._d = k, _poly_from_strings(num), _poly_from_strings(den)
    obj._cyc = obj._h = None
    return obj


def _rebuild_cyclo(ell, coeffs) -> "CycloValue":
    return CycloValue(ell, _poly_from_strings(coeffs))


class CycloValue:
    """Element of the cyclotomic field Q(eps), eps a primitive ell-th root of 1."""

    __slots__ = ("ell", "_p")

    def __init__(self, ell: int, poly):
        self.ell = ell
        p = poly if isinstance(poly, flint.fmpq_poly) else flint.fmpq_poly([_fmpq(c) for c in poly])
        phi = cyclotomic_poly(ell)
        if p.degree() >= phi.degree():
            p = p % phi
        self._p = p

    def __reduce__(self):
        return (_rebuild_cyclo, (self.ell, _poly_strings(self._p)))

    @classmethod
    def rational(cls, ell: int, x) -> "CycloValue":
        return cls(ell, flint.fmpq_poly([_fmpq(x)]))

    @classmethod
    def eps_power(cls, ell: int, k: int) -> "CycloValue":
        k %= ell
        return cls(ell, flint.fmpq_poly([0] * k + [1]))

    @property
    def coords(self) -> list[Fraction]:
        n = euler_phi(self.ell)
        cs = [_frac(c) for c in self._p.coeffs()]
        return cs + [Fraction(0)] * (n - len(cs))

    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloValue.rational(self.ell, other)
        if not isinstance(other, CycloValue):
            return NotImplemented
        if other.ell != self.ell:
            raise ValueError("cyclotomic values of different orders do not mix")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return CycloValue(self.ell, self._p + other._p)

    __radd__ = __add__

    def __neg__(self):
        return CycloValue(self.ell, -self._p)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return CycloValue(self.ell, self._p - other._p)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return CycloValue(self.ell, self._p * other._p)

    __rmul__ = __mul__

    def inverse(self) -> "CycloValue":
        if self._p.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(eps)")
        g, s, _ = self._p.xgcd(cyclotomic_poly(self.ell))
        return CycloValue(self.ell, s / g)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = CycloValue.rational(self.ell, 1)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def __bool__(self):
        return not self._p.is_zero()

    def __eq__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self._p == other._p

    def __hash__(self):
        return hash((self.ell, tuple(self._p.coeffs())))

    def to_json(self) -> dict:
        return {"ell": self.ell, "coords": [str(c) for c in self.coords]}

    @classmethod
    def from_json(cls, data: Mapping) -> "CycloValue":
        return cls(int(data["ell"]), [Fraction(c) for c in data["coords"]])

    def __repr__(self):
        return f"CycloValue(ell={self.ell}, coords={[str(c) for c in self.coords]})"


def is_regular_at_root(f: RatQ, ell: int, type_label: str = "A1") -> bool:
    """True iff ``f`` has no pole at a primitive ell-th root of unity."""
    check_admissible(ell, type_label)
    return not RatQ.coerce(f).has_pole_at_order(ell)


def evaluate_at_root(f, ell: int, type_label: str = "A1") -> CycloValue:
    """Image of ``f`` in Q(eps); raises PoleAtRoot where ``f`` is singular."""
    check_admissible(ell, type_label)
    return _evaluate(RatQ.coerce(f), ell)


def _evaluate(f: RatQ, ell: int) -> CycloValue:
    if f.has_pole_at_order(ell):
        raise PoleAtRoot(f"{f} has a pole at a primitive {ell}-th root of unity")
    if f.is_zero():
        return CycloValue.rational(ell, 0)
    num = CycloValue(ell, f.num_poly) * CycloValue.eps_power(ell, f.shift)
    if f.den_poly.degree() == 0:
        return num
    return num / CycloValue(ell, f.den_poly)


def poisson_limit_quotient(f) -> CycloValue:
    """Value at q=1 of f/(q-1); requires f(1) = 0 and f regular at 1."""
    f = RatQ.coerce(f)
    if f.has_pole_at_order(1):
        raise NotDivisible(f"{f} has a pole at q=1")
    if f.is_zero():
        return CycloValue.rational(1, 0)
    quo, rem = divmod(f.num_poly, cyclotomic_poly(1))
    if not rem.is_zero():
        raise NotDivisible(f"{f} does not vanish at q=1")
    return _evaluate(RatQ._raw(f.shift, quo, f.den_poly), 1)


# ---------------------------------------------------------------------------
# q-combinatorics

def q_round(s: int) -> LaurentPoly:
    """(s)_q = (q^s - 1)/(q - 1) = 1 + q + ... + q^(s-1)."""
    if s < 0:
        raise ValueError("q_round needs s >= 0")
    return LaurentPoly({k: 1 for k in range(s)})


def q_bracket(s: int) -> LaurentPoly:
    """Symmetric q-integer [s]_q = q^(s-1) + q^(s-3) + ... + q^(1-s)."""
    if s < 0:
        raise ValueError("q_bracket needs s >= 0")
    return LaurentPoly({s - 1 - 2 * k: 1 for k in range(s)})


def q_factorial_bracket(k: int) -> LaurentPoly:
    out = LaurentPoly({0: 1})
    for s in range(1, k + 1):
        out = out * q_bracket(s)
    return out


def q_factorial_round(k: int) -> LaurentPoly:
    out = LaurentPoly({0: 1})
    for s in range(1, k + 1):
        out = out * q_round(s)
    return out


def _exact_laurent_quotient(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    r = RatQ.from_laurent(a) / RatQ.from_laurent(b)
    if not r.is_laurent():
        raise ArithmeticError(f"{b} does not divide {a} in Z[q, 1/q]")
    return r.numerator


def q_binomial_bracket(m: int, n: int) -> LaurentPoly:
    """Symmetric Gaussian binomial [m over n]_q as a Laurent polynomial."""
    if not 0 <= n <= m:
        raise ValueError(f"q_binomial_bracket needs 0 <= n <= m, got ({m}, {n})")
    return _exact_laurent_quotient(
        q_factorial_bracket(m), q_factorial_bracket(n) * q_factorial_bracket(m - n)
    )


def q_binomial_round(m: int, n: int) -> LaurentPoly:
    if not 0 <= n <= m:
        raise ValueError(f"q_binomial_round needs 0 <= n <= m, got ({m}, {n})")
    return _exact_laurent_quotient(
        q_factorial_round(m), q_factorial_round(n) * q_factorial_round(m - n)
    )


def pochhammer_finite(a, n: int) -> RatQ:
    """(a; q)_n = prod_{k<n} (1 - a q^k)."""
    if n < 0:
        raise ValueError("pochhammer_finite needs n >= 0")
    a = RatQ.coerce(a)
    out = ONE
    for k in range(n):
        out = out * (ONE - a * RatQ.q_power(k))
    return out


def q_exponential_series(maxdeg: int) -> list[RatQ]:
    """Coefficients c_n = 1/(n)_{q^2}! of exp_q(z) for n = 0..maxdeg."""
    if maxdeg < 0:
        raise ValueError("maxdeg must be >= 0")
    out = [ONE]
    fact = ONE
    for n in range(1, maxdeg + 1):
        fact = fact * RatQ.from_laurent(q_round(n)).subs_power(2)
        out.append(fact.inverse())
    return out


def ratq_from_coeff_list(coeffs: Sequence, shift: int = 0) -> RatQ:
    """Build q^shift * sum c_i q^i from a coefficient list."""
    return RatQ._raw(shift, flint.fmpq_poly([_fmpq(c) for c in coeffs]), flint.fmpq_poly([1]))


def as_ratq_list(xs: Iterable) -> list[RatQ]:
    return [RatQ.coerce(x) for x in xs]
