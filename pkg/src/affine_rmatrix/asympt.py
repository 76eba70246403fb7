"""Numerics for (z;q)_inf as q approaches a root of unity radially.

``lemma13_rhs`` is the leading-order expression exactly as stated for the
asymptotic lemma. Expanding log (z;q)_inf = -sum z^m / (m (1 - q^m)) one
order further shows that LHS/RHS tends to the q-independent constant

    C(z) = exp(Li2(z^l)/2) (1 - z^l) prod_k (1 - eps^k z)^(-2k/l)

instead of 1, so the relative deviation does not shrink with t. The
``corrected_rhs`` below includes that constant; it is reported next to the
stated form so the discrepancy is visible rather than hidden.
"""
from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np


class Divergent(ValueError):
    """|q| >= 1: the infinite product is not numerically defined."""


@dataclass
class PochhammerValue:
    value: complex
    terms: int
    tail_bound: float   # bound on |log(true) - log(value)|


def pochhammer_inf(z: complex, q: complex, tol: float = 1e-15) -> PochhammerValue:
    """prod_{n>=0} (1 - z q^n), stopped once |z q^n| < tol (1 - |q|).

    The neglected tail satisfies |sum_{n>=M} log(1 - z q^n)| <= x / ((1-|q|)(1-x))
    with x = |z q^M|; that bound is returned.
    """
    z, q = complex(z), complex(q)
    aq = abs(q)
    if aq >= 1:
        raise Divergent("(z;q)_inf needs |q| < 1")
    if z == 0:
        return PochhammerValue(1 + 0j, 0, 0.0)
    if q == 0:
        return PochhammerValue(1 - z, 1, 0.0)
    thresh = tol * (1 - aq)
    az = abs(z)
    if az <= thresh:
        m = 0
    else:
        m = int(math.ceil(math.log(thresh / az) / math.log(aq))) + 1
    n = np.arange(m, dtype=np.float64)
    logq = cmath.log(q)
    terms = z * np.exp(n * logq)
    total = np.sum(np.log1p(-terms)) if m else 0j
    x = az * aq ** m
    tail = x / ((1 - aq) * (1 - x)) if x < 1 else math.inf
    return PochhammerValue(complex(np.exp(total)), m, tail)


def pochhammer_inf_numeric(z: complex, q: complex, tol: float = 1e-15) -> complex:
    return pochhammer_inf(z, q, tol).value


def pochhammer_taylor(z: complex, q: complex, terms: int = 200) -> complex:
    """sum_n (-1)^n q^(n(n-1)/2) z^n / (q;q)_n, the Taylor expansion in z."""
    z, q = complex(z), complex(q)
    if abs(q) >= 1:
        raise Divergent("series needs |q| < 1")
    total = 0j
    coef = 1 + 0j     # (-1)^n q^(n(n-1)/2) / (q;q)_n
    zn = 1 + 0j
    for n in range(terms):
        total += coef * zn
        coef *= -(q ** n) / (1 - q ** (n + 1))
        zn *= z
        if abs(coef * zn) < 1e-18 and n > 5:
            break
    return total


def _li2(w: complex) -> complex:
    return complex(mpmath.polylog(2, w))


def _branch_warnings(z: complex, ell: int, margin: float = 0.05) -> list[str]:
    eps = cmath.exp(2j * math.pi / ell)
    out = []
    for k in range(ell):
        w = 1 - eps ** k * z
        if abs(abs(cmath.phase(w)) - math.pi) < margin:
            out.append(f"1 - eps^{k} z = {w:.4g} is near the principal branch cut")
    return out


def lemma13_rhs(z: complex, q: complex, ell: int) -> complex:
    """exp(Li2(z^l)/(q^(l^2) - 1)) (1 - z^l)^(-1/2) prod_k (1 - eps^k z)^(k/l), principal branches."""
    z, q = complex(z), complex(q)
    if z == 0:
        return 1 + 0j
    for msg in _branch_warnings(z, ell):
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    eps = cmath.exp(2j * math.pi / ell)
    zl = z ** ell
    logv = _li2(zl) / (q ** (ell * ell) - 1) - 0.5 * cmath.log(1 - zl)
    for k in range(ell):
        logv += (k / ell) * cmath.log(1 - eps ** k * z)
    return cmath.exp(logv)


def limit_constant(z: complex, ell: int) -> complex:
    """lim LHS / lemma13_rhs along q -> eps."""
    z = complex(z)
    if z == 0:
        return 1 + 0j
    eps = cmath.exp(2j * math.pi / ell)
    zl = z ** ell
    logc = 0.5 * _li2(zl) + cmath.log(1 - zl)
    for k in range(ell):
        logc -= (2 * k / ell) * cmath.log(1 - eps ** k * z)
    return cmath.exp(logc)


def corrected_rhs(z: complex, q: complex, ell: int) -> complex:
    return lemma13_rhs(z, q, ell) * limit_constant(z, ell)


def t_ladder(start: float = 1e-2, count: int = 5) -> list[float]:
    return [start / 2 ** j for j in range(count)]


def _fit_order(ts: Sequence[float], ds: Sequence[float]) -> float | None:
    pts = [(math.log(t), math.log(d)) for t, d in zip(ts, ds) if d > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def convergence_order_test(z: complex, ell: int, t_sequence: Iterable[float] | None = None,
                           tol: float = 1e-15, rhs: str = "stated", csv_path: str | None = None) -> dict:
    """Fit d_j = |LHS/RHS - 1| ~ t_j^p along q_j = eps (1 - t_j); pass iff p >= 0.9.

    ``rhs`` selects the stated expression or the corrected one. Probes whose
    truncation tail exceeds 1% of their deviation are flagged and excluded.
    """
    ts = list(t_sequence) if t_sequence is not None else t_ladder()
    eps = cmath.exp(2j * math.pi / ell)
    f = lemma13_rhs if rhs == "stated" else corrected_rhs
    probes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for t in ts:
            q = eps * (1 - t)
            pv = pochhammer_inf(z, q, tol)
            r = f(z, q, ell)
            ratio = pv.value / r
            dev = abs(ratio - 1)
            # relative product error is at most e^tail - 1
            trunc = math.expm1(pv.tail_bound)
            flagged = dev > 0 and trunc >= 0.01 * dev
            probes.append({"t": t, "lhs": [pv.value.real, pv.value.imag], "rhs": [r.real, r.imag],
                           "ratio": [ratio.real, ratio.imag], "deviation": dev,
                           "truncation_bound": trunc, "terms": pv.terms, "flagged": flagged})
    branch = sorted({str(w.message) for w in caught})
    used = [p for p in probes if not p["flagged"]]
    devs = [p["deviation"] for p in used]
    exact = bool(used) and all(d == 0 for d in devs)
    p_fit = None if exact else _fit_order([p["t"] for p in used], devs)
    inversions = sum(1 for a, b in zip(devs, devs[1:]) if b > a)
    # ratio increments shrink like t^p whenever LHS/RHS has any finite limit
    ratios = [complex(*p["ratio"]) for p in used]
    incr = [abs(a - b) for a, b in zip(ratios, ratios[1:])]
    p_ratio = _fit_order([p["t"] for p in used[:-1]], incr) if len(incr) >= 2 else None
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "deviation"])
            for p in probes:
                w.writerow([repr(p["t"]), repr(p["deviation"])])
    ok = exact or (p_fit is not None and p_fit >= 0.9)
    return {
        "z": [complex(z).real, complex(z).imag], "ell": ell, "rhs": rhs, "probes": probes,
        "fitted_order": p_fit, "exact": exact, "ok": ok,
        "monotone": inversions <= 1, "inversions": inversions,
        "excluded": [p["t"] for p in probes if p["flagged"]],
        "ratio_increment_order": p_ratio,
        "limit_constant": [limit_constant(z, ell).real, limit_constant(z, ell).imag],
        "branch_warnings": branch,
    }
