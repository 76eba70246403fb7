"""Verma modules V_q(lambda) truncated at height N, as explicit graded linear
algebra over Q(q).

Component eta of V_q(lambda) is identified with U_q^-_eta: F-words of
multidegree eta modulo the two-sided span of the q-Serre relators. F_i acts
by concatenation, E_i by commuting through the word down to the highest
weight vector, K_mu diagonally.
"""
from __future__ import annotations

from functools import cached_property
from itertools import permutations
from typing import Sequence

from . import linalg
from .operators import GradedOperator, GradedSpace, vadd, vsub
from .qfield import ONE, ZERO, RatQ, q_binomial_bracket
from .rootdata import AffineCartan, Weight

__all__ = ["TruncatedVerma", "build_verma", "serre_relator", "relation_residuals"]

Word = tuple


def _words_of_degree(eta: Sequence[int]) -> list[Word]:
    letters = [i for i, c in enumerate(eta) for _ in range(c)]
    return sorted(set(permutations(letters)))


def serre_relator(cartan: AffineCartan, i: int, j: int) -> dict[Word, RatQ]:
    """sum_k (-1)^k [1-a_ij choose k]_{q_i} X_i^{1-a_ij-k} X_j X_i^k as a word combination."""
    m = 1 - cartan.cartan[i][j]
    out = {}
    for k in range(m + 1):
        c = q_binomial_bracket(m, k).to_ratq().subs_power(cartan.d[i])
        out[(i,) * (m - k) + (j,) + (i,) * k] = c if k % 2 == 0 else -c
    return out


class TruncatedVerma:
    """V_q(lambda) cut at total height N.

    With ``lowest=True`` the mirrored lowest-weight module is built instead:
    the basis is made of E-words, E_i acts by concatenation and F_i by the
    commutation rule; K_i acts on degree eta by lambda_i q^{+(alpha_i|eta)}.
    """

    def __init__(self, cartan: AffineCartan, weight: Weight | Sequence[int], N: int, lowest: bool = False):
        if N < 0:
            raise ValueError("truncation height must be >= 0")
        self.cartan = cartan
        self.weight = weight if isinstance(weight, Weight) else Weight(tuple(weight))
        if len(self.weight) != cartan.rank_inf:
            raise ValueError(f"weight needs {cartan.rank_inf} exponents (over I and infinity)")
        self.N = N
        self.lowest = lowest
        self.size = cartan.n + 1
        self.components: dict[tuple, list[Word]] = {}
        self._coords: dict[tuple, dict[Word, list[RatQ]]] = {}
        self._build_components()
        self.space = GradedSpace([self], N)
        self._lower_cache: dict[tuple[int, Word], dict[Word, RatQ]] = {}

    # ------------------------------------------------------------ components
    def _build_components(self):
        from .operators import _multidegrees

        relators = [
            (i, j, serre_relator(self.cartan, i, j))
            for i in range(self.size) for j in range(self.size) if i != j
        ]
        for eta in _multidegrees(self.size, self.N):
            words = _words_of_degree(eta)
            index = {w: k for k, w in enumerate(words)}
            rows = []
            for i, j, rel in relators:
                deg = [0] * self.size
                deg[i] += 1 - self.cartan.cartan[i][j]
                deg[j] += 1
                rest = vsub(eta, deg)
                if any(c < 0 for c in rest):
                    continue
                for w in _words_of_degree(rest):
                    for cut in range(len(w) + 1):
                        row = [ZERO] * len(words)
                        for rw, c in rel.items():
                            row[index[w[:cut] + rw + w[cut:]]] += c
                        rows.append(row)
            # pivot on the largest words so the lexicographically smallest survive
            red, piv = linalg.rref(rows, col_order=range(len(words) - 1, -1, -1)) if rows else ([], [])
            pivset = set(piv)
            basis = [w for k, w in enumerate(words) if k not in pivset]
            bidx = {w: k for k, w in enumerate(basis)}
            coords: dict[Word, list[RatQ]] = {}
            for w in basis:
                v = [ZERO] * len(basis)
                v[bidx[w]] = ONE
                coords[w] = v
            for row, p in zip(red, piv):
                v = [ZERO] * len(basis)
                for k, x in enumerate(row):
                    if x and k != p:
                        v[bidx[words[k]]] = -x
                coords[words[p]] = v
            self.components[eta] = basis
            self._coords[eta] = coords

    @property
    def components_index_zero(self) -> tuple:
        return (0,) * self.size

    def degrees(self) -> list[tuple]:
        return list(self.components)

    def dim(self, eta: Sequence[int]) -> int:
        eta = tuple(eta)
        if any(c < 0 for c in eta):
            return 0
        return len(self.components.get(eta, ()))

    def dims_by_height(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for eta, b in self.components.items():
            out[sum(eta)] = out.get(sum(eta), 0) + len(b)
        return out

    def word_coords(self, word: Word) -> list[RatQ]:
        """Coordinates of (word) . v_lambda in the basis of its component."""
        eta = [0] * self.size
        for i in word:
            eta[i] += 1
        return self._coords[tuple(eta)][tuple(word)]

    def vector_of(self, combo: dict[Word, RatQ], eta: Sequence[int]) -> list[RatQ]:
        out = [ZERO] * self.dim(eta)
        for w, c in combo.items():
            if not c:
                continue
            for k, x in enumerate(self.word_coords(w)):
                if x:
                    out[k] = out[k] + c * x
        return out

    # ------------------------------------------------------------ scalars
    def k_exponent(self, mu: Sequence[int], eta: Sequence[int]) -> int:
        """Exponent e with K_mu acting on component eta as q^e."""
        mu = list(mu) + [0] * (self.cartan.rank_inf - len(mu))
        base = sum(m * l for m, l in zip(mu, self.weight.exponents))
        shift = self.cartan.pairing(mu, list(eta))
        return base + shift if self.lowest else base - shift

    def _commutator_scalar(self, i: int, eta: Sequence[int]) -> RatQ:
        # (K_i - K_i^{-1}) / (q_i - q_i^{-1}) on component eta
        e = self.k_exponent(self.cartan.simple_root(i), eta)
        di = self.cartan.d[i]
        return (RatQ.q_power(e) - RatQ.q_power(-e)) / (RatQ.q_power(di) - RatQ.q_power(-di))

    def _lower(self, i: int, word: Word) -> dict[Word, RatQ]:
        """The non-concatenating generator (E_i for highest weight) applied to a word."""
        key = (i, word)
        if key in self._lower_cache:
            return self._lower_cache[key]
        out: dict[Word, RatQ] = {}
        if word:
            j, rest = word[0], word[1:]
            for w, c in self._lower(i, rest).items():
                nw = (j,) + w
                out[nw] = out.get(nw, ZERO) + c
            if i == j:
                eta = [0] * self.size
                for x in rest:
                    eta[x] += 1
                s = self._commutator_scalar(i, eta)
                if self.lowest:
                    s = -s
                out[rest] = out.get(rest, ZERO) + s
        out = {w: c for w, c in out.items() if c}
        self._lower_cache[key] = out
        return out

    # ------------------------------------------------------------ actions
    def _raise_op(self, i: int) -> GradedOperator:
        step = self.cartan.simple_root(i)

        def block(eta):
            tgt = vadd(eta, step)
            cols = [self.word_coords((i,) + w) for w in self.components[eta]]
            return _columns_to_matrix(cols, self.dim(tgt))

        return GradedOperator.build(self.space, step, block)

    def _lower_op(self, i: int) -> GradedOperator:
        step = tuple(-x for x in self.cartan.simple_root(i))

        def block(eta):
            tgt = vadd(eta, step)
            d = self.dim(tgt)
            if d == 0:
                return []
            cols = [self.vector_of(self._lower(i, w), tgt) for w in self.components[eta]]
            return _columns_to_matrix(cols, d)

        return GradedOperator.build(self.space, step, block)

    @cached_property
    def _generator_ops(self) -> dict[str, GradedOperator]:
        ops = {}
        for i in range(self.size):
            up, down = self._raise_op(i), self._lower_op(i)
            ops[f"F{i}"], ops[f"E{i}"] = (up, down) if not self.lowest else (down, up)
            ops[f"F{i}"].name, ops[f"E{i}"].name = f"F{i}", f"E{i}"
        return ops

    def E(self, i: int) -> GradedOperator:
        return self._generator_ops[f"E{i}"]

    def F(self, i: int) -> GradedOperator:
        return self._generator_ops[f"F{i}"]

    def K(self, mu: Sequence[int]) -> GradedOperator:
        mu = tuple(mu)
        return GradedOperator.diagonal(
            self.space, lambda etas: RatQ.q_power(self.k_exponent(mu, etas[0])), name=f"K{mu}"
        )

    def K_simple(self, i: int, power: int = 1) -> GradedOperator:
        mu = [0] * self.cartan.rank_inf
        mu[i] = power
        return self.K(mu)

    def act(self, generator: str, index=None) -> GradedOperator:
        """Generator action by name: ``act("E", 1)``, ``act("F", 0)``, ``act("K", mu)``."""
        if generator == "E":
            return self.E(index)
        if generator == "F":
            return self.F(index)
        if generator == "K":
            return self.K(index)
        raise ValueError(f"unknown generator {generator!r}")

    def highest_vector_degree(self) -> tuple:
        return (0,) * self.size

    def to_json(self) -> dict:
        return {
            "weight": self.weight.to_json(),
            "N": self.N,
            "lowest": self.lowest,
            "components": [
                {"degree": list(eta), "basis": [list(w) for w in basis]}
                for eta, basis in self.components.items()
            ],
        }


def _columns_to_matrix(cols: list[list[RatQ]], rows: int) -> list[list[RatQ]]:
    m = [[ZERO] * len(cols) for _ in range(rows)]
    for j, c in enumerate(cols):
        for i, x in enumerate(c):
            if x:
                m[i][j] = x
    return m


def build_verma(cartan: AffineCartan, weight, N: int, lowest: bool = False) -> TruncatedVerma:
    return TruncatedVerma(cartan, weight, N, lowest=lowest)


def relation_residuals(module: TruncatedVerma) -> dict[str, list[tuple]]:
    """Check every defining relation as an exact operator identity.

    Returns a map relation name -> degrees where it fails (empty when all hold).
    """
    c = module.cartan
    idx = range(module.size)
    out: dict[str, list[tuple]] = {}
    ninf = c.rank_inf
    basis_mu = []
    for i in range(ninf):
        mu = [0] * ninf
        mu[i] = 1
        basis_mu.append(tuple(mu))
    # K_mu K_nu = K_{mu+nu} = K_nu K_mu, K_0 = 1
    out["K0=1"] = module.K((0,) * ninf).residual_blocks(GradedOperator.identity(module.space))
    bad = []
    for mu in basis_mu:
        for nu in basis_mu:
            s = tuple(a + b for a, b in zip(mu, nu))
            bad += (module.K(mu) @ module.K(nu)).residual_blocks(module.K(s))
            bad += (module.K(mu) @ module.K(nu)).residual_blocks(module.K(nu) @ module.K(mu))
    out["K-commute"] = sorted(set(bad))
    # K_mu E_i = q^{(mu|a_i)} E_i K_mu and the F analogue
    bad_e, bad_f = [], []
    for mu in basis_mu:
        for i in idx:
            p = c.pairing(mu, c.simple_root(i))
            lhs = module.K(mu) @ module.E(i)
            rhs = (module.E(i) @ module.K(mu)).scale(RatQ.q_power(p))
            bad_e += lhs.residual_blocks(rhs)
            lhs = module.K(mu) @ module.F(i)
            rhs = (module.F(i) @ module.K(mu)).scale(RatQ.q_power(-p))
            bad_f += lhs.residual_blocks(rhs)
    out["K-E"] = sorted(set(bad_e))
    out["K-F"] = sorted(set(bad_f))
    # E_i F_h - F_h E_i = delta_ih (K_i - K_i^-1)/(q_i - q_i^-1)
    bad = []
    for i in idx:
        for h in idx:
            lhs = module.E(i) @ module.F(h) - module.F(h) @ module.E(i)
            if i == h:
                qi = RatQ.q_power(c.d[i])
                rhs = (module.K_simple(i) - module.K_simple(i, -1)).scale((qi - qi.inverse()).inverse())
            else:
                rhs = GradedOperator.zero(module.space, lhs.step)
            bad += lhs.residual_blocks(rhs)
    out["E-F"] = sorted(set(bad))
    # both q-Serre families act as zero
    for name, gen in (("Serre-E", module.E), ("Serre-F", module.F)):
        bad = []
        for i in idx:
            for j in idx:
                if i == j:
                    continue
                total = None
                for word, coeff in serre_relator(c, i, j).items():
                    op = gen(word[0])
                    for x in word[1:]:
                        op = op @ gen(x)
                    term = op.scale(coeff)
                    total = term if total is None else total + term
                bad += total.residual_blocks(GradedOperator.zero(module.space, total.step))
        out[name] = sorted(set(bad))
    return out
