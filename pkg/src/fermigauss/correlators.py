"""Expectation values of operator strings between Gaussian states.

For quadratic operators the one- and two-point functions are evaluated by
expanding each string operator through the ket-side transfer matrix,
acting with the resulting bare operators on the configuration (with the
usual string signs) and applying the Pfaffian overlap formula to the
modified configuration.  Higher even-point functions reduce to the
Pfaffian of the matrix of two-point values divided by the overlap once
per extra pair; odd-point functions with opposite-parity configurations
are rewritten by pulling one mode operator out of the ket configuration
through the inverse transfer matrix.

With linear terms present, every string maps into the ancilla-extended
space: products of substituted operators collapse pairwise, so an even
string passes through unchanged while an odd string acquires a single
leftmost ``c0^dag - c0`` factor.  The generalized Wick expansion -- all
pairings plus at most one singleton, each factor a one- or two-point
value -- follows from the extended-space pairing sum and is exposed both
as a theorem check and as a term table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .configs import FockConfig, apply_mode
from .linalg import RCOND_TOL, SingularBlockError, mat_exp
from .linearpart import LinearGaussianOp, embed
from .overlaps import (
    EPS_SCHEDULE,
    EPS_SEED,
    _epsilon_extrapolate,
    pair_kernel,
)
from .quadratic import QuadraticGenerator, j_matrix

#: relative threshold below which the normalizing overlap counts as zero
ZERO_OVERLAP_TOL = 1e-13


@dataclass(frozen=True)
class ModeOp:
    """A single creation (``dagger=True``) or annihilation operator."""

    site: int
    dagger: bool

    def __str__(self) -> str:
        return f"c{'d' if self.dagger else ''}{self.site}"

    def shifted(self, offset: int) -> "ModeOp":
        return ModeOp(self.site + offset, self.dagger)


_TOKEN = re.compile(r"^c(d?)([1-9][0-9]*)$")


def parse_mode_string(s: str) -> tuple[ModeOp, ...]:
    """Parse ``"c1 cd2 c3"`` into mode operators (cd = creation), 1-based sites."""
    ops = []
    for tok in s.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad operator token {tok!r}: expected c<k> or cd<k>")
        ops.append(ModeOp(int(m.group(2)), m.group(1) == "d"))
    return tuple(ops)


class ZeroOverlapError(Exception):
    """The Wick normalization divides by a vanishing overlap.

    Carries the unnormalized pairing sum so the caller can still report it.
    """

    def __init__(self, unnormalized: complex, n_factors: int, overlap: complex):
        super().__init__(
            f"overlap {overlap} too small to normalize a {n_factors}-factor expansion; "
            "unnormalized sum attached"
        )
        self.unnormalized = unnormalized
        self.n_factors = n_factors
        self.overlap = overlap


def pairings_with_sign(indices):
    """Perfect matchings of ``indices`` with their Pfaffian expansion signs.

    Yields ``(sign, pairs)`` where pairs keep each pair in original relative
    order and the sign is the parity of the permutation mapping the input
    order to the concatenated pair order.
    """
    idx = tuple(indices)
    if not idx:
        yield 1, ()
        return
    first = idx[0]
    for pos in range(1, len(idx)):
        partner = idx[pos]
        rest = idx[1:pos] + idx[pos + 1:]
        s = -1 if (pos - 1) % 2 else 1
        for s2, pairs in pairings_with_sign(rest):
            yield s * s2, ((first, partner),) + pairs


class _Engine:
    """Formula evaluation for one composed pair of quadratic generators.

    Holds the overlap kernel of ``exp(m2dag) exp(m1)`` together with the
    ket-side transfer matrix (for conjugating string operators) and value
    caches keyed by configuration bits.
    """

    def __init__(self, m1: np.ndarray, m2dag, rcond_tol: float = RCOND_TOL):
        self.L = m1.shape[0] // 2
        self.kern = pair_kernel(m1, m2dag, rcond_tol)
        self.t1 = mat_exp(m1)
        j = j_matrix(self.L)
        self.t1inv = j @ self.t1.T @ j
        self._elements: dict = {}
        self._two_points: dict = {}

    def element(self, bra_bits, ket_bits) -> complex:
        key = (bra_bits, ket_bits)
        val = self._elements.get(key)
        if val is None:
            val = self.kern.element(FockConfig(bra_bits), FockConfig(ket_bits))
            self._elements[key] = val
        return val

    def _coeff_rows(self, op: ModeOp):
        r = op.site - 1 + (self.L if op.dagger else 0)
        return self.t1[r, : self.L], self.t1[r, self.L:]

    def one_point(self, op: ModeOp, bra_bits, ket_bits) -> complex:
        cc, cd = self._coeff_rows(op)
        total = complex(0.0)
        for k in range(self.L):
            for dag, coeff in ((False, cc[k]), (True, cd[k])):
                if coeff == 0.0:
                    continue
                s, nb = apply_mode(ket_bits, k + 1, dag)
                if s:
                    total += coeff * s * self.element(bra_bits, nb)
        return total

    def two_point(self, op_a: ModeOp, op_b: ModeOp, bra_bits, ket_bits) -> complex:
        key = (op_a, op_b, bra_bits, ket_bits)
        cached = self._two_points.get(key)
        if cached is not None:
            return cached
        ca, da = self._coeff_rows(op_a)
        cb, db = self._coeff_rows(op_b)
        total = complex(0.0)
        for l in range(self.L):
            for dag_b, coeff_b in ((False, cb[l]), (True, db[l])):
                if coeff_b == 0.0:
                    continue
                s2, mid = apply_mode(ket_bits, l + 1, dag_b)
                if not s2:
                    continue
                for k in range(self.L):
                    for dag_a, coeff_a in ((False, ca[k]), (True, da[k])):
                        if coeff_a == 0.0:
                            continue
                        s1, nb = apply_mode(mid, k + 1, dag_a)
                        if s1:
                            total += coeff_a * coeff_b * s1 * s2 * self.element(bra_bits, nb)
        self._two_points[key] = total
        return total

    def n_point(self, ops, bra_bits, ket_bits) -> complex:
        n = len(ops)
        if (sum(ket_bits) + n + sum(bra_bits)) % 2:
            return complex(0.0)
        if n == 0:
            return self.element(bra_bits, ket_bits)
        if n == 1:
            return self.one_point(ops[0], bra_bits, ket_bits)
        if n == 2:
            return self.two_point(ops[0], ops[1], bra_bits, ket_bits)
        if n % 2 == 0:
            return self._wick_even(ops, bra_bits, ket_bits)
        return self._odd_reduction(ops, bra_bits, ket_bits)

    def _wick_even(self, ops, bra_bits, ket_bits) -> complex:
        from .linalg import pfaffian
        n = len(ops)
        g = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(a + 1, n):
                val = self.two_point(ops[a], ops[b], bra_bits, ket_bits)
                g[a, b] = val
                g[b, a] = -val
        pairing_sum = pfaffian(g)
        n_pairs = n // 2
        if n_pairs == 1:
            return pairing_sum
        ovl = self.element(bra_bits, ket_bits)
        scale = max(1.0, float(np.max(np.abs(g))))
        if abs(ovl) < ZERO_OVERLAP_TOL * scale:
            raise ZeroOverlapError(pairing_sum, n_pairs, ovl)
        return pairing_sum / ovl ** (n_pairs - 1)

    def string_element(self, ops, bra_bits, ket_bits) -> complex:
        """<J| F phi_1 ... phi_n |I> by direct expansion, no normalization.

        Conjugates the rightmost operator through the ket-side transfer and
        recurses on the prefix with a modified ket configuration, memoized
        on (prefix length, configuration).  Unlike the Wick route this never
        divides by an overlap, so it stays exact at superselection points.
        """
        ops = tuple(ops)
        if (sum(ket_bits) + len(ops) + sum(bra_bits)) % 2:
            return complex(0.0)
        memo: dict = {}

        def expand(k: int, bits) -> complex:
            if k == 0:
                return self.element(bra_bits, bits)
            key = (k, bits)
            val = memo.get(key)
            if val is not None:
                return val
            cc, cd = self._coeff_rows(ops[k - 1])
            total = complex(0.0)
            for j in range(self.L):
                for dag, coeff in ((False, cc[j]), (True, cd[j])):
                    if coeff == 0.0:
                        continue
                    s, nb = apply_mode(bits, j + 1, dag)
                    if s:
                        total += coeff * s * expand(k - 1, nb)
            memo[key] = total
            return total

        return expand(len(ops), ket_bits)

    def _odd_reduction(self, ops, bra_bits, ket_bits) -> complex:
        # pull one mode operator out of the ket configuration at site 1:
        # |I> = c1^dag |I'> when occupied, |I> = c1 |I'> when empty (sign +1)
        occupied = bool(ket_bits[0])
        new_bits = (1 - ket_bits[0],) + ket_bits[1:]
        row = self.t1inv[self.L if occupied else 0, :]
        total = complex(0.0)
        for j in range(self.L):
            if row[j] != 0.0:
                total += row[j] * self.n_point(
                    tuple(ops) + (ModeOp(j + 1, False),), bra_bits, new_bits)
            if row[self.L + j] != 0.0:
                total += row[self.L + j] * self.n_point(
                    tuple(ops) + (ModeOp(j + 1, True),), bra_bits, new_bits)
        return total


class CorrelatorContext:
    """A bra/ket pair of Gaussian states with cached composition data.

    ``op1`` generates the ket state from configuration ``ket``; ``op2`` the
    bra state from ``bra``.  Both may carry linear parts; the purely
    quadratic formulas demand both be quadratic.  When the composed T22 is
    singular, evaluations transparently switch to the perturbative
    continuation of the ket-side generator.
    """

    def __init__(self, op1, op2, bra: FockConfig, ket: FockConfig, *,
                 rcond_tol: float = RCOND_TOL,
                 eps_schedule=EPS_SCHEDULE, eps_seed: int = EPS_SEED):
        if isinstance(op1, QuadraticGenerator):
            op1 = LinearGaussianOp.quadratic(op1)
        if isinstance(op2, QuadraticGenerator):
            op2 = LinearGaussianOp.quadratic(op2)
        if not (op1.L == op2.L == bra.L == ket.L):
            raise ValueError("inconsistent site counts across operators and configurations")
        self.op1 = op1
        self.op2 = op2
        self.bra = bra
        self.ket = ket
        self.rcond_tol = rcond_tol
        self.eps_schedule = eps_schedule
        self.eps_seed = eps_seed
        self._quad: _Engine | None | str = "unset"
        self._ext: _Engine | None | str = "unset"

    @property
    def L(self) -> int:
        return self.op1.L

    @property
    def quadratic(self) -> bool:
        return self.op1.is_quadratic and self.op2.is_quadratic

    # -- engines ------------------------------------------------------

    def _quad_engine(self):
        if self._quad == "unset":
            try:
                self._quad = _Engine(self.op1.m, self.op2.m.conj().T, self.rcond_tol)
            except SingularBlockError:
                self._quad = None
        return self._quad

    def _ext_engine(self):
        if self._ext == "unset":
            try:
                self._ext = _Engine(embed(self.op1).m, embed(self.op2).m.conj().T,
                                    self.rcond_tol)
            except SingularBlockError:
                self._ext = None
        return self._ext

    def _eval_quadratic(self, fn) -> complex:
        engine = self._quad_engine()
        if engine is not None:
            return fn(engine)
        m2dag = self.op2.m.conj().T

        def value_at(eps, g):
            return fn(_Engine(self.op1.m + eps * g.m, m2dag, self.rcond_tol))

        return _epsilon_extrapolate(value_at, self.L, self.eps_schedule, self.eps_seed).value

    def _eval_extended(self, fn) -> complex:
        engine = self._ext_engine()
        if engine is not None:
            return fn(engine)
        m2dag = embed(self.op2).m.conj().T

        def value_at(eps, g):
            op_eps = LinearGaussianOp(self.op1.m + eps * g.m, self.op1.u, self.op1.v)
            return fn(_Engine(embed(op_eps).m, m2dag, self.rcond_tol))

        return _epsilon_extrapolate(value_at, self.L, self.eps_schedule, self.eps_seed).value

    def _require_quadratic(self):
        if not self.quadratic:
            raise ValueError("this formula requires purely quadratic operators (u = v = 0); "
                             "use generalized_expectation instead")


# -- quadratic-sector correlators --------------------------------------


def overlap_value(ctx: CorrelatorContext) -> complex:
    """<M2(J)|M1(I)> for the context's state pair (quadratic sector)."""
    ctx._require_quadratic()
    if ctx.bra.parity != ctx.ket.parity:
        return complex(0.0)
    return ctx._eval_quadratic(lambda e: e.element(ctx.bra.bits, ctx.ket.bits))


def one_point(ctx: CorrelatorContext, op: ModeOp) -> complex:
    """<J, M2| phi |M1, I>; exactly zero for equal-parity configurations."""
    ctx._require_quadratic()
    if ctx.bra.parity == ctx.ket.parity:
        return complex(0.0)
    return ctx._eval_quadratic(lambda e: e.one_point(op, ctx.bra.bits, ctx.ket.bits))


def two_point(ctx: CorrelatorContext, op_a: ModeOp, op_b: ModeOp) -> complex:
    """<J, M2| phi_a phi_b |M1, I>; exactly zero for opposite parities."""
    ctx._require_quadratic()
    if ctx.bra.parity != ctx.ket.parity:
        return complex(0.0)
    return ctx._eval_quadratic(lambda e: e.two_point(op_a, op_b, ctx.bra.bits, ctx.ket.bits))


def n_point(ctx: CorrelatorContext, ops) -> complex:
    """Wick evaluation of an arbitrary operator string (quadratic sector).

    Even same-parity strings: Pfaffian of the two-point matrix divided by
    the overlap once per extra pair.  Odd opposite-parity strings: one mode
    operator is pulled out of the ket configuration through exp(-M1) and
    the even machinery applies.  Parity-forbidden strings are exact zeros.

    Raises :class:`ZeroOverlapError` when the normalization would divide
    by a vanishing overlap; the unnormalized pairing sum rides along.
    """
    ops = tuple(ops)
    ctx._require_quadratic()
    if (ctx.ket.n_occupied + len(ops)) % 2 != ctx.bra.n_occupied % 2:
        return complex(0.0)
    return ctx._eval_quadratic(lambda e: e.n_point(ops, ctx.bra.bits, ctx.ket.bits))


# -- linear-sector correlators ------------------------------------------


def _extended_data(ctx: CorrelatorContext, ops):
    bra_bits = (0,) + ctx.bra.bits
    anc = 0 if ctx.bra.parity == ctx.ket.parity else 1
    ket_bits = (anc,) + ctx.ket.bits
    shifted = tuple(op.shifted(1) for op in ops)
    return bra_bits, ket_bits, shifted


def generalized_overlap_value(ctx: CorrelatorContext) -> complex:
    """Overlap of the two states through the ancilla embedding (any parities)."""
    bra_bits, ket_bits, _ = _extended_data(ctx, ())
    return ctx._eval_extended(lambda e: e.element(bra_bits, ket_bits))


def generalized_expectation(ctx: CorrelatorContext, ops) -> complex:
    """Expectation of an operator string between states with linear parts.

    The string is mapped into the ancilla-extended space: even strings pass
    through unchanged (substituted operators collapse pairwise), odd strings
    acquire one leftmost ``c0^dag - c0`` factor.  The extended string element
    is then evaluated by direct expansion, which never normalizes by an
    overlap and therefore survives superselection points (u = v = 0 limits).
    """
    ops = tuple(ops)
    bra_bits, ket_bits, shifted = _extended_data(ctx, ops)
    if len(ops) % 2 == 0:
        return ctx._eval_extended(lambda e: e.string_element(shifted, bra_bits, ket_bits))
    plus = (ModeOp(1, True),) + shifted
    minus = (ModeOp(1, False),) + shifted
    return ctx._eval_extended(
        lambda e: e.string_element(plus, bra_bits, ket_bits)
        - e.string_element(minus, bra_bits, ket_bits)
    )


@dataclass(frozen=True)
class WickTerm:
    """One completely contracted product in the generalized expansion."""

    sign: int
    pairs: tuple[tuple[int, int], ...]
    singleton: int | None
    factors: tuple[complex, ...]

    @property
    def value(self) -> complex:
        out = complex(self.sign)
        for f in self.factors:
            out *= f
        return out


def generalized_wick_expansion(ctx: CorrelatorContext, ops):
    """Expectation via the sum over pairings (plus one singleton when odd).

    Returns ``(value, terms)``.  Every term is a product of one- and
    two-point expectations with the Pfaffian pairing sign; the sum is
    divided by the overlap once per factor beyond the first.  Validates
    the generalized Wick theorem against :func:`generalized_expectation`
    and exposes the term table.
    """
    ops = tuple(ops)
    n = len(ops)
    ovl = generalized_overlap_value(ctx)
    if n == 0:
        return ovl, [WickTerm(1, (), None, (ovl,))]
    pair_vals: dict[tuple[int, int], complex] = {}
    for a in range(n):
        for b in range(a + 1, n):
            pair_vals[(a, b)] = generalized_expectation(ctx, (ops[a], ops[b]))
    single_vals = {}
    if n % 2:
        for a in range(n):
            single_vals[a] = generalized_expectation(ctx, (ops[a],))
    terms = []
    if n % 2 == 0:
        for sign, pairs in pairings_with_sign(range(n)):
            terms.append(WickTerm(sign, pairs, None,
                                  tuple(pair_vals[p] for p in pairs)))
    else:
        # index -1 stands for the ancilla-charge slot; its partner is the singleton
        for sign, pairs in pairings_with_sign((-1,) + tuple(range(n))):
            singleton = pairs[0][1]
            rest = pairs[1:]
            factors = (single_vals[singleton],) + tuple(pair_vals[p] for p in rest)
            terms.append(WickTerm(sign, rest, singleton, factors))
    total = sum(t.value for t in terms)
    n_factors = (n + 1) // 2 if n % 2 else n // 2
    if n_factors <= 1:
        return total, terms
    scale = max([1.0] + [abs(v) for v in pair_vals.values()])
    if abs(ovl) < ZERO_OVERLAP_TOL * scale:
        raise ZeroOverlapError(total, n_factors, ovl)
    return total / ovl ** (n_factors - 1), terms
