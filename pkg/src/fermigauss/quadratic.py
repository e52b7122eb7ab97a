"""Quadratic fermionic Gaussian operators.

An operator ``F = exp((1/2)(c^dag, c) M (c, c^dag)^T)`` on L sites is
described by its 2L x 2L generator ``M`` (with ``J M`` antisymmetric,
``J = [[0, I], [I, 0]]``) or by its transfer matrix ``T = exp(M)``, which
implements the conjugation ``F^-1 (c, c^dag)^T F = T (c, c^dag)^T`` and
satisfies ``T J T^T = J``.

This module provides composition, the two normal-ordering factorizations
(pairing factor / number factor / pairing factor, in either ordering) and
the particle-hole "canonical permutation" transforms that restore the
factorizations when a diagonal block of ``T`` is singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linalg import (
    RCOND_TOL,
    SKEW_TOL,
    MatrixLogBranchError,
    SingularBlockError,
    mat_exp,
    mat_log,
    rcond_estimate,
    skew_defect,
    sqrt_det_via_log,
)

#: relative tolerance on T J T^T = J at construction
J_ORTHO_TOL = 1e-10


def j_matrix(L: int) -> np.ndarray:
    """The off-diagonal block identity ``[[0, I], [I, 0]]``."""
    eye = np.eye(L)
    zero = np.zeros((L, L))
    return np.block([[zero, eye], [eye, zero]])


def admissibility_defect(m: np.ndarray) -> float:
    """Relative antisymmetry defect of ``J M``."""
    m = np.asarray(m, dtype=complex)
    L = m.shape[0] // 2
    return skew_defect(j_matrix(L) @ m)


@dataclass(frozen=True)
class QuadraticGenerator:
    """Generator matrix M of a purely quadratic Gaussian operator."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"M must be square of even dimension, got shape {m.shape}")
        if m.size and not np.all(np.isfinite(m)):
            raise ValueError("M contains non-finite entries")
        d = admissibility_defect(m)
        if d > SKEW_TOL:
            raise ValueError(f"J.M is not antisymmetric (defect {d:.3e})")
        object.__setattr__(self, "m", m)

    @property
    def L(self) -> int:
        return self.m.shape[0] // 2

    def dagger(self) -> "QuadraticGenerator":
        """Generator of the adjoint operator (M -> M^dag)."""
        return QuadraticGenerator(self.m.conj().T)

    @classmethod
    def zero(cls, L: int) -> "QuadraticGenerator":
        return cls(np.zeros((2 * L, 2 * L), dtype=complex))


@dataclass(frozen=True)
class TransferMatrix:
    """Transfer matrix ``T = exp(M)`` with certified J-orthogonality."""

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] % 2:
            raise ValueError(f"T must be square of even dimension, got shape {t.shape}")
        d = self._defect(t)
        if d > J_ORTHO_TOL:
            raise ValueError(f"T J T^T = J violated (defect {d:.3e}); malformed input")
        object.__setattr__(self, "t", t)

    @staticmethod
    def _defect(t: np.ndarray) -> float:
        L = t.shape[0] // 2
        j = j_matrix(L)
        scale = max(1.0, float(np.max(np.abs(t))) ** 2)
        return float(np.max(np.abs(t @ j @ t.T - j))) / scale

    @property
    def L(self) -> int:
        return self.t.shape[0] // 2

    @property
    def t11(self) -> np.ndarray:
        return self.t[: self.L, : self.L]

    @property
    def t12(self) -> np.ndarray:
        return self.t[: self.L, self.L:]

    @property
    def t21(self) -> np.ndarray:
        return self.t[self.L:, : self.L]

    @property
    def t22(self) -> np.ndarray:
        return self.t[self.L:, self.L:]

    def j_defect(self) -> float:
        return self._defect(self.t)

    def inverse(self) -> "TransferMatrix":
        """T^-1 = J T^T J, exact consequence of J-orthogonality."""
        L = self.L
        j = j_matrix(L)
        return TransferMatrix(j @ self.t.T @ j)

    def dagger(self) -> "TransferMatrix":
        return TransferMatrix(self.t.conj().T)

    @classmethod
    def identity(cls, L: int) -> "TransferMatrix":
        return cls(np.eye(2 * L, dtype=complex))


def transfer_of(gen: QuadraticGenerator) -> TransferMatrix:
    """T = exp(M).  J-orthogonality is re-verified on the result."""
    return TransferMatrix(mat_exp(gen.m))


def compose_transfers(t1: TransferMatrix, t2: TransferMatrix) -> TransferMatrix:
    """Transfer matrix of the operator product F_1 F_2 (exact product T1 T2)."""
    if t1.L != t2.L:
        raise ValueError(f"site counts differ: {t1.L} vs {t2.L}")
    return TransferMatrix(t1.t @ t2.t)


@dataclass(frozen=True)
class ComposeResult:
    """Product of two Gaussian operators at the transfer level, plus the
    composed generator when the principal logarithm exists."""

    transfer: TransferMatrix
    generator: QuadraticGenerator | None
    generator_available: bool


def compose_generators(g1: QuadraticGenerator, g2: QuadraticGenerator) -> ComposeResult:
    """Generator M with exp(M) = exp(M1) exp(M2).

    When ``exp(M1) exp(M2)`` has spectrum touching the closed negative real
    axis the principal log does not exist; the transfer-level product is
    returned with ``generator_available=False``.
    """
    t = compose_transfers(transfer_of(g1), transfer_of(g2))
    try:
        m = mat_log(t.t)
    except MatrixLogBranchError:
        return ComposeResult(t, None, False)
    return ComposeResult(t, QuadraticGenerator(m), True)


@dataclass(frozen=True)
class FactoredGaussian:
    """Three-factor decomposition of a quadratic Gaussian operator.

    ``ordering="normal"``:  F = exp((1/2) c^dag X c^dag) exp(c^dag Y c - tr(Y)/2)
    exp((1/2) c Z c), with X = T12 T22^-1, Z = T22^-1 T21, exp(-Y) = T22^T.

    ``ordering="antinormal"``: F = exp((1/2) c X c) exp(c^dag Y c - tr(Y)/2)
    exp((1/2) c^dag Z c^dag), with X = T21 T11^-1, Z = T11^-1 T12, exp(Y) = T11.
    In both cases ``x`` is the left pairing factor and ``z`` the right one.

    ``prefactor`` is the scalar exp(-tr(Y)/2) (the vacuum amplitude of the
    middle factor); ``sign_certain`` is False when it had to be taken as a
    principal square root because the principal log of the pivot block does
    not exist.  ``y`` is None in that case.
    """

    ordering: str
    x: np.ndarray
    exp_y: np.ndarray
    z: np.ndarray
    prefactor: complex
    y: np.ndarray | None = None
    sign_certain: bool = True
    rcond: float = 1.0

    def x_canonical(self) -> np.ndarray:
        """Antisymmetrized accessor (X - X^T)/2 for display."""
        return 0.5 * (self.x - self.x.T)

    def z_canonical(self) -> np.ndarray:
        return 0.5 * (self.z - self.z.T)


def bbd_normal(t: TransferMatrix, rcond_tol: float = RCOND_TOL) -> FactoredGaussian:
    """Factorization with the creation-pair factor on the left (requires T22 invertible)."""
    rc = rcond_estimate(t.t22)
    if rc < rcond_tol:
        raise SingularBlockError("T22 not invertible; try a canonical permutation", rc)
    x = np.linalg.solve(t.t22.T, t.t12.T).T
    z = np.linalg.solve(t.t22, t.t21)
    exp_y = np.linalg.inv(t.t22.T)
    try:
        y = -mat_log(t.t22.T)
    except MatrixLogBranchError:
        y = None
    # exp(-tr Y / 2) = det(T22)^(1/2); sign fixed by the principal log of T22
    prefactor, sign_certain = sqrt_det_via_log(t.t22)
    return FactoredGaussian("normal", x, exp_y, z, prefactor, y, sign_certain, rc)


def bbd_antinormal(t: TransferMatrix, rcond_tol: float = RCOND_TOL) -> FactoredGaussian:
    """Factorization with the annihilation-pair factor on the left (requires T11 invertible)."""
    rc = rcond_estimate(t.t11)
    if rc < rcond_tol:
        raise SingularBlockError("T11 not invertible; try a canonical permutation", rc)
    x = np.linalg.solve(t.t11.T, t.t21.T).T
    z = np.linalg.solve(t.t11, t.t12)
    exp_y = t.t11.copy()
    try:
        y = mat_log(t.t11)
    except MatrixLogBranchError:
        y = None
    # exp(-tr Y / 2) = det(T11)^(-1/2)
    inv_pref, sign_certain = sqrt_det_via_log(t.t11)
    return FactoredGaussian("antinormal", x, exp_y, z, 1.0 / inv_pref, y, sign_certain, rc)


# ---------------------------------------------------------------------------
# canonical permutations (particle-hole swaps on a site subset)
# ---------------------------------------------------------------------------

def validate_sites(sites, L: int) -> tuple[int, ...]:
    sites = tuple(sorted(int(s) for s in sites))
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in {sites}")
    if sites and not (1 <= sites[0] and sites[-1] <= L):
        raise ValueError(f"sites {sites} out of range 1..{L}")
    return sites


def cp_matrix(L: int, sites) -> np.ndarray:
    """Permutation matrix exchanging c_j and c_j^dag for j in ``sites``.

    For the full site set this is exactly J, which maps between the two
    factorization orderings.
    """
    sites = validate_sites(sites, L)
    pi = np.eye(2 * L)
    for j in sites:
        a, b = j - 1, L + j - 1
        pi[[a, b]] = pi[[b, a]]
    return pi


@dataclass(frozen=True)
class CPTransformed:
    """Result of a canonical permutation: the transformed generator plus the
    relabeling record needed to map configurations and undo the transform."""

    generator: QuadraticGenerator
    sites: tuple[int, ...]
    pi: np.ndarray


def cp_transform(gen: QuadraticGenerator, sites) -> CPTransformed:
    """Conjugate the generator by the particle-hole swap on ``sites``.

    ``M -> Pi M Pi`` with ``Pi`` the block permutation exchanging rows and
    columns j and L+j.  Applying the same site set twice is an exact
    involution.
    """
    sites = validate_sites(sites, gen.L)
    pi = cp_matrix(gen.L, sites)
    return CPTransformed(QuadraticGenerator(pi @ gen.m @ pi), sites, pi)


def cp_apply_transfer(t: TransferMatrix, sites) -> TransferMatrix:
    """Transfer matrix of the permuted operator, Pi T Pi (exact)."""
    pi = cp_matrix(t.L, sites)
    return TransferMatrix(pi @ t.t @ pi)


@dataclass(frozen=True)
class CPScanEntry:
    sites: tuple[int, ...]
    rcond_t22: float
    rcond_t11: float
    t22_invertible: bool
    t11_invertible: bool


def _scan_entry(t: TransferMatrix, sites, rcond_tol: float) -> CPScanEntry:
    tt = cp_apply_transfer(t, sites)
    r22 = rcond_estimate(tt.t22)
    r11 = rcond_estimate(tt.t11)
    return CPScanEntry(tuple(sites), r22, r11, r22 >= rcond_tol, r11 >= rcond_tol)


def cp_scan(t: TransferMatrix, rcond_tol: float = RCOND_TOL, max_exhaustive: int = 20):
    """Invertibility report for every site subset (exhaustive for L <= 20).

    Entries are ordered by subset size, then lexicographically.  Above the
    exhaustive cap a greedy search is used instead: starting from the empty
    set, repeatedly add the single site that most improves the worse of the
    two block conditions, reporting each step.

    There is no decision procedure here beyond enumeration: when no subset
    restores invertibility, the decomposition simply does not exist in any
    particle-hole picture.
    """
    L = t.L
    if L <= max_exhaustive:
        entries = []
        for size in range(L + 1):
            for sites in combinations(range(1, L + 1), size):
                entries.append(_scan_entry(t, sites, rcond_tol))
        return entries
    # greedy mode
    entries = [_scan_entry(t, (), rcond_tol)]
    current: tuple[int, ...] = ()
    best = max(entries[0].rcond_t22, entries[0].rcond_t11)
    while not (entries[-1].t22_invertible or entries[-1].t11_invertible):
        candidates = [
            _scan_entry(t, tuple(sorted(current + (s,))), rcond_tol)
            for s in range(1, L + 1)
            if s not in current
        ]
        if not candidates:
            break
        nxt = max(candidates, key=lambda e: max(e.rcond_t22, e.rcond_t11))
        if max(nxt.rcond_t22, nxt.rcond_t11) <= best:
            break
        best = max(nxt.rcond_t22, nxt.rcond_t11)
        current = nxt.sites
        entries.append(nxt)
    return entries


def cp_suggestions(t: TransferMatrix, rcond_tol: float = RCOND_TOL, limit: int = 6):
    """Smallest site subsets whose permuted T22 is invertible."""
    out = [e.sites for e in cp_scan(t, rcond_tol) if e.t22_invertible]
    return out[:limit]


def random_generator(L: int, seed, scale: float = 1.0) -> QuadraticGenerator:
    """Random admissible generator (J.M antisymmetric), reproducible by seed.

    The block structure M = [[A, B], [C, -A^T]] with antisymmetric B, C
    parametrizes the full admissible family.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = scale / max(1.0, np.sqrt(L))

    def cplx(shape):
        return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    a = cplx((L, L))
    b = cplx((L, L))
    c = cplx((L, L))
    b = 0.5 * (b - b.T)
    c = 0.5 * (c - c.T)
    return QuadraticGenerator(np.block([[a, b], [c, -a.T]]))
