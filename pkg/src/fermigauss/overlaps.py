"""Configuration-basis matrix elements of Gaussian operators.

The central formula: for a composed quadratic operator with transfer
matrix T (T22 invertible),

    <J| F |I> = (-1)^(n_I (n_I + 1)/2) (-1)^(n_I n_J)
                det(T22)^(1/2) pf(A restricted),

where ``A = [[X, e^Y], [-e^(Y^T), Z]]`` is built from the factorization
data and the restriction keeps the rows/columns of the occupied sites of
J in the first block and of I in the second block (equivalently, removes
the empty ones), both in increasing order.

When T22 is singular two rescue routes exist: an analytic continuation
in a small admissible perturbation of the generator (signed value,
Richardson-extrapolated), and the particle-hole permutation route which
recovers the magnitude only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .configs import FockConfig
from .linalg import (
    RCOND_TOL,
    LinalgError,
    SingularBlockError,
    check_skew,
    mat_exp,
    pfaffian,
    rcond_estimate,
    sqrt_det_continuous,
    sqrt_det_via_log,
)
from .linearpart import LinearGaussianOp, embed
from .quadratic import (
    QuadraticGenerator,
    TransferMatrix,
    cp_apply_transfer,
    cp_scan,
    random_generator,
    transfer_of,
)

#: default perturbation schedule for the analytic-continuation fallback
EPS_SCHEDULE = (1e-4, 5e-5)
#: default seed of the recorded random perturbation direction
EPS_SEED = 20240817
#: maximum relative disagreement between successive extrapolations
EPS_AGREE_TOL = 1e-6


class ExtrapolationError(LinalgError):
    """The perturbative fallback did not converge; magnitude via the
    particle-hole permutation route is still available."""


@dataclass
class OverlapResult:
    """Overlap value plus provenance.

    ``method`` is one of ``"pfaffian"``, ``"epsilon-regularized"`` or
    ``"cp-magnitude"``; ``sign_certain`` is False only for the last one,
    whose value is a magnitude.
    """

    value: complex
    method: str
    sign_certain: bool = True
    diagnostics: dict = field(default_factory=dict)


class OverlapKernel:
    """Pfaffian evaluation engine for one composed transfer matrix.

    Precomputes the antisymmetric pairing matrix and the scalar prefactor;
    ``element`` then evaluates any configuration pair.  X and Z enter only
    through the quadratic forms, so their (tiny, rounding-level) symmetric
    parts are dropped to keep the Pfaffian input exactly antisymmetric.

    The prefactor det(T22)^(1/2) carries a physical sign.  When the caller
    can supply a path from the identity (i.e. it knows the generators), it
    should pass the continuity-tracked value via ``prefactor``; built from
    a bare transfer matrix, the kernel trusts the principal log branch.
    """

    def __init__(self, t: TransferMatrix, rcond_tol: float = RCOND_TOL,
                 prefactor: tuple[complex, bool] | None = None):
        self.L = t.L
        self.rcond = rcond_estimate(t.t22)
        if self.rcond < rcond_tol:
            raise SingularBlockError("T22 not invertible", self.rcond)
        x = np.linalg.solve(t.t22.T, t.t12.T).T
        z = np.linalg.solve(t.t22, t.t21)
        x = 0.5 * (x - x.T)
        z = 0.5 * (z - z.T)
        exp_y = np.linalg.inv(t.t22.T)
        self.pairing = np.block([[x, exp_y], [-exp_y.T, z]])
        if prefactor is None:
            prefactor = sqrt_det_via_log(t.t22)
        self.prefactor, self.sign_certain = prefactor

    def element(self, bra: FockConfig, ket: FockConfig) -> complex:
        """<J| F |I>; exact zero on parity mismatch."""
        if bra.L != self.L or ket.L != self.L:
            raise ValueError("configuration length does not match operator size")
        n_i = ket.n_occupied
        n_j = bra.n_occupied
        if (n_i + n_j) % 2:
            return complex(0.0)
        keep = [j - 1 for j in bra.occupied] + [self.L + i - 1 for i in ket.occupied]
        sub = self.pairing[np.ix_(keep, keep)]
        sign = -1.0 if (n_i * (n_i + 1) // 2 + n_i * n_j) % 2 else 1.0
        return sign * self.prefactor * pfaffian(sub)


def _as_transfer(composed) -> TransferMatrix:
    if isinstance(composed, TransferMatrix):
        return composed
    if isinstance(composed, QuadraticGenerator):
        return transfer_of(composed)
    raise TypeError(f"expected QuadraticGenerator or TransferMatrix, got {type(composed)}")


def pair_kernel(m1: np.ndarray, m2dag: np.ndarray | None = None,
                rcond_tol: float = RCOND_TOL) -> OverlapKernel:
    """Kernel for <J| exp(M2^dag) exp(M1) |I> with a continuity-tracked sign.

    ``m2dag`` is the adjoint generator matrix (None for an identity bra
    operator).  The det(T22)^(1/2) branch is fixed by following the path
    s -> exp(s M2^dag) exp(s M1) from the identity, which is holomorphic
    in s and therefore admits complex detours around determinant zeros.
    """
    half = m1.shape[0] // 2

    def prod_at(s: complex) -> np.ndarray:
        t = mat_exp(s * m1)
        if m2dag is not None:
            t = mat_exp(s * m2dag) @ t
        return t

    kern = OverlapKernel(TransferMatrix(prod_at(1.0)), rcond_tol,
                         prefactor=sqrt_det_continuous(lambda s: prod_at(s)[half:, half:]))
    return kern


def compose_bra_ket(op2, op1) -> TransferMatrix:
    """Transfer matrix of e^(M2^dag) e^(M1), i.e. of <M2(J)| ... |M1(I)>.

    Works at the transfer level only, so it never hits a log-branch failure.
    """
    t1 = op1 if isinstance(op1, TransferMatrix) else transfer_of(op1)
    t2 = op2 if isinstance(op2, TransferMatrix) else transfer_of(op2)
    return TransferMatrix(t2.t.conj().T @ t1.t)


def overlap(composed, bra: FockConfig, ket: FockConfig, *,
            method: str = "auto",
            rcond_tol: float = RCOND_TOL,
            eps_schedule=EPS_SCHEDULE,
            eps_seed: int = EPS_SEED) -> OverlapResult:
    """<J| F |I> for an already-composed quadratic operator.

    ``composed`` is the generator M (with exp(M2^dag) exp(M1) = exp(M)) or
    its transfer matrix.  ``method="auto"`` uses the Pfaffian formula when
    T22 is invertible, then falls back to the perturbative continuation
    (requires the generator) and finally to the permutation magnitude.
    Forced methods: ``"pfaffian"``, ``"epsilon"``, ``"cp-magnitude"``.
    """
    t = _as_transfer(composed)
    if (bra.n_occupied + ket.n_occupied) % 2:
        return OverlapResult(complex(0.0), "pfaffian", True, {"parity_zero": True})
    if method in ("auto", "pfaffian"):
        try:
            if isinstance(composed, QuadraticGenerator):
                kern = pair_kernel(composed.m, None, rcond_tol)
            else:
                kern = OverlapKernel(t, rcond_tol)
            if kern.sign_certain or method == "pfaffian":
                return OverlapResult(
                    kern.element(bra, ket), "pfaffian", kern.sign_certain,
                    {"rcond": kern.rcond},
                )
        except SingularBlockError:
            if method == "pfaffian":
                raise
    if method in ("auto", "epsilon"):
        if not isinstance(composed, QuadraticGenerator):
            if method == "epsilon":
                raise ValueError("epsilon fallback needs the composed generator, not just T")
        else:
            try:
                return overlap_epsilon(composed, bra, ket,
                                       schedule=eps_schedule, seed=eps_seed)
            except ExtrapolationError:
                if method == "epsilon":
                    raise
    return overlap_magnitude_cp(t, bra, ket, rcond_tol=rcond_tol)


def state_overlap(op1, op2, bra: FockConfig, ket: FockConfig, **kwargs) -> OverlapResult:
    """<M2(J)|M1(I)> for two quadratic operators (generators or transfers).

    Composes at the transfer level; the perturbative fallback, when needed,
    perturbs the ket-side generator.
    """
    rcond_tol = kwargs.get("rcond_tol", RCOND_TOL)
    if (bra.n_occupied + ket.n_occupied) % 2:
        return OverlapResult(complex(0.0), "pfaffian", True, {"parity_zero": True})
    gens_known = isinstance(op1, QuadraticGenerator) and isinstance(op2, QuadraticGenerator)
    t1 = op1 if isinstance(op1, TransferMatrix) else transfer_of(op1)
    t2 = op2 if isinstance(op2, TransferMatrix) else transfer_of(op2)
    t = compose_bra_ket(t2, t1)
    try:
        if gens_known:
            kern = pair_kernel(op1.m, op2.m.conj().T, rcond_tol)
        else:
            kern = OverlapKernel(t, rcond_tol)
        if kern.sign_certain:
            return OverlapResult(kern.element(bra, ket), "pfaffian", True,
                                 {"rcond": kern.rcond})
    except SingularBlockError:
        pass
    if gens_known:
        m2dag = op2.m.conj().T

        def value_at(eps, gen):
            return pair_kernel(op1.m + eps * gen.m, m2dag).element(bra, ket)

        try:
            return _epsilon_extrapolate(value_at, op1.L,
                                        kwargs.get("eps_schedule", EPS_SCHEDULE),
                                        kwargs.get("eps_seed", EPS_SEED))
        except ExtrapolationError:
            pass
    return overlap_magnitude_cp(t, bra, ket)


def _epsilon_extrapolate(value_at, L: int, schedule, seed: int) -> OverlapResult:
    """Quadratic Richardson extrapolation of ``value_at(eps, G)`` to eps -> 0.

    The stated two-point schedule is augmented with one halved point; the
    convergence diagnostic compares the linear extrapolations of successive
    pairs and fails loudly when they disagree beyond EPS_AGREE_TOL.
    """
    g = random_generator(L, seed, scale=1.0)
    e1, e2 = float(schedule[0]), float(schedule[1])
    e3 = 0.5 * e2
    eps = (e1, e2, e3)
    vals = [complex(value_at(e, g)) for e in eps]
    r12 = (e1 * vals[1] - e2 * vals[0]) / (e1 - e2)
    r23 = (e2 * vals[2] - e3 * vals[1]) / (e2 - e3)
    # quadratic (three-point Lagrange) extrapolation to eps = 0
    val = complex(
        vals[0] * (eps[1] * eps[2]) / ((eps[0] - eps[1]) * (eps[0] - eps[2]))
        + vals[1] * (eps[0] * eps[2]) / ((eps[1] - eps[0]) * (eps[1] - eps[2]))
        + vals[2] * (eps[0] * eps[1]) / ((eps[2] - eps[0]) * (eps[2] - eps[1]))
    )
    disagreement = abs(r23 - r12) / max(1.0, abs(val))
    diagnostics = {
        "eps_schedule": eps,
        "eps_seed": seed,
        "eps_disagreement": disagreement,
    }
    if disagreement > EPS_AGREE_TOL:
        raise ExtrapolationError(
            f"epsilon extrapolation disagreement {disagreement:.3e} > {EPS_AGREE_TOL:.1e}; "
            "consider the cp-magnitude route"
        )
    return OverlapResult(val, "epsilon-regularized", True, diagnostics)


def overlap_epsilon(gen: QuadraticGenerator, bra: FockConfig, ket: FockConfig, *,
                    schedule=EPS_SCHEDULE, seed: int = EPS_SEED) -> OverlapResult:
    """Overlap by analytic continuation in M + eps G.

    G is a fixed random admissible generator drawn from ``seed`` (recorded
    in the diagnostics), which generically restores the invertibility of
    T22; the value is Richardson-extrapolated to eps -> 0.
    """
    if (bra.n_occupied + ket.n_occupied) % 2:
        return OverlapResult(complex(0.0), "epsilon-regularized", True, {"parity_zero": True})

    def value_at(eps, g):
        return pair_kernel(gen.m + eps * g.m, None).element(bra, ket)

    return _epsilon_extrapolate(value_at, gen.L, schedule, seed)


def overlap_magnitude_cp(composed, bra: FockConfig, ket: FockConfig, *,
                         rcond_tol: float = RCOND_TOL) -> OverlapResult:
    """|<J| F |I>| through a particle-hole permutation.

    Applies the smallest site subset S that makes the permuted T22
    invertible, exchanges occupations 0 <-> 1 on S in both configurations
    and evaluates the permuted overlap.  The sign is genuinely ambiguous in
    this picture, so the magnitude is returned with ``sign_certain=False``.
    """
    t = _as_transfer(composed)
    for entry in cp_scan(t, rcond_tol):
        if entry.t22_invertible:
            sites = entry.sites
            tt = cp_apply_transfer(t, sites)
            kern = OverlapKernel(tt, rcond_tol)
            val = kern.element(bra.flipped(sites), ket.flipped(sites))
            return OverlapResult(
                complex(abs(val)), "cp-magnitude", False,
                {"cp_sites": sites, "rcond": kern.rcond},
            )
    raise SingularBlockError(
        "no site subset restores invertibility; unsupported instance", 0.0
    )


# ---------------------------------------------------------------------------
# overlaps of states generated by operators with linear parts
# ---------------------------------------------------------------------------

def extended_bra_ket(op1: LinearGaussianOp, op2: LinearGaussianOp,
                     bra: FockConfig, ket: FockConfig):
    """Embedded transfer and ancilla-extended configurations for
    <(M2,u2,v2)(J) | (M1,u1,v1)(I)>.

    The bra ancilla is always empty; the ket ancilla carries the parity
    mismatch of the two configurations (linear parts break particle-number
    parity, which the ancilla absorbs).
    """
    if not (op1.L == op2.L == bra.L == ket.L):
        raise ValueError("inconsistent site counts")
    t = compose_bra_ket(transfer_of(embed(op2)), transfer_of(embed(op1)))
    anc = 0 if bra.parity == ket.parity else 1
    return t, bra.with_ancilla(0), ket.with_ancilla(anc)


def generalized_overlap(op1: LinearGaussianOp, op2: LinearGaussianOp,
                        bra: FockConfig, ket: FockConfig, *,
                        method: str = "auto",
                        eps_schedule=EPS_SCHEDULE,
                        eps_seed: int = EPS_SEED) -> OverlapResult:
    """<(M2,u2,v2)(J) | (M1,u1,v1)(I)> via the ancilla embedding.

    There is no parity short-circuit here: opposite-parity overlaps are
    generally nonzero once linear terms are present (they vanish again,
    through the Pfaffian, when u = v = 0).
    """
    t, bra_e, ket_e = extended_bra_ket(op1, op2, bra, ket)
    m2dag_e = embed(op2).m.conj().T
    if method in ("auto", "pfaffian"):
        try:
            kern = pair_kernel(embed(op1).m, m2dag_e)
            if kern.sign_certain or method == "pfaffian":
                return OverlapResult(kern.element(bra_e, ket_e), "pfaffian",
                                     kern.sign_certain, {"rcond": kern.rcond})
        except SingularBlockError:
            if method == "pfaffian":
                raise
    if method in ("auto", "epsilon"):
        def value_at(eps, g):
            op_eps = LinearGaussianOp(op1.m + eps * g.m, op1.u, op1.v)
            return pair_kernel(embed(op_eps).m, m2dag_e).element(bra_e, ket_e)

        try:
            return _epsilon_extrapolate(value_at, op1.L, eps_schedule, eps_seed)
        except ExtrapolationError:
            if method == "epsilon":
                raise
    return overlap_magnitude_cp(t, bra_e, ket_e)


# ---------------------------------------------------------------------------
# pair states  exp((1/2) c^dag R c^dag + u^dag c^dag) |0>
# ---------------------------------------------------------------------------

def pair_state_amplitude(r: np.ndarray, u, cfg: FockConfig) -> complex:
    """<J | exp((1/2) c^dag R c^dag + u^dag c^dag) |0>.

    Even occupation: Pfaffian of R restricted to the occupied sites.  Odd
    occupation: the same with R bordered by the linear coefficients (the
    border row/column is never removed).
    """
    r = check_skew(np.asarray(r, dtype=complex), name="R")
    L = r.shape[0]
    u = np.zeros(L, dtype=complex) if u is None else np.asarray(u, dtype=complex)
    if cfg.L != L:
        raise ValueError("configuration length does not match R")
    occ = [j - 1 for j in cfg.occupied]
    if cfg.n_occupied % 2 == 0:
        return pfaffian(r[np.ix_(occ, occ)])
    uc = u.conj()
    bordered = np.zeros((L + 1, L + 1), dtype=complex)
    bordered[:L, :L] = r
    bordered[:L, L] = uc
    bordered[L, :L] = -uc
    keep = occ + [L]
    return pfaffian(bordered[np.ix_(keep, keep)])


def pair_state_norm(r: np.ndarray, u) -> float:
    """Inner product <psi|psi> of the (unnormalized) pair state.

    Evaluated as the square root of the closed-form determinant

        <psi|psi>^2 = (1 + |u|^2)^(1-L)
                      det[(1 + |u|^2)(I + u u^dag)
                          + R^dag ((1 + |u|^2) I - u* u^T) R],

    which at u = 0 reduces to <psi|psi>^2 = det(I + R^dag R).
    """
    r = check_skew(np.asarray(r, dtype=complex), name="R")
    L = r.shape[0]
    u = np.zeros(L, dtype=complex) if u is None else np.asarray(u, dtype=complex)
    nu = 1.0 + float(np.real(u @ u.conj()))
    eye = np.eye(L)
    inner = nu * (eye + np.outer(u, u.conj())) + r.conj().T @ (nu * eye - np.outer(u.conj(), u)) @ r
    det = complex(np.linalg.det(inner)) * nu ** (1 - L)
    if abs(det.imag) > 1e-9 * max(1.0, abs(det)) or det.real <= 0:
        raise LinalgError(f"norm determinant not positive real: {det}")
    return float(np.sqrt(det.real))


# ---------------------------------------------------------------------------
# full Grassmann-integral cross-check
# ---------------------------------------------------------------------------

def grassmann_pairing_matrix(x: np.ndarray, exp_y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """The intermediate 6L x 6L antisymmetric matrix of the coherent-state
    integral, before the integration over auxiliary variable pairs.

    Its Pfaffian with the corresponding row/column removals must coincide
    with the reduced 2L x 2L form; this is exercised as a property test,
    the production path always uses the reduced matrix.
    """
    L = x.shape[0]
    eye = np.eye(L, dtype=complex)
    o = np.zeros((L, L), dtype=complex)
    return np.block([
        [x, eye, o, o, o, o],
        [-eye, o, eye, o, o, o],
        [o, -eye, o, exp_y, o, o],
        [o, o, -exp_y.T, o, eye, o],
        [o, o, o, -eye, o, eye],
        [o, o, o, o, -eye, z],
    ])


def grassmann_reduced_pfaffian(x, exp_y, z, bra: FockConfig, ket: FockConfig) -> complex:
    """pf of the 6L x 6L matrix with rows/cols J0 and 5L + I0 removed."""
    L = x.shape[0]
    big = grassmann_pairing_matrix(x, exp_y, z)
    keep = [j - 1 for j in bra.occupied] + list(range(L, 5 * L)) \
        + [5 * L + i - 1 for i in ket.occupied]
    return pfaffian(big[np.ix_(keep, keep)])
