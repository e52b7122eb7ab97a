"""Dense 2^L Fock-space brute force.

Builds the mode operators through the Jordan-Wigner construction
(``c_l = prod_{j<l} sigma_j^z sigma_l^-``), exponentiates full operator
matrices and evaluates matrix elements, conjugations and expectation
values directly.  This module is the independent cross-check for every
closed formula in the package: it deliberately knows nothing about
transfer matrices, factorizations or Pfaffians.

Basis ordering: configurations ``(i_1, ..., i_L)`` are enumerated with
``i_1`` as the most significant bit, and the state ``|I>`` is the ordered
product of creation operators on occupied sites (site index increasing
left to right) applied to the vacuum.
"""

from __future__ import annotations

import numpy as np

from .configs import FockConfig
from .linalg import mat_exp

#: largest L for which mode matrices are built (memory guard)
MAX_SITES_MODES = 12
#: largest L for which full operator exponentials are taken
MAX_SITES_DENSE = 10

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _kron_chain(factors) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def mode_operators(L: int):
    """Annihilation/creation matrices ``[(c_1, c_1^dag), ...]`` for L sites.

    The anticommutation relations hold exactly (entries are 0/+-1).
    """
    if not 1 <= L <= MAX_SITES_MODES:
        raise ValueError(f"L must be in 1..{MAX_SITES_MODES}, got {L}")
    eye = np.eye(2, dtype=complex)
    ops = []
    for j in range(L):
        factors = [_SIGMA_Z] * j + [_SIGMA_MINUS] + [eye] * (L - j - 1)
        c = _kron_chain(factors)
        ops.append((c, c.conj().T))
    return ops


def config_index(bits) -> int:
    """Basis index of a configuration (site 1 = most significant bit)."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def config_state(cfg: FockConfig, modes=None) -> np.ndarray:
    """State vector of ``|I>`` built as the ordered product of creators on vacuum."""
    L = cfg.L
    if modes is None:
        modes = mode_operators(L)
    vec = np.zeros(2 ** L, dtype=complex)
    vec[0] = 1.0
    for site in reversed(cfg.occupied):
        vec = modes[site - 1][1] @ vec
    return vec


def quadratic_exponent(m: np.ndarray, u=None, v=None, modes=None) -> np.ndarray:
    """Dense matrix of ``(1/2)(c^dag, c) M (c, c^dag)^T + u^dag c^dag + v^T c``."""
    m = np.asarray(m, dtype=complex)
    L = m.shape[0] // 2
    if m.shape != (2 * L, 2 * L):
        raise ValueError(f"M must be 2L x 2L, got {m.shape}")
    if modes is None:
        modes = mode_operators(L)
    dim = 2 ** L
    # row vector (c^dag, c), column vector (c, c^dag)
    row = [modes[i][1] for i in range(L)] + [modes[i][0] for i in range(L)]
    col = [modes[i][0] for i in range(L)] + [modes[i][1] for i in range(L)]
    w = np.zeros((dim, dim), dtype=complex)
    for a in range(2 * L):
        for b in range(2 * L):
            if m[a, b] != 0.0:
                w += 0.5 * m[a, b] * (row[a] @ col[b])
    if u is not None:
        u = np.asarray(u, dtype=complex)
        for i in range(L):
            if u[i] != 0.0:
                w += np.conj(u[i]) * modes[i][1]
    if v is not None:
        v = np.asarray(v, dtype=complex)
        for i in range(L):
            if v[i] != 0.0:
                w += v[i] * modes[i][0]
    return w


def dense_gaussian(m: np.ndarray, u=None, v=None, modes=None) -> np.ndarray:
    """Dense 2^L x 2^L matrix of the Gaussian operator ``exp(...)``."""
    m = np.asarray(m, dtype=complex)
    L = m.shape[0] // 2
    if L > MAX_SITES_DENSE:
        raise ValueError(f"dense exponential capped at L={MAX_SITES_DENSE}, got {L}")
    return mat_exp(quadratic_exponent(m, u, v, modes=modes))


def dense_element(f: np.ndarray, bra: FockConfig, ket: FockConfig, modes=None) -> complex:
    """Matrix element ``<J| F |I>`` in the configuration basis."""
    bvec = config_state(bra, modes=modes)
    kvec = config_state(ket, modes=modes)
    return complex(bvec.conj() @ (f @ kvec))


def dense_conjugate(f: np.ndarray, op: np.ndarray) -> np.ndarray:
    """``F^-1 op F`` by direct solve."""
    return np.linalg.solve(f, op @ f)


def dense_expectation(f2: np.ndarray, a: np.ndarray, f1: np.ndarray,
                      bra: FockConfig, ket: FockConfig, modes=None) -> complex:
    """``<J| F2^dag A F1 |I>`` evaluated densely (A may be the identity)."""
    bvec = config_state(bra, modes=modes)
    kvec = config_state(ket, modes=modes)
    return complex(bvec.conj() @ (f2.conj().T @ (a @ (f1 @ kvec))))


def mode_string_matrix(ops, modes) -> np.ndarray:
    """Dense matrix of a product of bare mode operators.

    ``ops`` is a sequence of ``(site, dagger)`` pairs, leftmost factor first.
    """
    dim = modes[0][0].shape[0]
    out = np.eye(dim, dtype=complex)
    for site, dagger in ops:
        out = out @ (modes[site - 1][1] if dagger else modes[site - 1][0])
    return out
