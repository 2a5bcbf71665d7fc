"""Dense complex linear algebra for small multi-qubit operators.

Everything operates on plain numpy arrays of complex128. Operators in this
package never exceed dim 32 (four chain qubits plus one environment qubit),
so all routines are dense and eigendecomposition-based.
"""

from __future__ import annotations

import numpy as np

# Default tolerance for matrix predicates (max-abs elementwise deviation).
ATOL = 1e-10

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {'x', 'y', 'z'}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, associating left to right."""
    if not ops:
        raise ValueError("kron requires at least one operand")
    out = np.asarray(ops[0], dtype=np.complex128)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return out


def embed_single_site(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a 2x2 operator on ``site`` (1-based) of an ``n_sites`` chain.

    Returns I ⊗ ... ⊗ op ⊗ ... ⊗ I with ``op`` in slot ``site``; the result
    has dimension 2**n_sites.
    """
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range for a chain of {n_sites} sites")
    left = np.eye(2 ** (site - 1), dtype=np.complex128)
    right = np.eye(2 ** (n_sites - site), dtype=np.complex128)
    return kron(left, op, right)


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) < atol)


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    eye = np.eye(m.shape[0])
    return bool(np.max(np.abs(m.conj().T @ m - eye)) < atol)


def is_positive_semidefinite(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    if not is_hermitian(m, atol):
        return False
    return bool(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)) > -atol)


def hermitian_eigh(h: np.ndarray, atol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, as (evals, evecs).

    Rejects inputs deviating from Hermiticity by more than ``atol`` and
    symmetrizes before ``eigh`` to absorb rounding.
    """
    h = np.asarray(h, dtype=np.complex128)
    if not is_hermitian(h, atol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh((h + h.conj().T) / 2.0)


def expm_minus_i(h: np.ndarray, t: float, atol: float = ATOL) -> np.ndarray:
    """exp(-i*t*h) for Hermitian ``h``, via eigendecomposition.

    The eigenvalues are real and the eigenvector matrix unitary, so the
    result is unitary up to rounding.
    """
    evals, evecs = hermitian_eigh(h, atol)
    phases = np.exp(-1j * t * evals)
    return (evecs * phases) @ evecs.conj().T


def partial_trace_last_qubit(m: np.ndarray) -> np.ndarray:
    """Trace out the final two-dimensional tensor factor of a square matrix."""
    m = np.asarray(m, dtype=np.complex128)
    dim = m.shape[0]
    if dim % 2 != 0:
        raise ValueError(f"dimension {dim} is odd; there is no final qubit to trace out")
    half = dim // 2
    return np.einsum("aebe->ab", m.reshape(half, 2, half, 2))


def trace_norm(m: np.ndarray, atol: float = ATOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix (Schatten 1-norm)."""
    h = np.asarray(m, dtype=np.complex128)
    if not is_hermitian(h, atol):
        raise ValueError("trace_norm expects a Hermitian matrix")
    evals = np.linalg.eigvalsh((h + h.conj().T) / 2.0)
    return float(np.sum(np.abs(evals)))
