"""Small dense complex linear algebra for up to four qubits.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Basis order is
``|electron, nucleus>`` (``|00>, |01>, |10>, |11>``) with ``|0> = (1, 0)``;
every other module inherits that convention.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

MAX_DIM = 16

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


class LinalgError(ValueError):
    """Raised for malformed operators, states or dimensions."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise LinalgError(f"expected a 2-D matrix, got shape {m.shape}")
    for d in m.shape:
        if not _is_pow2(d) or d > MAX_DIM:
            raise LinalgError(f"dimension {d} is not a power of two <= {MAX_DIM}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; square results may not exceed 16x16."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise LinalgError(f"kron result {rows}x{cols} exceeds {MAX_DIM}x{MAX_DIM}")
    return np.kron(a, b)


def kron_all(*ops) -> np.ndarray:
    out = as_matrix(ops[0])
    for op in ops[1:]:
        out = kron(out, op)
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return h.shape[0] == h.shape[1] and float(np.max(np.abs(h - dagger(h)))) < tol


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))) < tol


def check_unitary(u) -> np.ndarray:
    u = as_matrix(u)
    if not is_unitary(u):
        raise LinalgError("matrix is not unitary within tolerance")
    return u


def density_violations(rho: np.ndarray) -> list[str]:
    """List the density-matrix invariants that ``rho`` breaks (empty if valid)."""
    problems = []
    if rho.shape[0] != rho.shape[1]:
        return ["not square"]
    if not is_hermitian(rho):
        problems.append("not Hermitian")
    if abs(np.trace(rho) - 1.0) >= TRACE_TOL:
        problems.append(f"trace {np.trace(rho).real:.3g} != 1")
    hermitian_part = 0.5 * (rho + dagger(rho))
    if np.linalg.eigvalsh(hermitian_part).min() < PSD_TOL:
        problems.append("not positive semidefinite")
    return problems


def is_density(rho) -> bool:
    return not density_violations(np.asarray(rho, dtype=complex))


def check_density(rho) -> np.ndarray:
    rho = as_matrix(rho)
    problems = density_violations(rho)
    if problems:
        raise LinalgError("invalid density matrix: " + ", ".join(problems))
    return rho


def pure_density(psi) -> np.ndarray:
    psi = normalized_vector(psi)
    return np.outer(psi, psi.conj())


def normalized_vector(psi, tol: float = 1e-10) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if not _is_pow2(v.size) or v.size > MAX_DIM:
        raise LinalgError(f"state length {v.size} is not a power of two <= {MAX_DIM}")
    if abs(np.linalg.norm(v) - 1.0) >= tol:
        raise LinalgError(f"state vector has norm {np.linalg.norm(v):.12g}, expected 1")
    return v


def expm_hermitian(h, scale: float) -> np.ndarray:
    """Return ``exp(-i * scale * h)`` for Hermitian ``h`` via eigendecomposition."""
    h = as_matrix(h)
    if not is_hermitian(h):
        raise LinalgError("generator is not Hermitian")
    evals, evecs = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (evecs * np.exp(-1j * scale * evals)) @ dagger(evecs)


def partial_trace(rho, subsystem_dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix over the subsystems listed in ``keep``.

    Kept subsystems stay in their original order regardless of the order of
    ``keep``.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in subsystem_dims]
    total = int(np.prod(dims))
    if rho.ndim != 2 or rho.shape != (total, total):
        raise LinalgError(f"subsystem dims {dims} inconsistent with matrix shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise LinalgError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise LinalgError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # Contract traced axes pairwise, highest first so lower axis numbers stay put.
    for count, axis in enumerate(sorted(traced, reverse=True)):
        remaining = n - count
        t = np.trace(t, axis1=axis, axis2=axis + remaining)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


def fidelity_pure(psi, rho) -> float:
    """Overlap ``<psi|rho|psi>`` clipped to [0, 1]."""
    psi = normalized_vector(psi)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise LinalgError(f"state length {psi.size} does not match rho {rho.shape}")
    value = float(np.real(psi.conj() @ rho @ psi))
    return min(1.0, max(0.0, value))


def basis_vector(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v
