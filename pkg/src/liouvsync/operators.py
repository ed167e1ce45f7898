"""Hilbert-space primitives.

Operators are plain ``numpy`` arrays of shape ``(d, d)``; Liouville vectors
are arrays of length ``d**2``.  Vectorization is column stacking throughout
the package: entry ``(i, j)`` of an operator lands at index ``j*d + i``.
With that convention ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
ENTROPY_CLAMP = 1e-14


def as_operator(a, name: str = "operator") -> np.ndarray:
    """Return ``a`` as a finite, square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        raise DimensionError(f"{name} must have positive dimension")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(np.asarray(m)) <= tol


def check_density_matrix(rho, name: str = "rho") -> np.ndarray:
    """Validate Hermiticity, unit trace and numerical positivity."""
    r = as_operator(rho, name)
    herm = hermiticity_error(r)
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"{name} is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(r)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"{name} has trace {tr:.12g}, expected 1")
    lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T))))
    if lam_min < -POSITIVITY_TOL:
        raise InvalidStateError(f"{name} has negative eigenvalue {lam_min:.3g}")
    return r


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def basis_op(i: int, j: int, dim: int) -> np.ndarray:
    """The matrix unit ``|i><j|`` (zero-based indices)."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def ket(i: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def kron(a, b) -> np.ndarray:
    return np.kron(as_operator(a, "A"), as_operator(b, "B"))


def kron_all(ops: Sequence) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, as_operator(op))
    return out


def vectorize(m) -> np.ndarray:
    """Column-stack a square matrix into a Liouville vector."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"can only vectorize square matrices, got {m.shape}")
    return m.reshape(-1, order="F").astype(complex, copy=True)


def hilbert_dim(n: int) -> int:
    d = math.isqrt(n)
    if d * d != n or d == 0:
        raise DimensionError(f"length {n} is not a positive perfect square")
    return d


def unvectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionError(f"Liouville vector must be 1-d, got shape {v.shape}")
    d = hilbert_dim(v.shape[0])
    return v.reshape((d, d), order="F").astype(complex, copy=True)


def commutator(a, b) -> np.ndarray:
    a = as_operator(a, "A")
    b = as_operator(b, "B")
    if a.shape != b.shape:
        raise DimensionError(f"commutator of {a.shape} and {b.shape}")
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a = as_operator(a, "A")
    b = as_operator(b, "B")
    if a.shape != b.shape:
        raise DimensionError(f"anticommutator of {a.shape} and {b.shape}")
    return a @ b + b @ a


def _check_basis(basis, dim: int) -> np.ndarray:
    """Columns of the returned matrix are the basis vectors."""
    if basis is None:
        return np.eye(dim, dtype=complex)
    u = np.asarray(basis, dtype=complex)
    if u.shape != (dim, dim):
        raise DimensionError(f"basis must be {dim}x{dim}, got {u.shape}")
    gram_dev = float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))
    if gram_dev > 1e-10:
        raise ValueError(f"basis is not orthonormal (Gram deviation {gram_dev:.3g})")
    return u


def in_basis(m: np.ndarray, basis=None) -> np.ndarray:
    """Matrix elements of ``m`` in the basis whose columns are given."""
    m = as_operator(m)
    u = _check_basis(basis, m.shape[0])
    return u.conj().T @ m @ u


def dephase(rho, basis=None) -> np.ndarray:
    """Remove all coherences of ``rho`` in ``basis`` (columns, default computational).

    The result is expressed back in the computational basis.
    """
    r = as_operator(rho, "rho")
    u = _check_basis(basis, r.shape[0])
    pops = np.einsum("ki,kl,li->i", u.conj(), r, u)
    return (u * pops) @ u.conj().T


def von_neumann_entropy(rho) -> float:
    """Entropy in nats; eigenvalues below 1e-14 count as zero."""
    r = as_operator(rho, "rho")
    lam = np.linalg.eigvalsh(hermitize(r))
    lam = lam[lam > ENTROPY_CLAMP]
    return float(-np.sum(lam * np.log(lam)))


def partial_trace(rho, dims: Sequence[int], keep: int) -> np.ndarray:
    """Reduced state of subsystem ``keep`` for a tensor product with ``dims``."""
    r = as_operator(rho, "rho")
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims) or int(np.prod(dims)) != r.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not multiply to {r.shape[0]}")
    if not 0 <= keep < len(dims):
        raise DimensionError(f"keep={keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = r.reshape(dims + dims)
    # trace out every other subsystem, highest index first so axes stay valid
    for k in reversed(range(n)):
        if k == keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + cur)
    return t.reshape(dims[keep], dims[keep])


def trace_distance(a, b) -> float:
    diff = hermitize(as_operator(a) - as_operator(b))
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def spectral_norm(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))
