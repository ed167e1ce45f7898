"""Non-Hermitian eigenanalysis of Liouvillians.

Left eigenvectors follow ``L^+ |l> = conj(lambda) |l>``, i.e. ``<l| L = lambda <l|``.
Null spaces are found from singular values rather than eigenvalues because
the rank decision is better conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import NumericalError, UnphysicalSpectrumError
from .operators import hermitize, unvectorize, vectorize

STEADY = "steady"
OSCILLATING = "oscillating_coherence"
DECAYING = "decaying"

NULL_RTOL = 1e-10
PINV_RCOND = 1e-12
CLUSTER_RTOL = 1e-9
CLASSIFY_RTOL = 1e-8


class DegenerateNullSpace(NumericalError):
    def __init__(self, dim: int):
        super().__init__(f"Liouvillian null space has dimension {dim}")
        self.dim = dim


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with paired, unit-norm right (columns) and left eigenvectors."""

    eigenvalues: np.ndarray
    right_vecs: np.ndarray
    left_vecs: np.ndarray
    overlaps: np.ndarray
    norm: float
    tags: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def beta(self) -> np.ndarray:
        return self.eigenvalues.imag

    def count(self, tag: str) -> int:
        if self.tags is None:
            raise ValueError("spectrum has not been classified")
        return sum(t == tag for t in self.tags)


def _sort_order(w: np.ndarray) -> np.ndarray:
    # primary key last: -Re, then |Im|, then Im
    return np.lexsort((w.imag, np.abs(w.imag), -w.real))


def _clusters(w: np.ndarray, radius: float) -> list[list[int]]:
    """Group indices of a sorted eigenvalue array into chains closer than ``radius``."""
    n = len(w)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        close = np.nonzero(np.abs(w[i + 1 :] - w[i]) <= radius)[0]
        for j in close + i + 1:
            parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values()]


def _pair_cluster(vl: np.ndarray, vr: np.ndarray) -> np.ndarray:
    """Left vectors for one cluster, matched to ``vr`` and made biorthogonal."""
    overlap = vl.conj().T @ vr
    rows, cols = linear_sum_assignment(-np.abs(overlap))
    perm = np.empty(len(cols), dtype=int)
    perm[cols] = rows
    vl = vl[:, perm]
    m = vl.conj().T @ vr
    if np.linalg.cond(m) > 1e12:
        raise NumericalError("left and right eigenvectors are not biorthogonalizable (defective Liouvillian?)")
    return vl @ np.linalg.inv(m).conj().T


def eig_left_right(lmat) -> SpectralData:
    """Full left/right eigendecomposition, deterministically ordered."""
    lmat = np.asarray(lmat, dtype=complex)
    if not np.all(np.isfinite(lmat)):
        raise ValueError("superoperator has non-finite entries")
    try:
        w, vl, vr = scipy.linalg.eig(lmat, left=True, right=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    order = _sort_order(w)
    w, vl, vr = w[order], vl[:, order], vr[:, order]

    spread = max(np.ptp(w.real), np.ptp(w.imag)) if len(w) else 0.0
    radius = CLUSTER_RTOL * spread if spread > 0 else np.inf
    for group in _clusters(w, radius):
        if len(group) > 1:
            vl[:, group] = _pair_cluster(vl[:, group], vr[:, group])

    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    overlaps = np.einsum("ij,ij->j", vl.conj(), vr)
    return SpectralData(w, vr, vl, overlaps, float(np.linalg.norm(lmat, 2)))


def residuals(lmat, spec: SpectralData) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode right and left eigen-equation residual norms."""
    lmat = np.asarray(lmat)
    w = spec.eigenvalues
    right = np.linalg.norm(lmat @ spec.right_vecs - spec.right_vecs * w, axis=0)
    left = np.linalg.norm(lmat.conj().T @ spec.left_vecs - spec.left_vecs * w.conj(), axis=0)
    return right, left


def classify(spec: SpectralData, tol_real: float | None = None, tol_imag: float | None = None,
             strict: bool = True) -> SpectralData:
    """Tag each mode as steady, oscillating coherence or decaying.

    Default tolerances are ``1e-8 * ||L||``.  With ``strict`` a real part
    above ``tol_real`` raises UnphysicalSpectrumError.
    """
    scale = spec.norm if spec.norm > 0 else 1.0
    tol_real = CLASSIFY_RTOL * scale if tol_real is None else tol_real
    tol_imag = CLASSIFY_RTOL * scale if tol_imag is None else tol_imag
    a, b = spec.alpha, spec.beta
    if strict and np.any(a > tol_real):
        raise UnphysicalSpectrumError(f"eigenvalue with real part {a.max():.3g} > {tol_real:.3g}")
    tags = []
    for ai, bi in zip(a, b):
        if abs(ai) <= tol_real:
            tags.append(STEADY if abs(bi) <= tol_imag else OSCILLATING)
        else:
            tags.append(DECAYING)
    return replace(spec, tags=tuple(tags))


def conjugate_symmetry_error(eigenvalues) -> float:
    """Largest distance from any eigenvalue's conjugate to the spectrum."""
    w = np.asarray(eigenvalues)
    if w.size == 0:
        return 0.0
    dist = np.abs(w.conj()[:, None] - w[None, :])
    return float(np.max(np.min(dist, axis=1)))


def spectral_gap(spec: SpectralData) -> float:
    """Slowest decay rate among non-stationary modes (``inf`` if none)."""
    if spec.tags is None:
        spec = classify(spec, strict=False)
    rates = [-a for a, t in zip(spec.alpha, spec.tags) if t == DECAYING]
    return float(min(rates)) if rates else float("inf")


def null_space(lmat, rtol: float = NULL_RTOL) -> np.ndarray:
    """Orthonormal null-space basis (columns) from the SVD."""
    lmat = np.asarray(lmat, dtype=complex)
    _, s, vh = np.linalg.svd(lmat)
    cutoff = rtol * (s[0] if s.size else 0.0)
    return vh[s <= cutoff].conj().T


def _hermitian_basis(null: np.ndarray) -> list[np.ndarray]:
    d = int(round(np.sqrt(null.shape[0])))
    k = null.shape[1]
    cands = []
    for v in null.T:
        m = unvectorize(v)
        cands.append(hermitize(m))
        cands.append(hermitize(-1j * m))
    stacked = np.array([np.concatenate([vectorize(c).real, vectorize(c).imag]) for c in cands])
    _, s, vh = np.linalg.svd(stacked, full_matrices=False)
    basis = []
    for row in vh[:k]:
        vec = row[: d * d] + 1j * row[d * d :]
        basis.append(hermitize(unvectorize(vec)))
    return basis


def _fix_phase(m: np.ndarray) -> np.ndarray:
    diag = np.diag(m)
    idx = int(np.argmax(np.abs(diag)))
    if abs(diag[idx]) > 0:
        m = m * (abs(diag[idx]) / diag[idx])
    return m


def steady_states(lmat, rtol: float = NULL_RTOL) -> list[np.ndarray]:
    """Density matrices spanning the null space of ``lmat``.

    A one-dimensional null space yields the unique steady state.  For larger
    null spaces the positive and negative parts of a Hermitian null basis are
    used, which for a trace-preserving generator are themselves stationary,
    and a linearly independent set of them is returned.
    """
    lmat = np.asarray(lmat, dtype=complex)
    null = null_space(lmat, rtol)
    k = null.shape[1]
    if k == 0:
        raise NumericalError("Liouvillian has no null space")
    if k == 1:
        m = _fix_phase(unvectorize(null[:, 0]))
        m = hermitize(m)
        tr = np.trace(m).real
        if abs(tr) < 1e-14:
            raise NumericalError("null vector is traceless; not a valid steady state")
        states = [m / tr]
    else:
        cands = []
        for x in _hermitian_basis(null):
            lam, u = np.linalg.eigh(x)
            for sign in (1, -1):
                part_w = np.where(sign * lam > 0, sign * lam, 0.0)
                if part_w.sum() > 1e-10:
                    part = (u * part_w) @ u.conj().T
                    cands.append(part / np.trace(part).real)
        states = []
        vecs = []
        for c in cands:
            trial = vecs + [vectorize(c)]
            s = np.linalg.svd(np.array(trial), compute_uv=False)
            if s[-1] > 1e-6 * s[0]:
                vecs = trial
                states.append(hermitize(c))
            if len(states) == k:
                break
        if len(states) < k:
            raise NumericalError(f"could only resolve {len(states)} of {k} steady states")
    scale = max(np.linalg.norm(lmat, 2), 1e-300)
    for rho in states:
        lam_min = float(np.linalg.eigvalsh(rho).min())
        if lam_min < -1e-8:
            raise NumericalError(f"steady-state candidate has eigenvalue {lam_min:.3g}")
        if np.linalg.norm(lmat @ vectorize(rho)) > 1e-9 * scale:
            raise NumericalError("steady-state candidate is not annihilated by the Liouvillian")
    return states


def unique_steady_state(lmat, rtol: float = NULL_RTOL) -> np.ndarray:
    states = steady_states(lmat, rtol)
    if len(states) != 1:
        raise DegenerateNullSpace(len(states))
    return states[0]


def pseudoinverse(m, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse; singular values below ``rcond * s_max`` are dropped."""
    m = np.asarray(m, dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0:
        return np.zeros(m.shape[::-1], dtype=complex)
    keep = s > rcond * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * s_inv) @ u.conj().T


class ShiftResult(NamedTuple):
    x_paper: np.ndarray
    x_def: np.ndarray
    agreement: float


def pseudoinverse_shift(a, b) -> ShiftResult:
    """Two routes to the correction ``X`` in ``(A + B)^+ = A^+ + X``.

    ``x_paper`` uses the closed form ``(dI - A^+ B)(A + B)^+`` with
    ``dI = I - A^+ A``; ``x_def`` is the defining difference.  The two agree
    only under range conditions, so the relative disagreement is returned
    rather than enforced.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"pseudoinverse_shift needs equal square shapes, got {a.shape}, {b.shape}")
    a_pinv = pseudoinverse(a)
    sum_pinv = pseudoinverse(a + b)
    delta = np.eye(a.shape[0]) - a_pinv @ a
    x_paper = (delta - a_pinv @ b) @ sum_pinv
    x_def = sum_pinv - a_pinv
    agreement = float(np.linalg.norm(x_paper - x_def, 2) / max(1.0, np.linalg.norm(x_def, 2)))
    return ShiftResult(x_paper, x_def, agreement)
