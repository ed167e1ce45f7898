"""Superoperator assembly for Lindblad generators and time propagation.

All superoperators act on column-stacked density matrices, so
``unvectorize(L @ vectorize(rho))`` is the generator applied to ``rho``.
Units: hbar = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError
from .operators import (
    as_operator,
    check_density_matrix,
    hermiticity_error,
    hermitize,
    unvectorize,
    vectorize,
)

RENORM_TOL = 1e-8
EIGEN_COND_LIMIT = 1e8


@dataclass(frozen=True)
class DissipationChannel:
    """A jump operator with its rate, contributing ``rate * D[op]``."""

    rate: float
    op: np.ndarray
    label: str = ""

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"channel rate must be non-negative, got {self.rate}")
        object.__setattr__(self, "op", as_operator(self.op, "collapse operator"))


@dataclass(frozen=True)
class LindbladModel:
    """``H0 + epsilon * V`` with a list of dissipation channels."""

    h0: np.ndarray
    v: np.ndarray
    epsilon: float = 0.0
    channels: Sequence[DissipationChannel] = field(default_factory=tuple)
    basis_labels: Sequence[str] | None = None

    def __post_init__(self):
        h0 = as_operator(self.h0, "H0")
        v = as_operator(self.v, "V")
        if h0.shape != v.shape:
            raise DimensionError(f"H0 {h0.shape} and V {v.shape} differ in shape")
        for name, m in (("H0", h0), ("V", v)):
            if hermiticity_error(m) > 1e-10:
                raise ValueError(f"{name} is not Hermitian")
        for ch in self.channels:
            if ch.op.shape != h0.shape:
                raise DimensionError(
                    f"channel {ch.label or '?'} has shape {ch.op.shape}, model is {h0.shape}"
                )
        if self.basis_labels is not None and len(self.basis_labels) != h0.shape[0]:
            raise DimensionError("basis_labels length does not match dimension")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h0 + self.epsilon * self.v

    def with_epsilon(self, epsilon: float) -> "LindbladModel":
        return replace(self, epsilon=float(epsilon))


def hamiltonian_superop(h) -> np.ndarray:
    """Superoperator of ``rho -> -i[H, rho]``."""
    h = as_operator(h, "H")
    if hermiticity_error(h) > 1e-10:
        warnings.warn("hamiltonian_superop called with a non-Hermitian operator", stacklevel=2)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superop(channel: DissipationChannel) -> np.ndarray:
    """Superoperator of ``rate * (O rho O^+ - {O^+ O, rho}/2)``."""
    o = channel.op
    eye = np.eye(o.shape[0])
    odo = o.conj().T @ o
    return channel.rate * (
        np.kron(o.conj(), o) - 0.5 * np.kron(eye, odo) - 0.5 * np.kron(odo.T, eye)
    )


def dissipative_part(model: LindbladModel) -> np.ndarray:
    d = model.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for ch in model.channels:
        out += dissipator_superop(ch)
    return out


def assemble(model: LindbladModel, include_v: bool = True) -> np.ndarray:
    """``L0 = L_H0 + L_D``, plus ``epsilon * L_V`` when ``include_v``."""
    lmat = hamiltonian_superop(model.h0) + dissipative_part(model)
    if include_v and model.epsilon != 0.0:
        lmat = lmat + model.epsilon * hamiltonian_superop(model.v)
    return lmat


def trace_leak(lmat: np.ndarray) -> float:
    """``||vec(I)^+ L||``; zero for trace-preserving generators."""
    d = int(round(np.sqrt(lmat.shape[0])))
    return float(np.linalg.norm(vectorize(np.eye(d)).conj() @ lmat))


def _exp_action(lmat: np.ndarray, v0: np.ndarray, t: float) -> np.ndarray:
    w, vr = np.linalg.eig(lmat)
    if np.linalg.cond(vr) < EIGEN_COND_LIMIT:
        coeffs = np.linalg.solve(vr, v0)
        return vr @ (np.exp(w * t) * coeffs)
    return scipy.linalg.expm(lmat * t) @ v0


def propagate(lmat: np.ndarray, rho0, t: float) -> np.ndarray:
    """``unvectorize(exp(L t) vec(rho0))``, hermitized and trace-normalized.

    Raises NumericalError when the required correction exceeds 1e-8, which
    signals a generator that does not preserve trace or Hermiticity.
    """
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    rho0 = check_density_matrix(rho0, "rho0")
    lmat = np.asarray(lmat, dtype=complex)
    if lmat.shape != (rho0.size, rho0.size):
        raise DimensionError(f"superoperator {lmat.shape} incompatible with rho0 {rho0.shape}")
    if t == 0:
        return rho0.copy()
    rho = unvectorize(_exp_action(lmat, vectorize(rho0), t))
    herm = hermitize(rho)
    tr = np.trace(herm)
    correction = max(abs(tr - 1.0), float(np.max(np.abs(rho - herm))))
    if correction > RENORM_TOL:
        raise NumericalError(
            f"propagated state needed a correction of {correction:.3g}; "
            "the superoperator is not a valid Liouvillian"
        )
    return herm / tr.real
