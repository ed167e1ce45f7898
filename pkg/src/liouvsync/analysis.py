"""Synchronisation measures, structural checks and machine thermodynamics."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NotSteadyStateError
from .liouvillian import LindbladModel, assemble, dissipator_superop
from .models import ModelPreset, ThermalMachineParams, build_coupled_machines
from .operators import (
    as_operator,
    commutator,
    dephase,
    in_basis,
    spectral_norm,
    unvectorize,
    vectorize,
    von_neumann_entropy,
)
from .spectral import steady_states

DEGENERACY_RTOL = 1e-9
ENERGY_CONSERVATION_RTOL = 1e-10
LIMIT_CYCLE_TOL = 1e-10


# --- coherence measures -------------------------------------------------------

def relative_entropy_coherence(rho, basis=None) -> float:
    """``S(dephased rho) - S(rho)`` in nats; tiny negatives are clamped to 0."""
    value = von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho)
    return 0.0 if value < 1e-12 else float(value)


def l1_coherence(rho, basis=None) -> float:
    m = in_basis(rho, basis)
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


def energy_basis(h0) -> np.ndarray:
    """Eigenbasis of ``h0`` as columns; the identity when ``h0`` is already diagonal."""
    h0 = as_operator(h0, "H0")
    off = h0 - np.diag(np.diag(h0))
    if np.max(np.abs(off), initial=0.0) <= 1e-12:
        return np.eye(h0.shape[0], dtype=complex)
    return np.linalg.eigh(0.5 * (h0 + h0.conj().T))[1].astype(complex)


@dataclass(frozen=True)
class SyncReport:
    s_coh: float
    l1_coh: float
    limit_cycle_valid: bool | None
    basis_note: str


def sync_report(rho, basis=None, limit_cycle_valid: bool | None = None) -> SyncReport:
    note = "computational basis" if basis is None else "supplied basis"
    return SyncReport(relative_entropy_coherence(rho, basis), l1_coherence(rho, basis),
                      limit_cycle_valid, note)


def limit_cycle_check(model: LindbladModel) -> bool:
    """True when every steady state of the unperturbed generator is incoherent in the H0 basis."""
    basis = energy_basis(model.h0)
    l0 = assemble(model, include_v=False)
    return all(l1_coherence(rho, basis) <= LIMIT_CYCLE_TOL for rho in steady_states(l0))


# --- structure of H0 and V ----------------------------------------------------

class Prediction(str, Enum):
    NO_PHASE_SYNC = "no_phase_sync_possible"
    SYNC_ENERGY_CONSERVING = "sync_possible_energy_conserving"
    SYNC_ENERGY_NONCONSERVING = "sync_possible_energy_nonconserving"


@dataclass(frozen=True)
class StructureReport:
    commutator_norm: float
    energy_conserving: bool
    degeneracy_clusters: tuple[tuple[float, int], ...]
    v_block_confined: bool
    prediction: Prediction

    @property
    def degenerate(self) -> bool:
        return any(mult > 1 for _, mult in self.degeneracy_clusters)


def _energy_clusters(energies: np.ndarray, radius: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for idx in np.argsort(energies):
        if groups and energies[idx] - energies[groups[-1][-1]] <= radius:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def structure_analysis(h0, v, tol: float = DEGENERACY_RTOL,
                       ec_tol: float = ENERGY_CONSERVATION_RTOL) -> StructureReport:
    """Degeneracies of H0, energy conservation of V and where V acts.

    Eigenvalues closer than ``tol * (E_max - E_min)`` are one cluster; V is
    energy conserving when ``||[H0, V]|| <= ec_tol * ||H0|| * ||V||``.
    """
    h0 = as_operator(h0, "H0")
    v = as_operator(v, "V")
    energies, vecs = np.linalg.eigh(0.5 * (h0 + h0.conj().T))
    spread = energies[-1] - energies[0]
    clusters = _energy_clusters(energies, tol * spread)

    comm = spectral_norm(commutator(h0, v))
    conserving = comm <= ec_tol * spectral_norm(h0) * spectral_norm(v)

    v_e = vecs.conj().T @ v @ vecs
    scale = max(spectral_norm(v), 1e-300)
    confined = True
    for a, ga in enumerate(clusters):
        for b, gb in enumerate(clusters):
            if a != b and np.max(np.abs(v_e[np.ix_(ga, gb)])) > 1e-10 * scale:
                confined = False

    summary = tuple((float(np.mean(energies[g])), len(g)) for g in clusters)
    if not conserving:
        pred = Prediction.SYNC_ENERGY_NONCONSERVING
    elif all(m == 1 for _, m in summary):
        pred = Prediction.NO_PHASE_SYNC
    else:
        pred = Prediction.SYNC_ENERGY_CONSERVING
    return StructureReport(comm, bool(conserving), summary, confined, pred)


def check_strong_symmetry(s, model: LindbladModel, tol: float = 1e-10) -> bool:
    """True when unitary ``s`` commutes with the full Hamiltonian and every jump operator."""
    s = as_operator(s, "S")
    if np.max(np.abs(s.conj().T @ s - np.eye(s.shape[0]))) > 1e-10:
        raise ValueError("symmetry candidate is not unitary")
    if spectral_norm(commutator(s, model.hamiltonian)) > tol:
        return False
    return all(spectral_norm(commutator(s, ch.op)) <= tol for ch in model.channels)


# --- thermodynamics -----------------------------------------------------------

@dataclass(frozen=True)
class ThermoReport:
    """Power and heat currents (energy per time, positive into the system)."""

    power: float
    j_hot: float
    j_cold: float
    first_law_residual: float
    power_closed_form: float
    currents_closed_form: tuple[float, float]

    @property
    def closed_form_discrepancy(self) -> tuple[float, float, float]:
        jh, jc = self.currents_closed_form
        return (self.power_closed_form - self.power, jh - self.j_hot, jc - self.j_cold)


def _bath_current(preset: ModelPreset, rho: np.ndarray, group: str) -> float:
    h0 = preset.model.h0
    vr = vectorize(rho)
    total = 0.0
    for ch in preset.channels_in(group):
        total += np.real(np.trace(unvectorize(dissipator_superop(ch) @ vr) @ h0))
    return float(total)


def closed_form_thermo(rho, p: ThermalMachineParams) -> tuple[float, float, float]:
    """Power and heat currents from the printed two-machine expressions (one-based indices)."""
    r = lambda i, j: rho[i - 1, j - 1]  # noqa: E731
    pop = lambda *idx: float(sum(np.real(r(i, i)) for i in idx))  # noqa: E731
    power = 2 * p.epsilon * p.delta * float(np.imag(r(3, 5) + r(7, 5)))
    j_hot = (p.gamma_h_a * (1 + p.omega) * (p.nbar_h_a * pop(7, 8, 9) - (1 + p.nbar_h_a) * pop(1, 2, 3))
             + p.gamma_h_b * (1 + p.omega) * (p.nbar_h_b * pop(3, 6, 9) - (1 + p.nbar_h_b) * pop(1, 4, 7)))
    j_cold = (p.gamma_c_a * (p.nbar_c_a * pop(7, 8, 9) - (1 + p.nbar_c_a) * pop(4, 5, 6))
              + (p.omega + p.delta) * p.gamma_c_b
              * (p.nbar_c_b * pop(3, 6, 9) - (1 + p.nbar_c_b) * pop(2, 5, 8)))
    return power, j_hot, j_cold


def thermo_report(rho_ss, machine: ThermalMachineParams | ModelPreset,
                  check_steady: bool = True) -> ThermoReport:
    """Power ``-i Tr([H, rho] H0)`` and bath currents ``Tr(D[rho] H0)`` at a steady state."""
    preset = machine if isinstance(machine, ModelPreset) else build_coupled_machines(machine)
    if not isinstance(preset.params, ThermalMachineParams):
        raise TypeError("thermo_report needs the coupled_machines preset")
    rho = as_operator(rho_ss, "rho_ss")
    model = preset.model
    if check_steady:
        lmat = assemble(model)
        res = np.linalg.norm(lmat @ vectorize(rho))
        if res > 1e-9 * np.linalg.norm(lmat, 2):
            raise NotSteadyStateError(f"state is not stationary (residual {res:.3g})")
    h = model.hamiltonian
    power = float(np.real(-1j * np.trace(commutator(h, rho) @ model.h0)))
    j_hot = _bath_current(preset, rho, "hot")
    j_cold = _bath_current(preset, rho, "cold")
    p_cf, jh_cf, jc_cf = closed_form_thermo(rho, preset.params)
    return ThermoReport(power, j_hot, j_cold, power + j_hot + j_cold, p_cf, (jh_cf, jc_cf))
