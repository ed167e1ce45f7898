"""Perturbative corrections in Liouville and Hilbert space.

* first-order steady-state correction ``-L0^+ L_V |rho0>`` and its split into
  a Hamiltonian part and a pseudoinverse-shift part,
* first-order Liouvillian eigenvalue shifts,
* Brillouin-Wigner corrections to the spectral decomposition of a state,
* passive states and ergotropy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConvergenceError, NotSteadyStateError, NumericalError
from .liouvillian import LindbladModel, dissipative_part, hamiltonian_superop
from .operators import as_operator, check_density_matrix, hermitize, unvectorize, vectorize
from .spectral import SpectralData, pseudoinverse, pseudoinverse_shift

STEADY_RTOL = 1e-9


@dataclass(frozen=True)
class PerturbationReport:
    """First-order steady-state correction, ``rho(eps) ~ rho0 + eps * rho1``.

    ``rho1_raw`` is ``-unvec(L0^+ L_V vec(rho0))`` as computed; ``rho1``
    additionally removes any component along ``rho0`` so it is traceless
    (``null_component`` records what was removed).  ``split_h`` and
    ``split_x`` are the Hamiltonian-pseudoinverse and shift parts whose sum
    should reproduce ``rho1_raw`` up to ``split_discrepancy``.
    """

    rho0: np.ndarray
    rho1: np.ndarray
    rho1_raw: np.ndarray
    null_component: complex
    epsilon: float
    split_h: np.ndarray | None = None
    split_x: np.ndarray | None = None
    shift_agreement: float | None = None
    split_discrepancy: float | None = None

    def state(self, epsilon: float | None = None) -> np.ndarray:
        eps = self.epsilon if epsilon is None else epsilon
        return self.rho0 + eps * self.rho1


def _require_steady(l0: np.ndarray, rho0: np.ndarray) -> None:
    scale = np.linalg.norm(l0, 2)
    res = np.linalg.norm(l0 @ vectorize(rho0))
    if res > STEADY_RTOL * max(scale, 1e-300):
        raise NotSteadyStateError(f"rho0 is not stationary under L0 (residual {res:.3g})")


def first_order_steady_correction(l0, lv, rho0, epsilon: float = 0.0,
                                  l0_pinv: np.ndarray | None = None) -> PerturbationReport:
    l0 = np.asarray(l0, dtype=complex)
    lv = np.asarray(lv, dtype=complex)
    rho0 = check_density_matrix(rho0, "rho0")
    _require_steady(l0, rho0)
    pinv = pseudoinverse(l0) if l0_pinv is None else l0_pinv
    raw = -unvectorize(pinv @ (lv @ vectorize(rho0)))
    # L0 rho1 = -L_V rho0 fixes rho1 up to multiples of rho0; pick the traceless one
    null_component = complex(np.trace(raw))
    rho1 = hermitize(raw - null_component * rho0)
    return PerturbationReport(rho0, rho1, raw, null_component, float(epsilon))


def split_correction(model: LindbladModel, rho0) -> PerturbationReport:
    """First-order correction with its ``L_H0^+`` and ``X_(H0, D)`` parts."""
    l_h0 = hamiltonian_superop(model.h0)
    l_d = dissipative_part(model)
    lv = hamiltonian_superop(model.v)
    shift = pseudoinverse_shift(l_h0, l_d)
    l0 = l_h0 + l_d
    report = first_order_steady_correction(l0, lv, rho0, model.epsilon)
    source = lv @ vectorize(report.rho0)
    split_h = -unvectorize(pseudoinverse(l_h0) @ source)
    split_x = -unvectorize(shift.x_paper @ source)
    discrepancy = float(np.linalg.norm(split_h + split_x - report.rho1_raw))
    return PerturbationReport(
        report.rho0, report.rho1, report.rho1_raw, report.null_component, report.epsilon,
        split_h, split_x, shift.agreement, discrepancy,
    )


def first_order_eigenvalue(spec: SpectralData, lv, mu: int,
                           variant: Literal["paper", "standard"] = "standard") -> complex:
    """First-order shift of eigenvalue ``mu`` of L0 under ``L0 + eps*L_V``.

    ``standard`` is ``<l_mu|L_V|r_mu> / <l_mu|r_mu>``.  ``paper`` sums the
    bra over every left eigenvector in numerator and denominator.
    """
    lv = np.asarray(lv, dtype=complex)
    r = spec.right_vecs[:, mu]
    if variant == "standard":
        bra = spec.left_vecs[:, mu].conj()
    elif variant == "paper":
        bra = spec.left_vecs.conj().sum(axis=1)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    den = bra @ r
    if abs(den) <= 1e-12:
        raise NumericalError(f"vanishing denominator {abs(den):.3g} for mode {mu}")
    return complex((bra @ (lv @ r)) / den)


# --- Brillouin-Wigner corrections -------------------------------------------

@dataclass(frozen=True)
class BwptReport:
    """Brillouin-Wigner expansion of ``rho0 + eps*V`` around the eigenbasis of ``rho0``.

    ``basis`` columns are the zeroth-order eigenvectors (rotated inside
    degenerate clusters to diagonalize V there); ``p`` holds the
    self-consistent eigenvalues used in the denominators.
    """

    rho0: np.ndarray
    v: np.ndarray
    epsilon: float
    order: int
    basis: np.ndarray
    p0: np.ndarray
    p_corrections: tuple[np.ndarray, ...]
    vec_corrections: tuple[np.ndarray, ...]
    p: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    iterations: int
    rho_expansion: tuple[np.ndarray, ...]

    def eigenvalues(self, order: int | None = None) -> np.ndarray:
        order = self.order if order is None else order
        out = self.p0.copy()
        for k in range(min(order, self.order)):
            out = out + self.epsilon ** (k + 1) * self.p_corrections[k]
        return out

    def eigenvectors(self, order: int | None = None) -> np.ndarray:
        """Truncated, normalized eigenvectors (columns)."""
        order = self.order if order is None else order
        vecs = self.basis.copy()
        for k in range(min(order, self.order)):
            vecs = vecs + self.epsilon ** (k + 1) * self.vec_corrections[k]
        return vecs / np.linalg.norm(vecs, axis=0)

    def reconstruct(self, order: int | None = None) -> np.ndarray:
        order = self.order if order is None else order
        if order == 0:
            return self.rho0.copy()
        vecs = self.eigenvectors(order)
        p = self.eigenvalues(order)
        return hermitize((vecs * p) @ vecs.conj().T)


def _cluster_values(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(values)
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(values[idx] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def bwpt_corrections(rho0, v, epsilon: float, order: int = 2, degeneracy_tol: float = 1e-10,
                     max_iter: int = 100, tol: float = 1e-12) -> BwptReport:
    """Brillouin-Wigner corrections for the spectral decomposition of ``rho0 + eps*V``.

    The perturbed eigenvalues appear in their own denominators; they are
    found by fixed-point iteration seeded at the unperturbed values.  Terms
    coupling members of one degenerate cluster are omitted after V has been
    diagonalized inside that cluster.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    rho0 = check_density_matrix(rho0, "rho0")
    v = as_operator(v, "V")
    if v.shape != rho0.shape:
        raise ValueError("V and rho0 differ in shape")
    v = hermitize(v)
    p0, basis = np.linalg.eigh(rho0)
    p0 = p0[::-1].copy()
    basis = basis[:, ::-1].copy()
    clusters = _cluster_values(p0, degeneracy_tol)
    for group in clusters:
        if len(group) > 1:
            block = basis[:, group]
            vb = block.conj().T @ v @ block
            _, w = np.linalg.eigh(vb)
            basis[:, group] = block @ w
            p0[group] = p0[group].mean()
    cluster_of = np.empty(len(p0), dtype=int)
    for c, group in enumerate(clusters):
        cluster_of[group] = c

    vm = basis.conj().T @ v @ basis
    p1 = np.real(np.diag(vm)).copy()
    outside = cluster_of[:, None] != cluster_of[None, :]

    def denominators(p):
        den = p[:, None] - p0[None, :]  # den[n, m] = p_n - p0_m
        bad = outside & (np.abs(den) < degeneracy_tol)
        if np.any(bad):
            raise NumericalError("near-zero Brillouin-Wigner denominator outside a degenerate cluster")
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(outside, 1.0 / den, 0.0)
        return inv

    p = p0 + epsilon * p1
    iterations = 0
    if order == 2:
        for iterations in range(1, max_iter + 1):
            inv = denominators(p)
            p2 = np.real(np.einsum("nm,mn,nm->n", vm, vm, inv))
            p_new = p0 + epsilon * p1 + epsilon**2 * p2
            if np.max(np.abs(p_new - p)) <= tol:
                p = p_new
                break
            p = p_new
        else:
            raise ConvergenceError(f"Brillouin-Wigner fixed point did not converge in {max_iter} iterations")
    inv = denominators(p)

    # coefficient matrices in the unperturbed basis; column n belongs to |lambda_n>
    c1 = (vm * inv.T)  # c1[m, n] = V_mn / (p_n - p0_m), m outside n's cluster
    corrections_p = [p1]
    corrections_v = [basis @ c1]
    if order == 2:
        p2 = np.real(np.einsum("nm,mn,nm->n", vm, vm, inv))
        corrections_p.append(p2)
        c2 = (inv.T) * (vm @ c1)  # c2[j, n] = sum_m V_jm c1[m, n] / (p_n - p0_j)
        corrections_v.append(basis @ c2)

    rho1_terms = basis @ np.diag(p1) @ basis.conj().T
    first = corrections_v[0]
    rho1_terms = rho1_terms + (first * p0) @ basis.conj().T + (basis * p0) @ first.conj().T
    expansion = (rho0.copy(), hermitize(rho1_terms))

    return BwptReport(
        rho0=rho0, v=v, epsilon=float(epsilon), order=order, basis=basis, p0=p0,
        p_corrections=tuple(corrections_p), vec_corrections=tuple(corrections_v), p=p,
        clusters=tuple(tuple(g) for g in clusters), iterations=iterations,
        rho_expansion=expansion,
    )


# --- ergotropy ----------------------------------------------------------------

def passive_state(rho, h) -> tuple[np.ndarray, float]:
    """Passive state of ``rho`` for Hamiltonian ``h`` and the ergotropy.

    The passive state puts the populations in decreasing order on the
    energy levels in increasing order.
    """
    rho = check_density_matrix(rho, "rho")
    h = as_operator(h, "H")
    r_vals = np.linalg.eigvalsh(hermitize(rho))[::-1]
    e_vals, e_vecs = np.linalg.eigh(hermitize(h))
    passive = (e_vecs * r_vals) @ e_vecs.conj().T
    energy = float(np.real(np.trace(rho @ h)))
    passive_energy = float(np.dot(r_vals, e_vals))
    return hermitize(passive), max(energy - passive_energy, 0.0)
