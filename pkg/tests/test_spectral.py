import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvsync.errors import NumericalError, UnphysicalSpectrumError
from liouvsync.liouvillian import DissipationChannel, LindbladModel, assemble, hamiltonian_superop, propagate
from liouvsync.models import build_coupled_machines, thermal_pair
from liouvsync.operators import basis_op, trace_distance, unvectorize, vectorize
from liouvsync.spectral import (
    DECAYING,
    OSCILLATING,
    STEADY,
    DegenerateNullSpace,
    classify,
    conjugate_symmetry_error,
    eig_left_right,
    null_space,
    pseudoinverse,
    pseudoinverse_shift,
    residuals,
    spectral_gap,
    steady_states,
    unique_steady_state,
)

from conftest import random_matrix

seeds = st.integers(0, 2**32 - 1)


def decaying_qubit(omega=1.0, gamma=0.2):
    h = 0.5 * omega * np.diag([1.0, -1.0])
    # |0> is the excited level here, so decay is |1><0|
    return LindbladModel(h, np.zeros((2, 2)), 0.0, [DissipationChannel(gamma, basis_op(1, 0, 2))])


def collective_qutrits(gamma=0.1, nbar=0.5):
    """Two identical, uncoupled qutrits sharing one thermal bath on 0<->1 and 1<->2."""
    eye = np.eye(3)
    h_site = np.diag([0.0, 1.0, 2.0])
    h0 = np.kron(h_site, eye) + np.kron(eye, h_site)
    chans = []
    for lo, hi in ((0, 1), (1, 2)):
        lower = basis_op(lo, hi, 3)
        collective = np.kron(lower, eye) + np.kron(eye, lower)
        chans += thermal_pair(collective, gamma, nbar, f"bath_{lo}{hi}")
    return LindbladModel(h0, np.zeros((9, 9)), 0.0, chans)


def test_diagonal_superoperator():
    c = np.array([0.0, -1.0, -2.0 + 1j, -2.0 - 1j])
    spec = eig_left_right(np.diag(c))
    assert np.allclose(np.sort_complex(spec.eigenvalues), np.sort_complex(c))
    assert np.allclose(np.abs(spec.right_vecs), np.abs(spec.right_vecs).round())


def test_decaying_qubit_spectrum_and_tags():
    spec = classify(eig_left_right(assemble(decaying_qubit(1.0, 0.2))))
    expected = np.array([0.0, -0.1 - 1j, -0.1 + 1j, -0.2])
    assert np.allclose(np.sort_complex(spec.eigenvalues), np.sort_complex(expected), atol=1e-12)
    assert spec.count(STEADY) == 1
    assert spec.count(DECAYING) == 3


def test_sorting_is_descending_real_part():
    spec = eig_left_right(assemble(decaying_qubit()))
    assert np.all(np.diff(spec.alpha) <= 1e-12)
    assert abs(spec.eigenvalues[0]) < 1e-12


def test_machine_residuals_and_tags():
    lmat = assemble(build_coupled_machines(epsilon=0.01, delta=0.02).model)
    spec = classify(eig_left_right(lmat))
    right, left = residuals(lmat, spec)
    assert right.max() <= 1e-9 * spec.norm
    assert left.max() <= 1e-9 * spec.norm
    assert spec.count(STEADY) == 1
    assert spec.count(OSCILLATING) == 0


def test_biorthogonal_pairing_in_degenerate_clusters():
    lmat = assemble(build_coupled_machines(epsilon=0.0, delta=0.0).model)
    spec = eig_left_right(lmat)
    gram = spec.left_vecs.conj().T @ spec.right_vecs
    # within clusters the pairing is biorthogonal; off-cluster overlaps vanish anyway
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() < 1e-6
    assert np.all(np.abs(spec.overlaps) > 1e-8)


def test_oscillating_coherence_tag():
    # isolated qubit: undamped coherences
    m = LindbladModel(np.diag([0.0, 1.0]), np.zeros((2, 2)))
    spec = classify(eig_left_right(assemble(m)))
    assert spec.count(OSCILLATING) == 2
    assert spec.count(STEADY) == 2


def test_classify_flags_unphysical_spectrum():
    spec = eig_left_right(np.diag([0.5, -1.0]))
    with pytest.raises(UnphysicalSpectrumError):
        classify(spec)
    assert classify(spec, strict=False).tags[0] == DECAYING


def test_strong_symmetry_model_has_degenerate_null_space():
    lmat = assemble(collective_qutrits())
    assert null_space(lmat).shape[1] >= 2
    spec = classify(eig_left_right(lmat))
    assert spec.count(STEADY) >= 2
    states = steady_states(lmat)
    assert len(states) >= 2
    with pytest.raises(DegenerateNullSpace):
        unique_steady_state(lmat)
    scale = np.linalg.norm(lmat, 2)
    for rho in states:
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-8
        assert np.linalg.norm(lmat @ vectorize(rho)) <= 1e-9 * scale


def test_thermal_qubit_detailed_balance():
    gamma, nbar = 0.3, 0.7
    m = LindbladModel(np.diag([0.0, 1.0]), np.zeros((2, 2)), 0.0,
                      thermal_pair(basis_op(0, 1, 2), gamma, nbar, "bath"))
    rho = unique_steady_state(assemble(m))
    assert rho[0, 0].real == pytest.approx((1 + nbar) / (1 + 2 * nbar), abs=1e-12)
    assert rho[1, 1].real == pytest.approx(nbar / (1 + 2 * nbar), abs=1e-12)


def test_uncoupled_machines_steady_state_is_diagonal():
    rho = unique_steady_state(assemble(build_coupled_machines(epsilon=0.0).model))
    assert np.abs(rho - np.diag(np.diag(rho))).max() <= 1e-10


def test_coupled_machines_steady_state_has_coherences():
    lmat = assemble(build_coupled_machines(epsilon=0.01, delta=0.02).model)
    rho = unique_steady_state(lmat)
    # dense oracle: solve L x = 0 with the trace constraint replacing one row
    a = lmat.copy()
    b = np.zeros(81, dtype=complex)
    a[0] = vectorize(np.eye(9)).conj()
    b[0] = 1.0
    oracle = unvectorize(np.linalg.solve(a, b))
    assert np.allclose(rho, oracle, atol=1e-10)
    assert np.abs(rho - np.diag(np.diag(rho))).max() > 1e-4


def test_steady_state_matches_long_time_propagation():
    lmat = assemble(build_coupled_machines(epsilon=0.02, delta=-0.01).model)
    rho_ss = unique_steady_state(lmat)
    rho_t = propagate(lmat, np.eye(9) / 9, 1e5)
    assert trace_distance(rho_ss, rho_t) <= 1e-6


def test_steady_states_rejects_generator_without_null_space():
    with pytest.raises(NumericalError):
        steady_states(-np.eye(4))


def test_pseudoinverse_examples(rng):
    assert np.allclose(pseudoinverse(np.diag([2, 0, -1j])), np.diag([0.5, 0, 1j]))
    m = random_matrix(rng, 5)
    assert np.allclose(pseudoinverse(m), np.linalg.inv(m), rtol=1e-10, atol=1e-12)


@given(seeds, st.integers(2, 6), st.integers(1, 6))
def test_penrose_conditions(seed, n, rank):
    rng = np.random.default_rng(seed)
    rank = min(rank, n)
    m = random_matrix(rng, n)[:, :rank] @ random_matrix(rng, n)[:rank, :]
    p = pseudoinverse(m)
    scale = np.linalg.norm(m, 2)
    pscale = np.linalg.norm(p, 2)
    assert np.linalg.norm(m @ p @ m - m) <= 1e-9 * scale
    assert np.linalg.norm(p @ m @ p - p) <= 1e-9 * pscale
    assert np.linalg.norm((m @ p).conj().T - m @ p) <= 1e-9
    assert np.linalg.norm((p @ m).conj().T - p @ m) <= 1e-9
    assert np.linalg.norm(pseudoinverse(p) - m) <= 1e-9 * scale


def test_pseudoinverse_shift_examples(rng):
    a = random_matrix(rng, 4)
    zero = pseudoinverse_shift(a, np.zeros((4, 4)))
    assert np.abs(zero.x_def).max() < 1e-12
    assert np.abs(zero.x_paper).max() < 1e-12
    b = random_matrix(rng, 4)
    res = pseudoinverse_shift(a, b)
    assert np.allclose(res.x_def, np.linalg.inv(a + b) - np.linalg.inv(a), atol=1e-10)
    assert res.agreement >= 0


def test_pseudoinverse_shift_on_machine_split():
    m = build_coupled_machines(epsilon=0.01, delta=0.02).model
    from liouvsync.liouvillian import dissipative_part

    res = pseudoinverse_shift(hamiltonian_superop(m.h0), dissipative_part(m))
    assert np.isfinite(res.agreement)


@given(seeds, st.integers(2, 4))
def test_spectrum_conjugate_symmetric(seed, d):
    rng = np.random.default_rng(seed)
    h = random_matrix(rng, d)
    h = h + h.conj().T
    chans = [DissipationChannel(float(rng.uniform(0.05, 1)), random_matrix(rng, d)) for _ in range(2)]
    lmat = assemble(LindbladModel(h, np.zeros((d, d)), 0.0, chans))
    spec = classify(eig_left_right(lmat))
    assert conjugate_symmetry_error(spec.eigenvalues) <= 1e-8 * spec.norm
    assert spec.alpha.max() <= 1e-10 * spec.norm
    assert spectral_gap(spec) > 0


def test_eigenvalues_sorted_deterministically():
    lmat = assemble(build_coupled_machines(epsilon=0.01, delta=0.02).model)
    a = eig_left_right(lmat).eigenvalues
    b = eig_left_right(lmat.copy()).eigenvalues
    assert np.array_equal(a, b)
