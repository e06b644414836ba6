"""Truncated Fock-space operators, beam splitter and eigen-solver."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from cvtb.errors import DegenerateStateError, InvalidCutoffError, ShapeError
from cvtb.fock import (
    FockCutoff,
    SingleModeState,
    TwoModeDensity,
    annihilation,
    apply_beam_splitter,
    basis_index,
    beam_splitter_unitary,
    coherent_amplitudes,
    conjugate_beam_splitter,
    creation,
    displacement,
    hermitian_eigenvalues,
    identity,
    normalize,
    number,
    squeeze,
    squeezed_vacuum_amplitudes,
    tensor,
)


def ket(n, m, n_max):
    v = np.zeros(n_max * n_max, dtype=complex)
    v[basis_index(n, m, n_max)] = 1.0
    return v


def test_annihilation_small_cutoffs():
    np.testing.assert_array_equal(annihilation(2).matrix, [[0, 1], [0, 0]])
    a3 = annihilation(3).matrix
    assert a3[1, 2] == pytest.approx(math.sqrt(2))
    assert a3[0, 1] == 1.0


@pytest.mark.parametrize("bad", [0, 1, -3, 2.5, True])
def test_invalid_cutoff(bad):
    with pytest.raises(InvalidCutoffError):
        FockCutoff(bad)
    with pytest.raises(InvalidCutoffError):
        annihilation(bad)


def test_creation_is_adjoint_and_number_is_diagonal():
    n = 9
    a, ad = annihilation(n).matrix, creation(n).matrix
    np.testing.assert_array_equal(ad, a.conj().T)
    np.testing.assert_allclose(number(n).matrix, np.diag(np.arange(n)))
    np.testing.assert_allclose(ad @ a, number(n).matrix)
    np.testing.assert_array_equal(identity(n).matrix, np.eye(n))


def test_commutator_away_from_truncation_edge():
    n = 12
    a, ad = annihilation(n).matrix, creation(n).matrix
    comm = a @ ad - ad @ a
    # the last level is where truncation breaks [a, a^dag] = 1
    np.testing.assert_allclose(comm[: n - 1, : n - 1], np.eye(n - 1), atol=1e-12)
    assert comm[n - 1, n - 1] == pytest.approx(-(n - 1))


def test_displacement_vacuum_overlap():
    d = displacement(0.5, 32).matrix
    assert d[0, 0].real == pytest.approx(math.exp(-0.125), abs=1e-12)
    np.testing.assert_allclose(displacement(0.0, 5).matrix, np.eye(5), atol=0)


def test_displacement_column_is_coherent_state():
    alpha = 0.7 - 0.4j
    d = displacement(alpha, 60).matrix
    np.testing.assert_allclose(d[:25, 0], coherent_amplitudes(alpha, 25), atol=1e-12)


@given(
    st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=25, deadline=None)
def test_displacement_group_law(alpha, beta):
    n, k = 60, 20
    lhs = displacement(alpha, n).matrix @ displacement(beta, n).matrix
    phase = np.exp(1j * (alpha * np.conj(beta)).imag)
    rhs = phase * displacement(alpha + beta, n).matrix
    np.testing.assert_allclose(lhs[:k, :k], rhs[:k, :k], atol=1e-8)
    inv = displacement(alpha, n).matrix @ displacement(-alpha, n).matrix
    np.testing.assert_allclose(inv, np.eye(n), atol=1e-10)


def test_displacement_rejects_non_finite():
    with pytest.raises(ValueError):
        displacement(complex("nan"), 4)


def test_squeeze_column_matches_squeezed_vacuum():
    z = 0.4
    s = squeeze(z, 80).matrix
    ref = squeezed_vacuum_amplitudes(math.tanh(z), 30)
    np.testing.assert_allclose(s[:30, 0], ref, atol=1e-10)
    assert np.linalg.norm(squeezed_vacuum_amplitudes(0.5, 200)) == pytest.approx(1.0, abs=1e-12)


def test_tensor_and_basis_order():
    np.testing.assert_array_equal(tensor(identity(2), identity(2)), np.eye(4))
    a = annihilation(3)
    out = tensor(a, identity(3)) @ ket(1, 1, 3)
    np.testing.assert_allclose(out, ket(0, 1, 3))
    e = np.eye(4)
    np.testing.assert_array_equal(np.kron(e[2], e[3]), ket(2, 3, 4).real)


def test_beam_splitter_single_photon_and_vacuum():
    n = 4
    b = beam_splitter_unitary(n)
    np.testing.assert_allclose(b @ ket(0, 0, n), ket(0, 0, n), atol=1e-14)
    np.testing.assert_allclose(b @ ket(1, 0, n), (ket(1, 0, n) - ket(0, 1, n)) / math.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(b @ ket(0, 1, n), (ket(1, 0, n) + ket(0, 1, n)) / math.sqrt(2), atol=1e-14)


def test_hong_ou_mandel():
    n = 4
    out = beam_splitter_unitary(n) @ ket(1, 1, n)
    assert abs(out[basis_index(1, 1, n)]) < 1e-14
    assert abs(out[basis_index(2, 0, n)]) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    assert abs(out[basis_index(0, 2, n)]) == pytest.approx(1 / math.sqrt(2), abs=1e-14)


def test_beam_splitter_conjugation_relation():
    n = 7
    b = beam_splitter_unitary(n)
    a = annihilation(n).matrix
    eye = np.eye(n)
    ad_a, ad_b = np.kron(a.T, eye), np.kron(eye, a.T)
    lhs_a = b @ ad_a @ b.conj().T
    lhs_b = b @ ad_b @ b.conj().T
    # compare on columns whose image stays inside the retained photon-number blocks
    cols = [basis_index(i, j, n) for i in range(n) for j in range(n) if i + j <= n - 2]
    np.testing.assert_allclose(lhs_a[:, cols], ((ad_a - ad_b) / math.sqrt(2))[:, cols], atol=1e-12)
    np.testing.assert_allclose(lhs_b[:, cols], ((ad_a + ad_b) / math.sqrt(2))[:, cols], atol=1e-12)


def test_beam_splitter_unitary_and_generator():
    n = 6
    b = beam_splitter_unitary(n)
    np.testing.assert_allclose(b @ b.conj().T, np.eye(n * n), atol=1e-12)
    # dense exponential of the truncated generator agrees on the physical blocks
    a = annihilation(n).matrix
    eye = np.eye(n)
    aa, bb = np.kron(a, eye), np.kron(eye, a)
    dense = expm(0.25 * np.pi * (aa.conj().T @ bb - aa @ bb.conj().T))
    cols = [basis_index(i, j, n) for i in range(n) for j in range(n) if i + j < n]
    np.testing.assert_allclose(b[:, cols], dense[:, cols], atol=1e-12)


def test_apply_and_conjugate_match_dense(rng):
    n = 5
    b = beam_splitter_unitary(n)
    psi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    np.testing.assert_allclose(apply_beam_splitter(psi).reshape(-1), b @ psi.reshape(-1), atol=1e-12)
    g = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
    rho = g @ g.conj().T
    np.testing.assert_allclose(conjugate_beam_splitter(rho), b @ rho @ b.conj().T, atol=1e-10)


def test_apply_beam_splitter_rejects_bad_shape():
    with pytest.raises(ShapeError):
        apply_beam_splitter(np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        conjugate_beam_splitter(np.zeros((5, 5)))


def test_eigenvalue_examples():
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_allclose(hermitian_eigenvalues(np.array([[0, 1], [1, 0]])), [-1, 1], atol=1e-15)
    np.testing.assert_allclose(hermitian_eigenvalues(np.array([[2, 1j], [-1j, 2]])), [1, 3], atol=1e-14)


def test_eigenvalues_random_trace_and_rejection(rng):
    g = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    h = g + g.conj().T
    ev = hermitian_eigenvalues(h)
    assert np.all(np.diff(ev) >= 0)
    assert ev.sum() == pytest.approx(np.trace(h).real, abs=1e-10)
    with pytest.raises(ShapeError):
        hermitian_eigenvalues(g)
    with pytest.raises(ShapeError):
        hermitian_eigenvalues(np.zeros((3, 4)))


@given(st.integers(2, 6), st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_block_split_matches_dense(blocks, seed):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(5, 30, size=blocks)
    d = int(sizes.sum())
    h = np.zeros((d, d), dtype=complex)
    lo = 0
    for k in sizes:
        g = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        h[lo : lo + k, lo : lo + k] = g + g.conj().T
        lo += k
    perm = rng.permutation(d)
    h = h[np.ix_(perm, perm)]
    np.testing.assert_allclose(hermitian_eigenvalues(h), np.linalg.eigvalsh(h), atol=1e-10)


def test_normalize():
    v, c = normalize(np.array([3.0, 4.0]))
    np.testing.assert_allclose(v, [0.6, 0.8])
    assert c == pytest.approx(25.0)
    r, tr = normalize(np.diag([1.0, 3.0]))
    assert tr == pytest.approx(4.0)
    assert np.trace(r) == pytest.approx(1.0)
    with pytest.raises(DegenerateStateError):
        normalize(np.zeros(4))
    with pytest.raises(DegenerateStateError):
        normalize(np.zeros((3, 3)), kind="mixed")


def test_single_mode_state_density():
    st_ = SingleModeState(coherent_amplitudes(0.3, 10), "pure")
    assert st_.n_max == 10
    assert np.trace(st_.density()).real == pytest.approx(1.0, abs=1e-10)


def test_two_mode_density_validation():
    psi = np.zeros((3, 3), dtype=complex)
    psi[0, 0] = psi[1, 1] = 1 / math.sqrt(2)
    rho = TwoModeDensity.from_amplitudes(psi)
    assert rho.n_max == 3
    assert rho.purity() == pytest.approx(1.0)
    assert rho.tensor4()[1, 1, 0, 0] == pytest.approx(0.5)
    assert rho.check_positive() > -1e-12
    with pytest.raises(ShapeError):
        TwoModeDensity(np.eye(5) / 5, FockCutoff(2))
    bad = rho.matrix.copy()
    bad[0, 1] = 0.3
    with pytest.raises(ShapeError):
        TwoModeDensity(bad, FockCutoff(3))
    with pytest.raises(ShapeError):
        TwoModeDensity(2 * rho.matrix, FockCutoff(3))
