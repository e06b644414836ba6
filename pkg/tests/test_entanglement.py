"""Partial transpose, logarithmic negativity and entanglement capacity."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from cvtb.channels import ChannelSpec, GspParams, build_channel
from cvtb.entanglement import entanglement_capacity, log_negativity, log_negativity_pure, partial_transpose
from cvtb.fock import FockCutoff, TwoModeDensity


def random_density(rng, n, rank=None):
    d = n * n
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    r = g @ g.conj().T
    return r / np.trace(r).real


def schmidt_log_negativity(psi):
    # oracle: E_N = 2 log2 sum_i sigma_i for a normalized pure state
    sv = np.linalg.svd(psi, compute_uv=False)
    return 2 * math.log2(sv.sum() / np.linalg.norm(sv))


def test_bell_state():
    bell = np.zeros((2, 2), dtype=complex)
    bell[0, 0] = bell[1, 1] = 1 / math.sqrt(2)
    res = log_negativity(TwoModeDensity.from_amplitudes(bell))
    assert res.log_negativity == pytest.approx(1.0, abs=1e-12)
    assert res.negativity == pytest.approx(0.5, abs=1e-12)
    assert res.min_pt_eigenvalue == pytest.approx(-0.5, abs=1e-12)


def test_product_state_is_separable(rng):
    def single():
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        r = g @ g.conj().T
        return r / np.trace(r).real

    ra, rb = single(), single()
    rho = np.kron(ra, rb)
    np.testing.assert_allclose(partial_transpose(rho), np.kron(ra.T, rb), atol=1e-15)
    res = log_negativity(rho)
    assert res.log_negativity == 0.0 and res.negativity == 0.0


def test_partial_transpose_structure(rng):
    rho = random_density(rng, 4)
    pt = partial_transpose(rho)
    np.testing.assert_array_equal(partial_transpose(pt), rho)
    assert np.trace(pt) == pytest.approx(np.trace(rho))
    np.testing.assert_allclose(pt, pt.conj().T, atol=1e-15)
    # element check: <n m| rho^Ta |n' m'> = <n' m| rho |n m'>
    n = 4
    assert pt[1 * n + 2, 3 * n + 0] == rho[3 * n + 2, 1 * n + 0]


@given(st.integers(0, 2**31), st.integers(1, 16))
@settings(max_examples=25, deadline=None)
def test_negativity_identities(seed, rank):
    rho = random_density(np.random.default_rng(seed), 4, rank)
    res = log_negativity(rho)
    assert res.negativity >= 0.0
    assert res.log_negativity == pytest.approx(math.log2(2 * res.negativity + 1), abs=1e-12)
    assert (res.negativity == 0.0) == (res.min_pt_eigenvalue >= -1e-10)


@given(st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    n = 4
    rho = random_density(rng, n, rank=2)
    u = np.kron(unitary_group.rvs(n, random_state=rng), unitary_group.rvs(n, random_state=rng))
    rot = u @ rho @ u.conj().T
    rot = 0.5 * (rot + rot.conj().T)
    assert log_negativity(rot).log_negativity == pytest.approx(log_negativity(rho).log_negativity, abs=1e-9)


PURE_SPECS = [
    ChannelSpec("coh1", alpha=1.0, gsp=GspParams(0.0), cutoff=12),
    ChannelSpec("coh1", alpha=0.6 + 0.5j, gsp=GspParams(0.7), cutoff=12),
    ChannelSpec("sqz1", lam=0.4, gsp=GspParams(0.2), cutoff=12),
    ChannelSpec("coh2", alpha=0.5, beta=-0.3j, gsp=GspParams(0.2, 0.9), cutoff=12),
    ChannelSpec("sqz2", lam=0.5, gsp=GspParams(0.5, 0.1), cutoff=12),
    ChannelSpec("sqz2", lam=0.3, cutoff=12),
]


@pytest.mark.parametrize("spec", PURE_SPECS, ids=lambda s: s.family)
def test_schmidt_oracle_on_pure_channels(spec):
    st_ = build_channel(spec)
    generic = log_negativity(st_.density)
    fast = log_negativity_pure(st_.amplitudes)
    oracle = schmidt_log_negativity(st_.amplitudes)
    assert generic.log_negativity == pytest.approx(oracle, abs=1e-9)
    assert fast.log_negativity == pytest.approx(oracle, abs=1e-12)
    assert fast.min_pt_eigenvalue == pytest.approx(generic.min_pt_eigenvalue, abs=1e-9)


def test_coh1_core_value():
    ec = entanglement_capacity(ChannelSpec("coh1", alpha=1.0, gsp=GspParams(0.0)))
    assert ec == pytest.approx(math.log2(1.5), abs=1e-10)


def test_tmsv_capacity_closed_form():
    lam = 0.6
    ec = entanglement_capacity(ChannelSpec("sqz2", lam=lam))
    assert ec == pytest.approx(math.log2((1 + lam) / (1 - lam)), abs=1e-8)


@pytest.mark.parametrize(
    "spec",
    [
        ChannelSpec("coh1", alpha=1.3),
        ChannelSpec("coh2", alpha=1.0, beta=0.5j),
        ChannelSpec("thm1", nbar=0.1),
        ChannelSpec("thm2", nbar=0.05, nbar2=0.1),
    ],
)
def test_unoperated_beam_splitter_channels_are_separable(spec):
    assert entanglement_capacity(spec) < 1e-9


def test_coh1_capacity_vanishes_with_field():
    assert entanglement_capacity(ChannelSpec("coh1", alpha=1e-6, gsp=GspParams(0.5))) < 1e-9


def test_thm1_capacity_decreases_in_s():
    s = np.linspace(0, 1, 11)
    ec = [entanglement_capacity(ChannelSpec("thm1", nbar=0.05, gsp=GspParams(x))) for x in s]
    assert np.all(np.diff(ec) < 0)


def test_sqz1_capacity_decreases_in_s():
    # peak sits at the s = 0 end of the grid, in both build modes
    s = np.linspace(0, 1, 11)
    for mode in ("converged", "paper"):
        ec = [entanglement_capacity(ChannelSpec("sqz1", lam=0.1, gsp=GspParams(x), mode=mode)) for x in s]
        assert np.all(np.diff(ec) < 0)


def test_sqz2_capacity_dips_near_origin():
    grid = np.linspace(0, 1, 11)
    ec = np.array([[entanglement_capacity(ChannelSpec("sqz2", lam=0.05, gsp=GspParams(a, b))) for b in grid] for a in grid])
    # low at s1 = s2 = 0 and along the s = 0 edges, higher in the open interior
    assert ec[0, 0] < 0.6
    assert ec[0, :].max() < 0.6 and ec[:, 0].max() < 0.6
    assert ec[1:-1, 1:-1].min() > ec[0, 0] + 0.1


def test_paper_and_converged_capacities_agree_for_coherent_channels():
    for spec in (ChannelSpec("coh1", alpha=0.7, gsp=GspParams(0.3)),
                 ChannelSpec("coh2", alpha=0.4, beta=0.9, gsp=GspParams(0.6, 0.1))):
        paper = entanglement_capacity(ChannelSpec(**{**spec.__dict__, "mode": "paper"}))
        assert paper == pytest.approx(entanglement_capacity(spec), abs=1e-9)


def test_thermal_uses_mixed_route():
    st_ = build_channel(ChannelSpec("thm1", nbar=0.08, gsp=GspParams(0.4), cutoff=8))
    direct = log_negativity(TwoModeDensity(st_.density.matrix, FockCutoff(8))).log_negativity
    assert entanglement_capacity(ChannelSpec("thm1", nbar=0.08, gsp=GspParams(0.4), cutoff=8)) == direct
    assert direct > 0
