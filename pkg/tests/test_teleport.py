"""Teleportation fidelity by quadrature and EPR variances."""

import math

import numpy as np
import pytest

from cvtb.channels import ChannelSpec, GspParams, build_channel
from cvtb.charfunc import CharFn, channel_charfn, charfn_numeric, coherent_input, squeezed_input
from cvtb.errors import QuadratureError
from cvtb.fock import TwoModeDensity
from cvtb.special import displacement_matrices
from cvtb.teleport import (
    CLASSICAL_FIDELITY,
    NO_CLONING_FIDELITY,
    QuadratureGrid,
    analytic_tmsv_fidelity,
    bk_fidelity,
    channel_epr_variance,
    channel_fidelity,
    epr_variance,
    tmsv_reference_report,
)


def vacuum_density():
    psi = np.zeros((2, 2), dtype=complex)
    psi[0, 0] = 1
    return TwoModeDensity.from_amplitudes(psi)


def test_constants():
    assert CLASSICAL_FIDELITY == 0.5
    assert NO_CLONING_FIDELITY == pytest.approx(2 / 3)


def test_grid_validation_and_nodes():
    g = QuadratureGrid()
    nodes, w = g.nodes()
    assert nodes.size == 96 * 96
    assert w.sum() == pytest.approx(14.0**2)
    assert g.refined().n_q == 192
    for kwargs in ({"n_q": 8}, {"half_width": 0.0}, {"rule": "trapezoid"}, {"n_q": 20.5}):
        with pytest.raises(ValueError):
            QuadratureGrid(**kwargs)


def test_vacuum_channel_gives_classical_limit():
    res = bk_fidelity(coherent_input(0.7 - 0.2j), charfn_numeric(vacuum_density()))
    assert res.F == pytest.approx(0.5, abs=1e-10)
    assert res.converged
    assert res.history[0][0] == 96
    assert res.imag_residual < 1e-12


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.7, 0.9])
def test_tmsv_closed_form(lam):
    f = channel_fidelity(ChannelSpec("sqz2", lam=lam), coherent_input(0.4j)).F
    assert f == pytest.approx((1 + lam) / 2, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1j, 0.8 - 0.6j])
def test_unoperated_coh1(alpha):
    f = channel_fidelity(ChannelSpec("coh1", alpha=alpha), coherent_input()).F
    assert f == pytest.approx(0.5 * math.exp(-(alpha.real if isinstance(alpha, complex) else alpha) ** 2), abs=1e-8)


@pytest.mark.parametrize("nbar", [0.01, 0.1, 0.5])
def test_unoperated_thm1(nbar):
    f = channel_fidelity(ChannelSpec("thm1", nbar=nbar), coherent_input()).F
    assert f == pytest.approx(1 / (2 * math.sqrt(1 + nbar)), abs=1e-7)


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
def test_unoperated_sqz1(lam):
    z = math.atanh(lam)
    f = channel_fidelity(ChannelSpec("sqz1", lam=lam), coherent_input()).F
    assert f == pytest.approx(1 / math.sqrt(2 * (1 + math.exp(-2 * z))), abs=1e-8)


@pytest.mark.parametrize("rp,lam", [(0.3, 0.0), (0.3, 0.5), (0.6, 0.8)])
def test_squeezed_input_through_tmsv(rp, lam):
    n = (1 - lam) / (1 + lam)
    ref = 1 / math.sqrt((math.exp(-2 * rp) + n) * (math.exp(2 * rp) + n))
    assert channel_fidelity(ChannelSpec("sqz2", lam=lam), squeezed_input(rp)).F == pytest.approx(ref, abs=1e-8)


def test_sqz1_beats_cloning_limit_at_strong_squeezing():
    assert channel_fidelity(ChannelSpec("sqz1", lam=0.9), coherent_input()).F > NO_CLONING_FIDELITY
    best = max(channel_fidelity(ChannelSpec("sqz1", lam=0.99, gsp=GspParams(s)), coherent_input()).F for s in (0.0, 0.5, 1.0))
    # bounded near 1/sqrt2 for a single squeezed mode split on a beam splitter
    assert NO_CLONING_FIDELITY < best < 1 / math.sqrt(2)


def test_squeezed_input_gains_from_operation():
    unop = channel_fidelity(ChannelSpec("sqz2", lam=0.5), squeezed_input(0.5)).F
    best = channel_fidelity(ChannelSpec("sqz2", lam=0.5, gsp=GspParams(1.0)), squeezed_input(0.5)).F
    assert best > unop + 0.05


@pytest.mark.parametrize(
    "spec",
    [
        ChannelSpec("coh1", alpha=0.8, gsp=GspParams(0.3)),
        ChannelSpec("sqz1", lam=0.3, gsp=GspParams(0.5)),
        ChannelSpec("coh2", alpha=0.6, beta=0.2, gsp=GspParams(0.4, 0.9)),
        ChannelSpec("sqz2", lam=0.4, gsp=GspParams(0.7)),
    ],
    ids=lambda s: s.family,
)
def test_analytic_and_numeric_fidelities_agree(spec):
    a = channel_fidelity(spec, coherent_input()).F
    n = channel_fidelity(spec, coherent_input(), prefer="numeric", converge=False).F
    assert a == pytest.approx(n, abs=1e-6)
    assert 0.0 <= a <= 1.0 + 1e-6


def test_paper_thermal_fidelity_close_to_converged():
    spec = ChannelSpec("thm1", nbar=0.01, gsp=GspParams(0.5))
    conv = channel_fidelity(spec, coherent_input()).F
    paper = channel_fidelity(ChannelSpec("thm1", nbar=0.01, gsp=GspParams(0.5), mode="paper"), coherent_input()).F
    assert abs(conv - paper) < 1e-4


@pytest.mark.parametrize(
    "fam,kw",
    [("coh2", {"alpha": 0.6, "beta": 0.6}), ("thm2", {"nbar": 0.05})],
)
def test_operation_does_not_beat_unoperated_two_mode(fam, kw):
    unop = channel_fidelity(ChannelSpec(fam, **kw), coherent_input()).F
    for s in (0.2, 0.6, 1.0):
        f = channel_fidelity(ChannelSpec(fam, gsp=GspParams(s), **kw), coherent_input()).F
        assert f <= unop + 1e-9


def test_non_settling_integrand_raises():
    wild = CharFn(lambda xi, eta: np.cos(25 * xi.real) * np.cos(25 * eta.imag) + 0j, "test")
    with pytest.raises(QuadratureError) as exc:
        bk_fidelity(coherent_input(), wild, QuadratureGrid(n_q=16), max_doublings=1)
    assert len(exc.value.history) == 2


def test_complex_integrand_raises():
    bad = CharFn(lambda xi, eta: 1j * np.exp(-0.5 * (abs(xi) ** 2 + abs(eta) ** 2)), "test")
    with pytest.raises(QuadratureError):
        bk_fidelity(coherent_input(), bad)


def test_reference_formulas_are_report_only():
    assert analytic_tmsv_fidelity(1, 0.0) == pytest.approx(0.5)
    assert analytic_tmsv_fidelity(0, 0.0) == pytest.approx(0.25)
    assert analytic_tmsv_fidelity(0, 1.0) == pytest.approx(0.0625)
    with pytest.raises(ValueError):
        analytic_tmsv_fidelity(2, 0.5)
    rows = tmsv_reference_report([0.0, 0.5])
    assert len(rows) == 4
    by_key = {(r["lambda"], r["s"]): r for r in rows}
    # s = 0 at lambda = 0 is a degenerate channel and is reported as such
    assert by_key[(0.0, 0)]["error"] == "DegenerateStateError"
    assert by_key[(0.0, 1)]["quadrature"] == pytest.approx(0.5, abs=1e-8)
    assert abs(by_key[(0.5, 0)]["difference"]) > 0.1


# --- EPR ------------------------------------------------------------------------------


def test_epr_vacuum():
    res = epr_variance(vacuum_density())
    assert res.total_variance == pytest.approx(2.0, abs=1e-12)
    assert res.var_x == pytest.approx(1.0) and res.var_p == pytest.approx(1.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_epr_tmsv(r):
    res = channel_epr_variance(ChannelSpec("sqz2", lam=math.tanh(r)))
    assert res.total_variance == pytest.approx(2 * math.exp(-2 * r), abs=1e-9)


def test_epr_unoperated_coherent_pair():
    for a in (0.5, 1.5):
        assert channel_epr_variance(ChannelSpec("coh2", alpha=a, beta=a)).total_variance == pytest.approx(2.0, abs=1e-8)


def test_epr_pure_and_mixed_routes_agree():
    st_ = build_channel(ChannelSpec("sqz2", lam=0.3, gsp=GspParams(0.5, 0.2), cutoff=20))
    assert epr_variance(st_.amplitudes).total_variance == pytest.approx(
        epr_variance(st_.density).total_variance, abs=1e-12
    )
    assert epr_variance(st_).total_variance == pytest.approx(epr_variance(st_.amplitudes).total_variance)


def test_epr_invariant_under_matched_displacement():
    # D(d) x D(d) shifts x1 - x2 and p1 + p2 by constants only
    n, big = 20, 50
    psi = build_channel(ChannelSpec("sqz2", lam=0.3, gsp=GspParams(0.5), cutoff=n)).amplitudes
    pad = np.zeros((big, big), dtype=complex)
    pad[:n, :n] = psi
    d = displacement_matrices(np.array([0.4 - 0.3j]), big)[0]
    moved = d @ pad @ d.T
    assert epr_variance(moved).total_variance == pytest.approx(epr_variance(psi).total_variance, abs=1e-8)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
def test_operated_tmsv_is_more_correlated(lam):
    unop = channel_epr_variance(ChannelSpec("sqz2", lam=lam)).total_variance
    assert channel_epr_variance(ChannelSpec("sqz2", lam=lam, gsp=GspParams(1.0))).total_variance < unop


def test_epr_thermal_channel():
    res = channel_epr_variance(ChannelSpec("thm2", nbar=0.1))
    # two independent thermal modes on a beam splitter: each quadrature sum has variance 1 + 2 nbar
    assert res.total_variance == pytest.approx(2 * (1 + 2 * 0.1), abs=1e-8)
