"""
Acceptance checks shared by ``cvtb validate`` and the test suite.

Each check returns a :class:`CheckResult` with the measured quantity, the
tolerance it was held to, and the wall time against its budget.  The budget
is reported but does not decide pass or fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from .channels import ChannelSpec, GspParams, build_channel
from .charfunc import charfn_analytic, charfn_numeric, coherent_input
from .entanglement import entanglement_capacity, log_negativity
from .errors import DegenerateStateError
from .fock import FockCutoff, TwoModeDensity, annihilation, creation
from .special import displacement_matrices, laguerre_derivative
from .teleport import QuadratureGrid, bk_fidelity, channel_epr_variance, channel_fidelity, epr_variance

__all__ = ["CheckResult", "CHECKS", "run_check", "run_all", "format_result"]


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    @property
    def within_budget(self) -> bool:
        return self.seconds <= self.budget


def _random_disk(rng, k: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(k))
    return r * np.exp(2j * np.pi * rng.random(k))


# ---------------------------------------------------------------------------
# teleportation


def _vacuum_density() -> TwoModeDensity:
    psi = np.zeros((2, 2), dtype=complex)
    psi[0, 0] = 1.0
    return TwoModeDensity.from_amplitudes(psi)


def check_classical_threshold():
    f = bk_fidelity(coherent_input(0.7 - 0.2j), charfn_numeric(_vacuum_density())).F
    return abs(f - 0.5) <= 1e-4, f"F = {f:.10f} (target 0.5 +- 1e-4)"


def check_tmsv_fidelity():
    worst = 0.0
    parts = []
    for lam in (0.0, 0.2, 0.5, 0.8):
        f = channel_fidelity(ChannelSpec("sqz2", lam=lam), coherent_input()).F
        worst = max(worst, abs(f - (1 + lam) / 2))
        parts.append(f"{lam:g}:{f:.8f}")
    return worst <= 1e-4, f"max |F - (1+lam)/2| = {worst:.2e}; " + " ".join(parts)


def _sqz1_fidelity(lam: float, s: float) -> float:
    return channel_fidelity(ChannelSpec("sqz1", lam=lam, gsp=GspParams(s)), coherent_input()).F


def check_squeezed_peak():
    grid = np.linspace(0.0, 1.0, 21)
    vals = [_sqz1_fidelity(0.99, s) for s in grid]
    k = int(np.argmax(vals))
    return vals[k] >= 0.80, f"best F = {vals[k]:.6f} at s = {grid[k]:g} (needs >= 0.80)"


def check_low_squeezing():
    f = _sqz1_fidelity(0.2, 0.5)
    return f >= 0.72, f"F = {f:.6f} (needs >= 0.72)"


COH_ALPHAS = tuple(np.linspace(0.1, 2.0, 10))
THM_NBARS = tuple(np.linspace(0.01, 0.1, 10))
GSP_S = tuple(np.linspace(0.0, 1.0, 5))


@lru_cache(maxsize=None)
def _classical_fidelities():
    # {(family, field, s or None): F}; degenerate corners are skipped
    out = {}
    for fam, key, fields in (("coh1", "alpha", COH_ALPHAS), ("thm1", "nbar", THM_NBARS)):
        for x in fields:
            for s in (None,) + GSP_S:
                spec = ChannelSpec(fam, gsp=None if s is None else GspParams(s), **{key: x})
                try:
                    out[(fam, x, s)] = channel_fidelity(spec, coherent_input()).F
                except DegenerateStateError:
                    continue
    return out


def check_classical_ceiling():
    vals = _classical_fidelities()
    worst_key = max(vals, key=vals.get)
    ok = all(v <= 0.5 + 1e-3 for v in vals.values())
    fam, x, s = worst_key
    return ok, f"{len(vals)} points, max F = {vals[worst_key]:.6f} ({fam}, field {x:.3g}, s {s})"


def check_bounded_above():
    vals = _classical_fidelities()
    worst = -np.inf
    where = None
    for (fam, x, s), f in vals.items():
        if s is None:
            continue
        gap = f - vals[(fam, x, None)]
        if gap > worst:
            worst, where = gap, (fam, x, s)
    return worst <= 1e-9, f"max (F_gsp - F_unop) = {worst:.3e} at {where[0]}, field {where[1]:.3g}, s {where[2]:g}"


# ---------------------------------------------------------------------------
# characteristic functions

CHAR_SPECS = (
    ChannelSpec("coh1", alpha=0.8 + 0.3j, gsp=GspParams(0.4)),
    ChannelSpec("coh1", alpha=1.5, gsp=GspParams(0.0)),
    ChannelSpec("sqz1", lam=0.5, gsp=GspParams(0.3)),
    ChannelSpec("sqz1", lam=0.2, gsp=GspParams(0.9)),
    ChannelSpec("coh2", alpha=0.6, beta=-0.4 + 0.5j, gsp=GspParams(0.3, 0.7)),
    ChannelSpec("coh2", alpha=1.0, beta=1.0, gsp=GspParams(0.0)),
    ChannelSpec("sqz2", lam=0.4, gsp=GspParams(0.5, 0.2)),
    ChannelSpec("sqz2", lam=0.6, gsp=GspParams(1.0)),
)


def check_charfn_gate():
    rng = np.random.default_rng(20240607)
    xi, eta = _random_disk(rng, 100, 3.0), _random_disk(rng, 100, 3.0)
    worst = {}
    for spec in CHAR_SPECS:
        d = np.abs(charfn_analytic(spec)(xi, eta) - charfn_numeric(build_channel(spec))(xi, eta)).max()
        worst[spec.family] = max(worst.get(spec.family, 0.0), float(d))
    ok = all(v < 1e-6 for v in worst.values())
    return ok, "max |analytic - numeric|: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def check_charfn_symmetry():
    rng = np.random.default_rng(7)
    xi, eta = _random_disk(rng, 50, 3.0), _random_disk(rng, 50, 3.0)
    specs = [
        ChannelSpec("coh1", alpha=0.9, gsp=GspParams(0.3)),
        ChannelSpec("thm1", nbar=0.08, gsp=GspParams(0.4)),
        ChannelSpec("sqz1", lam=0.3, gsp=GspParams(0.6)),
        ChannelSpec("coh2", alpha=0.5, beta=0.2j, gsp=GspParams(0.2, 0.8)),
        ChannelSpec("thm2", nbar=0.05, nbar2=0.1, gsp=GspParams(0.7, 0.1)),
        ChannelSpec("sqz2", lam=0.3, gsp=GspParams(0.5)),
    ]
    worst_norm = worst_herm = 0.0
    for spec in specs:
        fns = [charfn_numeric(build_channel(spec))]
        if not spec.family.startswith("thm"):
            fns.append(charfn_analytic(spec))
        for f in fns:
            worst_norm = max(worst_norm, abs(f(0.0, 0.0) - 1.0))
            worst_herm = max(worst_herm, float(np.abs(f(-xi, -eta) - np.conj(f(xi, eta))).max()))
    ok = worst_norm <= 1e-10 and worst_herm <= 1e-10
    return ok, f"max |chi(0,0) - 1| = {worst_norm:.1e}, max Hermiticity defect = {worst_herm:.1e}"


# ---------------------------------------------------------------------------
# entanglement


def check_entanglement_invariants():
    bell = np.zeros((2, 2), dtype=complex)
    bell[0, 0] = bell[1, 1] = 1 / math.sqrt(2)
    e_bell = log_negativity(TwoModeDensity.from_amplitudes(bell)).log_negativity

    rng = np.random.default_rng(3)
    n = 4

    def rand_rho():
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        r = g @ g.conj().T
        return r / np.trace(r).real

    prod = TwoModeDensity(np.kron(rand_rho(), rand_rho()), FockCutoff(n))
    e_prod = log_negativity(prod).log_negativity

    st = build_channel(ChannelSpec("coh1", alpha=1.0, gsp=GspParams(0.0)))
    e_coh = log_negativity(st.density).log_negativity
    sv = np.linalg.svd(st.amplitudes, compute_uv=False)
    schmidt = 2 * math.log2(sv.sum())

    thm = build_channel(ChannelSpec("thm1", nbar=0.1, gsp=GspParams(0.2), cutoff=8))
    ua = unitary_group.rvs(8, random_state=11)
    ub = unitary_group.rvs(8, random_state=12)
    u = np.kron(ua, ub)
    rot = u @ thm.density.matrix @ u.conj().T
    rot = 0.5 * (rot + rot.conj().T)
    e0 = log_negativity(thm.density).log_negativity
    e1 = log_negativity(rot).log_negativity

    ok = (
        abs(e_bell - 1.0) <= 1e-10
        and e_prod == 0.0
        and abs(e_coh - math.log2(1.5)) <= 1e-8
        and abs(e_coh - schmidt) <= 1e-8
        and abs(e0 - e1) <= 1e-8
    )
    detail = (
        f"Bell {e_bell:.12f}, product {e_prod:g}, coh1 {e_coh:.10f} "
        f"(log2 1.5 = {math.log2(1.5):.10f}, Schmidt {schmidt:.10f}), local-unitary shift {abs(e0 - e1):.1e}"
    )
    return ok, detail


def check_ec_shapes():
    s_grid = np.linspace(0.0, 1.0, 50)
    worst_rise = -np.inf
    for nb in (0.01, 0.05, 0.1):
        ec = np.array([entanglement_capacity(ChannelSpec("thm1", nbar=nb, gsp=GspParams(s))) for s in s_grid])
        worst_rise = max(worst_rise, float(np.diff(ec).max()))
    coh = np.array([entanglement_capacity(ChannelSpec("coh1", alpha=0.1, gsp=GspParams(s))) for s in s_grid])
    unop = [
        ChannelSpec("coh1", alpha=a) for a in (0.1, 1.0, 2.0)
    ] + [ChannelSpec("thm1", nbar=nb) for nb in (0.01, 0.1)] + [
        ChannelSpec("coh2", alpha=1.0, beta=0.5j),
        ChannelSpec("thm2", nbar=0.05, nbar2=0.1),
    ]
    worst_unop = max(abs(entanglement_capacity(spec)) for spec in unop)
    ok = worst_rise <= 1e-12 and int(np.argmax(coh)) == 0 and worst_unop <= 1e-9
    return ok, (
        f"thm1 largest step up {worst_rise:.2e}; coh1 alpha=0.1 argmax s = {s_grid[np.argmax(coh)]:g}; "
        f"unoperated max EC {worst_unop:.1e}"
    )


# ---------------------------------------------------------------------------
# EPR


def check_epr():
    vac = epr_variance(_vacuum_density()).total_variance
    coh = [channel_epr_variance(ChannelSpec("coh2", alpha=a, beta=a)).total_variance for a in (0.5, 1.0, 2.0)]
    rs = (0.1, 0.5, 1.0)
    tmsv = [channel_epr_variance(ChannelSpec("sqz2", lam=math.tanh(r))).total_variance for r in rs]
    gsp_min = np.inf
    for a in np.linspace(0.0, 2.0, 21):
        for s in (0.0, 0.5, 1.0):
            try:
                v = channel_epr_variance(ChannelSpec("coh2", alpha=a, beta=a, gsp=GspParams(s))).total_variance
            except DegenerateStateError:
                continue
            gsp_min = min(gsp_min, v)
    d_coh = max(abs(v - 2.0) for v in coh)
    d_tmsv = max(abs(v - 2 * math.exp(-2 * r)) for v, r in zip(tmsv, rs))
    ok = abs(vac - 2.0) <= 1e-10 and d_coh <= 1e-8 and d_tmsv <= 1e-8 and gsp_min >= 2 - 1e-6
    return ok, (
        f"vacuum {vac:.12f}; unoperated coh2 max dev {d_coh:.1e}; TMSV max dev {d_tmsv:.1e}; "
        f"GSP coh2 min {gsp_min:.8f}"
    )


# ---------------------------------------------------------------------------
# special functions


def check_special_functions():
    import mpmath

    mpmath.mp.dps = 40
    worst_lag = 0.0
    for n in range(11):
        for l in range(4):
            for x in (0.3, 0.7, 1.9, 4.2):
                fd = (-1) ** l * mpmath.diff(lambda t: mpmath.laguerre(n, 0, t), mpmath.mpf(x), l)
                fd = float(fd)
                mine = float(laguerre_derivative(n, l, x))
                if fd == 0.0:
                    err = abs(mine)
                else:
                    err = abs(mine - fd) / abs(fd)
                worst_lag = max(worst_lag, err)
    nmax, keep = 64, 30
    a = annihilation(nmax).matrix
    ad = creation(nmax).matrix
    worst_d = 0.0
    for xi in (0.3, 0.5 - 0.4j, -1.2 + 0.7j, 2.0j):
        ref = expm(xi * ad - np.conj(xi) * a)[:keep, :keep]
        mine = displacement_matrices(np.array([xi]), keep)[0]
        worst_d = max(worst_d, float(np.abs(ref - mine).max()))
    return worst_lag < 1e-5 and worst_d < 1e-9, (
        f"Laguerre max rel err {worst_lag:.1e}; displacement vs expm {worst_d:.1e}"
    )


CHECKS = (
    (1, "classical threshold", check_classical_threshold, 1.0),
    (2, "unoperated TMSV fidelity", check_tmsv_fidelity, 5.0),
    (3, "squeezed-channel peak (lam 0.99)", check_squeezed_peak, 60.0),
    (4, "low-squeezing enhancement (lam 0.2, s 0.5)", check_low_squeezing, 10.0),
    (5, "classical ceiling coh1/thm1", check_classical_ceiling, 60.0),
    (6, "characteristic-function oracle gate", check_charfn_gate, 30.0),
    (7, "chi normalization and Hermiticity", check_charfn_symmetry, 10.0),
    (8, "entanglement invariants", check_entanglement_invariants, 10.0),
    (9, "EC figure shapes", check_ec_shapes, 30.0),
    (10, "EPR values", check_epr, 20.0),
    (11, "GSP fidelity bounded by unoperated", check_bounded_above, 60.0),
    (12, "special functions", check_special_functions, 5.0),
)


def run_check(number: int) -> CheckResult:
    for num, title, fn, budget in CHECKS:
        if num == number:
            t0 = time.perf_counter()
            passed, detail = fn()
            return CheckResult(num, title, bool(passed), detail, time.perf_counter() - t0, budget)
    raise KeyError(f"no acceptance check numbered {number}")


def format_result(r: CheckResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    timing = f"{r.seconds:.2f}s/{r.budget:g}s" + ("" if r.within_budget else " over budget")
    return f"{status} [{r.number:2d}] {r.title}: {r.detail} ({timing})"


def run_all(numbers=None, echo=print) -> list[CheckResult]:
    out = []
    for num, *_ in CHECKS:
        if numbers is not None and num not in numbers:
            continue
        r = run_check(num)
        if echo is not None:
            echo(format_result(r))
        out.append(r)
    return out
