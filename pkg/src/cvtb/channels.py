"""
GSP-operated two-mode channels.

A generalized superposition of products (GSP) acts on one mode as
``G = s a a^dag + t a^dag a``.  On a number state ``G|n> = (s + n u)|n>`` with
``u = s + t``, so every construction below reduces to reweighting Fock
amplitudes.  The unoperated input corresponds to ``s = 1, u = 0``.

Six channel families are built:

* ``coh1``, ``thm1``, ``sqz1``: one operated mode mixed with vacuum on a 50:50
  beam splitter.
* ``coh2``, ``thm2``: two operated modes mixed on the beam splitter.
* ``sqz2``: local operations on both halves of a two-mode squeezed vacuum,
  no beam splitter.

Two build modes exist.  ``"converged"`` runs the full truncated-Fock pipeline
at a cutoff chosen from the input photon-number tail.  ``"paper"`` reproduces
the low-intensity closed forms: coherent channels are exact (a small
entangled core followed by local displacements), thermal channels keep
photon numbers ``n <= 2`` (one mode) or ``n < 2`` per mode (two modes), and
squeezed channels keep the first Fock pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ConvergenceError, DegenerateStateError, RangeError
from .fock import (
    FockCutoff,
    SingleModeState,
    TwoModeDensity,
    annihilation,
    apply_beam_splitter,
    coherent_amplitudes,
    conjugate_beam_splitter,
    creation,
    squeezed_vacuum_amplitudes,
)
from .special import displacement_matrices

__all__ = [
    "FAMILIES",
    "SINGLE_MODE_FAMILIES",
    "GspParams",
    "ChannelSpec",
    "ChannelState",
    "gsp_apply",
    "gsp_weights",
    "build_channel",
    "local_core",
    "mode_swap",
    "auto_cutoff",
    "converge_observable",
    "PAPER_NBAR_MAX",
    "PAPER_LAMBDA_MAX",
    "MAX_CUTOFF",
]

FAMILIES = ("coh1", "thm1", "sqz1", "coh2", "thm2", "sqz2")
SINGLE_MODE_FAMILIES = ("coh1", "thm1", "sqz1")
PURE_FAMILIES = ("coh1", "sqz1", "coh2", "sqz2")
MODES = ("paper", "converged")

PAPER_NBAR_MAX = 0.1
PAPER_LAMBDA_MAX = 0.2
MAX_CUTOFF = 400
TAIL_TOL = 1e-20
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class GspParams:
    """Superposition weights; ``t = +sqrt(1 - s^2)`` is derived, never passed.

    ``s2`` is the weight on the second mode for two-mode families; when it is
    omitted both modes share ``s``.
    """

    s: float
    s2: float | None = None

    def __post_init__(self):
        for name in ("s", "s2"):
            v = getattr(self, name)
            if v is None:
                continue
            v = float(v)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise RangeError(f"GSP weight {name}={v!r} outside [0, 1]")
            object.__setattr__(self, name, v)

    @property
    def t(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.s * self.s))

    @property
    def t2(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.second * self.second))

    @property
    def second(self) -> float:
        return self.s if self.s2 is None else self.s2

    def mode(self, k: int) -> tuple[float, float]:
        """``(s, u)`` with ``u = s + t`` for mode ``k`` (0 or 1)."""
        s = self.s if k == 0 else self.second
        return s, s + math.sqrt(max(0.0, 1.0 - s * s))


_UNOPERATED = (1.0, 0.0)


def _su(gsp: GspParams | None, k: int) -> tuple[float, float]:
    return _UNOPERATED if gsp is None else gsp.mode(k)


def gsp_weights(su: tuple[float, float], n_max: int) -> np.ndarray:
    """Diagonal of ``s a a^dag + t a^dag a`` on ``|0> .. |n_max-1>``."""
    s, u = su
    return s + u * np.arange(n_max, dtype=float)


def gsp_apply(state: SingleModeState, gsp: GspParams) -> tuple[SingleModeState, float]:
    """Apply ``s a a^dag + t a^dag a`` and renormalize.

    The operator is assembled from ladder matrices one level larger than the
    state, so ``a a^dag`` is exact on the top retained level.

    Returns
    -------
    SingleModeState
        The normalized output, of the same kind as the input.
    float
        Squared norm (pure) or trace (mixed) before normalization.

    Raises
    ------
    DegenerateStateError
        If that constant is below 1e-12.
    """
    n = state.n_max
    a = annihilation(n + 1).matrix
    ad = creation(n + 1).matrix
    g = (gsp.s * (a @ ad) + gsp.t * (ad @ a))[:n, :n]
    if state.kind == "pure":
        out = g @ state.data
        const = float(np.vdot(out, out).real)
    else:
        out = g @ state.data @ g.conj().T
        const = float(np.trace(out).real)
    if const < DEGENERATE_TOL:
        raise DegenerateStateError(
            f"GSP output has vanishing norm {const:.3e} (s={gsp.s:g})"
        )
    if state.kind == "pure":
        return SingleModeState(out / math.sqrt(const), "pure"), const
    return SingleModeState(out / const, "mixed"), const


@dataclass(frozen=True)
class ChannelSpec:
    """Declarative description of one channel.

    Parameters
    ----------
    family : str
        One of ``coh1, thm1, sqz1, coh2, thm2, sqz2``.
    alpha, beta : complex
        Coherent amplitudes of modes a and b (``beta`` only for ``coh2``).
    nbar, nbar2 : float
        Thermal mean photon numbers (``nbar2`` defaults to ``nbar``).
    lam : float
        Squeezing ``tanh z`` (``sqz1``) or ``tanh r`` (``sqz2``), in ``[0, 1)``.
    gsp : GspParams or None
        ``None`` means the unoperated input.
    mode : str
        ``"paper"`` or ``"converged"``.
    cutoff : int or None
        Fock levels per mode; ``None`` picks one from the photon-number tail.
    """

    family: str
    alpha: complex = 0.0
    beta: complex = 0.0
    nbar: float = 0.0
    nbar2: float | None = None
    lam: float = 0.0
    gsp: GspParams | None = None
    mode: str = "converged"
    cutoff: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise RangeError(f"unknown channel family {self.family!r}; expected one of {FAMILIES}")
        if self.mode not in MODES:
            raise RangeError(f"unknown build mode {self.mode!r}; expected one of {MODES}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        for name in ("nbar", "nbar2"):
            v = getattr(self, name)
            if v is not None and not (float(v) >= 0.0):
                raise RangeError(f"{name}={v!r} must be >= 0")
        if not (0.0 <= float(self.lam) < 1.0):
            raise RangeError(f"lam={self.lam!r} must lie in [0, 1)")
        object.__setattr__(self, "lam", float(self.lam))
        if self.cutoff is not None:
            FockCutoff(self.cutoff)

    @property
    def nbar_b(self) -> float:
        return self.nbar if self.nbar2 is None else float(self.nbar2)

    @property
    def squeeze_param(self) -> float:
        """``z`` (or ``r``) with ``lam = tanh z``."""
        return math.atanh(self.lam)

    @property
    def is_pure(self) -> bool:
        return self.family in PURE_FAMILIES

    def su(self, k: int) -> tuple[float, float]:
        """``(s, u)`` of mode ``k``; ``(1, 0)`` when unoperated."""
        return _su(self.gsp, k)

    def with_cutoff(self, n_max: int | None) -> "ChannelSpec":
        return replace(self, cutoff=n_max)


@dataclass(frozen=True, eq=False)
class ChannelState:
    """A built channel.

    ``amplitudes`` is the ``(n, n)`` array ``psi[n, m]`` for pure channels and
    ``None`` otherwise.  ``normalization_constant`` is the squared norm (or
    trace) of the operated input before normalization.
    """

    spec: ChannelSpec
    n_max: int
    normalization_constant: float
    amplitudes: np.ndarray | None = None
    _matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.normalization_constant > 0:
            raise DegenerateStateError("normalization constant must be positive")

    @property
    def is_pure(self) -> bool:
        return self.amplitudes is not None

    @cached_property
    def density(self) -> TwoModeDensity:
        if self.amplitudes is not None:
            return TwoModeDensity.from_amplitudes(self.amplitudes)
        return TwoModeDensity(self._matrix, FockCutoff(self.n_max))


# ---------------------------------------------------------------------------
# cutoff selection


def _tail_index(p: np.ndarray, tol: float) -> int:
    # smallest n with sum_{k >= n} p_k < tol, measured on the given support
    tail = np.cumsum(p[::-1])[::-1]
    hits = np.flatnonzero(tail < tol * max(tail[0], 1e-300))
    return int(hits[0]) if hits.size else p.size


def _single_mode_photon_probs(kind: str, param, su, n_big: int) -> np.ndarray:
    n = np.arange(n_big)
    w2 = gsp_weights(su, n_big) ** 2
    if kind == "coh":
        x = abs(param) ** 2
        if x == 0:
            p = (n == 0).astype(float)
        else:
            logp = n * math.log(x) - x - np.array([math.lgamma(k + 1) for k in n])
            p = np.exp(logp)
    elif kind == "thm":
        q = param / (1.0 + param)
        p = (1.0 - q) * q**n if param > 0 else (n == 0).astype(float)
    elif kind == "sqz":
        p = np.abs(squeezed_vacuum_amplitudes(param, n_big)) ** 2
    else:
        raise ValueError(kind)
    return p * w2


def auto_cutoff(spec: ChannelSpec, tol: float = TAIL_TOL) -> int:
    """Fock levels per mode so that the discarded photon-number tail is below ``tol``.

    After a beam splitter either output mode can carry every input photon, so
    the bound is taken on the total photon number.

    Raises
    ------
    RangeError
        If the required cutoff exceeds ``MAX_CUTOFF``.
    """
    f = spec.family
    n_big = 4 * MAX_CUTOFF
    if f == "sqz2":
        s1, u1 = spec.su(0)
        s2, u2 = spec.su(1)
        n = np.arange(n_big)
        lam2 = spec.lam**2
        p = (1 - lam2) * np.exp(n * math.log(lam2)) if spec.lam > 0 else (n == 0) * 1.0
        p = p * ((s1 + n * u1) * (s2 + n * u2)) ** 2
    else:
        kind = f[:3]
        first = {"coh": spec.alpha, "thm": spec.nbar, "sqz": spec.lam}[kind]
        p = _single_mode_photon_probs(kind, first, spec.su(0), n_big)
        if f in ("coh2", "thm2"):
            second = spec.beta if kind == "coh" else spec.nbar_b
            p = np.convolve(p, _single_mode_photon_probs(kind, second, spec.su(1), n_big))[:n_big]
    # two spare levels keep every ladder product in the pipeline exact
    n_max = max(_tail_index(p, tol) + 2, 6)
    if n_max > MAX_CUTOFF:
        raise RangeError(
            f"{f} needs more than {MAX_CUTOFF} Fock levels per mode; use the analytic route"
        )
    return n_max


# ---------------------------------------------------------------------------
# converged pipeline


def _input_state(spec: ChannelSpec, k: int, n: int) -> SingleModeState:
    kind = spec.family[:3]
    if kind == "coh":
        amp = spec.alpha if k == 0 else spec.beta
        return SingleModeState(coherent_amplitudes(amp, n), "pure")
    if kind == "thm":
        nb = spec.nbar if k == 0 else spec.nbar_b
        q = nb / (1.0 + nb)
        return SingleModeState(np.diag((1.0 - q) * q ** np.arange(n)).astype(complex), "mixed")
    return SingleModeState(squeezed_vacuum_amplitudes(spec.lam, n), "pure")


def _operate(spec: ChannelSpec, k: int, n: int) -> tuple[np.ndarray, float]:
    # weight first, normalize on the truncated support
    st = _input_state(spec, k, n)
    w = gsp_weights(spec.su(k), n)
    if st.kind == "pure":
        out = st.data * w
        const = float(np.vdot(out, out).real)
    else:
        out = st.data * np.outer(w, w)
        const = float(np.trace(out).real)
    if const < DEGENERATE_TOL:
        raise DegenerateStateError(
            f"{spec.family}: operated mode {k} has vanishing norm {const:.3e}"
        )
    return (out / math.sqrt(const) if st.kind == "pure" else out / const), const


def _vacuum(n: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[0] = 1.0
    return v


def _build_converged(spec: ChannelSpec, n: int) -> ChannelState:
    f = spec.family
    if f == "sqz2":
        lam = spec.lam
        k = np.arange(n)
        tmsv = math.sqrt(1.0 - lam * lam) * (lam**k if lam > 0 else (k == 0) * 1.0)
        amp = tmsv * gsp_weights(spec.su(0), n) * gsp_weights(spec.su(1), n)
        const = float(np.sum(amp**2))
        if const < DEGENERATE_TOL:
            raise DegenerateStateError(f"sqz2 channel has vanishing norm {const:.3e}")
        psi = np.diag(amp / math.sqrt(const)).astype(complex)
        return ChannelState(spec, n, const, amplitudes=psi)

    a_state, c_a = _operate(spec, 0, n)
    if f in SINGLE_MODE_FAMILIES:
        b_state, c_b = (_vacuum(n) if f != "thm1" else np.diag(_vacuum(n))), 1.0
    else:
        b_state, c_b = _operate(spec, 1, n)
    const = c_a * c_b
    if f.startswith("thm"):
        b_mat = b_state if b_state.ndim == 2 else np.diag(b_state)
        rho = conjugate_beam_splitter(np.kron(a_state, b_mat))
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
        return ChannelState(spec, n, const, _matrix=rho)
    psi = apply_beam_splitter(np.outer(a_state, b_state))
    psi /= np.linalg.norm(psi)
    return ChannelState(spec, n, const, amplitudes=psi)


# ---------------------------------------------------------------------------
# low-intensity closed forms


def _coh_norm(alpha: complex, su) -> float:
    # squared norm of (s a a^dag + t a^dag a)|alpha>
    s, u = su
    x = abs(alpha) ** 2
    return s * s + u * (2 * s + u) * x + u * u * x * x


def _thermal_norm(nbar: float, su) -> float:
    # sum_n p_n (s + n u)^2 with geometric p_n: <n> = nbar, <n^2> = nbar + 2 nbar^2
    s, u = su
    return s * s + 2 * s * u * nbar + u * u * (nbar + 2 * nbar * nbar)


def _sqz1_norm(lam: float, su) -> float:
    # S^dag G S|0> = A|0> + B|2>; the norm is A^2 + B^2
    s, u = su
    z = math.atanh(lam)
    sh, ch = math.sinh(z), math.cosh(z)
    a = s + u * sh * sh
    b = -math.sqrt(2.0) * u * ch * sh
    return a * a + b * b


def sqz2_weights(lam: float, su1, su2) -> tuple[float, float, float]:
    """Coefficients ``w_k`` of ``S2^dag G1 G2 S2 |00> = sum_k w_k |kk>``, k <= 2."""
    s1, u1 = su1
    s2, u2 = su2
    r = math.atanh(lam)
    sh, ch = math.sinh(r), math.cosh(r)
    e0, e1 = sh * sh, sh * ch
    f0 = e0 * e0 + e1 * e1
    f1 = sh * ch**3 + 3 * sh**3 * ch
    f2 = 2 * ch * ch * sh * sh
    cross = s1 * u2 + s2 * u1
    w0 = s1 * s2 + cross * e0 + u1 * u2 * f0
    w1 = cross * e1 + u1 * u2 * f1
    w2 = u1 * u2 * f2
    return w0, w1, w2


def _sqz2_norm(lam: float, su1, su2) -> float:
    return float(sum(w * w for w in sqz2_weights(lam, su1, su2)))


def local_core(spec: ChannelSpec) -> np.ndarray:
    """Normalized pre-displacement amplitudes of a coherent channel.

    ``coh1`` returns the 2x2 array of ``p1|00> + (p2/sqrt2)(|10> - |01>)``;
    ``coh2`` returns the 3x3 array of the two-photon core.  The full channel is
    this core followed by a displacement on each mode.
    """
    if spec.family == "coh1":
        s, u = spec.su(0)
        a = spec.alpha
        p1 = s + u * abs(a) ** 2
        p2 = a * u
        core = np.array([[p1, -p2 / math.sqrt(2)], [p2 / math.sqrt(2), 0.0]], dtype=complex)
    elif spec.family == "coh2":
        core = _coh2_core(spec)
    else:
        raise RangeError(f"local_core is defined for coherent families, not {spec.family}")
    nrm2 = float(np.vdot(core, core).real)
    if nrm2 < DEGENERATE_TOL:
        raise DegenerateStateError(f"{spec.family} core has vanishing norm {nrm2:.3e}")
    return core / math.sqrt(nrm2)


def _coh2_core(spec: ChannelSpec) -> np.ndarray:
    # Each operated coherent mode is D(alpha)(p1 + p2 a^dag)|0>.  The beam
    # splitter maps a^dag -> (a^dag - b^dag)/sqrt2 and b^dag -> (a^dag + b^dag)/sqrt2,
    # and the product of the two displacements becomes a local one.
    s1, u1 = spec.su(0)
    s2, u2 = spec.su(1)
    a, b = spec.alpha, spec.beta
    p1, p2 = s1 + u1 * abs(a) ** 2, a * u1
    q1, q2 = s2 + u2 * abs(b) ** 2, b * u2
    r2 = math.sqrt(2.0)
    core = np.zeros((3, 3), dtype=complex)
    core[0, 0] = p1 * q1
    # p2 q1 (a^dag - b^dag)/sqrt2 + p1 q2 (a^dag + b^dag)/sqrt2
    core[1, 0] = (p2 * q1 + p1 * q2) / r2
    core[0, 1] = (p1 * q2 - p2 * q1) / r2
    # p2 q2 (a^dag^2 - b^dag^2)/2 |00>
    core[2, 0] = p2 * q2 / r2
    core[0, 2] = -p2 * q2 / r2
    return core


def _displace_locally(core: np.ndarray, xa: complex, xb: complex, n: int) -> np.ndarray:
    d = displacement_matrices(np.array([xa, xb]), n)
    psi = np.zeros((n, n), dtype=complex)
    k = core.shape[0]
    psi[:k, :k] = core
    return d[0] @ psi @ d[1].T


def _thm1_paper(spec: ChannelSpec, n: int) -> tuple[np.ndarray, float]:
    nb = spec.nbar
    su = spec.su(0)
    m = _thermal_norm(nb, su)
    x = nb / (1.0 + nb)
    w = gsp_weights(su, 3)
    q = (x ** np.arange(3)) * w**2 / (m * (1.0 + nb))
    r2 = math.sqrt(2.0)
    # q_n/n! (a^dag - b^dag)^n/sqrt2^n |00><00| (a - b)^n/sqrt2^n for n = 0, 1, 2
    vecs = [
        {(0, 0): 1.0},
        {(1, 0): 1 / r2, (0, 1): -1 / r2},
        {(2, 0): 0.5, (1, 1): -1 / r2, (0, 2): 0.5},
    ]
    rho = np.zeros((n * n, n * n), dtype=complex)
    for qn, vec in zip(q, vecs):
        v = np.zeros(n * n, dtype=complex)
        for (i, j), c in vec.items():
            v[i * n + j] = c
        rho += qn * np.outer(v, v)
    return rho, m


def _thm2_paper(spec: ChannelSpec, n: int) -> tuple[np.ndarray, float]:
    # keep n < 2 photons in each operated thermal mode
    r2 = math.sqrt(2.0)
    parts = []
    m_tot = 1.0
    for k, nb in ((0, spec.nbar), (1, spec.nbar_b)):
        su = spec.su(k)
        m = _thermal_norm(nb, su)
        x = nb / (1.0 + nb)
        w = gsp_weights(su, 2)
        parts.append((x ** np.arange(2)) * w**2 / (m * (1.0 + nb)))
        m_tot *= m
    pa, pb = parts
    # |n_a, n_b> before the beam splitter, mapped through it
    after = {
        (0, 0): {(0, 0): 1.0},
        (1, 0): {(1, 0): 1 / r2, (0, 1): -1 / r2},
        (0, 1): {(1, 0): 1 / r2, (0, 1): 1 / r2},
        (1, 1): {(2, 0): 1 / r2, (0, 2): -1 / r2},
    }
    rho = np.zeros((n * n, n * n), dtype=complex)
    for (i, j), vec in after.items():
        v = np.zeros(n * n, dtype=complex)
        for (a, b), c in vec.items():
            v[a * n + b] = c
        rho += pa[i] * pb[j] * np.outer(v, v)
    return rho, m_tot


def _check_paper_range(spec: ChannelSpec) -> None:
    kind = spec.family[:3]
    if kind == "thm":
        worst = max(spec.nbar, spec.nbar_b if spec.family == "thm2" else 0.0)
        if worst > PAPER_NBAR_MAX:
            raise RangeError(
                f"paper mode for {spec.family} requires nbar <= {PAPER_NBAR_MAX}, got {worst:g}"
            )
    if kind == "sqz" and spec.lam > PAPER_LAMBDA_MAX:
        raise RangeError(
            f"paper mode for {spec.family} requires lambda <= {PAPER_LAMBDA_MAX}, got {spec.lam:g}"
        )


def _build_paper(spec: ChannelSpec, n: int) -> ChannelState:
    _check_paper_range(spec)
    f = spec.family
    r2 = math.sqrt(2.0)
    if f == "coh1":
        const = _coh_norm(spec.alpha, spec.su(0))
        core = local_core(spec)
        a = spec.alpha
        psi = _displace_locally(core, a / r2, -a / r2, n)
    elif f == "coh2":
        const = _coh_norm(spec.alpha, spec.su(0)) * _coh_norm(spec.beta, spec.su(1))
        core = local_core(spec)
        a, b = spec.alpha, spec.beta
        psi = _displace_locally(core, (a + b) / r2, (b - a) / r2, n)
    elif f == "sqz1":
        s, u = spec.su(0)
        lam = spec.lam
        const = _sqz1_norm(lam, (s, u))
        c0 = s
        c1 = -lam * (0.5 * s + u)
        psi = np.zeros((n, n), dtype=complex)
        # c0|00> + c1 (a^dag - b^dag)^2 / 2 |00>
        psi[0, 0] = c0
        psi[2, 0] = c1 / r2
        psi[0, 2] = c1 / r2
        psi[1, 1] = -c1
    elif f == "sqz2":
        su1, su2 = spec.su(0), spec.su(1)
        const = _sqz2_norm(spec.lam, su1, su2)
        (s1, u1), (s2, u2) = su1, su2
        psi = np.zeros((n, n), dtype=complex)
        psi[0, 0] = s1 * s2
        psi[1, 1] = spec.lam * (s1 + u1) * (s2 + u2)
    elif f == "thm1":
        rho, const = _thm1_paper(spec, n)
    else:
        rho, const = _thm2_paper(spec, n)

    if const < DEGENERATE_TOL:
        raise DegenerateStateError(f"{f} channel has vanishing norm {const:.3e}")
    if f.startswith("thm"):
        tr = np.trace(rho).real
        if tr < DEGENERATE_TOL:
            raise DegenerateStateError(f"{f} truncated density has vanishing trace {tr:.3e}")
        return ChannelState(spec, n, const, _matrix=rho / tr)
    nrm = np.linalg.norm(psi)
    if nrm**2 < DEGENERATE_TOL:
        raise DegenerateStateError(f"{f} truncated state has vanishing norm {nrm**2:.3e}")
    return ChannelState(spec, n, const, amplitudes=psi / nrm)


def build_channel(spec: ChannelSpec) -> ChannelState:
    """Build the normalized two-mode channel described by ``spec``.

    Raises
    ------
    DegenerateStateError
        If the operated input has squared norm below 1e-12.
    RangeError
        In paper mode with ``nbar > 0.1`` (thermal) or ``lam > 0.2`` (squeezed).
    """
    if spec.mode == "paper":
        _check_paper_range(spec)
    n = spec.cutoff if spec.cutoff is not None else auto_cutoff(spec)
    if spec.mode == "paper":
        return _build_paper(spec, max(n, 3))
    return _build_converged(spec, n)


def mode_swap(state) -> np.ndarray:
    """Exchange modes a and b of an ``(n, n)`` amplitude array or an ``n^2 x n^2`` density."""
    arr = np.asarray(state)
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.shape[0] >= 4:
        n = int(round(math.sqrt(arr.shape[0])))
        if n * n == arr.shape[0]:
            return arr.reshape(n, n, n, n).transpose(1, 0, 3, 2).reshape(n * n, n * n)
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return arr.T
    raise ValueError(f"cannot swap modes of an array with shape {arr.shape}")


def converge_observable(
    observable,
    spec: ChannelSpec,
    tol: float = 1e-8,
    step: int = 4,
    max_rounds: int = 8,
):
    """Evaluate ``observable(build_channel(spec))`` with a growing cutoff.

    Starts from the tail-based cutoff and adds ``step`` levels per round until
    two consecutive values differ by less than ``tol``.

    Returns
    -------
    value, n_max
        The last value and the cutoff that produced it.

    Raises
    ------
    ConvergenceError
        After ``max_rounds`` rounds without settling.
    """
    n = spec.cutoff if spec.cutoff is not None else auto_cutoff(spec)
    prev = observable(build_channel(spec.with_cutoff(n)))
    history = [(n, prev)]
    for _ in range(max_rounds):
        n += step
        if n > MAX_CUTOFF:
            break
        cur = observable(build_channel(spec.with_cutoff(n)))
        history.append((n, cur))
        if abs(cur - prev) < tol:
            return cur, n
        prev = cur
    raise ConvergenceError(f"observable did not settle within {tol:g}: {history}")
