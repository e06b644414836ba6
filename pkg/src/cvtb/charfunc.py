"""
Symmetrically ordered characteristic functions ``chi(xi, eta) = Tr[rho D_a(xi) D_b(eta)]``.

Two evaluators exist for each channel: a generic number-basis sum over the
density matrix, and closed forms for the pure families.  The generic one is
the reference the closed forms are checked against.

Closed forms use the beam-splitter identity
``B^dag D_a(xi) D_b(eta) B = D_a(X) D_b(Y)`` with ``X = (xi - eta)/sqrt2`` and
``Y = (xi + eta)/sqrt2``, and the single-mode squeeze identity
``S(z)^dag D(beta) S(z) = D(beta cosh z + beta^* sinh z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix

from .channels import ChannelSpec, ChannelState, build_channel, sqz2_weights
from .errors import DegenerateStateError, UnsupportedFamilyError
from .fock import TwoModeDensity
from .special import displacement_matrices, displacement_matrix_element

__all__ = [
    "PhasePoint",
    "CharFn",
    "InputCharFn",
    "coherent_input",
    "squeezed_input",
    "charfn_numeric",
    "charfn_analytic",
    "channel_charfn",
    "single_mode_coherent_gsp",
    "single_mode_squeezed_gsp",
    "PRUNE_TOL",
]

PRUNE_TOL = 1e-14
_CHUNK = 256
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PhasePoint:
    xi: complex
    eta: complex

    @property
    def X(self) -> complex:
        return (self.xi - self.eta) / _SQRT2

    @property
    def Y(self) -> complex:
        return (self.xi + self.eta) / _SQRT2


@dataclass(frozen=True, eq=False)
class CharFn:
    """Vectorized two-mode characteristic function.

    Call with scalars or broadcastable arrays ``xi``, ``eta``.
    ``provenance`` is ``"numeric"`` or ``"analytic:<family>"``.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    provenance: str
    params: dict = field(default_factory=dict)

    def __call__(self, xi, eta):
        xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=complex), np.asarray(eta, dtype=complex))
        out = self.evaluator(xi.reshape(-1), eta.reshape(-1)).reshape(xi.shape)
        return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class InputCharFn:
    """Single-mode characteristic function of the state to be teleported."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    kind: str
    param: float | complex
    # squeezed inputs decay slowly along the anti-squeezed axis
    width_scale: float = 1.0

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=complex)
        out = self.evaluator(g)
        return complex(out) if out.ndim == 0 else out


def coherent_input(alpha: complex = 0.0) -> InputCharFn:
    """``exp(-|g|^2/2) exp(alpha^* g - alpha g^*)``."""
    alpha = complex(alpha)

    def ev(g):
        return np.exp(-0.5 * np.abs(g) ** 2 + np.conj(alpha) * g - alpha * np.conj(g))

    return InputCharFn(ev, "coherent", alpha)


def squeezed_input(rprime: float) -> InputCharFn:
    """``exp[-cosh(2r)/2 |g|^2 - sinh(2r)/4 (g^2 + g^*2)]`` for squeezed vacuum ``S(r)|0>``."""
    r = float(rprime)
    c, s = math.cosh(2 * r), math.sinh(2 * r)

    def ev(g):
        return np.exp(-0.5 * c * np.abs(g) ** 2 - 0.25 * s * (g * g + np.conj(g) ** 2))

    return InputCharFn(ev, "squeezed", r, width_scale=math.exp(abs(r)))


# ---------------------------------------------------------------------------
# number-basis evaluator


def _numeric_pure(psi: np.ndarray):
    n = psi.shape[0]
    # drop negligible rows/columns so the displacement blocks stay small
    keep = max(
        int(np.flatnonzero(np.abs(psi).max(axis=1) > PRUNE_TOL).max(initial=0)),
        int(np.flatnonzero(np.abs(psi).max(axis=0) > PRUNE_TOL).max(initial=0)),
    ) + 1
    keep = max(2, min(n, keep))
    psi = psi[:keep, :keep]
    conj = psi.conj()

    def ev(xi, eta):
        out = np.empty(xi.size, dtype=complex)
        for lo in range(0, xi.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            da = displacement_matrices(xi[sl], keep)
            db = displacement_matrices(eta[sl], keep)
            moved = np.matmul(np.matmul(da, psi), db.transpose(0, 2, 1))
            out[sl] = np.einsum("ij,pij->p", conj, moved)
        return out

    return ev


def _numeric_mixed(rho: np.ndarray):
    n = int(round(math.sqrt(rho.shape[0])))
    r4 = rho.reshape(n, n, n, n)
    # chi = sum rho[(n', m'), (n, m)] <n|D(xi)|n'> <m|D(eta)|m'>, written as the
    # bilinear form da[(n, n')] R[(n, n'), (m, m')] db[(m, m')] over kept elements
    idx = np.argwhere(np.abs(r4) > PRUNE_TOL)
    vals = r4[tuple(idx.T)]
    keep = max(2, int(idx.max(initial=0)) + 1)
    npr, mpr, nn, mm = idx.T
    bilinear = csr_matrix((vals, (nn * keep + npr, mm * keep + mpr)), shape=(keep * keep,) * 2)

    def ev(xi, eta):
        out = np.empty(xi.size, dtype=complex)
        for lo in range(0, xi.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            da = displacement_matrices(xi[sl], keep).reshape(-1, keep * keep)
            db = displacement_matrices(eta[sl], keep).reshape(-1, keep * keep)
            out[sl] = np.einsum("pk,pk->p", (bilinear.T @ da.T).T, db)
        return out

    return ev


def charfn_numeric(state: TwoModeDensity | ChannelState) -> CharFn:
    """Characteristic function summed over the Fock basis.

    Density elements with modulus at most 1e-14 are skipped.  A pure
    :class:`ChannelState` is evaluated from its amplitudes as
    ``<psi| D_a D_b |psi>``, which is the same sum in factored form.
    """
    if isinstance(state, ChannelState):
        if state.is_pure:
            return CharFn(_numeric_pure(state.amplitudes), "numeric", {"n_max": state.n_max})
        state = state.density
    return CharFn(_numeric_mixed(state.matrix), "numeric", {"n_max": state.n_max})


# ---------------------------------------------------------------------------
# closed forms


def single_mode_coherent_gsp(beta, alpha: complex, su) -> np.ndarray:
    """Characteristic function of the normalized ``(s + u n)|alpha>`` at ``beta``."""
    s, u = su
    a = complex(alpha)
    x = abs(a) ** 2
    norm = s * s + u * (2 * s + u) * x + u * u * x * x
    if norm < 1e-12:
        raise DegenerateStateError(f"operated coherent state has vanishing norm {norm:.3e}")
    b = np.asarray(beta, dtype=complex)
    bc = np.conj(b)
    kernel = np.exp(-0.5 * np.abs(b) ** 2 + b * np.conj(a) - bc * a)
    poly = (
        s * s
        + 2 * s * u * x
        + s * u * (np.conj(a) * b - a * bc)
        + u * u * x * (1.0 + (a + b) * (np.conj(a) - bc))
    )
    return poly * kernel / norm


def single_mode_squeezed_gsp(beta, lam: float, su) -> np.ndarray:
    """Characteristic function of the normalized ``(s + u n) S(z)|0>``, ``lam = tanh z``.

    The operated state is ``S(z)(A|0> + B|2>)`` with ``A = s + u sinh^2 z`` and
    ``B = -sqrt2 u cosh z sinh z``.
    """
    s, u = su
    z = math.atanh(lam)
    sh, ch = math.sinh(z), math.cosh(z)
    A = s + u * sh * sh
    B = -_SQRT2 * u * ch * sh
    norm = A * A + B * B
    if norm < 1e-12:
        raise DegenerateStateError(f"operated squeezed state has vanishing norm {norm:.3e}")
    beta = np.asarray(beta, dtype=complex)
    b = beta * ch + np.conj(beta) * sh
    x = np.abs(b) ** 2
    poly = A * A + A * B * (b * b + np.conj(b) ** 2) / _SQRT2 + B * B * (1.0 - 2.0 * x + 0.5 * x * x)
    return poly * np.exp(-0.5 * x) / norm


def _analytic_sqz2(spec: ChannelSpec):
    w = np.array(sqz2_weights(spec.lam, spec.su(0), spec.su(1)))
    norm = float(w @ w)
    if norm < 1e-12:
        raise DegenerateStateError(f"sqz2 channel has vanishing norm {norm:.3e}")
    r = math.atanh(spec.lam)
    ch, sh = math.cosh(r), math.sinh(r)

    def ev(xi, eta):
        xp = xi * ch - np.conj(eta) * sh
        ep = eta * ch - np.conj(xi) * sh
        out = np.zeros(xi.size, dtype=complex)
        for k in range(3):
            for l in range(3):
                c = w[k] * w[l]
                if c == 0.0:
                    continue
                out += c * displacement_matrix_element(k, l, xp) * displacement_matrix_element(k, l, ep)
        return out / norm

    return ev


def charfn_analytic(spec: ChannelSpec) -> CharFn:
    """Closed-form characteristic function for ``coh1``, ``sqz1``, ``coh2`` or ``sqz2``.

    Raises
    ------
    UnsupportedFamilyError
        For thermal families, which have no closed form; use
        :func:`channel_charfn` to fall back to the numeric evaluator.
    """
    f = spec.family
    if f == "coh1":
        a, su = spec.alpha, spec.su(0)
        single_mode_coherent_gsp(0.0, a, su)

        def ev(xi, eta):
            X, Y = (xi - eta) / _SQRT2, (xi + eta) / _SQRT2
            return single_mode_coherent_gsp(X, a, su) * np.exp(-0.5 * np.abs(Y) ** 2)

    elif f == "sqz1":
        lam, su = spec.lam, spec.su(0)
        single_mode_squeezed_gsp(0.0, lam, su)

        def ev(xi, eta):
            X, Y = (xi - eta) / _SQRT2, (xi + eta) / _SQRT2
            return single_mode_squeezed_gsp(X, lam, su) * np.exp(-0.5 * np.abs(Y) ** 2)

    elif f == "coh2":
        a, b, su1, su2 = spec.alpha, spec.beta, spec.su(0), spec.su(1)
        single_mode_coherent_gsp(0.0, a, su1)
        single_mode_coherent_gsp(0.0, b, su2)

        def ev(xi, eta):
            X, Y = (xi - eta) / _SQRT2, (xi + eta) / _SQRT2
            return single_mode_coherent_gsp(X, a, su1) * single_mode_coherent_gsp(Y, b, su2)

    elif f == "sqz2":
        ev = _analytic_sqz2(spec)
    else:
        raise UnsupportedFamilyError(f"no closed-form characteristic function for {f}")
    return CharFn(ev, f"analytic:{f}", {"spec": spec})


def channel_charfn(spec: ChannelSpec, prefer: str = "analytic") -> CharFn:
    """Analytic evaluator when one exists (and ``prefer="analytic"``), else numeric."""
    if prefer == "analytic" and spec.family not in ("thm1", "thm2"):
        return charfn_analytic(spec)
    return charfn_numeric(build_channel(spec))
