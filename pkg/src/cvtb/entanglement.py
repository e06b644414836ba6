"""
Partial transpose and logarithmic negativity of two-mode Fock densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSpec, build_channel, converge_observable
from .fock import TwoModeDensity, hermitian_eigenvalues

__all__ = [
    "EntanglementResult",
    "partial_transpose",
    "log_negativity",
    "entanglement_capacity",
    "log_negativity_pure",
    "SEPARABLE_TOL",
]

SEPARABLE_TOL = 1e-10


@dataclass(frozen=True)
class EntanglementResult:
    negativity: float
    log_negativity: float
    min_pt_eigenvalue: float


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, TwoModeDensity) else np.asarray(rho)


def partial_transpose(rho) -> np.ndarray:
    """Transpose on mode a: ``((n, m), (n', m')) -> ((n', m), (n, m'))``."""
    m = _matrix(rho)
    n = int(round(math.sqrt(m.shape[0])))
    return m.reshape(n, n, n, n).transpose(2, 1, 0, 3).reshape(n * n, n * n)


def log_negativity(rho) -> EntanglementResult:
    """Negativity and base-2 logarithmic negativity from the partial-transpose spectrum.

    Negativity is clamped to zero when no eigenvalue falls below ``-1e-10``.
    """
    ev = hermitian_eigenvalues(partial_transpose(rho))
    low = float(ev[0])
    if low >= -SEPARABLE_TOL:
        return EntanglementResult(0.0, 0.0, low)
    neg = max(0.0, 0.5 * (float(np.abs(ev).sum()) - 1.0))
    return EntanglementResult(neg, math.log2(2.0 * neg + 1.0), low)


def log_negativity_pure(psi: np.ndarray) -> EntanglementResult:
    """Same quantities for a pure state given as an ``(n, n)`` amplitude array.

    With Schmidt coefficients ``sigma_i`` the partial transpose has eigenvalues
    ``sigma_i^2`` and ``+-sigma_i sigma_j`` (i < j), so no ``n^2 x n^2`` matrix
    is formed.
    """
    sv = np.linalg.svd(np.asarray(psi), compute_uv=False)
    sv = sv / np.linalg.norm(sv)
    low = -float(sv[0] * sv[1]) if sv.size > 1 else 0.0
    if low >= -SEPARABLE_TOL:
        return EntanglementResult(0.0, 0.0, low)
    neg = max(0.0, 0.5 * (float(sv.sum()) ** 2 - 1.0))
    return EntanglementResult(neg, math.log2(2.0 * neg + 1.0), low)


def entanglement_capacity(spec: ChannelSpec, converge: bool | None = None, tol: float = 1e-8) -> float:
    """Logarithmic negativity of the normalized channel state.

    Pure channels use the Schmidt spectrum of their amplitudes; mixed ones the
    full partial-transpose spectrum.

    With ``converge`` (the default for converged mode without a fixed cutoff)
    the cutoff grows until the value settles within ``tol``.
    """
    if converge is None:
        converge = spec.mode == "converged" and spec.cutoff is None

    def measure(st):
        if st.is_pure:
            return log_negativity_pure(st.amplitudes).log_negativity
        return log_negativity(st.density).log_negativity

    if converge:
        return converge_observable(measure, spec, tol=tol)[0]
    return measure(build_channel(spec))
