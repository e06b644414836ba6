"""
Dense linear algebra on a truncated Fock basis.

Single-mode operators are ``n_max x n_max`` complex matrices on
``{|0>, ..., |n_max-1>}``.  Two-mode objects live on the lexicographic product
basis with index ``n * n_max + m`` for ``|n>_a |m>_b``; the partial transpose
and every reshape in the package rely on that ordering.

Truncated operators are exact only on levels that cannot leak past the top of
the basis: an expression that adds ``k`` photons is exact for ``n < n_max - k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateStateError, InvalidCutoffError, ShapeError

__all__ = [
    "FockCutoff",
    "ModeOperator",
    "annihilation",
    "creation",
    "number",
    "identity",
    "displacement",
    "squeeze",
    "quadratures",
    "coherent_amplitudes",
    "squeezed_vacuum_amplitudes",
    "beam_splitter_unitary",
    "apply_beam_splitter",
    "conjugate_beam_splitter",
    "hermitian_eigenvalues",
    "tensor",
    "normalize",
    "basis_index",
    "SingleModeState",
    "TwoModeDensity",
]


@dataclass(frozen=True)
class FockCutoff:
    """Number of retained Fock levels per mode (``|0>`` .. ``|n_max-1>``)."""

    n_max: int

    def __post_init__(self):
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max:
            raise InvalidCutoffError(f"cutoff must be an integer, got {self.n_max!r}")
        if self.n_max < 2:
            raise InvalidCutoffError(f"cutoff must be >= 2, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def two_mode_dim(self) -> int:
        return self.n_max * self.n_max


def _cutoff(cutoff) -> FockCutoff:
    if isinstance(cutoff, FockCutoff):
        return cutoff
    return FockCutoff(cutoff)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """A single-mode operator matrix with a descriptive label."""

    matrix: np.ndarray
    label: str

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> np.ndarray:
        return self.matrix.conj().T

    def __matmul__(self, other):
        other = other.matrix if isinstance(other, ModeOperator) else other
        return self.matrix @ other


def annihilation(cutoff) -> ModeOperator:
    """Lowering operator with ``M[n-1, n] = sqrt(n)``."""
    n = _cutoff(cutoff).n_max
    m = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    return ModeOperator(m, "annihilate")


def creation(cutoff) -> ModeOperator:
    return ModeOperator(annihilation(cutoff).dag, "create")


def number(cutoff) -> ModeOperator:
    n = _cutoff(cutoff).n_max
    return ModeOperator(np.diag(np.arange(n, dtype=float)).astype(complex), "number")


def identity(cutoff) -> ModeOperator:
    n = _cutoff(cutoff).n_max
    return ModeOperator(np.eye(n, dtype=complex), "identity")


def displacement(alpha: complex, cutoff) -> ModeOperator:
    """``D(alpha) = exp(alpha a^dag - alpha^* a)`` by Pade scaling-and-squaring.

    The generator is truncated before exponentiation, so entries near the top
    of the basis carry truncation error.  Use
    :func:`cvtb.special.displacement_matrix` for exact matrix elements.
    """
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise ValueError(f"displacement amplitude must be finite, got {alpha}")
    a = annihilation(cutoff).matrix
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return ModeOperator(expm(gen), f"displacement({alpha:.6g})")


def squeeze(z: float, cutoff) -> ModeOperator:
    """``S(z) = exp[(z/2)(a^2 - a^dag^2)]`` on the truncated basis."""
    a = annihilation(cutoff).matrix
    ad = a.conj().T
    return ModeOperator(expm(0.5 * z * (a @ a - ad @ ad)), f"squeeze({z:.6g})")


def quadratures(cutoff) -> tuple[np.ndarray, np.ndarray]:
    """``x = (a + a^dag)/sqrt2`` and ``p = (a - a^dag)/(i sqrt2)``."""
    a = annihilation(cutoff).matrix
    ad = a.conj().T
    return (a + ad) / np.sqrt(2), (a - ad) / (1j * np.sqrt(2))


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Exact Fock amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``, n < n_max."""
    alpha = complex(alpha)
    out = np.empty(n_max, dtype=complex)
    out[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, n_max):
        out[n] = out[n - 1] * alpha / np.sqrt(n)
    return out


def squeezed_vacuum_amplitudes(lam: float, n_max: int) -> np.ndarray:
    """Amplitudes of ``S(z)|0>`` with ``lam = tanh z``.

    Only even levels are populated:
    ``(1-lam^2)^(1/4) sqrt((2k)!)/k! (-lam/2)^k`` on ``|2k>``.
    """
    out = np.zeros(n_max, dtype=complex)
    c = (1.0 - lam * lam) ** 0.25
    # ratio between consecutive even terms: sqrt((2k+1)(2k+2))/(k+1) * (-lam/2)
    term = c
    for k in range(0, (n_max + 1) // 2):
        if 2 * k >= n_max:
            break
        out[2 * k] = term
        term = term * np.sqrt((2 * k + 1) * (2 * k + 2)) / (k + 1) * (-0.5 * lam)
    return out


def basis_index(n: int, m: int, n_max: int) -> int:
    """Flat index of ``|n>_a |m>_b``."""
    return n * n_max + m


@lru_cache(maxsize=32)
def _bs_blocks(n_max: int):
    # The 50:50 generator (pi/4)(a^dag b - a b^dag) conserves n + m, so the
    # unitary is block diagonal by total photon number.  Blocks with
    # N >= n_max are cut by the truncation and are not the physical ones.
    blocks = []
    for total in range(2 * n_max - 1):
        ks = np.arange(max(0, total - n_max + 1), min(total, n_max - 1) + 1)
        idx = ks * n_max + (total - ks)
        dim = len(ks)
        gen = np.zeros((dim, dim))
        for j in range(dim - 1):
            k = ks[j]
            # a^dag b |k, N-k> = sqrt((k+1)(N-k)) |k+1, N-k-1>
            amp = np.sqrt((k + 1) * (total - k))
            gen[j + 1, j] += amp
            gen[j, j + 1] -= amp
        u = expm(0.25 * np.pi * gen)
        u.setflags(write=False)
        idx.setflags(write=False)
        blocks.append((idx, u))
    return tuple(blocks)


def beam_splitter_unitary(cutoff) -> np.ndarray:
    """50:50 beam splitter on the two-mode truncated basis.

    Convention: ``B a^dag B^dag = (a^dag - b^dag)/sqrt2`` and
    ``B b^dag B^dag = (a^dag + b^dag)/sqrt2``, i.e. ``B = exp[(pi/4)(a^dag b - a b^dag)]``.
    """
    n = _cutoff(cutoff).n_max
    out = np.zeros((n * n, n * n), dtype=complex)
    for idx, u in _bs_blocks(n):
        out[np.ix_(idx, idx)] = u
    return out


def apply_beam_splitter(psi: np.ndarray) -> np.ndarray:
    """Apply the 50:50 beam splitter to a two-mode amplitude array of shape ``(n, n)``."""
    psi = np.asarray(psi)
    if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
        raise ShapeError(f"expected an (n, n) amplitude array, got shape {psi.shape}")
    n = psi.shape[0]
    flat = psi.reshape(-1).astype(complex)
    out = np.zeros_like(flat)
    for idx, u in _bs_blocks(n):
        out[idx] = u @ flat[idx]
    return out.reshape(n, n)


def conjugate_beam_splitter(rho: np.ndarray) -> np.ndarray:
    """``B rho B^dag`` for a two-mode density matrix, block by block.

    Entries that are exactly zero between photon-number blocks stay exactly
    zero, which keeps later eigenvalue problems block diagonal.
    """
    rho = np.asarray(rho)
    n = _two_mode_n(rho)
    blocks = _bs_blocks(n)
    out = np.zeros(rho.shape, dtype=complex)
    for idx_r, u_r in blocks:
        rows = rho[idx_r]
        if not rows.any():
            continue
        for idx_c, u_c in blocks:
            sub = rows[:, idx_c]
            if sub.any():
                out[np.ix_(idx_r, idx_c)] = u_r @ sub @ u_c.conj().T
    return out


def _two_mode_n(rho: np.ndarray) -> int:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square two-mode matrix, got shape {rho.shape}")
    n = int(round(np.sqrt(rho.shape[0])))
    if n * n != rho.shape[0]:
        raise ShapeError(f"dimension {rho.shape[0]} is not a perfect square")
    return n


def hermitian_eigenvalues(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    The input is symmetrized before diagonalization.  Matrices whose
    non-zero pattern splits into disconnected blocks are diagonalized block by
    block, which is exact and much cheaper for number-conserving states.

    Raises
    ------
    ShapeError
        If ``m`` is not square or deviates from Hermiticity by more than
        ``tol`` (relative to its largest entry, floor 1).
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > tol * scale:
        raise ShapeError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + m.conj().T)
    d = h.shape[0]
    if d <= 64:
        return np.linalg.eigvalsh(h)
    ncomp, labels = connected_components(csr_matrix(h != 0), directed=False)
    if ncomp == 1:
        return np.linalg.eigvalsh(h)
    vals = []
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        vals.append(np.linalg.eigvalsh(h[np.ix_(idx, idx)]))
    return np.sort(np.concatenate(vals))


def tensor(a, b) -> np.ndarray:
    """Kronecker product in the fixed lexicographic basis."""
    a = a.matrix if isinstance(a, ModeOperator) else np.asarray(a)
    b = b.matrix if isinstance(b, ModeOperator) else np.asarray(b)
    return np.kron(a, b)


def normalize(state: np.ndarray, kind: str | None = None, tol: float = 1e-12):
    """Return ``(normalized_state, constant)``.

    ``kind="pure"`` scales to unit 2-norm (constant = squared norm);
    ``kind="mixed"`` scales to unit trace (constant = trace).  When ``kind`` is
    omitted, 1-D input is pure and square 2-D input is mixed.

    Raises
    ------
    DegenerateStateError
        If the norm^2 or trace is below ``tol``.
    """
    state = np.asarray(state)
    if kind is None:
        kind = "pure" if state.ndim == 1 else "mixed"
    if kind == "pure":
        nrm2 = float(np.vdot(state, state).real)
        if nrm2 < tol:
            raise DegenerateStateError(f"state has vanishing norm^2 = {nrm2:.3e}")
        return state / np.sqrt(nrm2), nrm2
    if kind == "mixed":
        if state.ndim != 2 or state.shape[0] != state.shape[1]:
            raise ShapeError(f"mixed state must be a square matrix, got shape {state.shape}")
        tr = float(np.trace(state).real)
        if tr < tol:
            raise DegenerateStateError(f"density matrix has vanishing trace {tr:.3e}")
        return state / tr, tr
    raise ValueError(f"unknown state kind {kind!r}")


@dataclass(frozen=True, eq=False)
class SingleModeState:
    """Pure amplitudes (``kind="pure"``) or a density matrix (``kind="mixed"``)."""

    data: np.ndarray
    kind: str = "pure"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if self.kind == "pure":
            if data.ndim != 1:
                raise ShapeError(f"pure single-mode state must be 1-D, got shape {data.shape}")
        elif self.kind == "mixed":
            if data.ndim != 2 or data.shape[0] != data.shape[1]:
                raise ShapeError(f"mixed single-mode state must be square, got shape {data.shape}")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if data.shape[0] < 2:
            raise InvalidCutoffError("single-mode state needs at least two Fock levels")
        object.__setattr__(self, "data", data)

    @property
    def n_max(self) -> int:
        return self.data.shape[0]

    def density(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data


@dataclass(frozen=True, eq=False)
class TwoModeDensity:
    """Density matrix on the truncated two-mode basis, index ``n * n_max + m``.

    Hermiticity and unit trace are checked on construction; positivity is
    checked by :meth:`check_positive` because it needs a diagonalization.
    """

    matrix: np.ndarray
    cutoff: FockCutoff

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        cut = _cutoff(self.cutoff)
        d = cut.two_mode_dim
        if m.shape != (d, d):
            raise ShapeError(f"expected shape {(d, d)} for cutoff {cut.n_max}, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ShapeError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ShapeError(f"density matrix trace {tr!r} differs from 1 by more than 1e-10")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "cutoff", cut)

    @classmethod
    def from_amplitudes(cls, psi: np.ndarray) -> "TwoModeDensity":
        """Projector onto a normalized ``(n, n)`` amplitude array."""
        psi = np.asarray(psi, dtype=complex)
        if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
            raise ShapeError(f"expected an (n, n) amplitude array, got shape {psi.shape}")
        v = psi.reshape(-1)
        return cls(np.outer(v, v.conj()), FockCutoff(psi.shape[0]))

    @property
    def n_max(self) -> int:
        return self.cutoff.n_max

    def tensor4(self) -> np.ndarray:
        """View as ``rho[n, m, n', m']``."""
        n = self.n_max
        return self.matrix.reshape(n, n, n, n)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def check_positive(self, tol: float = 1e-9) -> float:
        """Return the smallest eigenvalue; raise :class:`ShapeError` below ``-tol``."""
        low = float(hermitian_eigenvalues(self.matrix)[0])
        if low < -tol:
            raise ShapeError(f"density matrix has eigenvalue {low:.3e} < -{tol:g}")
        return low
