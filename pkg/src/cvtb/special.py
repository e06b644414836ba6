"""
Associated Laguerre polynomials and exact displacement-operator matrix elements.
"""

from __future__ import annotations

from math import lgamma

import numpy as np

__all__ = [
    "laguerre_assoc",
    "laguerre_derivative",
    "displacement_matrix_element",
    "displacement_matrices",
]


def laguerre_assoc(n: int, l: int, x):
    """Generalized Laguerre polynomial ``L_n^{(l)}(x)``.

    Evaluated with the upward three-term recurrence in ``n`` at fixed ``l``::

        (k+1) L_{k+1} = (2k + 1 + l - x) L_k - (k + l) L_{k-1}

    Parameters
    ----------
    n, l : int
        Degree and order, both non-negative.
    x : float or array_like
        Evaluation points.

    Returns
    -------
    float or numpy.ndarray
        Same shape as ``x``.
    """
    if n < 0 or l < 0:
        raise ValueError(f"degree and order must be non-negative, got n={n}, l={l}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + l - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + l - x) * cur - (k + l) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_derivative(n: int, l: int, x):
    """``(-d/dx)^l L_n(x)``, which equals ``L_{n-l}^{(l)}(x)`` (zero when ``l > n``)."""
    if l > n:
        return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
    return laguerre_assoc(n - l, l, x)


def _sqrt_fact_ratio(k: int, l: int) -> float:
    # sqrt(k! / (k+l)!)
    return float(np.exp(0.5 * (lgamma(k + 1) - lgamma(k + l + 1))))


def displacement_matrix_element(n: int, n_prime: int, xi):
    """``<n| D(xi) |n'>`` for the untruncated displacement operator.

    For ``n >= n'``::

        <n|D(xi)|n'> = sqrt(n'!/n!) xi^(n-n') exp(-|xi|^2/2) L_{n'}^{(n-n')}(|xi|^2)

    and ``<n|D(xi)|n'> = <n'|D(-xi)|n>^*`` otherwise.
    ``xi`` may be an array; the result has the same shape.
    """
    xi = np.asarray(xi, dtype=complex)
    x = np.abs(xi) ** 2
    gauss = np.exp(-0.5 * x)
    if n >= n_prime:
        l, k = n - n_prime, n_prime
        out = _sqrt_fact_ratio(k, l) * xi**l * gauss * laguerre_assoc(k, l, x)
    else:
        l, k = n_prime - n, n
        out = _sqrt_fact_ratio(k, l) * (-np.conj(xi)) ** l * gauss * laguerre_assoc(k, l, x)
    return out if out.ndim else complex(out)


def displacement_matrices(xi, n_max: int) -> np.ndarray:
    """Truncated blocks ``<m|D(xi_p)|n>`` for a batch of amplitudes.

    Parameters
    ----------
    xi : array_like, shape (P,)
        Displacement amplitudes.
    n_max : int
        Number of Fock levels kept.

    Returns
    -------
    numpy.ndarray, shape (P, n_max, n_max)
        Exact matrix elements of the infinite-dimensional operator,
        restricted to ``m, n < n_max``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    x = np.abs(xi) ** 2
    gauss = np.exp(-0.5 * x)
    out = np.empty((xi.size, n_max, n_max), dtype=complex)
    # sqrt(k!/(k+l)!) for all k + l < n_max
    lg = np.array([lgamma(j + 1) for j in range(n_max)])
    lower_pow = np.ones_like(xi)
    upper_pow = np.ones_like(xi)
    for l in range(n_max):
        # L_k^{(l)}(x) for k = 0 .. n_max-1-l by recurrence, vectorised over points
        lag_km2 = lag_km1 = None
        for k in range(n_max - l):
            if k == 0:
                lag = np.ones_like(x)
            elif k == 1:
                lag = 1.0 + l - x
            else:
                lag = ((2 * k - 1 + l - x) * lag_km1 - (k - 1 + l) * lag_km2) / k
            lag_km2, lag_km1 = lag_km1, lag
            base = np.exp(0.5 * (lg[k] - lg[k + l])) * gauss * lag
            out[:, k + l, k] = base * lower_pow
            if l:
                out[:, k, k + l] = base * upper_pow
        lower_pow = lower_pow * xi
        upper_pow = upper_pow * (-np.conj(xi))
    return out
