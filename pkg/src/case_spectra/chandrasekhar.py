"""Chandrasekhar polynomials ``h_l^m(nu)`` and the dispersion kernel ``gamma^m(nu, mu)``.

The polynomials obey

    nu (2l+1) sigma_l h_l - (l-m+1) h_{l+1} - (l+m) h_{l-1} = 0,

started from ``h_m = (2m-1)!!`` and ``h_{m+1} = (2m+1) nu sigma_m h_m``.  Forward
recurrence in double precision is adequate for the degrees used by the kernel
(``l <= N``); very large ``L`` far above the eigenvalue's decay scale will pick up
the growing solution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase import PhaseFunction

RECURRENCE_EPS = 1e-12


def double_factorial_odd(m: int) -> float:
    """``(2m-1)!!`` for ``m >= 0`` (equal to 1 for ``m = 0``)."""
    out = 1.0
    for k in range(1, 2 * m, 2):
        out *= k
    return out


def factorial_ratio(l: int, m: int) -> float:
    """``(l-|m|)! / (l+|m|)!`` as a product of the ``2|m|`` factors between them."""
    m = abs(m)
    out = 1.0
    for k in range(l - m + 1, l + m + 1):
        out /= k
    return out


@dataclass(frozen=True)
class ChandrasekharTable:
    """``values[l] = h_l^m(nu)`` for ``l = |m|..L``; entries below ``|m|`` are zero."""

    m: int
    nu: float
    values: np.ndarray
    L: int

    def residuals(self, p: PhaseFunction) -> np.ndarray:
        """Relative recurrence residual for every interior degree ``|m| < l < L``."""
        return _recurrence_residuals(p, self.m, self.nu, self.values)


def _recurrence_residuals(p, m, nu, h):
    m = abs(m)
    sig = p.sigmas(len(h))
    out = []
    for l in range(m + 1, len(h) - 1):
        terms = (nu * (2 * l + 1) * sig[l] * h[l], (l - m + 1) * h[l + 1], (l + m) * h[l - 1])
        scale = max(abs(t) for t in terms) or 1.0
        out.append(abs(terms[0] - terms[1] - terms[2]) / scale)
    return np.array(out)


def h_values(p: PhaseFunction, m: int, nu, L: int) -> np.ndarray:
    """Recurrence values for ``m >= 0`` and array-valued ``nu``; shape ``(L+1,) + nu.shape``."""
    nu = np.asarray(nu, dtype=float)
    sig = p.sigmas(L)
    h = np.zeros((L + 1,) + nu.shape)
    h[m] = double_factorial_odd(m)
    if L > m:
        h[m + 1] = (2 * m + 1) * nu * sig[m] * h[m]
    for l in range(m + 1, L):
        h[l + 1] = (nu * (2 * l + 1) * sig[l] * h[l] - (l + m) * h[l - 1]) / (l - m + 1)
    return h


def h_table(p: PhaseFunction, m: int, nu: float, L: int) -> ChandrasekharTable:
    if m < 0:
        raise ValueError(f"h_table takes m >= 0 (use h_negative_m for -|m|), got {m}")
    if m > p.order:
        raise ValueError(f"|m| = {m} exceeds the phase-function order N = {p.order}")
    if L < m:
        raise ValueError(f"L = {L} is below |m| = {m}")
    return ChandrasekharTable(m=m, nu=float(nu), values=h_values(p, m, float(nu), L), L=L)


def h_negative_m(table: ChandrasekharTable, l: int) -> float:
    """``h_l^{-|m|} = (-1)^|m| (l-|m|)!/(l+|m|)! h_l^{|m|}`` from a table built for ``|m|``."""
    m = abs(table.m)
    if l < m or l > table.L:
        raise ValueError(f"degree l = {l} outside [{m}, {table.L}]")
    sign = -1.0 if m % 2 else 1.0
    return sign * factorial_ratio(l, m) * float(table.values[l])


def reduced_legendre(m: int, L: int, mu) -> np.ndarray:
    """``P_l^m(mu) (1 - mu^2)^(-m/2)`` for ``m >= 0``, ``l = 0..L``, Condon-Shortley phase.

    The ``(1 - mu^2)^(m/2)`` factor of the associated Legendre function is left out
    of the recurrence altogether, so the result is a polynomial in ``mu``.
    """
    mu = np.asarray(mu, dtype=float)
    out = np.zeros((L + 1,) + mu.shape)
    if L < m:
        return out
    out[m] = (-1.0) ** m * double_factorial_odd(m)
    if L > m:
        out[m + 1] = (2 * m + 1) * mu * out[m]
    for l in range(m + 1, L):
        out[l + 1] = ((2 * l + 1) * mu * out[l] - (l + m) * out[l - 1]) / (l - m + 1)
    return out


def _gamma_weights(p, m):
    """Per-degree factors of the kernel sum, with the signed-``m`` relations folded in.

    Returns ``a`` such that ``gamma = sum_l a_l Ptilde_l^|m|(mu) h_l^|m|(nu)``.
    """
    ma = abs(m)
    sign = -1.0 if ma % 2 else 1.0
    a = np.zeros(p.order + 1)
    for l in range(ma, p.order + 1):
        r = factorial_ratio(l, ma)
        if m >= 0:
            a[l] = sign * p.coeffs[l] * (2 * l + 1) * r
        else:
            # (l-m)!/(l+m)! = 1/r, and both P and h pick up (-1)^|m| r.
            a[l] = sign * p.coeffs[l] * (2 * l + 1) / r * (sign * r) * (sign * r)
    return a


def _check_m(p, m):
    if abs(m) > p.order:
        raise ValueError(
            f"|m| = {abs(m)} exceeds the phase-function order N = {p.order}; the kernel is "
            "defined only for |m| <= N"
        )


def gamma_matrix(p: PhaseFunction, m: int, nu, mu) -> np.ndarray:
    """Kernel on the outer grid ``nu x mu``; shape ``nu.shape + mu.shape``."""
    _check_m(p, m)
    ma = abs(m)
    a = _gamma_weights(p, m)[ma:]
    h = h_values(p, ma, nu, p.order)[ma:]
    P = reduced_legendre(ma, p.order, mu)[ma:]
    h = h.reshape(h.shape[0], -1)
    P2 = P.reshape(P.shape[0], -1)
    out = (h * a[:, None]).T @ P2
    return out.reshape(np.shape(nu) + np.shape(mu))


def gamma_eval(p: PhaseFunction, m: int, nu: float, mu: float) -> float:
    if not abs(mu) < 1.0:
        raise ValueError(f"mu must lie in (-1, 1), got {mu!r}")
    return float(gamma_matrix(p, m, float(nu), float(mu)))

