"""Symmetric tridiagonal eigensolver: Sturm-sequence bisection plus inverse iteration.

Every eigenvalue index is bisected independently and for a fixed number of steps
determined by the Gershgorin width and the tolerance, so the result for a given
index does not depend on which other indices are computed alongside it or on
how the work is split across threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .markel import SymTridiag

EPS = np.finfo(float).eps
TOL_REL = 1e-13
TOL_FLOOR = 1e-300
RESIDUAL_REL = 1e-10
CLUSTER_REL = 1e-6
NEIGHBOR_REL = 1e-3
MAX_ITER = 5
MAX_RESTARTS = 3
START_SEED = 20091116


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending; ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residual_bound: float


def _pivmin(T):
    return EPS * max(T.norm_inf(), TOL_FLOOR)


def sturm_count(T: SymTridiag, x):
    """Number of eigenvalues strictly below ``x`` (scalar or array of shifts)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = T.offdiag**2
    pivmin = _pivmin(T)
    d = T.diag[0] - x
    d[d == 0.0] = -pivmin
    count = (d < 0).astype(np.int64)
    # a pivot of -pivmin may push the next one to +-inf; the count stays correct
    with np.errstate(over="ignore", divide="ignore"):
        for i in range(1, T.dim):
            d = (T.diag[i] - x) - e2[i - 1] / d
            d[d == 0.0] = -pivmin
            count += d < 0
    return int(count[0]) if scalar else count


def default_tol(T: SymTridiag) -> float:
    return max(TOL_REL * T.norm_inf(), TOL_FLOOR)


def _bisect(T, indices, tol, lo0, hi0):
    indices = np.asarray(indices, dtype=np.int64)
    lo = np.full(indices.size, lo0)
    hi = np.full(indices.size, hi0)
    steps = max(1, math.ceil(math.log2((hi0 - lo0) / tol)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        above = sturm_count(T, mid) > indices
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _bounds(T):
    norm = T.norm_inf()
    pad = 2 * _pivmin(T) + EPS * norm
    return -norm - pad, norm + pad


def eigenvalues_by_index(T: SymTridiag, indices, tol: float | None = None, workers: int = 1) -> np.ndarray:
    """Eigenvalues at the given ascending-order positions (0-based)."""
    tol = default_tol(T) if tol is None else max(float(tol), TOL_FLOOR)
    lo0, hi0 = _bounds(T)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= T.dim):
        raise ValueError(f"eigenvalue index out of range for dim {T.dim}")
    if T.dim == 1 or T.norm_inf() == 0.0:
        return np.sort(T.diag)[indices]
    workers = max(1, int(workers))
    if workers == 1 or indices.size < 2 * workers:
        return _bisect(T, indices, tol, lo0, hi0)
    chunks = np.array_split(indices, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: _bisect(T, idx, tol, lo0, hi0), chunks))
    return np.concatenate(parts)


def all_eigenvalues(T: SymTridiag, tol: float | None = None, workers: int = 1) -> np.ndarray:
    return eigenvalues_by_index(T, np.arange(T.dim), tol, workers)


def eigenvalues_outside(T: SymTridiag, threshold: float, tol: float | None = None) -> np.ndarray:
    """Only the eigenvalues with ``|nu| > threshold``, ascending.

    Bisection is restricted to the indices counted below ``-threshold`` and above
    ``+threshold``; the interior of the spectrum is never resolved.
    """
    vals = eigenvalues_by_index(T, outside_indices(T, threshold), tol)
    return vals[np.abs(vals) > threshold]


def outside_indices(T: SymTridiag, threshold: float) -> list[int]:
    """Ascending-order positions of the eigenvalues that may satisfy ``|nu| > threshold``."""
    n_low = sturm_count(T, -threshold)
    n_high = T.dim - sturm_count(T, np.nextafter(threshold, np.inf))
    return list(range(n_low)) + list(range(max(n_low, T.dim - n_high), T.dim))


def _factor(T, shifts, pivmin):
    """Tridiagonal LU with partial pivoting of ``T - s I`` for each shift (batched)."""
    n = T.dim
    k = shifts.size
    d = np.tile(T.diag, (k, 1)) - shifts[:, None]
    dl = np.tile(T.offdiag, (k, 1))
    du = dl.copy()
    du2 = np.zeros((k, max(n - 2, 0)))
    swap = np.zeros((k, max(n - 1, 0)), dtype=bool)
    for i in range(n - 1):
        s = np.abs(d[:, i]) < np.abs(dl[:, i])
        swap[:, i] = s
        di, dli, dui, dnext = d[:, i].copy(), dl[:, i].copy(), du[:, i].copy(), d[:, i + 1].copy()
        piv = np.where(s, dli, di)
        piv = np.where(piv == 0.0, pivmin, piv)
        other = np.where(s, di, dli)
        fact = other / piv
        d[:, i] = piv
        dl[:, i] = fact
        du[:, i] = np.where(s, dnext, dui)
        d[:, i + 1] = np.where(s, dui - fact * dnext, dnext - fact * dui)
        if i < n - 2:
            dunext = du[:, i + 1].copy()
            du2[:, i] = np.where(s, dunext, 0.0)
            du[:, i + 1] = np.where(s, -fact * dunext, dunext)
    last = d[:, n - 1]
    d[:, n - 1] = np.where(last == 0.0, pivmin, last)
    return d, dl, du, du2, swap


def _solve(factors, b):
    d, dl, du, du2, swap = factors
    b = b.copy()
    n = b.shape[1]
    for i in range(n - 1):
        s = swap[:, i]
        bi, bn = b[:, i].copy(), b[:, i + 1].copy()
        b[:, i] = np.where(s, bn, bi)
        b[:, i + 1] = np.where(s, bi, bn) - dl[:, i] * b[:, i]
    x = np.empty_like(b)
    x[:, n - 1] = b[:, n - 1] / d[:, n - 1]
    if n > 1:
        x[:, n - 2] = (b[:, n - 2] - du[:, n - 2] * x[:, n - 1]) / d[:, n - 2]
    for i in range(n - 3, -1, -1):
        x[:, i] = (b[:, i] - du[:, i] * x[:, i + 1] - du2[:, i] * x[:, i + 2]) / d[:, i]
    return x


def _fix_sign(V):
    """Make the first component above roundoff level positive in every row of ``V``."""
    mag = np.abs(V)
    first = np.argmax(mag > 1e-14 * mag.max(axis=1, keepdims=True), axis=1)
    signs = np.sign(V[np.arange(V.shape[0]), first])
    signs[signs == 0] = 1.0
    return V * signs[:, None]


def _residuals(T, nus, V):
    R = T.matvec(V.T).T - nus[:, None] * V
    return np.abs(R).max(axis=1)


def residuals(T: SymTridiag, nus, V) -> np.ndarray:
    """``||T v_j - nu_j v_j||_inf`` for eigenvector columns ``V[:, j]``."""
    return _residuals(T, np.asarray(nus, dtype=float), np.asarray(V).T)


def _cluster_groups(nus, gap):
    groups, cur = [], [0]
    for j in range(1, nus.size):
        if nus[j] - nus[j - 1] < gap:
            cur.append(j)
        else:
            groups.append(cur)
            cur = [j]
    groups.append(cur)
    return groups


def eigenvectors(T: SymTridiag, nus) -> np.ndarray:
    """Unit eigenvectors for the (ascending) approximate eigenvalues ``nus``.

    Returns an array of shape ``(dim, len(nus))``.  Vectors whose eigenvalues lie
    within ``1e-6 ||T||`` of each other are orthogonalized against the earlier
    members of their cluster at every iteration.
    """
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    n = T.dim
    if nus.size == 0:
        return np.zeros((n, 0))
    if np.any(np.diff(nus) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    norm = T.norm_inf()
    target = RESIDUAL_REL * max(1.0, norm)
    pivmin = _pivmin(T)
    factors = _factor(T, nus, pivmin)
    rng = np.random.default_rng(START_SEED)
    groups = _cluster_groups(nus, CLUSTER_REL * max(norm, TOL_FLOOR))
    lead = [g[0] for g in groups]
    members = [g[1:] for g in groups if len(g) > 1]

    V = np.empty((nus.size, n))
    todo = np.array(lead)
    res = np.full(nus.size, np.inf)
    for attempt in range(MAX_RESTARTS + 1):
        x = rng.uniform(-1.0, 1.0, size=(todo.size, n))
        sub = tuple(f[todo] for f in factors)
        converged_once = False
        for _ in range(MAX_ITER):
            x = _solve(sub, x)
            x /= np.linalg.norm(x, axis=1, keepdims=True)
            r = _residuals(T, nus[todo], x)
            if np.all(r <= target):
                # one extra sweep: a small residual still allows O(residual/gap) overlap
                if converged_once:
                    break
                converged_once = True
        V[todo], res[todo] = x, r
        todo = todo[r > target]
        if todo.size == 0:
            break

    for idx in members:
        for j in idx:
            prev = [i for i in range(j) if abs(nus[j] - nus[i]) < CLUSTER_REL * norm * (j - i) + 1e-300]
            ok = False
            for attempt in range(MAX_RESTARTS + 1):
                x = rng.uniform(-1.0, 1.0, size=(1, n))
                sub = tuple(f[[j]] for f in factors)
                for _ in range(MAX_ITER):
                    x = _solve(sub, x)
                    for i in prev:
                        x -= (x @ V[i]) * V[i]
                    x /= np.linalg.norm(x)
                    r = _residuals(T, nus[[j]], x)
                    if r[0] <= target:
                        if ok:
                            break
                        ok = True
                if ok:
                    break
            V[j], res[j] = x[0], r[0]

    _orthogonalize_neighbors(V, nus, NEIGHBOR_REL * max(norm, TOL_FLOOR))
    res = _residuals(T, nus, V)
    if np.any(res > target):
        worst = float(res.max())
        raise NumericalFailure(
            f"inverse iteration did not reach residual {target:.3g} (worst {worst:.3g})", residual=worst
        )
    return _fix_sign(V).T


def _orthogonalize_neighbors(V, nus, window):
    # Inverse iteration leaves O(eps ||T|| / gap) overlap between close eigenvalues.
    lo = 0
    for j in range(1, nus.size):
        while nus[j] - nus[lo] >= window:
            lo += 1
        if lo == j:
            continue
        block = V[lo:j]
        for _ in range(2):
            V[j] -= (block @ V[j]) @ block
        V[j] /= np.linalg.norm(V[j])


def eigenvector(T: SymTridiag, nu: float) -> np.ndarray:
    return eigenvectors(T, [nu])[:, 0]


def decompose(T: SymTridiag, vectors: bool = False, tol: float | None = None, workers: int = 1) -> EigenDecomposition:
    vals = all_eigenvalues(T, tol, workers)
    if not vectors:
        return EigenDecomposition(vals, None, float("nan"))
    V = eigenvectors(T, vals)
    return EigenDecomposition(vals, V, float(_residuals(T, vals, V.T).max()))
