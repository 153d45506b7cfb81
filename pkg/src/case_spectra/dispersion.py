"""The dispersion function ``Lambda^m(z)`` off the cut and ``lambda^m(nu)`` on it.

For ``|z| > 1``

    Lambda^m(z) = 1 - (c z / 2) int_{-1}^{1} gamma^m(z, mu) (1 - mu^2)^|m| / (z - mu) dmu

is evaluated by Gauss-Legendre quadrature with node doubling.  Quadrature of the
full integrand cancels badly once ``|z|`` is well away from the cut, because
``h_l(z)`` grows like ``z^l`` while the integral decays.  There the kernel sum is
pulled out of the integral instead: the moments
``q_l(z) = int Ptilde_l (1 - mu^2)^|m| / (z - mu) dmu`` obey the Legendre recurrence
for ``l > |m|`` and are its minimal solution, so they come from Miller's backward
recurrence normalised by ``q_|m|``, which is the only integral left to the node
doubling.  Near the cut Miller's start index grows without bound and the direct
integrand (where ``h_l`` stays moderate) is used.  Samples that fail to settle by
the node cap are flagged rather than raised.  Zeros of ``Lambda^m`` are found independently of the matrix route and
serve as its oracle.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .chandrasekhar import _check_m, _gamma_weights, gamma_matrix, h_values, reduced_legendre
from .errors import InconsistencyError, PreconditionError
from .markel import build_markel
from .phase import PhaseFunction
from .quadrature import gauss_legendre
from .tridiag_eigen import eigenvalues_by_index, eigenvalues_outside

log = logging.getLogger(__name__)

NODES_START = 32
NODES_CAP = 4096
CONVERGE_REL = 1e-13
FLAG_REL = 1e-12
PV_WINDOW = 1e-8
PV_FD_STEP = 1e-6
ROOT_VERIFY = 1e-8
SCAN_POINTS = 512
SCAN_EDGE = 1e-3
SCAN_EXTRA_DEGREES = 40
SEED_HALF_WIDTH = 1e-7
MILLER_DIGITS = 17.0
MILLER_MAX_STEPS = 4000
_RESCALE = 1e200


@dataclass(frozen=True)
class DispersionSample:
    z: float
    value: float
    quad_nodes_used: int
    est_error: float
    converged: bool = True


def _lambda_integral(p, m, z, n):
    """Quadrature of the full Lambda integrand for an array of ``z`` with ``n`` nodes."""
    x, w = gauss_legendre(n)
    g = gamma_matrix(p, m, z, x) * (1.0 - x * x) ** abs(m)
    return (g / (z[:, None] - x[None, :])) @ w


def _miller_steps(z):
    """Extra degrees above ``N`` for the backward recurrence to reach full precision."""
    az = np.abs(z)
    rho = az + np.sqrt((az - 1.0) * (az + 1.0))
    return np.ceil(0.5 * MILLER_DIGITS / np.log10(rho)) + 10


def _moment_ratios(ma, L, z, extra):
    """``q_l / q_ma`` for ``l = ma..L`` by backward recurrence, shape ``(L-ma+1, nz)``."""
    start = L + extra.astype(np.int64)
    top = int(start.max())
    cur = np.zeros_like(z)
    nxt = np.zeros_like(z)
    out = np.zeros((L - ma + 1, z.size))
    for l in range(top, ma - 1, -1):
        begin = start == l
        cur[begin], nxt[begin] = 1.0, 0.0
        if l <= L:
            out[l - ma] = cur
        if l == ma:
            break
        prev = ((2 * l + 1) * z * cur - (l - ma + 1) * nxt) / (l + ma)
        nxt, cur = cur, prev
        big = np.abs(cur) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / np.abs(cur), 1.0)
            cur, nxt, out = cur * scale, nxt * scale, out * scale
    return out / out[0]


def _base_moment(ma, z, n):
    x, w = gauss_legendre(n)
    p0 = reduced_legendre(ma, ma, x)[ma]
    return ((p0 * (1.0 - x * x) ** ma) / (z[:, None] - x[None, :])) @ w


def _doubling(evaluate, z):
    """Run ``evaluate(z_subset, n)`` with ``n`` doubling from NODES_START to NODES_CAP."""
    values = np.empty_like(z)
    errors = np.full_like(z, np.inf)
    nodes = np.zeros(z.shape, dtype=np.int64)
    todo = np.arange(z.size)
    n = NODES_START
    prev = evaluate(todo, n)
    while todo.size and n < NODES_CAP:
        n *= 2
        cur = evaluate(todo, n)
        diff = np.abs(cur - prev[todo])
        values[todo], errors[todo], nodes[todo] = cur, diff, n
        prev[todo] = cur
        todo = todo[diff >= CONVERGE_REL * np.maximum(1.0, np.abs(cur))]
    converged = errors <= FLAG_REL * np.maximum(1.0, np.abs(values))
    return values, nodes, errors, converged


def _big_lambda_batch(p, m, z):
    z = np.asarray(z, dtype=float)
    ma, N = abs(m), p.order
    extra = _miller_steps(z)
    far = extra <= MILLER_MAX_STEPS
    values = np.empty_like(z)
    nodes = np.zeros(z.shape, dtype=np.int64)
    errors = np.empty_like(z)
    converged = np.empty(z.shape, dtype=bool)

    if far.any():
        zf = z[far]
        a = _gamma_weights(p, m)[ma:]
        h = h_values(p, ma, zf, N)[ma:]
        ratios = _moment_ratios(ma, N, zf, extra[far])
        kernel = 0.5 * p.c * zf * np.einsum("l,lk,lk->k", a, h, ratios)
        ev = lambda idx, n: 1.0 - kernel[idx] * _base_moment(ma, zf[idx], n)
        out = _doubling(ev, zf)
        values[far], nodes[far], errors[far], converged[far] = out
    if not far.all():
        zn = z[~far]
        ev = lambda idx, n: 1.0 - 0.5 * p.c * zn[idx] * _lambda_integral(p, m, zn[idx], n)
        out = _doubling(ev, zn)
        values[~far], nodes[~far], errors[~far], converged[~far] = out
    return values, nodes, errors, converged


def big_lambda(p: PhaseFunction, m: int, z: float) -> DispersionSample:
    _check_m(p, m)
    if not abs(z) > 1.0:
        raise ValueError(f"Lambda^m(z) needs |z| > 1, got {z!r}; use lambda_pv inside the cut")
    v, n, e, ok = _big_lambda_batch(p, m, np.array([float(z)]))
    if not ok[0]:
        log.warning("Lambda^%d(%r) did not converge by %d nodes (est. error %.3g)", m, z, n[0], e[0])
    return DispersionSample(float(z), float(v[0]), int(n[0]), float(e[0]), bool(ok[0]))


def big_lambda_many(p: PhaseFunction, m: int, zs) -> list[DispersionSample]:
    """Vectorized :func:`big_lambda` over many points."""
    _check_m(p, m)
    zs = np.asarray(zs, dtype=float)
    if np.any(np.abs(zs) <= 1.0):
        raise ValueError("Lambda^m(z) needs |z| > 1 at every point")
    v, n, e, ok = _big_lambda_batch(p, m, zs)
    return [DispersionSample(float(a), float(b), int(c), float(d), bool(f)) for a, b, c, d, f in zip(zs, v, n, e, ok)]


def _pv_integral(p, m, nu, n):
    x, w = gauss_legendre(n)
    ma = abs(m)
    g = lambda mu: gamma_matrix(p, m, nu, mu) * (1.0 - mu * mu) ** ma
    g_nu = float(g(np.array(nu)))
    gx = g(x)
    delta = nu - x
    near = np.abs(delta) < PV_WINDOW
    q = np.empty_like(x)
    q[~near] = (gx[~near] - g_nu) / delta[~near]
    if near.any():
        deriv = (float(g(np.array(nu + PV_FD_STEP))) - float(g(np.array(nu - PV_FD_STEP)))) / (2 * PV_FD_STEP)
        q[near] = -deriv
    return q @ w + g_nu * np.log((1.0 + nu) / (1.0 - nu))


def lambda_pv(p: PhaseFunction, m: int, nu: float) -> DispersionSample:
    """``lambda^m(nu)`` for ``|nu| < 1`` via singularity subtraction.

    The principal-value integral of ``g(mu)/(nu - mu)`` is split into the smooth
    integral of ``(g(mu) - g(nu))/(nu - mu)`` and ``g(nu) ln((1+nu)/(1-nu))``.
    """
    _check_m(p, m)
    nu = float(nu)
    if not abs(nu) < 1.0:
        raise ValueError(f"lambda^m(nu) needs |nu| < 1, got {nu!r}")
    n = NODES_START
    prev = 1.0 - 0.5 * p.c * nu * _pv_integral(p, m, nu, n)
    while True:
        n *= 2
        cur = 1.0 - 0.5 * p.c * nu * _pv_integral(p, m, nu, n)
        err = abs(cur - prev)
        scale = max(1.0, abs(cur))
        if err < CONVERGE_REL * scale or n >= NODES_CAP:
            break
        prev = cur
    return DispersionSample(nu, float(cur), n, float(err), bool(err <= FLAG_REL * scale))


def _scan_grid(p, m):
    T = build_markel(p, m, p.order + SCAN_EXTRA_DEGREES)
    top = float(eigenvalues_by_index(T, [T.dim - 1])[0])
    seeds = eigenvalues_outside(T, 1.0)
    seeds = seeds[seeds > 1.0]
    hi = 1.5 * max(top, 1.0)
    grid = 1.0 + (hi - 1.0) * np.geomspace(SCAN_EDGE / (hi - 1.0), 1.0, SCAN_POINTS)
    pts = np.concatenate([grid, seeds * (1 - SEED_HALF_WIDTH), seeds * (1 + SEED_HALF_WIDTH)])
    pts = pts[pts > 1.0]
    return np.unique(pts)


def _refine(p, m, a, b):
    f = lambda z: float(_big_lambda_batch(p, m, np.array([z]))[0][0])
    return brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)


def find_roots(p: PhaseFunction, m: int, brackets=None) -> np.ndarray:
    """Real zeros of ``Lambda^m`` with ``|z| > 1``, ascending and symmetric about zero.

    Without explicit ``brackets`` the positive axis ``(1, 1.5 nu_max]`` is scanned on
    a geometric grid refined around the matrix eigenvalues of ``B^m`` at
    ``l_max = N + 40``; the eigenvalues only place extra sample points, every root
    comes from a sign change of ``Lambda^m`` itself.
    """
    _check_m(p, m)
    bound = p.order - abs(m) + 1
    roots = []
    if brackets is None:
        z = _scan_grid(p, m)
        vals, _, _, ok = _big_lambda_batch(p, m, z)
        for i in range(z.size - 1):
            if not (ok[i] and ok[i + 1]):
                continue
            if vals[i] == 0.0:
                roots.append(z[i])
            elif vals[i] * vals[i + 1] < 0:
                roots.append(_refine(p, m, z[i], z[i + 1]))
        if ok[-1] and vals[-1] == 0.0:
            roots.append(z[-1])
    else:
        for a, b in brackets:
            a, b = sorted((abs(float(a)), abs(float(b))))
            if a <= 1.0:
                raise ValueError(f"bracket ({a}, {b}) must lie outside [-1, 1]")
            v = _big_lambda_batch(p, m, np.array([a, b]))[0]
            if v[0] * v[1] > 0:
                raise ValueError(f"Lambda^{m} does not change sign on ({a}, {b})")
            roots.append(_refine(p, m, a, b))
    roots = np.unique(np.array(roots, dtype=float))
    if roots.size > 1:
        keep = np.concatenate([[True], np.diff(roots) > 1e-10 * roots[1:]])
        roots = roots[keep]
    if roots.size > bound:
        raise InconsistencyError(
            f"found {roots.size} positive roots of Lambda^{m} but at most N-|m|+1 = {bound} exist"
        )
    return np.concatenate([-roots[::-1], roots])


def eval_phi_discrete(p: PhaseFunction, m: int, nu: float, mu):
    """Regular part ``(c nu / 2) gamma^m(nu, mu) / (nu - mu)`` of a discrete eigenfunction."""
    _check_m(p, m)
    nu = float(nu)
    if not abs(nu) > 1.0:
        raise PreconditionError(f"discrete eigenvalues satisfy |nu| > 1, got {nu!r}")
    check = big_lambda(p, m, nu)
    if not abs(check.value) < ROOT_VERIFY:
        raise PreconditionError(f"nu = {nu!r} is not a verified root: |Lambda^{m}(nu)| = {abs(check.value):.3g}")
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu_arr) >= 1.0):
        raise ValueError("mu must lie in (-1, 1)")
    out = 0.5 * p.c * nu * gamma_matrix(p, m, nu, mu_arr) / (nu - mu_arr)
    return float(out) if out.ndim == 0 else out
