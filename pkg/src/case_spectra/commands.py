"""Spectrum, convergence, m-sweep and dispersion drivers behind the command line."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dispersion import ROOT_VERIFY, big_lambda, big_lambda_many, lambda_pv
from .errors import InconsistencyError
from .markel import build_markel
from .phase import PhaseFunction, make_custom, make_henyey_greenstein, make_isotropic, read_coefficients
from .tridiag_eigen import all_eigenvalues, eigenvalues_by_index, eigenvectors, outside_indices, residuals

log = logging.getLogger(__name__)

EPS_DISC = 1e-6
THREADS_ENV = "CASE_SPECTRA_THREADS"


class ConfigError(ValueError):
    """Invalid run configuration (exit code 2)."""


@dataclass
class RunConfig:
    phase: str = "isotropic"
    c: float | None = None
    g: float = 0.0
    N: int | None = None
    coeff_file: str | None = None
    m: list = field(default_factory=lambda: [0])
    lmax: list = field(default_factory=lambda: [501])
    format: str = "csv"
    out: str | None = None
    oracle: bool = True
    eps_disc: float = EPS_DISC
    tol: float | None = None
    zmin: float | None = None
    zmax: float | None = None
    zcount: int = 100
    gnuplot: bool = False

    def echo(self) -> dict:
        """Settings that determine the output values (no paths, no worker counts)."""
        keys = ["phase", "c", "g", "N", "coeff_file", "m", "lmax", "oracle", "eps_disc", "tol", "zmin", "zmax", "zcount"]
        return {k: getattr(self, k) for k in keys}


def build_phase(cfg: RunConfig) -> PhaseFunction:
    if cfg.c is None:
        raise ConfigError("--c is required")
    try:
        if cfg.phase == "isotropic":
            return make_isotropic(cfg.c)
        if cfg.phase == "hg":
            if cfg.N is None:
                raise ConfigError("--phase hg needs --N (truncation order)")
            return make_henyey_greenstein(cfg.g, cfg.N, cfg.c)
        if cfg.phase == "custom":
            if not cfg.coeff_file:
                raise ConfigError("--phase custom needs --coeff-file")
            return make_custom(read_coefficients(cfg.coeff_file), cfg.c)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown phase kind {cfg.phase!r}")


def worker_count(n_jobs: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return max(1, min(cap, n_jobs))


def _run_jobs(fn, jobs):
    jobs = list(jobs)
    workers = worker_count(len(jobs))
    if workers == 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: fn(*j), jobs))


@dataclass(frozen=True)
class EigenRecord:
    value: float
    kind: str
    matrix_residual: float
    oracle_lambda: float | None


@dataclass
class SpectrumResult:
    m: int
    l_max: int
    phase: dict
    eigenvalues: list
    elapsed: float = 0.0

    def discrete(self) -> np.ndarray:
        return np.array([r.value for r in self.eigenvalues if r.kind == "discrete"])


def _oracle_enabled(p, m, oracle):
    return oracle and abs(m) <= p.order


def _classify(p, m, values, oracle, eps_disc):
    """Kinds and oracle values for a set of eigenvalues."""
    use_oracle = _oracle_enabled(p, m, oracle)
    outside = np.abs(values) > 1.0 + eps_disc
    lam = [None] * len(values)
    if use_oracle and outside.any():
        for i, s in zip(np.flatnonzero(outside), big_lambda_many(p, m, values[outside])):
            lam[i] = s.value
    kinds = []
    for i, v in enumerate(values):
        ok = outside[i] and (not use_oracle or abs(lam[i]) < ROOT_VERIFY)
        if outside[i] and not ok:
            # typical for small l_max: the truncated matrix has not converged yet
            log.info("m=%d: eigenvalue %.17g is not a root to %g (|Lambda| = %.3g)", m, v, ROOT_VERIFY, abs(lam[i]))
        kinds.append("discrete" if ok else "continuum")
    n_pos = sum(1 for v, k in zip(values, kinds) if k == "discrete" and v > 0)
    bound = p.order - abs(m) + 1
    if n_pos > max(bound, 0):
        raise InconsistencyError(f"m={m}: {n_pos} positive discrete eigenvalues exceed the bound N-|m|+1 = {bound}")
    return kinds, lam


def compute_spectrum(p: PhaseFunction, m: int, l_max: int, oracle: bool = True, eps_disc: float = EPS_DISC, tol=None) -> SpectrumResult:
    """Full spectrum of ``B^m`` with residuals and discrete/continuum classification."""
    t0 = time.perf_counter()
    T = build_markel(p, m, l_max)
    values = all_eigenvalues(T, tol)
    res = residuals(T, values, eigenvectors(T, values))
    kinds, lam = _classify(p, m, values, oracle, eps_disc)
    records = [EigenRecord(float(v), k, float(r), None if o is None else float(o)) for v, k, r, o in zip(values, kinds, res, lam)]
    return SpectrumResult(m, l_max, p.describe(), records, time.perf_counter() - t0)


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    l_max: int
    largest: float
    discrete: tuple


def convergence_point(p: PhaseFunction, m: int, l_max: int, oracle=True, eps_disc=EPS_DISC, tol=None) -> ConvergenceRow:
    """Largest eigenvalue and discrete set without resolving the continuum."""
    T = build_markel(p, m, l_max)
    threshold = 1.0 + eps_disc
    idx = outside_indices(T, threshold)
    if T.dim - 1 not in idx:
        idx.append(T.dim - 1)
    vals = eigenvalues_by_index(T, idx, tol)
    largest = float(vals[-1])
    outside = vals[np.abs(vals) > threshold]
    kinds, _ = _classify(p, m, outside, oracle, eps_disc)
    disc = tuple(float(v) for v, k in zip(outside, kinds) if k == "discrete")
    return ConvergenceRow(m, l_max, largest, disc)


def _check_lists(cfg):
    if not cfg.m:
        raise ConfigError("--m needs at least one value")
    if not cfg.lmax:
        raise ConfigError("--lmax needs at least one value")
    for m in cfg.m:
        for L in cfg.lmax:
            if L < abs(m):
                raise ConfigError(f"--lmax {L} is below |m| = {abs(m)}")
    if cfg.eps_disc < 0:
        raise ConfigError("--eps-disc must be nonnegative")
    if cfg.tol is not None and not cfg.tol > 0:
        raise ConfigError("--tol must be positive")


def cmd_spectrum(cfg: RunConfig):
    p = build_phase(cfg)
    _check_lists(cfg)
    jobs = [(p, m, L, cfg.oracle, cfg.eps_disc, cfg.tol) for m in sorted(cfg.m) for L in sorted(cfg.lmax)]
    results = _run_jobs(compute_spectrum, jobs)
    header = ["m", "l_max", "index", "eigenvalue", "kind", "matrix_residual", "oracle_lambda"]
    rows = []
    for res in results:
        log.info("m=%d l_max=%d: %d eigenvalues in %.3f s", res.m, res.l_max, len(res.eigenvalues), res.elapsed)
        for i, r in enumerate(res.eigenvalues):
            rows.append([res.m, res.l_max, i, r.value, r.kind, r.matrix_residual, r.oracle_lambda])
    return header, rows, results


def cmd_converge(cfg: RunConfig):
    p = build_phase(cfg)
    _check_lists(cfg)
    if len(set(cfg.lmax)) < 2:
        raise ConfigError("converge needs at least two distinct --lmax values")
    if len(cfg.m) != 1:
        raise ConfigError("converge takes a single --m value")
    m = cfg.m[0]
    jobs = [(p, m, L, cfg.oracle, cfg.eps_disc, cfg.tol) for L in sorted(set(cfg.lmax))]
    results = _run_jobs(convergence_point, jobs)
    header = ["l_max", "largest_eigenvalue", "n_discrete"]
    rows = [[r.l_max, r.largest, len(r.discrete)] for r in results]
    return header, rows, results


def cmd_msweep(cfg: RunConfig):
    p = build_phase(cfg)
    _check_lists(cfg)
    if len(cfg.lmax) != 1:
        raise ConfigError("msweep takes a single --lmax value")
    L = cfg.lmax[0]
    jobs = [(p, m, L, cfg.oracle, cfg.eps_disc, cfg.tol) for m in sorted(cfg.m)]
    results = _run_jobs(convergence_point, jobs)
    header = ["m", "index", "eigenvalue"]
    rows = [[r.m, i, v] for r in results for i, v in enumerate(r.discrete)]
    return header, rows, results


def cmd_dispersion(cfg: RunConfig):
    p = build_phase(cfg)
    if len(cfg.m) != 1:
        raise ConfigError("dispersion takes a single --m value")
    m = cfg.m[0]
    if abs(m) > p.order:
        raise ConfigError(f"|m| = {abs(m)} exceeds N = {p.order}; the dispersion function is undefined")
    if cfg.zmin is None or cfg.zmax is None:
        raise ConfigError("dispersion needs --zmin and --zmax")
    lo, hi = sorted((cfg.zmin, cfg.zmax))
    if cfg.zcount < 1:
        raise ConfigError("--zcount must be positive")
    # centre/half-width form keeps symmetric ranges exactly symmetric (z = 0 hits 0.0)
    z = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.linspace(-1.0, 1.0, cfg.zcount)
    if z.size > 1:
        z[0], z[-1] = lo, hi
    if lo > 1.0 or hi < -1.0:
        samples = big_lambda_many(p, m, z)
    elif -1.0 < lo and hi < 1.0:
        samples = [lambda_pv(p, m, float(v)) for v in z]
    else:
        raise ConfigError(f"z range [{lo}, {hi}] touches or straddles +-1; use |z| > 1 or |z| < 1 only")
    header = ["z", "value", "quad_nodes", "est_error"]
    rows = [[s.z, s.value, s.quad_nodes_used, s.est_error] for s in samples]
    return header, rows, samples


COMMANDS = {
    "spectrum": cmd_spectrum,
    "converge": cmd_converge,
    "msweep": cmd_msweep,
    "dispersion": cmd_dispersion,
}
