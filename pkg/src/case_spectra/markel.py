"""Markel's symmetric tridiagonal matrix ``B^m``.

Rows and columns are indexed by degree ``l = |m|..l_max``, so the matrix has
``l_max - |m| + 1`` rows.  With this convention ``l_max`` plays the role of the
matrix size parameter ``N_B`` used in published convergence tables: the
isotropic ``c = 0.9`` values 1.8257 / 1.9027 / 1.9032 appear at
``l_max = 1 / 3 / 5``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chandrasekhar import double_factorial_odd, factorial_ratio
from .errors import PreconditionError
from .phase import PhaseFunction, sigma


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix stored as ``diag`` and ``offdiag``."""

    diag: np.ndarray
    offdiag: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size == 0 or e.shape != (d.size - 1,):
            raise ValueError(f"need len(offdiag) == len(diag) - 1 >= 0, got {d.shape} / {e.shape}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return self.diag.size

    def norm_inf(self) -> float:
        """Maximum absolute row sum."""
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        if self.dim > 1:
            e = self.offdiag[:, None] if v.ndim == 2 else self.offdiag
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def leading(self, k: int) -> "SymTridiag":
        """Leading ``k x k`` principal submatrix."""
        return SymTridiag(self.diag[:k], self.offdiag[: k - 1], dict(self.meta))

    def dumps(self) -> str:
        fmt = lambda xs: " ".join(f"{x:.17e}" for x in xs)
        return f"{self.dim}\n{fmt(self.diag)}\n{fmt(self.offdiag)}\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "SymTridiag":
        lines = text.split("\n")
        if len(lines) < 3:
            raise ValueError("matrix dump needs three lines: dim, diag, offdiag")
        dim = int(lines[0])
        diag = [float(x) for x in lines[1].split()]
        offdiag = [float(x) for x in lines[2].split()]
        if len(diag) != dim:
            raise ValueError(f"line 2: expected {dim} diagonal values, got {len(diag)}")
        return cls(np.array(diag), np.array(offdiag))

    @classmethod
    def load(cls, path) -> "SymTridiag":
        return cls.loads(Path(path).read_text())


def build_markel(p: PhaseFunction, m: int, l_max: int) -> SymTridiag:
    ma = abs(m)
    if l_max < ma:
        raise ValueError(f"l_max = {l_max} is below |m| = {ma}")
    off = np.empty(l_max - ma)
    for k, l in enumerate(range(ma, l_max)):
        lp = l + 1
        off[k] = math.sqrt((lp * lp - ma * ma) / ((4 * lp * lp - 1) * sigma(p, lp) * sigma(p, l)))
    meta = {"m": m, "l_max": l_max, "phase": p.describe()}
    return SymTridiag(np.zeros(l_max - ma + 1), off, meta)


def symmetrized_chandrasekhar(p: PhaseFunction, m: int, h: np.ndarray, l_max: int) -> np.ndarray:
    """``psi_l = sqrt(sigma_l (2l+1) (l-m)!/(l+m)!) h_l`` for ``l = |m|..l_max``.

    Under this scaling the Chandrasekhar recurrence is exactly the row equation
    ``(B^m psi)_l = nu psi_l`` for interior rows.
    """
    ma = abs(m)
    ls = range(ma, l_max + 1)
    w = np.array([math.sqrt(sigma(p, l) * (2 * l + 1) * factorial_ratio(l, ma)) for l in ls])
    return w * np.asarray(h)[ma : l_max + 1]


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Spherical-harmonic coefficients ``c_l`` (``l = |m|..``) of an eigenfunction.

    ``h`` holds the Chandrasekhar moments implied by ``c`` and ``Z`` the squared
    scale relating the unit eigenvector to ``sqrt(sigma_l) c_l``.
    """

    m: int
    nu: float
    c: np.ndarray
    h: np.ndarray
    Z: float


def coefficients_from_eigenvector(p: PhaseFunction, m: int, psi, nu: float, l_max: int | None = None):
    """Undo the sigma-symmetrization of an eigenvector of ``B^m``.

    ``c_l = sqrt(Z) psi_l / sqrt(sigma_l)``; ``Z`` is fixed by requiring the
    lowest moment ``h_|m|`` to equal ``(2|m|-1)!!``, where
    ``c_l = 2 pi (-1)^m sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) h_l``.
    """
    ma = abs(m)
    psi = np.asarray(psi, dtype=float)
    if l_max is None:
        l_max = ma + psi.size - 1
    if psi.ndim != 1 or psi.size != l_max - ma + 1:
        raise ValueError(f"eigenvector length {psi.size} does not match dim {l_max - ma + 1}")
    if psi[0] == 0.0:
        raise PreconditionError("leading eigenvector component is zero; normalization undefined")
    ls = np.arange(ma, l_max + 1)
    sig = np.array([sigma(p, int(l)) for l in ls])
    sign = -1.0 if ma % 2 else 1.0
    ylm_norm = np.array([math.sqrt((2 * l + 1) / (4 * math.pi) * factorial_ratio(int(l), ma)) for l in ls])
    to_c = 2 * math.pi * sign * ylm_norm
    raw = psi / np.sqrt(sig)
    scale = to_c[0] * double_factorial_odd(ma) / raw[0]
    c = scale * raw
    return ExpansionCoefficients(m=m, nu=float(nu), c=c, h=c / to_c, Z=scale * scale)
