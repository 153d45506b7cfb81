"""Scattering phase functions given by their Legendre expansion coefficients.

A phase function of order ``N`` is described by ``f_0..f_N`` together with the
scattering constant ``c``.  The per-degree weights ``sigma_l = 1 - c f_l`` (and
``sigma_l = 1`` above ``N``) are what the rest of the package consumes.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

F0_TOL = 1e-12


@dataclass(frozen=True)
class PhaseFunction:
    """Immutable phase function: expansion coefficients ``coeffs`` and constant ``c``.

    ``kind`` and ``params`` only describe where the coefficients came from and are
    echoed in run metadata.
    """

    coeffs: tuple
    c: float
    kind: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        coeffs = tuple(float(f) for f in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "c", float(self.c))
        _check_c(self.c)
        if not coeffs:
            raise DomainError("a phase function needs at least the coefficient f_0")
        if abs(coeffs[0] - 1.0) > F0_TOL:
            raise DomainError(f"f_0 must equal 1 (normalization), got {coeffs[0]!r}")
        for l, f in enumerate(coeffs):
            if not np.isfinite(f) or abs(f) > 1.0:
                raise DomainError(f"|f_{l}| must not exceed 1, got {f!r}")
            if 1.0 - self.c * f <= 0.0:
                raise DomainError(f"sigma_{l} = 1 - c*f_{l} is not positive")

    @property
    def order(self) -> int:
        """Polynomial order ``N`` of the expansion."""
        return len(self.coeffs) - 1

    def sigmas(self, l_max: int) -> np.ndarray:
        """Array ``[sigma_0, ..., sigma_{l_max}]``."""
        return np.array([sigma(self, l) for l in range(l_max + 1)])

    def describe(self) -> dict:
        out = {"kind": self.kind, "c": self.c, "N": self.order}
        out.update(dict(self.params))
        if self.kind == "custom":
            out["coeffs"] = list(self.coeffs)
        return out


def _check_c(c):
    if not (0.0 < c < 1.0):
        raise DomainError(
            f"c must lie strictly inside (0, 1), got {c!r}; for c >= 1 sigma_0 can "
            "vanish and the symmetrized matrix is no longer real symmetric"
        )


def make_isotropic(c: float) -> PhaseFunction:
    return PhaseFunction((1.0,), c, kind="isotropic")


def make_henyey_greenstein(g: float, N: int, c: float) -> PhaseFunction:
    """Henyey-Greenstein model truncated at order ``N``: ``f_l = g**l``."""
    if not (-1.0 <= g <= 1.0):
        raise DomainError(f"g must lie in [-1, 1], got {g!r}")
    if int(N) != N or N < 0:
        raise DomainError(f"N must be a nonnegative integer, got {N!r}")
    _check_c(c)
    coeffs = [1.0]
    for _ in range(int(N)):
        coeffs.append(coeffs[-1] * g)
    return PhaseFunction(tuple(coeffs), c, kind="hg", params=(("g", float(g)),))


def make_custom(coeffs, c: float) -> PhaseFunction:
    return PhaseFunction(tuple(coeffs), c, kind="custom")


def read_coefficients(path) -> list[float]:
    """Read one coefficient per line; blank lines and ``#`` comments are skipped.

    Raises ValueError whose message names the offending line.
    """
    coeffs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            coeffs.append(float(text))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {raw.strip()!r}") from None
    if not coeffs:
        raise ValueError(f"{path}: no coefficients found")
    return coeffs


def sigma(p: PhaseFunction, l: int) -> float:
    if l < 0:
        raise ValueError(f"degree l must be nonnegative, got {l}")
    if l > p.order:
        return 1.0
    return 1.0 - p.c * p.coeffs[l]
