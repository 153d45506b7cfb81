"""Gauss-Legendre rules from Newton iteration on the three-term recurrence."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_NEWTON = 10


def _legendre_and_derivative(n, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (p0 - x * p1) / (1.0 - x * x)
    return p1, dp


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (ascending) and weights of the ``n``-point rule on ``[-1, 1]``.

    Only the nonnegative half is iterated; the rule is mirrored.  Arrays are
    read-only because they are cached.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    half = (n + 1) // 2
    k = np.arange(1, half + 1)
    # Tricomi's asymptotic guess for the k-th largest root.
    theta = np.pi * (4 * k - 1) / (4 * n + 2)
    x = np.cos(theta) * (1.0 - (n - 1) / (8.0 * n**3))
    for _ in range(MAX_NEWTON):
        p, dp = _legendre_and_derivative(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < 1e-16:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2:
        x[-1] = 0.0
        nodes = np.concatenate([-x, x[-2::-1]])
        weights = np.concatenate([w, w[-2::-1]])
    else:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
