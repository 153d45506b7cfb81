"""Brute-force references that share no code with the package."""
import numpy as np


def charpoly(diag, offdiag, x, k=None):
    """det(T_k - x I) of the leading k x k block via the determinant recurrence."""
    k = len(diag) if k is None else k
    p_prev, p = 1.0, diag[0] - x
    for i in range(1, k):
        p_prev, p = p, (diag[i] - x) * p - offdiag[i - 1] ** 2 * p_prev
    return p


def _bisect_sign(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def charpoly_eigenvalues(diag, offdiag):
    """Eigenvalues of an unreduced symmetric tridiagonal by exhaustive bisection.

    Roots of the leading k x k determinant strictly interlace those of the
    (k-1) x (k-1) one, so the previous roots plus outer bounds bracket every new
    root with exactly one sign change.
    """
    diag = np.asarray(diag, float)
    offdiag = np.asarray(offdiag, float)
    bound = np.abs(diag).sum() + 2 * np.abs(offdiag).sum() + 1.0
    roots = []
    for k in range(1, len(diag) + 1):
        edges = [-bound] + roots + [bound]
        f = lambda x: charpoly(diag, offdiag, x, k)
        roots = [_bisect_sign(f, edges[i], edges[i + 1]) for i in range(k)]
    return np.array(roots)


# Lambda^m(z) for Henyey-Greenstein g = 0.9, N = 9, c = 0.9, computed with mpmath
# (adaptive tanh-sinh on the unreduced integrand at 40-120 significant digits).
HG_LAMBDA_MP = [
    (0, 1.001, 2.1931241288401517),
    (0, 1.1, 0.0030882643873375542),
    (1, 1.001, -0.11955273683601248),
    (0, 8.0, 2.3093738653751881e-5),
    (0, 12.0, 3.2288023977191858e-5),
    (3, 12.0, 0.0076446695140118115),
    (5, 20.0, 0.05538408930418497),
    (9, 50.0, 0.65131491805936231),
    (0, 1e6, 4.027948736982117e-5),
    (2, -7.0, 0.001882517234970871),
]
