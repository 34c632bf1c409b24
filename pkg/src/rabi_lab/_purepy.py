"""Pure Python/numpy versions of the numerical kernels.

Used when the compiled ``_core`` extension is unavailable, or when
``RABI_LAB_PURE=1`` is set. Every function here has the same signature and
return convention as its counterpart in ``_core.pyx``.
"""
import math

import numpy as np

_EPS = np.finfo(float).eps
_RESCALE = 1e250


def tridiag_ql(d, e, vectors=True, max_iter=50):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    Parameters
    ----------
    d : ndarray, shape (n,)
        Diagonal.
    e : ndarray, shape (n-1,)
        Sub/super-diagonal.
    vectors : bool
        Accumulate eigenvectors.
    max_iter : int
        Iteration cap per eigenvalue.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues, unsorted.
    z : ndarray, shape (n, n) or None
        ``z[i]`` is the eigenvector belonging to ``w[i]``.
    status : int
        -1 on success, otherwise the index whose iteration stalled.
    """
    n = len(d)
    d = np.array(d, dtype=float)
    ework = np.zeros(n)
    ework[: n - 1] = e
    z = np.eye(n) if vectors else None
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ework[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return d, z, l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * ework[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + ework[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * ework[i]
                b = c * ework[i]
                r = math.hypot(f, g)
                ework[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ework[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if vectors:
                    zi = z[i].copy()
                    zi1 = z[i + 1]
                    z[i] = c * zi - s * zi1
                    z[i + 1] = s * zi + c * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            ework[l] = g
            ework[m] = 0.0
    return d, z, -1


def displacement_matrix(beta, size):
    """Real matrix ``D[m, n] = <m| exp(beta (a^+ - a)) |n>`` for real beta.

    Each diagonal ``m - n = k`` is generated by the normalized Laguerre
    recurrence in the smaller index, vectorized here over all diagonals.
    """
    size = int(size)
    out = np.zeros((size, size))
    if size == 0:
        return out
    if beta == 0.0:
        np.fill_diagonal(out, 1.0)
        return out
    x = beta * beta
    ks = np.arange(size, dtype=float)
    lg = np.array([math.lgamma(k + 1.0) for k in range(size)])
    with np.errstate(under="ignore"):
        g_prev = np.exp(ks * math.log(abs(beta)) - 0.5 * lg - 0.5 * x)
    if beta < 0:
        g_prev[1::2] *= -1.0
    alt = np.ones(size)
    alt[1::2] = -1.0
    out[:, 0] = g_prev
    out[0, :] = g_prev * alt
    if size == 1:
        return out
    g_cur = g_prev[: size - 1] * (1.0 + ks[: size - 1] - x) / np.sqrt(1.0 + ks[: size - 1])
    out[1:, 1] = g_cur
    out[1, 1:] = g_cur * alt[: size - 1]
    for m in range(1, size - 1):
        k = ks[: size - 1 - m]
        g_next = ((2.0 * m + k + 1.0 - x) * g_cur[: size - 1 - m]
                  - np.sqrt(m * (m + k)) * g_prev[: size - 1 - m]) / np.sqrt((m + 1.0) * (m + 1.0 + k))
        out[m + 1:, m + 1] = g_next
        out[m + 1, m + 1:] = g_next * alt[: size - 1 - m]
        g_prev, g_cur = g_cur, g_next
    return out


def bessel_sequence(kmax, z):
    """J_0(z) .. J_kmax(z) by normalized downward (Miller) recurrence."""
    kmax = int(kmax)
    out = np.zeros(kmax + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    if z < 1e-8:
        # leading series term; the next one is below 1e-16 relative
        k = np.arange(kmax + 1, dtype=float)
        lg = np.array([math.lgamma(j + 1.0) for j in range(kmax + 1)])
        with np.errstate(under="ignore"):
            return np.exp(k * (math.log(z) - math.log(2.0)) - lg) * (1.0 - 0.25 * z * z / (k + 1.0))
    top = max(kmax, int(z))
    start = top + 20 + int(math.sqrt(40.0 * max(top, 1)))
    start += start % 2
    bjp = 0.0
    bj = 1e-300
    norm = bj if start % 2 == 0 else 0.0
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        bjm = k * two_over_z * bj - bjp
        bjp = bj
        bj = bjm
        if abs(bj) > _RESCALE:
            bj /= _RESCALE
            bjp /= _RESCALE
            norm /= _RESCALE
            out /= _RESCALE
        order = k - 1
        if order <= kmax:
            out[order] = bj
        if order == 0:
            norm += bj
        elif order % 2 == 0:
            norm += 2.0 * bj
    return out / norm


def laguerre(m, a, x):
    """Generalized Laguerre polynomial by three-term recurrence in degree."""
    if m == 0:
        return 1.0
    lm1 = 1.0
    lcur = 1.0 + a - x
    for k in range(1, m):
        lnext = ((2.0 * k + 1.0 + a - x) * lcur - (k + a) * lm1) / (k + 1.0)
        lm1 = lcur
        lcur = lnext
    return lcur
