# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: tridiagonal QL, displacement matrices, Bessel and
Laguerre recurrences. Mirrors ``_purepy`` function for function."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, copysign, exp, log, lgamma

cnp.import_array()

cdef double _EPS = 2.220446049250313e-16
cdef double _RESCALE = 1e250


def tridiag_ql(d, e, bint vectors=True, int max_iter=50):
    cdef Py_ssize_t n = len(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dwork = np.array(d, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ework = np.zeros(n)
    ework[: n - 1] = e
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zarr
    if vectors:
        zarr = np.eye(n)
    else:
        zarr = np.zeros((1, 1))
    cdef double[::1] dv = dwork
    cdef double[::1] ev = ework
    cdef double[:, ::1] z = zarr
    cdef Py_ssize_t l, m, i, k
    cdef int it, status = -1
    cdef double dd, g, r, s, c, p, f, b, zi, zi1
    cdef bint deflated
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(dv[m]) + fabs(dv[m + 1])
                    if fabs(ev[m]) <= _EPS * dd:
                        break
                    m += 1
                if m == l:
                    break
                if it == max_iter:
                    status = l
                    break
                it += 1
                g = (dv[l + 1] - dv[l]) / (2.0 * ev[l])
                r = hypot(g, 1.0)
                g = dv[m] - dv[l] + ev[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                i = m - 1
                deflated = False
                while i >= l:
                    f = s * ev[i]
                    b = c * ev[i]
                    r = hypot(f, g)
                    ev[i + 1] = r
                    if r == 0.0:
                        dv[i + 1] -= p
                        ev[m] = 0.0
                        deflated = True
                        break
                    s = f / r
                    c = g / r
                    g = dv[i + 1] - p
                    r = (dv[i] - g) * s + 2.0 * c * b
                    p = s * r
                    dv[i + 1] = g + p
                    g = c * r - b
                    if vectors:
                        for k in range(n):
                            zi = z[i, k]
                            zi1 = z[i + 1, k]
                            z[i, k] = c * zi - s * zi1
                            z[i + 1, k] = s * zi + c * zi1
                    i -= 1
                if deflated:
                    continue
                dv[l] -= p
                ev[l] = g
                ev[m] = 0.0
            if status >= 0:
                break
    return dwork, (zarr if vectors else None), status


def displacement_matrix(double beta, Py_ssize_t size):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.zeros((size, size))
    if size == 0:
        return arr
    cdef double[:, ::1] out = arr
    cdef Py_ssize_t k, m
    cdef double x = beta * beta, lb, g0, g1, g2, sign, alt
    if beta == 0.0:
        for k in range(size):
            out[k, k] = 1.0
        return arr
    lb = log(fabs(beta))
    with nogil:
        for k in range(size):
            g0 = exp(k * lb - 0.5 * lgamma(k + 1.0) - 0.5 * x)
            if beta < 0 and k % 2 == 1:
                g0 = -g0
            alt = -1.0 if k % 2 == 1 else 1.0
            out[k, 0] = g0
            out[0, k] = alt * g0
            if k + 1 >= size:
                continue
            g1 = g0 * (1.0 + k - x) / sqrt(1.0 + k)
            out[1 + k, 1] = g1
            out[1, 1 + k] = alt * g1
            for m in range(1, size - 1 - k):
                g2 = ((2.0 * m + k + 1.0 - x) * g1 - sqrt(m * (m + <double>k)) * g0) / sqrt((m + 1.0) * (m + 1.0 + k))
                out[m + 1 + k, m + 1] = g2
                out[m + 1, m + 1 + k] = alt * g2
                g0 = g1
                g1 = g2
    return arr


def bessel_sequence(Py_ssize_t kmax, double z):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.zeros(kmax + 1)
    cdef double[::1] out = arr
    cdef Py_ssize_t k, order, j
    if z == 0.0:
        out[0] = 1.0
        return arr
    if z < 1e-8:
        # leading series term; the next one is below 1e-16 relative
        for j in range(kmax + 1):
            out[j] = exp(j * (log(z) - 0.6931471805599453) - lgamma(j + 1.0)) * (1.0 - 0.25 * z * z / (j + 1.0))
        return arr
    cdef Py_ssize_t top = max(kmax, <Py_ssize_t>z)
    cdef Py_ssize_t start = top + 20 + <Py_ssize_t>sqrt(40.0 * max(top, 1))
    start += start % 2
    cdef double bjp = 0.0, bj = 1e-300, bjm, norm, two_over_z = 2.0 / z
    norm = bj if start % 2 == 0 else 0.0
    with nogil:
        for k in range(start, 0, -1):
            bjm = k * two_over_z * bj - bjp
            bjp = bj
            bj = bjm
            if fabs(bj) > _RESCALE:
                bj /= _RESCALE
                bjp /= _RESCALE
                norm /= _RESCALE
                for j in range(kmax + 1):
                    out[j] /= _RESCALE
            order = k - 1
            if order <= kmax:
                out[order] = bj
            if order == 0:
                norm += bj
            elif order % 2 == 0:
                norm += 2.0 * bj
        for j in range(kmax + 1):
            out[j] /= norm
    return arr


def laguerre(long m, long a, double x):
    if m == 0:
        return 1.0
    cdef double lm1 = 1.0, lcur = 1.0 + a - x, lnext
    cdef long k
    with nogil:
        for k in range(1, m):
            lnext = ((2.0 * k + 1.0 + a - x) * lcur - (k + a) * lm1) / (k + 1.0)
            lm1 = lcur
            lcur = lnext
    return lcur
