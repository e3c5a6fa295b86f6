# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-node curvature kernels for n = 1, 2.

Each kernel maps the local jet of a field (value, covariant gradient,
covariant Hessian) plus the round metric to sorted principal curvatures
and the elementary symmetric functions S_0..S_n.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sinh, cosh, sin, cos

cnp.import_array()


cdef inline void _pencil2(double g00, double g01, double g11,
                          double b00, double b01, double b11,
                          double *lo, double *hi) noexcept nogil:
    # eigenvalues of a = g^-1 b; the discriminant is formed from a's entries
    # so that nearly umbilic points do not lose half their digits
    cdef double detg = g00 * g11 - g01 * g01
    cdef double a00 = (g11 * b00 - g01 * b01) / detg
    cdef double a01 = (g11 * b01 - g01 * b11) / detg
    cdef double a10 = (g00 * b01 - g01 * b00) / detg
    cdef double a11 = (g00 * b11 - g01 * b01) / detg
    cdef double half = 0.5 * (a00 + a11)
    cdef double d = 0.5 * (a00 - a11)
    cdef double disc = d * d + a01 * a10
    if disc < 0.0:
        disc = 0.0
    disc = sqrt(disc)
    lo[0] = half - disc
    hi[0] = half + disc


def radial_curvatures(int K, const double[::1] z, const double[:, ::1] dz,
                      const double[:, :, ::1] hz, const double[:, :, ::1] e,
                      const double[:, :, ::1] e_inv):
    cdef Py_ssize_t N = z.shape[0], n = dz.shape[1], p
    lam_arr = np.empty((N, n))
    S_arr = np.empty((N, n + 1))
    cdef double[:, ::1] lam = lam_arr
    cdef double[:, ::1] S = S_arr
    cdef double s, c, f, df, grad2, scale, z0, z1, u0, u1, lo, hi
    cdef double g00, g01, g11, b00, b01, b11
    with nogil:
        for p in range(N):
            if K == -1:
                s = sinh(z[p]); c = cosh(z[p])
            else:
                s = sin(z[p]); c = cos(z[p])
            f = s * s
            df = 2.0 * s * c
            if n == 1:
                z0 = dz[p, 0]
                grad2 = e_inv[p, 0, 0] * z0 * z0
                scale = f / sqrt(f * f + f * grad2)
                g00 = f * e[p, 0, 0] + z0 * z0
                b00 = scale * (-hz[p, 0, 0] + df / f * z0 * z0 + 0.5 * df * e[p, 0, 0])
                lam[p, 0] = b00 / g00
                S[p, 0] = 1.0
                S[p, 1] = lam[p, 0]
            else:
                z0 = dz[p, 0]; z1 = dz[p, 1]
                u0 = e_inv[p, 0, 0] * z0 + e_inv[p, 0, 1] * z1
                u1 = e_inv[p, 1, 0] * z0 + e_inv[p, 1, 1] * z1
                grad2 = z0 * u0 + z1 * u1
                scale = f / sqrt(f * f + f * grad2)
                g00 = f * e[p, 0, 0] + z0 * z0
                g01 = f * e[p, 0, 1] + z0 * z1
                g11 = f * e[p, 1, 1] + z1 * z1
                b00 = scale * (-hz[p, 0, 0] + df / f * z0 * z0 + 0.5 * df * e[p, 0, 0])
                b01 = scale * (-hz[p, 0, 1] + df / f * z0 * z1 + 0.5 * df * e[p, 0, 1])
                b11 = scale * (-hz[p, 1, 1] + df / f * z1 * z1 + 0.5 * df * e[p, 1, 1])
                _pencil2(g00, g01, g11, b00, b01, b11, &lo, &hi)
                lam[p, 0] = lo
                lam[p, 1] = hi
                S[p, 0] = 1.0
                S[p, 1] = lo + hi
                S[p, 2] = lo * hi
    return lam_arr, S_arr


def conformal_curvatures(int K, const double[::1] v, const double[:, ::1] dv,
                         const double[:, :, ::1] hv, const double[:, :, ::1] e,
                         const double[:, :, ::1] e_inv):
    cdef Py_ssize_t N = v.shape[0], n = dv.shape[1], p
    lam_arr = np.empty((N, n))
    S_arr = np.empty((N, n + 1))
    cdef double[:, ::1] lam = lam_arr
    cdef double[:, ::1] S = S_arr
    cdef double x, x2, W, q, shift, v0, v1, u0, u1, lo, hi
    cdef double g00, g01, g11, b00, b01, b11
    with nogil:
        for p in range(N):
            x = v[p]
            x2 = x * x
            q = 2.0 / (1.0 + K * x2)
            if n == 1:
                v0 = dv[p, 0]
                W = sqrt(x2 + e_inv[p, 0, 0] * v0 * v0)
                g00 = x2 * e[p, 0, 0] + v0 * v0
                b00 = (-x * hv[p, 0, 0] + 2.0 * v0 * v0 + x2 * e[p, 0, 0]) / W
                shift = K * x2 / W
                lam[p, 0] = b00 / g00 / q - shift
                S[p, 0] = 1.0
                S[p, 1] = lam[p, 0]
            else:
                v0 = dv[p, 0]; v1 = dv[p, 1]
                u0 = e_inv[p, 0, 0] * v0 + e_inv[p, 0, 1] * v1
                u1 = e_inv[p, 1, 0] * v0 + e_inv[p, 1, 1] * v1
                W = sqrt(x2 + v0 * u0 + v1 * u1)
                g00 = x2 * e[p, 0, 0] + v0 * v0
                g01 = x2 * e[p, 0, 1] + v0 * v1
                g11 = x2 * e[p, 1, 1] + v1 * v1
                b00 = (-x * hv[p, 0, 0] + 2.0 * v0 * v0 + x2 * e[p, 0, 0]) / W
                b01 = (-x * hv[p, 0, 1] + 2.0 * v0 * v1 + x2 * e[p, 0, 1]) / W
                b11 = (-x * hv[p, 1, 1] + 2.0 * v1 * v1 + x2 * e[p, 1, 1]) / W
                _pencil2(g00, g01, g11, b00, b01, b11, &lo, &hi)
                shift = K * x2 / W
                lo = lo / q - shift
                hi = hi / q - shift
                lam[p, 0] = lo
                lam[p, 1] = hi
                S[p, 0] = 1.0
                S[p, 1] = lo + hi
                S[p, 2] = lo * hi
    return lam_arr, S_arr
