"""Closed-form field of z-magnetized cuboids (surface-charge model).

For a cuboid ``lo <= r <= hi`` with magnetization along +z, the charge
sheets sit on the top (+) and bottom (-) faces.  With ``u, v, w`` the
offsets of the probe from a face corner, the antiderivatives are::

    Fx = -ln(v + R)   Fy = -ln(u + R)   Fz = atan(u v / (w R))

summed over the four corners of each face with alternating signs.  ``weight``
per prism is ``sign * B_r / (4 pi)`` so the result is B in the units of B_r.
Derivatives supply the (symmetric) Jacobian used by Newton refinement.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _log_plus(a, r, b2w2):
    # ln(a + r) with r = sqrt(a^2 + b^2 + w^2); stable for a < 0
    if a >= 0.0:
        return math.log(a + r)
    return math.log(b2w2 / (r - a))


@numba.njit(cache=True, inline="always")
def _inv_plus(a, r, b2w2):
    # 1 / (a + r), stable for a < 0
    if a >= 0.0:
        return 1.0 / (a + r)
    return (r - a) / b2w2


@numba.njit(cache=True, nogil=True)
def field_kernel(points, lo, hi, weight, out, flags, eps):
    n = points.shape[0]
    eps2 = eps * eps
    for a in range(n):
        px = points[a, 0]
        py = points[a, 1]
        pz = points[a, 2]
        bx = 0.0
        by = 0.0
        bz = 0.0
        bad = False
        for k in range(lo.shape[0]):
            wk = weight[k]
            us = (px - lo[k, 0], px - hi[k, 0])
            vs = (py - lo[k, 1], py - hi[k, 1])
            for f in range(2):
                if f == 0:
                    w = pz - hi[k, 2]
                    sf = wk
                else:
                    w = pz - lo[k, 2]
                    sf = -wk
                w2 = w * w
                for i in range(2):
                    u = us[i]
                    u2 = u * u
                    for j in range(2):
                        v = vs[j]
                        v2 = v * v
                        s = sf if i == j else -sf
                        uw = u2 + w2
                        vw = v2 + w2
                        if uw < eps2 or vw < eps2:
                            bad = True
                            continue
                        r = math.sqrt(u2 + v2 + w2)
                        bx -= s * _log_plus(v, r, uw)
                        by -= s * _log_plus(u, r, vw)
                        if w != 0.0:
                            bz += s * math.atan(u * v / (w * r))
        out[a, 0] = bx
        out[a, 1] = by
        out[a, 2] = bz
        flags[a] = bad


@numba.njit(cache=True, nogil=True)
def jacobian_kernel(points, lo, hi, weight, out, flags, eps):
    n = points.shape[0]
    eps2 = eps * eps
    for a in range(n):
        px = points[a, 0]
        py = points[a, 1]
        pz = points[a, 2]
        jxx = jxy = jxz = jyy = jyz = jzz = 0.0
        bad = False
        for k in range(lo.shape[0]):
            wk = weight[k]
            us = (px - lo[k, 0], px - hi[k, 0])
            vs = (py - lo[k, 1], py - hi[k, 1])
            for f in range(2):
                if f == 0:
                    w = pz - hi[k, 2]
                    sf = wk
                else:
                    w = pz - lo[k, 2]
                    sf = -wk
                w2 = w * w
                for i in range(2):
                    u = us[i]
                    u2 = u * u
                    for j in range(2):
                        v = vs[j]
                        v2 = v * v
                        s = sf if i == j else -sf
                        uw = u2 + w2
                        vw = v2 + w2
                        if uw < eps2 or vw < eps2:
                            bad = True
                            continue
                        r = math.sqrt(u2 + v2 + w2)
                        iv = _inv_plus(v, r, uw) / r
                        iu = _inv_plus(u, r, vw) / r
                        jxx -= s * u * iv
                        jxy -= s / r
                        jxz -= s * w * iv
                        jyy -= s * v * iu
                        jyz -= s * w * iu
                        jzz -= s * u * v * (u2 + v2 + 2.0 * w2) / (r * uw * vw)
        out[a, 0, 0] = jxx
        out[a, 0, 1] = jxy
        out[a, 0, 2] = jxz
        out[a, 1, 0] = jxy
        out[a, 1, 1] = jyy
        out[a, 1, 2] = jyz
        out[a, 2, 0] = jxz
        out[a, 2, 1] = jyz
        out[a, 2, 2] = jzz
        flags[a] = bad


def prism_sum(points, lo, hi, weight, eps=1e-9):
    pts = np.ascontiguousarray(points, dtype=float)
    out = np.empty((pts.shape[0], 3))
    flags = np.zeros(pts.shape[0], dtype=np.bool_)
    field_kernel(pts, np.ascontiguousarray(lo), np.ascontiguousarray(hi),
                 np.ascontiguousarray(weight), out, flags, eps)
    return out, flags


def prism_jacobian(points, lo, hi, weight, eps=1e-9):
    pts = np.ascontiguousarray(points, dtype=float)
    out = np.empty((pts.shape[0], 3, 3))
    flags = np.zeros(pts.shape[0], dtype=np.bool_)
    jacobian_kernel(pts, np.ascontiguousarray(lo), np.ascontiguousarray(hi),
                    np.ascontiguousarray(weight), out, flags, eps)
    return out, flags
