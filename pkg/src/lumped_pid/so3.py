"""Minimal SO(3) kinematics: skew maps, Rodrigues exponential, Gram-Schmidt.

The hot simulation loops run on plain floats (tuples for 3-vectors, flat
row-major 9-tuples for matrices); the ``numpy`` entry points at the bottom
wrap the same scalar core. Array dispatch overhead on 3x3 operations is what
pushed the rigid-body runs past their time budget, hence the split.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonSkewError

IDENTITY9 = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)

SKEW_TOL = 1e-9


# -- scalar core: vectors are (x, y, z), matrices are row-major 9-tuples -----

def dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def norm3(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def add3(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub3(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale3(s, a):
    return (s * a[0], s * a[1], s * a[2])


def mat_vec(m, v):
    return (
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
        m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
        m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
    )


def mat_tvec(m, v):
    """m^T v."""
    return (
        m[0] * v[0] + m[3] * v[1] + m[6] * v[2],
        m[1] * v[0] + m[4] * v[1] + m[7] * v[2],
        m[2] * v[0] + m[5] * v[1] + m[8] * v[2],
    )


def mat_mul(a, b):
    return (
        a[0] * b[0] + a[1] * b[3] + a[2] * b[6],
        a[0] * b[1] + a[1] * b[4] + a[2] * b[7],
        a[0] * b[2] + a[1] * b[5] + a[2] * b[8],
        a[3] * b[0] + a[4] * b[3] + a[5] * b[6],
        a[3] * b[1] + a[4] * b[4] + a[5] * b[7],
        a[3] * b[2] + a[4] * b[5] + a[5] * b[8],
        a[6] * b[0] + a[7] * b[3] + a[8] * b[6],
        a[6] * b[1] + a[7] * b[4] + a[8] * b[7],
        a[6] * b[2] + a[7] * b[5] + a[8] * b[8],
    )


def mat_tmul(a, b):
    """a^T b."""
    return (
        a[0] * b[0] + a[3] * b[3] + a[6] * b[6],
        a[0] * b[1] + a[3] * b[4] + a[6] * b[7],
        a[0] * b[2] + a[3] * b[5] + a[6] * b[8],
        a[1] * b[0] + a[4] * b[3] + a[7] * b[6],
        a[1] * b[1] + a[4] * b[4] + a[7] * b[7],
        a[1] * b[2] + a[4] * b[5] + a[7] * b[8],
        a[2] * b[0] + a[5] * b[3] + a[8] * b[6],
        a[2] * b[1] + a[5] * b[4] + a[8] * b[7],
        a[2] * b[2] + a[5] * b[5] + a[8] * b[8],
    )


def transpose(m):
    return (m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8])


def trace(m):
    return m[0] + m[4] + m[8]


def det3(m):
    return (
        m[0] * (m[4] * m[8] - m[5] * m[7])
        - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
    )


def inv3(m):
    """Closed-form 3x3 inverse via the adjugate."""
    d = det3(m)
    if d == 0.0:
        raise ZeroDivisionError("singular 3x3 matrix")
    inv_d = 1.0 / d
    return (
        (m[4] * m[8] - m[5] * m[7]) * inv_d,
        (m[2] * m[7] - m[1] * m[8]) * inv_d,
        (m[1] * m[5] - m[2] * m[4]) * inv_d,
        (m[5] * m[6] - m[3] * m[8]) * inv_d,
        (m[0] * m[8] - m[2] * m[6]) * inv_d,
        (m[2] * m[3] - m[0] * m[5]) * inv_d,
        (m[3] * m[7] - m[4] * m[6]) * inv_d,
        (m[1] * m[6] - m[0] * m[7]) * inv_d,
        (m[0] * m[4] - m[1] * m[3]) * inv_d,
    )


def hat3(v):
    """(x1,x2,x3) -> [[0,-x3,x2],[x3,0,-x1],[-x2,x1,0]]; hat(v) w = v x w."""
    return (0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)


def vee3(m):
    """Inverse of hat3 for exactly skew input (no symmetry check here)."""
    return (m[7], m[2], m[3])


def rodrigues3(r):
    """exp(hat(r)) for a rotation vector r = omega * dt.

    Series fallback below ~1e-6 rad keeps the small-angle factors accurate.
    """
    x, y, z = r
    phi2 = x * x + y * y + z * z
    phi = math.sqrt(phi2)
    if phi < 1e-6:
        a = 1.0 - phi2 / 6.0          # sin(phi)/phi
        b = 0.5 - phi2 / 24.0         # (1-cos(phi))/phi^2
    else:
        a = math.sin(phi) / phi
        b = (1.0 - math.cos(phi)) / phi2
    # I + a*hat(r) + b*hat(r)^2
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    return (
        1.0 - b * (yy + zz), b * xy - a * z, b * xz + a * y,
        b * xy + a * z, 1.0 - b * (xx + zz), b * yz - a * x,
        b * xz - a * y, b * yz + a * x, 1.0 - b * (xx + yy),
    )


def gram_schmidt3(m):
    """Re-orthonormalize columns; the third column is rebuilt as a cross
    product so the result has determinant +1."""
    c0 = (m[0], m[3], m[6])
    c1 = (m[1], m[4], m[7])
    b0 = scale3(1.0 / norm3(c0), c0)
    c1p = sub3(c1, scale3(dot3(b0, c1), b0))
    b1 = scale3(1.0 / norm3(c1p), c1p)
    b2 = cross3(b0, b1)
    return (b0[0], b1[0], b2[0], b0[1], b1[1], b2[1], b0[2], b1[2], b2[2])


def ortho_error3(m):
    """Frobenius norm of m^T m - I."""
    g = mat_tmul(m, m)
    acc = 0.0
    for i in range(9):
        d = g[i] - IDENTITY9[i]
        acc += d * d
    return math.sqrt(acc)


# -- numpy-facing wrappers ---------------------------------------------------

def hat(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.array(hat3((v[0], v[1], v[2]))).reshape(3, 3)


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    skew_defect = np.linalg.norm(m + m.T)
    if skew_defect > SKEW_TOL:
        raise NonSkewError(f"matrix is not skew-symmetric: ||M + M^T|| = {skew_defect:g}")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rodrigues(rotation_vector) -> np.ndarray:
    r = np.asarray(rotation_vector, dtype=float)
    return np.array(rodrigues3((r[0], r[1], r[2]))).reshape(3, 3)


def orthonormalize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.array(gram_schmidt3(tuple(m.ravel()))).reshape(3, 3)


def flatten9(m) -> tuple:
    arr = np.asarray(m, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {arr.shape}")
    return tuple(arr.ravel())
