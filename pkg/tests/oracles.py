"""Independent reference computations used by the test-suite.

Nothing here imports the library's flow or decomposition code; these are
direct homogeneous-coordinate and combinatorial formulas.
"""

from fractions import Fraction
from itertools import combinations
from math import comb, pi

import numpy as np


def frac_vec(text):
    return [Fraction(p) for p in text.split(",")]


def dot(m, a0):
    return sum(Fraction(int(x)) * y for x, y in zip(m, a0))


def cp_default_weights(n):
    return [tuple(0 for _ in range(n))] + [tuple(1 if k == j else 0 for k in range(n))
                                            for j in range(n)]


def cp_rates(n, a0, weights=None):
    """Exact pairings <w_j, a0> for the homogeneous coordinates of CP^n."""
    weights = weights or cp_default_weights(n)
    return [dot(w, a0) for w in weights]


def cp_flow(z, rates, s):
    """``[z_j exp(-2 pi q_j s)]`` normalised to max modulus one."""
    z = np.asarray(z, dtype=complex)
    q = np.array([float(r) for r in rates])
    out = z * np.exp(-2 * pi * q * s)
    return out / out[np.argmax(np.abs(out))]


def cp_affine(z, i):
    z = np.asarray(z, dtype=complex)
    return np.delete(z, i) / z[i]


def cp_argmin_limit(z, rates, direction="forward"):
    """Coordinate index of the limit: extreme exact rate among nonzero coords."""
    idx = [j for j in range(len(z)) if z[j] != 0]
    vals = [rates[j] for j in idx]
    target = min(vals) if direction == "forward" else max(vals)
    hits = [j for j, v in zip(idx, vals) if v == target]
    assert len(hits) == 1, "tie in the argmin"
    return hits[0]


def cp_label(n, j):
    return "[" + ":".join("1" if k == j else "0" for k in range(n + 1)) + "]"


def fan_faces(fan):
    """All cones of a simplicial fan as frozensets of ray indices (apex included)."""
    faces = set()
    for cone in fan["maximal_cones"]:
        for k in range(len(cone) + 1):
            for sub in combinations(cone, k):
                faces.add(frozenset(sub))
    return faces


def h_vector_from_f_polynomial(fan):
    """h-vector via ``sum_i f_i t^i (1 - t)^(n - i)`` read in reverse.

    ``f_i`` is the number of i-dimensional cones. Reversal is harmless for
    the symmetric h-vectors of complete smooth fans, but is kept to match
    the usual definition.
    """
    n = fan["rank"]
    f = [0] * (n + 1)
    for face in fan_faces(fan):
        f[len(face)] += 1
    coeffs = [0] * (n + 1)
    for i, fi in enumerate(f):
        for j in range(n - i + 1):
            coeffs[i + j] += fi * comb(n - i, j) * (-1) ** j
    return coeffs[::-1]


def h_vector_formula(fan):
    """``h_k = sum_j (-1)^(j-k) C(j,k) d_(n-j)`` with ``d_i`` the i-dimensional cone count."""
    n = fan["rank"]
    d = [0] * (n + 1)
    for face in fan_faces(fan):
        d[len(face)] += 1
    return [sum((-1) ** (j - k) * comb(j, k) * d[n - j] for j in range(k, n + 1))
            for k in range(n + 1)]


def dual_basis(rays):
    """Rows ``m_i`` with ``<m_i, v_j> = delta_ij`` for a unimodular basis of rays."""
    v = np.array(rays, dtype=float)
    m = np.linalg.inv(v).T
    out = np.rint(m).astype(int)
    assert np.allclose(m, out)
    return [tuple(int(c) for c in row) for row in out]


def numeric_jacobian(func, x, eps=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = eps
        cols.append((func(x + e) - func(x - e)) / (2 * eps))
    return np.array(cols).T


CP2_FAN = {"rank": 2, "rays": [[1, 0], [0, 1], [-1, -1]],
           "maximal_cones": [[0, 1], [0, 2], [1, 2]]}
F1_FAN = {"rank": 2, "rays": [[1, 0], [0, 1], [-1, 1], [0, -1]],
          "maximal_cones": [[0, 1], [1, 2], [2, 3], [3, 0]]}
