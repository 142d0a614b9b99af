"""
core_numeric.py — Dense Numerical Primitives
Ranks, nullspaces, minors, index combinations, Plücker vectors, projective comparison.
Pure functions: no I/O and no logging.
"""

import itertools

import numpy as np
import scipy.linalg

import config
from modules.errors import DegeneracyError, InputError


def as_matrix(M, name="matrix"):
    """Coerce to a finite 2-D float array.

    Raises:
        InputError: on non-finite entries or a shape that is not 2-D.
    """
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name="vector", allow_zero=False):
    """Coerce to a finite 1-D float array, rejecting the zero vector by default."""
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be a non-empty finite vector")
    if not allow_zero and not np.any(arr):
        raise InputError(f"{name} is the zero vector")
    return arr


def singular_values(M):
    """Singular values in decreasing order."""
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def rank(M, tol=config.RANK_TOL):
    """Numerical rank: singular values above tol × the largest one.

    Args:
        M: 2-D array.
        tol: Relative threshold, > 0.

    Returns:
        int, 0 for the zero matrix.
    """
    if tol <= 0:
        raise InputError("rank tolerance must be positive")
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def nullspace(M, tol=config.RANK_TOL):
    """Orthonormal basis of the numerical kernel, as columns.

    Returns:
        np.ndarray of shape (cols, cols - rank(M, tol)).
    """
    if tol <= 0:
        raise InputError("nullspace tolerance must be positive")
    return scipy.linalg.null_space(as_matrix(M), rcond=tol)


def orthogonal_complement(x):
    """Rows spanning the hyperplane x^⊥, orthonormal, shape (len(x) - 1, len(x))."""
    x = as_vector(x, name="point")
    return nullspace(x[None, :]).T


def minor(M, rows, cols):
    """Determinant of the submatrix on 1-based increasing rows and cols.

    Raises:
        InputError: when an index is out of range or the selection is not square.
    """
    M = as_matrix(M)
    rows, cols = tuple(rows), tuple(cols)
    if len(rows) != len(cols):
        raise InputError(f"minor needs a square selection, got {len(rows)}x{len(cols)}")
    if not rows:
        return 1.0
    for idx, bound, label in ((rows, M.shape[0], "row"), (cols, M.shape[1], "column")):
        if min(idx) < 1 or max(idx) > bound:
            raise InputError(f"{label} index out of range 1..{bound}: {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise InputError(f"{label} indices must be strictly increasing: {idx}")
    sub = M[np.ix_(np.array(rows) - 1, np.array(cols) - 1)]
    return float(np.linalg.det(sub))


def combinations(universe, k):
    """All strictly increasing 1-based k-sequences in lexicographic order.

    This is the canonical flattening order for every tensor index downstream.
    """
    if k < 0 or k > universe:
        raise InputError(f"need 0 <= k <= universe, got k={k}, universe={universe}")
    return list(itertools.combinations(range(1, universe + 1), k))


def plucker(F, tol=config.RANK_TOL):
    """Maximal minors of F over combinations(F.cols, F.rows).

    Raises:
        DegeneracyError: when F is not of full row rank.
    """
    F = as_matrix(F, name="form matrix")
    k, cols = F.shape
    if k > cols:
        raise InputError(f"form matrix has more rows than columns: {F.shape}")
    if rank(F, tol) < k:
        raise DegeneracyError("form matrix is rank deficient")
    idx = np.array(combinations(cols, k)) - 1
    blocks = np.moveaxis(F[:, idx], 1, 0)
    return np.linalg.det(blocks)


def proj_distance(u, v):
    """min over s in {+1, -1} of ||u/|u| - s v/|v|||, for arrays of any shape."""
    u = as_vector(u, name="u")
    v = as_vector(v, name="v")
    if u.size != v.size:
        raise InputError(f"length mismatch: {u.size} vs {v.size}")
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(min(np.linalg.norm(u - v), np.linalg.norm(u + v)))


def proj_equal(u, v, tol=1e-8):
    """True iff u and v are the same projective point within tol."""
    return proj_distance(u, v) <= tol


def canonical(v, tol=config.CANONICAL_SIGN_TOL):
    """Unit norm, first entry above tol × max|v| made positive.

    Idempotent bit for bit: a vector already within a few ulps of unit norm
    is only sign-flipped, never rescaled.
    """
    v = as_vector(v).copy()
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 16 * np.finfo(float).eps:
        v = v / norm
    lead = np.flatnonzero(np.abs(v) > tol * np.max(np.abs(v)))[0]
    return v if v[lead] > 0 else -v


def rng_for(seed, *keys):
    """Independent generator for (seed, key...); split streams never collide."""
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])
