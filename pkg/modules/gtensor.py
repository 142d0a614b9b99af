"""
gtensor.py — Grassmann Tensors
Profiles B(m) and B°(m), tensor computation from cameras, the incidence relation
by contraction and by determinant, and pointwise degeneracy ranks.
"""

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

import config
from modules import core_numeric as cn
from modules import scene
from modules.errors import ContractError, InputError


#  Profiles

def enumerate_B(m, n):
    """All β with 0 <= β_i <= m_i+1 and Σβ_i = n+1, lexicographic."""
    ranges = [range(mi + 2) for mi in m]
    return [beta for beta in itertools.product(*ranges) if sum(beta) == n + 1]


def enumerate_B_interior(m, n):
    """B°(m): the profiles with 1 <= α_i <= m_i, as Profile objects."""
    return [
        Profile(alpha=beta, n=n, m=tuple(m))
        for beta in enumerate_B(m, n)
        if all(1 <= b <= mi for b, mi in zip(beta, m))
    ]


def profile_count(m, n):
    """|B°(m)| by counting compositions of n+1 with parts in [1, m_i].

    Independent of enumerate_B_interior; used to cross-check it.
    """
    counts = {0: 1}
    for mi in m:
        step = {}
        for total, ways in counts.items():
            for part in range(1, mi + 1):
                step[total + part] = step.get(total + part, 0) + ways
        counts = step
    return counts.get(n + 1, 0)


def default_profile(n, m):
    """The acceptance-shape profile for (n, m), else the first of B°(m)."""
    m = tuple(int(v) for v in m)
    for shape_n, shape_m, alpha in config.ACCEPTANCE_SHAPES:
        if (shape_n, shape_m) == (n, m):
            return Profile(alpha=alpha, n=n, m=m)
    profiles = enumerate_B_interior(m, n)
    if not profiles:
        raise ContractError(f"B°(m) is empty for n={n}, m={m}")
    return profiles[0]


@dataclass(frozen=True)
class Profile:
    """α ∈ B°(m): per-camera index counts of a Grassmann tensor."""

    alpha: tuple
    n: int
    m: tuple

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        m = tuple(int(v) for v in self.m)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "m", m)
        if len(alpha) != len(m):
            raise ContractError(f"profile {alpha} has {len(alpha)} entries for {len(m)} cameras")
        if not all(1 <= a <= mi for a, mi in zip(alpha, m)) or sum(alpha) != self.n + 1:
            valid = [p.alpha for p in enumerate_B_interior(m, self.n)]
            raise ContractError(
                f"profile {alpha} is not in B°(m) for n={self.n}, m={m}; valid profiles: {valid}"
            )

    @property
    def shape(self):
        return tuple(math.comb(mi + 1, a) for mi, a in zip(self.m, self.alpha))

    @property
    def size(self):
        return math.prod(self.shape)

    def as_dict(self):
        return {"n": self.n, "m": list(self.m), "alpha": list(self.alpha)}


@functools.lru_cache(maxsize=64)
def _row_selection(m, alpha):
    """Global 0-based stacked-row indices of every tensor entry, (D, n+1)."""
    offsets = np.concatenate([[0], np.cumsum([mi + 1 for mi in m])])[:-1]
    per_camera = [
        [tuple(off + s - 1 for s in sigma) for sigma in cn.combinations(mi + 1, a)]
        for off, mi, a in zip(offsets, m, alpha)
    ]
    rows = [sum(choice, ()) for choice in itertools.product(*per_camera)]
    out = np.array(rows, dtype=int)
    out.setflags(write=False)
    return out


def row_selection(profile):
    return _row_selection(profile.m, profile.alpha)


#  Tensors

@dataclass(frozen=True, eq=False)
class GrassmannTensor:
    """Canonical representative: unit Frobenius norm, first nonzero entry positive."""

    profile: Profile
    entries: np.ndarray

    def __post_init__(self):
        entries = cn.as_vector(self.entries, name="tensor entries")
        if entries.size != self.profile.size:
            raise ContractError(
                f"tensor has {entries.size} entries, profile {self.profile.alpha} needs {self.profile.size}"
            )
        entries = cn.canonical(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def as_array(self):
        return self.entries.reshape(self.profile.shape)


def _check_profile(cfg, profile):
    if (profile.n, profile.m) != (cfg.n, cfg.m):
        raise ContractError(
            f"profile is for n={profile.n}, m={profile.m} but cameras have n={cfg.n}, m={cfg.m}"
        )


def stacked_minors(stacked, rows):
    """Determinants of stacked[rows[k]] for every selection k."""
    return np.linalg.det(stacked[rows])


def tensor_entries(cfg, profile):
    """Raw maximal minors of the stacked matrix, before normalization."""
    _check_profile(cfg, profile)
    return stacked_minors(cfg.stacked, row_selection(profile))


def compute_tensor(cfg, profile):
    """Grassmann tensor of the given profile.

    Args:
        cfg: CameraConfig with stacked rank n+1.
        profile: Profile matching (cfg.n, cfg.m).

    Returns:
        GrassmannTensor in canonical form.

    Raises:
        DegeneracyError: when the stacked matrix is rank deficient.
    """
    _check_profile(cfg, profile)
    scene.require_injective(cfg)
    return GrassmannTensor(profile=profile, entries=tensor_entries(cfg, profile))


#  Subspace Tuples

@dataclass(frozen=True, eq=False)
class CodimSubspaceTuple:
    """U_i ⊂ P(W_i) given by α_i×(m_i+1) full-row-rank form matrices F_i."""

    forms: tuple

    def __post_init__(self):
        forms = []
        for i, F in enumerate(self.forms, start=1):
            F = cn.as_matrix(F, name=f"forms of U_{i}").copy()
            if cn.rank(F) < F.shape[0]:
                raise InputError(f"forms of U_{i} are not of full row rank")
            F.setflags(write=False)
            forms.append(F)
        object.__setattr__(self, "forms", tuple(forms))

    @property
    def codims(self):
        return tuple(F.shape[0] for F in self.forms)

    def plucker_vectors(self):
        return [cn.plucker(F) for F in self.forms]

    def coefficient_row(self):
        """∏_i p^i_{σ_i}(U_i) in the canonical flattening."""
        return functools.reduce(np.multiply.outer, self.plucker_vectors()).ravel()


def point_subspaces(points):
    """Each image point x_i as the codimension-m_i subspace {x_i}."""
    return CodimSubspaceTuple(forms=tuple(cn.orthogonal_complement(x) for x in points))


def _check_shape(profile, U):
    expected = tuple((a, mi + 1) for a, mi in zip(profile.alpha, profile.m))
    got = tuple(F.shape for F in U.forms)
    if got != expected:
        raise ContractError(f"subspace forms have shapes {got}, profile needs {expected}")


def incidence_value(A, U):
    """Σ_σ A^σ ∏_i p^i_{σ_i}(U_i).

    Zero iff X meets ∏U_i; equals the determinant oracle up to one global scalar.
    """
    _check_shape(A.profile, U)
    value = A.as_array()
    for p in U.plucker_vectors():
        value = np.tensordot(value, p, axes=([0], [0]))
    return float(value)


def incidence_oracle(cfg, U):
    """det of the (n+1)×(n+1) stack of F_i·s_i."""
    if len(U.forms) != cfg.r:
        raise ContractError(f"{len(U.forms)} subspaces for {cfg.r} cameras")
    for i, (F, mi) in enumerate(zip(U.forms, cfg.m), start=1):
        if F.shape[1] != mi + 1:
            raise ContractError(f"forms of U_{i} act on {F.shape[1]} coordinates, camera has {mi + 1}")
    if sum(U.codims) != cfg.n + 1:
        raise ContractError(f"codimensions {U.codims} do not sum to n+1={cfg.n + 1}")
    return float(np.linalg.det(np.vstack([F @ M for F, M in zip(U.forms, cfg.matrices)])))


#  Degeneracy Ranks

def rank_profile_at(cfg, x, tol=config.RANK_TOL):
    """Rank of V → ⊕ W_i/⟨x_i⟩ at x; x ∈ X iff the rank is at most n.

    Args:
        cfg: CameraConfig.
        x: One nonzero point per camera.

    Returns:
        int in [0, n+1].
    """
    if len(x) != cfg.r:
        raise ContractError(f"{len(x)} points for {cfg.r} cameras")
    blocks = []
    for i, (xi, M) in enumerate(zip(x, cfg.matrices), start=1):
        xi = cn.as_vector(xi, name=f"x_{i}")
        if xi.size != M.shape[0]:
            raise ContractError(f"x_{i} has {xi.size} coordinates, expected {M.shape[0]}")
        blocks.append(cn.orthogonal_complement(xi) @ M)
    return cn.rank(np.vstack(blocks), tol)
