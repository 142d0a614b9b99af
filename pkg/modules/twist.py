"""
twist.py — The Twisted Pair for m = (1^{n+1})
Dual configuration from the cokernel, the identification P(W) = P(W^∨),
equality of the two hypersurfaces, and the degree-n Cremona map between
the two source spaces.
"""

import functools
import logging
from dataclasses import dataclass

import numpy as np
import sympy
from sympy.polys.monomials import itermonomials
from sympy.polys.orderings import monomial_key

import config
from modules import core_numeric as cn
from modules import gtensor, scene
from modules.errors import BaseLocusError, ContractError, DegeneracyError, GenerationError, IndeterminacyError

logger = logging.getLogger(__name__)

# identify(f) = IDENTIFY @ f
IDENTIFY = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class DualConfig:
    """s′: V′ → ⊕W_i^∨ with V′ = (coker s)^∨."""

    config: scene.CameraConfig


@dataclass(frozen=True, eq=False)
class PolyBasis:
    """Degree-d forms on P^n, rows of `coefficients` over grlex monomials."""

    degree: int
    n_vars: int
    coefficients: np.ndarray
    gap: float = 1.0

    @property
    def dimension(self):
        return self.coefficients.shape[0]

    @property
    def exponents(self):
        return monomial_exponents(self.n_vars, self.degree)

    def evaluate(self, z):
        z = cn.as_vector(z, name="point")
        monomials = np.prod(z[None, :] ** self.exponents, axis=1)
        return self.coefficients @ monomials


def _as_config(cfg):
    return cfg.config if isinstance(cfg, DualConfig) else cfg


def _require_lines(cfg):
    if cfg.r != cfg.n + 1 or any(mi != 1 for mi in cfg.m):
        raise ContractError(f"needs m = (1^{cfg.n + 1}), got m={cfg.m}")


#  Dual Configuration

def dual_config(cfg):
    """Cameras s′_i sliced from an orthonormal basis of ker(stackᵀ).

    Raises:
        ContractError: unless m = (1^{n+1}).
        DegeneracyError: when the stacked matrix is rank deficient.
    """
    cfg = _as_config(cfg)
    _require_lines(cfg)
    scene.require_injective(cfg)
    N = cn.nullspace(cfg.stacked.T)
    if N.shape[1] != cfg.n + 1:
        raise DegeneracyError(f"cokernel has dimension {N.shape[1]}, expected {cfg.n + 1}")
    return DualConfig(config=scene.split_stacked(cfg.n, cfg.m, N))


def identify(x):
    """[f₀ : f₁] ↦ [f₁ : −f₀], the kernel line of a functional on a plane."""
    x = cn.as_vector(x, name="point of P^1")
    if x.size != 2:
        raise ContractError(f"identify acts on 2-vectors, got {x.size}")
    return IDENTIFY @ x


def identified_dual(cfg):
    """Dual cameras composed with identify, mapping into the original P(W_i)."""
    dual = dual_config(cfg).config
    return dual.with_matrices([IDENTIFY @ M for M in dual.matrices])


def transport_tensor(A):
    """Apply identify along every index of a profile-(1,…,1) tensor."""
    T = A.as_array()
    for axis in range(T.ndim):
        T = np.moveaxis(np.tensordot(IDENTIFY, T, axes=([1], [axis])), 0, axis)
    return gtensor.GrassmannTensor(profile=A.profile, entries=T.ravel())


def _ones_profile(cfg):
    return gtensor.Profile(alpha=(1,) * cfg.r, n=cfg.n, m=cfg.m)


def hypersurface_value(dual_tensor, x):
    """Equation of the dual hypersurface at identify-transported images x_i."""
    transported = [identify(xi / np.linalg.norm(xi)) for xi in x]
    return gtensor.incidence_value(dual_tensor, gtensor.point_subspaces(transported))


def verify_same_hypersurface(cfg, dual, samples=1000, seed=0, tol=config.HYPERSURFACE_TOL):
    """Evaluate the dual equation on sampled points of X.

    Returns:
        dict: {"passed", "max_value", "samples", "tol"}; values are relative
            to unit-norm coefficients and unit forms.
    """
    cfg, dual = _as_config(cfg), _as_config(dual)
    _require_lines(cfg)
    _require_lines(dual)
    A_dual = gtensor.compute_tensor(dual, _ones_profile(dual))
    rng = cn.rng_for(seed)
    worst, taken = 0.0, 0
    for _ in range(samples + config.RESAMPLE_CAP):
        if taken == samples:
            break
        try:
            x = scene.project(cfg, rng.standard_normal(cfg.n + 1))
        except IndeterminacyError:
            continue
        worst = max(worst, abs(hypersurface_value(A_dual, x)))
        taken += 1
    return {"passed": worst <= tol, "max_value": worst, "samples": taken, "tol": tol}


#  Linear Systems of Forms

@functools.lru_cache(maxsize=32)
def monomial_exponents(n_vars, degree):
    """Exponent rows of all degree-d monomials, graded lexicographic, z0^d first."""
    gens = sympy.symbols(f"z0:{n_vars}")
    monos = sorted(itermonomials(gens, degree, degree), key=monomial_key("grlex", gens), reverse=True)
    exps = np.array([sympy.Poly(mono, *gens).monoms()[0] for mono in monos], dtype=int)
    exps.setflags(write=False)
    return exps


def _restriction_conditions(K, degree):
    """Coefficients of f(K·t) as linear functionals of the coefficients of f."""
    n_vars, dim = K.shape
    t = sympy.symbols(f"t0:{dim}")
    forms = [sympy.Poly(sum(float(K[j, c]) * t[c] for c in range(dim)), *t, domain="RR") for j in range(n_vars)]
    one = sympy.Poly(1, *t, domain="RR")
    target = [tuple(row) for row in monomial_exponents(dim, degree)]
    position = {e: k for k, e in enumerate(target)}

    columns = []
    for exps in monomial_exponents(n_vars, degree):
        poly = one
        for form, e in zip(forms, exps):
            if e:
                poly = poly * form ** int(e)
        col = np.zeros(len(target))
        for mono, coeff in poly.as_dict().items():
            if coeff:
                col[position[mono]] = float(coeff)
        columns.append(col)
    return np.column_stack(columns)


def vanishing_system(cfg, degree, loci, tol=config.RANK_TOL):
    """Degree-d forms on P^n vanishing on Z_i for every i in loci (1-based).

    Each Z_i is a codimension-2 linear subspace; a form vanishes on it iff
    every coefficient of its restriction to a parametrization is zero.
    """
    cfg = _as_config(cfg)
    _require_lines(cfg)
    loci = sorted(set(int(i) for i in loci))
    if any(not 1 <= i <= cfg.r for i in loci):
        raise ContractError(f"loci must lie in 1..{cfg.r}, got {loci}")
    n_mono = len(monomial_exponents(cfg.n + 1, degree))
    if not loci:
        return PolyBasis(degree=degree, n_vars=cfg.n + 1, coefficients=np.eye(n_mono))

    conditions = np.vstack([
        _restriction_conditions(scene.focal_basis(cfg.cameras[i - 1]), degree) for i in loci
    ])
    basis = cn.nullspace(conditions, tol)
    s = cn.singular_values(conditions)
    kept = n_mono - basis.shape[1]
    gap = float(s[kept - 1] / s[0]) if kept > 0 else 1.0
    logger.debug("vanishing_system: degree %d, loci %s -> dimension %d", degree, loci, basis.shape[1])
    return PolyBasis(degree=degree, n_vars=cfg.n + 1, coefficients=basis.T.copy(), gap=gap)


def contracted_hypersurface(cfg, i):
    """The unique degree-(n−1) form containing Z_j for all j != i."""
    cfg = _as_config(cfg)
    others = [j for j in range(1, cfg.r + 1) if j != i]
    basis = vanishing_system(cfg, cfg.n - 1, others)
    if basis.dimension != 1:
        raise DegeneracyError(f"expected one form of degree {cfg.n - 1}, found {basis.dimension}")
    return basis


def sample_on_hypersurface(basis, seed):
    """A real point where the single form of `basis` vanishes.

    Restricts the form to random lines and takes a real root of the
    resulting univariate polynomial.
    """
    if basis.dimension != 1:
        raise ContractError("need a basis holding a single form")
    seed = seed if isinstance(seed, (tuple, list)) else (seed,)
    rng = cn.rng_for(*seed)
    d = basis.degree
    nodes = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
    for _ in range(config.RESAMPLE_CAP):
        a, b = rng.standard_normal((2, basis.n_vars))
        values = [basis.evaluate(a + t * b)[0] for t in nodes]
        coeffs = np.polyfit(nodes, values, d)
        real = [root.real for root in np.roots(coeffs) if abs(root.imag) < 1e-9]
        if real:
            # nearest root keeps the interpolation well conditioned
            return a + min(real, key=abs) * b
    raise GenerationError("no real point found on the hypersurface")


#  Cremona Map

def dual_preimage(dual, x):
    """The w ∈ P(V′) with s′_i·w ∝ identify(x_i) for every i."""
    dual = _as_config(dual)
    M = np.vstack([(xi / np.linalg.norm(xi)) @ S for xi, S in zip(x, dual.matrices)])
    return np.linalg.svd(M)[2][-1]


def align_cremona(basis, cfg, dual, seed=0):
    """Re-express the degree-n system in the V′ coordinates of `dual`.

    Fits G ∈ PGL(n+1) from n+2 sample points so that G·u(z) = w(z), where u
    evaluates the basis and w = dual_preimage(φ(z)).
    """
    cfg, dual = _as_config(cfg), _as_config(dual)
    if basis.dimension != cfg.n + 1:
        raise ContractError(f"Cremona system must have dimension {cfg.n + 1}, got {basis.dimension}")
    rng = cn.rng_for(seed)
    rows = []
    while len(rows) < cfg.n + 2:
        z = rng.standard_normal(cfg.n + 1)
        try:
            x = scene.project(cfg, z)
        except IndeterminacyError:
            continue
        u = basis.evaluate(z)
        w = dual_preimage(dual, x)
        rows.append(np.kron(cn.orthogonal_complement(w), (u / np.linalg.norm(u))[None, :]))
    k = cfg.n + 1
    G = np.linalg.svd(np.vstack(rows))[2][-1].reshape(k, k)
    return PolyBasis(degree=basis.degree, n_vars=basis.n_vars, coefficients=G @ basis.coefficients, gap=basis.gap)


def cremona_apply(basis, z, tol=config.CREMONA_TOL):
    """Evaluate the n+1 forms at z.

    Raises:
        BaseLocusError: when every form vanishes at z.
    """
    z = cn.as_vector(z, name="scene point")
    w = basis.evaluate(z)
    scale = np.linalg.norm(basis.coefficients) * np.linalg.norm(z) ** basis.degree
    if np.linalg.norm(w) <= tol * scale:
        raise BaseLocusError("all forms of the system vanish at the point")
    return w


def cremona_map(cfg, dual=None, seed=0):
    """The aligned degree-n system realizing φ′⁻¹∘φ."""
    cfg = _as_config(cfg)
    dual = dual_config(cfg) if dual is None else dual
    system = vanishing_system(cfg, cfg.n, range(1, cfg.r + 1))
    return align_cremona(system, cfg, dual, seed)
