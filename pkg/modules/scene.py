"""
scene.py — Camera Configurations
Cameras s_i: V → W_i, focal loci, projection, PGL action, genericity checks,
and seeded synthetic scenes.
"""

import logging
from dataclasses import dataclass

import numpy as np

import config
from modules import core_numeric as cn
from modules.errors import ContractError, DegeneracyError, GenerationError, IndeterminacyError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Camera:
    """A (m_i+1)×(n+1) matrix, kept dense and unnormalized."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = cn.as_matrix(self.matrix, name="camera matrix").copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def target_dim(self):
        return self.matrix.shape[0] - 1

    @property
    def source_dim(self):
        return self.matrix.shape[1] - 1


@dataclass(frozen=True, eq=False)
class CameraConfig:
    """s = (s_1, …, s_r) with source P^n and targets P^{m_i}.

    Construction checks shapes only; rank conditions live in
    validate_genericity so degenerate configs can still be inspected.
    """

    n: int
    m: tuple
    cameras: tuple

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        cams = tuple(c if isinstance(c, Camera) else Camera(c) for c in self.cameras)
        if len(m) != len(cams) or not cams:
            raise ContractError(f"{len(cams)} cameras for target dims {m}")
        for i, (mi, cam) in enumerate(zip(m, cams), start=1):
            if cam.matrix.shape != (mi + 1, self.n + 1):
                raise ContractError(
                    f"camera {i} has shape {cam.matrix.shape}, expected {(mi + 1, self.n + 1)}"
                )
            if not 1 <= mi < self.n:
                raise ContractError(f"camera {i}: need 1 <= m_i < n, got m_i={mi}, n={self.n}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "cameras", cams)

    @classmethod
    def from_matrices(cls, matrices):
        """Infer (n, m) from a list of camera matrices."""
        mats = [cn.as_matrix(M, name="camera matrix") for M in matrices]
        if not mats:
            raise ContractError("a configuration needs at least one camera")
        return cls(n=mats[0].shape[1] - 1, m=tuple(M.shape[0] - 1 for M in mats), cameras=tuple(mats))

    @property
    def r(self):
        return len(self.cameras)

    @property
    def matrices(self):
        return [c.matrix for c in self.cameras]

    @property
    def offsets(self):
        """Row offset of each camera block in the stacked matrix."""
        return np.concatenate([[0], np.cumsum([mi + 1 for mi in self.m])])[:-1]

    @property
    def stacked(self):
        """The Σ(m_i+1)×(n+1) matrix of s: V → ⊕W_i."""
        return np.vstack(self.matrices)

    def with_matrices(self, matrices):
        return CameraConfig(n=self.n, m=self.m, cameras=tuple(matrices))


def split_stacked(n, m, stacked):
    """Cut a stacked matrix back into a configuration of shape (n, m)."""
    stacked = cn.as_matrix(stacked, name="stacked matrix")
    bounds = np.cumsum([0] + [mi + 1 for mi in m])
    return CameraConfig(n=n, m=tuple(m), cameras=tuple(stacked[a:b] for a, b in zip(bounds, bounds[1:])))


def random_config(n, m, seed):
    """Gaussian camera configuration that passes validate_genericity.

    Args:
        n: Source projective dimension.
        m: Target dimensions, each 1 <= m_i < n.
        seed: Integer seed; equal seeds give bitwise-equal matrices.

    Raises:
        ContractError: when some m_i >= n.
        GenerationError: after GENERATION_CAP consecutive rejections.
    """
    m = tuple(int(v) for v in m)
    if any(not 1 <= mi < n for mi in m):
        raise ContractError(f"need 1 <= m_i < n for every camera, got n={n}, m={m}")

    rng = cn.rng_for(seed)
    for attempt in range(config.GENERATION_CAP):
        mats = [rng.standard_normal((mi + 1, n + 1)) for mi in m]
        cfg = CameraConfig(n=n, m=m, cameras=tuple(mats))
        if validate_genericity(cfg)["passed"]:
            return cfg
        logger.debug("random_config: attempt %d rejected", attempt)
    raise GenerationError(f"no generic configuration for n={n}, m={m} after {config.GENERATION_CAP} draws")


def random_homography(n, seed):
    """Random invertible (n+1)×(n+1) matrix with condition number below 1e3."""
    rng = cn.rng_for(seed, 7919)
    for _ in range(config.GENERATION_CAP):
        H = rng.standard_normal((n + 1, n + 1))
        if np.linalg.cond(H) < 1e3:
            return H
    raise GenerationError("could not draw a well-conditioned homography")


def focal_basis(camera):
    """Orthonormal basis of ker s_i as columns; Z_i = P(ker s_i)."""
    cam = camera if isinstance(camera, Camera) else Camera(camera)
    return cn.nullspace(cam.matrix)


def project(cfg, z, tol=config.INDETERMINACY_TOL):
    """Images x_i = s_i·z of a scene point.

    Raises:
        IndeterminacyError: naming the first camera whose focal locus holds z.
    """
    z = cn.as_vector(z, name="scene point")
    if z.size != cfg.n + 1:
        raise ContractError(f"scene point has {z.size} coordinates, expected {cfg.n + 1}")
    images = []
    z_norm = np.linalg.norm(z)
    for i, cam in enumerate(cfg.cameras, start=1):
        x = cam.matrix @ z
        if np.linalg.norm(x) <= tol * np.linalg.norm(cam.matrix, 2) * z_norm:
            raise IndeterminacyError(i)
        images.append(x)
    return tuple(images)


def apply_homography(cfg, H):
    """Right action of PGL(n+1): every s_i becomes s_i·H.

    Raises:
        InputError: when H is singular.
    """
    H = cn.as_matrix(H, name="homography")
    if H.shape != (cfg.n + 1, cfg.n + 1):
        raise ContractError(f"homography must be {(cfg.n + 1, cfg.n + 1)}, got {H.shape}")
    if cn.rank(H) < cfg.n + 1:
        raise InputError("homography is singular")
    return cfg.with_matrices([M @ H for M in cfg.matrices])


def validate_genericity(cfg, tol=config.RANK_TOL):
    """Rank certificates for a configuration.

    Args:
        cfg: CameraConfig.
        tol: Relative singular-value threshold.

    Returns:
        dict: {"passed": bool, "checks": [{"name", "passed", "margin"}, ...]}
            where margin is the deciding singular value over the largest one.
    """
    report = {"passed": True, "checks": []}

    def _check(name, M, required):
        s = cn.singular_values(M)
        margin = float(config.safe_divide(s[required - 1], s[0])) if required <= s.size else 0.0
        passed = margin > tol
        report["checks"].append({"name": name, "passed": passed, "margin": margin})
        report["passed"] = report["passed"] and passed

    # each s_i surjective
    for i, (mi, M) in enumerate(zip(cfg.m, cfg.matrices), start=1):
        _check(f"surjective_{i}", M, mi + 1)

    # stacked s injective
    if sum(mi + 1 for mi in cfg.m) >= cfg.n + 1:
        _check("injective", cfg.stacked, cfg.n + 1)

    # focal loci pairwise in general position
    for i in range(cfg.r):
        for j in range(i + 1, cfg.r):
            pair = np.vstack([cfg.matrices[i], cfg.matrices[j]])
            required = min(cfg.m[i] + cfg.m[j] + 2, cfg.n + 1)
            _check(f"pairwise_{i + 1}_{j + 1}", pair, required)

    return report


def require_injective(cfg, tol=config.RANK_TOL):
    """Raise DegeneracyError unless the stacked matrix has rank n+1."""
    got = cn.rank(cfg.stacked, tol)
    if got < cfg.n + 1:
        raise DegeneracyError(f"stacked camera matrix has rank {got} < {cfg.n + 1}")
