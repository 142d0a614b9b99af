"""
correspond.py — Subspace Correspondences & Tensor Estimation
Samples correspondences through scene points, perturbs them, and recovers the
Grassmann tensor as the nullspace of the incidence relations.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

import config
from modules import core_numeric as cn
from modules import gtensor, scene
from modules.errors import AmbiguityError, ContractError, GenerationError, IndeterminacyError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    """Tuples sharing one profile; provenance holds the scene point per tuple when known."""

    profile: gtensor.Profile
    tuples: tuple
    provenance: tuple = None

    def __post_init__(self):
        tuples = tuple(self.tuples)
        expected = tuple((a, mi + 1) for a, mi in zip(self.profile.alpha, self.profile.m))
        for k, t in enumerate(tuples):
            shapes = tuple(F.shape for F in t.forms)
            if shapes != expected:
                raise ContractError(f"tuple {k} has form shapes {shapes}, profile needs {expected}")
        object.__setattr__(self, "tuples", tuples)
        if self.provenance is not None:
            object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self):
        return len(self.tuples)


#  Sampling

def _draw(cfg, profile, rng):
    """One correspondence through a random scene point, with that point."""
    for _ in range(config.RESAMPLE_CAP):
        z = rng.standard_normal(cfg.n + 1)
        try:
            images = scene.project(cfg, z)
        except IndeterminacyError as exc:
            logger.debug("resampling: z hit focal locus of camera %d", exc.camera)
            continue
        forms = tuple(
            rng.standard_normal((a, mi)) @ cn.orthogonal_complement(x)
            for a, mi, x in zip(profile.alpha, profile.m, images)
        )
        return gtensor.CodimSubspaceTuple(forms=forms), z
    raise GenerationError(f"scene point sampling failed {config.RESAMPLE_CAP} times")


def sample_correspondence(cfg, profile, seed):
    """A subspace tuple whose U_i all contain φ_i(z) for one random z.

    Args:
        cfg: Generic CameraConfig.
        profile: Profile matching cfg.
        seed: Integer seed, or a (seed, index) pair for split streams.
    """
    seed = seed if isinstance(seed, (tuple, list)) else (seed,)
    return _draw(cfg, profile, cn.rng_for(*seed))[0]


def sample_correspondences(cfg, profile, count, seed, workers=None):
    """count tuples, tuple k drawn from stream (seed, k).

    The result does not depend on the number of workers.
    """
    workers = workers or config.worker_count()

    def _one(k):
        return _draw(cfg, profile, cn.rng_for(seed, k))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            drawn = list(pool.map(_one, range(count)))
    else:
        drawn = [_one(k) for k in range(count)]
    return CorrespondenceSet(
        profile=profile,
        tuples=tuple(t for t, _ in drawn),
        provenance=tuple(z for _, z in drawn),
    )


def add_noise(t, sigma, seed):
    """Gaussian perturbation of every F_i, std sigma·||F_i||/sqrt(entries).

    Raises:
        InputError: for negative sigma.
    """
    if sigma < 0:
        raise InputError(f"noise level must be non-negative, got {sigma}")
    if sigma == 0:
        return t
    seed = seed if isinstance(seed, (tuple, list)) else (seed,)
    rng = cn.rng_for(*seed)
    noisy = []
    for F in t.forms:
        scale = sigma * np.linalg.norm(F) / np.sqrt(F.size)
        noisy.append(F + rng.normal(0.0, scale, F.shape))
    return gtensor.CodimSubspaceTuple(forms=tuple(noisy))


def add_noise_to_set(cs, sigma, seed):
    """Noise on every tuple, tuple k from stream (seed, k)."""
    return CorrespondenceSet(
        profile=cs.profile,
        tuples=tuple(add_noise(t, sigma, (seed, k)) for k, t in enumerate(cs.tuples)),
        provenance=cs.provenance,
    )


def expand_point_tuples(points, profile, k=config.POINT_EXPANSION, seed=0):
    """Point correspondences → k subspace tuples through each point tuple.

    A point tuple imposes several linear conditions on the tensor; k random
    subspace tuples through it sample them.
    """
    tuples = []
    for j, images in enumerate(points):
        if len(images) != len(profile.m):
            raise ContractError(f"point tuple {j} has {len(images)} images for {len(profile.m)} cameras")
        rng = cn.rng_for(seed, j)
        for _ in range(k):
            forms = tuple(
                rng.standard_normal((a, mi)) @ cn.orthogonal_complement(x)
                for a, mi, x in zip(profile.alpha, profile.m, images)
            )
            tuples.append(gtensor.CodimSubspaceTuple(forms=forms))
    return CorrespondenceSet(profile=profile, tuples=tuple(tuples))


def min_point_tuples(profile, k=config.POINT_EXPANSION):
    """Point tuples needed for expand_point_tuples to reach D-1 relations."""
    return -(-(profile.size - 1) // k)


#  Estimation

def coefficient_matrix(cs):
    """Rows ∏_i p^i_{σ_i}(U_i), each scaled to unit norm."""
    rows = np.array([t.coefficient_row() for t in cs.tuples])
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def estimate_tensor(cs, tol=config.ESTIMATION_TOL, min_count=None):
    """Least-singular right vector of the coefficient matrix.

    Args:
        cs: CorrespondenceSet.
        tol: Relative singular-value threshold for the corank.
        min_count: Minimum number of tuples; defaults to D-1.

    Returns:
        tuple: (GrassmannTensor, diagnostics) where diagnostics holds the
            padded spectrum tail, the corank, and per-row residuals.

    Raises:
        ContractError: too few tuples.
        AmbiguityError: numerical corank >= 2.
    """
    D = cs.profile.size
    needed = D - 1 if min_count is None else min_count
    if len(cs) < needed:
        raise ContractError(f"{len(cs)} correspondences, at least {needed} required (D={D})")

    M = coefficient_matrix(cs)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    spectrum = np.zeros(D)
    spectrum[: s.size] = s
    corank = D - int(np.sum(spectrum > tol * spectrum[0]))
    if corank >= 2:
        raise AmbiguityError(corank)

    estimate = gtensor.GrassmannTensor(profile=cs.profile, entries=vt[-1])
    diagnostics = {
        "count": len(cs),
        "corank": corank,
        "sigma_last": float(spectrum[-1] / spectrum[0]),
        "sigma_second_last": float(spectrum[-2] / spectrum[0]) if D > 1 else 0.0,
        "spectrum": (spectrum / spectrum[0]).tolist(),
        "row_residuals": np.abs(M @ estimate.entries).tolist(),
    }
    logger.debug("estimate_tensor: corank %d, gap %.3e", corank, diagnostics["sigma_second_last"])
    return estimate, diagnostics


def heldout_residual(A, tuples):
    """Largest |incidence_value| over tuples, forms scaled to unit Plücker norm."""
    worst = 0.0
    for t in tuples:
        row = t.coefficient_row()
        worst = max(worst, abs(float(row @ A.entries)) / np.linalg.norm(row))
    return worst


def noise_sweep(cfg, profile, sigmas=None, count=None, seed=0):
    """Estimation error against ground truth for each noise level.

    Returns:
        pd.DataFrame with columns: sigma, error, bound, within_bound.
    """
    sigmas = config.NOISE_SWEEP if sigmas is None else sigmas
    count = 4 * profile.size if count is None else count
    truth = gtensor.compute_tensor(cfg, profile)
    exact = sample_correspondences(cfg, profile, count, seed)

    rows = []
    for k, sigma in enumerate(sigmas):
        noisy = add_noise_to_set(exact, sigma, seed + 1000 * (k + 1))
        estimate, _ = estimate_tensor(noisy)
        error = cn.proj_distance(estimate.entries, truth.entries)
        bound = config.NOISE_BOUND_FACTOR * max(sigma, config.NOISE_FLOOR)
        rows.append({"sigma": sigma, "error": error, "bound": bound, "within_bound": error <= bound})
        logger.info("noise sweep: sigma=%.1e error=%.3e", sigma, error)

    return pd.DataFrame(rows)
