"""
reconstruct.py — Camera Recovery up to PGL(n+1)
Orbit membership, gauge fixing, Levenberg–Marquardt recovery from a Grassmann
tensor, projective factorization from point tuples, and the tensor-map
Jacobian rank.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

import config
from modules import core_numeric as cn
from modules import correspond, gtensor, scene, twist
from modules.errors import ContractError, ConvergenceError, DegeneracyError, InputError

logger = logging.getLogger(__name__)

PRIMARY = "primary"
TWISTED = "twisted"


@dataclass(frozen=True, eq=False)
class Homography:
    """H modulo scale, stored with unit Frobenius norm."""

    matrix: np.ndarray

    def __post_init__(self):
        H = cn.as_matrix(self.matrix, name="homography")
        if H.shape[0] != H.shape[1] or cn.rank(H) < H.shape[0]:
            raise InputError("homography must be square and invertible")
        H = H / np.linalg.norm(H)
        H.setflags(write=False)
        object.__setattr__(self, "matrix", H)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    config: scene.CameraConfig
    residual: float
    restarts_used: int
    orbit_label: str = None
    hits: int = 1
    lm_hits: int = 0
    restart_residuals: tuple = ()


@dataclass(frozen=True, eq=False)
class PointReconstruction:
    config: scene.CameraConfig
    points: np.ndarray
    residual: float
    iterations: int
    converged: bool
    degenerate: bool


#  Orbits & Gauge

def pgl_equivalent(a, b, tol=config.PGL_TOL):
    """Find H and λ_i with S^b_i = λ_i·S^a_i·H for every camera.

    Solves S^a_i·K − μ_i·S^b_i = 0 for (K, μ) on unit-normalized cameras.

    Returns:
        (Homography, np.ndarray of λ_i) or None when no such pair exists.
    """
    if (a.n, a.m) != (b.n, b.m):
        raise ContractError(f"shapes differ: n={a.n}, m={a.m} vs n={b.n}, m={b.m}")
    k = a.n + 1
    norms_a = [np.linalg.norm(M) for M in a.matrices]
    norms_b = [np.linalg.norm(M) for M in b.matrices]

    blocks = []
    for i, (Ma, Mb) in enumerate(zip(a.matrices, b.matrices)):
        Ma, Mb = Ma / norms_a[i], Mb / norms_b[i]
        mu_cols = np.zeros((Mb.size, a.r))
        mu_cols[:, i] = -Mb.ravel()
        blocks.append(np.hstack([np.kron(Ma, np.eye(k)), mu_cols]))
    system = np.vstack(blocks)

    basis = cn.nullspace(system, tol)
    if basis.shape[1] != 1:
        return None
    v = basis[:, 0]
    K, mu = v[: k * k].reshape(k, k), v[k * k:]
    if cn.rank(K, tol) < k or np.min(np.abs(mu)) <= tol * np.max(np.abs(mu)):
        return None
    H = Homography(K)
    # S^b_i = (|b_i| / (|a_i| μ_i)) S^a_i K, and K = |K|·H.
    scales = np.array([nb / (na * mu_i) for na, nb, mu_i in zip(norms_a, norms_b, mu)])
    return H, scales * np.linalg.norm(K)


def gauge_rows(cfg, tol=config.RANK_TOL):
    """Rows of the stacked matrix that become the identity block.

    The top n+1 rows when they are invertible; otherwise the first n+1
    pivots of a column-pivoted QR of the transposed stack, sorted.
    """
    S = cfg.stacked
    k = cfg.n + 1
    if cn.rank(S[:k], tol) == k:
        return np.arange(k)
    _, _, piv = scipy.linalg.qr(S.T, pivoting=True, mode="economic")
    rows = np.sort(piv[:k])
    if cn.rank(S[rows], tol) < k:
        raise DegeneracyError("no invertible (n+1)-row selection in the stacked matrix")
    return rows


def gauge_fix(cfg, tol=config.RANK_TOL):
    """Right-multiply by the inverse of the gauge block so it becomes I."""
    rows = gauge_rows(cfg, tol)
    return scene.apply_homography(cfg, np.linalg.inv(cfg.stacked[rows]))


#  Levenberg–Marquardt

def _fd_jacobian(fun, x, step=config.LM_FD_STEP):
    cols = []
    for j in range(x.size):
        h = step * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.column_stack(cols)


def levenberg_marquardt(
    fun,
    x0,
    damping=config.LM_DAMPING,
    up=config.LM_DAMPING_UP,
    down=config.LM_DAMPING_DOWN,
    max_iter=config.LM_MAX_ITER,
    step_tol=config.LM_STEP_TOL,
    residual_tol=config.LM_RESIDUAL_TOL,
):
    """Damped Gauss–Newton on a residual vector with central-difference Jacobian.

    Returns:
        tuple: (x, residual_norm, iterations)
    """
    x = np.array(x0, dtype=float)
    r = fun(x)
    cost = float(r @ r)
    J = _fd_jacobian(fun, x)
    lam = damping
    it = 0
    for it in range(1, max_iter + 1):
        if np.sqrt(cost) < residual_tol:
            break
        JTJ = J.T @ J
        delta = np.linalg.lstsq(JTJ + lam * np.eye(x.size), -(J.T @ r), rcond=None)[0]
        r_new = fun(x + delta)
        cost_new = float(r_new @ r_new)
        if cost_new < cost:
            x, r, cost = x + delta, r_new, cost_new
            lam *= down
            if np.linalg.norm(delta) < step_tol:
                break
            J = _fd_jacobian(fun, x)
        else:
            lam *= up
            if lam > 1e16:
                break
        logger.debug("lm: iter %d cost %.3e damping %.1e", it, cost, lam)
    return x, float(np.sqrt(cost)), it


#  Recovery From a Tensor

def _tensor_residual(profile, target, rows):
    """Residual map of the free (non-gauge) stacked rows."""
    k = profile.n + 1

    def fun(params):
        S = np.vstack([np.eye(k), params.reshape(-1, k)])
        raw = gtensor.stacked_minors(S, rows)
        norm = np.linalg.norm(raw)
        if norm == 0:
            return np.ones_like(target)
        t = raw / norm
        return (t if t @ target >= 0 else -t) - target

    return fun


def twisted_shape(n, m):
    """m = (1,…,1) with n+1 cameras: the shape with two orbits per tensor."""
    return len(m) == n + 1 and all(mi == 1 for mi in m)


def _candidate_residual(cfg, A):
    return cn.proj_distance(gtensor.tensor_entries(cfg, A.profile), A.entries)


def _run_restart(A, index, seed, init):
    p = A.profile
    k = p.n + 1
    free = sum(mi + 1 for mi in p.m) - k
    rng = cn.rng_for(seed, index)
    if init is not None and index == 0:
        x0 = gauge_fix(init).stacked[k:].ravel()
    else:
        x0 = rng.standard_normal(free * k)
    fun = _tensor_residual(p, A.entries, gtensor.row_selection(p))
    x, residual, iters = levenberg_marquardt(fun, x0)
    cfg = scene.split_stacked(p.n, p.m, np.vstack([np.eye(k), x.reshape(free, k)]))
    logger.debug("restart %d: residual %.3e after %d iterations", index, residual, iters)
    return cfg, residual


def reconstruct_from_tensor(A, restarts=config.DEFAULT_RESTARTS, seed=0, init=None, workers=None,
                            accept_residual=config.ACCEPT_RESIDUAL, pgl_tol=config.PGL_TOL):
    """Camera configurations whose Grassmann tensor is A, one per PGL orbit.

    Args:
        A: Canonical GrassmannTensor.
        restarts: Number of random gauge-fixed initializations.
        seed: Restart k draws from stream (seed, k).
        init: Optional configuration seeding restart 0.
        workers: Thread count; defaults to GTENSOR_THREADS.
        accept_residual: Largest projective distance a candidate may keep.
        pgl_tol: Tolerance of the orbit comparison used for de-duplication.

    Returns:
        list of ReconstructionResult sorted by residual. For m = (1^{n+1})
        the dual of each accepted candidate is evaluated too, so both orbits
        are reported with labels "primary" and "twisted". `lm_hits` counts the
        restarts whose own LM solution landed in the orbit, injected twins aside.

    Raises:
        ConvergenceError: when no candidate reaches accept_residual.
    """
    p = A.profile
    workers = workers or config.worker_count()

    def _one(index):
        return _run_restart(A, index, seed, init)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one, range(restarts)))
    else:
        runs = [_one(index) for index in range(restarts)]

    twisted = twisted_shape(p.n, p.m)
    candidates = []
    best = min((res for _, res in runs), default=float("inf"))
    for index, (cfg, residual) in enumerate(runs):
        if residual > accept_residual or not scene.validate_genericity(cfg)["passed"]:
            continue
        candidates.append((residual, index, cfg, True))
        if twisted:
            twin = gauge_fix(twist.identified_dual(cfg))
            twin_residual = _candidate_residual(twin, A)
            if twin_residual <= accept_residual and scene.validate_genericity(twin)["passed"]:
                candidates.append((twin_residual, index, twin, False))

    if not candidates:
        logger.warning("reconstruction failed: best residual %.3e over %d restarts", best, restarts)
        raise ConvergenceError(best)

    # deduplicate by orbit
    orbits = []
    for residual, index, cfg, direct in sorted(candidates, key=lambda c: (c[0], c[1])):
        for orbit in orbits:
            if pgl_equivalent(orbit["config"], cfg, pgl_tol) is not None:
                orbit["hits"] += 1
                orbit["lm_hits"] += int(direct)
                break
        else:
            orbits.append({"config": cfg, "residual": residual, "hits": 1, "lm_hits": int(direct)})

    labels = [None] * len(orbits)
    if twisted:
        labels[0] = PRIMARY
        twin = twist.identified_dual(orbits[0]["config"])
        for j in range(1, len(orbits)):
            if pgl_equivalent(twin, orbits[j]["config"], pgl_tol) is not None:
                labels[j] = TWISTED

    logger.info("reconstruction: %d orbit(s) from %d accepted candidates", len(orbits), len(candidates))
    return [
        ReconstructionResult(
            config=o["config"], residual=o["residual"], restarts_used=restarts,
            orbit_label=label, hits=o["hits"], lm_hits=o["lm_hits"],
            restart_residuals=tuple(res for _, res in runs),
        )
        for o, label in zip(orbits, labels)
    ]


#  Recovery From Point Tuples

def _reprojection_residual(unit_obs, bounds, shape_P, shape_X):
    """Components of each reprojection orthogonal to its observed unit image."""
    split = shape_P[0] * shape_P[1]

    def fun(params):
        Y = params[:split].reshape(shape_P) @ params[split:].reshape(shape_X)
        parts = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            block, obs = Y[lo:hi], unit_obs[lo:hi]
            norms = np.linalg.norm(block, axis=0)
            if np.any(norms == 0):
                return np.ones(Y.size)
            block = block / norms
            parts.append(block - obs * np.sum(block * obs, axis=0))
        return np.concatenate([p.ravel() for p in parts])

    return fun


def reconstruct_from_points(points, n, m, profile=None, iters=config.POINT_FACTOR_ITERS,
                            tol=config.POINT_FACTOR_TOL):
    """Alternating projective factorization, finished by joint LM refinement.

    Args:
        points: One tuple of r image points per scene point.
        n: Source dimension.
        m: Target dimensions.
        profile: Profile whose minimal point count applies; defaults to
            gtensor.default_profile(n, m).
        iters: Maximum alternations.
        tol: Stop once the mean projective reprojection error falls below.

    Returns:
        PointReconstruction; `degenerate` flags a measurement rank below n+1,
        `converged` is False when neither stage reached tol.
    """
    m = tuple(m)
    k = n + 1
    profile = profile or gtensor.default_profile(n, m)
    needed = max(n + 2, correspond.min_point_tuples(profile))
    if len(points) < needed:
        raise ContractError(f"{len(points)} point tuples, at least {needed} required for profile {profile.alpha}")
    obs = []
    for j, images in enumerate(points):
        if len(images) != len(m):
            raise ContractError(f"point tuple {j} has {len(images)} images for {len(m)} cameras")
        tup = []
        for i, (x, mi) in enumerate(zip(images, m), start=1):
            x = cn.as_vector(x, name=f"image {i} of point {j}")
            if x.size != mi + 1:
                raise ContractError(f"image {i} of point {j} has {x.size} coordinates, expected {mi + 1}")
            tup.append(x / np.linalg.norm(x))
        obs.append(tup)

    bounds = np.cumsum([0] + [mi + 1 for mi in m])
    N, r = len(obs), len(m)
    depths = np.ones((r, N))

    def _measurements():
        W = np.zeros((bounds[-1], N))
        for j in range(N):
            for i in range(r):
                W[bounds[i]:bounds[i + 1], j] = depths[i, j] * obs[j][i]
        return W

    def _error(P, X):
        total = 0.0
        for j in range(N):
            for i in range(r):
                reproj = P[bounds[i]:bounds[i + 1]] @ X[:, j]
                total += cn.proj_distance(reproj, obs[j][i]) if np.any(reproj) else 1.0
        return total / (N * r)

    degenerate = False
    residual, it, P, X = float("inf"), 0, None, None
    checkpoint = float("inf")
    for it in range(1, iters + 1):
        depths /= np.linalg.norm(depths, axis=0, keepdims=True)
        U, s, Vt = np.linalg.svd(_measurements(), full_matrices=False)
        if it == 1 and (s.size < k or s[k - 1] <= config.RANK_TOL * s[0]):
            degenerate = True
            logger.warning("point factorization: measurement rank below n+1")
        P = U[:, :k] * s[:k]
        X = Vt[:k]
        residual = _error(P, X)
        if residual < tol or degenerate:
            break
        if it % config.POINT_STALL_WINDOW == 0:
            # stalled; LM finishes
            if residual > (1 - config.POINT_STALL_GAIN) * checkpoint:
                break
            checkpoint = residual
        PX = P @ X
        for i in range(r):
            block = PX[bounds[i]:bounds[i + 1]]
            depths[i] = np.einsum("jk,kj->j", np.array([obs[j][i] for j in range(N)]), block)

    if residual >= tol and not degenerate:
        unit_obs = np.column_stack([np.concatenate(tup) for tup in obs])
        fun = _reprojection_residual(unit_obs, bounds, P.shape, X.shape)
        x, _, lm_iters = levenberg_marquardt(fun, np.concatenate([P.ravel(), X.ravel()]))
        P_lm, X_lm = x[: P.size].reshape(P.shape), x[P.size:].reshape(X.shape)
        refined = _error(P_lm, X_lm)
        logger.debug("point factorization: LM refinement %.3e -> %.3e in %d iterations", residual, refined, lm_iters)
        if refined < residual:
            P, X, residual = P_lm, X_lm, refined

    converged = residual < tol
    if not converged:
        logger.warning("point factorization stopped at residual %.3e after %d alternations", residual, it)
    return PointReconstruction(
        config=scene.split_stacked(n, m, P), points=X.T.copy(), residual=residual,
        iterations=it, converged=converged, degenerate=degenerate,
    )


#  Fiber Dimension

def expected_jacobian_rank(n, m):
    """Σ((n+1)(m_i+1) − 1) − ((n+1)² − 1)."""
    return sum((n + 1) * (mi + 1) - 1 for mi in m) - ((n + 1) ** 2 - 1)


def dominance_expected(n, m):
    """Whether |m| >= 2n − 1, the dominance hypothesis."""
    return sum(m) >= 2 * n - 1


def tensor_map_jacobian_rank(cfg, profile, h=config.JACOBIAN_STEP, tol=config.JACOBIAN_RANK_TOL):
    """Numerical rank of d(canonical tensor)/d(camera entries) at cfg.

    Raises:
        InputError: for h <= 0.
    """
    if h <= 0:
        raise InputError(f"finite-difference step must be positive, got {h}")
    scene.require_injective(cfg)
    rows = gtensor.row_selection(profile)
    base = gtensor.tensor_entries(cfg, profile)
    base = base / np.linalg.norm(base)
    S0 = cfg.stacked

    def _unit(S):
        t = gtensor.stacked_minors(S, rows)
        t = t / np.linalg.norm(t)
        return t if t @ base >= 0 else -t

    cols = []
    for a in range(S0.shape[0]):
        for b in range(S0.shape[1]):
            E = np.zeros_like(S0)
            E[a, b] = h
            cols.append((_unit(S0 + E) - _unit(S0 - E)) / (2 * h))
    return cn.rank(np.column_stack(cols), tol)
