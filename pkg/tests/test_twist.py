import numpy as np
import pytest

from modules import core_numeric as cn
from modules import gtensor, reconstruct, scene, twist
from modules.errors import BaseLocusError, ContractError
from tests.conftest import ones_profile


#  Dual Configuration

def test_dual_stack_annihilates_original(cfg_lines):
    dual = twist.dual_config(cfg_lines).config
    assert dual.m == cfg_lines.m
    product = cfg_lines.stacked.T @ dual.stacked
    assert np.abs(product).max() <= 1e-12 * np.linalg.norm(cfg_lines.stacked)


def test_dual_requires_lines(cfg_three):
    with pytest.raises(ContractError):
        twist.dual_config(cfg_three)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("seed", range(5))
def test_double_dual_returns_to_the_orbit(n, seed):
    cfg = scene.random_config(n, (1,) * (n + 1), seed=seed)
    double = twist.dual_config(twist.dual_config(cfg)).config
    assert reconstruct.pgl_equivalent(double, cfg) is not None


def test_identified_dual_is_a_different_orbit(cfg_lines):
    assert reconstruct.pgl_equivalent(cfg_lines, twist.identified_dual(cfg_lines)) is None


def test_identify_is_the_kernel_line():
    assert cn.proj_equal(twist.identify([1.0, 0.0]), [0.0, 1.0])
    f = np.array([2.0, -3.0])
    assert cn.proj_equal(twist.identify(twist.identify(f)), f)
    w = np.array([3.0, 2.0])
    assert f @ w == 0
    assert cn.proj_equal(twist.identify(f), w)
    with pytest.raises(ContractError):
        twist.identify([1.0, 2.0, 3.0])


def test_transported_dual_tensor_matches(cfg_lines):
    A = gtensor.compute_tensor(cfg_lines, ones_profile(cfg_lines))
    dual = twist.dual_config(cfg_lines).config
    moved = twist.transport_tensor(gtensor.compute_tensor(dual, ones_profile(dual)))
    assert cn.proj_distance(moved.entries, A.entries) <= 1e-8


def test_identified_dual_shares_the_tensor(cfg_lines):
    A = gtensor.compute_tensor(cfg_lines, ones_profile(cfg_lines))
    B = gtensor.compute_tensor(twist.identified_dual(cfg_lines), ones_profile(cfg_lines))
    assert cn.proj_distance(A.entries, B.entries) <= 1e-8


#  Hypersurface Equality

@pytest.mark.parametrize("n", [2, 3, 4])
def test_hypersurfaces_coincide(n):
    cfg = scene.random_config(n, (1,) * (n + 1), seed=50 + n)
    report = twist.verify_same_hypersurface(cfg, twist.dual_config(cfg), samples=200, seed=1)
    assert report["passed"], report
    assert report["samples"] == 200


def test_unrelated_dual_fails(cfg_lines):
    other = scene.random_config(cfg_lines.n, cfg_lines.m, seed=999)
    report = twist.verify_same_hypersurface(cfg_lines, other, samples=20, seed=1)
    assert not report["passed"]
    assert report["max_value"] > 1e-4


#  Linear Systems

def test_monomials_are_graded_lexicographic():
    exps = twist.monomial_exponents(3, 2)
    assert [tuple(e) for e in exps] == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_system_dimensions(n):
    cfg = scene.random_config(n, (1,) * (n + 1), seed=60 + n)
    everything = range(1, n + 2)
    assert twist.vanishing_system(cfg, n, everything).dimension == n + 1
    assert twist.vanishing_system(cfg, n - 1, range(2, n + 2)).dimension == 1
    assert twist.vanishing_system(cfg, n - 1, everything).dimension == 0


def test_system_forms_vanish_on_the_loci(cfg_lines):
    basis = twist.vanishing_system(cfg_lines, cfg_lines.n, range(1, cfg_lines.r + 1))
    rng = np.random.default_rng(0)
    for cam in cfg_lines.cameras:
        K = scene.focal_basis(cam)
        z = K @ rng.standard_normal(K.shape[1])
        assert np.abs(basis.evaluate(z)).max() <= 1e-9 * np.linalg.norm(z) ** cfg_lines.n


def test_loci_must_be_camera_indices(cfg_lines):
    with pytest.raises(ContractError):
        twist.vanishing_system(cfg_lines, 2, [0])


def test_plane_system_at_coordinate_points_is_standard_cremona():
    # camera i forgets coordinate i, so Z_i is the coordinate point e_i
    cameras = [np.delete(np.eye(3), i, axis=0) for i in range(3)]
    cfg = scene.CameraConfig(n=2, m=(1, 1, 1), cameras=tuple(cameras))
    basis = twist.vanishing_system(cfg, 2, [1, 2, 3])
    assert basis.dimension == 3
    squares = [k for k, e in enumerate(basis.exponents) if e.max() == 2]
    assert np.abs(basis.coefficients[:, squares]).max() <= 1e-12


#  Cremona Map

def test_cremona_map_is_consistent(cfg_lines):
    dual = twist.dual_config(cfg_lines)
    cremona = twist.cremona_map(cfg_lines, dual, seed=3)
    rng = np.random.default_rng(7)
    for _ in range(20):
        z = rng.standard_normal(cfg_lines.n + 1)
        w = twist.cremona_apply(cremona, z)
        for S, x in zip(dual.config.matrices, scene.project(cfg_lines, z)):
            assert cn.proj_distance(S @ w, twist.identify(x)) <= 1e-7


def test_dual_preimage_matches_identified_dual(cfg_lines):
    z = np.random.default_rng(1).standard_normal(cfg_lines.n + 1)
    x = scene.project(cfg_lines, z)
    w = twist.dual_preimage(twist.dual_config(cfg_lines), x)
    for M, xi in zip(twist.identified_dual(cfg_lines).matrices, x):
        assert cn.proj_distance(M @ w, xi) <= 1e-8


def test_contracted_hypersurface_lands_in_dual_focal_locus(cfg_lines):
    dual = twist.dual_config(cfg_lines)
    cremona = twist.cremona_map(cfg_lines, dual, seed=3)
    for i in range(1, cfg_lines.r + 1):
        surface = twist.contracted_hypersurface(cfg_lines, i)
        z = twist.sample_on_hypersurface(surface, (5, i))
        assert abs(surface.evaluate(z)[0]) <= 1e-8 * np.linalg.norm(surface.coefficients) * np.linalg.norm(z) ** surface.degree
        w = twist.cremona_apply(cremona, z)
        S = dual.config.matrices[i - 1]
        assert np.linalg.norm(S @ w) <= 1e-6 * np.linalg.norm(S, 2) * np.linalg.norm(w)


def test_cremona_rejects_base_points(cfg_lines):
    cremona = twist.cremona_map(cfg_lines, seed=0)
    z = scene.focal_basis(cfg_lines.cameras[0])[:, 0]
    with pytest.raises(BaseLocusError):
        twist.cremona_apply(cremona, z)


def test_cremona_needs_full_system(cfg_lines):
    partial = twist.vanishing_system(cfg_lines, cfg_lines.n - 1, range(2, cfg_lines.r + 1))
    with pytest.raises(ContractError):
        twist.align_cremona(partial, cfg_lines, twist.dual_config(cfg_lines))
