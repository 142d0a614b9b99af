import numpy as np
import pytest

from modules import core_numeric as cn
from modules import correspond, gtensor, scene
from modules.errors import AmbiguityError, ContractError, InputError


def test_sampling_is_deterministic_across_workers(cfg_three, profile_three):
    serial = correspond.sample_correspondences(cfg_three, profile_three, 12, seed=3, workers=1)
    pooled = correspond.sample_correspondences(cfg_three, profile_three, 12, seed=3, workers=4)
    assert len(serial) == 12
    for a, b in zip(serial.tuples, pooled.tuples):
        assert all(np.array_equal(F, G) for F, G in zip(a.forms, b.forms))
    assert all(np.array_equal(z, w) for z, w in zip(serial.provenance, pooled.provenance))


def test_sampled_subspaces_contain_the_images(cfg_three, profile_three):
    cs = correspond.sample_correspondences(cfg_three, profile_three, 5, seed=0)
    for t, z in zip(cs.tuples, cs.provenance):
        for F, x in zip(t.forms, scene.project(cfg_three, z)):
            assert np.allclose(F @ x, 0.0, atol=1e-10 * np.linalg.norm(F) * np.linalg.norm(x))


def test_set_rejects_wrong_form_shapes(profile_three):
    bad = gtensor.CodimSubspaceTuple(forms=(np.eye(3)[:1], np.eye(3)[:1], np.eye(3)[:2]))
    with pytest.raises(ContractError):
        correspond.CorrespondenceSet(profile=profile_three, tuples=(bad,))


#  Estimation

@pytest.mark.parametrize("n, m, alpha", [
    (3, (2, 2), (2, 2)),
    (3, (2, 2, 2), (2, 1, 1)),
    (3, (1, 1, 1, 1), (1, 1, 1, 1)),
    (4, (2, 2, 3), (2, 1, 2)),
])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_minimal_exact_count_recovers_tensor(n, m, alpha, seed):
    cfg = scene.random_config(n, m, seed=100 + seed)
    profile = gtensor.Profile(alpha=alpha, n=n, m=m)
    cs = correspond.sample_correspondences(cfg, profile, profile.size - 1, seed=seed)
    estimate, diag = correspond.estimate_tensor(cs)
    truth = gtensor.compute_tensor(cfg, profile)
    assert cn.proj_distance(estimate.entries, truth.entries) <= 1e-8
    assert diag["corank"] == 1
    assert len(diag["spectrum"]) == profile.size


def test_too_few_correspondences_is_a_contract_error(cfg_pair, profile_pair):
    cs = correspond.sample_correspondences(cfg_pair, profile_pair, 5, seed=0)
    with pytest.raises(ContractError):
        correspond.estimate_tensor(cs)


def test_underdetermined_system_is_ambiguous(cfg_pair, profile_pair):
    cs = correspond.sample_correspondences(cfg_pair, profile_pair, profile_pair.size - 2, seed=0)
    with pytest.raises(AmbiguityError) as info:
        correspond.estimate_tensor(cs, min_count=1)
    assert info.value.corank == 2


def test_estimate_passes_heldout_tuples(cfg_three, profile_three):
    cs = correspond.sample_correspondences(cfg_three, profile_three, 40, seed=1)
    estimate, _ = correspond.estimate_tensor(cs)
    heldout = correspond.sample_correspondences(cfg_three, profile_three, 20, seed=99)
    assert correspond.heldout_residual(estimate, heldout.tuples) <= 1e-8


def test_point_tuples_expand_into_subspace_tuples(cfg_pair, profile_pair):
    rng = np.random.default_rng(8)
    points = [scene.project(cfg_pair, rng.standard_normal(4)) for _ in range(20)]
    cs = correspond.expand_point_tuples(points, profile_pair, k=3, seed=0)
    assert len(cs) == 60
    estimate, _ = correspond.estimate_tensor(cs)
    assert cn.proj_distance(estimate.entries, gtensor.compute_tensor(cfg_pair, profile_pair).entries) <= 1e-8


#  Noise

def test_add_noise_validates_sigma(cfg_pair, profile_pair):
    t = correspond.sample_correspondence(cfg_pair, profile_pair, 0)
    assert correspond.add_noise(t, 0.0, 1) is t
    noisy = correspond.add_noise(t, 1e-3, 1)
    assert not np.array_equal(noisy.forms[0], t.forms[0])
    with pytest.raises(InputError):
        correspond.add_noise(t, -1.0, 1)


def test_noise_sweep_degrades_with_sigma(cfg_three, profile_three):
    sweep = correspond.noise_sweep(cfg_three, profile_three, sigmas=[0.0, 1e-8, 1e-4], seed=2)
    assert list(sweep.columns) == ["sigma", "error", "bound", "within_bound"]
    assert len(sweep) == 3
    assert sweep["error"].iloc[0] <= 1e-8
    assert sweep["error"].iloc[2] > sweep["error"].iloc[1]
