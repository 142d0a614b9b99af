import json

import numpy as np
import pytest

from modules import correspond, gtensor, persistence, reconstruct, scene
from modules.errors import InputError


def test_config_round_trip(tmp_path, cfg_three):
    path = persistence.save_config(tmp_path / "cams.json", cfg_three)
    loaded = persistence.load_config(path)
    assert (loaded.n, loaded.m) == (cfg_three.n, cfg_three.m)
    assert np.array_equal(loaded.stacked, cfg_three.stacked)


def test_tensor_round_trip_is_exact(tmp_path, cfg_three, profile_three):
    A = gtensor.compute_tensor(cfg_three, profile_three)
    loaded = persistence.load_tensor(persistence.save_tensor(tmp_path / "A.json", A))
    assert loaded.profile == A.profile
    assert np.array_equal(loaded.entries, A.entries)
    persistence.save_tensor(tmp_path / "B.json", loaded)
    assert (tmp_path / "A.json").read_bytes() == (tmp_path / "B.json").read_bytes()


def test_correspondences_round_trip(tmp_path, cfg_pair, profile_pair):
    cs = correspond.sample_correspondences(cfg_pair, profile_pair, 12, seed=3)
    loaded = persistence.load_correspondences(persistence.save_correspondences(tmp_path / "cs.json", cs))
    assert len(loaded.tuples) == 12
    assert np.array_equal(correspond.coefficient_matrix(loaded), correspond.coefficient_matrix(cs))


def test_points_round_trip(tmp_path):
    points = [(np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 1.0]))]
    persistence.save_points(tmp_path / "pts.json", 3, (2, 2), points)
    n, m, loaded = persistence.load_points(tmp_path / "pts.json")
    assert (n, m) == (3, (2, 2))
    assert np.array_equal(loaded[0][1], points[0][1])


def test_points_shape_mismatch(tmp_path):
    (tmp_path / "pts.json").write_text(json.dumps({"n": 3, "m": [2, 2], "points": [[[1, 2, 3], [1, 2]]]}))
    with pytest.raises(InputError, match="point tuple 0"):
        persistence.load_points(tmp_path / "pts.json")


def test_results_file_lists_orbit_configs(tmp_path, cfg_pair, profile_pair):
    results = [reconstruct.ReconstructionResult(config=cfg_pair, residual=1e-12, restarts_used=5,
                                                orbit_label="primary", hits=4, lm_hits=3)]
    persistence.save_results(tmp_path / "result.json", results, profile_pair)
    data = persistence.read_json(tmp_path / "result.json")
    assert data["restarts_used"] == 5
    assert data["orbits"][0]["label"] == "primary"
    assert data["orbits"][0]["lm_hits"] == 3
    assert np.array_equal(np.vstack(data["orbits"][0]["cameras"]), cfg_pair.stacked)


def test_dumps_is_sorted_and_plain():
    text = persistence.dumps({"b": np.float64(1.5), "a": np.arange(2), "c": np.bool_(True)})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [0, 1], "b": 1.5, "c": True}
    assert text.index('"a"') < text.index('"b"')


@pytest.mark.parametrize("content,message", [
    ("", "empty"),
    ("{not json", "invalid JSON"),
    ("[1, 2]", "JSON object"),
])
def test_read_json_rejects_bad_files(tmp_path, content, message):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(InputError, match=message):
        persistence.read_json(path)


def test_read_json_missing_file(tmp_path):
    with pytest.raises(InputError, match="not found"):
        persistence.read_json(tmp_path / "missing.json")


def test_missing_field_is_named(tmp_path):
    (tmp_path / "cams.json").write_text(json.dumps({"n": 3, "m": [2, 2]}))
    with pytest.raises(InputError, match="cameras"):
        persistence.load_config(tmp_path / "cams.json")


def test_tensor_with_wrong_entry_count(tmp_path):
    data = {"profile": {"n": 3, "m": [2, 2], "alpha": [2, 2]}, "entries": [1.0, 0.0, 0.0]}
    (tmp_path / "A.json").write_text(json.dumps(data))
    with pytest.raises(InputError):
        persistence.load_tensor(tmp_path / "A.json")


def test_profile_outside_interior_is_input_error(tmp_path):
    data = {"profile": {"n": 3, "m": [2, 2], "alpha": [1, 3]}, "entries": [1.0] * 3}
    (tmp_path / "A.json").write_text(json.dumps(data))
    with pytest.raises(InputError, match="B°"):
        persistence.load_tensor(tmp_path / "A.json")


def test_non_finite_camera_entries(tmp_path, cfg_pair):
    data = persistence.config_to_dict(cfg_pair)
    data["cameras"][0][0][0] = "nan"
    (tmp_path / "cams.json").write_text(json.dumps(data))
    with pytest.raises(InputError):
        persistence.load_config(tmp_path / "cams.json")


def test_save_creates_parent_directories(tmp_path):
    cfg = scene.random_config(2, (1, 1, 1), seed=0)
    path = persistence.save_config(tmp_path / "deep" / "dir" / "cams.json", cfg)
    assert path.exists()
