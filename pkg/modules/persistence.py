"""
persistence.py — JSON Files
Reads and writes camera configurations, tensors, correspondence sets, point
tuples, reconstruction results and reports. Loaders validate the schema and
raise InputError with a readable message instead of a traceback.
"""

import json
import logging
from pathlib import Path

import numpy as np

from modules import gtensor, scene
from modules.correspond import CorrespondenceSet
from modules.errors import GeometryError, InputError

logger = logging.getLogger(__name__)

INDENT = 2


#  Raw Files

def read_json(path):
    """Parse a UTF-8 JSON file into a dict.

    Raises:
        InputError: missing file, empty file, invalid JSON, or a non-object root.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: could not read file ({exc})") from None

    if not text.strip():
        raise InputError(f"{path}: the file is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} ({exc.msg})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object at the top level")
    return data


def dumps(data):
    """Byte-stable serialization: sorted keys, fixed indent, trailing newline."""
    return json.dumps(_plain(data), sort_keys=True, indent=INDENT) + "\n"


def write_json(path, data):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _plain(obj):
    """numpy scalars and arrays to built-in types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _field(data, key, source):
    if key not in data:
        raise InputError(f"{source}: missing field '{key}'")
    return data[key]


def _parse(source, build):
    """Run a builder, turning schema surprises into InputError."""
    try:
        return build()
    except InputError:
        raise
    except GeometryError as exc:
        raise InputError(f"{source}: {exc}") from None
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise InputError(f"{source}: malformed content ({exc})") from None


#  Camera Configurations

def config_to_dict(cfg):
    return {"n": cfg.n, "m": list(cfg.m), "cameras": [M.tolist() for M in cfg.matrices]}


def config_from_dict(data, source="config"):
    def _build():
        n = int(_field(data, "n", source))
        m = tuple(int(v) for v in _field(data, "m", source))
        cams = [np.asarray(M, dtype=float) for M in _field(data, "cameras", source)]
        return scene.CameraConfig(n=n, m=m, cameras=tuple(cams))

    return _parse(source, _build)


def load_config(path):
    return config_from_dict(read_json(path), source=str(path))


def save_config(path, cfg):
    return write_json(path, config_to_dict(cfg))


#  Tensors

def profile_from_dict(data, source="profile"):
    def _build():
        return gtensor.Profile(
            alpha=tuple(int(a) for a in _field(data, "alpha", source)),
            n=int(_field(data, "n", source)),
            m=tuple(int(v) for v in _field(data, "m", source)),
        )

    return _parse(source, _build)


def tensor_to_dict(A):
    return {"profile": A.profile.as_dict(), "entries": A.entries.tolist()}


def tensor_from_dict(data, source="tensor"):
    profile = profile_from_dict(_field(data, "profile", source), source)
    return _parse(source, lambda: gtensor.GrassmannTensor(profile=profile, entries=_field(data, "entries", source)))


def load_tensor(path):
    return tensor_from_dict(read_json(path), source=str(path))


def save_tensor(path, A):
    return write_json(path, tensor_to_dict(A))


#  Correspondences & Points

def correspondences_to_dict(cs):
    return {
        "profile": cs.profile.as_dict(),
        "tuples": [{"forms": [F.tolist() for F in t.forms]} for t in cs.tuples],
    }


def correspondences_from_dict(data, source="correspondences"):
    profile = profile_from_dict(_field(data, "profile", source), source)

    def _build():
        tuples = tuple(
            gtensor.CodimSubspaceTuple(forms=tuple(np.asarray(F, dtype=float) for F in _field(t, "forms", source)))
            for t in _field(data, "tuples", source)
        )
        return CorrespondenceSet(profile=profile, tuples=tuples)

    return _parse(source, _build)


def load_correspondences(path):
    return correspondences_from_dict(read_json(path), source=str(path))


def save_correspondences(path, cs):
    return write_json(path, correspondences_to_dict(cs))


def points_to_dict(n, m, points):
    return {"n": n, "m": list(m), "points": [[np.asarray(x).tolist() for x in tup] for tup in points]}


def load_points(path):
    """Returns (n, m, points) with points a list of per-scene-point image tuples."""
    source = str(path)
    data = read_json(path)

    def _build():
        n = int(_field(data, "n", source))
        m = tuple(int(v) for v in _field(data, "m", source))
        points = [tuple(np.asarray(x, dtype=float) for x in tup) for tup in _field(data, "points", source)]
        for j, tup in enumerate(points):
            if len(tup) != len(m) or any(x.shape != (mi + 1,) for x, mi in zip(tup, m)):
                raise InputError(f"{source}: point tuple {j} does not match m={m}")
        return n, m, points

    return _parse(source, _build)


def save_points(path, n, m, points):
    return write_json(path, points_to_dict(n, m, points))


#  Reconstruction Results

def results_to_dict(results, profile):
    return {
        "profile": profile.as_dict(),
        "restarts_used": results[0].restarts_used if results else 0,
        "orbits": [
            {
                "label": res.orbit_label,
                "residual": res.residual,
                "hits": res.hits,
                "lm_hits": res.lm_hits,
                "cameras": [M.tolist() for M in res.config.matrices],
            }
            for res in results
        ],
    }


def save_results(path, results, profile):
    return write_json(path, results_to_dict(results, profile))
