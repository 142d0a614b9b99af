"""
experiment.py — Experiment Configuration
One JSON file of experiment settings, overridden by command-line flags and
validated against the profile set B°(m).
"""

import dataclasses
from dataclasses import dataclass, field

import config
from modules import gtensor, persistence, reconstruct
from modules.errors import ContractError, InputError


@dataclass
class ExperimentConfig:
    n: int = config.DEFAULT_SHAPE[0]
    m: tuple = config.DEFAULT_SHAPE[1]
    alpha: tuple = config.DEFAULT_SHAPE[2]
    seed: int = 0
    correspondences: int = None
    restarts: int = config.DEFAULT_RESTARTS
    samples: int = 1000
    sigma: float = 0.0
    min_count: int = None
    accept_residual: float = config.ACCEPT_RESIDUAL
    pgl_tol: float = config.PGL_TOL
    seeds: int = 1
    out_dir: str = "out"
    plots: str = None
    sweep: list = field(default_factory=lambda: list(config.NOISE_SWEEP))

    def __post_init__(self):
        self.m = tuple(int(v) for v in self.m)
        self.alpha = None if self.alpha is None else tuple(int(a) for a in self.alpha)
        if self.sigma < 0:
            raise InputError(f"noise sigma must be non-negative, got {self.sigma}")
        if self.restarts < 1:
            raise InputError(f"restarts must be at least 1, got {self.restarts}")
        if self.seeds < 1:
            raise InputError(f"seeds must be at least 1, got {self.seeds}")

    @property
    def profile(self):
        """The validated Profile; a ContractError lists the valid ones."""
        if self.alpha is None:
            raise ContractError("no profile alpha given")
        return gtensor.Profile(alpha=self.alpha, n=self.n, m=self.m)

    def validate(self):
        """Raise ContractError unless alpha lies in B°(m)."""
        if self.alpha is not None:
            gtensor.Profile(alpha=self.alpha, n=self.n, m=self.m)
        return self

    @property
    def twisted_shape(self):
        return reconstruct.twisted_shape(self.n, self.m)

    def correspondence_count(self):
        return self.correspondences or 2 * self.profile.size

    def as_dict(self):
        data = dataclasses.asdict(self)
        data["m"], data["alpha"] = list(self.m), None if self.alpha is None else list(self.alpha)
        return data


def default_alpha(n, m):
    return gtensor.default_profile(n, m).alpha


def load(path=None, **overrides):
    """File settings first, then every override that is not None.

    Without an explicit alpha, a changed (n, m) takes default_alpha.

    Raises:
        InputError: unknown keys or malformed values.
        ContractError: alpha outside B°(m).
    """
    data = persistence.read_json(path) if path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InputError(f"unknown experiment settings: {unknown}")
    if "alpha" not in data and ("n" in data or "m" in data):
        data["alpha"] = default_alpha(int(data.get("n", config.DEFAULT_SHAPE[0])), data.get("m", config.DEFAULT_SHAPE[1]))
    try:
        exp = ExperimentConfig(**data)
    except (InputError, ContractError):
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid experiment settings ({exc})") from None
    exp.validate()
    return exp
