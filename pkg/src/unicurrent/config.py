"""Declarative experiment description, JSON round-trip and canonical hashing."""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

from .errors import InvalidArgument
from .wavefunction import BoxEigenstate, NaturalUnits, PiecewiseWavefunction, SupportKind

KINDS = (
    "propagate",
    "sweep-dt",
    "mass-beyond",
    "current",
    "diffusion-flux",
    "simulate-absorbing",
    "zeno",
    "moments",
)
QUANTUM_KINDS = ("propagate", "sweep-dt", "mass-beyond", "current")


class ConfigError(InvalidArgument):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    wavefunction: dict = None
    units: dict = field(default_factory=lambda: {"hbar": 1.0, "mass": 1.0})
    sweep: dict = None
    params: dict = field(default_factory=dict)
    tol: float = 1e-8
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "kind" not in data:
            raise ConfigError("config needs a 'kind'")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self):
        return canonical_json(self.to_dict())

    def config_hash(self):
        """sha256 of the canonical JSON with ``outputs`` left out (where results go is not what they are)."""
        d = self.to_dict()
        d.pop("outputs", None)
        return hashlib.sha256(canonical_json(d).encode("utf-8")).hexdigest()[:16]

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ConfigError("tol must be a positive number")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        for name in ("params", "outputs", "units"):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"{name} must be an object")
        self.natural_units()
        if self.kind in QUANTUM_KINDS:
            self.initial_state()
        if self.sweep is not None:
            s = self.sweep
            if not isinstance(s, dict) or not {"start", "stop"} <= set(s):
                raise ConfigError("sweep needs 'start' and 'stop'")
            if not 0 < s["start"] < s["stop"]:
                raise ConfigError("sweep needs 0 < start < stop")
        return self

    def natural_units(self):
        try:
            return NaturalUnits(float(self.units.get("hbar", 1.0)), float(self.units.get("mass", 1.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad units: {exc}") from exc

    def initial_state(self):
        return parse_wavefunction(self.wavefunction)


def parse_wavefunction(spec):
    """``{"coefficients": [[re, im], ...], "support": a, "kind": ...}`` or ``{"eigenstate": {"n", "a"}}``."""
    if not isinstance(spec, dict) or not spec:
        raise ConfigError("wavefunction must be a non-empty object")
    try:
        if "eigenstate" in spec:
            e = spec["eigenstate"]
            return BoxEigenstate(int(e["n"]), float(e.get("a", 1.0)))
        coeffs = spec.get("coefficients")
        if not coeffs:
            raise ConfigError("wavefunction has no coefficients")
        kind = SupportKind(spec.get("kind", "finite"))
        if kind is SupportKind.SEMI_INFINITE:
            return PiecewiseWavefunction.semi_infinite(coeffs)
        return PiecewiseWavefunction(coeffs, float(spec.get("support", 1.0)), kind)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad wavefunction: {exc}") from exc


def _canon(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return repr(obj)
        return obj
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def canonical_json(obj):
    """Sorted keys, no insignificant whitespace, shortest round-trip float repr."""
    return json.dumps(_canon(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
