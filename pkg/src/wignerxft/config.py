"""Experiment configuration: JSON schema, validation and defaults.

A config file looks like::

    {
      "oscillators": {"A": {"omega": 1.0, "temperature": 2.0},
                      "B": {"omega": 1.0, "temperature": 1.0}},
      "hbar": 1.0,
      "coupling": {"kind": "beam_splitter", "strength": 1.0},
      "tau": 1.5707963267948966,
      "n_samples": 1000000,
      "seed": 42,
      "histogram": {"bin_width": "auto", "range": "auto", "min_count": 25},
      "s_values": [0.25, 0.5, 0.75, 1.0],
      "sweep": {"hbar": [1.0, 0.5, 0.25, 0.125], "lambda": [0.4, 0.2, 0.1, 0.05]},
      "output_dir": "results"
    }

Only ``oscillators``, ``coupling`` and ``tau`` are required.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import COUPLING_KINDS, CouplingModel, ProtocolSpec
from .errors import XftError
from .states import OscillatorSpec

DEFAULT_S_VALUES = (0.25, 0.5, 0.75, 1.0)
DEFAULT_N_SAMPLES = 100_000
MIN_SAMPLES = 1000

_TOP_KEYS = {
    "oscillators", "hbar", "coupling", "tau", "n_samples", "seed",
    "histogram", "s_values", "sweep", "output_dir",
}


class ConfigError(XftError):
    """Invalid configuration. ``code`` is one of:

    ``missing_key``, ``non_positive``, ``unknown_coupling``, ``invalid_type``,
    ``invalid_value``, ``unknown_key``, ``unreadable``.
    """

    def __init__(self, code: str, key: str, message: str):
        self.code = code
        self.key = key
        super().__init__(f"{code}: {key}: {message}")


@dataclass(frozen=True)
class ModeConfig:
    omega: float
    temperature: float


@dataclass(frozen=True)
class HistogramConfig:
    bin_width: float | None = None
    half_range: float | None = None
    min_count: int = 25


@dataclass(frozen=True)
class SweepConfig:
    hbar: tuple[float, ...] = ()
    strength: tuple[float, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    mode_a: ModeConfig
    mode_b: ModeConfig
    coupling_kind: str
    coupling_strength: float
    tau: float
    hbar: float = 1.0
    n_samples: int = DEFAULT_N_SAMPLES
    seed: int = 0
    histogram: HistogramConfig = field(default_factory=HistogramConfig)
    s_values: tuple[float, ...] = DEFAULT_S_VALUES
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "results"

    def protocol(self, hbar: float | None = None, strength: float | None = None) -> ProtocolSpec:
        hb = self.hbar if hbar is None else hbar
        lam = self.coupling_strength if strength is None else strength
        return ProtocolSpec(
            OscillatorSpec(self.mode_a.omega, self.mode_a.temperature, hb),
            OscillatorSpec(self.mode_b.omega, self.mode_b.temperature, hb),
            CouplingModel(self.coupling_kind, lam),
            self.tau,
        )

    def to_dict(self) -> dict:
        return {
            "oscillators": {
                "A": {"omega": self.mode_a.omega, "temperature": self.mode_a.temperature},
                "B": {"omega": self.mode_b.omega, "temperature": self.mode_b.temperature},
            },
            "hbar": self.hbar,
            "coupling": {"kind": self.coupling_kind, "strength": self.coupling_strength},
            "tau": self.tau,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "histogram": {
                "bin_width": "auto" if self.histogram.bin_width is None else self.histogram.bin_width,
                "range": "auto" if self.histogram.half_range is None else self.histogram.half_range,
                "min_count": self.histogram.min_count,
            },
            "s_values": list(self.s_values),
            "sweep": {"hbar": list(self.sweep.hbar), "lambda": list(self.sweep.strength)},
            "output_dir": self.output_dir,
        }


def _get(d: dict, key: str, path: str, default=...):
    if not isinstance(d, dict):
        raise ConfigError("invalid_type", path, "expected an object")
    if key not in d:
        if default is ...:
            raise ConfigError("missing_key", f"{path}.{key}" if path else key, "required key is missing")
        return default
    return d[key]


def _number(value, key: str, *, positive: bool = True, allow_zero: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("invalid_type", key, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("invalid_value", key, "must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigError("non_positive", key, f"must be {bound}, got {value}")
    return value


def _integer(value, key: str, low: int, high: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("invalid_type", key, f"expected an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        code = "non_positive" if value <= 0 else "invalid_value"
        raise ConfigError(code, key, f"must lie in [{low}, {high if high is not None else 'inf'}], got {value}")
    return value


def _auto_or_positive(value, key: str) -> float | None:
    if value == "auto" or value is None:
        return None
    return _number(value, key)


def _number_list(value, key: str, *, allow_zero: bool = False) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError("invalid_type", key, "expected a list of numbers")
    return tuple(_number(v, f"{key}[{i}]", allow_zero=allow_zero) for i, v in enumerate(value))


def _mode(raw: dict, name: str) -> ModeConfig:
    path = f"oscillators.{name}"
    block = _get(raw, name, "oscillators")
    return ModeConfig(
        omega=_number(_get(block, "omega", path), f"{path}.omega"),
        temperature=_number(_get(block, "temperature", path), f"{path}.temperature"),
    )


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("invalid_type", "<root>", "config must be a JSON object")
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise ConfigError("unknown_key", unknown[0], f"valid keys: {', '.join(sorted(_TOP_KEYS))}")

    osc = _get(raw, "oscillators", "")
    coupling = _get(raw, "coupling", "")
    kind = _get(coupling, "kind", "coupling")
    if kind not in COUPLING_KINDS:
        raise ConfigError("unknown_coupling", "coupling.kind", f"{kind!r}; valid kinds: {', '.join(COUPLING_KINDS)}")

    hist = _get(raw, "histogram", "", {}) or {}
    sweep = _get(raw, "sweep", "", {}) or {}
    s_values = _get(raw, "s_values", "", list(DEFAULT_S_VALUES))
    if not isinstance(s_values, list) or not s_values:
        raise ConfigError("invalid_type", "s_values", "expected a non-empty list of numbers")

    output_dir = _get(raw, "output_dir", "", "results")
    if not isinstance(output_dir, str):
        raise ConfigError("invalid_type", "output_dir", "expected a string")

    return ExperimentConfig(
        mode_a=_mode(osc, "A"),
        mode_b=_mode(osc, "B"),
        coupling_kind=kind,
        coupling_strength=_number(_get(coupling, "strength", "coupling"), "coupling.strength", allow_zero=True),
        tau=_number(_get(raw, "tau", ""), "tau"),
        hbar=_number(_get(raw, "hbar", "", 1.0), "hbar"),
        n_samples=_integer(_get(raw, "n_samples", "", DEFAULT_N_SAMPLES), "n_samples", MIN_SAMPLES),
        seed=_integer(_get(raw, "seed", "", 0), "seed", 0, 2**64 - 1),
        histogram=HistogramConfig(
            bin_width=_auto_or_positive(hist.get("bin_width", "auto"), "histogram.bin_width"),
            half_range=_auto_or_positive(hist.get("range", "auto"), "histogram.range"),
            min_count=_integer(hist.get("min_count", 25), "histogram.min_count", 1),
        ),
        s_values=tuple(_number(v, f"s_values[{i}]", positive=False) for i, v in enumerate(s_values)),
        sweep=SweepConfig(
            hbar=_number_list(sweep.get("hbar", []), "sweep.hbar"),
            strength=_number_list(sweep.get("lambda", []), "sweep.lambda", allow_zero=True),
        ),
        output_dir=output_dir,
    )


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("unreadable", str(path), "file does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("unreadable", str(path), f"malformed JSON: {exc}") from None
    return config_from_dict(raw)


def showcase_config(n_samples: int = 1_000_000, seed: int = 42) -> ExperimentConfig:
    """Resonant full swap with omega = 1, T_A = 2, T_B = 1, hbar = 1."""
    return ExperimentConfig(
        mode_a=ModeConfig(1.0, 2.0),
        mode_b=ModeConfig(1.0, 1.0),
        coupling_kind="beam_splitter",
        coupling_strength=1.0,
        tau=math.pi / 2,
        n_samples=n_samples,
        seed=seed,
    )
