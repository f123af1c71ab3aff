"""Run configuration: flat key=value files with defaults and validation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .params import AtomFieldParams

__all__ = ["RunConfig", "parse_config", "config_defaults", "MODES"]

MODES = ("kernels", "ladder-crossed", "totals", "verify-oracle", "sweep")
NORMALIZATIONS = ("none", "unit-peak")


@dataclass(frozen=True)
class RunConfig:
    """All inputs of one run; every field maps to one config key."""

    rabi: float = 0.1
    detuning: float = -5.0
    gamma: float = 1.0
    coupling_mod2: float = 1.0
    grid_points: int = 2001
    grid_span: float = 3.0
    quad_tol: float = 1e-8
    pair_multiplicity: int = 2
    mode: str = "ladder-crossed"
    normalization: str = "none"
    output_prefix: str = "atomcbs_out"
    oracle_g1: float = 0.01
    oracle_phases: int = 8
    sweep_rabi: Tuple[float, ...] = ()
    sweep_detuning: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.grid_points < 3:
            raise ValueError("grid_points must be at least 3")
        if not self.grid_span > 0:
            raise ValueError("grid_span must be positive")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        if self.pair_multiplicity < 1:
            raise ValueError("pair_multiplicity must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(
                f"normalization must be one of {NORMALIZATIONS}, "
                f"got {self.normalization!r}")
        if not self.oracle_g1 > 0:
            raise ValueError("oracle_g1 must be positive")
        if self.oracle_phases < 8:
            raise ValueError("oracle_phases must be at least 8")
        if self.mode == "sweep" and not (self.sweep_rabi and self.sweep_detuning):
            raise ValueError(
                "sweep mode needs non-empty sweep_rabi and sweep_detuning")
        # field-level physics validation with the field name in the message
        self.atom_params()

    def atom_params(self) -> AtomFieldParams:
        return AtomFieldParams(rabi=self.rabi, detuning=self.detuning,
                               gamma=self.gamma,
                               coupling_mod2=self.coupling_mod2)


def config_defaults() -> RunConfig:
    return RunConfig()


_FLOAT_KEYS = {"rabi", "detuning", "gamma", "coupling_mod2", "grid_span",
               "quad_tol", "oracle_g1"}
_INT_KEYS = {"grid_points", "pair_multiplicity", "oracle_phases"}
_STR_KEYS = {"mode", "normalization", "output_prefix"}
_LIST_KEYS = {"sweep_rabi", "sweep_detuning"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS


def _convert(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _LIST_KEYS:
            if not raw.strip():
                return ()
            return tuple(float(p) for p in raw.split(","))
        return raw
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: cannot parse value {raw!r}") from exc


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse flat key=value lines; unknown keys are an error.

    Blank lines and lines starting with '#' are ignored. Keys absent from
    the text take their defaults. `overrides` (already-typed values) are
    applied on top, for command-line flags.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        values[key] = _convert(key, raw.strip())
    if overrides:
        for key, val in overrides.items():
            if key not in _ALL_KEYS:
                raise ValueError(f"unknown config key: {key!r}")
            if val is not None:
                values[key] = val
    return RunConfig(**values)
