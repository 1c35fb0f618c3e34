"""Flat ``key = value`` experiment configuration.

Example::

    mode = hardware
    initial_fidelity = 0.7   # comments allowed
    [hardware]
    p_cav = 0.01
    eta = 0.7

Keys above the ``[hardware]`` header belong to the experiment, keys below
it describe the apparatus. Command-line values override file values, which
override the defaults here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from .core import DEFAULT_TOL
from .hardware import CavityParams, HardwareParams
from .oracle import ORACLE_TOL

MODES = ("purify", "concentrate", "iterate", "hardware", "verify")
VARIANTS = ("psi", "phi")


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


def _float(v) -> float:
    return float(v)


def _int(v) -> int:
    if isinstance(v, str):
        v = v.strip()
        if not v.lstrip("+-").isdigit():
            raise ValueError(v)
    elif isinstance(v, float) and not v.is_integer():
        raise ValueError(v)
    return int(v)


def _grid(v) -> Tuple[float, ...]:
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    return tuple(float(x) for x in str(v).split(",") if x.strip())


def _text(v) -> str:
    return str(v).strip()


TOP_KEYS = {
    "mode": _text,
    "initial_fidelity": _float,
    "a_squared": _float,
    "variant": _text,
    "rounds": _int,
    "trials": _int,
    "seed": _int,
    "workers": _int,
    "output": _text,
    "tolerance": _float,
    "verify_tolerance": _float,
    "fidelity_grid": _grid,
    "a_squared_grid": _grid,
}
HARDWARE_KEYS = {
    name: _float
    for name in (
        "p_cav", "eta", "zeta", "xi", "photon_rate",
        "finesse", "length", "gamma", "coupling", "loss",
        "dipole", "wavelength", "mode_volume",
    )
}


@dataclass(frozen=True)
class HardwareBlock:
    p_cav: Optional[float] = None
    eta: Optional[float] = None
    zeta: Optional[float] = None
    xi: float = 1.0
    photon_rate: Optional[float] = None
    finesse: Optional[float] = None
    length: Optional[float] = None
    gamma: Optional[float] = None
    coupling: Optional[float] = None
    loss: Optional[float] = None
    dipole: Optional[float] = None
    wavelength: Optional[float] = None
    mode_volume: Optional[float] = None

    def cavity(self) -> CavityParams:
        if self.loss is None:
            raise ConfigError("missing required key 'loss' (or give p_cav directly)", "loss")
        return CavityParams(
            loss=self.loss, finesse=self.finesse, length=self.length, coupling=self.coupling,
            dipole=self.dipole, wavelength=self.wavelength, mode_volume=self.mode_volume, gamma=self.gamma,
        )

    def params(self) -> HardwareParams:
        for key in ("eta", "zeta", "photon_rate"):
            if getattr(self, key) is None:
                raise ConfigError(f"missing required key '{key}' in [hardware]", key)
        p_cav = self.p_cav
        if p_cav is None:
            try:
                p_cav = self.cavity().p_cav()
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"cannot derive p_cav: {exc}", "p_cav") from exc
        return HardwareParams(p_cav=p_cav, eta=self.eta, zeta=self.zeta, xi=self.xi, photon_rate=self.photon_rate)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    initial_fidelity: Optional[float] = None
    a_squared: Optional[float] = None
    variant: str = "psi"
    rounds: Optional[int] = None
    trials: int = 0
    seed: int = 0
    workers: int = 1
    output: Optional[str] = None
    tolerance: float = DEFAULT_TOL
    verify_tolerance: float = ORACLE_TOL
    fidelity_grid: Tuple[float, ...] = ()
    a_squared_grid: Tuple[float, ...] = ()
    hardware: HardwareBlock = field(default_factory=HardwareBlock)

    def hardware_params(self) -> HardwareParams:
        return self.hardware.params()


REQUIRED = {
    "purify": ("initial_fidelity",),
    "concentrate": ("a_squared",),
    "iterate": ("initial_fidelity", "rounds"),
    "hardware": (),
    "verify": (),
}


def read_pairs(text: str) -> Tuple[Dict[str, Tuple[str, int]], Dict[str, Tuple[str, int]]]:
    """Split config text into raw (value, line) maps for the two sections."""
    top: Dict[str, Tuple[str, int]] = {}
    hw: Dict[str, Tuple[str, int]] = {}
    section = top
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[hardware]":
                raise ConfigError(f"unknown section {line!r}", line=lineno)
            section = hw
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"malformed line {raw.strip()!r}; expected 'key = value'", line=lineno)
        allowed = TOP_KEYS if section is top else HARDWARE_KEYS
        if key not in allowed:
            where = "" if section is top else " in [hardware]"
            raise ConfigError(f"unknown key '{key}'{where}", key, lineno)
        if key in section:
            raise ConfigError(f"duplicate key '{key}'", key, lineno)
        section[key] = (value, lineno)
    return top, hw


def _convert(table, key, value, line):
    try:
        return table[key](value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {value!r}", key, line) from None


def _check_range(cfg: ExperimentConfig) -> None:
    def unit(key, v):
        if v is not None and not 0.0 <= v <= 1.0:
            raise ConfigError(f"{key} must lie in [0, 1], got {v!r}", key)

    unit("initial_fidelity", cfg.initial_fidelity)
    unit("a_squared", cfg.a_squared)
    for v in cfg.fidelity_grid:
        unit("fidelity_grid", v)
    for v in cfg.a_squared_grid:
        unit("a_squared_grid", v)
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {cfg.mode!r}", "mode")
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"variant must be 'psi' or 'phi', got {cfg.variant!r}", "variant")
    if cfg.rounds is not None and cfg.rounds < 0:
        raise ConfigError(f"rounds must be >= 0, got {cfg.rounds}", "rounds")
    if cfg.trials < 0:
        raise ConfigError(f"trials must be >= 0, got {cfg.trials}", "trials")
    if cfg.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg.workers}", "workers")
    for key in ("tolerance", "verify_tolerance"):
        v = getattr(cfg, key)
        if not (0 <= v < 1e-3 and math.isfinite(v)):
            raise ConfigError(f"{key} must lie in [0, 1e-3), got {v!r}", key)
    hw = cfg.hardware
    for key in ("p_cav", "eta", "zeta", "xi"):
        v = getattr(hw, key)
        if v is not None and not 0.0 < v <= 1.0:
            raise ConfigError(f"{key} must lie in (0, 1], got {v!r}", key)
    for key in ("photon_rate", "finesse", "length", "gamma", "coupling", "loss", "dipole", "wavelength", "mode_volume"):
        v = getattr(hw, key)
        if v is not None and not v > 0:
            raise ConfigError(f"{key} must be positive, got {v!r}", key)


def parse_config(text: str = "", overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Parse config text, apply ``overrides`` (None values ignored), validate.

    Override keys use the config names; hardware keys are accepted unqualified.
    """
    top_raw, hw_raw = read_pairs(text)
    top = {k: _convert(TOP_KEYS, k, v, line) for k, (v, line) in top_raw.items()}
    hw = {k: _convert(HARDWARE_KEYS, k, v, line) for k, (v, line) in hw_raw.items()}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in TOP_KEYS:
            top[key] = _convert(TOP_KEYS, key, value, None)
        elif key in HARDWARE_KEYS:
            hw[key] = _convert(HARDWARE_KEYS, key, value, None)
        else:
            raise ConfigError(f"unknown key '{key}'", key)

    if "mode" not in top:
        raise ConfigError("missing required key 'mode'", "mode")
    cfg = ExperimentConfig(hardware=HardwareBlock(**hw), **top)
    _check_range(cfg)
    for key in REQUIRED[cfg.mode]:
        if getattr(cfg, key) is None:
            raise ConfigError(f"missing required key '{key}' for mode {cfg.mode}", key)
    if cfg.mode == "hardware":
        if cfg.initial_fidelity is None and cfg.a_squared is None and not cfg.fidelity_grid and not cfg.a_squared_grid:
            raise ConfigError("missing required key 'initial_fidelity' or 'a_squared' for mode hardware", "initial_fidelity")
        cfg.hardware_params()
    return cfg
