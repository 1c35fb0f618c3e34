"""Photon-emission efficiency and heralded-pair throughput for 40Ca+ ions in cavities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import constants

C = constants.c
HBAR = constants.hbar
H = constants.h
EPS0 = constants.epsilon_0

# 40Ca+ level data (s^-1 and branching ratios), kept for estimating the loss rate.
RATE_P12_TO_S12 = 1.3e8
BRANCHING_P12_D32_VS_S12 = 1.0 / 15.0
BRANCHING_P32_D52_VS_S12 = 1.0 / 30.0
RATE_P32_TO_D52 = 0.5e7
WAVELENGTH_P32_S12 = 393e-9
WAVELENGTH_P32_D52 = 854e-9

# Operating point used for the throughput estimates.
NOMINAL_FINESSE = 19000.0
NOMINAL_LENGTH = 3e-3
NOMINAL_GAMMA = 9.9e6
NOMINAL_P_CAV = 0.01
NOMINAL_ETA = 0.7
NOMINAL_ZETA = 0.9
NOMINAL_XI = 1.0
NOMINAL_PHOTON_RATE = 3e6


def _positive(**values):
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")


def cavity_decay_rate(finesse: float, length: float) -> float:
    """gamma = 4 pi c / (finesse * length)."""
    _positive(finesse=finesse, length=length)
    return 4 * math.pi * C / (finesse * length)


def confocal_mode_volume(length: float, wavelength: float) -> float:
    _positive(length=length, wavelength=wavelength)
    return length**2 * wavelength / 4


def coupling_constant(dipole: float, wavelength: float, mode_volume: float) -> float:
    """Omega = (D / hbar) sqrt(h c / (2 eps0 lambda V))."""
    _positive(dipole=dipole, wavelength=wavelength, mode_volume=mode_volume)
    return dipole / HBAR * math.sqrt(H * C / (2 * EPS0 * wavelength * mode_volume))


def emission_probability(gamma: float, coupling: float, loss: float) -> float:
    """Probability that the excited ion emits into the cavity mode.

    p = 4 gamma Omega^2 / ((gamma + Gamma) (gamma Gamma + 4 Omega^2)).
    """
    _positive(gamma=gamma, coupling=coupling, loss=loss)
    w2 = 4 * coupling * coupling
    return gamma * w2 / ((gamma + loss) * (gamma * loss + w2))


@dataclass(frozen=True)
class CavityParams:
    """Cavity description; ``gamma`` and ``coupling`` override the derived values."""

    loss: float
    finesse: Optional[float] = None
    length: Optional[float] = None
    coupling: Optional[float] = None
    dipole: Optional[float] = None
    wavelength: Optional[float] = None
    mode_volume: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        for name in ("loss", "finesse", "length", "coupling", "dipole", "wavelength", "mode_volume", "gamma"):
            v = getattr(self, name)
            if v is not None:
                _positive(**{name: v})

    def decay_rate(self) -> float:
        if self.gamma is not None:
            return self.gamma
        if self.finesse is None or self.length is None:
            raise ValueError("need gamma or both finesse and length")
        return cavity_decay_rate(self.finesse, self.length)

    def coupling_rate(self) -> float:
        if self.coupling is not None:
            return self.coupling
        if self.dipole is None or self.wavelength is None:
            raise ValueError("need coupling or dipole and wavelength")
        volume = self.mode_volume
        if volume is None:
            if self.length is None:
                raise ValueError("need mode_volume or length for a confocal estimate")
            volume = confocal_mode_volume(self.length, self.wavelength)
        return coupling_constant(self.dipole, self.wavelength, volume)

    def p_cav(self) -> float:
        return emission_probability(self.decay_rate(), self.coupling_rate(), self.loss)


@dataclass(frozen=True)
class HardwareParams:
    p_cav: float = NOMINAL_P_CAV
    eta: float = NOMINAL_ETA
    zeta: float = NOMINAL_ZETA
    xi: float = NOMINAL_XI
    photon_rate: float = NOMINAL_PHOTON_RATE

    def __post_init__(self):
        for name in ("p_cav", "eta", "zeta", "xi"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        _positive(photon_rate=self.photon_rate)

    @property
    def efficiency(self) -> float:
        """p_cav^2 * eta^2/2 * zeta * xi."""
        return self.p_cav**2 * self.eta**2 / 2 * self.zeta * self.xi


def mixed_protocol_factor(fidelity: float) -> float:
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    return (fidelity**2 + (1 - fidelity) ** 2) / 32


def pure_protocol_factor(a_squared: float) -> float:
    if not 0.0 <= a_squared <= 1.0:
        raise ValueError(f"a_squared must lie in [0, 1], got {a_squared}")
    return a_squared * (1 - a_squared) / 8


def total_success_probability(
    hw: HardwareParams, *, fidelity: Optional[float] = None, a_squared: Optional[float] = None
) -> float:
    """Heralding probability per photon pair including hardware losses.

    Give exactly one of ``fidelity`` (mixed input) or ``a_squared`` (pure input).
    """
    if (fidelity is None) == (a_squared is None):
        raise ValueError("pass exactly one of fidelity or a_squared")
    factor = mixed_protocol_factor(fidelity) if fidelity is not None else pure_protocol_factor(a_squared)
    return factor * hw.efficiency


def throughput(probability: float, photon_rate: float) -> float:
    """Heralded pairs per minute."""
    if probability < 0:
        raise ValueError("probability must be non-negative")
    if photon_rate < 0:
        raise ValueError("photon_rate must be non-negative")
    return probability * photon_rate * 60.0
