"""Linear-optical elements of the two Mach-Zehnder interferometers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .core import (
    BasisLabel,
    Path,
    PhotonSlot,
    Pol,
    PureState,
    Side,
    apply_linear_map,
    norm2,
    project,
)

_R2 = 1 / math.sqrt(2)


class Which(str, Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class BeamSplitterSpec:
    side: Side
    which: Which = Which.FIRST

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "which", Which(self.which))


@dataclass(frozen=True)
class DetectorPort:
    """Polarization-sensitive detector behind the second beam splitter of one side."""

    side: Side
    port: Path

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "port", Path(self.port))

    @property
    def name(self) -> str:
        return f"D_{self.side.value}{'u' if self.port is Path.UPPER else 'l'}"


def beam_splitter_rule(side: Side):
    """Single-photon action: the reflected part picks up a factor i, polarization untouched.

    lower -> (upper + i lower)/sqrt2, upper -> (lower + i upper)/sqrt2.
    """
    side = Side(side)

    def rule(label: BasisLabel):
        slot = label.photon(side)
        if slot is None or not slot.is_propagating:
            return [(label, 1.0)]
        other = Path.UPPER if slot.path is Path.LOWER else Path.LOWER
        return [
            (label.with_photon(side, PhotonSlot.propagating(other, slot.pol)), _R2),
            (label, 1j * _R2),
        ]

    return rule


def beam_splitter(s: PureState, spec: BeamSplitterSpec) -> PureState:
    return apply_linear_map(s, beam_splitter_rule(spec.side))


def mirror(s: PureState, side: Side) -> PureState:
    """Mirrors add no relative phase between the arms."""
    return s


class Click(NamedTuple):
    probability: float
    state: PureState
    polarization: Optional[Pol]


def detect(s: PureState, port: DetectorPort, polarization: Optional[Pol] = None) -> Click:
    """Ideal click at ``port``; the detected photon is replaced by vacuum.

    With ``polarization=None`` the clicking terms must share one polarization,
    otherwise the polarization-resolved outcome has to be requested.
    """

    def hit(label: BasisLabel) -> bool:
        slot = label.photon(port.side)
        return (
            slot is not None
            and slot.is_propagating
            and slot.path is port.port
            and (polarization is None or slot.pol is Pol(polarization))
        )

    p, cond = project(s, hit)
    if p == 0:
        return Click(0.0, cond, polarization)
    pols = {lab.photon(port.side).pol for lab in cond.terms}
    if len(pols) > 1:
        raise ValueError(f"{port.name}: clicking terms carry several polarizations; pass polarization=")
    (pol,) = pols
    consumed = PureState(
        ((lab.with_photon(port.side, PhotonSlot.vacuum()), amp) for lab, amp in cond.terms.items()),
        tol=cond.tol,
    )
    return Click(p, consumed, pol)


def filter_scatter(s: PureState):
    """Split off the branches where some photon was scattered by an ion.

    Returns ``(scatter_probability, surviving)`` with the survivor renormalized
    (empty if nothing survives).
    """

    def clean(label: BasisLabel) -> bool:
        return not any(
            slot is not None and slot.is_scattered for slot in (label.photon_a, label.photon_b)
        )

    kept = PureState(
        ((k, v) for k, v in s.terms.items() if clean(k)),
        tol=s.tol,
        conditional=True,
        subsystems=s.subsystems,
    )
    scatter = math.fsum(abs(v) ** 2 for k, v in s.terms.items() if not clean(k))
    survive = norm2(kept)
    if survive == 0:
        return scatter, kept
    return scatter, kept.normalized()
