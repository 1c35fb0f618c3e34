"""Photon-ion absorption and scattering on one interferometer arm."""

from __future__ import annotations

from .core import ARM_ION, BasisLabel, IonLevel, Path, PhotonSlot, Pol, PureState, Side, apply_linear_map

# polarization -> the metastable level it drives
RESONANT = {Pol.PLUS: IonLevel.MPLUS, Pol.MINUS: IonLevel.MMINUS}


def interact_rule(side: Side, path: Path):
    """Resonant photon + ion on the arm -> scattered photon + ground-state ion.

    Everything else passes through unchanged. Absorption is certain on
    resonance; ions already in the ground level are transparent.
    """
    side, path = Side(side), Path(path)
    ion = ARM_ION[(side, path)]

    def rule(label: BasisLabel):
        slot = label.photon(side)
        level = label.ion(ion)
        if (
            slot is not None
            and slot.is_propagating
            and slot.path is path
            and level is RESONANT[slot.pol]
        ):
            hit = label.with_ion(ion, IonLevel.GROUND).with_photon(side, PhotonSlot.scattered(ion, slot.pol))
            return [(hit, 1.0)]
        return [(label, 1.0)]

    return rule


def interact(s: PureState, side: Side, path: Path) -> PureState:
    return apply_linear_map(s, interact_rule(side, path))
