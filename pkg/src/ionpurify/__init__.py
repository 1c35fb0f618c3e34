"""Exact simulation of linear-optics entanglement purification for trapped-ion pairs."""

from .core import (
    BasisLabel,
    IonLevel,
    MixedState,
    Path,
    PhotonSlot,
    Pol,
    PureState,
    Side,
    apply_linear_map,
    mixed_map,
    norm2,
    project,
    tensor,
)
from .protocol import (
    BellKind,
    PureInput,
    Variant,
    WernerInput,
    bell_state,
    concentration_step,
    fidelity_update,
    ghz_reduce,
    ghz_state,
    iterate_fidelity,
    mzi_side_evolve,
    purification_step,
)

__version__ = "0.1.0"
