"""Purification and concentration of ion pairs with two Mach-Zehnder interferometers.

Ions 1 and 3 sit on Alice's interferometer (upper and lower arm), ions 2 and 4
on Bob's. Each side receives one sigma+ photon in the lower input port. A
coincidence of both lower detectors heralds success.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import interact
from .core import (
    DEFAULT_TOL,
    BasisLabel,
    IonLevel,
    MixedState,
    Path,
    PhotonSlot,
    Pol,
    PureState,
    Side,
    apply_linear_map,
    discard,
    mixed_map,
    norm2,
    project,
    tensor,
)
from .optics import BeamSplitterSpec, DetectorPort, Which, beam_splitter, detect, mirror

P, M, G = IonLevel.MPLUS, IonLevel.MMINUS, IonLevel.GROUND
_R2 = 1 / math.sqrt(2)

# (port on side A, port on side B); None means that side saw no click
Pattern = Tuple[Optional[Path], Optional[Path]]
SUCCESS: Pattern = (Path.LOWER, Path.LOWER)
ALL_PATTERNS: Tuple[Pattern, ...] = tuple(
    (a, b) for a in (Path.UPPER, Path.LOWER, None) for b in (Path.UPPER, Path.LOWER, None)
)


class BellKind(str, Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class Variant(str, Enum):
    """Form of the non-maximally entangled pure pair being concentrated."""

    PSI_LIKE = "psi"  # a|m+ m-> + b|m- m+>
    PHI_LIKE = "phi"  # a|m+ m+> + b|m- m->


class Mode(str, Enum):
    MIXED = "mixed"
    PURE = "pure"


def bell_state(kind: BellKind, ions: Tuple[int, int] = (1, 2), tol: float = DEFAULT_TOL) -> PureState:
    i, j = ions
    if i == j:
        raise ValueError(f"Bell state needs two distinct ions, got {ions}")
    kind = BellKind(kind)
    sign = -1.0 if kind in (BellKind.PHI_MINUS, BellKind.PSI_MINUS) else 1.0
    if kind in (BellKind.PHI_PLUS, BellKind.PHI_MINUS):
        pairs = ((P, P), (M, M))
    else:
        pairs = ((P, M), (M, P))
    return PureState(
        [
            (BasisLabel.of({i: pairs[0][0], j: pairs[0][1]}), _R2),
            (BasisLabel.of({i: pairs[1][0], j: pairs[1][1]}), sign * _R2),
        ],
        tol=tol,
    )


def ghz_state(which: int, tol: float = DEFAULT_TOL) -> PureState:
    """The two heralded four-ion states (ions ordered 1, 2, 3, 4).

    ``which=1``: (|m+ m+ m- m-> + |m- m- m+ m+>)/sqrt2, reached from Phi+ x Phi+.
    ``which=2``: (|m+ m- m- m+> + |m- m+ m+ m->)/sqrt2, reached from Psi+ x Psi+.
    """
    if which == 1:
        levels = ((P, P, M, M), (M, M, P, P))
    elif which == 2:
        levels = ((P, M, M, P), (M, P, P, M))
    else:
        raise ValueError("which must be 1 or 2")
    return PureState([(BasisLabel(ions=lv), _R2) for lv in levels], tol=tol)


def phase_flip_rule(ion: int):
    def rule(label: BasisLabel):
        return [(label, -1.0 if label.ion(ion) is M else 1.0)]

    return rule


def phase_flip(s: PureState, ion: int = 1) -> PureState:
    """m- -> -m- on one ion; turns Phi- into Phi+ when applied to ion 1."""
    return apply_linear_map(s, phase_flip_rule(ion))


def inject_photons(s: PureState, sides: Sequence[Side] = (Side.A, Side.B)) -> PureState:
    """Put one sigma+ photon into the lower input port of each listed side."""
    for side in sides:
        slot = PhotonSlot.propagating(Path.LOWER, Pol.PLUS)
        label = BasisLabel(slot, None) if Side(side) is Side.A else BasisLabel(None, slot)
        s = tensor(s, PureState.basis(label, tol=s.tol))
    return s


def mzi_side_evolve(state: PureState, side: Side) -> PureState:
    """BS1, mirrors, both arm ions (upper first), BS2 on one side."""
    side = Side(side)
    expected = PhotonSlot.propagating(Path.LOWER, Pol.PLUS)
    if not state.valid:
        raise ValueError("cannot evolve the empty state")
    for label in state.terms:
        if label.photon(side) != expected:
            raise ValueError(f"side {side.value} needs a sigma+ photon in the lower input, got {label}")
    s = beam_splitter(state, BeamSplitterSpec(side, Which.FIRST))
    s = mirror(s, side)
    s = interact(s, side, Path.UPPER)
    s = interact(s, side, Path.LOWER)
    return beam_splitter(s, BeamSplitterSpec(side, Which.SECOND))


def evolve_both(state: PureState) -> PureState:
    return mzi_side_evolve(mzi_side_evolve(state, Side.A), Side.B)


@dataclass(frozen=True)
class WernerInput:
    """F|Phi+><Phi+| + (1-F)|Psi+><Psi+| shared by every pair."""

    fidelity: float

    def __post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity must lie in [0, 1], got {self.fidelity}")

    def two_pair_mixture(self, tol: float = DEFAULT_TOL) -> MixedState:
        """Pairs (1,2) and (3,4) as a mixture of four product Bell branches."""
        f = self.fidelity
        weights = {
            (BellKind.PHI_PLUS, BellKind.PHI_PLUS): f * f,
            (BellKind.PHI_PLUS, BellKind.PSI_PLUS): f * (1 - f),
            (BellKind.PSI_PLUS, BellKind.PHI_PLUS): (1 - f) * f,
            (BellKind.PSI_PLUS, BellKind.PSI_PLUS): (1 - f) * (1 - f),
        }
        branches = [
            (w, tensor(bell_state(k12, (1, 2), tol), bell_state(k34, (3, 4), tol)))
            for (k12, k34), w in weights.items()
            if w > 0
        ]
        return MixedState(tuple(branches))


@dataclass(frozen=True)
class PureInput:
    """a|x> + b|y> for one pair; the basis pair depends on the concentration variant."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        total = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"|a|^2 + |b|^2 must equal 1, got {total!r}")

    @classmethod
    def from_a_squared(cls, a_squared: float) -> "PureInput":
        if not 0.0 <= a_squared <= 1.0:
            raise ValueError(f"a_squared must lie in [0, 1], got {a_squared}")
        return cls(math.sqrt(a_squared), math.sqrt(1.0 - a_squared))

    def pair_state(self, ions: Tuple[int, int], variant: Variant = Variant.PSI_LIKE, tol: float = DEFAULT_TOL) -> PureState:
        i, j = ions
        first, second = ((P, M), (M, P)) if Variant(variant) is Variant.PSI_LIKE else ((P, P), (M, M))
        return PureState(
            [
                (BasisLabel.of({i: first[0], j: first[1]}), self.a),
                (BasisLabel.of({i: second[0], j: second[1]}), self.b),
            ],
            tol=tol,
        )


@dataclass(frozen=True)
class ProtocolOutcome:
    detector_pattern: Pattern
    probability: float
    four_ion_state: Optional[MixedState]
    mode: Mode

    @property
    def success(self) -> bool:
        return self.detector_pattern == SUCCESS

    @property
    def pattern_name(self) -> str:
        return pattern_name(self.detector_pattern)


def pattern_name(pattern: Pattern) -> str:
    names = {Path.UPPER: "upper", Path.LOWER: "lower", None: "none"}
    return f"{names[pattern[0]]}/{names[pattern[1]]}"


def _click_branch(evolved: PureState, pattern: Pattern) -> Tuple[float, PureState]:
    """Probability of a two-click pattern and the four-ion state it leaves."""
    port_a, port_b = pattern
    first = detect(evolved, DetectorPort(Side.A, port_a))
    if first.probability == 0:
        return 0.0, first.state
    second = detect(first.state, DetectorPort(Side.B, port_b))
    if second.probability == 0:
        return 0.0, second.state
    return first.probability * second.probability, discard(second.state, Side.A, Side.B)


def _pattern_probability(evolved: PureState, pattern: Pattern) -> float:
    def matches(label: BasisLabel) -> bool:
        for side, port in zip((Side.A, Side.B), pattern):
            slot = label.photon(side)
            if port is None:
                if not slot.is_scattered:
                    return False
            elif not (slot.is_propagating and slot.path is port):
                return False
        return True

    p, _ = project(evolved, matches)
    return p


def detector_outcomes(mixture: MixedState, mode: Mode = Mode.MIXED) -> Dict[Pattern, ProtocolOutcome]:
    """Evolve every branch through both interferometers and resolve all nine patterns.

    Two-click patterns carry the conditional four-ion mixture; patterns with a
    scattered photon carry probability only. Only ``SUCCESS`` counts as success.
    """
    evolved = MixedState(tuple((w, evolve_both(inject_photons(st))) for w, st in mixture.branches))
    outcomes = {}
    for pattern in ALL_PATTERNS:
        if None in pattern:
            p = math.fsum(w * _pattern_probability(st, pattern) for w, st in evolved.branches)
            outcomes[pattern] = ProtocolOutcome(pattern, p, None, Mode(mode))
        else:
            p, post = mixed_map(evolved, lambda st: _click_branch(st, pattern))
            outcomes[pattern] = ProtocolOutcome(pattern, p, post, Mode(mode))
    return outcomes


@lru_cache(maxsize=256)
def werner_outcomes(fidelity: float, tol: float = DEFAULT_TOL) -> Dict[Pattern, ProtocolOutcome]:
    """All nine detector patterns for two Werner-form pairs."""
    return detector_outcomes(WernerInput(fidelity).two_pair_mixture(tol), Mode.MIXED)


def purification_step(inp: WernerInput, tol: float = DEFAULT_TOL) -> ProtocolOutcome:
    """The heralded (lower, lower) outcome for two Werner-form pairs."""
    if not isinstance(inp, WernerInput):
        inp = WernerInput(float(inp))
    return werner_outcomes(inp.fidelity, tol)[SUCCESS]


def fidelity_update(fidelity: float) -> float:
    """Fidelity of the surviving pair after one successful round."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    f = _decimal(fidelity)
    f2 = f * f
    g = 1 - f
    return float(f2 / (f2 + g * g))


def step_success_probability(fidelity: float) -> float:
    f = _decimal(fidelity)
    g = 1 - f
    return float((f * f + g * g) / 32)


def _decimal(x: float) -> Fraction:
    # Exact value of the shortest decimal that round-trips to x, so 0.7 means 7/10
    # and the closed forms are rounded only once.
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class IterationRecord:
    round: int
    fidelity: float
    step_success_probability: float
    cumulative_probability: float

    @property
    def pairs_per_output(self) -> float:
        """Raw pairs consumed per surviving pair, 2**round / cumulative probability."""
        if self.cumulative_probability == 0:
            return math.inf
        return 2.0**self.round / self.cumulative_probability


def iterate_fidelity(f0: float, rounds: int) -> List[IterationRecord]:
    """Round 0 is the input; round k is the pair after k successful steps.

    ``step_success_probability`` of round k is the heralding probability of the
    step that produced it (1 for round 0).
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    if not 0.0 <= f0 <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f0}")
    records = [IterationRecord(0, f0, 1.0, 1.0)]
    f, cumulative = f0, 1.0
    for k in range(1, rounds + 1):
        step = step_success_probability(f)
        cumulative *= step
        f = fidelity_update(f)
        records.append(IterationRecord(k, f, step, cumulative))
    return records


# --- reduction of the four-ion state to one pair ------------------------------

OUTCOMES = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))


@dataclass(frozen=True)
class ReductionOutcome:
    ion34_results: Tuple[str, str]
    correction_applied: Optional[str]
    two_ion_state: MixedState
    probability: float


def _pm_rule(s3: str, s4: str):
    """Contract ions 3 and 4 with <s3|<s4|, where |+-> = (|m+> +- |m->)/sqrt2."""
    signs = {"+": 1.0, "-": -1.0}

    def coeff(level, s):
        if level is P:
            return _R2
        if level is M:
            return signs[s] * _R2
        return 0.0

    def rule(label: BasisLabel):
        c = coeff(label.ion(3), s3) * coeff(label.ion(4), s4)
        if c == 0:
            return []
        return [(label.with_ion(3, None).with_ion(4, None), c)]

    return rule


def _strip_photons(s: PureState) -> PureState:
    for side in (Side.A, Side.B):
        slots = {label.photon(side) for label in s.terms}
        if any(slot is not None and not slot.is_vacuum for slot in slots):
            raise ValueError(f"side {side.value} photon has not been consumed; reduce after detection")
        if slots == {PhotonSlot.vacuum()}:
            s = discard(s, side)
    return s


def _outcome_branch(st: PureState, outcome: Tuple[str, str]) -> Tuple[float, PureState]:
    projected = apply_linear_map(st, _pm_rule(*outcome))
    p = norm2(projected)
    if p == 0:
        return 0.0, projected
    return p, projected.normalized()


def reduction_probabilities(four_ion_state: MixedState) -> Dict[Tuple[str, str], float]:
    stripped = MixedState(tuple((w, _strip_photons(st)) for w, st in four_ion_state.branches))
    return {
        o: math.fsum(w * _outcome_branch(st, o)[0] for w, st in stripped.branches) for o in OUTCOMES
    }


def ghz_reduce(
    four_ion_state: MixedState,
    outcome: Optional[Tuple[str, str]] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> ReductionOutcome:
    """Measure ions 3 and 4 in the +/- basis and correct ion 1.

    Pass ``outcome`` to force the results, otherwise one uniform draw from
    ``rng`` (or a generator seeded with ``seed``) picks them from the exact
    distribution. Differing results trigger a phase flip on ion 1.
    """
    stripped = MixedState(tuple((w, _strip_photons(st)) for w, st in four_ion_state.branches))
    if outcome is None:
        rng = rng if rng is not None else np.random.default_rng(seed)
        probs = reduction_probabilities(stripped)
        u = rng.random() * math.fsum(probs.values())
        acc = 0.0
        outcome = OUTCOMES[-1]
        for o in OUTCOMES:
            acc += probs[o]
            if u < acc:
                outcome = o
                break
    outcome = tuple(outcome)
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be a pair of '+'/'-', got {outcome!r}")

    p, post = mixed_map(stripped, lambda st: _outcome_branch(st, outcome))
    if post is None:
        raise ValueError(f"outcome {outcome} has zero probability for this state")
    correction = None
    if outcome[0] != outcome[1]:
        correction = "phase_flip_ion1"
        post = MixedState(tuple((w, phase_flip(st, 1)) for w, st in post.branches))
    return ReductionOutcome(outcome, correction, post, p)


def concentration_outcomes(
    inp: PureInput, variant: Variant = Variant.PSI_LIKE, tol: float = DEFAULT_TOL
) -> Dict[Pattern, ProtocolOutcome]:
    variant = Variant(variant)
    state = tensor(inp.pair_state((1, 2), variant, tol), inp.pair_state((3, 4), variant, tol))
    return detector_outcomes(MixedState.pure(state), Mode.PURE)


def concentration_step(inp: PureInput, variant: Variant = Variant.PSI_LIKE, tol: float = DEFAULT_TOL) -> ProtocolOutcome:
    """Two copies of a known-form pure pair; heralded four-ion state on (lower, lower)."""
    return concentration_outcomes(inp, variant, tol)[SUCCESS]
