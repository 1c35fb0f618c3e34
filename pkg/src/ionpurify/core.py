"""Sparse amplitude-map states over the labelled ion/photon Hilbert space.

A basis state is a :class:`BasisLabel`: one photon slot per side (A, B) and
the levels of ions 1-4. Ions 1 and 3 sit on side A (upper and lower arm),
ions 2 and 4 on side B. Any field may be ``None``, meaning that subsystem is
not part of the state; this is how partial states are tensored together.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence, Tuple, Union

DEFAULT_TOL = 1e-12
NORM_TOL = 1e-10

ION_INDICES = (1, 2, 3, 4)


class Side(str, Enum):
    A = "A"
    B = "B"


class Path(IntEnum):
    UPPER = 0
    LOWER = 1


class Pol(IntEnum):
    PLUS = 0
    MINUS = 1


class IonLevel(IntEnum):
    """Stored ion levels. The excited level decays instantly and is never kept."""

    MPLUS = 0
    MMINUS = 1
    GROUND = 2


class SlotKind(IntEnum):
    VACUUM = 0
    PROPAGATING = 1
    SCATTERED = 2


# (side, path) -> index of the ion sitting on that arm
ARM_ION = {
    (Side.A, Path.UPPER): 1,
    (Side.A, Path.LOWER): 3,
    (Side.B, Path.UPPER): 2,
    (Side.B, Path.LOWER): 4,
}
SIDE_IONS = {Side.A: (1, 3), Side.B: (2, 4)}


def side_of_ion(ion: int) -> Side:
    if ion not in ION_INDICES:
        raise ValueError(f"ion index must be one of 1..4, got {ion!r}")
    return Side.A if ion in (1, 3) else Side.B


@dataclass(frozen=True)
class PhotonSlot:
    """Occupancy of one side's single-photon register.

    A scattered photon remembers the ion that emitted it and the polarization
    that was absorbed, so scattered branches stay mutually orthogonal.
    """

    kind: SlotKind
    path: Optional[Path] = None
    pol: Optional[Pol] = None
    ion: Optional[int] = None

    def __post_init__(self):
        if self.kind is SlotKind.VACUUM:
            if self.path is not None or self.pol is not None or self.ion is not None:
                raise ValueError("vacuum slot carries no path, polarization or ion")
        elif self.kind is SlotKind.PROPAGATING:
            if self.path is None or self.pol is None or self.ion is not None:
                raise ValueError("propagating slot needs path and polarization only")
        elif self.kind is SlotKind.SCATTERED:
            if self.ion not in ION_INDICES or self.pol is None or self.path is not None:
                raise ValueError("scattered slot needs an ion index 1..4 and a polarization")
        else:
            raise ValueError(f"unknown slot kind {self.kind!r}")

    @classmethod
    def vacuum(cls) -> "PhotonSlot":
        return cls(SlotKind.VACUUM)

    @classmethod
    def propagating(cls, path: Path, pol: Pol = Pol.PLUS) -> "PhotonSlot":
        return cls(SlotKind.PROPAGATING, path=Path(path), pol=Pol(pol))

    @classmethod
    def scattered(cls, ion: int, pol: Pol = Pol.PLUS) -> "PhotonSlot":
        return cls(SlotKind.SCATTERED, pol=Pol(pol), ion=ion)

    @property
    def is_vacuum(self) -> bool:
        return self.kind is SlotKind.VACUUM

    @property
    def is_propagating(self) -> bool:
        return self.kind is SlotKind.PROPAGATING

    @property
    def is_scattered(self) -> bool:
        return self.kind is SlotKind.SCATTERED

    def sort_key(self) -> tuple:
        return (
            int(self.kind),
            -1 if self.path is None else int(self.path),
            -1 if self.pol is None else int(self.pol),
            -1 if self.ion is None else self.ion,
        )

    def __str__(self) -> str:
        if self.is_vacuum:
            return "0"
        sign = "+" if self.pol is Pol.PLUS else "-"
        if self.is_propagating:
            return ("u" if self.path is Path.UPPER else "l") + sign
        return f"S{self.ion}{sign}"


_LEVEL_TEXT = {IonLevel.MPLUS: "m+", IonLevel.MMINUS: "m-", IonLevel.GROUND: "g"}


@dataclass(frozen=True)
class BasisLabel:
    """Classical label of one tensor-product basis state.

    ``ions`` is ordered (ion1, ion2, ion3, ion4); ``None`` entries and ``None``
    photon slots mark subsystems absent from the state.
    """

    photon_a: Optional[PhotonSlot] = None
    photon_b: Optional[PhotonSlot] = None
    ions: Tuple[Optional[IonLevel], ...] = (None, None, None, None)

    def __post_init__(self):
        if len(self.ions) != 4:
            raise ValueError(f"expected 4 ion entries, got {len(self.ions)}")
        ions = tuple(None if lv is None else IonLevel(lv) for lv in self.ions)
        object.__setattr__(self, "ions", ions)
        for side, slot in ((Side.A, self.photon_a), (Side.B, self.photon_b)):
            if slot is None or not slot.is_scattered:
                continue
            if slot.ion not in SIDE_IONS[side]:
                raise ValueError(f"photon on side {side.value} cannot be scattered by ion {slot.ion}")
            level = ions[slot.ion - 1]
            if level is not None and level is not IonLevel.GROUND:
                raise ValueError(f"scattered by ion {slot.ion} requires that ion in ground, got {level.name}")

    @classmethod
    def of(
        cls,
        ions: Mapping[int, IonLevel] | None = None,
        a: Optional[PhotonSlot] = None,
        b: Optional[PhotonSlot] = None,
    ) -> "BasisLabel":
        """Build a label from ``{ion_index: level}`` and optional photon slots."""
        levels: list = [None] * 4
        for k, lv in (ions or {}).items():
            side_of_ion(k)
            levels[k - 1] = lv
        return cls(a, b, tuple(levels))

    def photon(self, side: Side) -> Optional[PhotonSlot]:
        return self.photon_a if Side(side) is Side.A else self.photon_b

    def ion(self, k: int) -> Optional[IonLevel]:
        side_of_ion(k)
        return self.ions[k - 1]

    def with_photon(self, side: Side, slot: Optional[PhotonSlot]) -> "BasisLabel":
        if Side(side) is Side.A:
            return BasisLabel(slot, self.photon_b, self.ions)
        return BasisLabel(self.photon_a, slot, self.ions)

    def with_ion(self, k: int, level: Optional[IonLevel]) -> "BasisLabel":
        side_of_ion(k)
        ions = list(self.ions)
        ions[k - 1] = level
        return BasisLabel(self.photon_a, self.photon_b, tuple(ions))

    @property
    def subsystems(self) -> frozenset:
        present = {k for k, lv in zip(ION_INDICES, self.ions) if lv is not None}
        if self.photon_a is not None:
            present.add(Side.A)
        if self.photon_b is not None:
            present.add(Side.B)
        return frozenset(present)

    def sort_key(self) -> tuple:
        def slot_key(slot):
            return (-1,) if slot is None else slot.sort_key()

        return (
            slot_key(self.photon_a),
            slot_key(self.photon_b),
            tuple(-1 if lv is None else int(lv) for lv in self.ions),
        )

    def __lt__(self, other: "BasisLabel") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        parts = []
        if self.photon_a is not None:
            parts.append(f"A:{self.photon_a}")
        if self.photon_b is not None:
            parts.append(f"B:{self.photon_b}")
        for k, lv in zip(ION_INDICES, self.ions):
            if lv is not None:
                parts.append(f"{k}:{_LEVEL_TEXT[lv]}")
        return "|" + " ".join(parts) + ">"


def _merge_labels(a: BasisLabel, b: BasisLabel) -> BasisLabel:
    ions = tuple(x if x is not None else y for x, y in zip(a.ions, b.ions))
    return BasisLabel(
        a.photon_a if a.photon_a is not None else b.photon_a,
        a.photon_b if a.photon_b is not None else b.photon_b,
        ions,
    )


Term = Tuple[BasisLabel, complex]
Rule = Callable[[BasisLabel], Iterable[Term]]


class PureState:
    """Sparse superposition ``{BasisLabel: amplitude}``.

    Amplitudes whose modulus falls below ``tol`` are dropped on construction.
    ``conditional`` marks deliberately sub-normalized branch states.
    Instances are immutable.
    """

    __slots__ = ("_terms", "tol", "conditional", "_subsystems")

    def __init__(
        self,
        terms: Union[Mapping[BasisLabel, complex], Iterable[Term]] = (),
        tol: float = DEFAULT_TOL,
        conditional: bool = False,
        subsystems: Optional[Iterable] = None,
    ):
        if tol < 0:
            raise ValueError("tolerance must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for label, amp in items:
            if not isinstance(label, BasisLabel):
                raise TypeError(f"expected BasisLabel, got {type(label).__name__}")
            amp = complex(amp)
            if not cmath.isfinite(amp):
                raise ValueError(f"non-finite amplitude {amp!r} for {label}")
            acc[label] = acc.get(label, 0j) + amp
        kept = {k: v for k, v in acc.items() if abs(v) >= tol and v != 0}
        subs = frozenset(subsystems) if subsystems is not None else None
        for label in kept:
            if subs is None:
                subs = label.subsystems
            elif label.subsystems != subs:
                raise ValueError(f"label {label} does not cover subsystems {sorted(map(str, subs))}")
        self._terms = MappingProxyType(dict(sorted(kept.items(), key=lambda kv: kv[0].sort_key())))
        self._subsystems = subs if subs is not None else frozenset()
        self.tol = tol
        self.conditional = conditional

    @classmethod
    def basis(cls, label: BasisLabel, amplitude: complex = 1.0, **kw) -> "PureState":
        return cls({label: amplitude}, **kw)

    @property
    def terms(self) -> Mapping[BasisLabel, complex]:
        return self._terms

    @property
    def subsystems(self) -> frozenset:
        return self._subsystems

    @property
    def valid(self) -> bool:
        """False for the empty state returned by a zero-probability projection."""
        return bool(self._terms)

    def amplitude(self, label: BasisLabel) -> complex:
        return self._terms.get(label, 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __repr__(self) -> str:
        if not self._terms:
            return "PureState(<empty>)"
        body = " + ".join(f"({amp:.6g}){label}" for label, amp in self._terms.items())
        return f"PureState({body})"

    def scaled(self, factor: complex) -> "PureState":
        return PureState(
            ((k, v * factor) for k, v in self._terms.items()),
            tol=self.tol,
            conditional=self.conditional,
            subsystems=self._subsystems,
        )

    def normalized(self) -> "PureState":
        n = norm2(self)
        if n == 0:
            raise ValueError("cannot normalize the empty state")
        scale = 1 / math.sqrt(n)
        return PureState(
            ((k, v * scale) for k, v in self._terms.items()),
            tol=self.tol,
            subsystems=self._subsystems,
        )

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(norm2(self) - 1.0) <= tol

    def __add__(self, other: "PureState") -> "PureState":
        if not isinstance(other, PureState):
            return NotImplemented
        return PureState(
            list(self._terms.items()) + list(other._terms.items()),
            tol=min(self.tol, other.tol),
            conditional=True,
        )

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        return sum((amp.conjugate() * other.amplitude(k) for k, amp in self._terms.items()), 0j)

    def max_difference(self, other: "PureState") -> float:
        keys = set(self._terms) | set(other._terms)
        return max((abs(self.amplitude(k) - other.amplitude(k)) for k in keys), default=0.0)

    def global_phase_difference(self, other: "PureState") -> float:
        """Max amplitude difference after aligning ``other`` to ``self`` by one global phase."""
        overlap = other.inner(self)
        if abs(overlap) == 0:
            return self.max_difference(other)
        return self.max_difference(other.scaled(overlap / abs(overlap)))


def norm2(s: PureState) -> float:
    return math.fsum(abs(a) ** 2 for a in s.terms.values())


def tensor(a: PureState, b: PureState) -> PureState:
    """Tensor product of states over disjoint subsystem sets."""
    overlap = a.subsystems & b.subsystems
    if overlap:
        raise ValueError(f"subsystems overlap: {sorted(map(str, overlap))}")
    terms = [
        (_merge_labels(la, lb), xa * xb)
        for la, xa in a.terms.items()
        for lb, xb in b.terms.items()
    ]
    return PureState(
        terms,
        tol=min(a.tol, b.tol),
        conditional=a.conditional or b.conditional,
        subsystems=a.subsystems | b.subsystems,
    )


def tensor_all(states: Sequence[PureState]) -> PureState:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def project(s: PureState, keep: Callable[[BasisLabel], bool]) -> Tuple[float, PureState]:
    """Project a normalized state onto the labels satisfying ``keep``.

    Returns the probability and the renormalized conditional state. A
    zero-probability projection yields an empty (invalid) state.
    """
    if not s.is_normalized():
        raise ValueError(f"project() needs a normalized state, norm2 = {norm2(s)!r}")
    kept = PureState(
        ((k, v) for k, v in s.terms.items() if keep(k)),
        tol=s.tol,
        conditional=True,
        subsystems=s.subsystems,
    )
    p = norm2(kept)
    if p == 0:
        return 0.0, kept
    return p, kept.normalized()


def apply_linear_map(s: PureState, rule: Rule, tol: Optional[float] = None) -> PureState:
    """Extend ``rule`` (label -> [(label, amplitude), ...]) linearly over ``s``.

    Contributions are summed before pruning, so interference is exact.
    """
    tol = s.tol if tol is None else tol
    acc: dict = {}
    for label, amp in s.terms.items():
        for out, coeff in rule(label):
            acc[out] = acc.get(out, 0j) + amp * complex(coeff)
    return PureState(acc, tol=tol, conditional=s.conditional)


def discard(s: PureState, *subsystems) -> PureState:
    """Drop subsystems that are in a definite basis value on every term.

    Used to remove consumed (vacuum) photon slots or measured ions. Raises if
    a subsystem still carries coherence, since dropping it would be a partial
    trace and not a pure-state operation.
    """
    seen: dict = {}
    out = []
    for label, amp in s.terms.items():
        new = label
        for sub in subsystems:
            if isinstance(sub, Side):
                value = label.photon(sub)
                new = new.with_photon(sub, None)
            else:
                value = label.ion(sub)
                new = new.with_ion(sub, None)
            if seen.setdefault(sub, value) != value:
                raise ValueError(f"subsystem {sub} is not in a definite state; cannot discard")
        out.append((new, amp))
    remaining = s.subsystems - frozenset(subsystems)
    return PureState(out, tol=s.tol, conditional=s.conditional, subsystems=remaining)


@dataclass(frozen=True)
class MixedState:
    """Probabilistic mixture of normalized pure states."""

    branches: Tuple[Tuple[float, PureState], ...]

    def __post_init__(self):
        branches = tuple((float(w), st) for w, st in self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ValueError("a mixture needs at least one branch")
        for w, st in branches:
            if not w > 0:
                raise ValueError(f"branch weight must be strictly positive, got {w}")
            if not st.is_normalized():
                raise ValueError(f"branch state is not normalized (norm2 = {norm2(st)})")
        total = math.fsum(w for w, _ in branches)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"branch weights sum to {total}, not 1")

    @classmethod
    def pure(cls, state: PureState) -> "MixedState":
        return cls(((1.0, state),))

    @property
    def weights(self) -> Tuple[float, ...]:
        return tuple(w for w, _ in self.branches)

    @property
    def states(self) -> Tuple[PureState, ...]:
        return tuple(s for _, s in self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def weight_of(self, target: PureState, tol: float = 1e-9) -> float:
        """Total weight of branches equal to ``target`` up to a global phase."""
        return math.fsum(
            w for w, st in self.branches if abs(abs(target.inner(st)) - 1.0) <= tol
        )

    def density_matrix(self, labels: Sequence[BasisLabel]):
        import numpy as np

        index = {lab: i for i, lab in enumerate(labels)}
        rho = np.zeros((len(labels), len(labels)), dtype=complex)
        for w, st in self.branches:
            v = np.zeros(len(labels), dtype=complex)
            for lab, amp in st.terms.items():
                v[index[lab]] = amp
            rho += w * np.outer(v, v.conj())
        return rho


def mixed_map(
    m: MixedState, f: Callable[[PureState], Tuple[float, PureState]]
) -> Tuple[float, Optional[MixedState]]:
    """Push every branch through a probabilistic map ``f``.

    Returns the total probability and the posterior mixture; the posterior is
    ``None`` when every branch has zero probability.
    """
    out = []
    for w, st in m.branches:
        p, post = f(st)
        if p > 0:
            out.append((w * p, post))
    total = math.fsum(x for x, _ in out)
    if total == 0:
        return 0.0, None
    return total, MixedState(tuple((x / total, st) for x, st in out))
