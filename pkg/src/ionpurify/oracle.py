"""Brute-force dense-matrix cross-check of the sparse engine.

Every optical element acts on one side only, so each is lifted to a dense
matrix over that side's basis (photon slot x two ion levels, 57 states). The
two-sided evolution is the Kronecker product of the side matrices on the
57 x 57 = 3249 product basis, and the sweep runs over every input without a
scattered photon (45 x 45 = 2025 of them).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .channel import interact_rule
from .core import (
    SIDE_IONS,
    BasisLabel,
    IonLevel,
    Path,
    PhotonSlot,
    Pol,
    PureState,
    Rule,
    Side,
    SlotKind,
    apply_linear_map,
    project,
)
from .optics import beam_splitter_rule

ORACLE_TOL = 1e-10


class Kind(str, Enum):
    UNITARY = "unitary"
    ISOMETRY = "isometry"
    PROJECTOR = "projector"


def _side_slots(side: Side) -> List[PhotonSlot]:
    slots = [PhotonSlot.vacuum()]
    slots += [PhotonSlot.propagating(path, pol) for path in Path for pol in Pol]
    slots += [PhotonSlot.scattered(ion, pol) for ion in SIDE_IONS[side] for pol in Pol]
    return slots


class DenseBasis:
    """Ordered, bijective enumeration of valid labels."""

    def __init__(self, labels: Sequence[BasisLabel]):
        self.labels = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate labels in basis")

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def for_side(cls, side: Side) -> "DenseBasis":
        side = Side(side)
        upper, lower = SIDE_IONS[side]
        labels = []
        for slot in _side_slots(side):
            for lu, ll in itertools.product(IonLevel, repeat=2):
                try:
                    lab = BasisLabel.of({upper: lu, lower: ll}).with_photon(side, slot)
                except ValueError:
                    continue
                labels.append(lab)
        return cls(labels)

    @classmethod
    def product(cls, a: "DenseBasis", b: "DenseBasis") -> "DenseBasis":
        """Row-major product: index(la, lb) = ia * len(b) + ib, matching np.kron."""
        labels = []
        for la in a.labels:
            for lb in b.labels:
                ions = tuple(x if x is not None else y for x, y in zip(la.ions, lb.ions))
                labels.append(BasisLabel(la.photon_a or lb.photon_a, la.photon_b or lb.photon_b, ions))
        return cls(labels)

    def embed(self, s: PureState) -> np.ndarray:
        v = np.zeros(len(self), dtype=complex)
        for lab, amp in s.terms.items():
            if lab not in self.index:
                raise KeyError(f"label {lab} is not in the dense basis")
            v[self.index[lab]] = amp
        return v

    def indices(self, predicate: Callable[[BasisLabel], bool]) -> np.ndarray:
        return np.array([i for i, lab in enumerate(self.labels) if predicate(lab)], dtype=int)


@dataclass
class DenseOperator:
    matrix: np.ndarray
    kind: Kind
    domain: Optional[np.ndarray] = None  # columns on which the kind check applies

    def deviation(self) -> float:
        m = self.matrix
        if self.kind is Kind.UNITARY:
            eye = np.eye(m.shape[0])
            return max(
                np.abs(m.conj().T @ m - eye).max(),
                np.abs(m @ m.conj().T - eye).max(),
            )
        if self.kind is Kind.ISOMETRY:
            v = m if self.domain is None else m[:, self.domain]
            return np.abs(v.conj().T @ v - np.eye(v.shape[1])).max()
        return max(np.abs(m @ m - m).max(), np.abs(m - m.conj().T).max())

    def passes(self, tol: float = ORACLE_TOL) -> bool:
        return self.deviation() <= tol


def lift(rule: Rule, basis: DenseBasis, kind: Kind = Kind.UNITARY, domain: Optional[np.ndarray] = None) -> DenseOperator:
    """Column k is the image of basis label k under ``rule``."""
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for k, lab in enumerate(basis.labels):
        for out, amp in rule(lab):
            if out not in basis.index:
                raise ValueError(f"rule maps {lab} outside the basis, to {out}")
            m[basis.index[out], k] += amp
    return DenseOperator(m, kind, domain)


def projector(basis: DenseBasis, predicate: Callable[[BasisLabel], bool]) -> DenseOperator:
    diag = np.array([1.0 if predicate(lab) else 0.0 for lab in basis.labels])
    return DenseOperator(np.diag(diag).astype(complex), Kind.PROJECTOR)


def compare(sparse_result: PureState, dense_result: np.ndarray, basis: DenseBasis, global_phase: bool = False) -> float:
    """Largest amplitude difference, optionally after removing one global phase."""
    v = basis.embed(sparse_result)
    if global_phase:
        overlap = np.vdot(v, dense_result)
        if abs(overlap) > 0:
            v = v * overlap / abs(overlap)
    return float(np.abs(v - dense_result).max()) if len(v) else 0.0


# --- reference matrices written straight from the element definitions ----------


def reference_beam_splitter(basis: DenseBasis, side: Side) -> np.ndarray:
    """Block matrix [[i, 1], [1, i]]/sqrt2 on each (upper, lower) pair, identity elsewhere."""
    side = Side(side)
    block = np.array([[1j, 1.0], [1.0, 1j]]) / math.sqrt(2)  # rows/cols: upper, lower
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for k, lab in enumerate(basis.labels):
        slot = lab.photon(side)
        if not slot.is_propagating:
            m[k, k] = 1.0
            continue
        col = 0 if slot.path is Path.UPPER else 1
        for row, path in enumerate((Path.UPPER, Path.LOWER)):
            out = lab.with_photon(side, PhotonSlot(slot.kind, path, slot.pol))
            m[basis.index[out], k] += block[row, col]
    return m


def reference_interaction(basis: DenseBasis, side: Side, path: Path) -> np.ndarray:
    side, path = Side(side), Path(path)
    upper, lower = SIDE_IONS[side]
    ion = upper if path is Path.UPPER else lower
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for k, lab in enumerate(basis.labels):
        slot = lab.photon(side)
        level = lab.ions[ion - 1]
        absorbs = slot.is_propagating and slot.path is path and (
            (slot.pol is Pol.PLUS and level is IonLevel.MPLUS)
            or (slot.pol is Pol.MINUS and level is IonLevel.MMINUS)
        )
        if absorbs:
            ions = list(lab.ions)
            ions[ion - 1] = IonLevel.GROUND
            out = BasisLabel(None, None, tuple(ions)).with_photon(side, PhotonSlot(SlotKind.SCATTERED, None, slot.pol, ion))
            m[basis.index[out], k] = 1.0
        else:
            m[k, k] = 1.0
    return m


# --- protocol elements ---------------------------------------------------------


def side_elements(side: Side) -> Dict[str, Rule]:
    """Engine rules in application order for one interferometer."""
    return {
        "bs1": beam_splitter_rule(side),
        "ion_upper": interact_rule(side, Path.UPPER),
        "ion_lower": interact_rule(side, Path.LOWER),
        "bs2": beam_splitter_rule(side),
    }


def lifted_side_elements(side: Side, basis: DenseBasis) -> Dict[str, DenseOperator]:
    upper, lower = SIDE_IONS[side]
    ops = {}
    for name, rule in side_elements(side).items():
        if name.startswith("bs"):
            ops[name] = lift(rule, basis, Kind.UNITARY)
        else:
            ion = upper if name == "ion_upper" else lower
            # injective except on labels already scattered by the addressed ion
            domain = basis.indices(lambda lab, ion=ion: not (lab.photon(side).is_scattered and lab.photon(side).ion == ion))
            ops[name] = lift(rule, basis, Kind.ISOMETRY, domain)
    return ops


def side_evolution(ops: Dict[str, DenseOperator]) -> np.ndarray:
    return ops["bs2"].matrix @ ops["ion_lower"].matrix @ ops["ion_upper"].matrix @ ops["bs1"].matrix


def sparse_two_sided(state: PureState) -> PureState:
    """Both interferometers applied with the sparse engine's primitive maps."""
    for side in (Side.A, Side.B):
        for rule in side_elements(side).values():
            state = apply_linear_map(state, rule)
    return state


def _slot_class(slot: PhotonSlot) -> str:
    if slot.is_vacuum:
        return "vacuum"
    if slot.is_scattered:
        return "scattered"
    return "upper" if slot.path is Path.UPPER else "lower"


SLOT_CLASSES = ("vacuum", "upper", "lower", "scattered")


@dataclass
class SweepReport:
    inputs: int = 0
    max_amplitude_difference: float = 0.0
    max_probability_difference: float = 0.0
    element_deviation: Dict[str, float] = field(default_factory=dict)
    reference_deviation: Dict[str, float] = field(default_factory=dict)
    first_failure: Optional[str] = None
    tol: float = ORACLE_TOL

    @property
    def passed(self) -> bool:
        return self.first_failure is None

    def rows(self):
        yield ("inputs", float(self.inputs), True)
        for name, dev in self.element_deviation.items():
            yield (f"kind_check:{name}", dev, dev <= self.tol)
        for name, dev in self.reference_deviation.items():
            yield (f"reference:{name}", dev, dev <= self.tol)
        yield ("max_amplitude_difference", self.max_amplitude_difference, self.max_amplitude_difference <= self.tol)
        yield ("max_probability_difference", self.max_probability_difference, self.max_probability_difference <= self.tol)


def full_sweep(tol: float = ORACLE_TOL, limit: Optional[int] = None) -> SweepReport:
    """Evolve every scatter-free basis input both ways and compare.

    Checks each lifted element's kind, agreement with the reference matrices,
    every output amplitude, and every detector-class probability.
    """
    report = SweepReport(tol=tol)
    side_bases = {s: DenseBasis.for_side(s) for s in Side}
    evol = {}
    masks = {}
    for side, basis in side_bases.items():
        ops = lifted_side_elements(side, basis)
        refs = {
            "bs1": reference_beam_splitter(basis, side),
            "bs2": reference_beam_splitter(basis, side),
            "ion_upper": reference_interaction(basis, side, Path.UPPER),
            "ion_lower": reference_interaction(basis, side, Path.LOWER),
        }
        for name, op in ops.items():
            dev = op.deviation()
            report.element_deviation[f"{side.value}.{name}"] = dev
            rdev = float(np.abs(op.matrix - refs[name]).max())
            report.reference_deviation[f"{side.value}.{name}"] = rdev
            if (dev > tol or rdev > tol) and report.first_failure is None:
                report.first_failure = f"element {side.value}.{name}"
        evol[side] = side_evolution(ops)
        masks[side] = {
            c: np.array([_slot_class(lab.photon(side)) == c for lab in basis.labels], dtype=float)
            for c in SLOT_CLASSES
        }
        for c in SLOT_CLASSES:
            p = projector(basis, lambda lab, c=c, side=side: _slot_class(lab.photon(side)) == c)
            dev = p.deviation()
            report.element_deviation[f"{side.value}.projector_{c}"] = dev

    full = DenseBasis.product(side_bases[Side.A], side_bases[Side.B])
    nb = len(side_bases[Side.B])
    inputs = [
        (ia, la, ib, lb)
        for ia, la in enumerate(side_bases[Side.A].labels)
        if not la.photon_a.is_scattered
        for ib, lb in enumerate(side_bases[Side.B].labels)
        if not lb.photon_b.is_scattered
    ]
    if limit is not None:
        inputs = inputs[:limit]
    for ia, la, ib, lb in inputs:
        label = full.labels[ia * nb + ib]
        dense = np.kron(evol[Side.A][:, ia], evol[Side.B][:, ib])
        sparse = sparse_two_sided(PureState.basis(label))
        diff = compare(sparse, dense, full)
        report.max_amplitude_difference = max(report.max_amplitude_difference, diff)
        pdiff = 0.0
        for ca in SLOT_CLASSES:
            for cb in SLOT_CLASSES:
                mask = np.kron(masks[Side.A][ca], masks[Side.B][cb])
                p_dense = float(np.sum(np.abs(dense) ** 2 * mask))
                p_sparse, _ = project(
                    sparse,
                    lambda lab, ca=ca, cb=cb: _slot_class(lab.photon_a) == ca and _slot_class(lab.photon_b) == cb,
                )
                pdiff = max(pdiff, abs(p_dense - p_sparse))
        report.max_probability_difference = max(report.max_probability_difference, pdiff)
        report.inputs += 1
        if (diff > tol or pdiff > tol) and report.first_failure is None:
            report.first_failure = str(label)
    return report
