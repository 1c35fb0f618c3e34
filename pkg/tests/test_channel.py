import pytest

from ionpurify.channel import interact, interact_rule
from ionpurify.core import ARM_ION, BasisLabel, IonLevel, Path, PhotonSlot, Pol, PureState, Side, norm2

P, M, G = IonLevel.MPLUS, IonLevel.MMINUS, IonLevel.GROUND


def lower_a(ion3, pol=Pol.PLUS, ion1=P):
    return PureState.basis(BasisLabel.of({1: ion1, 3: ion3}, a=PhotonSlot.propagating(Path.LOWER, pol)))


def test_resonant_absorption():
    out = interact(lower_a(P), Side.A, Path.LOWER)
    (label,) = out.terms
    assert label.photon_a == PhotonSlot.scattered(3, Pol.PLUS)
    assert label.ion(3) is G
    assert label.ion(1) is P


def test_mismatched_polarization_passes():
    s = lower_a(M)
    assert interact(s, Side.A, Path.LOWER).max_difference(s) == 0


def test_sigma_minus_drives_m_minus():
    (label,) = interact(lower_a(M, Pol.MINUS), Side.A, Path.LOWER).terms
    assert label.photon_a == PhotonSlot.scattered(3, Pol.MINUS)


@pytest.mark.parametrize("pol", list(Pol))
def test_ground_is_transparent(pol):
    s = lower_a(G, pol)
    assert interact(s, Side.A, Path.LOWER).max_difference(s) == 0


def test_wrong_arm_does_nothing():
    s = lower_a(P)
    assert interact(s, Side.A, Path.UPPER).max_difference(s) == 0


def test_idempotent_on_scattered():
    once = interact(lower_a(P), Side.A, Path.LOWER)
    assert interact(once, Side.A, Path.LOWER).max_difference(once) == 0


@pytest.mark.parametrize("side, path", list(ARM_ION))
def test_arm_assignment(side, path):
    ion = ARM_ION[(side, path)]
    label = BasisLabel.of({ion: P}).with_photon(side, PhotonSlot.propagating(path))
    (out, amp), = interact_rule(side, path)(label)
    assert out.photon(side).ion == ion and amp == 1.0


def test_norm_preserved_on_superposition():
    s = PureState([
        (BasisLabel.of({1: P, 3: P}, a=PhotonSlot.propagating(Path.LOWER)), 0.6),
        (BasisLabel.of({1: P, 3: M}, a=PhotonSlot.propagating(Path.LOWER)), 0.8j),
    ])
    assert norm2(interact(s, Side.A, Path.LOWER)) == pytest.approx(1, abs=1e-12)
