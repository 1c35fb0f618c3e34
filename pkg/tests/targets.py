"""Hand-transcribed target states for the interferometer evolutions.

Built only from labels and amplitudes; nothing here calls the simulator's
maps, so the tests compare two independent routes.
"""

import math

from ionpurify.core import BasisLabel, IonLevel, Path, PhotonSlot, Pol, PureState

P, M, G = IonLevel.MPLUS, IonLevel.MMINUS, IonLevel.GROUND
R2 = 1 / math.sqrt(2)

U = PhotonSlot.propagating(Path.UPPER, Pol.PLUS)
L = PhotonSlot.propagating(Path.LOWER, Pol.PLUS)


def S(ion):
    return PhotonSlot.scattered(ion, Pol.PLUS)


def side_a(slot, ion1, ion3):
    return BasisLabel.of({1: ion1, 3: ion3}, a=slot)


# single photon on side A, ions 1 (upper arm) and 3 (lower arm)
SINGLE_SIDE = {
    (P, P): PureState([(side_a(S(1), G, P), R2), (side_a(S(3), P, G), 1j * R2)]),
    (P, M): PureState([
        (side_a(S(1), G, M), R2),
        (side_a(U, P, M), 1j / 2),       # (i/2) a_u
        (side_a(L, P, M), 1j * 1j / 2),  # (i/2) i a_l
    ]),
    (M, P): PureState([
        (side_a(S(3), M, G), 1j * R2),
        (side_a(L, M, P), 0.5),
        (side_a(U, M, P), 0.5j),
    ]),
    (M, M): PureState([(side_a(U, M, M), 1j)]),
}

# (u + i l) and (l + i u) as {slot: coefficient}
U_IL = {U: 1.0, L: 1j}
L_IU = {L: 1.0, U: 1j}
ONLY_U = {U: 1.0}


def two_photon(coeff, fa, fb, ions):
    """coeff * f_A(a†) f_B(a†) |ions>, ions ordered 1..4."""
    return [
        (BasisLabel(sa, sb, ions), coeff * ca * cb)
        for sa, ca in fa.items()
        for sb, cb in fb.items()
    ]


# non-scattered part of each two-pair branch, plus the scatter-sector norm
TWO_PAIR = {
    ("phi+", "phi+"): (
        PureState(
            two_photon(-1 / 8, U_IL, U_IL, (P, P, M, M))
            + two_photon(1 / 8, L_IU, L_IU, (M, M, P, P))
            + two_photon(-1 / 2, ONLY_U, ONLY_U, (M, M, M, M))
        ),
        math.sqrt(10) / 4,
    ),
    ("phi+", "psi+"): (
        PureState(
            two_photon(1j / 4, L_IU, ONLY_U, (M, M, P, M))
            + two_photon(1j / 4, ONLY_U, L_IU, (M, M, M, P))
        ),
        math.sqrt(3) / 2,
    ),
    ("psi+", "phi+"): (
        PureState(
            two_photon(-1 / 4, U_IL, ONLY_U, (P, M, M, M))
            + two_photon(-1 / 4, ONLY_U, U_IL, (M, P, M, M))
        ),
        math.sqrt(3) / 2,
    ),
    ("psi+", "psi+"): (
        PureState(
            two_photon(1j / 8, U_IL, L_IU, (P, M, M, P))
            + two_photon(1j / 8, L_IU, U_IL, (M, P, P, M))
        ),
        math.sqrt(14) / 4,
    ),
}


def concentration_clean_part(a, b):
    c = 1j * a * b / 4
    return PureState(
        two_photon(c, U_IL, L_IU, (P, M, M, P)) + two_photon(c, L_IU, U_IL, (M, P, P, M)),
        conditional=True,
    )


GHZ1 = PureState([(BasisLabel(ions=(P, P, M, M)), R2), (BasisLabel(ions=(M, M, P, P)), R2)])
GHZ2 = PureState([(BasisLabel(ions=(P, M, M, P)), R2), (BasisLabel(ions=(M, P, P, M)), R2)])
PHI_PLUS_12 = PureState([(BasisLabel.of({1: P, 2: P}), R2), (BasisLabel.of({1: M, 2: M}), R2)])
PSI_PLUS_12 = PureState([(BasisLabel.of({1: P, 2: M}), R2), (BasisLabel.of({1: M, 2: P}), R2)])


def clean_part(state):
    """Terms with no scattered photon (sub-normalized)."""
    return PureState(
        (
            (lab, amp)
            for lab, amp in state.terms.items()
            if not any(s is not None and s.is_scattered for s in (lab.photon_a, lab.photon_b))
        ),
        conditional=True,
    )


def reduced_eigenvalues(state, keep=(1, 2)):
    """Eigenvalues of the reduced density matrix of ``keep`` for a four-ion pure state."""
    import numpy as np

    levels = (P, M, G)
    other = tuple(k for k in (1, 2, 3, 4) if k not in keep)
    dim = len(levels) ** 2
    psi = np.zeros((dim, dim), dtype=complex)
    for lab, amp in state.terms.items():
        i = levels.index(lab.ion(keep[0])) * 3 + levels.index(lab.ion(keep[1]))
        j = levels.index(lab.ion(other[0])) * 3 + levels.index(lab.ion(other[1]))
        psi[i, j] += amp
    rho = psi @ psi.conj().T
    ev = np.sort(np.linalg.eigvalsh(rho))[::-1]
    return ev[ev > 1e-14]
