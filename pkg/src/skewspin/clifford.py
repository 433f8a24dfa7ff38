"""Fixed rank-2 Clifford algebra representations in dimensions 2 and 3.

Sign convention: gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij.  In
dimension 2 the volume element omega = gamma_1 gamma_2 squares to -Id and
X.omega = -J(X) for the quarter-turn J.  In dimension 3 the gammas are
attached to a *direct* orthonormal frame order and satisfy
-gamma_1 gamma_2 gamma_3 = Id, so the complex volume form acts as the
identity.  All gammas are anti-Hermitian, making Clifford multiplication
skew-adjoint for the Hermitian product.
"""

from dataclasses import dataclass

import numpy as np

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

ID2 = np.eye(2, dtype=np.complex128)

# conjugate(conjugate(s)) == CONJUGATION_SQUARE_SIGN * s for the frozen
# commuting conjugation below
CONJUGATION_SQUARE_SIGN = -1.0


@dataclass(frozen=True)
class CliffordRep:
    """Gamma matrices for one frame slot each, plus the dim-2 conjugation."""

    dim: int
    gammas: tuple
    conj_mat: np.ndarray | None = None  # apply as conj_mat @ conj(s)


def clifford_rep(dim: int) -> CliffordRep:
    if dim == 2:
        return CliffordRep(2, (1j * PAULI[0], 1j * PAULI[1]), PAULI[1].copy())
    if dim == 3:
        return CliffordRep(3, tuple(-1j * p for p in PAULI))
    raise ValueError(f"unsupported dimension {dim}")


def clifford_mul(v, s, rep: CliffordRep):
    """Clifford action (sum_i v_i gamma_i) s; batched over leading axes.

    ``v`` has shape (..., dim) in frame components, ``s`` shape (..., 2).
    """
    v = np.asarray(v)
    s = np.asarray(s, dtype=np.complex128)
    if v.shape[-1] != rep.dim:
        raise ValueError(f"vector has {v.shape[-1]} components, rep.dim={rep.dim}")
    gam = np.stack(rep.gammas)  # (dim, 2, 2)
    mat = np.einsum("...i,ijk->...jk", v, gam)
    return np.einsum("...jk,...k->...j", mat, s)


def apply_matrix(m, s):
    """Apply a constant 2x2 spinor operator to batched spinors."""
    return np.einsum("jk,...k->...j", np.asarray(m, dtype=np.complex128), s)


def herm(s, t):
    """Hermitian product <s, t>, linear in the first slot; batched."""
    s = np.asarray(s)
    t = np.asarray(t)
    return np.sum(s * np.conj(t), axis=-1)


def norm(s):
    return np.sqrt(np.real(herm(s, s)))


def conjugate(s, rep: CliffordRep):
    """Anti-linear conjugation commuting with Clifford multiplication.

    Only the 2-dimensional representation carries it; applying it twice
    gives CONJUGATION_SQUARE_SIGN times the identity.
    """
    if rep.dim != 2 or rep.conj_mat is None:
        raise ValueError("conjugation is only defined for the dim-2 representation")
    return apply_matrix(rep.conj_mat, np.conj(np.asarray(s, dtype=np.complex128)))


def conjugate_anticommuting(s, rep: CliffordRep):
    """The alternative conjugation that anticommutes with Clifford
    multiplication; unlike the commuting one it pairs non-degenerately with
    s under Re<.,.>, which some twistor normalizations require."""
    if rep.dim != 2:
        raise ValueError("conjugation is only defined for the dim-2 representation")
    return apply_matrix(PAULI[0], np.conj(np.asarray(s, dtype=np.complex128)))


def omega(rep: CliffordRep):
    """Volume element gamma_1 gamma_2 of the dim-2 representation."""
    if rep.dim != 2:
        raise ValueError("omega is the dim-2 volume element")
    return rep.gammas[0] @ rep.gammas[1]


def volume3(rep: CliffordRep):
    """-gamma_1 gamma_2 gamma_3; equals Id for the frozen dim-3 rep."""
    if rep.dim != 3:
        raise ValueError("volume3 needs the dim-3 representation")
    g = rep.gammas
    return -g[0] @ g[1] @ g[2]


def rotate_vector_quarter(v):
    """J on tangent components in dim 2: J(e_1) = e_2, J(e_2) = -e_1."""
    v = np.asarray(v)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out
