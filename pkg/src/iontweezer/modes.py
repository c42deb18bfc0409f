"""Normal modes: mass-weighted Hessians (A-matrices), diagonalisation, perturbative spectra."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import AXIS_INDEX, ConventionalTrap, IonChain, Tweezer, tweezer_diagonal
from .constants import K_COULOMB


class UnstableModeError(ValueError):
    def __init__(self, eigenvalues: np.ndarray):
        neg = eigenvalues[eigenvalues < 0]
        super().__init__(f"unstable mode(s): squared frequencies {neg.tolist()}")
        self.eigenvalues = eigenvalues


@dataclass(frozen=True)
class AMatrix:
    axis: str
    matrix: np.ndarray = field(repr=False)
    chain: IonChain | None = field(default=None, repr=False)
    tweezers: tuple[Tweezer, ...] = ()


@dataclass(frozen=True)
class ModeStructure:
    """Eigenfrequencies (rad/s, descending) and orthonormal eigenvectors (columns).

    ``squared`` keeps the signed eigenvalues so that unstable modes stay
    visible; ``freqs`` is sign(lambda) * sqrt(|lambda|).
    """

    axis: str
    squared: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def freqs(self) -> np.ndarray:
        return signed_sqrt(self.squared)

    @property
    def stable(self) -> bool:
        return bool(np.all(self.squared > 0))


def signed_sqrt(x):
    return np.sign(x) * np.sqrt(np.abs(x))


def coulomb_couplings(chain: IonChain) -> np.ndarray:
    """k_ij = q_i q_j / (4 pi eps0 |z_i - z_j|^3), zero on the diagonal."""
    z = chain.positions
    q = chain.charges
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, 1.0)
    k = K_COULOMB * np.outer(q, q) / d**3
    np.fill_diagonal(k, 0.0)
    return k


def hessian(chain: IonChain, axis: str, tweezers: Sequence[Tweezer] = (), trap: ConventionalTrap | None = None) -> np.ndarray:
    """Hessian of the total potential along one axis at equilibrium (J/m^2)."""
    k = coulomb_couplings(chain)
    conv = chain.conv_freqs(trap)[:, AXIS_INDEX[axis]]
    m = chain.masses
    off = -2.0 * k if axis == "z" else k
    hess = off.copy()
    hess[np.diag_indices(chain.n)] = m * (conv**2 + tweezer_diagonal(tweezers, chain.n, axis)) - off.sum(axis=1)
    return hess


def build_a_matrix(
    chain: IonChain,
    axis: str,
    tweezers: Sequence[Tweezer] = (),
    trap: ConventionalTrap | None = None,
) -> AMatrix:
    m = chain.masses
    s = 1.0 / np.sqrt(m)
    a = s[:, None] * hessian(chain, axis, tweezers, trap) * s[None, :]
    a = 0.5 * (a + a.T)
    return AMatrix(axis, a, chain, tuple(tweezers))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=-2)
    pick = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    return vecs * np.where(pick < 0, -1.0, 1.0)


def eigh_descending(a: np.ndarray):
    """Batched symmetric eigendecomposition, eigenvalues descending, sign-fixed columns."""
    vals, vecs = np.linalg.eigh(a)
    return vals[..., ::-1], _fix_signs(vecs[..., ::-1])


def diagonalize(a: AMatrix | np.ndarray, axis: str | None = None, check: bool = True) -> ModeStructure:
    """Diagonalize an A-matrix; raises :class:`UnstableModeError` for negative eigenvalues when ``check``."""
    mat = a.matrix if isinstance(a, AMatrix) else np.asarray(a)
    axis = a.axis if isinstance(a, AMatrix) else (axis or "?")
    vals, vecs = eigh_descending(mat)
    if check and np.any(vals < 0):
        raise UnstableModeError(vals)
    return ModeStructure(axis, vals, vecs)


def normal_modes(chain: IonChain, axis: str, tweezers: Sequence[Tweezer] = (), check: bool = True) -> ModeStructure:
    return diagonalize(build_a_matrix(chain, axis, tweezers), check=check)


def perturbative_spectrum(conv_modes: ModeStructure, signed_sq: np.ndarray) -> np.ndarray:
    """First-order spectrum w_m^2 = w_conv,m^2 + sum_i s_i omega_i^2 B_im^2 (returned as frequencies)."""
    w2 = conv_modes.squared + (conv_modes.vectors**2).T @ np.asarray(signed_sq, dtype=float)
    return signed_sqrt(w2)


def mass_weighted_eigenvectors(modes: ModeStructure, masses: np.ndarray) -> np.ndarray:
    """Physical-displacement mode shapes: B_im / sqrt(M_i), columns renormalised."""
    b = modes.vectors / np.sqrt(np.asarray(masses))[:, None]
    return b / np.linalg.norm(b, axis=0)
