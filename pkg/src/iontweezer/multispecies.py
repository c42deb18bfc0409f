"""Mode decoupling in mixed-mass chains and the tweezer that restores a uniform centre-of-mass mode."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chain import AXIS_INDEX, ConventionalTrap, IonChain, check_tweezer_validity, make_chain, tweezers_from_arrays
from .eigvec import EigvecProblem, solve_eigenvectors
from .modes import build_a_matrix, diagonalize, mass_weighted_eigenvectors


def com_restoring_tweezer(chain: IonChain, axis: str, target: float | None = None):
    """Per-ion tweezer (omega_opt, sign) equalising every ion's hybrid frequency along ``axis``.

    ``target`` defaults to the largest conventional frequency in the chain, so
    only the heavier ions need a (trapping) tweezer. A target below some ion's
    conventional frequency gives that ion sign -1.
    """
    conv = chain.conv_freqs()[:, AXIS_INDEX[axis]]
    target = conv.max() if target is None else float(target)
    d = target**2 - conv**2
    d[np.isclose(d, 0.0, atol=1e-12 * target**2)] = 0.0
    sign = np.where(d < 0, -1, 1)
    check_tweezer_validity(conv, d)
    return np.sqrt(np.abs(d)), sign


def eigenvector_overlap(b_a: np.ndarray, b_b: np.ndarray, mode: int = 0) -> float:
    """|<a_col, b_col>| between normalised columns; the absolute value fixes the sign gauge."""
    a, b = b_a[:, mode], b_b[:, mode]
    return float(abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def uniform_mode_residual(a: np.ndarray, masses: np.ndarray) -> float:
    """Relative residual of the uniform physical displacement as an eigenvector of ``a``."""
    u = np.sqrt(masses) / np.linalg.norm(np.sqrt(masses))
    lam = u @ a @ u
    return float(np.linalg.norm(a @ u - lam * u) / np.linalg.norm(a, 2))


@dataclass
class RestorationReport:
    axis: str
    omega_opt: np.ndarray
    sign: np.ndarray
    strength_ratio: float  # max omega_opt over that ion's conventional frequency
    freqs_reference: np.ndarray
    freqs_before: np.ndarray
    freqs_after: np.ndarray
    com_overlap_before: float
    com_overlap_after: float
    uniform_residual: float
    com_vector_after: np.ndarray
    all_vectors_feasible: bool
    all_vectors_residual: float


def restore_com(species, trap: ConventionalTrap, axis: str = "y", reference_species=None) -> RestorationReport:
    """Compare a mixed chain with a single-species chain and apply the restoring tweezer.

    ``reference_species`` (default: the lightest species present) builds the
    single-species comparison chain of the same length.
    """
    mixed = make_chain(species, trap)
    if reference_species is None:
        reference_species = min(mixed.species, key=lambda s: s.mass)
    ref = make_chain([reference_species] * mixed.n, trap)

    ref_modes = diagonalize(build_a_matrix(ref, axis))
    a_before = build_a_matrix(mixed, axis)
    before = diagonalize(a_before)
    omega, sign = com_restoring_tweezer(mixed, axis)
    a_after = build_a_matrix(mixed, axis, tweezers_from_arrays(omega, sign, axis))
    after = diagonalize(a_after)

    b_ref = mass_weighted_eigenvectors(ref_modes, ref.masses)
    b_before = mass_weighted_eigenvectors(before, mixed.masses)
    b_after = mass_weighted_eigenvectors(after, mixed.masses)

    # can every eigenvector of the single-species chain be imposed at once?
    full = solve_eigenvectors(EigvecProblem(ref_modes.vectors, a_before.matrix))

    conv = mixed.conv_freqs()[:, AXIS_INDEX[axis]]
    return RestorationReport(
        axis=axis,
        omega_opt=omega,
        sign=sign,
        strength_ratio=float(np.max(omega / conv)),
        freqs_reference=ref_modes.freqs,
        freqs_before=before.freqs,
        freqs_after=after.freqs,
        com_overlap_before=eigenvector_overlap(b_ref, b_before),
        com_overlap_after=eigenvector_overlap(b_ref, b_after),
        uniform_residual=uniform_mode_residual(a_after.matrix, mixed.masses),
        com_vector_after=b_after[:, 0],
        all_vectors_feasible=full.feasible,
        all_vectors_residual=full.residual,
    )


def strength_by_scaling_model(species, trap: ConventionalTrap, axis: str = "y") -> dict[str, float]:
    """Required strength ratio under each transverse mass-scaling model of the conventional trap."""
    out = {}
    for model in ("rf", "two-term"):
        t = replace(trap, transverse_scaling=model)
        out[model] = restore_com(species, t, axis).strength_ratio
    return out
