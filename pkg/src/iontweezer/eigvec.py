"""Inverse solver for target mode eigenvectors (two linear systems)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ida import extract_tweezer_params
from .modes import eigh_descending, signed_sqrt


class InfeasibleEigenvectorsError(ValueError):
    def __init__(self, residual: float):
        super().__init__(f"infeasible target eigenvectors (relative least-squares residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class EigvecProblem:
    b_tar: np.ndarray = field(repr=False)
    a_conv: np.ndarray = field(repr=False)
    tolerance: float = 1e-8

    def __post_init__(self):
        b = np.asarray(self.b_tar, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("target eigenvector matrix must be square")
        if not np.allclose(b.T @ b, np.eye(b.shape[0]), atol=1e-10, rtol=0):
            raise ValueError("target eigenvector matrix is not orthonormal")
        if np.shape(self.a_conv) != b.shape:
            raise ValueError("A_conv and B_tar shapes differ")


@dataclass
class EigvecSolution:
    feasible: bool
    residual: float  # relative residual of the off-diagonal system
    gamma: np.ndarray  # eigenvalues (squared frequencies) per target column
    a: np.ndarray = field(repr=False)
    omega: np.ndarray = field(default=None)
    sign: np.ndarray = field(default=None)
    physical: bool = True  # all gamma > 0
    degenerate: bool = False

    @property
    def freqs(self) -> np.ndarray:
        return signed_sqrt(self.gamma)


def commutant_basis(b_tar: np.ndarray) -> np.ndarray:
    """Rank-one spectral projectors b_k b_k^T, stacked as (N, N, N)."""
    b = np.asarray(b_tar, dtype=float)
    return np.einsum("ik,jk->kij", b, b)


def constraint_residual(b_tar: np.ndarray, a: np.ndarray) -> float:
    """Largest off-diagonal entry of B^T A B."""
    d = b_tar.T @ a @ b_tar
    return float(np.max(np.abs(d - np.diag(np.diag(d)))))


def solve_eigenvectors(problem: EigvecProblem, raise_infeasible: bool = False) -> EigvecSolution:
    """Find A with eigenvectors ``b_tar`` whose off-diagonals equal those of ``a_conv``.

    The coefficients are fixed only up to a common offset (a uniform tweezer on
    every ion leaves the eigenvectors unchanged); the offset returned is the
    one minimising the total squared tweezer strength sum_i (A_ii - A_conv,ii)^2.
    """
    b = np.asarray(problem.b_tar, dtype=float)
    a_conv = np.asarray(problem.a_conv, dtype=float)
    n = b.shape[0]
    basis = commutant_basis(b)
    iu = np.triu_indices(n, 1)
    m = basis[:, iu[0], iu[1]].T  # (pairs, N)
    rhs = a_conv[iu]
    gamma, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    scale = np.linalg.norm(rhs) or 1.0
    resid = float(np.linalg.norm(m @ gamma - rhs) / scale)
    # gauge: shift all gamma by c to minimise ||diag(A) - diag(A_conv)||
    diag_basis = basis[:, np.arange(n), np.arange(n)].T  # (N_ions, N_modes); rows sum to 1
    c = -np.mean(diag_basis @ gamma - np.diag(a_conv))
    gamma = gamma + c
    feasible = resid <= problem.tolerance
    if not feasible and raise_infeasible:
        raise InfeasibleEigenvectorsError(resid)
    a = np.einsum("k,kij->ij", gamma, basis)
    a = 0.5 * (a + a.T)
    if feasible:
        diag = np.diag(a).copy()
        a = a_conv.copy()
        a[np.diag_indices(n)] = diag
    omega, sign = extract_tweezer_params(a, a_conv)
    g = np.sort(gamma)
    scale_g = np.max(np.abs(g)) or 1.0
    degenerate = bool(np.any(np.diff(g) <= 1e-9 * scale_g))
    return EigvecSolution(
        feasible=feasible,
        residual=resid,
        gamma=gamma,
        a=a,
        omega=omega,
        sign=sign,
        physical=bool(np.all(gamma > 0)),
        degenerate=degenerate,
    )


def match_columns(b_ref: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Overlap |<ref_k|b_j>| of each reference column with its best-matching column of ``b``."""
    ov = np.abs(b_ref.T @ b)
    return ov.max(axis=1)


def recovered_overlaps(sol: EigvecSolution, b_tar: np.ndarray) -> np.ndarray:
    _, vecs = eigh_descending(sol.a)
    return match_columns(np.asarray(b_tar), vecs)
