"""Inverse solver for a target mode spectrum: iterative diagonalisation (IDA)
wrapped in differential evolution over the A-matrix diagonals (IDADE)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import ANTI_TRAP_WARN_FRACTION, AXIS_INDEX, IonChain, tweezers_from_arrays
from .modes import build_a_matrix, diagonalize, eigh_descending, signed_sqrt


@dataclass(frozen=True)
class IdaConfig:
    tolerance: float  # rad/s, infinity norm on the spectrum
    max_iter: int = 100
    population: int = 100
    zeta: float = 0.9
    kappa: float = 0.5
    eta: float = 0.5
    seed: int = 0
    max_rounds: int = 50
    fixed_point_threshold: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class IdaResult:
    a_tilde: np.ndarray
    w_inter: np.ndarray
    b_inter: np.ndarray
    converged: bool
    iterations: int
    error: float


@dataclass
class InverseSolution:
    omega: np.ndarray  # per-ion tweezer strengths, rad/s
    sign: np.ndarray
    w_target: np.ndarray
    w_res: np.ndarray  # spectrum from an independent forward rebuild
    error: float  # ||w_target - w_res||_inf, rad/s
    iterations: int
    rounds: int
    converged: bool
    member: int
    a_tilde: np.ndarray = field(repr=False)
    fixed_point_residual: float = float("nan")
    strong_anti_trapping: bool = False


def spectrum_error(w_a, w_b) -> np.ndarray:
    return np.max(np.abs(np.asarray(w_a) - np.asarray(w_b)), axis=-1)


def _offdiag(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def _ida_batch(w_tar, b, a_conv, eps, k_max, stop_on_first=True):
    """Run IDA on a stack of initial eigenvector guesses ``b`` (P, N, N).

    Returns (a_tilde, w_inter, b_inter, converged, iterations).
    """
    w2 = np.asarray(w_tar) ** 2
    off = _offdiag(a_conv)
    n = off.shape[0]
    di = np.diag_indices(n)
    b = np.array(b, dtype=float, copy=True)
    p = b.shape[0]
    a_tilde = np.empty((p, n, n))
    w_inter = np.empty((p, n))
    done = np.zeros(p, dtype=bool)
    active = np.arange(p)
    it = 0
    for it in range(1, k_max + 1):
        bb = b[active]
        diag = np.einsum("pim,m,pim->pi", bb, w2, bb)
        at = np.broadcast_to(off, (len(active), n, n)).copy()
        at[:, di[0], di[1]] = diag
        vals, vecs = eigh_descending(at)
        w = signed_sqrt(vals)
        err = spectrum_error(w, w_tar)
        a_tilde[active] = at
        w_inter[active] = w
        b[active] = vecs
        ok = err <= eps
        done[active[ok]] = True
        if stop_on_first and ok.any():
            break
        active = active[~ok]
        if active.size == 0:
            break
    return a_tilde, w_inter, b, done, it


def ida(w_tar, b_init, a_conv, eps: float, k_max: int = 100) -> IdaResult:
    """Single-start IDA; ``w_tar`` is sorted into descending order."""
    w_tar = np.sort(np.asarray(w_tar, dtype=float))[::-1]
    at, w, b, done, it = _ida_batch(w_tar, np.asarray(b_init)[None], a_conv, eps, k_max)
    return IdaResult(at[0], w[0], b[0], bool(done[0]), it, float(spectrum_error(w[0], w_tar)))


def extract_tweezer_params(a_tilde: np.ndarray, a_conv: np.ndarray):
    """Per-ion (omega_opt, s_opt) from the diagonal difference of two A-matrices."""
    d = np.diag(a_tilde) - np.diag(a_conv)
    omega = np.sqrt(np.abs(d))
    sign = np.where(d < 0, -1, 1)
    return omega, sign


def detect_fixed_point(b: np.ndarray, threshold: float = 1e-10):
    """|det(B o B)| and whether it falls below ``threshold``."""
    r = float(abs(np.linalg.det(np.asarray(b) ** 2)))
    return r < threshold, r


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _member_rngs(seed: int, p: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(p)]


def de_step(a_pop, w_tar, a_conv, zeta, kappa, eta, rng, errors=None):
    """One differential-evolution step over the diagonals of a population of A-matrices.

    ``rng`` is a Generator or a list with one Generator per member. Returns
    (new population, their errors, their eigenvectors).
    """
    a_pop = np.asarray(a_pop, dtype=float)
    p, n, _ = a_pop.shape
    if p < 4:
        raise ValueError("population must be at least 4")
    rngs = rng if isinstance(rng, (list, tuple)) else [rng] * p
    w_tar = np.asarray(w_tar)
    vals, vecs = eigh_descending(a_pop)
    err = spectrum_error(signed_sqrt(vals), w_tar) if errors is None else np.asarray(errors)
    best = int(np.argmin(err))  # lowest index on ties
    x = np.diagonal(a_pop, axis1=1, axis2=2)
    x_new = x.copy()
    for i in range(p):
        g = rngs[i]
        others = [j for j in range(p) if j != i]
        q, r = g.choice(others, size=2, replace=False)
        u = x[i] + zeta * (x[best] - x[i]) + kappa * (x[q] - x[r])
        keep = g.random(n) < eta
        x_new[i] = np.where(keep, u, x[i])
    off = _offdiag(a_conv)
    trial = np.broadcast_to(off, (p, n, n)).copy()
    di = np.diag_indices(n)
    trial[:, di[0], di[1]] = x_new
    tvals, tvecs = eigh_descending(trial)
    terr = spectrum_error(signed_sqrt(tvals), w_tar)
    better = terr < err
    out = np.where(better[:, None, None], trial, a_pop)
    out_err = np.where(better, terr, err)
    out_vecs = np.where(better[:, None, None], tvecs, vecs)
    return out, out_err, out_vecs


def forward_spectrum(a_conv, omega, sign, chain: IonChain | None = None, axis: str | None = None) -> np.ndarray:
    """Spectrum of the system with the given tweezers, rebuilt from scratch."""
    if chain is not None:
        a = build_a_matrix(chain, axis, tweezers_from_arrays(omega, sign, axis)).matrix
    else:
        a = np.array(a_conv, dtype=float)
        a[np.diag_indices_from(a)] += np.asarray(sign) * np.asarray(omega) ** 2
    return diagonalize(a, check=False).freqs


def idade(w_tar, a_conv, config: IdaConfig, chain: IonChain | None = None, axis: str | None = None,
          history: list | None = None) -> InverseSolution:
    """Find tweezer strengths reproducing ``w_tar`` (rad/s) for the A-matrix ``a_conv``.

    If ``chain``/``axis`` are given the final check rebuilds the A-matrix from
    the chain; otherwise from ``a_conv`` plus the diagonal shifts. ``history``
    (if a list) receives the best population error after every round.
    """
    w_tar = np.sort(np.asarray(w_tar, dtype=float))[::-1]
    a_conv = np.asarray(a_conv, dtype=float)
    n = a_conv.shape[0]
    if w_tar.shape != (n,):
        raise ValueError(f"target has {w_tar.size} frequencies, chain has {n} ions")
    cfg = config
    rngs = _member_rngs(cfg.seed, cfg.population)
    b = np.stack([random_orthogonal(n, g) for g in rngs])
    total_iter = 0
    errs = None
    for rnd in range(cfg.max_rounds + 1):
        at, w, b, done, it = _ida_batch(w_tar, b, a_conv, cfg.tolerance, cfg.max_iter)
        total_iter += it
        errs = spectrum_error(w, w_tar)
        if history is not None:
            history.append(float(errs.min()))
        if done.any():
            member = int(np.flatnonzero(done)[0])
            break
        if rnd == cfg.max_rounds:
            member = int(np.argmin(errs))
            break
        at, errs, b = de_step(at, w_tar, a_conv, cfg.zeta, cfg.kappa, cfg.eta, rngs, errors=errs)
        if history is not None:
            history.append(float(errs.min()))
    a_best = at[member]
    omega, sign = extract_tweezer_params(a_best, a_conv)
    w_res = forward_spectrum(a_conv, omega, sign, chain, axis)
    error = float(spectrum_error(w_res, w_tar))
    conv_diag = np.sqrt(np.abs(np.diag(a_conv)))
    strong = bool(np.any((sign < 0) & (omega > ANTI_TRAP_WARN_FRACTION * conv_diag)))
    return InverseSolution(
        omega=omega,
        sign=sign,
        w_target=w_tar,
        w_res=w_res,
        error=error,
        iterations=total_iter,
        rounds=rnd,
        converged=error <= cfg.tolerance,
        member=member,
        a_tilde=a_best,
        fixed_point_residual=detect_fixed_point(b[member], cfg.fixed_point_threshold)[1],
        strong_anti_trapping=strong,
    )


def generate_solvable_target(
    chain: IonChain,
    axis: str,
    rng: np.random.Generator,
    max_strength: float,
    allow_anti: bool = True,
    max_tries: int = 1000,
):
    """Random tweezer configuration and the spectrum it produces.

    Strengths are uniform in [0, max_strength], signs uniform in {+1, -1}
    (only +1 when ``allow_anti`` is false); samples that deconfine an ion or
    destabilise a mode are redrawn. Returns (w_tar, omega, sign).
    """
    a_conv = build_a_matrix(chain, axis).matrix
    conv = chain.conv_freqs()[:, AXIS_INDEX[axis]]
    n = chain.n
    for _ in range(max_tries):
        omega = rng.uniform(0.0, max_strength, n)
        sign = rng.choice([-1, 1], n) if allow_anti else np.ones(n, dtype=int)
        if np.any(conv**2 + sign * omega**2 <= 0):
            continue
        a = a_conv.copy()
        a[np.diag_indices(n)] += sign * omega**2
        modes = diagonalize(a, axis, check=False)
        if not modes.stable:
            continue
        return modes.freqs, omega, sign
    raise RuntimeError("could not draw a confining tweezer configuration")
