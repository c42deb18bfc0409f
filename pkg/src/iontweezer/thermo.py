"""Two-point-measurement work statistics of a single ion under a linear tweezer-power ramp.

Energies and work are in units of hbar * omega_f; inverse temperature is the
dimensionless ``beta_f = hbar * omega_f * beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class LeakageError(RuntimeError):
    def __init__(self, leakage: float, tol: float):
        super().__init__(f"truncation leakage {leakage:.3e} exceeds {tol:.1e}; increase N_max")
        self.leakage = leakage


@dataclass(frozen=True)
class RampSchedule:
    """omega^2(t) = omega_i^2 + (omega_f^2 - omega_i^2) t / tau for 0 <= t <= tau."""

    omega_i: float
    omega_f: float
    tau: float

    def __post_init__(self):
        if not (self.omega_i > 0 and self.omega_f > 0):
            raise ValueError("ramp frequencies must be positive")
        if self.tau < 0:
            raise ValueError("switching time must be non-negative")

    def omega_sq(self, t):
        if self.tau == 0:
            return self.omega_f**2
        return self.omega_i**2 + (self.omega_f**2 - self.omega_i**2) * np.asarray(t) / self.tau

    @classmethod
    def mass_ratio(cls, omega_z: float, mass_expt: float, mass_tar: float, tau_omega_f: float):
        """Ramp taking an ion of ``mass_expt`` to the axial frequency a ``mass_tar`` ion has in the same trap.

        ``tau_omega_f`` is the switching time in units of 1/omega_f.
        """
        wf = omega_z * math.sqrt(mass_expt / mass_tar)
        return cls(omega_z, wf, tau_omega_f / wf)


@dataclass
class TransitionMatrix:
    """P(m|n, tau): rows m (final omega_f Fock states), columns n (initial omega_i Fock states)."""

    tau: float
    n_max: int
    probs: np.ndarray = field(repr=False)  # shape (m_max, n_max)
    leakage: float = 0.0
    steps: int = 0

    @property
    def column_sums(self) -> np.ndarray:
        return self.probs.sum(axis=0)


@dataclass
class WorkDistribution:
    work: np.ndarray  # support points, units of hbar omega_f
    probs: np.ndarray
    beta_f: float
    lobe: np.ndarray  # k = (m - n) / 2 for each support point
    leakage: float = 0.0

    def lobe_weights(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for k, p in zip(self.lobe, self.probs):
            out[int(k)] = out.get(int(k), 0.0) + float(p)
        return out


def ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def overlap_matrix(ratio: float, m_out: int, n_basis: int) -> np.ndarray:
    """<m_f | k_i> for m < m_out, k < n_basis, with ratio = omega_f / omega_i.

    Built from the squeezed ground state of the final oscillator and the
    Bogoliubov relation a_f^dag = cosh r a_i^dag + sinh r a_i, e^{2r} = ratio.
    """
    r = 0.5 * math.log(ratio)
    big = n_basis + m_out + 32
    c = np.zeros(big)
    c[0] = 1.0
    t = math.tanh(r)
    for k in range(0, big - 2, 2):
        c[k + 2] = -t * math.sqrt((k + 1) / (k + 2)) * c[k]
    c /= np.linalg.norm(c)
    a = ladder(big)
    adag_f = math.cosh(r) * a.T + math.sinh(r) * a
    out = np.empty((m_out, big))
    v = c
    for m in range(m_out):
        out[m] = v
        v = adag_f @ v / math.sqrt(m + 1)
    return out[:, :n_basis]


def _magnus_propagator(h0, v, g, tau, n_steps):
    """Fourth-order Magnus propagator for H(t) = h0 + g(t) v (hbar = 1)."""
    dt = tau / n_steps
    c = 0.5 - math.sqrt(3) / 6
    comm = h0 @ v - v @ h0
    u = np.eye(h0.shape[0], dtype=complex)
    for j in range(n_steps):
        t0 = j * dt
        g1, g2 = g(t0 + c * dt), g(t0 + (1 - c) * dt)
        k = 0.5 * dt * (2 * h0 + (g1 + g2) * v) - 1j * (math.sqrt(3) / 12) * dt**2 * (g1 - g2) * comm
        w, q = sla.eigh(k)
        u = (q * np.exp(-1j * w)) @ (q.conj().T @ u)
    return u


def propagate(
    ramp: RampSchedule,
    n_max: int = 64,
    pad: int | None = None,
    step_tol: float = 1e-10,
    leak_tol: float = 1e-10,
    min_steps: int = 4,
    max_steps: int = 1 << 16,
) -> TransitionMatrix:
    """Transition probabilities between initial and final Fock states for a ramp.

    Propagates in the initial-oscillator Fock basis of size ``n_max + 2*pad``
    (pad defaults to max(n_max // 2, 16)); the number of Magnus steps doubles until
    max |dP| < ``step_tol``. Rows run over m < n_max + pad.
    """
    pad = max(n_max // 2, 16) if pad is None else pad
    nb = n_max + 2 * pad
    m_out = n_max + pad
    rho = ramp.omega_f / ramp.omega_i
    x2 = (ladder(nb) + ladder(nb).T) @ (ladder(nb) + ladder(nb).T)
    h0 = np.diag(np.arange(nb) + 0.5)  # units of omega_i
    v = 0.25 * x2
    tau_i = ramp.omega_i * ramp.tau
    ov = overlap_matrix(rho, m_out, nb)

    def g(s):
        return (rho**2 - 1) * s / tau_i

    def probs_for(u):
        amp = ov @ u[:, :n_max]
        return np.abs(amp) ** 2

    if tau_i == 0:
        p = probs_for(np.eye(nb, dtype=complex))
        steps = 0
    else:
        steps = max(min_steps, int(math.ceil(tau_i / 0.5)))
        p = probs_for(_magnus_propagator(h0, v, g, tau_i, steps))
        while True:
            steps *= 2
            if steps > max_steps:
                raise RuntimeError("time stepping did not converge")
            p_new = probs_for(_magnus_propagator(h0, v, g, tau_i, steps))
            diff = np.max(np.abs(p_new - p))
            p = p_new
            if diff < step_tol:
                break
    # parity is conserved exactly; remove round-off in forbidden entries
    m_idx, n_idx = np.indices(p.shape)
    p[(m_idx + n_idx) % 2 == 1] = 0.0
    leakage = float(np.max(1.0 - p.sum(axis=0)))
    if leakage > leak_tol:
        raise LeakageError(leakage, leak_tol)
    return TransitionMatrix(ramp.tau, n_max, p, max(leakage, 0.0), steps)


def thermal_weights(beta_i: float, n_max: int) -> np.ndarray:
    """P(n, beta) for n < n_max, with ``beta_i = hbar * omega_i * beta``."""
    n = np.arange(n_max)
    return -np.expm1(-beta_i) * np.exp(-beta_i * n)


def work_distribution(tm: TransitionMatrix, beta_f: float, omega_i: float, omega_f: float) -> WorkDistribution:
    """Discrete work distribution over all (m, n) pairs, W = (E'_m - E_n) / (hbar omega_f)."""
    if not beta_f > 0:
        raise ValueError("beta must be positive")
    rho = omega_f / omega_i
    m_out, n_max = tm.probs.shape
    pn = thermal_weights(beta_f / rho, n_max)
    m, n = np.indices((m_out, n_max))
    w = (m + 0.5) - (n + 0.5) / rho
    joint = tm.probs * pn[None, :]
    keep = joint > 0
    w, joint, k = w[keep], joint[keep], (m[keep] - n[keep]) // 2
    order = np.argsort(w, kind="stable")
    return WorkDistribution(w[order], joint[order], beta_f, k[order], tm.leakage)


@dataclass
class JarzynskiEstimate:
    mean_exp: float  # <exp(-beta W)>
    delta_f: float  # -ln<exp(-beta W)> / beta, units of hbar omega_f
    mean_work: float


def jarzynski_estimate(dist: WorkDistribution) -> JarzynskiEstimate:
    x = float(np.sum(dist.probs * np.exp(-dist.beta_f * dist.work)))
    return JarzynskiEstimate(x, -math.log(x) / dist.beta_f, float(np.sum(dist.probs * dist.work)))


def analytic_delta_f(omega_i: float, omega_f: float, beta_f: float) -> float:
    """Free-energy change of the oscillator in units of hbar omega_f (from the partition function)."""
    b_i = beta_f * omega_i / omega_f
    # ln sinh(x) written to stay finite for large x
    def lnsinh(x):
        return x + math.log1p(-math.exp(-2 * x)) - math.log(2)

    return (lnsinh(beta_f / 2) - lnsinh(b_i / 2)) / beta_f


def identity_residual(dist: WorkDistribution, omega_i: float, omega_f: float) -> float:
    """<exp(-beta (W - dF))> - 1 with the exact free-energy change."""
    df = analytic_delta_f(omega_i, omega_f, dist.beta_f)
    return float(np.sum(dist.probs * np.exp(-dist.beta_f * (dist.work - df)))) - 1.0


def sudden_ground_overlap(omega_i: float, omega_f: float) -> float:
    return 2 * math.sqrt(omega_i * omega_f) / (omega_i + omega_f)
