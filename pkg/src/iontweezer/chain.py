"""Ion chain model: species, conventional trap, tweezers and equilibrium positions.

All frequencies are angular (rad/s), lengths in metres, masses in kg.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .constants import AMU, E_CHARGE, K_COULOMB

AXES = ("x", "y", "z")
AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

#: anti-trapping tweezers stronger than this fraction of the conventional
#: frequency trigger a validity warning
ANTI_TRAP_WARN_FRACTION = 0.5


class UnstableTrapError(ValueError):
    pass


class DeconfinedIonError(ValueError):
    pass


class EquilibriumError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float
    charge: float = E_CHARGE
    atomic_data_ref: str | None = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"species {self.name}: mass must be positive")
        if not self.charge > 0:
            raise ValueError(f"species {self.name}: charge must be positive")


# mass numbers are used as masses (171 u, 133 u), as in the literature this
# package reproduces
YB171 = IonSpecies("Yb171", 171 * AMU, E_CHARGE, atomic_data_ref="Yb171")
BA133 = IonSpecies("Ba133", 133 * AMU, E_CHARGE)

SPECIES: dict[str, IonSpecies] = {s.name: s for s in (YB171, BA133)}


def get_species(name: str) -> IonSpecies:
    try:
        return SPECIES[name]
    except KeyError:
        raise KeyError(f"unknown species {name!r}; known: {sorted(SPECIES)}") from None


@dataclass(frozen=True)
class ConventionalTrap:
    """Conventional (RF + DC) trap.

    Either ``freqs`` (rad/s, per axis, valid for ``reference``) or the Paul
    trap parameters ``v_dc, v_rf, omega_rf, xi, psi`` must be given.

    ``transverse_scaling`` controls how form (a) transverse frequencies are
    carried to other species: ``"rf"`` scales purely as q/M (pseudopotential
    only), ``"two-term"`` splits the reference frequency into a DC
    defocusing part and an RF part using ``dc_ratio`` = xi_alpha / xi_z.
    """

    freqs: tuple[float, float, float] | None = None
    reference: IonSpecies | None = None
    transverse_scaling: str = "rf"
    dc_ratio: tuple[float, float] = (0.5, 0.5)
    v_dc: float | None = None
    v_rf: float | None = None
    omega_rf: float | None = None
    xi: tuple[float, float, float] | None = None
    psi: tuple[float, float] | None = None

    def __post_init__(self):
        direct = self.freqs is not None
        paul = None not in (self.v_dc, self.v_rf, self.omega_rf, self.xi, self.psi)
        if direct == paul:
            raise ValueError("give either direct frequencies + reference species or Paul-trap parameters")
        if direct and self.reference is None:
            raise ValueError("direct trap frequencies need a reference species")
        if self.transverse_scaling not in ("rf", "two-term"):
            raise ValueError(f"unknown transverse scaling {self.transverse_scaling!r}")

    @classmethod
    def from_hz(cls, fx: float, fy: float, fz: float, reference: IonSpecies = YB171, **kw) -> "ConventionalTrap":
        return cls(freqs=(2 * math.pi * fx, 2 * math.pi * fy, 2 * math.pi * fz), reference=reference, **kw)


def conventional_frequencies(trap: ConventionalTrap, species: IonSpecies) -> np.ndarray:
    """Per-axis (x, y, z) conventional frequencies for ``species`` in rad/s."""
    if trap.freqs is None:
        q, m = species.charge, species.mass
        wz2 = q * trap.v_dc * trap.xi[2] / m
        rad2 = [
            -q * trap.v_dc * trap.xi[a] / m + (q * trap.v_rf * trap.psi[a]) ** 2 / (2 * m**2 * trap.omega_rf**2)
            for a in (0, 1)
        ]
        sq = [rad2[0], rad2[1], wz2]
    else:
        ref = trap.reference
        wx, wy, wz = trap.freqs
        if species == ref:
            return np.array([wx, wy, wz], dtype=float)
        # ratio of q/M relative to the reference species
        g = (species.charge / species.mass) / (ref.charge / ref.mass)
        wz2 = wz**2 * g
        if trap.transverse_scaling == "rf":
            rad2 = [(wx * g) ** 2, (wy * g) ** 2]
        else:
            rad2 = []
            for w, k in ((wx, trap.dc_ratio[0]), (wy, trap.dc_ratio[1])):
                dc = k * wz**2  # DC defocusing of the reference species
                rf = w**2 + dc
                rad2.append(-dc * g + rf * g**2)
        sq = [rad2[0], rad2[1], wz2]
    for ax, s in zip(AXES, sq):
        if s <= 0:
            raise UnstableTrapError(f"unstable trap for species {species.name}: omega_{ax}^2 = {s:.4g}")
    return np.sqrt(np.array(sq, dtype=float))


@dataclass(frozen=True)
class Tweezer:
    """Optical tweezer focused on one ion, strengths per axis in rad/s."""

    ion_index: int
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sign: tuple[int, int, int] = (1, 1, 1)
    power: float | None = None
    waist: float | None = None
    wavelength: float | None = None

    def __post_init__(self):
        if any(w < 0 for w in self.omega):
            raise ValueError("tweezer strengths must be non-negative")
        if any(s not in (1, -1) for s in self.sign):
            raise ValueError("tweezer signs must be +1 or -1")

    def signed_sq(self, axis: str) -> float:
        a = AXIS_INDEX[axis]
        return self.sign[a] * self.omega[a] ** 2


def tweezer_diagonal(tweezers: Sequence[Tweezer], n_ions: int, axis: str) -> np.ndarray:
    """Vector of s_opt * omega_opt^2 per ion along ``axis``."""
    d = np.zeros(n_ions)
    for tw in tweezers:
        if not 0 <= tw.ion_index < n_ions:
            raise IndexError(f"tweezer on ion {tw.ion_index} outside chain of {n_ions}")
        d[tw.ion_index] += tw.signed_sq(axis)
    return d


def tweezers_from_arrays(omega: np.ndarray, sign: np.ndarray, axis: str) -> list[Tweezer]:
    """One tweezer per ion acting along a single axis."""
    a = AXIS_INDEX[axis]
    out = []
    for i, (w, s) in enumerate(zip(omega, sign)):
        om = [0.0, 0.0, 0.0]
        sg = [1, 1, 1]
        om[a] = float(w)
        sg[a] = int(s)
        out.append(Tweezer(i, tuple(om), tuple(sg)))
    return out


def hybrid_frequency(omega_conv: float, omega_opt: float, sign: int = 1) -> float:
    r2 = omega_conv**2 + sign * omega_opt**2
    if r2 <= 0:
        raise DeconfinedIonError(f"deconfined ion: hybrid omega^2 = {r2:.4g}")
    return math.sqrt(r2)


def check_tweezer_validity(omega_conv: np.ndarray, signed_sq: np.ndarray) -> None:
    """Raise for deconfined ions, warn for strong anti-trapping tweezers."""
    r2 = omega_conv**2 + signed_sq
    if np.any(r2 <= 0):
        raise DeconfinedIonError(f"deconfined ion(s) at index {np.flatnonzero(r2 <= 0).tolist()}")
    strong = (signed_sq < 0) & (np.sqrt(np.abs(signed_sq)) > ANTI_TRAP_WARN_FRACTION * omega_conv)
    if np.any(strong):
        warnings.warn(
            f"anti-trapping tweezer(s) on ions {np.flatnonzero(strong).tolist()} exceed "
            f"{ANTI_TRAP_WARN_FRACTION} x conventional frequency; equilibrium shift may not be negligible",
            stacklevel=2,
        )


def optical_frequencies_from_physical(power: float, waist: float, wavelength: float, mass: float, chi: float):
    """Tweezer strengths (omega_x, omega_yz, sign) from beam power/waist/wavelength.

    ``chi`` is the species' polarizability factor at ``wavelength`` (see
    :func:`iontweezer.optics.chi`). The beam propagates along x.
    """
    i0 = 2 * power / (math.pi * waist**2)
    k = chi * i0
    sign = 1 if k >= 0 else -1
    wx = math.sqrt(abs(k) * wavelength**2 / (2 * math.pi**2 * waist**4 * mass))
    wy = math.sqrt(abs(k) / (waist**2 * mass))
    return wx, wy, sign


@dataclass(frozen=True)
class IonChain:
    species: tuple[IonSpecies, ...]
    positions: np.ndarray = field(repr=False)
    trap: ConventionalTrap | None = None

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.species])

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.charge for s in self.species])

    def conv_freqs(self, trap: ConventionalTrap | None = None) -> np.ndarray:
        """(N, 3) array of conventional frequencies per ion."""
        trap = trap or self.trap
        return np.array([conventional_frequencies(trap, s) for s in self.species])


def length_scale(species: IonSpecies, omega_z: float) -> float:
    return (K_COULOMB * species.charge**2 / (species.mass * omega_z**2)) ** (1.0 / 3.0)


def _axial_force_and_jac(u: np.ndarray, kappa: np.ndarray, qq: np.ndarray):
    """Dimensionless axial gradient of the potential and its Hessian."""
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, 1.0)
    inv2 = qq / d**2 * np.sign(d)
    np.fill_diagonal(inv2, 0.0)
    grad = kappa * u - inv2.sum(axis=1)
    off = -2.0 * qq / np.abs(d) ** 3
    np.fill_diagonal(off, 0.0)
    jac = off.copy()
    jac[np.diag_indices_from(jac)] = kappa - off.sum(axis=1)
    return grad, jac


def _axial_energy(u, kappa, qq):
    d = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * np.sum(kappa * u**2) + np.sum(qq[iu] / d[iu])


def equilibrium_positions(
    species: Sequence[IonSpecies],
    trap: ConventionalTrap,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> np.ndarray:
    """Axial equilibrium positions (m) of a linear chain, sorted ascending.

    Damped Newton iteration in units of the Coulomb length of the first ion;
    starts from uniform spacing centred on the trap.
    """
    species = list(species)
    n = len(species)
    if n == 0:
        raise ValueError("empty chain")
    wz = np.array([conventional_frequencies(trap, s)[2] for s in species])
    m = np.array([s.mass for s in species])
    q = np.array([s.charge for s in species])
    ref_q = q[0]
    ell = length_scale(species[0], wz[0])
    # energies in units of k q0^2 / ell
    kappa = m * wz**2 * ell**3 / (K_COULOMB * ref_q**2)
    qq = np.outer(q, q) / ref_q**2
    if n == 1:
        return np.zeros(1)
    u = np.arange(n, dtype=float) - (n - 1) / 2.0
    grad, jac = _axial_force_and_jac(u, kappa, qq)
    res = np.max(np.abs(grad))
    for _ in range(max_iter):
        if res <= tol:
            break
        step = np.linalg.solve(jac, -grad)
        e0 = _axial_energy(u, kappa, qq)
        t = 1.0
        while True:
            trial = u + t * step
            if np.all(np.diff(trial) > 0) and _axial_energy(trial, kappa, qq) <= e0 + 1e-14 * abs(e0):
                break
            t *= 0.5
            if t < 1e-12:
                raise EquilibriumError("line search failed", res)
        u = trial
        grad, jac = _axial_force_and_jac(u, kappa, qq)
        res = np.max(np.abs(grad))
    else:
        if res > tol:
            raise EquilibriumError(f"no convergence after {max_iter} iterations", res)
    if res > tol:
        raise EquilibriumError(f"no convergence after {max_iter} iterations", res)
    return u * ell


def make_chain(species: Sequence[IonSpecies] | Sequence[str], trap: ConventionalTrap) -> IonChain:
    sp = tuple(get_species(s) if isinstance(s, str) else s for s in species)
    return IonChain(sp, equilibrium_positions(sp, trap), trap)


def axial_residual(chain: IonChain) -> np.ndarray:
    """Axial force imbalance per ion in units of k q0^2 / ell^2."""
    wz = chain.conv_freqs()[:, 2]
    ell = length_scale(chain.species[0], wz[0])
    z = chain.positions
    q = chain.charges
    f = chain.masses * wz**2 * z
    for i in range(chain.n):
        for j in range(chain.n):
            if i != j:
                f[i] -= K_COULOMB * q[i] * q[j] * np.sign(z[i] - z[j]) / (z[i] - z[j]) ** 2
    return f / (K_COULOMB * q[0] ** 2 / ell**2)
