"""AC Stark shifts, polarizability factors and scattering rates of tweezer light.

The atomic model is a sum of ground -> excited two-level systems, each split
into hyperfine components weighted by dipole branching ratios.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .chain import optical_frequencies_from_physical
from .constants import AMU, C, H, HBAR
from .wigner import half_int, wigner_3j_sq, wigner_6j_sq

DEFAULT_POLARIZATION = {0: 1.0}  # linear (pi) light


class NearResonantError(ValueError):
    pass


class AntiTrappingError(ValueError):
    pass


def air_to_vacuum(wavelength_nm: float) -> float:
    """Vacuum wavelength from a standard-air wavelength (Edlen 1966 dispersion)."""
    s2 = (1e3 / wavelength_nm) ** 2
    n = 1 + 1e-8 * (8342.54 + 2406147 / (130 - s2) + 15998 / (38.9 - s2))
    return wavelength_nm * n


def hyperfine_levels(j: Fraction, i: Fraction, splitting: float) -> dict[Fraction, float]:
    """Magnetic-dipole hyperfine offsets (same units as ``splitting``) from the fine-structure centroid.

    ``splitting`` is E(F_max) - E(F_min).
    """
    fs = [abs(j - i) + k for k in range(int(j + i - abs(j - i)) + 1)]
    kf = {f: f * (f + 1) - i * (i + 1) - j * (j + 1) for f in fs}
    if len(fs) == 1:
        return {fs[0]: 0.0}
    a = splitting / float(kf[fs[-1]] - kf[fs[0]])
    return {f: a * float(k) for f, k in kf.items()}


@dataclass(frozen=True)
class AtomicLevel:
    label: str
    omega: float  # transition angular frequency from the ground-state centroid, rad/s
    gamma: float  # Einstein A coefficient to the ground state, 1/s
    j: Fraction
    hfs: float = 0.0  # rad/s

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"{self.label}: linewidth must be positive")
        if not self.omega > 0:
            raise ValueError(f"{self.label}: transition frequency must be positive")

    @property
    def wavelength(self) -> float:
        return 2 * math.pi * C / self.omega


@dataclass(frozen=True)
class AtomicSpecies:
    name: str
    mass: float
    nuclear_spin: Fraction
    ground_j: Fraction
    ground_hfs: float  # rad/s
    levels: tuple[AtomicLevel, ...] = field(repr=False)

    def ground_f_values(self) -> list[Fraction]:
        return sorted(hyperfine_levels(self.ground_j, self.nuclear_spin, self.ground_hfs))

    def without(self, label: str) -> "AtomicSpecies":
        return AtomicSpecies(self.name, self.mass, self.nuclear_spin, self.ground_j, self.ground_hfs,
                             tuple(l for l in self.levels if l.label != label))


def load_species(path: str | Path | None = None) -> AtomicSpecies:
    """Read an atomic data file (JSON); defaults to the bundled Yb171 data."""
    if path is None:
        text = resources.files("iontweezer").joinpath("data/yb171.json").read_text()
    else:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"atomic data file not found: {p}")
        text = p.read_text()
    raw = json.loads(text)
    if raw.get("schema") != 1:
        raise ValueError(f"unsupported atomic data schema {raw.get('schema')!r}")
    spin = half_int(Fraction(raw["nuclear_spin"]))
    by_label = {}
    levels = []
    for lv in raw["levels"]:
        lam = lv["wavelength_nm"]
        if lv.get("medium", "vacuum") == "air":
            lam = air_to_vacuum(lam)
        omega = 2 * math.pi * C / (lam * 1e-9)
        by_label[lv["label"]] = (lv, omega)
    for lv in raw["levels"]:
        _, omega = by_label[lv["label"]]
        j = half_int(Fraction(lv["J"]))
        gamma = lv.get("gamma_per_s")
        if gamma is None:
            src, src_omega = by_label[lv["gamma_derived_from"]]
            src_j = Fraction(src["J"])
            # equal reduced matrix element: A scales as omega^3 / (2J' + 1)
            gamma = src["gamma_per_s"] * (omega / src_omega) ** 3 * float(2 * src_j + 1) / float(2 * j + 1)
        levels.append(AtomicLevel(lv["label"], omega, float(gamma), j, 2 * math.pi * lv.get("hfs_splitting_Hz", 0.0)))
    g = raw["ground"]
    return AtomicSpecies(
        name=raw["species"],
        mass=raw["mass_amu"] * AMU,
        nuclear_spin=spin,
        ground_j=half_int(Fraction(g["J"])),
        ground_hfs=2 * math.pi * g.get("hfs_splitting_Hz", 0.0),
        levels=tuple(levels),
    )


def hyperfine_branching_exact(j, f, m_f, j_h, f_h, m_f_h, q, i) -> Fraction:
    j, f, m_f, j_h, f_h, m_f_h, i = map(half_int, (j, f, m_f, j_h, f_h, m_f_h, i))
    if q not in (-1, 0, 1):
        raise ValueError(f"polarization index q must be -1, 0 or +1, got {q}")
    for a, b in ((f, m_f), (f_h, m_f_h)):
        if abs(b) > a or (a - b).denominator != 1:
            raise ValueError(f"invalid projection {b} for F={a}")
    return (2 * f_h + 1) * (2 * f + 1) * (2 * j_h + 1) * wigner_6j_sq(j_h, j, 1, f, f_h, i) * wigner_3j_sq(
        f, 1, f_h, m_f, q, -m_f_h
    )


def hyperfine_branching(j, f, m_f, j_h, f_h, m_f_h, q, i) -> float:
    """Relative strength Gamma_h / Gamma_s of one hyperfine component of a fine-structure line."""
    return float(hyperfine_branching_exact(j, f, m_f, j_h, f_h, m_f_h, q, i))


def _components(species: AtomicSpecies, state, polarization: Mapping[int, float]):
    """Yield (level, omega_h, weight) for every dipole-allowed hyperfine component from ``state``."""
    f, m_f = map(half_int, state)
    g_off = hyperfine_levels(species.ground_j, species.nuclear_spin, species.ground_hfs)
    if f not in g_off:
        raise ValueError(f"ground state has no F={f}")
    for lv in species.levels:
        e_off = hyperfine_levels(lv.j, species.nuclear_spin, lv.hfs)
        for f_h, off in e_off.items():
            w_h = lv.omega + off - g_off[f]
            weight = 0.0
            for q, pw in polarization.items():
                m_h = m_f + q
                if abs(m_h) > f_h:
                    continue
                weight += pw * hyperfine_branching(species.ground_j, f, m_f, lv.j, f_h, m_h, q, species.nuclear_spin)
            if weight:
                yield lv, w_h, weight


def _default_state(species):
    return (species.ground_f_values()[0], 0)


def _check_detuning(lv: AtomicLevel, omega_l: float, omega_h: float, factor: float = 10.0):
    if abs(omega_h - omega_l) < factor * lv.gamma:
        raise NearResonantError(
            f"laser within {factor} linewidths of {lv.label} ({lv.wavelength * 1e9:.3f} nm); chi invalid"
        )


def chi(
    species: AtomicSpecies,
    wavelength: float,
    state=None,
    polarization: Mapping[int, float] = DEFAULT_POLARIZATION,
    mode: str = "hyperfine",
) -> float:
    """Polarizability factor chi (phi_opt = -chi I / 4) at ``wavelength`` (m).

    ``mode``: ``"hyperfine"`` resolves hyperfine components with dipole
    branching ratios; ``"fine"`` sums whole fine-structure lines with unit
    weight; ``"rwa"`` keeps only the nearest line, co-rotating term only.
    """
    wl = 2 * math.pi * C / wavelength
    if mode == "rwa":
        lv = min(species.levels, key=lambda l: abs(l.omega - wl))
        _check_detuning(lv, wl, lv.omega)
        return 6 * math.pi * C**2 * lv.gamma / (lv.omega**3 * (lv.omega - wl))
    if mode == "fine":
        tot = 0.0
        for lv in species.levels:
            _check_detuning(lv, wl, lv.omega)
            tot += 6 * math.pi * C**2 / lv.omega**3 * (lv.gamma / (lv.omega - wl) + lv.gamma / (lv.omega + wl))
        return tot
    if mode != "hyperfine":
        raise ValueError(f"unknown chi mode {mode!r}")
    state = state or _default_state(species)
    tot = 0.0
    for lv, wh, weight in _components(species, state, polarization):
        _check_detuning(lv, wl, wh)
        tot += weight * 6 * math.pi * C**2 / wh**3 * (lv.gamma / (wh - wl) + lv.gamma / (wh + wl))
    return tot


def peak_intensity(power: float, waist: float) -> float:
    return 2 * power / (math.pi * waist**2)


def stark_shift(
    species: AtomicSpecies,
    intensity: float,
    wavelength: float,
    state=None,
    polarization: Mapping[int, float] = DEFAULT_POLARIZATION,
    mode: str = "far",
) -> float:
    """Light shift (J) of a ground hyperfine state at the given intensity (W/m^2).

    ``mode="far"`` uses the two-term far-detuned form; ``"near"`` the
    rotating-wave two-level form with saturation, for validation close to a line.
    """
    if intensity == 0:
        return 0.0
    wl = 2 * math.pi * C / wavelength
    state = state or _default_state(species)
    tot = 0.0
    for lv, wh, weight in _components(species, state, polarization):
        _check_detuning(lv, wl, wh)
        if mode == "far":
            tot -= weight * 3 * math.pi * C**2 / (2 * wh**3) * (lv.gamma / (wh - wl) + lv.gamma / (wh + wl)) * intensity
        elif mode == "near":
            rabi2 = weight * lv.gamma * 6 * math.pi * C**2 / (HBAR * wh**3) * intensity
            delta = wl - wh
            tot += HBAR / 2 * delta * (math.sqrt(1 + rabi2 / delta**2) - 1)
        else:
            raise ValueError(f"unknown Stark-shift mode {mode!r}")
    return tot


def scattering_rate(
    species: AtomicSpecies,
    intensity: float,
    wavelength: float,
    state=None,
    polarization: Mapping[int, float] = DEFAULT_POLARIZATION,
    mode: str = "far",
) -> float:
    """Off-resonant photon scattering rate (1/s), summed over all excited hyperfine components."""
    if intensity == 0:
        return 0.0
    wl = 2 * math.pi * C / wavelength
    state = state or _default_state(species)
    tot = 0.0
    for lv, wh, weight in _components(species, state, polarization):
        _check_detuning(lv, wl, wh)
        if mode == "far":
            term = lv.gamma / (wh - wl) + lv.gamma / (wh + wl)
            tot += weight * 3 * math.pi * C**2 / (2 * HBAR * wh**3) * (wl / wh) ** 3 * term**2 * intensity
        elif mode == "near":
            rabi2 = weight * lv.gamma * 6 * math.pi * C**2 / (HBAR * wh**3) * intensity
            delta = wl - wh
            tot += rabi2 * lv.gamma / (lv.gamma**2 + 2 * rabi2 + 4 * delta**2)
        else:
            raise ValueError(f"unknown scattering mode {mode!r}")
    return tot


def trap_frequencies(species: AtomicSpecies, power: float, waist: float, wavelength: float, state=None,
                     polarization: Mapping[int, float] = DEFAULT_POLARIZATION):
    """(omega_x, omega_yz, sign) of a tweezer of the given power, waist and wavelength."""
    ch = chi(species, wavelength, state, polarization)
    return optical_frequencies_from_physical(power, waist, wavelength, species.mass, ch)


def required_power(species: AtomicSpecies, omega_target: float, waist: float, wavelength: float, state=None,
                   polarization: Mapping[int, float] = DEFAULT_POLARIZATION) -> float:
    """Beam power (W) giving transverse tweezer frequency ``omega_target`` (rad/s)."""
    if omega_target == 0:
        return 0.0
    ch = chi(species, wavelength, state, polarization)
    if ch <= 0:
        wl = 2 * math.pi * C / wavelength
        near = min(species.levels, key=lambda l: abs(l.omega - wl))
        raise AntiTrappingError(
            f"light at {wavelength * 1e9:.1f} nm is anti-trapping (chi < 0); tune to the red of "
            f"{near.label} at {near.wavelength * 1e9:.2f} nm"
        )
    i0 = waist**2 * species.mass * omega_target**2 / ch
    return math.pi * waist**2 * i0 / 2


def qubit_states(species: AtomicSpecies):
    fs = species.ground_f_values()
    return (fs[0], 0), (fs[-1], 0)


def tweezer_report(
    species: AtomicSpecies,
    wavelength: float,
    waist: float,
    power: float | None = None,
    omega_target: float | None = None,
    states=None,
    polarization: Mapping[int, float] = DEFAULT_POLARIZATION,
) -> dict:
    """Table-style summary of a tweezer: power, shifts, trap frequencies and scattering.

    Exactly one of ``power`` (W) or ``omega_target`` (rad/s) must be given.
    Differential quantities are (second state) - (first state).
    """
    if (power is None) == (omega_target is None):
        raise ValueError("give exactly one of power or target frequency")
    s0, s1 = states or qubit_states(species)
    if power is None:
        power = required_power(species, omega_target, waist, wavelength, s0, polarization)
    i0 = peak_intensity(power, waist)
    wx, wy, sign = trap_frequencies(species, power, waist, wavelength, s0, polarization)
    _, wy1, sign1 = trap_frequencies(species, power, waist, wavelength, s1, polarization)
    u0 = stark_shift(species, i0, wavelength, s0, polarization)
    u1 = stark_shift(species, i0, wavelength, s1, polarization)
    return {
        "wavelength_nm": wavelength * 1e9,
        "waist_um": waist * 1e6,
        "power_W": power,
        "stark_shift_MHz_h": u0 / H / 1e6,
        "differential_stark_shift_kHz_h": (u1 - u0) / H / 1e3,
        "trap_frequency_x_MHz": wx / (2 * math.pi) / 1e6,
        "trap_frequency_MHz": wy / (2 * math.pi) / 1e6,
        "trap_sign": sign,
        "differential_trap_frequency_kHz": (sign1 * wy1 - sign * wy) / (2 * math.pi) / 1e3,
        "scattering_rate_per_s": scattering_rate(species, i0, wavelength, s0, polarization),
    }
