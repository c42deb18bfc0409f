import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontweezer.chain import (
    BA133,
    YB171,
    ConventionalTrap,
    DeconfinedIonError,
    Tweezer,
    UnstableTrapError,
    axial_residual,
    check_tweezer_validity,
    conventional_frequencies,
    equilibrium_positions,
    get_species,
    hybrid_frequency,
    length_scale,
    make_chain,
    optical_frequencies_from_physical,
    tweezer_diagonal,
)
from oracles import minimize_axial, two_ion_positions

TWO_PI = 2 * math.pi


def test_reference_species_gets_configured_frequencies(fig1_trap):
    np.testing.assert_allclose(conventional_frequencies(fig1_trap, YB171) / TWO_PI, [1.2e6, 1.0e6, 0.2e6])


def test_rf_scaling_for_lighter_species(fig1_trap):
    w = conventional_frequencies(fig1_trap, BA133)
    g = 171 / 133
    np.testing.assert_allclose(w / TWO_PI, [1.2e6 * g, 1.0e6 * g, 0.2e6 * math.sqrt(g)], rtol=1e-12)


def test_two_term_scaling_reduces_to_reference():
    trap = ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6, transverse_scaling="two-term", dc_ratio=(0.3, 0.7))
    np.testing.assert_allclose(conventional_frequencies(trap, YB171) / TWO_PI, [1.2e6, 1.0e6, 0.2e6])


def test_paul_trap_parameters():
    trap = ConventionalTrap(v_dc=10.0, v_rf=300.0, omega_rf=TWO_PI * 30e6, xi=(1e6, 1e6, 2e6), psi=(1e7, 1e7))
    w = conventional_frequencies(trap, YB171)
    q, m = YB171.charge, YB171.mass
    assert w[2] == pytest.approx(math.sqrt(q * 10 * 2e6 / m))
    assert w[0] ** 2 == pytest.approx(-q * 10 * 1e6 / m + (q * 300 * 1e7) ** 2 / (2 * m**2 * (TWO_PI * 30e6) ** 2))


def test_unstable_trap_rejected():
    trap = ConventionalTrap(v_dc=10.0, v_rf=1.0, omega_rf=TWO_PI * 30e6, xi=(1e6, 1e6, 2e6), psi=(1e7, 1e7))
    with pytest.raises(UnstableTrapError):
        conventional_frequencies(trap, YB171)


def test_trap_needs_one_parameter_set():
    with pytest.raises(ValueError):
        ConventionalTrap()
    with pytest.raises(ValueError):
        ConventionalTrap(freqs=(1.0, 1.0, 1.0))


def test_unknown_species():
    with pytest.raises(KeyError):
        get_species("Ca40")


def test_hybrid_frequency():
    assert hybrid_frequency(3.0, 4.0) == pytest.approx(5.0)
    assert hybrid_frequency(5.0, 4.0, -1) == pytest.approx(3.0)
    with pytest.raises(DeconfinedIonError):
        hybrid_frequency(3.0, 4.0, -1)


def test_strong_anti_trapping_warns():
    with pytest.warns(UserWarning, match="anti-trapping"):
        check_tweezer_validity(np.array([1.0, 1.0]), np.array([0.0, -0.36]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_tweezer_validity(np.array([1.0, 1.0]), np.array([0.0, -0.2]))


def test_tweezer_diagonal_sums_per_ion():
    tws = [Tweezer(1, (0.0, 2.0, 0.0)), Tweezer(1, (0.0, 1.0, 0.0), (1, -1, 1))]
    np.testing.assert_allclose(tweezer_diagonal(tws, 3, "y"), [0.0, 3.0, 0.0])
    with pytest.raises(IndexError):
        tweezer_diagonal([Tweezer(4)], 3, "y")


def test_tweezer_rejects_bad_sign():
    with pytest.raises(ValueError):
        Tweezer(0, sign=(1, 0, 1))


def test_physical_tweezer_strengths():
    wx, wy, s = optical_frequencies_from_physical(1e-3, 1e-6, 532e-9, YB171.mass, 1e-36)
    i0 = 2e-3 / (math.pi * 1e-12)
    assert wy == pytest.approx(math.sqrt(1e-36 * i0 / (1e-12 * YB171.mass)))
    assert wx / wy == pytest.approx(532e-9 / (math.sqrt(2) * math.pi * 1e-6))
    assert s == 1
    assert optical_frequencies_from_physical(1e-3, 1e-6, 532e-9, YB171.mass, -1e-36)[2] == -1


def test_single_ion_sits_at_origin(fig1_trap):
    np.testing.assert_array_equal(equilibrium_positions([YB171], fig1_trap), [0.0])


@pytest.mark.parametrize("pair", [(YB171, YB171), (YB171, BA133), (BA133, YB171)])
def test_two_ion_equilibrium_against_bisection(fig1_trap, pair):
    w = [conventional_frequencies(fig1_trap, s)[2] for s in pair]
    ref = two_ion_positions(pair[0].mass, w[0], pair[1].mass, w[1], pair[0].charge, pair[1].charge)
    z = equilibrium_positions(pair, fig1_trap)
    ell = length_scale(YB171, w[0])
    np.testing.assert_allclose(z / ell, ref / ell, atol=1e-10)


def test_two_ion_homogeneous_spacing(fig1_trap):
    z = equilibrium_positions([YB171, YB171], fig1_trap)
    ell = length_scale(YB171, TWO_PI * 0.2e6)
    assert z[1] - z[0] == pytest.approx(2 ** (1 / 3) * ell, rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 9, 15])
def test_equilibrium_against_minimiser(fig1_trap, n):
    species = [YB171 if i % 3 else BA133 for i in range(n)]
    wz = np.array([conventional_frequencies(fig1_trap, s)[2] for s in species])
    masses = np.array([s.mass for s in species])
    charges = np.array([s.charge for s in species])
    start = np.linspace(-1.0, 1.0, n) * n**0.6
    ref = minimize_axial(masses, charges, wz, start)
    z = equilibrium_positions(species, fig1_trap)
    ell = length_scale(species[0], wz[0])
    np.testing.assert_allclose(z / ell, ref / ell, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["Yb171", "Ba133"]), min_size=2, max_size=12))
def test_equilibrium_force_balance_and_ordering(species):
    chain = make_chain(species, ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6))
    assert np.all(np.diff(chain.positions) > 0)
    assert np.max(np.abs(axial_residual(chain))) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 10))
def test_homogeneous_chain_is_symmetric(n):
    chain = make_chain(["Yb171"] * n, ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6))
    ell = length_scale(YB171, TWO_PI * 0.2e6)
    np.testing.assert_allclose(chain.positions / ell, -chain.positions[::-1] / ell, atol=1e-10)
