import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontweezer.chain import ConventionalTrap, make_chain, tweezers_from_arrays
from iontweezer.ida import (
    IdaConfig,
    de_step,
    detect_fixed_point,
    extract_tweezer_params,
    forward_spectrum,
    generate_solvable_target,
    ida,
    idade,
    random_orthogonal,
    spectrum_error,
)
from iontweezer.modes import build_a_matrix, diagonalize

TWO_PI = 2 * math.pi
EPS = TWO_PI * 10.0
TRAP = ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6)


@pytest.fixture(scope="module")
def chain5():
    return make_chain(["Yb171"] * 5, TRAP)


@pytest.fixture(scope="module")
def chain10():
    return make_chain(["Yb171"] * 10, TRAP)


def test_config_validation():
    with pytest.raises(ValueError):
        IdaConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        IdaConfig(tolerance=1.0, eta=1.5)
    with pytest.raises(ValueError):
        IdaConfig(tolerance=1.0, population=3)


def test_ida_exact_start_is_fixed_point(chain5):
    a = build_a_matrix(chain5, "y").matrix
    conv = diagonalize(a)
    res = ida(conv.freqs, conv.vectors, a, EPS)
    assert res.converged and res.iterations == 1
    omega, sign = extract_tweezer_params(res.a_tilde, a)
    # sqrt of round-off in entries ~omega_y^2
    assert np.all(omega < 1e-6 * TWO_PI * 1e6)


def test_ida_keeps_off_diagonals(chain5, rng):
    a = build_a_matrix(chain5, "z").matrix
    w_tar, *_ = generate_solvable_target(chain5, "z", rng, TWO_PI * 0.2e6)
    res = ida(w_tar, random_orthogonal(5, rng), a, EPS, k_max=7)
    off = ~np.eye(5, dtype=bool)
    np.testing.assert_array_equal(res.a_tilde[off], a[off])


def test_extract_params_examples(chain5):
    a = build_a_matrix(chain5, "y").matrix
    omega, sign = extract_tweezer_params(a, a)
    np.testing.assert_array_equal(omega, 0.0)
    np.testing.assert_array_equal(sign, 1)
    b = a.copy()
    b[1, 1] += TWO_PI**2 * 1e12
    omega, sign = extract_tweezer_params(b, a)
    assert omega[1] / TWO_PI == pytest.approx(1e6, rel=1e-12)
    assert sign[1] == 1


def test_extract_params_round_trip(chain5, rng):
    omega = rng.uniform(0.1, 0.5, 5) * TWO_PI * 1e6
    sign = rng.choice([-1, 1], 5)
    a0 = build_a_matrix(chain5, "y").matrix
    a1 = build_a_matrix(chain5, "y", tweezers_from_arrays(omega, sign, "y")).matrix
    w, s = extract_tweezer_params(a1, a0)
    np.testing.assert_allclose(w, omega, rtol=1e-9)
    np.testing.assert_array_equal(s, sign)


def test_fixed_point_detector():
    assert detect_fixed_point(np.eye(4)) == (False, 1.0)
    c = math.cos(math.pi / 4)
    flag, r = detect_fixed_point(np.array([[c, -c], [c, c]]))
    assert flag and r < 1e-15
    flag, r = detect_fixed_point(random_orthogonal(5, np.random.default_rng(0)))
    assert not flag and r > 1e-10


def test_random_orthogonal_is_orthogonal(rng):
    q = random_orthogonal(7, rng)
    np.testing.assert_allclose(q.T @ q, np.eye(7), atol=1e-12)


def _population(chain, rng, p=8):
    a = build_a_matrix(chain, "y").matrix
    w_tar, *_ = generate_solvable_target(chain, "y", rng, TWO_PI * 1e6)
    pop = np.broadcast_to(a, (p, chain.n, chain.n)).copy()
    pop[:, np.arange(chain.n), np.arange(chain.n)] += rng.normal(0, 1e12, (p, chain.n))
    return a, w_tar, pop


@pytest.mark.parametrize("zeta,kappa,eta", [(0.0, 0.0, 0.5), (0.9, 0.5, 0.0)])
def test_de_step_degenerate_parameters_leave_population(chain5, rng, zeta, kappa, eta):
    a, w_tar, pop = _population(chain5, rng)
    out, _, _ = de_step(pop, w_tar, a, zeta, kappa, eta, rng)
    np.testing.assert_array_equal(out, pop)


def test_de_step_greedy_and_deterministic(chain5):
    a, w_tar, pop = _population(chain5, np.random.default_rng(5))
    before = spectrum_error(np.sort(np.sqrt(np.abs(np.linalg.eigvalsh(pop))), axis=1)[:, ::-1], w_tar)
    out1, err1, _ = de_step(pop, w_tar, a, 0.9, 0.5, 0.5, np.random.default_rng(9))
    out2, err2, _ = de_step(pop, w_tar, a, 0.9, 0.5, 0.5, np.random.default_rng(9))
    np.testing.assert_array_equal(out1, out2)
    assert np.all(err1 <= before + 1e-9)
    assert err1.min() <= before.min()


def test_idade_conventional_target_converges(chain5):
    a = build_a_matrix(chain5, "y").matrix
    w = diagonalize(a).freqs
    for seed in range(3):
        sol = idade(w, a, IdaConfig(EPS, seed=seed), chain5, "y")
        assert sol.converged
        assert spectrum_error(forward_spectrum(a, sol.omega, sol.sign, chain5, "y"), w) <= EPS


def test_idade_rejects_wrong_length(chain5):
    a = build_a_matrix(chain5, "y").matrix
    with pytest.raises(ValueError):
        idade(np.ones(4), a, IdaConfig(EPS))


def test_idade_deterministic_and_monotone(chain10):
    """A deliberately under-resourced run so that several DE steps are taken."""
    rng = np.random.default_rng(1)
    a = build_a_matrix(chain10, "y").matrix
    w_tar, *_ = generate_solvable_target(chain10, "y", rng, TWO_PI * 1e6)
    cfg = IdaConfig(EPS, max_iter=5, population=20, seed=3, max_rounds=20)
    h1, h2 = [], []
    s1 = idade(w_tar, a, cfg, chain10, "y", h1)
    s2 = idade(w_tar, a, cfg, chain10, "y", h2)
    assert h1 == h2
    np.testing.assert_array_equal(s1.omega, s2.omega)
    assert s1.rounds >= 3
    de_pairs = list(zip(h1[0::2], h1[1::2]))
    assert all(after <= before for before, after in de_pairs)
    if s1.converged:
        assert s1.error <= EPS


def test_generate_target_zero_strength_is_conventional(chain5, rng):
    w, omega, _ = generate_solvable_target(chain5, "y", rng, 0.0)
    np.testing.assert_allclose(w, diagonalize(build_a_matrix(chain5, "y")).freqs)
    np.testing.assert_array_equal(omega, 0.0)


def test_generate_target_hidden_params_reproduce_it(chain5, rng):
    w, omega, sign = generate_solvable_target(chain5, "y", rng, TWO_PI * 1e6)
    w_fwd = diagonalize(build_a_matrix(chain5, "y", tweezers_from_arrays(omega, sign, "y"))).freqs
    np.testing.assert_allclose(w_fwd, w, rtol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from("yz"))
def test_idade_soundness(seed, axis):
    chain = make_chain(["Yb171"] * 5, TRAP)
    rng = np.random.default_rng(seed)
    a = build_a_matrix(chain, axis).matrix
    cap = chain.conv_freqs()[:, "xyz".index(axis)].min()
    w_tar, *_ = generate_solvable_target(chain, axis, rng, cap)
    sol = idade(w_tar, a, IdaConfig(EPS, seed=seed, max_rounds=5), chain, axis)
    if sol.converged:
        w_indep = diagonalize(build_a_matrix(chain, axis, tweezers_from_arrays(sol.omega, sol.sign, axis))).freqs
        assert spectrum_error(w_indep, w_tar) <= EPS
