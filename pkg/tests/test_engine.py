import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehom import engine
from ehom import splitter as sp
from ehom import states as stt
from ehom.errors import DomainError, NumericValidationError

import oracles

BAL = sp.balanced()
HALF_PI = math.pi / 2


def fock_pair(n, m):
    return stt.product(stt.make_fock(n), stt.make_fock(m))


def test_hom_one_one():
    d = engine.output_distribution(BAL, fock_pair(1, 1))
    assert d.grid[1, 1] < 1e-14
    assert abs(d.grid[2, 0] - 0.5) < 1e-12
    assert abs(d.grid[0, 2] - 0.5) < 1e-12
    np.testing.assert_array_equal(engine.coincidence_profile(d), np.zeros(3))
    assert engine.cnl_metric(d).ratio == 0


def test_two_two_against_symbolic():
    d = engine.output_distribution(BAL, fock_pair(2, 2))
    for (p, q), prob in oracles.symbolic_output_probabilities(2, 2).items():
        assert abs(d.grid[p, q] - float(prob)) < 1e-12
    assert abs(d.grid[2, 2] - 0.25) < 1e-12
    assert abs(engine.coincidence_profile(d)[2] - 0.25) < 1e-12


def test_vacuum_profile():
    d = engine.output_distribution(BAL, fock_pair(0, 0))
    assert d.cutoff == 0
    np.testing.assert_array_equal(engine.coincidence_profile(d), [1.0])


def test_vacuum_coherent_is_poisson_product():
    beta = 2.5
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(0), stt.make_coherent(beta, 1e-14)))
    mu = beta**2 / 2
    for a in range(d.cutoff + 1):
        for b in range(d.cutoff + 1 - a):
            expected = oracles.poisson_pmf(a, mu) * oracles.poisson_pmf(b, mu)
            assert abs(d.grid[a, b] - expected) < 1e-13
    assert engine.cnl_metric(d).ratio > 1e-3


def test_one_photon_coherent_diagonal_vanishes():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(1), stt.make_coherent(3.0)))
    assert np.max(np.diag(d.grid)) < 1e-28
    assert engine.cnl_metric(d).ratio < 1e-12


def test_three_thermal_nodal_line():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(3), stt.make_thermal(9.0, 1e-10)))
    assert np.max(np.diag(d.grid)) < 1e-12 * d.grid.max()


@pytest.mark.parametrize("N1,N2,expected", [(1, 0, math.exp(-9) / 2), (2, 1, math.exp(-9) * 81 / 16), (3, 3, 0.0)])
def test_closed_form_values(N1, N2, expected):
    assert engine.closed_form_one_photon_coherent(N1, N2, 9.0) == pytest.approx(expected, rel=1e-14, abs=0)


def test_closed_form_errors():
    with pytest.raises(DomainError):
        engine.closed_form_one_photon_coherent(1, 0, 0.0)
    with pytest.raises(DomainError):
        engine.closed_form_one_photon_coherent(-1, 0, 1.0)


def test_closed_form_sums_to_one():
    total = sum(engine.closed_form_one_photon_coherent(a, b, 4.0) for a in range(60) for b in range(60))
    assert abs(total - 1) < 1e-12


def test_closed_form_matches_engine():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(1), stt.make_coherent(2.0, 1e-16)))
    for a in range(d.cutoff + 1):
        for b in range(d.cutoff + 1 - a):
            cf = engine.closed_form_one_photon_coherent(a, b, 4.0)
            if cf > 1e-15:
                assert abs(d.grid[a, b] - cf) <= 1e-12 * cf


def random_pure(rng, shape):
    c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return c / np.linalg.norm(c)


@pytest.mark.parametrize("seed", range(4))
def test_pure_grid_against_dense_unitary(seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, math.pi)
    c = random_pure(rng, (4, 3))
    d = engine.output_distribution(sp.from_convention("complex-symmetric", theta), stt.pure_bipartite(c))
    dim = d.cutoff + 1
    P = oracles.expm_joint_distribution(-theta, oracles.embed_pure(c, dim), dim)
    np.testing.assert_allclose(d.grid, P, atol=1e-13)


def test_density_path_against_dense_unitary():
    rho1 = stt.make_thermal(0.7, 1e-6)
    coh = stt.make_coherent(0.8 + 0.3j, 1e-8)
    d = engine.output_distribution(BAL, stt.product(rho1, coh))
    dim = d.cutoff + 1
    rho = oracles.embed_product(rho1.matrix, coh.to_density().matrix, dim)
    P = oracles.expm_joint_distribution(-HALF_PI, rho, dim)
    np.testing.assert_allclose(d.grid, P, atol=1e-13)


def test_density_and_pure_paths_agree():
    f, c = stt.make_fock(2), stt.make_coherent(1.3 - 0.4j)
    pure = engine.output_distribution(BAL, stt.product(f, c))
    mixed = engine.output_distribution(BAL, stt.product(f.to_density(), c.to_density()))
    np.testing.assert_allclose(pure.grid, mixed.grid, atol=1e-14)


def random_input(rng):
    """Fock (<= 8) x coherent (|beta| <= 3) or a random pure grid with N <= 10."""
    if rng.random() < 0.5:
        beta = rng.uniform(0, 3) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        return stt.product(stt.make_fock(int(rng.integers(0, 9))), stt.make_coherent(beta))
    n1, n2 = rng.integers(1, 6, size=2)
    return stt.pure_bipartite(random_pure(rng, (n1 + 1, n2 + 1)))


def test_normalization_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        conv = sp.CONVENTIONS[int(rng.integers(3))]
        S = sp.from_convention(conv, rng.uniform(0, math.pi))
        d = engine.output_distribution(S, random_input(rng))
        assert abs(d.total() - 1) < 1e-10
        assert d.grid.min() >= 0


def test_output_cutoff_is_input_sum():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(2), stt.make_coherent(1.0)))
    assert d.cutoff == 2 + stt.make_coherent(1.0).cutoff
    # nothing lands outside the number-conserving triangle
    M = d.cutoff
    assert all(d.grid[a, b] == 0 for a in range(M + 1) for b in range(M + 1) if a + b > M)


def odd_vector(draw_coeffs):
    c = np.zeros(2 * len(draw_coeffs), dtype=complex)
    for j, z in enumerate(draw_coeffs):
        c[2 * j + 1] = z
    return stt.FockVector(c / np.linalg.norm(c))


odd_support = st.lists(
    st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z) > 1e-3),
    min_size=1,
    max_size=4,
)


@settings(max_examples=40, deadline=None)
@given(odd_support, st.sampled_from(["coherent", "thermal", "pure"]), st.floats(0.1, 1.0), st.integers(0, 2**31))
def test_extended_hom_universality(coeffs, kind, scale, seed):
    mode1 = odd_vector(coeffs)
    assert stt.parity(mode1) == "odd"
    if kind == "coherent":
        mode2 = stt.make_coherent(3.0 * scale * np.exp(1j * seed))
    elif kind == "thermal":
        mode2 = stt.make_thermal(9.0 * scale, 1e-8)
    else:
        rng = np.random.default_rng(seed)
        mode2 = stt.FockVector(random_pure(rng, int(rng.integers(1, 11)) + 1))
    d = engine.output_distribution(BAL, stt.product(mode1, mode2))
    assert engine.cnl_metric(d).ratio < 1e-10


def test_even_counterexample():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(2), stt.make_coherent(3.0)))
    assert np.max(np.diag(d.grid)) > 1e-4
    assert not engine.cnl_metric(d).is_nodal


def phase_insensitive_input(rng):
    """Inputs with one factor diagonal in the number basis."""
    kind = int(rng.integers(4))
    beta = rng.uniform(0, 3) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    fock = stt.make_fock(int(rng.integers(0, 6)))
    if kind == 0:
        return stt.product(fock, stt.make_coherent(beta))
    if kind == 1:
        return stt.product(stt.make_coherent(beta), fock)
    if kind == 2:
        return stt.product(fock, stt.make_thermal(rng.uniform(0, 9), 1e-10))
    return stt.product(stt.FockVector(random_pure(rng, int(rng.integers(1, 8)))), stt.make_thermal(rng.uniform(0, 4), 1e-10))


def test_convention_invariance_randomized():
    rng = np.random.default_rng(11)
    for _ in range(20):
        theta = rng.uniform(0, math.pi)
        inp = phase_insensitive_input(rng)
        grids = [engine.output_distribution(sp.from_convention(c, theta), inp).grid for c in sp.CONVENTIONS]
        for g in grids[1:]:
            np.testing.assert_allclose(g, grids[0], rtol=0, atol=1e-12)


def test_conventions_differ_for_two_coherent_inputs():
    # the conventions differ by input-side phases, which a relative phase
    # between two coherent states can see
    inp = stt.product(stt.make_coherent(1.0), stt.make_coherent(1.0))
    a = engine.output_distribution(sp.balanced("complex-symmetric"), inp).grid
    b = engine.output_distribution(sp.balanced("asymmetric"), inp).grid
    assert np.max(np.abs(a - b)) > 0.1


def test_ensemble_is_linear():
    s11 = stt.pure_bipartite([[0, 0], [0, 1]])
    s13 = stt.pure_bipartite([[0, 0, 0, 0], [0, 0, 0, 1]])
    ens = engine.output_distribution(BAL, stt.ensemble([(0.5, s11), (0.5, s13)]))
    g11 = engine.output_distribution(BAL, s11).grid
    g13 = engine.output_distribution(BAL, s13).grid
    avg = 0.5 * g13
    avg[:3, :3] += 0.5 * g11
    assert np.max(np.abs(ens.grid - avg)) <= 1e-14


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.integers(0, 4), st.floats(0.2, 3.0))
def test_beta_phase_invariance(phi, n, r):
    base = engine.output_distribution(BAL, stt.product(stt.make_fock(n), stt.make_coherent(r)))
    rot = engine.output_distribution(BAL, stt.product(stt.make_fock(n), stt.make_coherent(r * np.exp(1j * phi))))
    np.testing.assert_allclose(rot.grid, base.grid, atol=1e-14)


def test_json_round_trip_is_exact():
    d = engine.output_distribution(BAL, stt.product(stt.make_fock(1), stt.make_coherent(1.7)))
    back = engine.JointDistribution.from_json(d.to_json())
    assert np.array_equal(back.grid, d.grid)
    assert back.truncation_mass == d.truncation_mass
    assert back.convention == d.convention and back.cutoff == d.cutoff


def test_csv_rows():
    d = engine.output_distribution(BAL, fock_pair(0, 0))
    assert d.to_csv() == "ma,mb,probability\n0,0,1\n"
    rows = engine.output_distribution(BAL, fock_pair(2, 2)).to_csv().splitlines()[1:]
    cells = {(int(a), int(b)): float(p) for a, b, p in (r.split(",") for r in rows)}
    assert len(cells) == 15
    assert abs(cells[2, 2] - 0.25) < 1e-12


def test_non_normalized_input_rejected():
    bad = stt.product(stt.FockVector(np.array([1.0, 1.0])), stt.make_fock(0))
    with pytest.raises(DomainError):
        engine.output_distribution(BAL, bad)


def test_clamp_rejects_real_negativity():
    with pytest.raises(NumericValidationError):
        engine._clamp(np.array([[0.5, -1e-9]]))
    grid, n = engine._clamp(np.array([[0.5, -1e-16]]))
    assert n == 1 and grid.min() == 0


def test_cnl_metric_zero_grid():
    with pytest.raises(DomainError):
        engine.cnl_metric(engine.JointDistribution(np.zeros((2, 2)), 1.0, "custom"))


def test_joint_distribution_shape_check():
    with pytest.raises(DomainError):
        engine.JointDistribution(np.zeros((2, 3)), 0.0, "custom")
    with pytest.raises(DomainError):
        engine.JointDistribution.from_dict({"grid": [[1.0]], "cutoff": 3, "truncation_mass": 0, "convention": "x"})


def test_two_coherent_inputs_stay_coherent():
    # |alpha, beta> leaves as a product of coherent states; totals reach N ~ 170
    alpha, beta = 5.0, 2.0 + 3j
    d = engine.output_distribution(BAL, stt.product(stt.make_coherent(alpha, 1e-30), stt.make_coherent(beta, 1e-30)))
    out1 = (alpha - 1j * beta) * HALF_PI_AMP
    out2 = (beta - 1j * alpha) * HALF_PI_AMP
    M = d.cutoff
    assert M > 150
    P = np.array(
        [[oracles.poisson_pmf(i, abs(out1) ** 2) * oracles.poisson_pmf(j, abs(out2) ** 2) for j in range(M + 1)] for i in range(M + 1)]
    )
    np.testing.assert_allclose(d.grid, P, rtol=0, atol=1e-14)


HALF_PI_AMP = math.sqrt(0.5)
