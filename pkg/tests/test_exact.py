import math

import numpy as np
import pytest

from fkslab import exact, sampler
from fkslab.exact import (EnumerationBudgetError, decode_bonds, decode_spins,
                          enumerate_fk, enumerate_gibbs, exact_e_probabilities,
                          exact_c_y_plus_probability, fk_census,
                          fk_span_probability, gap_bound_exponent,
                          low_temp_predictions, onsager_magnetization,
                          onsager_magnetization_x, probability,
                          spin_expectation, theorem_gap_bound,
                          verify_coupling_identities, verify_eq4_conditionals,
                          verify_impl_npiani, verify_rotation_invariance)
from fkslab.lattice import build_cubic_box, build_slab, build_slab_region
from fkslab.sampler import ModelParams

BETA_CRIT = 0.5 * math.log(1.0 + math.sqrt(2.0))


def test_onsager_magnetization_values():
    assert onsager_magnetization(BETA_CRIT) == 0.0
    assert onsager_magnetization(0.3) == 0.0
    assert onsager_magnetization(0.0) == 0.0
    # frozen from a 30-digit evaluation of {1 - sinh(2b)^-4}^(1/8)
    assert onsager_magnetization(0.5) == pytest.approx(0.911319377877496, abs=1e-12)
    assert onsager_magnetization(1.0) == pytest.approx(0.999275751957061, abs=1e-12)
    assert onsager_magnetization(8.0) == pytest.approx(1.0, abs=1e-10)
    assert onsager_magnetization(BETA_CRIT + 1e-9) > 0.0
    with pytest.raises(ValueError):
        onsager_magnetization(-0.5)


def test_onsager_x_form_agrees():
    assert onsager_magnetization_x(math.exp(-1.0)) == pytest.approx(
        0.911319377877496, abs=1e-12)
    assert onsager_magnetization_x(1e-6) == pytest.approx(1.0, abs=1e-10)
    assert onsager_magnetization_x(math.sqrt(2.0) - 1.0) == 0.0
    for beta in np.linspace(0.05, 2.0, 40):
        assert abs(onsager_magnetization_x(math.exp(-2.0 * beta))
                   - onsager_magnetization(beta)) <= 1e-12
    with pytest.raises(ValueError):
        onsager_magnetization_x(0.0)
    with pytest.raises(ValueError):
        onsager_magnetization_x(1.0)


def test_low_temp_predictions():
    pred = low_temp_predictions(0.1, degree=4)
    assert pred.one_minus_m == pytest.approx(2e-4, rel=1e-12)
    assert pred.one_minus_r == pytest.approx(1e-4, rel=1e-12)
    tiny = low_temp_predictions(1e-4, degree=4)
    assert tiny.one_minus_m < 1e-12
    assert low_temp_predictions(0.2, degree=5).one_minus_r == pytest.approx(0.2 ** 5)
    with pytest.raises(ValueError):
        low_temp_predictions(0.0)
    with pytest.raises(ValueError):
        low_temp_predictions(1.5)


def test_theorem_gap_bound():
    assert theorem_gap_bound(2, 0.5, 0.0) == 0.0
    assert gap_bound_exponent(2) == 32
    assert gap_bound_exponent(3) == 156
    p = 1.0 - math.exp(-1.0)
    # frozen from a 30-digit evaluation
    assert theorem_gap_bound(2, p, 1.0) == pytest.approx(1.71340115628e-13, rel=1e-9)
    assert theorem_gap_bound(2, p, 0.911319377877496) == pytest.approx(
        1.561455675796e-13, rel=1e-9)
    with pytest.raises(ValueError):
        theorem_gap_bound(1, 0.5, 0.5)
    with pytest.raises(ValueError):
        theorem_gap_bound(2, 1.0, 0.5)


def test_enumerate_gibbs_single_spin():
    # one free spin with 4 plus neighbors: two-state ratio at beta = 0.25
    g = build_cubic_box(2, 1)
    dist = enumerate_gibbs(g, ModelParams(beta=0.25))
    assert dist.weights.sum() == pytest.approx(1.0, abs=1e-12)
    p_plus = probability(dist, lambda row: row[g.origin] == 1)
    assert p_plus == pytest.approx(0.8807970779778823, abs=1e-12)
    assert spin_expectation(dist, g.origin) == pytest.approx(
        2 * 0.8807970779778823 - 1, abs=1e-12)


def test_enumerate_gibbs_free_boundary_symmetric():
    g = build_cubic_box(2, 1)
    dist = enumerate_gibbs(g, ModelParams(beta=0.7, boundary="free"))
    assert spin_expectation(dist, g.origin) == pytest.approx(0.0, abs=1e-12)
    assert dist.n_free == g.n_vertices


def test_enumerate_gibbs_monotone_in_beta():
    g = build_cubic_box(2, 2)
    probs = []
    for beta in (0.1, 0.5, 1.0):
        dist = enumerate_gibbs(g, ModelParams(beta=beta))
        probs.append(probability(dist, lambda row: row[g.origin] == 1))
    assert probs[0] < probs[1] < probs[2]


def test_enumerate_gibbs_budget():
    with pytest.raises(EnumerationBudgetError, match="spins"):
        enumerate_gibbs(build_cubic_box(2, 5), ModelParams(beta=0.5))


def test_plus_dominates_free_at_origin():
    for g in (build_cubic_box(2, 1), build_cubic_box(2, 2)):
        params = ModelParams(beta=0.45)
        plus = enumerate_gibbs(g, params, boundary="plus")
        free = enumerate_gibbs(g, params, boundary="free")
        p_plus = probability(plus, lambda row: row[g.origin] == 1)
        p_free = probability(free, lambda row: row[g.origin] == 1)
        assert p_plus >= p_free


def test_decode_spins_roundtrip():
    g = build_cubic_box(2, 1)
    dist = enumerate_gibbs(g, ModelParams(beta=0.4))
    spins = decode_spins(dist)
    assert spins.shape == (2, g.n_vertices)
    assert np.all(spins[:, g.boundary] == 1)
    assert spins[0, g.origin] == -1 and spins[1, g.origin] == 1


def test_enumerate_fk_extremes():
    g = build_cubic_box(2, 1)
    d0 = enumerate_fk(g, ModelParams(beta=0.0))
    assert d0.weights[0] == pytest.approx(1.0, abs=1e-12)
    d1 = enumerate_fk(g, ModelParams(beta=12.0))
    assert d1.weights[-1] == pytest.approx(1.0, abs=1e-8)
    assert d1.weights.sum() == pytest.approx(1.0, abs=1e-12)
    bonds = decode_bonds(d0, [0])
    shell = g.boundary_mask[g.edges_u] & g.boundary_mask[g.edges_v]
    assert np.all(bonds[0, shell] == 1)
    assert np.all(bonds[0, ~shell] == 0)


def test_enumerate_fk_budget():
    g = build_cubic_box(2, 3)  # 24 free edges: census fine, materialize not
    with pytest.raises(EnumerationBudgetError, match="materialized"):
        enumerate_fk(g, ModelParams(beta=0.5))
    with pytest.raises(EnumerationBudgetError):
        fk_census(build_cubic_box(2, 4))
    with pytest.raises(ValueError, match="boundary"):
        fk_census(build_cubic_box(2, 3, include_boundary_shell=False))


def test_eq4_conditionals_small_graphs():
    for g, beta in ((build_cubic_box(2, 1), 0.5),
                    (build_cubic_box(2, 2), 0.35),
                    (build_slab(2, 1), 0.6)):
        report = verify_eq4_conditionals(g, ModelParams(beta=beta))
        assert report.passed, (beta, report.max_deviation)
        assert report.n_checked > 0


def test_coupling_identity_tiny_graphs():
    # square box: the 1-free-spin identity reduces to tanh(4 beta)
    g = build_cubic_box(2, 1)
    for beta in (0.3, 0.6, 1.0):
        rep = verify_coupling_identities(g, ModelParams(beta=beta))
        assert rep.passed
        assert rep.magnetization_exact == pytest.approx(math.tanh(4 * beta), abs=1e-12)
    # path graph: needs genuine wiring of the two endpoints
    g1 = build_cubic_box(1, 1)
    rep = verify_coupling_identities(g1, ModelParams(beta=0.8))
    assert rep.passed
    assert rep.magnetization_exact == pytest.approx(math.tanh(2 * 0.8), abs=1e-12)
    # anisotropic couplings on a slab column box
    gs = build_slab(2, 1)
    rep = verify_coupling_identities(
        gs, ModelParams(beta=0.5, j_horizontal=1.0, j_vertical=0.6))
    assert rep.passed


def test_coupling_identity_beta_zero():
    g = build_cubic_box(2, 1)
    rep = verify_coupling_identities(g, ModelParams(beta=0.0))
    assert rep.passed
    assert rep.magnetization_exact == pytest.approx(0.0, abs=1e-12)
    assert rep.fk_span_exact == pytest.approx(0.0, abs=1e-12)


def test_fk_span_probability_matches_materialized():
    g = build_cubic_box(2, 2)
    for beta in (0.2, 0.7):
        params = ModelParams(beta=beta)
        dist = enumerate_fk(g, params)
        direct = exact.fk_span_probability_from_distribution(dist)
        census = fk_span_probability(g, params)
        assert census == pytest.approx(direct, abs=1e-12)


def test_impl_npiani_two_slabs():
    g = build_slab(2, 3)
    # beta = 0: the two boundary conditions coincide
    rep0 = verify_impl_npiani(g, [g.origin_column], ModelParams(beta=0.0))
    assert rep0.passed
    assert rep0.mu_plus == pytest.approx(rep0.mu_minus, abs=1e-12)
    rep = verify_impl_npiani(g, [g.origin_column], ModelParams(beta=0.7))
    assert rep.passed
    assert rep.mu_minus > rep.mu_plus


def test_impl_npiani_three_slab_periodic_region():
    shape = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
    g = build_slab_region(3, shape, periodic_vertical=True)
    rep = verify_impl_npiani(g, [g.origin_column], ModelParams(beta=0.7))
    assert rep.passed
    assert rep.mu_minus > rep.mu_plus


def test_exact_e_and_cy_probabilities_flip():
    g = build_slab(2, 1)
    plus = enumerate_gibbs(g, ModelParams(beta=0.5), boundary="plus")
    minus = enumerate_gibbs(g, ModelParams(beta=0.5), boundary="minus")
    ep_p, em_p = exact_e_probabilities(plus)
    ep_m, em_m = exact_e_probabilities(minus)
    assert ep_p == pytest.approx(em_m, abs=1e-12)  # global spin flip
    assert em_p == pytest.approx(ep_m, abs=1e-12)
    assert ep_p > em_p


def test_rotation_invariance_reports():
    params = ModelParams(beta=0.7)
    periodic = build_slab(3, 2, periodic_vertical=True)
    rep = verify_rotation_invariance(periodic, params)
    assert rep.rotation_invariant and rep.reflection_invariant
    assert rep.max_dev_rotation <= 1e-12

    plain = build_slab(3, 2)
    rep = verify_rotation_invariance(plain, params)
    assert not rep.rotation_invariant
    assert rep.reflection_invariant


def test_rotation_invariance_beta_zero_trivial():
    g = build_slab(3, 1, periodic_vertical=True)
    rep = verify_rotation_invariance(g, ModelParams(beta=0.0))
    assert rep.rotation_invariant


def test_distribution_normalization_properties():
    rng = np.random.default_rng(1)
    for _ in range(5):
        beta = float(rng.uniform(0, 1.5))
        g = build_cubic_box(2, 2)
        ds = enumerate_gibbs(g, ModelParams(beta=beta))
        db = enumerate_fk(g, ModelParams(beta=beta))
        for d in (ds, db):
            assert abs(d.weights.sum() - 1.0) <= 1e-12
            assert np.all(d.weights >= 0)
            assert d.partition_value > 0
