import math

import numpy as np
import pytest

from cobranet import gw_tree, theory
from cobranet.degrees import build_sequence, compute_stats
from cobranet.experiments import preset_profile
from cobranet.gw_tree import (ExtinctionNotConverged, estimate_tree_survival, extinction_by_generation,
                              extinction_prob_iterate, offspring_law, simulate_percolated_tree)
from cobranet.theory import OutcomeProbs

from conftest import random_sequence, regular


def test_law_regular_point_mass():
    law = offspring_law(regular(100))
    assert law.support.tolist() == [6] and law.probs.tolist() == [1.0]


def test_law_blue_profile():
    law = offspring_law(build_sequence(preset_profile("blue", 1000)))
    assert law.support.tolist() == [2, 10]
    assert law.probs == pytest.approx([5 / 6, 1 / 6], abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_law_mean_inverse_is_rho_and_support_bounded(seed):
    seq = random_sequence(np.random.default_rng(seed), 300, 2, 12)
    law = offspring_law(seq)
    assert law.mean_inverse() == pytest.approx(compute_stats(seq).rho, rel=1e-12)
    assert abs(law.probs.sum() - 1) <= 1e-12
    assert law.support.min() >= 2 and law.support.max() <= seq.delta_max


def test_mixed_outcome_probs_match_averaged():
    seq = build_sequence(preset_profile("green", 1000))
    law = offspring_law(seq)
    rho = compute_stats(seq).rho
    for p in (0.1, 0.3, 0.45):
        assert law.mixed_outcome_probs(p).as_tuple() == pytest.approx(
            theory.averaged_outcome_probs(rho, p).as_tuple(), abs=1e-14)


def test_iterate_regular_value():
    z = extinction_prob_iterate(theory.averaged_outcome_probs(1 / 6, 0.3))
    assert z == pytest.approx(theory.z_star(0.3, 1 / 6), abs=1e-12)
    assert z == pytest.approx(0.220408, abs=1e-6)


def test_iterate_trivial_fixed_points():
    assert extinction_prob_iterate(OutcomeProbs(0.0, 0.3, 0.7)) == 0.0
    assert extinction_prob_iterate(OutcomeProbs(1.0, 0.0, 0.0)) == 1.0


def test_iterate_reports_nonconvergence():
    with pytest.raises(ExtinctionNotConverged) as info:
        extinction_prob_iterate(OutcomeProbs(0.25, 0.5, 0.25), tol=1e-15, max_iter=100)
    assert 0 < info.value.last < 1


def test_iterate_agrees_with_closed_form_grid():
    for rho in np.linspace(0.05, 0.5, 10):
        pc = theory.p_critical(rho)
        for p in np.linspace(0, 0.95, 96):
            if abs(p - pc) < 0.01:
                continue
            z = extinction_prob_iterate(theory.averaged_outcome_probs(rho, p))
            assert abs(z - theory.z_star(p, rho)) <= 1e-10, (rho, p)


def test_tree_extreme_bias(rng):
    law = offspring_law(regular(10))
    assert not any(simulate_percolated_tree(6, law, 1.0, 10, rng) for _ in range(50))
    assert all(simulate_percolated_tree(6, law, 0.0, 10, rng) for _ in range(50))


def test_generation_law_converges_to_fixed_point():
    law = offspring_law(regular(10))
    z60 = extinction_by_generation(6, law, 0.3, 60)
    assert z60 == pytest.approx(theory.z_hat_root(6, 0.3, 1 / 6), abs=1e-9)
    # doubling the cap changes nothing at this precision
    assert extinction_by_generation(6, law, 0.3, 120) == pytest.approx(z60, abs=1e-9)


def test_tree_survival_regular_monte_carlo():
    law = offspring_law(regular(10))
    trials = 100_000
    est, se = estimate_tree_survival(6, law, 0.3, 60, trials, np.random.default_rng(5))
    target = 1 - theory.z_hat_root(6, 0.3, 1 / 6)
    assert abs(est - target) <= 3 * se
    assert est == pytest.approx(1 - 0.220408, abs=0.01)


@pytest.mark.parametrize("name", ["red", "green", "blue"])
@pytest.mark.parametrize("p", [0.3, 0.45])
def test_tree_survival_matches_exact_finite_generation_law(name, p):
    seq = build_sequence(preset_profile(name, 1000))
    law = offspring_law(seq)
    trials = 100_000
    for d_root in sorted(set(seq.d_plus.tolist())):
        est, _ = estimate_tree_survival(d_root, law, p, 60, trials, np.random.default_rng(d_root))
        target = 1 - extinction_by_generation(d_root, law, p, 60)
        se = math.sqrt(target * (1 - target) / trials)
        assert abs(est - target) <= 3 * se, (d_root, est, target)


def test_predicted_red_density_delegates():
    seq = build_sequence(preset_profile("green", 1000))
    assert gw_tree.predicted_red_density(seq, 0.3) == theory.q_star_sum(seq, 0.3)
