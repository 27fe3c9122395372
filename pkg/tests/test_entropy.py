"""Relative entropy, exponential-tilt minimizer and entropy balls."""
import math

import numpy as np
import pytest
from scipy import optimize

import pmfrisk.entropy as entropy_mod
from pmfrisk import (ArbitrageViolation, BracketNotFound, ConvergenceFailure,
                     EntropyBall, GridMismatch, Pmf, SampleBatch, SupportGrid,
                     ball_mask, combine, entropy_distribution, in_ball,
                     enumerate_generators, relative_entropy, sample_polytope,
                     solve_memm)

EXACT = 1e-12
ORACLE_TOL = 1e-10        # against the independent root-finder
FIG_TOL = 1e-3            # published 4-decimal figures

TRI_GRID = SupportGrid(np.array([0.64, 0.96, 1.44]))
TRI_PRIOR = Pmf(TRI_GRID, np.array([0.3, 0.4, 0.3]))
TRI_GROSS = 1.02

L4_GRID = SupportGrid(np.array([0.512, 0.768, 1.152, 1.728]))
L4_PRIOR = Pmf(L4_GRID, np.array([0.09, 0.40, 0.47, 0.04]))


def tilt_oracle(prior: Pmf, gross: float) -> tuple[np.ndarray, float]:
    """Independent solve of the tilt equation with a library root finder."""
    y = prior.grid.points
    p = prior.probs

    def gap(tau):
        w = p * np.exp(-tau * (y - y.mean()))
        return w @ y / w.sum() - gross

    tau = optimize.brentq(gap, -200.0, 200.0, xtol=1e-15)
    w = p * np.exp(-tau * (y - y.mean()))
    q = w / w.sum()
    # recenter tau to the raw parameterization q ~ p exp(-tau y)
    return q, tau


# --- relative entropy -----------------------------------------------------

def test_entropy_of_a_measure_with_itself_is_zero():
    assert relative_entropy(TRI_PRIOR, TRI_PRIOR) == 0.0


def test_entropy_matches_direct_formula():
    q = Pmf(TRI_GRID, np.array([0.5, 0.25, 0.25]))
    expected = (0.5 * math.log(0.5 / 0.3) + 0.25 * math.log(0.25 / 0.4)
                + 0.25 * math.log(0.25 / 0.3))
    assert abs(relative_entropy(q, TRI_PRIOR) - expected) <= 1e-15


def test_entropy_is_infinite_whenever_supports_differ():
    two_point = Pmf(TRI_GRID, np.array([0.525, 0.0, 0.475]))
    assert relative_entropy(two_point, TRI_PRIOR) == math.inf
    assert relative_entropy(TRI_PRIOR, two_point) == math.inf


def test_entropy_is_finite_on_a_shared_strict_subsupport():
    a = Pmf(TRI_GRID, np.array([0.5, 0.0, 0.5]))
    b = Pmf(TRI_GRID, np.array([0.6, 0.0, 0.4]))
    val = relative_entropy(a, b)
    assert math.isfinite(val) and val > 0.0


def test_entropy_requires_a_common_grid():
    other = Pmf(SupportGrid(np.array([1.0, 2.0, 3.0])),
                np.array([0.3, 0.4, 0.3]))
    with pytest.raises(GridMismatch):
        relative_entropy(other, TRI_PRIOR)


def test_entropy_is_nonnegative_on_random_pairs():
    rng = np.random.default_rng(19)
    for _ in range(100):
        q = Pmf(TRI_GRID, rng.dirichlet(np.ones(3)))
        p = Pmf(TRI_GRID, rng.dirichlet(np.ones(3)))
        assert relative_entropy(q, p) >= -EXACT


# --- minimal-entropy measure ----------------------------------------------

def test_trinomial_tilt_matches_independent_root_finder():
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    q_oracle, _ = tilt_oracle(TRI_PRIOR, TRI_GROSS)
    assert np.allclose(sol.q_tilde.probs, q_oracle, atol=ORACLE_TOL, rtol=0.0)
    assert abs(sol.q_tilde.mean() - TRI_GROSS) <= EXACT
    assert sol.residual <= 1e-12


def test_trinomial_tilt_matches_published_figures():
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    assert np.allclose(sol.q_tilde.probs, [0.2866, 0.3974, 0.3161],
                       atol=FIG_TOL, rtol=0.0)
    assert abs(sol.entropy - 0.000735479600481953) <= 1e-12


def test_tilt_log_ratios_are_affine_in_the_support():
    sol = solve_memm(L4_PRIOR, 1.02)
    ratios = np.log(sol.q_tilde.probs / L4_PRIOR.probs)
    shifted = ratios + sol.tau * L4_GRID.points
    assert np.ptp(shifted) <= 1e-9


def test_mixture_weight_of_the_tilt_is_uniform_across_components():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    outer, inner = gens.generators[0].pmf.probs, gens.generators[1].pmf.probs
    lam = (sol.q_tilde.probs - outer) / (inner - outer)
    assert np.ptp(lam) <= 1e-9
    assert abs(lam[0] - 0.4541) <= FIG_TOL


def test_four_state_tilt_reproduces_reference_values():
    sol = solve_memm(L4_PRIOR, 1.02)
    q_oracle, _ = tilt_oracle(L4_PRIOR, 1.02)
    assert np.allclose(sol.q_tilde.probs, q_oracle, atol=ORACLE_TOL, rtol=0.0)
    # descending convention: (0.0682, 0.5280, 0.3402, 0.0636) to 4 decimals
    assert np.allclose(sol.q_tilde.probs[::-1],
                       [0.0682, 0.5280, 0.3402, 0.0636], atol=FIG_TOL)
    assert abs(sol.entropy - 0.0207) <= FIG_TOL


def test_risk_neutral_prior_is_its_own_minimizer():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    prior = combine(gens, [0.5, 0.5])
    grid = SupportGrid(TRI_GRID.points)
    full = Pmf(grid, 0.5 * prior.probs + 0.5 * np.array([0.2, 0.6, 0.2]))
    # mix toward an interior pmf so the prior has full support and mean 1.02
    target = full.mean()
    sol = solve_memm(full, target)
    assert np.allclose(sol.q_tilde.probs, full.probs, atol=1e-9, rtol=0.0)
    assert abs(sol.tau) <= 1e-6
    assert sol.entropy <= 1e-12


def test_entropy_minimality_over_sampled_equivalent_measures():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    batch = sample_polytope(gens, 5_000, seed=2)
    ents = entropy_distribution(batch, TRI_PRIOR, order="sample-first")
    finite = ents[np.isfinite(ents)]
    assert finite.size == len(batch)
    assert finite.min() >= sol.entropy - EXACT


def test_memm_rejects_bad_priors_and_means():
    thin = Pmf(TRI_GRID, np.array([0.5, 0.0, 0.5]))
    with pytest.raises(ValueError):
        solve_memm(thin, TRI_GROSS)
    with pytest.raises(ArbitrageViolation):
        solve_memm(TRI_PRIOR, 1.5)
    with pytest.raises(ArbitrageViolation):
        solve_memm(TRI_PRIOR, 0.64)      # boundary is not attainable


def test_memm_error_paths_at_exhausted_iteration_budgets(monkeypatch):
    monkeypatch.setattr(entropy_mod, "MAX_EXPAND", 0)
    with pytest.raises(BracketNotFound):
        solve_memm(TRI_PRIOR, TRI_GROSS)
    monkeypatch.setattr(entropy_mod, "MAX_EXPAND", 60)
    monkeypatch.setattr(entropy_mod, "MAX_BISECT", 1)
    with pytest.raises(ConvergenceFailure):
        solve_memm(TRI_PRIOR, TRI_GROSS)


def test_memm_handles_extreme_tilts():
    grid = SupportGrid(np.array([0.5, 1.0, 2.0]))
    prior = Pmf(grid, np.array([0.4, 0.2, 0.4]))
    for target in (0.5 + 1e-8, 2.0 - 1e-8):
        sol = solve_memm(prior, target)
        assert abs(sol.q_tilde.mean() - target) <= 1e-12


# --- entropy balls and distributions --------------------------------------

def test_ball_contains_its_center():
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    ball = EntropyBall(sol.q_tilde, 0.05)
    assert in_ball(ball, sol.q_tilde)
    assert in_ball(ball, sol.q_tilde, order="sample-first")


def test_ball_excludes_measures_without_full_support():
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    ball = EntropyBall(sol.q_tilde, 100.0)
    thin = Pmf(TRI_GRID, np.array([0.525, 0.0, 0.475]))
    assert not in_ball(ball, thin)
    assert not in_ball(ball, thin, order="sample-first")


def test_ball_rejects_negative_radius_and_unknown_order():
    sol = solve_memm(TRI_PRIOR, TRI_GROSS)
    with pytest.raises(ValueError):
        EntropyBall(sol.q_tilde, -0.1)
    ball = EntropyBall(sol.q_tilde, 0.1)
    with pytest.raises(ValueError):
        in_ball(ball, sol.q_tilde, order="both")
    batch = SampleBatch(TRI_GRID, np.tile([0.3, 0.4, 0.3], (2, 1)), seed=0)
    with pytest.raises(ValueError):
        entropy_distribution(batch, sol.q_tilde, order="both")


def test_distribution_of_the_reference_against_itself_is_zero():
    batch = SampleBatch(TRI_GRID, np.tile(TRI_PRIOR.probs, (5, 1)), seed=0)
    assert np.all(entropy_distribution(batch, TRI_PRIOR) == 0.0)
    assert np.all(entropy_distribution(batch, TRI_PRIOR,
                                       order="sample-first") == 0.0)


def test_distribution_orders_agree_with_the_scalar_function():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    batch = sample_polytope(gens, 64, seed=4)
    center = solve_memm(TRI_PRIOR, TRI_GROSS).q_tilde
    cf = entropy_distribution(batch, center, order="center-first")
    sf = entropy_distribution(batch, center, order="sample-first")
    for i in range(len(batch)):
        assert abs(cf[i] - relative_entropy(center, batch.pmf(i))) <= 1e-13
        assert abs(sf[i] - relative_entropy(batch.pmf(i), center)) <= 1e-13


def test_distribution_propagates_infinite_entries():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    matrix = np.vstack([TRI_PRIOR.probs, gens.generators[0].pmf.probs])
    batch = SampleBatch(TRI_GRID, matrix, seed=0)
    cf = entropy_distribution(batch, TRI_PRIOR, order="center-first")
    assert math.isfinite(cf[0]) and np.isinf(cf[1])


def test_ball_mask_matches_scalar_membership():
    gens = enumerate_generators(TRI_GRID, TRI_GROSS)
    batch = sample_polytope(gens, 200, seed=6)
    center = solve_memm(TRI_PRIOR, TRI_GROSS).q_tilde
    ball = EntropyBall(center, 0.02)
    for order in ("center-first", "sample-first"):
        mask = ball_mask(batch, ball, order=order)
        for i in range(0, len(batch), 23):
            assert mask[i] == in_ball(ball, batch.pmf(i), order=order)
        assert 0 < mask.sum() < len(batch)


def test_distribution_requires_matching_grids():
    other = Pmf(SupportGrid(np.array([1.0, 2.0, 3.0])),
                np.array([0.3, 0.4, 0.3]))
    batch = SampleBatch(TRI_GRID, np.tile(TRI_PRIOR.probs, (2, 1)), seed=0)
    with pytest.raises(GridMismatch):
        entropy_distribution(batch, other)
