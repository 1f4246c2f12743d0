import os.path
import dataclasses
import pytest
import numpy as np

from .config import ConsistencyError, load_game
from .game import FiniteInterventionGame, FiniteInterventionRule, sustains
from .imperfect import (
    HIGH,
    LOW,
    ImperfectParams,
    classify,
    gap_formula,
    imperfect_game,
    type2_rule,
)
from .profile import MixedProfile
from .search import (
    assumption_violations,
    best_feasible,
    check_assumption,
    equilibria_for_rule,
    gap_certificate,
    no_intervention_rule,
    profile_to_dict,
    rule_grid,
    solve,
)

TEST_DATA = os.path.join(os.path.dirname(__file__), "test_data")

def random_game(rng, num_users=2):
    """Random game where the manager strictly prefers not intervening
    """

    counts = tuple(int(c) for c in rng.integers(2, 4, size=num_users))
    num_signals = int(rng.integers(1, 4))

    signal_dist = rng.dirichlet(np.ones(num_signals), size=counts)

    payoffs = rng.uniform(0, 1, size=(num_users + 1, 2) + counts + (num_signals,))
    payoffs[0, 0] += 1.0

    return FiniteInterventionGame(
        tuple(tuple("u%d_%d" % (user, k) for k in range(c)) for user, c in enumerate(counts)),
        ("quiet", "act"),
        tuple("y%d" % y for y in range(num_signals)),
        signal_dist,
        payoffs,
        "quiet",
    )

class TestAssumption:

    def test_no_intervention_rule(self):
        game = imperfect_game(ImperfectParams())
        assert no_intervention_rule(game) == type2_rule(1.0, 1.0)

    def test_missing_declaration(self):
        game = imperfect_game(ImperfectParams())
        undeclared = FiniteInterventionGame(
            game.user_actions, game.intervention_actions, game.signals, game.signal_dist, game.payoffs
        )

        with pytest.raises(AssertionError):
            no_intervention_rule(undeclared)

        with pytest.raises(AssertionError):
            solve(undeclared, 0.5, 0.5)

    def test_violations(self):
        game = imperfect_game(ImperfectParams())
        assert assumption_violations(game) == []
        check_assumption(game)

        payoffs = np.array(game.payoffs)
        payoffs[0, 1, 0, 0, 1] = 5.0
        broken = dataclasses.replace(game, payoffs=payoffs)

        assert assumption_violations(broken) == [("intervene", (LOW, LOW), "y_low")]
        with pytest.raises(AssertionError):
            check_assumption(broken)

def test_best_feasible():

    value, profile = best_feasible(imperfect_game(ImperfectParams()), 0.1)
    assert value == pytest.approx(4.84)
    assert profile.pure_indices == (0, 0)

def test_rule_grid():

    game = imperfect_game(ImperfectParams())
    rules = rule_grid(game, 0.5)

    assert len(rules) == 9
    assert rules[0] == type2_rule(0.0, 0.0)
    assert rules[-1] == type2_rule(1.0, 1.0)
    assert len(set(rules)) == 9

def test_equilibria_for_rule():

    game = imperfect_game(ImperfectParams())

    ranked = equilibria_for_rule(game, no_intervention_rule(game))
    assert len(ranked) == 1
    assert ranked[0].profile.pure_indices == (1, 1)
    assert ranked[0].manager_value == pytest.approx(4.284)

    # intervening after every signal makes every profile an equilibrium
    ranked = equilibria_for_rule(game, FiniteInterventionRule.degenerate(game, "intervene"))
    assert len([e for e in ranked if e.profile.is_pure]) == 4
    assert all(e.manager_value == 0.0 for e in ranked)

def test_symmetric_equilibria_for_rule():

    game = imperfect_game(ImperfectParams())
    ranked = equilibria_for_rule(game, type2_rule(1.0, 0.0), symmetric=True, profile_grid_step=0.1)

    assert all(e.profile.is_symmetric() for e in ranked)
    assert ranked[0].profile.pure_indices == (0, 0)
    assert ranked[0].manager_value == pytest.approx(4.8)
    assert [e.manager_value for e in ranked] == sorted((e.manager_value for e in ranked), reverse=True)

def test_profile_to_dict():

    game = imperfect_game(ImperfectParams())
    assert profile_to_dict(game, MixedProfile(([0.25, 0.75], [1.0, 0.0]))) == [
        {LOW: 0.25, HIGH: 0.75},
        {LOW: 1.0, HIGH: 0.0},
    ]

class TestSolveImperfect:

    def test_attains_low_usage(self):
        params = ImperfectParams(p=0.96)
        game = imperfect_game(params)
        summary = solve(game, rule_grid_step=0.1, profile_grid_step=0.1, symmetric=True)

        assert summary.v_bar == pytest.approx(4.84)
        assert summary.v_tilde == pytest.approx(4.284)
        assert summary.v_star == pytest.approx(4.80808, abs=1e-5)
        assert summary.witness_star.profile.pure_indices == (0, 0)
        assert summary.witness_star.rule.per_signal[0, 0] == 1.0
        assert summary.witness_star.rule.per_signal[1, 0] == pytest.approx(0.20202, abs=1e-5)
        assert summary.effective_step < 1e-5
        assert summary.rules_evaluated == 121

        certificate = gap_certificate(game, summary)
        assert certificate is not None
        assert certificate.gap == pytest.approx(gap_formula(params), abs=1e-5)
        assert certificate.best_without_intervention == pytest.approx(4.284)
        assert certificate.exceeds_slack
        assert certificate.to_dict()["exceeds_slack"] is True

    def test_coarse_search_reports_slack(self):
        params = ImperfectParams(p=0.96)
        game = imperfect_game(params)
        summary = solve(game, 0.02, 0.01, symmetric=True, refine=False)

        assert summary.effective_step == 0.02
        assert summary.v_star <= classify(params).v_star + 1e-9

        certificate = gap_certificate(game, summary)
        assert certificate is not None
        assert certificate.gap >= gap_formula(params) - 1e-9
        assert certificate.gap == pytest.approx(gap_formula(params), abs=1e-3)
        assert certificate.grid_slack == summary.grid_slack
        assert not certificate.exceeds_slack

    @pytest.mark.parametrize("p", [0.9, 0.94, 0.96])
    def test_matches_closed_form(self, p):
        params = ImperfectParams(p=p)
        summary = solve(imperfect_game(params), symmetric=True)

        assert summary.rule_grid_step == 0.02
        assert summary.profile_grid_step == 0.01
        assert summary.v_star == pytest.approx(classify(params).v_star, abs=2e-3)

    def test_mixed_usage_is_best(self):
        summary = solve(imperfect_game(ImperfectParams(p=0.94)), symmetric=True)

        assert summary.v_star == pytest.approx(4.481818, abs=2e-3)
        assert not summary.witness_star.profile.is_pure

    def test_no_intervention_is_best(self):
        game = imperfect_game(ImperfectParams(p=0.9))
        summary = solve(game, rule_grid_step=0.1, profile_grid_step=0.1, symmetric=True)

        assert summary.v_star == pytest.approx(4.284, abs=1e-6)
        assert summary.v_tilde == pytest.approx(4.284)

    def test_summary_dict(self):
        game = imperfect_game(ImperfectParams())
        summary = solve(game, rule_grid_step=0.5, profile_grid_step=0.5, symmetric=True, refine=False)
        data = summary.to_dict(game)

        for key in ("v_bar", "v_star", "v_tilde", "witness_rule", "witness_profile", "grid_slack"):
            assert key in data

        assert data["witness_rule"] == summary.witness_star.rule.to_dict(game)
        assert data["effective_step"] == 0.5

    def test_symmetric_needs_equal_action_counts(self):
        payoffs = np.zeros((3, 2, 2, 3, 1))
        payoffs[0, 0] = 1.0
        game = FiniteInterventionGame(
            (("a", "b"), ("a", "b", "c")), ("quiet", "act"), ("y",), np.ones((2, 3, 1)), payoffs, "quiet"
        )

        with pytest.raises(AssertionError):
            solve(game, 0.5, 0.5, symmetric=True)

def test_single_intervention_action():

    game = load_game(os.path.join(TEST_DATA, "single_intervention.json"))
    summary = solve(game, 0.1, 0.1)

    assert summary.rules_evaluated == 1
    assert summary.v_star == summary.v_tilde == 1.0
    assert summary.v_bar == 3.0
    assert summary.grid_slack == 0.0

    certificate = gap_certificate(game, summary)
    assert certificate.gap == 2.0

def test_gap_certificate_needs_full_support():

    game = imperfect_game(ImperfectParams())
    dist = np.array(game.signal_dist)
    dist[0, 0] = [1.0, 0.0]
    partial = dataclasses.replace(game, signal_dist=dist)

    summary = solve(partial, 0.5, 0.5, symmetric=True, refine=False)
    assert gap_certificate(partial, summary) is None

def test_gap_certificate_contradiction():

    game = imperfect_game(ImperfectParams())
    summary = solve(game, 0.5, 0.5, symmetric=True, refine=False)

    impossible = dataclasses.replace(summary, v_star=summary.v_bar)
    with pytest.raises(ConsistencyError):
        gap_certificate(game, impossible)

def test_solve_validation():

    game = imperfect_game(ImperfectParams())

    with pytest.raises(AssertionError):
        solve(game, 0, 0.1)

    with pytest.raises(AssertionError):
        solve(game, 0.1, 1.5)

    with pytest.raises(AssertionError):
        solve(game, 0.1, 0.1, tolerance=-1)

class TestRandomGames:

    def test_equilibrium_exists(self):
        rng = np.random.default_rng(42)

        for _ in range(50):
            game = random_game(rng)
            summary = solve(game, 0.5, 0.25, refine=False)

            witness = summary.witness_star
            assert witness is not None
            assert sustains(game, witness.rule, witness.profile, 1e-7)

            assert summary.v_tilde is not None
            assert summary.v_tilde <= summary.v_star + 1e-12
            assert summary.v_star <= summary.v_bar + 1e-9

    def test_refinement_never_hurts(self):
        rng = np.random.default_rng(7)

        for _ in range(5):
            game = random_game(rng)
            coarse = solve(game, 0.5, 0.25, refine=False)
            fine = solve(game, 0.5, 0.25, refine=True)

            assert fine.v_star >= coarse.v_star - 1e-12
            assert fine.effective_step <= coarse.effective_step

    def test_workers_match_sequential(self):
        game = random_game(np.random.default_rng(11))

        sequential = solve(game, 0.5, 0.25, refine=False)
        threaded = solve(game, 0.5, 0.25, refine=False, workers=3)

        assert threaded.v_star == sequential.v_star
        assert threaded.witness_star.rule == sequential.witness_star.rule
        assert threaded.witness_star.profile == sequential.witness_star.profile

    def test_three_users(self):
        game = random_game(np.random.default_rng(5), num_users=3)
        summary = solve(game, 0.5, 0.5, refine=False)

        assert summary.v_star is None or summary.v_star <= summary.v_bar + 1e-9
