import logging
import itertools

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import ConsistencyError
from .game import (
    MANAGER,
    FiniteInterventionGame,
    FiniteInterventionRule,
    ex_ante_tensor,
    induced_game,
    mixed_ex_ante_payoff,
)
from .nash import DEFAULT_TOLERANCE, NormalFormGame, mixed_nash_2p, pure_nash
from .profile import MixedProfile
from .utils import simplex_grid

logger = logging.getLogger(__name__)

DEFAULT_RULE_STEP = 0.02
DEFAULT_PROFILE_STEP = 0.01

# Local rule refinement stops once the move size drops below this
REFINE_STOP = 1e-6

# Mixed-profile grids larger than this are not scanned by best_feasible
MAX_PROFILE_GRID = 100000

SYMMETRY_TOLERANCE = 1e-9

@dataclass(frozen=True)
class InterventionEquilibrium:
    """A rule, a profile it sustains, and the manager's payoff there
    """

    rule : FiniteInterventionRule
    profile : MixedProfile
    manager_value : float

@dataclass(frozen=True)
class EquilibriumSummary:
    """Result of solving the manager's problem on a finite game.

    `v_star` and `witness_star` are None only when no candidate rule has an
    equilibrium the search can find (possible for three or more users,
    where only pure equilibria are computed).
    """

    v_bar : float
    v_star : Optional[float]
    v_tilde : Optional[float]

    witness_star : Optional[InterventionEquilibrium]
    witness_tilde : Optional[MixedProfile]
    witness_bar : MixedProfile

    rule_grid_step : float
    profile_grid_step : float
    effective_step : float
    grid_slack : float

    symmetric : bool = False
    rules_evaluated : int = 0
    rules_without_equilibrium : int = 0
    degenerate_rules : int = 0

    def to_dict(self, game : FiniteInterventionGame) -> Dict[str, Any]:
        return {
            "v_bar": self.v_bar,
            "v_star": self.v_star,
            "v_tilde": self.v_tilde,
            "witness_rule": self.witness_star.rule.to_dict(game) if self.witness_star is not None else None,
            "witness_profile": profile_to_dict(game, self.witness_star.profile) if self.witness_star is not None else None,
            "witness_tilde_profile": profile_to_dict(game, self.witness_tilde) if self.witness_tilde is not None else None,
            "witness_bar_profile": profile_to_dict(game, self.witness_bar),
            "grid_slack": self.grid_slack,
            "rule_grid_step": self.rule_grid_step,
            "profile_grid_step": self.profile_grid_step,
            "effective_step": self.effective_step,
            "symmetric": self.symmetric,
            "rules_evaluated": self.rules_evaluated,
            "rules_without_equilibrium": self.rules_without_equilibrium,
            "degenerate_rules": self.degenerate_rules,
        }

@dataclass(frozen=True)
class GapCertificate:
    """Evidence that the best incentive-compatible performance falls short of
    the best feasible one: signals have full support and no equilibrium
    without intervention reaches `v_bar`.
    """

    v_bar : float
    v_star : float
    gap : float
    grid_slack : float
    best_without_intervention : float

    @property
    def exceeds_slack(self) -> bool:
        """True when the reported gap is wider than the grid slack"""
        return self.gap > self.grid_slack

    def to_dict(self) -> Dict[str, Any]:
        return {
            "v_bar": self.v_bar,
            "v_star": self.v_star,
            "gap": self.gap,
            "grid_slack": self.grid_slack,
            "exceeds_slack": self.exceeds_slack,
            "best_without_intervention": self.best_without_intervention if np.isfinite(self.best_without_intervention) else None,
        }

@dataclass(frozen=True)
class _RuleOutcome:
    rule : FiniteInterventionRule
    candidates : Tuple[InterventionEquilibrium, ...]
    degenerate : bool

    @property
    def best(self) -> Optional[InterventionEquilibrium]:
        return self.candidates[0] if self.candidates else None

def profile_to_dict(game : FiniteInterventionGame, profile : MixedProfile) -> List[Dict[str, float]]:
    return [
        {action: float(p) for action, p in zip(actions, vector)}
        for actions, vector in zip(game.user_actions, profile.per_user)
    ]

def no_intervention_rule(game : FiniteInterventionGame) -> FiniteInterventionRule:
    """Rule that never intervenes: the declared no-intervention action after
    every signal
    """

    assert game.no_intervention_action is not None, \
        "Game does not declare a no-intervention action"

    return FiniteInterventionRule.degenerate(game, game.no_intervention_action)

def assumption_violations(game : FiniteInterventionGame) -> List[Tuple[str, Tuple[str, ...], str]]:
    """Every (intervention action, profile, signal) at which the manager does
    not strictly prefer the no-intervention action
    """

    assert game.no_intervention_action is not None, \
        "Game does not declare a no-intervention action"

    quiet = game.intervention_index(game.no_intervention_action)
    manager = game.payoffs[MANAGER]

    violations = []
    for a0, action in enumerate(game.intervention_actions):
        if a0 == quiet:
            continue

        for index in np.argwhere(manager[a0] >= manager[quiet]):
            *profile, y = (int(k) for k in index)
            labels = tuple(game.user_actions[user][k] for user, k in enumerate(profile))
            violations.append((action, labels, game.signals[y]))

    return violations

def check_assumption(game : FiniteInterventionGame):
    violations = assumption_violations(game)
    assert not violations, \
        "Manager does not strictly prefer %s at (%s)" % (
            game.no_intervention_action,
            "; ".join("%s, %s, %s" % (a0, ",".join(a), y) for a0, a, y in violations[:5]),
        )

def _product_grid_values(tensor : np.ndarray, grids : Sequence[np.ndarray]) -> np.ndarray:
    """Expectation of `tensor` at every combination of per-user grid points.
    Result has one axis per user, indexing that user's grid.
    """

    result = tensor
    for grid in grids:
        result = np.tensordot(result, grid, axes=([0], [1]))
    return result

def best_feasible(game : FiniteInterventionGame, profile_grid_step : float = DEFAULT_PROFILE_STEP) -> Tuple[float, MixedProfile]:
    """Best manager payoff without incentive constraints, under the rule that
    never intervenes, over all pure profiles and a grid of mixed ones.
    """

    check_assumption(game)

    manager = ex_ante_tensor(game, no_intervention_rule(game))[MANAGER]

    index = np.unravel_index(int(np.argmax(manager)), manager.shape)
    best_value = float(manager[index])
    best_profile = MixedProfile.pure(game.action_counts, tuple(int(k) for k in index))

    grids = [simplex_grid(count, profile_grid_step) for count in game.action_counts]
    size = int(np.prod([len(grid) for grid in grids]))

    if size > MAX_PROFILE_GRID:
        # payoffs are multilinear, so the pure profiles already hold the maximum
        logger.debug("Mixed profile grid of %d points exceeds %d, using pure profiles only", size, MAX_PROFILE_GRID)
        return best_value, best_profile

    values = _product_grid_values(manager, grids)
    grid_index = np.unravel_index(int(np.argmax(values)), values.shape)

    if values[grid_index] > best_value:
        best_value = float(values[grid_index])
        best_profile = MixedProfile(tuple(grid[k] for grid, k in zip(grids, grid_index)))

    return best_value, best_profile

def _symmetric_grid_equilibria(users : NormalFormGame, manager : np.ndarray, step : float, tolerance : float) -> List[Tuple[float, MixedProfile]]:
    """Symmetric profiles on a grid of mixed actions that are equilibria of
    `users`, with the manager's value at each.
    """

    counts = users.action_counts
    assert len(set(counts)) == 1, "Symmetric search needs equal action counts, got %s" % (counts,)

    grid = simplex_grid(counts[0], step)

    regret = np.zeros(len(grid))
    for player in range(users.num_players):
        values = np.moveaxis(users.payoffs[player], player, -1)
        values = np.tensordot(grid, values, axes=([1], [0])) if users.num_players > 1 else np.broadcast_to(values, (len(grid),) + values.shape)
        for _ in range(users.num_players - 2):
            values = np.einsum('ka,ka...->k...', grid, values)
        # values now has shape (points, actions)
        regret = np.maximum(regret, values.max(axis=1) - np.sum(values * grid, axis=1))

    manager_values = np.tensordot(grid, manager, axes=([1], [0]))
    for _ in range(users.num_players - 1):
        manager_values = np.einsum('ka,ka...->k...', grid, manager_values)

    return [
        (float(manager_values[k]), MixedProfile(tuple(grid[k] for _ in counts)))
        for k in np.flatnonzero(regret <= tolerance)
    ]

def _rank(candidates : List[Tuple[float, MixedProfile]]) -> List[Tuple[float, MixedProfile]]:
    unique = []
    for value, profile in sorted(candidates, key=lambda c: (-c[0], c[1].key)):
        if all(profile.distance(seen) >= 1e-7 for _, seen in unique):
            unique.append((value, profile))
    return unique

def _evaluate_rule(
    game : FiniteInterventionGame,
    rule : FiniteInterventionRule,
    tolerance : float,
    symmetric : bool,
    profile_grid_step : float,
) -> _RuleOutcome:
    users, manager = induced_game(game, rule)

    if game.num_users == 2:
        equilibria = mixed_nash_2p(users, tolerance)
    else:
        equilibria = pure_nash(users, tolerance)

    candidates = [(float(profile.expectation(manager)), profile) for profile in equilibria]

    if symmetric:
        candidates = [c for c in candidates if c[1].is_symmetric(SYMMETRY_TOLERANCE)]
        candidates += _symmetric_grid_equilibria(users, manager, profile_grid_step, tolerance)

    ranked = tuple(InterventionEquilibrium(rule, profile, value) for value, profile in _rank(candidates))
    return _RuleOutcome(rule, ranked, equilibria.degenerate)

def equilibria_for_rule(
    game : FiniteInterventionGame,
    rule : FiniteInterventionRule,
    tolerance : float = DEFAULT_TOLERANCE,
    symmetric : bool = False,
    profile_grid_step : float = DEFAULT_PROFILE_STEP,
) -> Tuple[InterventionEquilibrium, ...]:
    """Equilibria sustained by `rule`, best for the manager first. Ties are
    broken by the lexicographically smallest profile.
    """

    return _evaluate_rule(game, rule, tolerance, symmetric, profile_grid_step).candidates

def rule_grid(game : FiniteInterventionGame, step : float) -> List[FiniteInterventionRule]:
    """All rules whose per-signal distributions lie on the simplex grid with
    spacing `step`, in lexicographic order
    """

    per_signal = simplex_grid(game.num_intervention_actions, step)
    return [
        FiniteInterventionRule(np.array(rows))
        for rows in itertools.product(per_signal, repeat=game.num_signals)
    ]

def _better(a : InterventionEquilibrium, b : Optional[InterventionEquilibrium]) -> bool:
    """True if `a` should replace the incumbent `b`: higher value, then the
    smaller rule, then the smaller profile
    """

    if b is None:
        return True
    return (-a.manager_value, a.rule.key, a.profile.key) < (-b.manager_value, b.rule.key, b.profile.key)

def _neighbours(rule : FiniteInterventionRule, h : float) -> List[FiniteInterventionRule]:
    """Rules reached by moving mass `h` between two intervention actions
    after one signal
    """

    neighbours = []
    num_signals, num_actions = rule.per_signal.shape

    for y in range(num_signals):
        for source, target in itertools.permutations(range(num_actions), 2):
            if rule.per_signal[y, source] < h:
                continue
            per_signal = np.array(rule.per_signal)
            per_signal[y, source] -= h
            per_signal[y, target] += h
            per_signal[y] = np.clip(per_signal[y], 0.0, None)
            per_signal[y] /= per_signal[y].sum()
            neighbours.append(FiniteInterventionRule(per_signal))

    return neighbours

def _lipschitz_estimate(game : FiniteInterventionGame, rule : FiniteInterventionRule, profile : MixedProfile) -> float:
    """Largest change in the manager's payoff per unit change of every rule
    coordinate, from finite differences at the witness profile.
    """

    total = 0.0
    for y in range(game.num_signals):
        values = []
        for a0 in range(game.num_intervention_actions):
            per_signal = np.array(rule.per_signal)
            per_signal[y] = 0.0
            per_signal[y, a0] = 1.0
            values.append(mixed_ex_ante_payoff(game, FiniteInterventionRule(per_signal), profile, MANAGER))
        total += max(values) - min(values)
    return total

def solve(
    game : FiniteInterventionGame,
    rule_grid_step : float = DEFAULT_RULE_STEP,
    profile_grid_step : float = DEFAULT_PROFILE_STEP,
    tolerance : float = DEFAULT_TOLERANCE,
    symmetric : bool = False,
    refine : bool = True,
    workers : int = None,
) -> EquilibriumSummary:
    """Search the rule space for the intervention equilibrium that is best
    for the manager.

    Every rule on the grid is evaluated and the manager keeps the best
    equilibrium each rule sustains. With `refine`, the incumbent rule is then
    improved by moving probability mass between intervention actions, with
    moves halving in size until they drop below 1e-6. With `symmetric`, only
    profiles where all users mix identically are considered.
    """

    assert 0 < rule_grid_step <= 1, "Rule grid step must be in (0, 1], got %s" % rule_grid_step
    assert 0 < profile_grid_step <= 1, "Profile grid step must be in (0, 1], got %s" % profile_grid_step
    assert tolerance >= 0, "Tolerance must be non-negative"

    v_bar, witness_bar = best_feasible(game, profile_grid_step)

    quiet = no_intervention_rule(game)
    tilde = _evaluate_rule(game, quiet, tolerance, symmetric, profile_grid_step).best

    rules = rule_grid(game, rule_grid_step)
    logger.debug("Evaluating %d rules on a grid of step %s", len(rules), rule_grid_step)

    def evaluate(rule):
        return _evaluate_rule(game, rule, tolerance, symmetric, profile_grid_step)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(evaluate, rules))
    else:
        outcomes = [evaluate(rule) for rule in rules]

    incumbent = None
    for outcome in outcomes:
        if outcome.best is not None and _better(outcome.best, incumbent):
            incumbent = outcome.best

    without_equilibrium = sum(1 for outcome in outcomes if outcome.best is None)
    degenerate = sum(1 for outcome in outcomes if outcome.degenerate)
    if without_equilibrium > 0:
        logger.debug("%d rules have no equilibrium the search can find", without_equilibrium)

    effective_step = rule_grid_step

    if refine and incumbent is not None:
        h = rule_grid_step / 2
        while h >= REFINE_STOP:
            effective_step = h

            improved = None
            for candidate in _neighbours(incumbent.rule, h):
                best = evaluate(candidate).best
                if best is not None and best.manager_value > incumbent.manager_value + 1e-12 and _better(best, improved):
                    improved = best

            if improved is not None:
                logger.debug("Refined rule to %s (value %.12g)", improved.rule.key, improved.manager_value)
                incumbent = improved
            else:
                h /= 2

    v_star = incumbent.manager_value if incumbent is not None else None
    v_tilde = tilde.manager_value if tilde is not None else None

    grid_slack = 0.0
    if incumbent is not None:
        grid_slack = _lipschitz_estimate(game, incumbent.rule, incumbent.profile) * effective_step

    if v_star is not None and v_star > v_bar + tolerance:
        raise ConsistencyError(
            "Incentive-compatible value %.12g exceeds best feasible value %.12g" % (v_star, v_bar)
        )

    return EquilibriumSummary(
        v_bar=v_bar,
        v_star=v_star,
        v_tilde=v_tilde,
        witness_star=incumbent,
        witness_tilde=tilde.profile if tilde is not None else None,
        witness_bar=witness_bar,
        rule_grid_step=rule_grid_step,
        profile_grid_step=profile_grid_step,
        effective_step=effective_step,
        grid_slack=grid_slack,
        symmetric=symmetric,
        rules_evaluated=len(rules),
        rules_without_equilibrium=without_equilibrium,
        degenerate_rules=degenerate,
    )

def gap_certificate(
    game : FiniteInterventionGame,
    summary : EquilibriumSummary,
    tolerance : float = DEFAULT_TOLERANCE,
) -> Optional[GapCertificate]:
    """Certify that `summary.v_star` is strictly below `summary.v_bar`.

    Returns None unless every signal has positive probability under every
    profile and no equilibrium without intervention reaches `v_bar`. When
    both hold, a search that reaches `v_bar` anyway is a solver bug and
    raises ConsistencyError. Whether the gap also clears the grid slack is
    reported on the certificate.
    """

    if not game.has_full_support():
        return None

    if summary.v_star is None:
        return None

    users, manager = induced_game(game, no_intervention_rule(game))
    equilibria = mixed_nash_2p(users, tolerance) if game.num_users == 2 else pure_nash(users, tolerance)

    values = [float(profile.expectation(manager)) for profile in equilibria]
    best_without_intervention = max(values) if values else float("-inf")

    if best_without_intervention >= summary.v_bar - tolerance:
        return None

    gap = summary.v_bar - summary.v_star
    if gap <= tolerance:
        raise ConsistencyError(
            "Signals have full support but the search found v_star %.12g reaching v_bar %.12g" % (
                summary.v_star, summary.v_bar,
            )
        )

    if gap <= summary.grid_slack:
        logger.debug("Gap %.6g is within grid slack %.6g", gap, summary.grid_slack)

    return GapCertificate(
        v_bar=summary.v_bar,
        v_star=summary.v_star,
        gap=gap,
        grid_slack=summary.grid_slack,
        best_without_intervention=best_without_intervention,
    )
