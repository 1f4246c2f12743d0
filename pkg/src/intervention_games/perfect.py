"""Intervention under perfect monitoring: the device sees the users' action
profile exactly, and every action space is an interval.
"""

import logging
import itertools

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .utils import (
    golden_section_max,
    golden_section_min,
    open_interval_samples,
    uniform_grid,
)

logger = logging.getLogger(__name__)

# Payoff callables take an intervention level (scalar or shape (M,)) and
# profiles (shape (N,) or (M, N)) and return one payoff per profile
Payoff = Callable[[Union[float, np.ndarray], np.ndarray], Union[float, np.ndarray]]

# Punishments map a deviating user and profiles (M, N) to intervention levels (M,)
Punishment = Callable[[int, np.ndarray], np.ndarray]

# Deviation oracles map a user and profiles (M, N) to that user's best
# payoff (M,) from a unilateral deviation that is punished
DeviationOracle = Callable[[int, np.ndarray], np.ndarray]

MEMBERSHIP_TOLERANCE = 1e-9
CONDITION_TOLERANCE = 1e-6

DEFAULT_ORACLE_POINTS = 2001
CONDITION_SAMPLES = 201
ASSUMPTION_POINTS = 5

DERIVATIVE_STEP = 1e-5
SECOND_DERIVATIVE_STEP = 1e-4

# Smallest usable right derivative in the intervention level
MIN_SLOPE = 1e-10

# Rates smaller than this are reported as exactly zero
RATE_SNAP = 1e-7

REFINE_STOP = 1e-6

# Pattern-search moves must pass membership with no slack
REFINE_TOLERANCE = 0.0

# Profiles per block when scanning deviations on a grid
ORACLE_BLOCK = 64

@dataclass(frozen=True, eq=False)
class ContinuousGame:
    """Users choose from intervals; the device picks an intervention level
    from `intervention_interval`, whose lower end means no intervention.
    Payoffs are vectorised callables (see `Payoff`).
    """

    user_intervals : Tuple[Tuple[float, float], ...]
    intervention_interval : Tuple[float, float]
    user_payoffs : Tuple[Payoff, ...]
    manager_payoff : Payoff

    def __post_init__(self):
        intervals = tuple((float(lo), float(hi)) for lo, hi in self.user_intervals)
        lower0, upper0 = (float(x) for x in self.intervention_interval)

        assert len(intervals) >= 1, "A game needs at least one user"
        assert len(self.user_payoffs) == len(intervals), \
            "Got %d payoff functions for %d users" % (len(self.user_payoffs), len(intervals))
        for user, (lo, hi) in enumerate(intervals):
            assert lo < hi, "Action interval of user %d is empty: [%s, %s]" % (user + 1, lo, hi)
        assert lower0 <= upper0, "Intervention interval is empty: [%s, %s]" % (lower0, upper0)

        object.__setattr__(self, 'user_intervals', intervals)
        object.__setattr__(self, 'intervention_interval', (lower0, upper0))
        object.__setattr__(self, 'user_payoffs', tuple(self.user_payoffs))

        self._check_payoffs()

    def _check_payoffs(self):
        """Spot check on a coarse grid that payoffs are finite and that no
        intervention level beats no intervention for any user.
        """

        profiles = product_grid(self.user_intervals, ASSUMPTION_POINTS)
        levels = uniform_grid(self.lower_intervention, self.upper_intervention, ASSUMPTION_POINTS)

        for level in levels:
            assert np.all(np.isfinite(self.manager(level, profiles))), \
                "Manager payoff is not finite at intervention level %g" % level

        for user in range(self.num_users):
            quiet = self.payoff(user, self.lower_intervention, profiles)
            assert np.all(np.isfinite(quiet)), "Payoff of user %d is not finite" % (user + 1)

            for level in levels:
                values = self.payoff(user, level, profiles)
                assert np.all(np.isfinite(values)), \
                    "Payoff of user %d is not finite at intervention level %g" % (user + 1, level)

                worse = np.flatnonzero(values > quiet + MEMBERSHIP_TOLERANCE)
                assert worse.size == 0, \
                    "Intervention level %g raises the payoff of user %d at profile %s" % (
                        level, user + 1, profiles[worse[0]].tolist() if worse.size else None,
                    )

    @property
    def num_users(self) -> int:
        return len(self.user_intervals)

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.user_intervals])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([hi for _, hi in self.user_intervals])

    @property
    def lower_intervention(self) -> float:
        return self.intervention_interval[0]

    @property
    def upper_intervention(self) -> float:
        return self.intervention_interval[1]

    def payoff(self, user : int, level, profiles) -> np.ndarray:
        """Payoff of zero-based `user`, one value per profile
        """

        profiles = np.asarray(profiles, dtype=float)
        values = np.asarray(self.user_payoffs[user](level, profiles), dtype=float)
        return np.broadcast_to(values, profiles.shape[:-1]) if profiles.ndim > 1 else values

    def manager(self, level, profiles) -> np.ndarray:
        profiles = np.asarray(profiles, dtype=float)
        values = np.asarray(self.manager_payoff(level, profiles), dtype=float)
        return np.broadcast_to(values, profiles.shape[:-1]) if profiles.ndim > 1 else values

    def contains(self, profiles) -> np.ndarray:
        profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
        return np.all((profiles >= self.lower_bounds) & (profiles <= self.upper_bounds), axis=1)

def product_grid(intervals : Sequence[Tuple[float, float]], points : int) -> np.ndarray:
    """All profiles on a grid with `points` values per user, in
    lexicographic order. Shape (points ** N, N).
    """

    axes = [uniform_grid(lo, hi, points) for lo, hi in intervals]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))

def default_grid_points(num_users : int) -> int:
    if num_users <= 2:
        return 61
    if num_users == 3:
        return 21
    return 11

def punishment(game : ContinuousGame, user : int, profiles) -> np.ndarray:
    """Intervention level minimising `user`'s payoff at each profile, by
    golden-section search. Endpoints win ties, the upper one first.
    """

    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    lower0, upper0 = game.intervention_interval

    if upper0 == lower0:
        return np.full(len(profiles), lower0)

    levels, _ = golden_section_min(
        lambda level: game.payoff(user, level, profiles),
        np.full(len(profiles), lower0),
        np.full(len(profiles), upper0),
    )
    return levels

def constant_punishment(level : float) -> Punishment:
    """Punish every deviation with the same intervention level, for games
    where payoffs fall as the level rises
    """

    def punish(user : int, profiles) -> np.ndarray:
        return np.full(len(np.atleast_2d(profiles)), float(level))

    return punish

def _as_profiles(profiles) -> Tuple[np.ndarray, bool]:
    array = np.asarray(profiles, dtype=float)
    return np.atleast_2d(array), array.ndim == 1

@dataclass(frozen=True, eq=False)
class ExtremeRule:
    """Punish a unilateral deviation from `target` as hard as possible for
    the deviator; otherwise do not intervene.
    """

    game : ContinuousGame
    target : np.ndarray
    punish : Optional[Punishment] = None

    def __post_init__(self):
        target = np.array(self.target, dtype=float)
        assert target.shape == (self.game.num_users,), "Target needs one action per user"
        assert bool(self.game.contains(target)[0]), "Target %s lies outside the action box" % target.tolist()

        target.setflags(write=False)
        object.__setattr__(self, 'target', target)

        if self.punish is None:
            object.__setattr__(self, 'punish', lambda user, profiles: punishment(self.game, user, profiles))

    def __call__(self, profiles) -> Union[float, np.ndarray]:
        profiles, single = _as_profiles(profiles)

        deviating = profiles != self.target
        counts = deviating.sum(axis=1)

        levels = np.full(len(profiles), self.game.lower_intervention)
        for user in range(self.game.num_users):
            rows = (counts == 1) & deviating[:, user]
            if np.any(rows):
                levels[rows] = self.punish(user, profiles[rows])

        return float(levels[0]) if single else levels

def extreme_rule(game : ContinuousGame, target, punish : Punishment = None) -> ExtremeRule:
    return ExtremeRule(game, target, punish)

@dataclass(frozen=True, eq=False)
class AffineRule:
    """Intervention level `rates . (a - target) + lower`, clamped to
    [lower, upper].
    """

    target : np.ndarray
    rates : np.ndarray
    lower : float
    upper : float

    def __post_init__(self):
        target = np.array(self.target, dtype=float)
        rates = np.array(self.rates, dtype=float)
        assert target.shape == rates.shape and target.ndim == 1, "Target and rates need one entry per user"
        assert self.lower <= self.upper, "Intervention bounds are reversed"

        target.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, 'target', target)
        object.__setattr__(self, 'rates', rates)

    def __call__(self, profiles) -> Union[float, np.ndarray]:
        profiles, single = _as_profiles(profiles)
        levels = np.clip((profiles - self.target) @ self.rates + self.lower, self.lower, self.upper)
        return float(levels[0]) if single else levels

@dataclass(frozen=True, eq=False)
class TabulatedRule:
    """An arbitrary rule given by its value at each point of a profile grid.
    Profiles off the grid use the nearest grid point.
    """

    grids : Tuple[np.ndarray, ...]
    values : np.ndarray

    def __post_init__(self):
        grids = tuple(np.array(g, dtype=float) for g in self.grids)
        values = np.array(self.values, dtype=float)
        assert values.shape == tuple(len(g) for g in grids), \
            "Table of shape %s does not match grid sizes %s" % (values.shape, tuple(len(g) for g in grids))

        object.__setattr__(self, 'grids', grids)
        object.__setattr__(self, 'values', values)

    def __call__(self, profiles) -> Union[float, np.ndarray]:
        profiles, single = _as_profiles(profiles)
        index = tuple(
            np.abs(profiles[:, user, np.newaxis] - grid[np.newaxis, :]).argmin(axis=1)
            for user, grid in enumerate(self.grids)
        )
        levels = self.values[index]
        return float(levels[0]) if single else levels

@dataclass(frozen=True, eq=False)
class GridDeviationOracle:
    """Best punished deviation payoff found on a uniform grid over the
    deviator's interval, optionally refined by golden-section search around
    the best grid point.
    """

    game : ContinuousGame
    punish : Optional[Punishment] = None
    points : int = DEFAULT_ORACLE_POINTS
    refine : bool = True

    def __post_init__(self):
        assert self.points >= 2, "A deviation grid needs at least two points"
        if self.punish is None:
            object.__setattr__(self, 'punish', lambda user, profiles: punishment(self.game, user, profiles))

    def _value(self, user : int, profiles : np.ndarray) -> np.ndarray:
        return self.game.payoff(user, self.punish(user, profiles), profiles)

    def __call__(self, user : int, profiles) -> np.ndarray:
        profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
        lo, hi = self.game.user_intervals[user]
        grid = uniform_grid(lo, hi, self.points)

        best = np.empty(len(profiles))
        for start in range(0, len(profiles), ORACLE_BLOCK):
            block = profiles[start:start + ORACLE_BLOCK]
            rows = np.arange(len(block))

            trial = np.repeat(block, self.points, axis=0)
            trial[:, user] = np.tile(grid, len(block))
            values = self._value(user, trial).reshape(len(block), self.points)

            k = values.argmax(axis=1)
            found = values[rows, k]

            if self.refine:
                def deviation_value(x):
                    moved = block.copy()
                    moved[:, user] = x
                    return self._value(user, moved)

                _, refined = golden_section_max(
                    deviation_value,
                    grid[np.maximum(k - 1, 0)],
                    grid[np.minimum(k + 1, self.points - 1)],
                )
                found = np.maximum(found, refined)

            best[start:start + len(block)] = found

        return best

def in_E_star(
    game : ContinuousGame,
    profile,
    deviation_oracle : DeviationOracle = None,
    tolerance : float = MEMBERSHIP_TOLERANCE,
) -> Union[bool, np.ndarray]:
    """True where a profile is sustained by its own extreme rule: no user
    can beat its no-intervention payoff with a punished deviation.
    Accepts one profile or an array of profiles.
    """

    oracle = deviation_oracle if deviation_oracle is not None else GridDeviationOracle(game)
    profiles, single = _as_profiles(profile)

    member = np.ones(len(profiles), dtype=bool)
    for user in range(game.num_users):
        rows = np.flatnonzero(member)
        if rows.size == 0:
            break

        quiet = game.payoff(user, game.lower_intervention, profiles[rows])
        member[rows] = quiet >= oracle(user, profiles[rows]) - tolerance

    return bool(member[0]) if single else member

def max_deviation_gain(game : ContinuousGame, rule : Callable, profile, points : int = DEFAULT_ORACLE_POINTS) -> float:
    """Largest gain any user makes by a unilateral deviation to a point of a
    uniform grid, when the device follows `rule`. Non-positive means the
    profile is sustained, up to the grid.
    """

    profile = np.asarray(profile, dtype=float)
    gain = float("-inf")

    for user in range(game.num_users):
        current = float(game.payoff(user, rule(profile), profile))

        lo, hi = game.user_intervals[user]
        trial = np.tile(profile, (points, 1))
        trial[:, user] = uniform_grid(lo, hi, points)

        values = game.payoff(user, rule(trial), trial)
        gain = max(gain, float(np.max(values)) - current)

    return gain

@dataclass(frozen=True)
class PerfectEquilibrium:
    """An extreme rule, the profile it sustains, and the manager's payoff.
    `fallback` is set when no grid profile passed the membership test and
    the best pure Nash equilibrium without intervention was returned
    instead.
    """

    rule : ExtremeRule
    profile : np.ndarray
    value : float
    fallback : bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": [float(x) for x in self.profile],
            "value": self.value,
            "fallback": self.fallback,
        }

def _grid_points(game : ContinuousGame, profile_grid_step : Optional[float]) -> int:
    if profile_grid_step is None:
        return default_grid_points(game.num_users)

    assert profile_grid_step > 0, "Profile grid step must be positive"
    return max(2, int(round(1 / profile_grid_step)) + 1)

def _directions(num_users : int) -> np.ndarray:
    return np.array([d for d in itertools.product((-1, 0, 1), repeat=num_users) if any(d)], dtype=float)

def _unpunished_regret(game : ContinuousGame, profiles : np.ndarray) -> np.ndarray:
    unpunished = GridDeviationOracle(game, constant_punishment(game.lower_intervention))

    regret = np.zeros(len(profiles))
    for user in range(game.num_users):
        quiet = game.payoff(user, game.lower_intervention, profiles)
        regret = np.maximum(regret, unpunished(user, profiles) - quiet)

    return regret

def _nash_without_intervention(game : ContinuousGame, profiles : np.ndarray, values : np.ndarray, spacing : np.ndarray) -> np.ndarray:
    """Start from the manager's best grid profile among those with the least
    regret when nobody is punished, then shrink the regret by pattern search
    until the profile is a pure Nash equilibrium up to the membership
    tolerance.
    """

    regret = _unpunished_regret(game, profiles)
    least = np.flatnonzero(regret <= regret.min() + MEMBERSHIP_TOLERANCE)
    k = int(least[np.argmax(values[least])])

    profile, current = profiles[k], float(regret[k])
    directions = _directions(game.num_users)

    scale = 0.5
    while current > MEMBERSHIP_TOLERANCE and scale * float(np.max(spacing)) >= REFINE_STOP:
        moves = profile + scale * directions * spacing
        moves = moves[game.contains(moves)]

        if len(moves) == 0:
            scale /= 2
            continue

        # ties within 1e-12 of the least regret go to the manager's best
        move_regret = _unpunished_regret(game, moves)
        near = np.flatnonzero(move_regret <= move_regret.min() + 1e-12)
        k = int(near[np.argmax(game.manager(game.lower_intervention, moves[near]))])

        if move_regret[k] < current:
            profile, current = moves[k], float(move_regret[k])
        else:
            scale /= 2

    return profile

def intervention_equilibrium(
    game : ContinuousGame,
    profile_grid_step : float = None,
    deviation_oracle : DeviationOracle = None,
    punish : Punishment = None,
) -> PerfectEquilibrium:
    """Best profile for the manager among those sustained by their own
    extreme rule.

    Profiles on a grid (step given as a fraction of each user's interval;
    61 points per user for up to two users, 21 for three) are tried in
    decreasing order of the manager's payoff, ties in lexicographic order.
    The first member is then improved by a pattern search over moves in
    every direction of {-1, 0, 1}^N, halving the move size down to 1e-6.
    Moves must pass membership with no tolerance.

    When no grid profile is a member, the best pure Nash equilibrium
    without intervention is returned, flagged as a fallback.
    """

    oracle = deviation_oracle if deviation_oracle is not None else GridDeviationOracle(game, punish)

    points = _grid_points(game, profile_grid_step)
    profiles = product_grid(game.user_intervals, points)
    values = game.manager(game.lower_intervention, profiles)

    spacing = (game.upper_bounds - game.lower_bounds) / (points - 1)
    order = np.argsort(-values, kind="stable")

    best = None
    for start in range(0, len(order), ORACLE_BLOCK):
        block = order[start:start + ORACLE_BLOCK]
        members = np.flatnonzero(in_E_star(game, profiles[block], oracle))
        if members.size > 0:
            best = int(block[members[0]])
            break

    if best is None:
        logger.debug("No grid profile is sustainable, falling back to a Nash equilibrium without intervention")
        profile = _nash_without_intervention(game, profiles, values, spacing)
        value = float(game.manager(game.lower_intervention, profile))
        return PerfectEquilibrium(ExtremeRule(game, profile, punish), profile, value, fallback=True)

    profile = profiles[best]
    value = float(values[best])

    directions = _directions(game.num_users)

    scale = 0.5
    while scale * float(np.max(spacing)) >= REFINE_STOP:
        moves = profile + scale * directions * spacing
        moves = moves[game.contains(moves)]

        move_values = game.manager(game.lower_intervention, moves)
        improving = np.flatnonzero(move_values > value + 1e-12)

        improved = False
        if improving.size > 0:
            improving = improving[np.argsort(-move_values[improving], kind="stable")]
            members = np.flatnonzero(in_E_star(game, moves[improving], oracle, REFINE_TOLERANCE))
            if members.size > 0:
                k = improving[members[0]]
                profile, value = moves[k], float(move_values[k])
                improved = True

        if not improved:
            scale /= 2

    return PerfectEquilibrium(ExtremeRule(game, profile, punish), profile, value)

def _with_action(profile : np.ndarray, user : int, actions : np.ndarray) -> np.ndarray:
    """Copies of `profile`, one per entry of `actions`, with `user`'s action
    replaced
    """

    profiles = np.tile(profile, (len(actions), 1))
    profiles[:, user] = actions
    return profiles

def affine_rate(game : ContinuousGame, target, derivative_step : float = DERIVATIVE_STEP) -> np.ndarray:
    """Rates making each user's marginal gain from changing its action at
    the target exactly offset by the marginal loss from intervention.

    The own-action derivative is a central difference with step
    `derivative_step` times the interval length; the intervention
    derivative is a right difference with a tenth of that.
    """

    target = np.asarray(target, dtype=float)
    lower0, upper0 = game.intervention_interval

    assert target.shape == (game.num_users,), "Target needs one action per user"
    assert np.all((target > game.lower_bounds) & (target < game.upper_bounds)), \
        "Target %s must lie in the interior of every action interval" % target.tolist()
    assert upper0 > lower0, "Affine rates need an intervention interval of positive length"

    levels = uniform_grid(lower0, upper0, 21)
    h0 = derivative_step / 10 * (upper0 - lower0)

    rates = np.zeros(game.num_users)
    for user in range(game.num_users):
        lo, hi = game.user_intervals[user]
        h = derivative_step * (hi - lo)

        decline = np.diff(game.payoff(user, levels, np.tile(target, (len(levels), 1))))
        assert np.all(decline < 0), \
            "Payoff of user %d is not strictly decreasing in the intervention level at the target" % (user + 1)

        around = _with_action(target, user, np.array([target[user] - h, target[user] + h]))
        own = game.payoff(user, lower0, around)
        own_slope = (own[1] - own[0]) / (2 * h)

        slope0 = (float(game.payoff(user, lower0 + h0, target)) - float(game.payoff(user, lower0, target))) / h0
        assert abs(slope0) >= MIN_SLOPE, \
            "Payoff of user %d does not react to the intervention level at the target" % (user + 1)

        rate = -own_slope / slope0
        rates[user] = 0.0 if abs(rate) < RATE_SNAP else rate

    return rates

@dataclass(frozen=True)
class ConditionResult:
    """One second-order condition for one user, checked on samples of an
    open interval. `worst_margin` is the largest violation amount (positive
    means violated); None when the interval is empty.
    """

    user : int
    name : str
    lower : float
    upper : float
    passed : bool
    worst_margin : Optional[float]

    @property
    def empty(self) -> bool:
        return self.lower >= self.upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "user": self.user + 1,
            "name": self.name,
            "lower": self.lower,
            "upper": self.upper,
            "empty": self.empty,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
        }

@dataclass(frozen=True)
class AffineReport:

    conditions : Tuple[ConditionResult, ...]
    deviation_gain : float
    tolerance : float

    @property
    def conditions_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def deviation_passed(self) -> bool:
        return self.deviation_gain <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.conditions_passed and self.deviation_passed

    @property
    def flagged(self) -> Tuple[ConditionResult, ...]:
        """Conditions whose interval, as bounded, is empty
        """
        return tuple(c for c in self.conditions if c.empty)

    def condition(self, user : int, name : str) -> ConditionResult:
        for c in self.conditions:
            if c.user == user and c.name == name:
                return c
        raise KeyError("No condition %s for user %d" % (name, user + 1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "conditions": [c.to_dict() for c in self.conditions],
            "deviation_gain": self.deviation_gain,
            "passed": self.passed,
        }

@dataclass
class _Derivatives:
    """Finite-difference derivatives of one user's payoff along one action
    coordinate, with all other users at the target.
    """

    game : ContinuousGame
    user : int
    target : np.ndarray
    h : float = field(init=False)
    h0 : float = field(init=False)

    def __post_init__(self):
        lo, hi = self.game.user_intervals[self.user]
        lower0, upper0 = self.game.intervention_interval
        self.h = SECOND_DERIVATIVE_STEP * (hi - lo)
        self.h0 = SECOND_DERIVATIVE_STEP * (upper0 - lower0 if upper0 > lower0 else 1.0)

    def _u(self, levels, actions) -> np.ndarray:
        return self.game.payoff(self.user, levels, _with_action(self.target, self.user, actions))

    def own_slope(self, level : float, actions : np.ndarray) -> np.ndarray:
        h = self.h
        return (self._u(level, actions + h) - self._u(level, actions - h)) / (2 * h)

    def own_curvature(self, levels, actions : np.ndarray) -> np.ndarray:
        h = self.h
        return (self._u(levels, actions + h) - 2 * self._u(levels, actions) + self._u(levels, actions - h)) / (h * h)

    def level_curvature(self, levels : np.ndarray, actions : np.ndarray) -> np.ndarray:
        h0 = self.h0
        return (self._u(levels + h0, actions) - 2 * self._u(levels, actions) + self._u(levels - h0, actions)) / (h0 * h0)

    def cross(self, levels : np.ndarray, actions : np.ndarray) -> np.ndarray:
        h, h0 = self.h, self.h0
        return (
            self._u(levels + h0, actions + h) - self._u(levels - h0, actions + h)
            - self._u(levels + h0, actions - h) + self._u(levels - h0, actions - h)
        ) / (4 * h * h0)

def affine_sustains_check(
    game : ContinuousGame,
    target,
    rates,
    derivative_step : float = DERIVATIVE_STEP,
    samples : int = CONDITION_SAMPLES,
    deviation_points : int = DEFAULT_ORACLE_POINTS,
    tolerance : float = CONDITION_TOLERANCE,
) -> AffineReport:
    """Check the second-order conditions under which the affine rule with
    `rates` sustains `target`, on `samples` points of each interval, and
    independently scan unilateral deviations under that rule.

    Conditions depend on the sign of each user's rate. Intervals are used
    exactly as bounded; an interval whose lower bound is not below its
    upper bound is empty, passes trivially and is listed in `flagged`.
    """

    target = np.asarray(target, dtype=float)
    rates = np.asarray(rates, dtype=float)
    lower0, upper0 = game.intervention_interval

    assert target.shape == (game.num_users,) and rates.shape == target.shape, \
        "Target and rates need one entry per user"
    assert derivative_step > 0, "Derivative step must be positive"

    conditions = []

    def record(user, name, lower, upper, evaluate, sign=1.0):
        xs = open_interval_samples(lower, upper, samples)
        if xs.size == 0:
            conditions.append(ConditionResult(user, name, float(lower), float(upper), True, None))
            return
        worst = float(np.max(sign * evaluate(xs)))
        conditions.append(ConditionResult(user, name, float(lower), float(upper), worst <= tolerance, worst))

    for user in range(game.num_users):
        lo, hi = game.user_intervals[user]
        a_star = target[user]
        c = rates[user]
        d = _Derivatives(game, user, target)

        def ray_curvature(xs, c=c, d=d, a_star=a_star):
            levels = c * (xs - a_star) + lower0
            return c * c * d.level_curvature(levels, xs) + 2 * c * d.cross(levels, xs) + d.own_curvature(levels, xs)

        def concave(xs, d=d):
            return d.own_curvature(lower0, xs)

        def slope_at_full(xs, d=d):
            return d.own_slope(upper0, xs)

        if c == 0:
            record(user, "concave", lo, hi, concave)
        elif c > 0:
            reach = a_star + (upper0 - lower0) / c
            record(user, "concave_below_target", lo, a_star, concave)
            record(user, "ray_curvature", a_star, min(hi, reach), ray_curvature)
            record(user, "decreasing_at_full_intervention", reach, hi, slope_at_full)
        else:
            reach = a_star + (upper0 - lower0) / c
            record(user, "increasing_at_full_intervention", lo, reach, slope_at_full, sign=-1.0)
            record(user, "ray_curvature", max(hi, reach), a_star, ray_curvature)
            record(user, "concave_above_target", a_star, hi, concave)

    rule = AffineRule(target, rates, lower0, upper0)
    gain = max_deviation_gain(game, rule, target, deviation_points)

    return AffineReport(tuple(conditions), gain, tolerance)

def corollary1_check(
    game : ContinuousGame,
    profile_grid_step : float = None,
    deviation_oracle : DeviationOracle = None,
    profile = None,
) -> bool:
    """True if some maximiser of the manager's payoff without intervention
    is sustained by its extreme rule, in which case intervention achieves
    the best feasible performance.

    Maximisers are taken from the profile grid unless `profile` is given.
    """

    oracle = deviation_oracle if deviation_oracle is not None else GridDeviationOracle(game)

    if profile is not None:
        candidates = np.atleast_2d(np.asarray(profile, dtype=float))
    else:
        profiles = product_grid(game.user_intervals, _grid_points(game, profile_grid_step))
        values = game.manager(game.lower_intervention, profiles)
        top = float(np.max(values))
        candidates = profiles[values >= top - 1e-12 * max(1.0, abs(top))]

    return bool(np.any(in_E_star(game, candidates, oracle)))
