import logging
import itertools

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from .profile import MixedProfile

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9

# Equilibria closer than this (L-infinity) are treated as the same
DUPLICATE_DISTANCE = 1e-7

# Indifference systems with a worse condition number are treated as singular
MAX_CONDITION = 1e12

@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """Payoff tensors of a simultaneous-move game. `payoffs[i]` is player
    i's payoff, indexed by one axis per player.
    """

    payoffs : np.ndarray

    def __post_init__(self):
        payoffs = np.array(self.payoffs, dtype=float)

        assert payoffs.ndim >= 2, "Payoffs need a player axis and at least one action axis"
        assert payoffs.shape[0] == payoffs.ndim - 1, \
            "Payoff array of shape %s does not hold one tensor per player" % (payoffs.shape,)
        assert all(count >= 1 for count in payoffs.shape[1:]), "Every player needs at least one action"
        assert np.all(np.isfinite(payoffs)), "Payoffs must be finite"

        payoffs.setflags(write=False)
        object.__setattr__(self, 'payoffs', payoffs)

    @property
    def num_players(self) -> int:
        return self.payoffs.shape[0]

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(self.payoffs.shape[1:])

    def action_values(self, player : int, profile : MixedProfile) -> np.ndarray:
        """Expected payoff of each of `player`'s pure actions when everybody
        else plays according to `profile`.
        """

        assert profile.action_counts == self.action_counts, \
            "Profile over %s actions does not fit game with %s actions" % (profile.action_counts, self.action_counts)

        result = np.moveaxis(self.payoffs[player], player, -1)
        for other, vector in enumerate(profile.per_user):
            if other != player:
                result = np.tensordot(vector, result, axes=([0], [0]))

        return result

    def value(self, player : int, profile : MixedProfile) -> float:
        return float(self.action_values(player, profile) @ profile.per_user[player])

    def regret(self, profile : MixedProfile) -> float:
        """Largest gain any player can make by a unilateral pure deviation
        """

        gains = []
        for player in range(self.num_players):
            values = self.action_values(player, profile)
            gains.append(float(np.max(values) - values @ profile.per_user[player]))

        return max(gains)

@dataclass(frozen=True)
class EquilibriumSet:
    """Nash equilibria found for a game, at tolerance `tolerance`.

    `skipped_supports` counts support pairs whose indifference system was
    singular; when it is positive the set may be incomplete.
    """

    profiles : Tuple[MixedProfile, ...]
    tolerance : float

    skipped_supports : int = 0

    @property
    def degenerate(self) -> bool:
        return self.skipped_supports > 0

    @property
    def is_empty(self) -> bool:
        return len(self.profiles) == 0

    @property
    def pure(self) -> Tuple[MixedProfile, ...]:
        return tuple(p for p in self.profiles if p.is_pure)

    @property
    def mixed(self) -> Tuple[MixedProfile, ...]:
        return tuple(p for p in self.profiles if not p.is_pure)

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self) -> Iterator[MixedProfile]:
        return iter(self.profiles)

def verify_nash(g : NormalFormGame, profile : MixedProfile, tolerance : float = DEFAULT_TOLERANCE) -> bool:
    """True if no player gains more than `tolerance` by a unilateral pure
    deviation. Pure deviations suffice because payoffs are multilinear.
    """

    assert tolerance >= 0, "Tolerance must be non-negative"
    return g.regret(profile) <= tolerance

def pure_nash(g : NormalFormGame, tolerance : float = DEFAULT_TOLERANCE) -> EquilibriumSet:
    """All pure-strategy equilibria, by exhaustive enumeration of the joint
    action space. Profiles come out in lexicographic order of action index.
    """

    assert tolerance >= 0, "Tolerance must be non-negative"

    stable = np.ones(g.action_counts, dtype=bool)
    for player in range(g.num_players):
        payoffs = g.payoffs[player]
        best = payoffs.max(axis=player, keepdims=True)
        stable &= payoffs >= best - tolerance

    profiles = tuple(
        MixedProfile.pure(g.action_counts, tuple(int(k) for k in index))
        for index in np.argwhere(stable)
    )

    return EquilibriumSet(profiles, tolerance)

def _indifference_system(payoffs : np.ndarray) -> np.ndarray:
    """Matrix of the system `payoffs @ x = v`, `sum(x) = 1` in the unknowns
    (x, v), for a square block of payoffs.
    """

    k = payoffs.shape[0]
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = payoffs
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    return system

def _solve_indifference(payoffs : np.ndarray) -> np.ndarray:
    system = _indifference_system(payoffs)
    right_hand_side = np.zeros(system.shape[0])
    right_hand_side[-1] = 1.0

    with np.errstate(divide="ignore", invalid="ignore"):
        condition = np.linalg.cond(system)

    if not condition <= MAX_CONDITION:
        return None

    try:
        solution = np.linalg.solve(system, right_hand_side)
    except np.linalg.LinAlgError:
        return None

    return solution[:-1]

def _deduplicate(profiles : Sequence[MixedProfile]) -> Tuple[MixedProfile, ...]:
    unique = []
    for profile in profiles:
        if all(profile.distance(seen) >= DUPLICATE_DISTANCE for seen in unique):
            unique.append(profile)
    return tuple(unique)

def mixed_nash_2p(g : NormalFormGame, tolerance : float = DEFAULT_TOLERANCE) -> EquilibriumSet:
    """All equilibria of a two-player game by support enumeration.

    Pure equilibria come first, then mixed equilibria ordered by support
    size and lexicographically by support. Equal-size support pairs whose
    indifference system is singular are skipped and counted.
    """

    assert g.num_players == 2, "Support enumeration needs exactly two players, got %d" % g.num_players
    assert tolerance >= 0, "Tolerance must be non-negative"

    rows, columns = g.action_counts
    row_payoffs, column_payoffs = g.payoffs

    found = list(pure_nash(g, tolerance).profiles)
    skipped = 0

    for size in range(2, min(rows, columns) + 1):
        logger.debug("Support enumeration for supports of size %d", size)

        for row_support, column_support in itertools.product(
            itertools.combinations(range(rows), size),
            itertools.combinations(range(columns), size),
        ):
            block = np.ix_(row_support, column_support)

            # the column player's mixture makes the row player indifferent,
            # and vice versa
            column_mix = _solve_indifference(row_payoffs[block])
            row_mix = _solve_indifference(column_payoffs[block].T)

            if column_mix is None or row_mix is None:
                logger.debug("Skipping singular support pair %s / %s", row_support, column_support)
                skipped += 1
                continue

            if np.any(row_mix < -tolerance) or np.any(column_mix < -tolerance):
                continue

            row_vector = np.zeros(rows)
            row_vector[list(row_support)] = np.clip(row_mix, 0.0, None)
            column_vector = np.zeros(columns)
            column_vector[list(column_support)] = np.clip(column_mix, 0.0, None)

            profile = MixedProfile((row_vector / row_vector.sum(), column_vector / column_vector.sum()))

            if verify_nash(g, profile, tolerance):
                found.append(profile)

    if skipped > 0:
        logger.debug("%d support pairs skipped as degenerate", skipped)

    return EquilibriumSet(_deduplicate(found), tolerance, skipped_supports=skipped)
