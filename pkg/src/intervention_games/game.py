import itertools

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .profile import MixedProfile, as_distribution
from .nash import NormalFormGame, verify_nash

DEFAULT_SUSTAIN_TOLERANCE = 1e-9

# Index of the manager in payoff tensors; users are 1..N
MANAGER = 0

ActionLabel = Union[str, int]

def _assert_unique(labels : Sequence[str], what : str):
    assert len(labels) >= 1, "%s must not be empty" % what
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    assert not duplicates, "%s contain duplicates: %s" % (what, ", ".join(duplicates))

@dataclass(frozen=True, eq=False)
class FiniteInterventionGame:
    """A finite intervention game with imperfect monitoring.

    `signal_dist` has shape (*action_counts, num_signals) and holds the
    signal distribution for each pure user profile. `payoffs` has shape
    (num_users + 1, num_intervention_actions, *action_counts, num_signals);
    index 0 on the first axis is the manager.

    `no_intervention_action` names the intervention action the manager
    uses when not intervening, if the game declares one.
    """

    user_actions : Tuple[Tuple[str, ...], ...]
    intervention_actions : Tuple[str, ...]
    signals : Tuple[str, ...]
    signal_dist : np.ndarray
    payoffs : np.ndarray

    no_intervention_action : Optional[str] = None

    def __post_init__(self):
        user_actions = tuple(tuple(str(a) for a in actions) for actions in self.user_actions)
        intervention_actions = tuple(str(a) for a in self.intervention_actions)
        signals = tuple(str(s) for s in self.signals)

        assert len(user_actions) >= 1, "A game needs at least one user"
        for user, actions in enumerate(user_actions):
            _assert_unique(list(actions), "Actions of user %d" % (user + 1))
        _assert_unique(list(intervention_actions), "Intervention actions")
        _assert_unique(list(signals), "Signals")

        counts = tuple(len(actions) for actions in user_actions)

        signal_dist = np.array(self.signal_dist, dtype=float)
        assert signal_dist.shape == counts + (len(signals),), \
            "Signal distribution has shape %s, expected %s" % (signal_dist.shape, counts + (len(signals),))

        rows = signal_dist.reshape(-1, len(signals))
        for index, row in zip(itertools.product(*(range(c) for c in counts)), rows):
            label = ",".join(user_actions[user][k] for user, k in enumerate(index))
            row[:] = as_distribution(row, len(signals), "Signal distribution for profile %s" % label)

        payoffs = np.array(self.payoffs, dtype=float)
        expected = (len(user_actions) + 1, len(intervention_actions)) + counts + (len(signals),)
        assert payoffs.shape == expected, "Payoffs have shape %s, expected %s" % (payoffs.shape, expected)
        assert np.all(np.isfinite(payoffs)), "Payoffs must be finite"

        if self.no_intervention_action is not None:
            assert str(self.no_intervention_action) in intervention_actions, \
                "No-intervention action %s is not an intervention action" % self.no_intervention_action

        signal_dist.setflags(write=False)
        payoffs.setflags(write=False)

        object.__setattr__(self, 'user_actions', user_actions)
        object.__setattr__(self, 'intervention_actions', intervention_actions)
        object.__setattr__(self, 'signals', signals)
        object.__setattr__(self, 'signal_dist', signal_dist)
        object.__setattr__(self, 'payoffs', payoffs)

    @classmethod
    def from_mappings(
        cls,
        user_actions : Sequence[Sequence[str]],
        intervention_actions : Sequence[str],
        signals : Sequence[str],
        signal_dist : Mapping[Tuple[str, ...], Sequence[float]],
        payoffs : Mapping[Tuple[str, Tuple[str, ...], str], Sequence[float]],
        no_intervention_action : str = None,
    ) -> "FiniteInterventionGame":
        """Build the dense tensors from label-keyed mappings. Every pure
        profile needs a signal distribution and every (intervention action,
        profile, signal) triple needs a payoff vector.
        """

        counts = tuple(len(actions) for actions in user_actions)
        num_participants = len(user_actions) + 1

        dist = np.zeros(counts + (len(signals),))
        values = np.zeros((num_participants, len(intervention_actions)) + counts + (len(signals),))

        for index in itertools.product(*(range(c) for c in counts)):
            profile = tuple(user_actions[user][k] for user, k in enumerate(index))

            assert profile in signal_dist, "Missing signal distribution for profile %s" % ",".join(profile)
            dist[index] = signal_dist[profile]

            for a0, action in enumerate(intervention_actions):
                for y, signal in enumerate(signals):
                    key = (action, profile, signal)
                    assert key in payoffs, "Missing payoffs for (%s, %s, %s)" % (action, ",".join(profile), signal)

                    vector = payoffs[key]
                    assert len(vector) == num_participants, \
                        "Payoffs for (%s, %s, %s) need %d entries" % (action, ",".join(profile), signal, num_participants)

                    values[(slice(None), a0) + index + (y,)] = vector

        return cls(
            tuple(tuple(actions) for actions in user_actions),
            tuple(intervention_actions),
            tuple(signals),
            dist,
            values,
            no_intervention_action,
        )

    @property
    def num_users(self) -> int:
        return len(self.user_actions)

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(len(actions) for actions in self.user_actions)

    @property
    def num_intervention_actions(self) -> int:
        return len(self.intervention_actions)

    @property
    def num_signals(self) -> int:
        return len(self.signals)

    def user_action_index(self, user : int, action : ActionLabel) -> int:
        """Index of `action` (a label, or an index that is range checked)
        for zero-based `user`.
        """

        actions = self.user_actions[user]
        if isinstance(action, (int, np.integer)):
            assert 0 <= action < len(actions), "Action index %d out of range for user %d" % (action, user + 1)
            return int(action)

        assert action in actions, "Unknown action %s for user %d" % (action, user + 1)
        return actions.index(action)

    def profile_indices(self, profile : Sequence[ActionLabel]) -> Tuple[int, ...]:
        assert len(profile) == self.num_users, \
            "Profile has %d actions, game has %d users" % (len(profile), self.num_users)
        return tuple(self.user_action_index(user, action) for user, action in enumerate(profile))

    def intervention_index(self, action : ActionLabel) -> int:
        if isinstance(action, (int, np.integer)):
            assert 0 <= action < self.num_intervention_actions, "Intervention action index %d out of range" % action
            return int(action)

        assert action in self.intervention_actions, "Unknown intervention action %s" % action
        return self.intervention_actions.index(action)

    def signal_index(self, signal : ActionLabel) -> int:
        if isinstance(signal, (int, np.integer)):
            assert 0 <= signal < self.num_signals, "Signal index %d out of range" % signal
            return int(signal)

        assert signal in self.signals, "Unknown signal %s" % signal
        return self.signals.index(signal)

    def has_full_support(self) -> bool:
        """True if every signal has positive probability under every pure
        profile
        """

        return bool(np.all(self.signal_dist > 0))

@dataclass(frozen=True, eq=False)
class FiniteInterventionRule:
    """Distribution over intervention actions for each signal.
    `per_signal[y, a0]` is the probability of intervention action a0
    after signal y.
    """

    per_signal : np.ndarray

    def __post_init__(self):
        per_signal = np.array(self.per_signal, dtype=float)
        assert per_signal.ndim == 2 and per_signal.shape[0] >= 1, \
            "A rule needs one distribution per signal"

        per_signal = np.array([
            as_distribution(row, per_signal.shape[1], "Rule distribution for signal %d" % (y + 1))
            for y, row in enumerate(per_signal)
        ])
        per_signal.setflags(write=False)

        object.__setattr__(self, 'per_signal', per_signal)

    @classmethod
    def degenerate(cls, game : FiniteInterventionGame, action : ActionLabel) -> "FiniteInterventionRule":
        """Rule that takes `action` after every signal
        """

        per_signal = np.zeros((game.num_signals, game.num_intervention_actions))
        per_signal[:, game.intervention_index(action)] = 1.0
        return cls(per_signal)

    @classmethod
    def from_mapping(cls, game : FiniteInterventionGame, mapping : Mapping[str, Mapping[str, float]]) -> "FiniteInterventionRule":
        """Build a rule from {signal: {intervention action: probability}}.
        Actions left out of a signal's mapping get probability 0.
        """

        per_signal = np.zeros((game.num_signals, game.num_intervention_actions))

        for signal in game.signals:
            assert signal in mapping, "Rule does not cover signal %s" % signal

        for signal, distribution in mapping.items():
            y = game.signal_index(signal)
            for action, probability in distribution.items():
                per_signal[y, game.intervention_index(action)] = probability

        return cls(per_signal)

    @property
    def num_signals(self) -> int:
        return self.per_signal.shape[0]

    @property
    def num_actions(self) -> int:
        return self.per_signal.shape[1]

    @property
    def key(self) -> Tuple[float, ...]:
        return tuple(float(x) for x in self.per_signal.ravel())

    def fits(self, game : FiniteInterventionGame) -> bool:
        return self.per_signal.shape == (game.num_signals, game.num_intervention_actions)

    def mix(self, other : "FiniteInterventionRule", weight : float) -> "FiniteInterventionRule":
        """Per-signal mixture `weight * self + (1 - weight) * other`
        """

        assert 0 <= weight <= 1, "Mixture weight must be in [0, 1]"
        assert self.per_signal.shape == other.per_signal.shape, "Rules are over different signal/action sets"
        return FiniteInterventionRule(weight * self.per_signal + (1 - weight) * other.per_signal)

    def to_dict(self, game : FiniteInterventionGame) -> Dict[str, Dict[str, float]]:
        assert self.fits(game), "Rule does not fit game"
        return {
            signal: {
                action: float(self.per_signal[y, a0])
                for a0, action in enumerate(game.intervention_actions)
            }
            for y, signal in enumerate(game.signals)
        }

    def __eq__(self, other):
        if not isinstance(other, FiniteInterventionRule):
            return NotImplemented
        return self.per_signal.shape == other.per_signal.shape and self.key == other.key

    def __hash__(self):
        return hash(self.key)

def _check_participant(game : FiniteInterventionGame, who : int):
    assert 0 <= who <= game.num_users, "Participant index %d out of range 0..%d" % (who, game.num_users)

def _check_rule(game : FiniteInterventionGame, rule : FiniteInterventionRule):
    assert rule.fits(game), \
        "Rule of shape %s does not fit game with %d signals and %d intervention actions" % (
            rule.per_signal.shape, game.num_signals, game.num_intervention_actions
        )

def ex_ante_tensor(game : FiniteInterventionGame, rule : FiniteInterventionRule) -> np.ndarray:
    """Ex-ante payoffs of all participants at every pure user profile, as an
    array of shape (num_users + 1, *action_counts).
    """

    _check_rule(game, rule)

    weighted = game.payoffs * game.signal_dist[np.newaxis, np.newaxis]
    return np.tensordot(weighted, rule.per_signal, axes=([1, weighted.ndim - 1], [1, 0]))

def ex_ante_payoff(game : FiniteInterventionGame, rule : FiniteInterventionRule, profile : Sequence[ActionLabel], who : int) -> float:
    """Ex-ante payoff of participant `who` (0 is the manager) when users
    play the pure `profile`: the sum over signals and intervention actions
    of payoff times rule probability times signal probability.
    """

    _check_participant(game, who)
    _check_rule(game, rule)

    index = game.profile_indices(profile)

    payoffs = game.payoffs[(who, slice(None)) + index]  # (actions, signals)
    signal_probabilities = game.signal_dist[index]

    return float(np.einsum('ay,ya,y->', payoffs, rule.per_signal, signal_probabilities))

def mixed_ex_ante_payoff(game : FiniteInterventionGame, rule : FiniteInterventionRule, profile : MixedProfile, who : int) -> float:
    _check_participant(game, who)
    assert profile.action_counts == game.action_counts, \
        "Profile over %s actions does not fit game with %s actions" % (profile.action_counts, game.action_counts)

    return float(profile.expectation(ex_ante_tensor(game, rule)[who]))

def induced_game(game : FiniteInterventionGame, rule : FiniteInterventionRule) -> Tuple[NormalFormGame, np.ndarray]:
    """The users' simultaneous game under `rule`, plus the manager's payoff
    tensor over the same pure profiles.
    """

    tensor = ex_ante_tensor(game, rule)
    return NormalFormGame(tensor[1:]), tensor[MANAGER]

def sustains(
    game : FiniteInterventionGame,
    rule : FiniteInterventionRule,
    profile : MixedProfile,
    tolerance : float = DEFAULT_SUSTAIN_TOLERANCE,
) -> bool:
    """True if `profile` is a Nash equilibrium of the game induced by `rule`,
    up to `tolerance`.
    """

    assert tolerance >= 0, "Tolerance must be non-negative"
    assert profile.action_counts == game.action_counts, \
        "Profile over %s actions does not fit game with %s actions" % (profile.action_counts, game.action_counts)

    users, _ = induced_game(game, rule)
    return verify_nash(users, profile, tolerance)
