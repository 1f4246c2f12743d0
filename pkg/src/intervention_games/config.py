import os
import json

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .game import FiniteInterventionGame

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3

THREADS_VARIABLE = "INTERVENTION_GAMES_THREADS"

class ConsistencyError(Exception):
    """A solver result contradicts a property that must hold for the game,
    such as an equilibrium value above the best feasible value.
    """

class GameKeys:
    """Keys of a game document
    """

    # Optional: checked against the length of `user actions`
    NUM_USERS = "num_users"

    # List of action label lists, one per user
    USER_ACTIONS = "user_actions"

    # List of intervention action labels
    INTERVENTION_ACTIONS = "intervention_actions"

    # List of signal labels
    SIGNALS = "signals"

    # Profile key -> list of probabilities, one per signal
    SIGNAL_DIST = "signal_dist"

    # Payoff key -> list of payoffs, manager first
    PAYOFFS = "payoffs"

    # Optional: the intervention action meaning "do not intervene"
    NO_INTERVENTION_ACTION = "no_intervention_action"

class KeyFormat:
    """Text keys used in the signal distribution and payoff mappings
    """

    PROFILE_SEPARATOR = ","
    PAYOFF_SEPARATOR = "|"

    @classmethod
    def profile(cls, labels : Sequence[str]) -> str:
        return cls.PROFILE_SEPARATOR.join(labels)

    @classmethod
    def payoff(cls, action : str, labels : Sequence[str], signal : str) -> str:
        return cls.PAYOFF_SEPARATOR.join([action, cls.profile(labels), signal])

def _labels(value : Any, key : str) -> List[str]:
    assert isinstance(value, list) and len(value) > 0, "`%s` must be a non-empty list" % key
    for label in value:
        assert isinstance(label, str) and label, "`%s` must only contain non-empty strings" % key
        assert KeyFormat.PROFILE_SEPARATOR not in label and KeyFormat.PAYOFF_SEPARATOR not in label, \
            "Label `%s` in `%s` may not contain `%s` or `%s`" % (
                label, key, KeyFormat.PROFILE_SEPARATOR, KeyFormat.PAYOFF_SEPARATOR
            )
    return list(value)

def _reals(value : Any, key : str) -> List[float]:
    assert isinstance(value, list) and len(value) > 0, "`%s` must be a non-empty list of numbers" % key
    for v in value:
        assert isinstance(v, (int, float)) and not isinstance(v, bool), "`%s` must only contain numbers" % key
    return [float(v) for v in value]

def parse_game(document : Mapping[str, Any]) -> FiniteInterventionGame:
    """Build a game from a parsed game document. Every problem is reported
    as an `AssertionError` naming the offending key.
    """

    assert isinstance(document, Mapping), "A game document must be a JSON object"

    for key in (GameKeys.USER_ACTIONS, GameKeys.INTERVENTION_ACTIONS, GameKeys.SIGNALS, GameKeys.SIGNAL_DIST, GameKeys.PAYOFFS):
        assert key in document, "Missing key `%s`" % key

    users = document[GameKeys.USER_ACTIONS]
    assert isinstance(users, list) and len(users) > 0, "`%s` must be a non-empty list" % GameKeys.USER_ACTIONS
    user_actions = [_labels(actions, GameKeys.USER_ACTIONS) for actions in users]

    if GameKeys.NUM_USERS in document:
        assert document[GameKeys.NUM_USERS] == len(user_actions), \
            "`%s` is %s but `%s` lists %d users" % (
                GameKeys.NUM_USERS, document[GameKeys.NUM_USERS], GameKeys.USER_ACTIONS, len(user_actions)
            )

    intervention_actions = _labels(document[GameKeys.INTERVENTION_ACTIONS], GameKeys.INTERVENTION_ACTIONS)
    signals = _labels(document[GameKeys.SIGNALS], GameKeys.SIGNALS)

    raw_dist = document[GameKeys.SIGNAL_DIST]
    assert isinstance(raw_dist, Mapping), "`%s` must be an object" % GameKeys.SIGNAL_DIST

    signal_dist = {}
    for key, probabilities in raw_dist.items():
        profile = tuple(key.split(KeyFormat.PROFILE_SEPARATOR))
        where = "%s[%s]" % (GameKeys.SIGNAL_DIST, key)
        assert len(profile) == len(user_actions), "`%s` names %d actions for %d users" % (where, len(profile), len(user_actions))
        for user, action in enumerate(profile):
            assert action in user_actions[user], "`%s` names unknown action `%s` for user %d" % (where, action, user + 1)

        values = _reals(probabilities, where)
        assert len(values) == len(signals), "`%s` needs %d probabilities" % (where, len(signals))
        assert all(v >= 0 for v in values) and abs(sum(values) - 1) <= 1e-9, \
            "`%s` is not a probability distribution" % where
        signal_dist[profile] = values

    raw_payoffs = document[GameKeys.PAYOFFS]
    assert isinstance(raw_payoffs, Mapping), "`%s` must be an object" % GameKeys.PAYOFFS

    payoffs = {}
    for key, values in raw_payoffs.items():
        where = "%s[%s]" % (GameKeys.PAYOFFS, key)
        parts = key.split(KeyFormat.PAYOFF_SEPARATOR)
        assert len(parts) == 3, "`%s` must have the form action|profile|signal" % where

        action, profile, signal = parts[0], tuple(parts[1].split(KeyFormat.PROFILE_SEPARATOR)), parts[2]
        assert action in intervention_actions, "`%s` names unknown intervention action `%s`" % (where, action)
        assert signal in signals, "`%s` names unknown signal `%s`" % (where, signal)
        assert len(profile) == len(user_actions), "`%s` names %d actions for %d users" % (where, len(profile), len(user_actions))
        for user, a in enumerate(profile):
            assert a in user_actions[user], "`%s` names unknown action `%s` for user %d" % (where, a, user + 1)

        payoffs[(action, profile, signal)] = _reals(values, where)

    no_intervention = document.get(GameKeys.NO_INTERVENTION_ACTION)
    if no_intervention is not None:
        assert no_intervention in intervention_actions, \
            "`%s` names unknown intervention action `%s`" % (GameKeys.NO_INTERVENTION_ACTION, no_intervention)

    return FiniteInterventionGame.from_mappings(
        user_actions, intervention_actions, signals, signal_dist, payoffs, no_intervention
    )

def load_game(path : str) -> FiniteInterventionGame:
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    return parse_game(document)

def game_to_document(game : FiniteInterventionGame) -> Dict[str, Any]:
    """The game document `parse_game` reads back into `game`
    """

    signal_dist = {}
    payoffs = {}

    for index in np.ndindex(*game.action_counts):
        labels = [game.user_actions[user][k] for user, k in enumerate(index)]
        signal_dist[KeyFormat.profile(labels)] = [float(v) for v in game.signal_dist[index]]

        for a0, action in enumerate(game.intervention_actions):
            for y, signal in enumerate(game.signals):
                vector = game.payoffs[(slice(None), a0) + index + (y,)]
                payoffs[KeyFormat.payoff(action, labels, signal)] = [float(v) for v in vector]

    document = {
        GameKeys.NUM_USERS: game.num_users,
        GameKeys.USER_ACTIONS: [list(actions) for actions in game.user_actions],
        GameKeys.INTERVENTION_ACTIONS: list(game.intervention_actions),
        GameKeys.SIGNALS: list(game.signals),
        GameKeys.SIGNAL_DIST: signal_dist,
        GameKeys.PAYOFFS: payoffs,
    }
    if game.no_intervention_action is not None:
        document[GameKeys.NO_INTERVENTION_ACTION] = game.no_intervention_action

    return document

def parse_param(text : str) -> Dict[str, float]:
    """Parse a `key=value` override with a real value
    """

    assert "=" in text, "Parameter `%s` must have the form key=value" % text
    key, value = (part.strip() for part in text.split("=", 1))
    assert key, "Parameter `%s` has an empty key" % text

    try:
        number = float(value)
    except ValueError:
        raise AssertionError("Parameter `%s` must have a numeric value, got `%s`" % (key, value))

    assert np.isfinite(number), "Parameter `%s` must be finite" % key
    return {key: number}

def parse_params(texts : Optional[Sequence[str]], allowed : Sequence[str]) -> Dict[str, float]:
    params = {}
    for text in texts or ():
        params.update(parse_param(text))

    for key in params:
        assert key in allowed, "Unknown parameter `%s`; expected one of %s" % (key, ", ".join(allowed))

    return params

def thread_count() -> int:
    value = os.environ.get(THREADS_VARIABLE)
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise AssertionError("%s must be an integer, got `%s`" % (THREADS_VARIABLE, value))
        assert threads >= 1, "%s must be at least 1" % THREADS_VARIABLE
        return threads

    return os.cpu_count() or 1

@dataclass
class RunConfig:
    """Settings for one command run
    """

    command : str
    output_directory : str

    input_path : Optional[str] = None
    params : Dict[str, float] = field(default_factory=dict)

    grid_step : Optional[float] = None
    rule_step : Optional[float] = None
    tolerance : float = 1e-9

    symmetric : bool = False
    workbook : Optional[str] = None
    workers : int = 1

    def __post_init__(self):
        if self.grid_step is not None:
            assert self.grid_step > 0, "--grid-step must be positive, got %s" % self.grid_step
        if self.rule_step is not None:
            assert 0 < self.rule_step <= 1, "--rule-step must be in (0, 1], got %s" % self.rule_step
        assert self.tolerance >= 0, "--tol must be non-negative, got %s" % self.tolerance
        assert self.workers >= 1, "Worker count must be at least 1"

        if self.workbook is not None:
            assert self.workbook.endswith(".xlsx"), "--xlsx must name an .xlsx file, got %s" % self.workbook

        os.makedirs(self.output_directory, exist_ok=True)
        assert os.path.isdir(self.output_directory), "Output directory %s is not a directory" % self.output_directory
        assert os.access(self.output_directory, os.W_OK), "Output directory %s is not writable" % self.output_directory

    def output_path(self, filename : str) -> str:
        return os.path.join(self.output_directory, filename)

@dataclass
class Action:
    """Used for logging command steps
    """

    name : str
    success : bool
    message : str

    exit_code : int = EXIT_OK

    def __str__(self):
        return "%s: %s - %s" % (
            self.name.capitalize(),
            "Success" if self.success else "Failed",
            self.message
        )

def exit_code(history : Sequence[Action]) -> int:
    return max((action.exit_code for action in history), default=EXIT_OK)
