"""Two-user resource sharing with a gatekeeper intervention device that only
observes a noisy service quality.

Each user picks a low or high usage level. Quality is high with probability
p, q or r depending on whether zero, one or two users pick the high level.
Without intervention a user earns quality times usage; when the device
intervenes the service stops and every user earns nothing. The manager
earns the users' average payoff.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from .game import FiniteInterventionGame, FiniteInterventionRule
from .nash import NormalFormGame
from .report import Table

LOW = "a_L"
HIGH = "a_H"

QUALITY_HIGH = "y_high"
QUALITY_LOW = "y_low"

NOT_INTERVENE = "not_intervene"
INTERVENE = "intervene"

DEFAULT_ALPHA_STEP = 0.01

@dataclass(frozen=True)
class ImperfectParams:
    """Usage levels, quality levels and quality probabilities. The defaults
    are the standard parameter set with p = 0.96.
    """

    a_low : float = 1.0
    a_high : float = 1.19
    y_high : float = 5.0
    y_low : float = 1.0
    p : float = 0.96
    q : float = 0.8
    r : float = 0.65

    def __post_init__(self):
        assert 0 < self.a_low < self.a_high, "Usage levels must satisfy 0 < a_low < a_high"
        assert 0 < self.y_low < self.y_high, "Quality levels must satisfy 0 < y_low < y_high"
        assert 0 < self.r < self.q < self.p < 1, "Probabilities must satisfy 0 < r < q < p < 1"

        # the game without intervention must be a prisoner's dilemma
        assert self.y_q * self.a_high > self.y_p * self.a_low, \
            "Prisoner's dilemma condition y_q a_high > y_p a_low fails"
        assert self.y_p * self.a_low > self.y_r * self.a_high, \
            "Prisoner's dilemma condition y_p a_low > y_r a_high fails"
        assert self.y_r * self.a_high > self.y_q * self.a_low, \
            "Prisoner's dilemma condition y_r a_high > y_q a_low fails"
        assert 2 * self.y_p * self.a_low > self.y_q * (self.a_high + self.a_low), \
            "Prisoner's dilemma condition 2 y_p a_low > y_q (a_high + a_low) fails"

    def expected_quality(self, k : float) -> float:
        return k * self.y_high + (1 - k) * self.y_low

    @property
    def y_p(self) -> float:
        return self.expected_quality(self.p)

    @property
    def y_q(self) -> float:
        return self.expected_quality(self.q)

    @property
    def y_r(self) -> float:
        return self.expected_quality(self.r)

    @property
    def margin_low(self) -> float:
        """Signal sensitivity to a deviation when the other user plays low
        """
        return self.p * self.a_low - self.q * self.a_high

    @property
    def margin_high(self) -> float:
        """Signal sensitivity to a deviation when the other user plays high
        """
        return self.q * self.a_low - self.r * self.a_high

    @property
    def monotonicity(self) -> float:
        """Its sign is the sign of the slope of w0 wherever w0 is positive
        """
        return (self.p - self.q) * (1 - self.r) - (self.q - self.r) * (1 - self.q)

class Case(Enum):

    A = "a"
    B = "b"
    C = "c"
    D = "d"
    E = "e"
    F = "f"

    # margin_low == margin_high >= 0 with non-positive monotonicity
    BOUNDARY = "boundary"

class Formula(Enum):

    V_TILDE = "v_tilde"
    MAX_TILDE_W1 = "max_tilde_w1"
    MAX_TILDE_W_ALPHA_BAR = "max_tilde_w_alpha_bar"

@dataclass(frozen=True)
class CaseLabel:

    case : Case
    formula : Formula

@dataclass(frozen=True)
class Classification:
    """Closed-form best performance with intervention for a parameter set
    """

    label : CaseLabel
    v_star : float
    v_tilde : float
    v_bar : float
    alpha_bar : Optional[float] = None

    @property
    def gap(self) -> float:
        return self.v_bar - self.v_star

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "case": self.label.case.value,
            "formula": self.label.formula.value,
            "v_star": self.v_star,
            "v_tilde": self.v_tilde,
            "v_bar": self.v_bar,
            "gap": self.gap,
        }
        if self.alpha_bar is not None:
            data["alpha_bar"] = self.alpha_bar
        return data

def v_bar(params : ImperfectParams) -> float:
    return params.y_p * params.a_low

def v_tilde(params : ImperfectParams) -> float:
    return params.y_r * params.a_high

def sensitivity(params : ImperfectParams, alpha : float) -> float:
    """Signal sensitivity between the two usage levels when the other user
    plays low with probability `alpha`
    """

    return alpha * params.margin_low + (1 - alpha) * params.margin_high

def _numerator(params : ImperfectParams, alpha : float) -> float:
    q_r = params.q - params.r
    p_q = params.p - params.q
    return (q_r + alpha * (p_q - q_r)) * params.a_high * params.a_low * params.y_high

def _denominator(params : ImperfectParams, alpha : float) -> float:
    base = (1 - params.r) * params.a_high - (1 - params.q) * params.a_low
    return base + alpha * (params.margin_low - params.margin_high)

def w0(params : ImperfectParams, alpha : float) -> float:
    """Best manager payoff among rules sustaining the symmetric profile in
    which each user plays low with probability `alpha`.
    """

    assert 0 <= alpha <= 1, "alpha must be in [0, 1], got %s" % alpha

    if alpha == 0:
        return v_tilde(params)

    if sensitivity(params, alpha) >= 0:
        return _numerator(params, alpha) / _denominator(params, alpha)

    return 0.0

def w0_right_limit(params : ImperfectParams) -> float:
    """Limit of w0 as alpha decreases to 0. It lies strictly below w0(0).
    """

    if params.margin_high > 0 or (params.margin_high == 0 and params.margin_low >= 0):
        return _numerator(params, 0.0) / _denominator(params, 0.0)
    return 0.0

def imperfect_game(params : ImperfectParams) -> FiniteInterventionGame:
    """The finite game: two users, two quality signals, and a device that
    either lets the service run or stops it.
    """

    usage = {LOW: params.a_low, HIGH: params.a_high}
    quality = {QUALITY_HIGH: params.y_high, QUALITY_LOW: params.y_low}
    high_probability = {
        (LOW, LOW): params.p,
        (LOW, HIGH): params.q,
        (HIGH, LOW): params.q,
        (HIGH, HIGH): params.r,
    }

    signal_dist = {profile: [k, 1 - k] for profile, k in high_probability.items()}

    payoffs = {}
    for profile in high_probability:
        for signal, level in quality.items():
            users = [level * usage[action] for action in profile]
            payoffs[(NOT_INTERVENE, profile, signal)] = [sum(users) / 2] + users
            payoffs[(INTERVENE, profile, signal)] = [0.0, 0.0, 0.0]

    return FiniteInterventionGame.from_mappings(
        user_actions=[[LOW, HIGH], [LOW, HIGH]],
        intervention_actions=[NOT_INTERVENE, INTERVENE],
        signals=[QUALITY_HIGH, QUALITY_LOW],
        signal_dist=signal_dist,
        payoffs=payoffs,
        no_intervention_action=NOT_INTERVENE,
    )

def type2_rule(f_high : float, f_low : float) -> FiniteInterventionRule:
    """Rule that lets the service run with probability `f_high` after high
    quality and `f_low` after low quality
    """

    return FiniteInterventionRule(np.array([
        [f_high, 1 - f_high],
        [f_low, 1 - f_low],
    ]))

def payoff_matrix(params : ImperfectParams) -> NormalFormGame:
    """The users' game without intervention
    """

    low, high = params.a_low, params.a_high
    y_p, y_q, y_r = params.y_p, params.y_q, params.y_r

    return NormalFormGame(np.array([
        [[y_p * low, y_q * low], [y_q * high, y_r * high]],
        [[y_p * low, y_q * high], [y_q * low, y_r * high]],
    ]))

def attaining_rule(params : ImperfectParams, alpha : float) -> FiniteInterventionRule:
    """The rule that attains w0(alpha). It never intervenes at alpha = 0,
    always intervenes when signals are not sensitive at alpha, and otherwise
    runs the service after high quality and degrades only low quality.
    """

    assert 0 <= alpha <= 1, "alpha must be in [0, 1], got %s" % alpha

    if alpha == 0:
        return type2_rule(1.0, 1.0)

    s = sensitivity(params, alpha)
    if s < 0:
        return type2_rule(0.0, 0.0)

    f_low = s / _denominator(params, alpha) * params.y_high / params.y_low
    assert 0 <= f_low <= 1 + 1e-12, \
        "Rule probability %.6g after low quality is outside [0, 1]; parameters are outside the supported regime" % f_low

    return type2_rule(1.0, min(f_low, 1.0))

def alpha_bar(params : ImperfectParams) -> float:
    """Largest alpha at which signals remain sensitive, when the two margins
    differ
    """

    denominator = params.margin_high - params.margin_low
    assert denominator != 0, "alpha_bar is undefined when both sensitivity margins are equal"
    return params.margin_high / denominator

def gap_formula(params : ImperfectParams) -> float:
    """v_bar - w0(1), the loss from sustaining the low usage profile
    """

    return (1 - params.p) * params.a_low * (params.y_q * params.a_high - params.y_p * params.a_low) / (
        (1 - params.q) * params.a_high - (1 - params.p) * params.a_low
    )

def classify(params : ImperfectParams) -> Classification:
    """Which parameter regime applies, and the resulting best performance.
    Case boundaries use exact comparisons.

    Equal non-negative margins are labelled case c. Equal margins force
    p - q > q - r and so a positive monotonicity; Case.BOUNDARY, with
    v_star = v_tilde, is kept for a non-positive one.
    """

    low, high, d = params.margin_low, params.margin_high, params.monotonicity
    tilde = v_tilde(params)

    if low < 0 and high < 0:
        case = Case.A
    elif low == high:
        case = Case.C if d > 0 else Case.BOUNDARY
    elif low > high:
        case = Case.C if high >= 0 else Case.D
    elif d <= 0:
        case = Case.B
    elif low >= 0:
        case = Case.E
    else:
        case = Case.F

    bar = None
    if case in (Case.A, Case.B, Case.BOUNDARY):
        formula = Formula.V_TILDE
        v_star = tilde
    elif case == Case.F:
        formula = Formula.MAX_TILDE_W_ALPHA_BAR
        bar = alpha_bar(params)
        # sensitivity vanishes at alpha_bar, so skip the sign test in w0
        v_star = max(tilde, _numerator(params, bar) / _denominator(params, bar))
    else:
        formula = Formula.MAX_TILDE_W1
        v_star = max(tilde, w0(params, 1.0))

    return Classification(CaseLabel(case, formula), v_star, tilde, v_bar(params), bar)

def fig4_data(params : ImperfectParams, alpha_step : float = DEFAULT_ALPHA_STEP) -> Table:
    """w0 sampled at 0, step, 2 step, ..., 1, next to the constant v_bar
    """

    assert 0 < alpha_step <= 0.5, "alpha step must be in (0, 0.5], got %s" % alpha_step

    n = int(round(1 / alpha_step))
    best = v_bar(params)

    return Table(
        ("alpha", "w0", "v_bar"),
        tuple((k / n, w0(params, k / n), best) for k in range(n + 1)),
    )
