"""N users share a channel whose quality falls linearly in total usage and
in the level of interference an intervention device injects.

    Q(a0, a) = [q - b (a0 + sum(a))]+,   u_i = Q a_i,   u_0 = mean(u_i)

Everything here is closed form except `v_star_curve`, which runs the generic
perfect-monitoring search with a closed-form deviation oracle.
"""

import logging

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .perfect import (
    AffineRule,
    ContinuousGame,
    DeviationOracle,
    affine_rate,
    constant_punishment,
    intervention_equilibrium,
    product_grid,
)
from .report import Table
from .utils import uniform_grid

logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-9
REGION_POINTS = 121

@dataclass(frozen=True)
class WirelessParams:
    """`a_bar` holds each user's maximum usage and defaults to q / b for
    every user. `a0_bar` is the strongest interference the device can inject.
    """

    num_users : int = 2
    q : float = 12.0
    b : float = 1.0
    a_bar : Optional[Tuple[float, ...]] = None
    a0_bar : float = 5.0

    def __post_init__(self):
        assert int(self.num_users) == self.num_users and self.num_users >= 1, \
            "Number of users must be a positive integer, got %s" % self.num_users
        assert self.q > 0, "q must be positive, got %s" % self.q
        assert self.b > 0, "b must be positive, got %s" % self.b
        assert self.a0_bar >= 0, "a0_bar must be non-negative, got %s" % self.a0_bar

        a_bar = self.a_bar
        if a_bar is None:
            a_bar = (self.q / self.b,) * int(self.num_users)
        a_bar = tuple(float(a) for a in a_bar)

        assert len(a_bar) == self.num_users, "a_bar needs %d entries, got %d" % (self.num_users, len(a_bar))
        for user, a in enumerate(a_bar):
            assert a >= self.q / (2 * self.b), \
                "a_bar of user %d is %s; it must be at least q/2b = %s" % (user + 1, a, self.q / (2 * self.b))

        object.__setattr__(self, 'num_users', int(self.num_users))
        object.__setattr__(self, 'a_bar', a_bar)

    @property
    def a_low(self) -> float:
        """Each user's usage in the symmetric best profile
        """
        return self.q / (2 * self.num_users * self.b)

    @property
    def a_high(self) -> float:
        """Each user's usage in the symmetric Nash equilibrium without
        intervention
        """
        return self.q / ((self.num_users + 1) * self.b)

    def with_a0_bar(self, a0_bar : float) -> "WirelessParams":
        return WirelessParams(self.num_users, self.q, self.b, self.a_bar, a0_bar)

@dataclass(frozen=True)
class Benchmarks:

    v_bar : float
    v_tilde : float
    a_low : float
    a_high : float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "v_bar": self.v_bar,
            "v_tilde": self.v_tilde,
            "a_low": self.a_low,
            "a_high": self.a_high,
        }

def quality(params : WirelessParams, a0, profile) -> Union[float, np.ndarray]:
    """Channel quality; vectorised over profiles of shape (M, N) with a0
    scalar or of shape (M,)
    """

    profile = np.asarray(profile, dtype=float)
    return np.maximum(params.q - params.b * (np.asarray(a0, dtype=float) + profile.sum(axis=-1)), 0.0)

def user_payoff(params : WirelessParams, user : int, a0, profile) -> Union[float, np.ndarray]:
    profile = np.asarray(profile, dtype=float)
    return quality(params, a0, profile) * profile[..., user]

def manager_payoff(params : WirelessParams, a0, profile) -> Union[float, np.ndarray]:
    profile = np.asarray(profile, dtype=float)
    return quality(params, a0, profile) * profile.mean(axis=-1)

def wireless_game(params : WirelessParams) -> ContinuousGame:
    return ContinuousGame(
        tuple((0.0, a) for a in params.a_bar),
        (0.0, params.a0_bar),
        tuple(
            (lambda a0, a, user=user: user_payoff(params, user, a0, a))
            for user in range(params.num_users)
        ),
        lambda a0, a: manager_payoff(params, a0, a),
    )

def benchmarks(params : WirelessParams) -> Benchmarks:
    """Best feasible manager payoff, and the payoff of the symmetric Nash
    equilibrium without intervention
    """

    n, q, b = params.num_users, params.q, params.b

    if n >= 2:
        assert params.a_high > params.a_low, "Nash usage must exceed the best usage with several users"

    return Benchmarks(
        v_bar=q * q / (4 * n * b),
        v_tilde=q * q / ((n + 1) ** 2 * b),
        a_low=params.a_low,
        a_high=params.a_high,
    )

def a0_min(params : WirelessParams) -> float:
    """Smallest intervention capability at which the best feasible payoff
    is reached
    """

    n = params.num_users
    return (np.sqrt(n) - 1) ** 2 * params.q / (2 * n * params.b)

def _best_deviation(params : WirelessParams, user : int, profiles : np.ndarray) -> np.ndarray:
    others = profiles.sum(axis=-1) - profiles[..., user]
    return np.maximum(params.q - params.b * (params.a0_bar + others), 0.0) ** 2 / (4 * params.b)

def membership_margin(params : WirelessParams, profile) -> np.ndarray:
    """For each user, its payoff without intervention minus the best it can
    get by deviating while fully punished. Shape (..., N).
    """

    profile = np.asarray(profile, dtype=float)
    quiet = quality(params, 0.0, profile)[..., np.newaxis] * profile

    return np.stack([
        quiet[..., user] - _best_deviation(params, user, profile)
        for user in range(params.num_users)
    ], axis=-1)

def in_E_star_closed_form(params : WirelessParams, profile, tolerance : float = MEMBERSHIP_TOLERANCE) -> Union[bool, np.ndarray]:
    """Whether a profile is sustained by its extreme rule. Accepts one
    profile or an array of profiles.
    """

    profile = np.asarray(profile, dtype=float)
    member = np.all(membership_margin(params, profile) >= -tolerance, axis=-1)
    return bool(member) if profile.ndim == 1 else member

def closed_form_oracle(params : WirelessParams) -> DeviationOracle:
    """Deviation oracle for full punishment at a0_bar. Usage maxima of at
    least q/2b never cut the best deviation short.
    """

    def oracle(user : int, profiles) -> np.ndarray:
        return _best_deviation(params, user, np.atleast_2d(np.asarray(profiles, dtype=float)))

    return oracle

def v_star_curve(params : WirelessParams, a0_values : Sequence[float], profile_grid_step : float = None) -> Table:
    """Best manager payoff with intervention for each intervention
    capability in `a0_values`. The profile grid defaults to 61 points per
    user for up to two users.
    """

    a0_values = [float(a) for a in a0_values]
    assert all(x <= y for x, y in zip(a0_values, a0_values[1:])), "Intervention capabilities must be sorted"

    rows = []
    for a0_bar in a0_values:
        varied = params.with_a0_bar(a0_bar)
        equilibrium = intervention_equilibrium(
            wireless_game(varied),
            profile_grid_step=profile_grid_step,
            deviation_oracle=closed_form_oracle(varied),
            punish=constant_punishment(a0_bar),
        )
        logger.debug("a0_bar=%g: v_star=%.12g at %s", a0_bar, equilibrium.value, equilibrium.profile.tolist())
        rows.append((a0_bar, equilibrium.value))

    return Table(("a0_bar", "v_star"), tuple(rows))

def rate_closed_form(params : WirelessParams, target) -> np.ndarray:
    """Rates balancing each user's marginal gain from more usage against
    the marginal loss from interference, at a target with positive quality
    """

    target = np.asarray(target, dtype=float)
    assert np.all(target > 0), "Target usage must be positive"

    others = target.sum() - target
    return params.q / (params.b * target) - others / target - 2

def eq4_rule(params : WirelessParams) -> AffineRule:
    """Affine rule sustaining (a_low, ..., a_low): interference grows with
    N - 1 times the excess of total usage over q/2b.
    """

    target = np.full(params.num_users, params.a_low)
    rates = np.full(params.num_users, float(params.num_users - 1))

    # numerical rates need quality to stay positive over the whole range
    if params.a0_bar > 0 and params.a0_bar < params.q / (2 * params.b):
        numerical = affine_rate(wireless_game(params), target)
        assert np.allclose(numerical, rates, rtol=1e-6, atol=1e-6), \
            "Numerical rates %s differ from %s" % (numerical.tolist(), rates.tolist())

    return AffineRule(target, rates, 0.0, params.a0_bar)

def fig5_data(params : WirelessParams, points : int = REGION_POINTS) -> Table:
    """Membership of each profile of a two-user grid in the set of
    sustainable profiles
    """

    assert params.num_users == 2, "Region data needs exactly two users"

    profiles = product_grid([(0.0, a) for a in params.a_bar], points)
    member = in_E_star_closed_form(params, profiles)

    return Table(
        ("a1", "a2", "member"),
        tuple((float(a1), float(a2), bool(m)) for (a1, a2), m in zip(profiles, member)),
    )

def fig6_data(params : WirelessParams, a_i_values : Sequence[float]) -> Table:
    """Payoff of user 1 against its usage when user 2 stays at a_low, with
    and without the affine rule
    """

    assert params.num_users == 2, "Payoff data needs exactly two users"

    rule = eq4_rule(params)

    profiles = np.tile(rule.target, (len(a_i_values), 1))
    profiles[:, 0] = a_i_values

    with_rule = user_payoff(params, 0, rule(profiles), profiles)
    without = user_payoff(params, 0, 0.0, profiles)

    return Table(
        ("a_i", "u_with_rule", "u_no_intervention"),
        tuple((float(a), float(u), float(v)) for a, u, v in zip(profiles[:, 0], with_rule, without)),
    )

def default_a_i_values(params : WirelessParams, points : int = REGION_POINTS) -> np.ndarray:
    return uniform_grid(0.0, params.a_bar[0], points)
