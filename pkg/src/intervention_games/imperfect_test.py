import pytest
import numpy as np

from .game import MANAGER, mixed_ex_ante_payoff, sustains
from .nash import pure_nash
from .profile import MixedProfile
from .imperfect import (
    Case,
    Formula,
    ImperfectParams,
    alpha_bar,
    attaining_rule,
    classify,
    fig4_data,
    gap_formula,
    imperfect_game,
    payoff_matrix,
    sensitivity,
    v_bar,
    v_tilde,
    w0,
    w0_right_limit,
)

def symmetric(alpha):
    return MixedProfile(([alpha, 1 - alpha], [alpha, 1 - alpha]))

class TestImperfectParams:

    def test_defaults(self):
        params = ImperfectParams()

        assert (params.a_low, params.a_high, params.y_high, params.y_low) == (1.0, 1.19, 5.0, 1.0)
        assert (params.p, params.q, params.r) == (0.96, 0.8, 0.65)
        assert params.y_p == pytest.approx(4.84)
        assert params.y_q == pytest.approx(4.2)
        assert params.y_r == pytest.approx(3.6)
        assert params.margin_low == pytest.approx(0.008)
        assert params.margin_high == pytest.approx(0.0265)
        assert params.monotonicity == pytest.approx(0.026)

    def test_ordering(self):
        with pytest.raises(AssertionError):
            ImperfectParams(p=0.8)

        with pytest.raises(AssertionError):
            ImperfectParams(a_low=1.5)

        with pytest.raises(AssertionError):
            ImperfectParams(y_low=6.0)

        with pytest.raises(AssertionError):
            ImperfectParams(r=0)

    def test_prisoners_dilemma(self):
        with pytest.raises(AssertionError) as e:
            ImperfectParams(a_high=1.5)
        assert "y_p a_low > y_r a_high" in str(e.value)

        with pytest.raises(AssertionError) as e:
            ImperfectParams(a_high=1.05)
        assert "y_q a_high > y_p a_low" in str(e.value)

def test_benchmarks():

    params = ImperfectParams()
    assert v_bar(params) == pytest.approx(4.84)
    assert v_tilde(params) == pytest.approx(4.284)

def test_payoff_matrix():

    g = payoff_matrix(ImperfectParams(p=0.9))

    assert g.payoffs[0].tolist() == pytest.approx([[4.6, 4.2], [4.998, 4.284]])
    assert g.payoffs[1] == pytest.approx(g.payoffs[0].T)
    assert [p.pure_indices for p in pure_nash(g)] == [(1, 1)]

def test_sensitivity():

    params = ImperfectParams(p=0.94)

    assert sensitivity(params, 1.0) == pytest.approx(params.margin_low)
    assert sensitivity(params, 0.0) == pytest.approx(params.margin_high)
    assert sensitivity(params, alpha_bar(params)) == pytest.approx(0.0, abs=1e-15)

class TestW0:

    def test_end_points(self):
        params = ImperfectParams(p=0.96)

        assert w0(params, 0.0) == pytest.approx(4.284)
        assert w0(params, 1.0) == pytest.approx(4.80808, abs=1e-5)

    def test_jump_at_zero(self):
        params = ImperfectParams(p=0.96)

        assert w0_right_limit(params) == pytest.approx(4.1224, abs=1e-4)
        assert w0_right_limit(params) < w0(params, 0.0)
        assert w0(params, 1e-6) == pytest.approx(w0_right_limit(params), abs=1e-5)

    def test_zero_without_sensitivity(self):
        params = ImperfectParams(p=0.94)
        bar = alpha_bar(params)

        assert w0(params, bar + 0.01) == 0.0
        assert w0(params, 1.0) == 0.0
        assert w0(params, bar - 0.01) > 4.0

    def test_range(self):
        with pytest.raises(AssertionError):
            w0(ImperfectParams(), 1.5)

        with pytest.raises(AssertionError):
            w0(ImperfectParams(), -0.1)

class TestAttainingRule:

    def test_no_intervention_at_zero(self):
        rule = attaining_rule(ImperfectParams(), 0.0)
        assert rule.per_signal.tolist() == [[1.0, 0.0], [1.0, 0.0]]

    def test_low_usage(self):
        rule = attaining_rule(ImperfectParams(p=0.96), 1.0)

        assert rule.per_signal[0].tolist() == [1.0, 0.0]
        assert rule.per_signal[1, 0] == pytest.approx(0.20202, abs=1e-5)

    def test_intervenes_without_sensitivity(self):
        rule = attaining_rule(ImperfectParams(p=0.94), 1.0)
        assert rule.per_signal.tolist() == [[0.0, 1.0], [0.0, 1.0]]

    @pytest.mark.parametrize("p, alpha", [
        (0.96, 0.25),
        (0.96, 0.5),
        (0.96, 1.0),
        (0.94, 0.5),
        (0.9, 0.3),
    ])
    def test_sustains_and_attains(self, p, alpha):
        params = ImperfectParams(p=p)
        game = imperfect_game(params)
        rule = attaining_rule(params, alpha)
        profile = symmetric(alpha)

        assert sustains(game, rule, profile)
        assert mixed_ex_ante_payoff(game, rule, profile, MANAGER) == pytest.approx(w0(params, alpha))

def test_alpha_bar():

    assert alpha_bar(ImperfectParams(p=0.94)) == pytest.approx(0.68831, abs=1e-5)
    assert alpha_bar(ImperfectParams(p=0.9)) == pytest.approx(0.33758, abs=1e-5)

def test_gap_formula():

    params = ImperfectParams(p=0.96)
    assert gap_formula(params) == pytest.approx(0.031919, abs=1e-6)
    assert gap_formula(params) == pytest.approx(v_bar(params) - w0(params, 1.0))

class TestClassify:

    def test_low_usage_is_best(self):
        result = classify(ImperfectParams(p=0.96))

        assert result.label.case == Case.E
        assert result.label.formula == Formula.MAX_TILDE_W1
        assert result.v_star == pytest.approx(4.80808, abs=1e-5)
        assert result.alpha_bar is None
        assert result.gap == pytest.approx(0.031919, abs=1e-6)

    def test_mixed_usage_is_best(self):
        result = classify(ImperfectParams(p=0.94))

        assert result.label.case == Case.F
        assert result.label.formula == Formula.MAX_TILDE_W_ALPHA_BAR
        assert result.alpha_bar == pytest.approx(0.68831, abs=1e-5)
        assert result.v_star == pytest.approx(4.48182, abs=1e-5)

    def test_no_intervention_is_best(self):
        params = ImperfectParams(p=0.9)
        result = classify(params)

        assert result.label.case == Case.F
        assert result.v_star == pytest.approx(4.284)
        assert result.v_star == pytest.approx(v_tilde(params))
        assert w0(params, alpha_bar(params)) == pytest.approx(4.1688, abs=1e-4)

    def test_insensitive_signals(self):
        result = classify(ImperfectParams(p=0.9, r=0.7))

        assert result.label.case == Case.A
        assert result.label.formula == Formula.V_TILDE
        assert result.v_star == pytest.approx(4.522)

    def test_decreasing_w0(self):
        result = classify(ImperfectParams(a_high=1.05, p=0.8315, q=0.8, r=0.76))

        assert result.label.case == Case.B
        assert result.v_star == pytest.approx(4.242)

    def test_larger_low_margin(self):
        params = ImperfectParams(a_high=1.05, p=0.85, q=0.8, r=0.76)
        result = classify(params)

        assert result.label.case == Case.C
        assert result.label.formula == Formula.MAX_TILDE_W1
        assert result.v_star == pytest.approx(max(v_tilde(params), w0(params, 1.0)))

    def test_negative_high_margin(self):
        params = ImperfectParams(r=0.7)
        result = classify(params)

        assert result.label.case == Case.D
        assert result.v_star == pytest.approx(max(v_tilde(params), w0(params, 1.0)))

    def test_equal_margins(self):
        params = ImperfectParams(a_high=1.125, y_high=3.0, p=0.890625, q=0.75, r=0.625)
        result = classify(params)

        assert params.margin_low == params.margin_high == 0.046875
        assert params.monotonicity > 0
        assert result.label.case == Case.C
        assert result.label.formula == Formula.MAX_TILDE_W1
        assert result.v_star == pytest.approx(2.761364, abs=1e-6)

    def test_to_dict(self):
        data = classify(ImperfectParams(p=0.94)).to_dict()

        assert data["case"] == "f"
        assert data["formula"] == "max_tilde_w_alpha_bar"
        assert set(data) == {"case", "formula", "v_star", "v_tilde", "v_bar", "gap", "alpha_bar"}

        assert "alpha_bar" not in classify(ImperfectParams(p=0.96)).to_dict()

    def test_v_star_bounds(self):
        for p in np.linspace(0.9, 0.99, 10):
            params = ImperfectParams(p=float(p))
            result = classify(params)
            assert v_tilde(params) <= result.v_star <= v_bar(params)

def test_fig4_data():

    params = ImperfectParams(p=0.96)
    table = fig4_data(params, 0.01)

    assert table.header == ("alpha", "w0", "v_bar")
    assert table.rows == 101
    assert table.data[0] == (0.0, pytest.approx(4.284), pytest.approx(4.84))
    assert table.data[-1][0] == 1.0
    assert table.data[-1][1] == pytest.approx(4.80808, abs=1e-5)
    assert np.all(table.column("v_bar") == v_bar(params))

    # w0 jumps down just after zero, then increases
    w = table.column("w0")
    assert w[1] < w[0]
    assert np.all(np.diff(w[1:]) > 0)

    assert fig4_data(params, 0.25).column("alpha").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]

    with pytest.raises(AssertionError):
        fig4_data(params, 0)

def random_params(rng, count):
    """Admissible parameter sets whose signals are sensitive somewhere in
    (0, 1) and whose monotonicity is clearly non-zero
    """

    found = []
    while len(found) < count:
        p, q, r = sorted(rng.uniform(0.6, 0.99, size=3), reverse=True)
        try:
            params = ImperfectParams(
                a_high=float(rng.uniform(1.02, 1.3)),
                y_high=float(rng.uniform(3.0, 6.0)),
                p=float(p), q=float(q), r=float(r),
            )
        except AssertionError:
            continue

        if abs(params.monotonicity) > 1e-4 and max(params.margin_low, params.margin_high) > 0.01:
            found.append(params)

    return found

def test_w0_slope_has_sign_of_monotonicity():

    rng = np.random.default_rng(12)
    h = 1e-4

    for params in random_params(rng, 20):
        checked = 0
        for alpha in np.linspace(0.01, 0.99, 50):
            if sensitivity(params, alpha - h) <= 0 or sensitivity(params, alpha + h) <= 0:
                continue

            slope = (w0(params, alpha + h) - w0(params, alpha - h)) / (2 * h)
            assert np.sign(slope) == np.sign(params.monotonicity)
            checked += 1

        assert checked > 0
