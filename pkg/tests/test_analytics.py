"""Closed forms, exact distributions, and the optimal-policy solver.

Distribution constants below were frozen from two independent
implementations (a forward lattice sweep and a memoized backward recursion)
that agree to better than 1e-12.
"""

import math
import time

import numpy as np
import pytest

from coinlab.analytics import (
    ExactDistribution,
    GameParams,
    all_in_ruin,
    certainty_equivalent,
    exact_capped_distribution,
    fixed_fraction_grid_value,
    headline_table,
    log_growth,
    median_wealth,
    optimal_cap_policy,
    per_flip_edge,
    return_risk_ratio,
    uncapped_ev,
)
from coinlab.engine import Side

DEFAULTS = dict(p=0.6, n=300, w0=25.0, cap=250.0)

# (fraction) -> (cap-hit probability, expected capped payout), default game.
ORACLE = {
    0.05: (0.7047908109798299, 217.96154834536486),
    0.10: (0.9417492780257186, 241.36295864641647),
    0.15: (0.9524673485941474, 241.3782508610727),
    0.20: (0.9382282106016565, 237.35867669605364),
    0.40: (0.70786324544048, 178.31166902525766),
}


def close(a, b, rel=1e-12, abs_=0.0):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


class TestParamsValidation:
    def test_rejects_betting_everything(self):
        with pytest.raises(ValueError, match="ruin absorbs all mass"):
            GameParams(p=0.6, f=1.0, n=10, w0=25.0)

    @pytest.mark.parametrize("f", [0.0, -0.2, 1.5])
    def test_rejects_fraction_outside_open_interval(self, f):
        with pytest.raises(ValueError):
            GameParams(p=0.6, f=f, n=10, w0=25.0)

    def test_rejects_bad_probability_flips_wealth(self):
        with pytest.raises(ValueError):
            GameParams(p=1.2, f=0.2, n=10, w0=25.0)
        with pytest.raises(ValueError):
            GameParams(p=0.6, f=0.2, n=-1, w0=25.0)
        with pytest.raises(ValueError):
            GameParams(p=0.6, f=0.2, n=10, w0=0.0)
        with pytest.raises(ValueError):
            GameParams(p=0.6, f=0.2, n=10, w0=25.0, cap=-1.0)


class TestClosedForms:
    def test_per_flip_edge(self):
        assert close(per_flip_edge(0.2, 0.6), 0.04, rel=0, abs_=1e-15)

    def test_edge_scales_linearly_in_fraction(self):
        assert close(per_flip_edge(0.1, 0.6), 0.02, rel=0, abs_=1e-15)

    def test_uncapped_ev_default_game(self):
        assert close(uncapped_ev(25, 0.2, 0.6, 300), 3220637.15075819)

    def test_uncapped_ev_compounds_po_flip(self):
        assert close(uncapped_ev(100, 0.2, 0.6, 1), 104.0)

    def test_log_growth_default_game(self):
        assert close(log_growth(0.2, 0.6), 0.02013551355068885)

    def test_log_growth_matches_direct_expression(self):
        f, p = 0.3, 0.7
        assert close(log_growth(f, p), p * math.log(1 + f) + (1 - p) * math.log(1 - f))

    def test_certainty_equivalent_default_game(self):
        assert close(certainty_equivalent(25, 0.2, 0.6, 300), 10504.194053657196)

    def test_median_wealth_default_game(self):
        assert close(median_wealth(25, 0.2, 0.6, 300), 10504.19405365727)

    def test_ce_equals_median_when_typical_path_is_integral(self):
        # With p·n an integer, the wealth on the path with exactly p·n wins
        # equals w0·exp(n·g): the identity behind reporting either number.
        for p, n in [(0.6, 300), (0.75, 16), (0.5, 10), (0.8, 25)]:
            for f in (0.1, 0.2, 0.37):
                ce = certainty_equivalent(40, f, p, n)
                med = median_wealth(40, f, p, n)
                assert close(ce, med, rel=1e-9), (p, n, f)

    def test_return_risk_ratio_value(self):
        assert close(return_risk_ratio(0.2, 0.6), 0.20412414523193148)

    def test_return_risk_ratio_is_fraction_invariant(self):
        values = {return_risk_ratio(f, 0.6) for f in (0.01, 0.2, 0.5, 1.0)}
        assert len({round(v, 15) for v in values}) == 1

    def test_return_risk_ratio_closed_form(self):
        p = 0.7
        assert close(return_risk_ratio(0.5, p), (2 * p - 1) / (2 * math.sqrt(p * (1 - p))))

    def test_return_risk_ratio_undefined_without_variance(self):
        with pytest.raises(ValueError):
            return_risk_ratio(0.2, 1.0)

    def test_all_in_ruin_both_sides(self):
        assert all_in_ruin(0.6, Side.HEADS) == pytest.approx(0.4, abs=1e-15)
        assert all_in_ruin(0.6, "tails") == pytest.approx(0.6, abs=1e-15)

    def test_log_growth_peaks_at_twice_edge(self):
        # argmax_f of p·ln(1+f) + (1−p)·ln(1−f) is 2p − 1.
        p = 0.6
        grid = np.linspace(1e-6, 0.999, 200_001)
        growth = p * np.log1p(grid) + (1 - p) * np.log1p(-grid)
        assert abs(grid[int(np.argmax(growth))] - (2 * p - 1)) < 1e-4


class TestExactDistribution:
    def test_two_flip_uncapped_atoms(self):
        dist = exact_capped_distribution(GameParams(p=0.6, f=0.2, n=2, w0=25.0, cap=None))
        assert [(round(w, 12), round(pr, 12)) for w, pr in dist.atoms] == [
            (16.0, 0.16),
            (24.0, 0.48),
            (36.0, 0.36),
        ]
        assert dist.p_cap == 0.0

    @pytest.mark.parametrize("f", sorted(ORACLE))
    def test_default_game_oracle_values(self, f):
        dist = exact_capped_distribution(GameParams(f=f, **DEFAULTS))
        p_cap, ev = ORACLE[f]
        assert close(dist.p_cap, p_cap, rel=0, abs_=1e-9)
        assert close(dist.expected_payout, ev, rel=0, abs_=1e-6)

    @pytest.mark.parametrize("f", sorted(ORACLE))
    @pytest.mark.parametrize("stop", [True, False])
    def test_probability_mass_sums_to_one(self, f, stop):
        dist = exact_capped_distribution(GameParams(f=f, **DEFAULTS), stop_at_cap=stop)
        assert abs(math.fsum(pr for _, pr in dist.atoms) - 1.0) <= 1e-12

    def test_atoms_sorted_by_wealth(self):
        dist = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS))
        wealths = [w for w, _ in dist.atoms]
        assert wealths == sorted(wealths)

    def test_uncapped_mean_matches_closed_form(self):
        params = GameParams(p=0.6, f=0.2, n=40, w0=25.0, cap=None)
        dist = exact_capped_distribution(params)
        mean = math.fsum(w * pr for w, pr in dist.atoms)
        assert close(mean, uncapped_ev(25, 0.2, 0.6, 40), rel=1e-11)

    def test_no_stop_touched_mass_equals_absorbed_mass_off_lattice(self):
        # With no lattice point exactly on the cap, paths that ever touch it
        # are exactly the paths a stopping run would absorb.
        stop = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS))
        cont = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS), stop_at_cap=False)
        assert close(stop.p_cap, cont.p_cap, rel=1e-12)

    def test_no_stop_expected_payout_is_lower(self):
        # Paths that keep flipping can fall back below the cap.
        cont = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS), stop_at_cap=False)
        assert close(cont.expected_payout, 226.90811077286708, rel=0, abs_=1e-6)
        assert cont.expected_payout < ORACLE[0.20][1]

    def test_strict_flag_only_matters_on_exact_cap_hits(self):
        # 25·1.5 = 37.5 lands exactly on the cap: weak counts it, strict not.
        params = GameParams(p=0.6, f=0.5, n=1, w0=25.0, cap=37.5)
        weak = exact_capped_distribution(params)
        strict = exact_capped_distribution(params, strict=True)
        assert weak.p_cap == pytest.approx(0.6, abs=1e-15)
        assert strict.p_cap == 0.0
        # The payout is min(w, cap) either way.
        assert close(weak.expected_payout, strict.expected_payout, rel=1e-15)

    def test_strict_equals_weak_on_the_default_game(self):
        weak = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS))
        strict = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS), strict=True)
        assert close(weak.p_cap, strict.p_cap, rel=1e-12)

    def test_zero_flips_below_cap(self):
        dist = exact_capped_distribution(GameParams(p=0.6, f=0.2, n=0, w0=25.0, cap=250.0))
        assert dist.atoms == ((25.0, 1.0),)
        assert dist.p_cap == 0.0 and dist.expected_payout == 25.0

    def test_start_at_or_above_cap_is_absorbed_immediately(self):
        dist = exact_capped_distribution(GameParams(p=0.6, f=0.2, n=5, w0=300.0, cap=250.0))
        assert dist.p_cap == 1.0
        assert dist.expected_payout == 250.0

    def test_expected_payout_never_exceeds_cap_or_uncapped_mean(self):
        dist = exact_capped_distribution(GameParams(f=0.2, **DEFAULTS))
        assert dist.expected_payout <= 250.0
        assert dist.expected_payout <= uncapped_ev(25, 0.2, 0.6, 300)

    def test_runtime_budget(self):
        t0 = time.monotonic()
        for f in sorted(ORACLE):
            exact_capped_distribution(GameParams(f=f, **DEFAULTS))
        assert time.monotonic() - t0 < 10.0


class TestOptimalPolicy:
    def test_default_game_value(self):
        pol = optimal_cap_policy(25.0, 0.6, 300, 250.0)
        assert close(pol.success_probability, 0.9862850702231836, rel=0, abs_=1e-9)

    def test_at_cap_value_one_bet_zero(self):
        pol = optimal_cap_policy(25.0, 0.6, 10, 250.0)
        cap_idx = pol.cap_cents // pol.wealth_step_cents
        assert (pol.values[:, cap_idx] == 1.0).all()
        assert (pol.bets_cents[:, cap_idx] == 0).all()

    def test_zero_flips_value_zero_below_cap(self):
        pol = optimal_cap_policy(25.0, 0.6, 10, 250.0)
        cap_idx = pol.cap_cents // pol.wealth_step_cents
        assert (pol.values[0, :cap_idx] == 0.0).all()

    def test_one_flip_from_half_forces_all_in(self):
        # $125 with one flip left: only an all-in reaches $250; value is p.
        pol = optimal_cap_policy(125.0, 0.6, 1, 250.0)
        assert pol.success_probability == pytest.approx(0.6, abs=1e-15)
        idx = pol.w0_cents // pol.wealth_step_cents
        assert pol.bets_cents[1, idx] == 12_500

    def test_two_flips_from_quarter_needs_two_wins(self):
        pol = optimal_cap_policy(62.5, 0.6, 2, 250.0)
        assert pol.success_probability == pytest.approx(0.36, abs=1e-12)

    @pytest.mark.parametrize("f", [0.05, 0.10, 0.15, 0.20, 0.40])
    def test_dominates_fixed_fractions_on_matched_grid(self, f):
        pol = optimal_cap_policy(25.0, 0.6, 300, 250.0)
        fixed = fixed_fraction_grid_value(25.0, 0.6, 300, 250.0, f)
        assert fixed <= pol.success_probability + 1e-12

    def test_more_flips_never_hurt(self):
        shorter = optimal_cap_policy(25.0, 0.6, 50, 250.0).success_probability
        longer = optimal_cap_policy(25.0, 0.6, 100, 250.0).success_probability
        assert longer >= shorter

    def test_rejects_sub_cent_grid(self):
        with pytest.raises(ValueError, match="whole cents"):
            optimal_cap_policy(25.0, 0.6, 10, 250.0, wealth_grid_step=0)

    def test_rejects_bet_step_off_the_wealth_grid(self):
        with pytest.raises(ValueError, match="multiple"):
            optimal_cap_policy(25.0, 0.6, 10, 250.0, wealth_grid_step=25, bet_grid_step=30)

    def test_rejects_start_off_the_grid(self):
        with pytest.raises(ValueError, match="grid"):
            optimal_cap_policy(25.13, 0.6, 10, 250.0)

    def test_rejects_start_beyond_cap_or_excess_flips(self):
        with pytest.raises(ValueError):
            optimal_cap_policy(300.0, 0.6, 10, 250.0)
        with pytest.raises(ValueError):
            optimal_cap_policy(25.0, 0.6, 301, 250.0)


class TestHeadlineTable:
    def test_every_row_within_tolerance(self):
        rows = headline_table()
        bad = [r.name for r in rows if not r.ok]
        assert bad == []

    def test_covers_the_headline_quantities(self):
        names = " ".join(r.name for r in headline_table())
        for needle in ["kelly", "edge", "ev", "log_growth", "certainty",
                       "median", "risk", "ruin", "envelope"]:
            assert needle in names

    def test_runs_fast(self):
        t0 = time.monotonic()
        headline_table()
        assert time.monotonic() - t0 < 1.0

    def test_row_comparison_logic(self):
        from coinlab.analytics import TableRow

        assert TableRow("x", 1.0, 1.05, 0.1).ok
        assert not TableRow("x", 1.0, 1.2, 0.1).ok
