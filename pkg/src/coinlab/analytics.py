"""Closed-form quantities and exact distributions for fixed-fraction betting.

Everything here is analytic or dynamic-programming exact — no sampling. This
module works in real-valued dollars (the formulas are granularity-free); the
integer-cents engine's rounding gap is measured by the simulation suite, not
hidden here.

Key pieces:
  * one-line formulas: per-flip edge, uncapped EV, log growth, certainty
    equivalent, median wealth, return/risk ratio, all-in ruin;
  * exact_capped_distribution — forward DP on the (heads, tails) lattice with
    an absorbing barrier at the cap, yielding the full terminal-wealth atom
    list, the cap-hit probability, and the expected (capped) payout;
  * optimal_cap_policy — backward DP over discretized wealth maximizing the
    probability of reaching the cap, an upper bound for every fixed-fraction
    policy;
  * headline_table — the package's reference figures, computed next to their
    published values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .engine import Side

# Comparator figures for the stock-market analogy row: ~5% annual real return
# over ~15% annual volatility.
EQUITY_RETURN = 0.05
EQUITY_VOLATILITY = 0.15


@dataclass(frozen=True, slots=True)
class GameParams:
    """Real-dollar parameters of a fixed-fraction betting run."""

    p: float
    f: float
    n: int
    w0: float
    cap: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.f >= 1.0:
            raise ValueError(
                "f must be < 1: betting the whole bankroll loses everything on "
                "the first lost flip, so ruin absorbs all mass"
            )
        if self.f <= 0.0:
            raise ValueError(f"f must be in (0, 1), got {self.f}")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.w0 <= 0.0:
            raise ValueError("w0 must be positive")
        if self.cap is not None and self.cap <= 0.0:
            raise ValueError("cap must be positive when set")


@dataclass(frozen=True, slots=True)
class ExactDistribution:
    """Exact terminal-wealth distribution of a fixed-fraction run.

    ``atoms`` is (wealth, probability) sorted by wealth; probabilities sum to
    1 within 1e-12. ``p_cap`` is the mass absorbed at the cap barrier (or,
    without stopping, the mass of paths that ever touched the cap).
    ``expected_payout`` is E[min(wealth, cap)].
    """

    atoms: tuple[tuple[float, float], ...]
    p_cap: float
    expected_payout: float
    params: GameParams
    stop_at_cap: bool
    strict: bool


def per_flip_edge(f: float, p: float) -> float:
    """Expected simple return of one flip betting fraction f: f·(2p − 1)."""
    if not 0.0 < f <= 1.0:
        raise ValueError(f"f must be in (0, 1], got {f}")
    return f * (2.0 * p - 1.0)


def uncapped_ev(w0: float, f: float, p: float, n: int) -> float:
    """Expected wealth after n flips with no cap: w0·(1 + f(2p−1))ⁿ."""
    return w0 * (1.0 + per_flip_edge(f, p)) ** n


def log_growth(f: float, p: float) -> float:
    """Per-flip expected log growth: p·ln(1+f) + (1−p)·ln(1−f)."""
    if not 0.0 < f < 1.0:
        raise ValueError(f"f must be in (0, 1), got {f}")
    return p * math.log1p(f) + (1.0 - p) * math.log1p(-f)


def certainty_equivalent(w0: float, f: float, p: float, n: int) -> float:
    """Sure amount with the same log utility as the n-flip gamble."""
    return w0 * math.exp(n * log_growth(f, p))


def median_wealth(w0: float, f: float, p: float, n: int) -> float:
    """Wealth on the typical path: h = round(p·n) heads, n−h tails."""
    h = math.floor(p * n + 0.5)
    return w0 * (1.0 + f) ** h * (1.0 - f) ** (n - h)


def return_risk_ratio(f: float, p: float) -> float:
    """Per-flip mean over per-flip standard deviation of the simple return.

    Equals (2p−1) / (2·sqrt(p(1−p))): the bet fraction scales numerator and
    denominator alike and cancels, so the ratio is f-invariant.
    """
    if not 0.0 < f <= 1.0:
        raise ValueError(f"f must be in (0, 1], got {f}")
    if not 0.0 < p < 1.0:
        raise ValueError("ratio undefined at p = 0 or 1 (zero variance)")
    return (2.0 * p - 1.0) / (2.0 * math.sqrt(p * (1.0 - p)))


def all_in_ruin(p: float, side: Side | str) -> float:
    """Probability one full-bankroll flip loses: 1−p on heads, p on tails."""
    side = Side(side)
    return 1.0 - p if side is Side.HEADS else p


def _binomial_distribution(params: GameParams) -> ExactDistribution:
    """No-cap case: terminal wealth is binomial in the number of heads."""
    p, f, n, w0 = params.p, params.f, params.n, params.w0
    atoms = []
    for h in range(n + 1):
        wealth = w0 * (1.0 + f) ** h * (1.0 - f) ** (n - h)
        prob = math.comb(n, h) * p**h * (1.0 - p) ** (n - h)
        atoms.append((wealth, prob))
    atoms.sort()
    expected = math.fsum(w * pr for w, pr in atoms)
    return ExactDistribution(
        atoms=tuple(atoms),
        p_cap=0.0,
        expected_payout=expected,
        params=params,
        stop_at_cap=False,
        strict=False,
    )


def exact_capped_distribution(
    params: GameParams, stop_at_cap: bool = True, strict: bool = False
) -> ExactDistribution:
    """Exact terminal-wealth distribution via forward DP on the (h, t) lattice.

    Wealth after h won and t lost flips is w0·(1+f)ʰ·(1−f)ᵗ, so states are
    deduplicated by (h, t) — never by floating wealth. With ``stop_at_cap``,
    a won flip that lifts wealth to the cap absorbs the path there (weak >=
    by default, strict > with the flag). Without stopping, paths run all n
    flips and ``p_cap`` reports the mass that ever touched the cap.
    """
    p, f, n, w0, cap = params.p, params.f, params.n, params.w0, params.cap
    if cap is None:
        return _binomial_distribution(params)

    up, down = 1.0 + f, 1.0 - f

    def wealth(h: int, t: int) -> float:
        return w0 * up**h * down**t

    hit: Callable[[float], bool] = (lambda w: w > cap) if strict else (lambda w: w >= cap)

    if stop_at_cap:
        absorbed: list[tuple[float, float]] = []
        if hit(w0):
            # Absorbed before any flip: the whole mass sits at the start.
            absorbed.append((w0, 1.0))
            live: dict[tuple[int, int], float] = {}
        else:
            live = {(0, 0): 1.0}
        for _ in range(n):
            nxt: dict[tuple[int, int], float] = {}
            for (h, t), pr in live.items():
                w_up = wealth(h + 1, t)
                if hit(w_up):
                    absorbed.append((w_up, pr * p))
                else:
                    key = (h + 1, t)
                    nxt[key] = nxt.get(key, 0.0) + pr * p
                key = (h, t + 1)
                nxt[key] = nxt.get(key, 0.0) + pr * (1.0 - p)
            live = nxt
        terminal = [(wealth(h, t), pr) for (h, t), pr in live.items()]
        p_cap = math.fsum(pr for _, pr in absorbed)
        atoms = sorted(absorbed + terminal)
    else:
        # No absorption: carry a touched-the-cap flag through the lattice.
        start_touched = hit(w0)
        live_t: dict[tuple[int, int, bool], float] = {(0, 0, start_touched): 1.0}
        for _ in range(n):
            nxt_t: dict[tuple[int, int, bool], float] = {}
            for (h, t, touched), pr in live_t.items():
                w_up = wealth(h + 1, t)
                key_up = (h + 1, t, touched or hit(w_up))
                nxt_t[key_up] = nxt_t.get(key_up, 0.0) + pr * p
                key_dn = (h, t + 1, touched)
                nxt_t[key_dn] = nxt_t.get(key_dn, 0.0) + pr * (1.0 - p)
            live_t = nxt_t
        p_cap = math.fsum(pr for (_, _, touched), pr in live_t.items() if touched)
        merged: dict[tuple[int, int], float] = {}
        for (h, t, _), pr in live_t.items():
            merged[(h, t)] = merged.get((h, t), 0.0) + pr
        atoms = sorted((wealth(h, t), pr) for (h, t), pr in merged.items())

    mass = math.fsum(pr for _, pr in atoms)
    if abs(mass - 1.0) > 1e-9:
        raise AssertionError(f"lattice mass drifted to {mass!r}")
    expected = math.fsum(min(w, cap) * pr for w, pr in atoms)
    return ExactDistribution(
        atoms=tuple(atoms),
        p_cap=p_cap,
        expected_payout=expected,
        params=params,
        stop_at_cap=stop_at_cap,
        strict=strict,
    )


@dataclass(frozen=True, slots=True)
class OptimalPolicy:
    """Backward-DP solution of "maximize P(reach the cap in n flips)".

    ``values[k, i]``: success probability with wealth i·wealth_step cents and
    k flips remaining. ``bets_cents[k, i]``: a best bet at that state (the
    smallest, when several tie). Wealth at or above the cap is one absorbing
    grid node with value 1.
    """

    values: np.ndarray
    bets_cents: np.ndarray
    wealth_step_cents: int
    bet_step_cents: int
    w0_cents: int
    cap_cents: int
    n: int

    @property
    def success_probability(self) -> float:
        return float(self.values[self.n, self.w0_cents // self.wealth_step_cents])


def _check_grid(w0_cents: int, cap_cents: int, wealth_step: int, bet_step: int) -> None:
    if wealth_step < 1 or bet_step < 1:
        raise ValueError("grid steps are whole cents: the 1-cent minimum bet cannot be represented on a finer grid")
    if bet_step % wealth_step != 0:
        raise ValueError("bet_step must be a multiple of wealth_step so outcomes stay on the grid")
    if w0_cents % wealth_step != 0 or cap_cents % wealth_step != 0:
        raise ValueError("start and cap must sit on the wealth grid")
    if not 0 < w0_cents <= cap_cents:
        raise ValueError("need 0 < w0 <= cap")


def optimal_cap_policy(
    w0: float,
    p: float,
    n: int,
    cap: float,
    wealth_grid_step: int = 25,
    bet_grid_step: int = 25,
) -> OptimalPolicy:
    """Best possible cap-hit probability over all betting policies on a grid.

    Dollars in, cents grids inside. Backward induction over wealth levels
    0..cap in wealth_grid_step increments; candidate bets are multiples of
    bet_grid_step up to current wealth (betting 0 is allowed). Values are
    exact for the discretized game and upper-bound every fixed-fraction
    policy evaluated on the same discretization.
    """
    if n < 0 or n > 300:
        raise ValueError("n must be in [0, 300]")
    w0_cents = round(w0 * 100)
    cap_cents = round(cap * 100)
    _check_grid(w0_cents, cap_cents, wealth_grid_step, bet_grid_step)

    W = cap_cents // wealth_grid_step           # index of the cap node
    jstep = bet_grid_step // wealth_grid_step   # bet increment in wealth-index units
    q = 1.0 - p

    values = np.zeros((n + 1, W + 1))
    bets = np.zeros((n + 1, W + 1), dtype=np.int64)
    values[0, W] = 1.0

    for k in range(1, n + 1):
        prev = values[k - 1]
        # prev extended so that any win landing past the cap reads value 1.
        prev_ext = np.concatenate([prev, np.ones(W)])
        best = prev.copy()                      # j = 0: bet nothing
        best_j = np.zeros(W + 1, dtype=np.int64)
        for j in range(jstep, W + 1, jstep):
            lo = j                               # need wealth >= bet
            cand = p * prev_ext[lo + j : W + 1 + j] + q * prev[0 : W + 1 - j]
            improved = cand > best[lo:]
            best[lo:][improved] = cand[improved]
            best_j[lo:][improved] = j
        best[W] = 1.0                            # at the cap: done, bet 0
        best_j[W] = 0
        values[k] = best
        bets[k] = best_j * wealth_grid_step

    return OptimalPolicy(
        values=values,
        bets_cents=bets,
        wealth_step_cents=wealth_grid_step,
        bet_step_cents=bet_grid_step,
        w0_cents=w0_cents,
        cap_cents=cap_cents,
        n=n,
    )


def fixed_fraction_grid_value(
    w0: float,
    p: float,
    n: int,
    cap: float,
    f: float,
    wealth_grid_step: int = 25,
    bet_grid_step: int = 25,
) -> float:
    """Cap-hit probability of a fixed-fraction policy on the same grid.

    The bet at wealth w is f·w rounded to the nearest bet-grid multiple
    (clipped to [0, w]); used to check that the optimal policy dominates
    every fixed fraction on an identical discretization.
    """
    if not 0.0 < f < 1.0:
        raise ValueError(f"f must be in (0, 1), got {f}")
    w0_cents = round(w0 * 100)
    cap_cents = round(cap * 100)
    _check_grid(w0_cents, cap_cents, wealth_grid_step, bet_grid_step)

    W = cap_cents // wealth_grid_step
    jstep = bet_grid_step // wealth_grid_step
    q = 1.0 - p

    idx = np.arange(W + 1)
    wealth_cents = idx * wealth_grid_step
    j = np.rint(f * wealth_cents / bet_grid_step).astype(np.int64) * jstep
    j = np.minimum(j, idx)  # cannot bet more than wealth

    value = np.zeros(W + 1)
    value[W] = 1.0
    for _ in range(n):
        ext = np.concatenate([value, np.ones(W)])
        nxt = p * ext[idx + j] + q * value[idx - j]
        nxt[W] = 1.0
        value = nxt
    return float(value[w0_cents // wealth_grid_step])


@dataclass(frozen=True, slots=True)
class TableRow:
    name: str
    computed: float
    published: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.computed - self.published) <= self.tolerance


def headline_table() -> list[TableRow]:
    """The package's reference figures, computed against published values.

    Published values are for the default game: p = 0.6, $25 stake, $250 cap,
    300 flips, Kelly fraction 0.20.
    """
    from .strategies import kelly_fraction  # local import avoids a cycle

    rows = [
        TableRow("kelly_fraction(0.6)", kelly_fraction(0.6), 0.20, 0.0),
        TableRow("opening_bet_dollars(25)", kelly_fraction(0.6) * 25.0, 5.00, 0.0),
        TableRow("per_flip_edge(0.2, 0.6)", per_flip_edge(0.2, 0.6), 0.04, 1e-12),
        TableRow("uncapped_ev(25, 0.2, 0.6, 300)", uncapped_ev(25, 0.2, 0.6, 300), 3_220_637.0, 5.0),
        TableRow("log_growth(0.2, 0.6)", log_growth(0.2, 0.6), 0.0201, 1e-4),
        TableRow("exp(log_growth)", math.exp(log_growth(0.2, 0.6)), 1.02034, 1e-5),
        TableRow(
            "certainty_equivalent(25, 0.2, 0.6, 300)",
            certainty_equivalent(25, 0.2, 0.6, 300),
            10_504.0,
            5.0,
        ),
        TableRow("median_wealth(25, 0.2, 0.6, 300)", median_wealth(25, 0.2, 0.6, 300), 10_504.0, 5.0),
        TableRow("return_risk_ratio(·, 0.6)", return_risk_ratio(0.2, 0.6), 0.204, 5e-4),
        TableRow("equity_return_risk(0.05/0.15)", EQUITY_RETURN / EQUITY_VOLATILITY, 0.333, 1e-3),
        TableRow("all_in_ruin(0.6, heads)", all_in_ruin(0.6, Side.HEADS), 0.40, 0.0),
        TableRow("all_in_ruin(0.6, tails)", all_in_ruin(0.6, Side.TAILS), 0.60, 0.0),
        TableRow("max_win_envelope(25·1.2³⁰⁰)", 25.0 * 1.2**300, 1.4e25, 1e24),
        TableRow("lucky_path(210H/90T)", 25.0 * 1.2**210 * 0.8**90, 2.0e9, 2e8),
    ]
    return rows


__all__ = [
    "EQUITY_RETURN",
    "EQUITY_VOLATILITY",
    "GameParams",
    "ExactDistribution",
    "per_flip_edge",
    "uncapped_ev",
    "log_growth",
    "certainty_equivalent",
    "median_wealth",
    "return_risk_ratio",
    "all_in_ruin",
    "exact_capped_distribution",
    "OptimalPolicy",
    "optimal_cap_policy",
    "fixed_fraction_grid_value",
    "TableRow",
    "headline_table",
]
