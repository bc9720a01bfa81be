"""Seeded batch simulation of betting strategies through the game engine.

Every path owns an independent, deterministically derived RNG stream
(PCG64 via SeedSequence spawn keys), and per-path results land in
preallocated arrays indexed by path id. Aggregation happens after all paths
finish, from those arrays alone — so identical BatchSpecs give bit-identical
statistics, sequentially or in parallel, in any execution order.

Two execution lanes produce identical results where they overlap:
  * a vectorized numpy lane for kelly/fractional strategies (the hot path for
    oracle cross-checks at 1e5+ paths);
  * a scalar lane that walks the engine (cents) or mirrors the strategy rules
    in real dollars, used for every other strategy shape.

Rounding modes: "cents" floors every bet to whole cents like the live game;
"real" keeps wealth real-valued like the analytic oracle. The cents lane
under uncapped growth would overflow int64, so uncapped cents batches always
take the scalar engine lane (unbounded Python ints).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import ExactDistribution
from .engine import (
    CapDisclosure,
    GameConfig,
    Status,
    derive_path_stream,
    new_session,
    payout,
    place_bet,
)
from .strategies import (
    ALL_IN,
    CONSTANT_AMOUNT,
    FRACTIONAL,
    GLIDE,
    KELLY,
    MARTINGALE,
    RESET_ON_WIN,
    StrategySpec,
    glide_fraction,
    kelly_fraction,
    next_bet,
    view_of,
)

ROUND_CENTS = "cents"
ROUND_REAL = "real"

_CHUNK = 8192


@dataclass(frozen=True, slots=True)
class BatchSpec:
    """What to simulate: strategy, rules, path count, seed, and conventions.

    ``stop_at_cap`` ends a path on the first won flip that lifts wealth to
    the cap (the convention behind the cap-hit probabilities); without it,
    paths run to the flip budget like live sessions did.
    """

    strategy: StrategySpec
    config: GameConfig
    n_paths: int
    master_seed: int
    stop_at_cap: bool = True
    rounding: str = ROUND_REAL

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.rounding not in (ROUND_CENTS, ROUND_REAL):
            raise ValueError(f"rounding must be 'cents' or 'real', got {self.rounding!r}")


@dataclass(frozen=True, slots=True)
class SummaryStats:
    """Batch aggregates. Money fields are dollars.

    ``p_cap`` is the fraction of paths that reached the cap (ever touched it,
    under no-stop). Standard errors: binomial for p_cap, sample for the
    payout mean. Quantiles are the 5/25/50/75/95th percentiles of payout.
    """

    spec: BatchSpec
    n_paths: int
    p_cap: float
    p_cap_se: float
    expected_payout: float
    expected_payout_se: float
    ruin_rate: float
    payout_quantiles: tuple[float, float, float, float, float]
    mean_flips: float


@dataclass(frozen=True, slots=True)
class OracleComparison:
    """z-scores of a Monte Carlo batch against the exact distribution."""

    z_p_cap: float
    z_payout: float
    within_3se: bool


def _strategy_fraction(spec: BatchSpec) -> float | None:
    """The fixed fraction for vectorizable strategies, else None."""
    if spec.strategy.kind == KELLY:
        return kelly_fraction(spec.config.p_heads)
    if spec.strategy.kind == FRACTIONAL:
        return spec.strategy.f
    return None


def _uniform_block(master_seed: int, start: int, count: int, n: int) -> np.ndarray:
    """Per-path uniforms, one row per path: row k is path (start+k)'s stream."""
    u = np.empty((count, n))
    for k in range(count):
        u[k] = derive_path_stream(master_seed, start + k).random(n)
    return u


def _run_fraction_chunk(
    spec: BatchSpec,
    frac: float,
    start: int,
    count: int,
    payout_d: np.ndarray,
    cap_hit: np.ndarray,
    ruined: np.ndarray,
    flips_used: np.ndarray,
) -> None:
    """Vectorized kelly/fractional lane for one chunk of paths."""
    cfg = spec.config
    n = cfg.max_flips
    p = cfg.p_heads
    cents = spec.rounding == ROUND_CENTS
    cap_c = cfg.cap_cents

    u = _uniform_block(spec.master_seed, start, count, n)

    if cents:
        w = np.full(count, cfg.start_cents, dtype=np.int64)
        cap_v = cap_c
        min_bet = cfg.min_bet_cents
    else:
        w = np.full(count, cfg.start_cents / 100.0)
        cap_v = None if cap_c is None else cap_c / 100.0
        min_bet = None

    alive = np.ones(count, dtype=bool)
    capped = np.zeros(count, dtype=bool)
    dead = np.zeros(count, dtype=bool)
    flips = np.zeros(count, dtype=np.int64)

    if cap_v is not None and w[0] >= cap_v:
        capped[:] = True
        if spec.stop_at_cap:
            alive[:] = False

    for t in range(n):
        if not alive.any():
            break
        if cents:
            bet = np.floor(frac * w).astype(np.int64)
            np.maximum(bet, min_bet, out=bet)
            np.minimum(bet, w, out=bet)
        else:
            bet = frac * w
        won = u[:, t] < p
        w = np.where(alive, w + np.where(won, bet, -bet), w)
        flips += alive

        if cap_v is not None:
            at_cap = w >= cap_v
            if spec.stop_at_cap:
                absorbed = alive & won & at_cap
                capped |= absorbed
                alive &= ~absorbed
            else:
                capped |= alive & at_cap

        gone = alive & ((w < min_bet) if cents else (w <= 0.0))
        dead |= gone
        alive &= ~gone

    w_d = w / 100.0 if cents else w
    if cap_v is not None:
        cap_d = cap_c / 100.0
        payout_d[start : start + count] = np.minimum(w_d, cap_d)
    else:
        payout_d[start : start + count] = w_d
    cap_hit[start : start + count] = capped
    ruined[start : start + count] = dead
    flips_used[start : start + count] = flips


def _run_engine_path(spec: BatchSpec, index: int) -> tuple[float, bool, bool, int]:
    """One path through the real engine (integer cents, any strategy)."""
    cfg = spec.config
    rng = derive_path_stream(spec.master_seed, index)
    state = new_session(cfg)
    last = None
    while state.status is Status.ACTIVE and state.flips_done < cfg.max_flips:
        intent = next_bet(
            spec.strategy, view_of(state, cfg, last), cfg.p_heads, cfg.min_bet_cents
        )
        if intent is None:
            break
        state, last = place_bet(state, intent, cfg, rng)
        if (
            spec.stop_at_cap
            and cfg.cap_cents is not None
            and last.won
            and state.bankroll_cents >= cfg.cap_cents
        ):
            break
    return (
        payout(state, cfg) / 100.0,
        state.cap_hit,
        state.bankroll_cents < cfg.min_bet_cents,
        state.flips_done,
    )


def _run_real_path(spec: BatchSpec, index: int) -> tuple[float, bool, bool, int]:
    """One real-valued-dollar path for non-fractional strategies.

    Mirrors next_bet's rules without cent flooring; there is no minimum bet
    in real mode, so ruin means wealth reaching exactly zero (all-in losses
    and full-martingale busts).
    """
    cfg = spec.config
    strat = spec.strategy
    rng = derive_path_stream(spec.master_seed, index)
    p = cfg.p_heads
    cap = None if cfg.cap_cents is None else cfg.cap_cents / 100.0
    w = cfg.start_cents / 100.0
    touched = cap is not None and w >= cap
    last_amount = 0.0
    last_won = False
    flips = 0
    ruined_flag = False

    for t in range(cfg.max_flips):
        if w <= 0.0:
            break
        if strat.kind == ALL_IN:
            if t > 0:
                break
            amount, side_heads = w, strat.side.value == "heads"
        elif strat.kind == CONSTANT_AMOUNT:
            amount, side_heads = min(strat.c / 100.0, w), True
        elif strat.kind == MARTINGALE:
            if flips == 0:
                amount = strat.base / 100.0
            elif last_won:
                amount = strat.base / 100.0 if strat.mode == RESET_ON_WIN else last_amount / 2.0
            else:
                amount = last_amount * strat.factor
            amount, side_heads = min(amount, w), True
        elif strat.kind == GLIDE:
            cap_known = cap is not None and (
                cfg.cap_disclosure is CapDisclosure.SHOWN or touched
            )
            if cap_known:
                g = 0.0 if w >= cap else glide_fraction(
                    w, cap, max(1, cfg.max_flips - t), strat.f_start
                )
            else:
                g = strat.f_start
            amount, side_heads = g * w, True
        else:  # kelly / fractional are handled by the vectorized lane
            frac = kelly_fraction(p) if strat.kind == KELLY else strat.f
            amount, side_heads = frac * w, True

        won = (rng.random() < p) == side_heads
        w += amount if won else -amount
        last_amount, last_won = amount, won
        flips += 1
        if cap is not None and w >= cap:
            touched = True
            if spec.stop_at_cap and won:
                break
        if w <= 0.0:
            ruined_flag = True
            break

    payout_dollars = w if cap is None else min(w, cap)
    return payout_dollars, touched, ruined_flag, flips


def _run_scalar_chunk(
    spec: BatchSpec,
    start: int,
    count: int,
    payout_d: np.ndarray,
    cap_hit: np.ndarray,
    ruined: np.ndarray,
    flips_used: np.ndarray,
) -> None:
    run = _run_engine_path if spec.rounding == ROUND_CENTS else _run_real_path
    for k in range(count):
        payout_d[start + k], cap_hit[start + k], ruined[start + k], flips_used[start + k] = run(
            spec, start + k
        )


def run_batch(
    spec: BatchSpec, parallel: bool = False, workers: int | None = None
) -> SummaryStats:
    """Simulate the batch and aggregate. Identical spec → identical stats.

    Paths are split into fixed chunks writing to disjoint slices of shared
    result arrays; statistics are computed from the completed arrays in path
    order, so parallel and sequential runs agree bit-for-bit.
    """
    n = spec.n_paths
    payout_d = np.empty(n)
    cap_hit = np.zeros(n, dtype=bool)
    ruined = np.zeros(n, dtype=bool)
    flips_used = np.zeros(n, dtype=np.int64)

    frac = _strategy_fraction(spec)
    overflow_risk = spec.rounding == ROUND_CENTS and not (
        spec.stop_at_cap and spec.config.cap_cents is not None
    )
    use_vector = frac is not None and not overflow_risk

    chunks = [(s, min(_CHUNK, n - s)) for s in range(0, n, _CHUNK)]

    def work(chunk: tuple[int, int]) -> None:
        s, c = chunk
        if use_vector:
            _run_fraction_chunk(spec, frac, s, c, payout_d, cap_hit, ruined, flips_used)
        else:
            _run_scalar_chunk(spec, s, c, payout_d, cap_hit, ruined, flips_used)

    if parallel and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers or min(8, os.cpu_count() or 1)) as pool:
            list(pool.map(work, chunks))
    else:
        for chunk in chunks:
            work(chunk)

    p_cap = float(cap_hit.mean())
    p_cap_se = math.sqrt(p_cap * (1.0 - p_cap) / n)
    mean_payout = float(payout_d.mean())
    payout_se = float(payout_d.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    q = np.percentile(payout_d, [5, 25, 50, 75, 95])

    return SummaryStats(
        spec=spec,
        n_paths=n,
        p_cap=p_cap,
        p_cap_se=p_cap_se,
        expected_payout=mean_payout,
        expected_payout_se=payout_se,
        ruin_rate=float(ruined.mean()),
        payout_quantiles=tuple(float(x) for x in q),
        mean_flips=float(flips_used.mean()),
    )


def compare_to_oracle(stats: SummaryStats, exact: ExactDistribution) -> OracleComparison:
    """z-scores of the batch against the exact distribution.

    Requires a matching setup: real rounding, same fraction, bias, flip
    budget, stake, cap, and stop rule — anything else is rejected rather
    than silently compared.
    """
    spec = stats.spec
    params = exact.params

    if spec.rounding != ROUND_REAL:
        raise ValueError("oracle comparison needs real rounding (the oracle is real-valued)")
    frac = _strategy_fraction(spec)
    if frac is None:
        raise ValueError("oracle comparison covers kelly/fractional strategies only")
    mismatches = []
    if not math.isclose(frac, params.f, rel_tol=0, abs_tol=1e-12):
        mismatches.append(f"fraction {frac} vs {params.f}")
    if spec.config.p_heads != params.p:
        mismatches.append(f"p {spec.config.p_heads} vs {params.p}")
    if spec.config.max_flips != params.n:
        mismatches.append(f"n {spec.config.max_flips} vs {params.n}")
    if spec.config.start_cents != round(params.w0 * 100):
        mismatches.append(f"start {spec.config.start_cents}c vs {params.w0}$")
    cap_c = None if params.cap is None else round(params.cap * 100)
    if spec.config.cap_cents != cap_c:
        mismatches.append(f"cap {spec.config.cap_cents}c vs {params.cap}$")
    if spec.stop_at_cap != exact.stop_at_cap:
        mismatches.append(f"stop_at_cap {spec.stop_at_cap} vs {exact.stop_at_cap}")
    if mismatches:
        raise ValueError("batch/oracle parameter mismatch: " + "; ".join(mismatches))

    z_p = (stats.p_cap - exact.p_cap) / stats.p_cap_se if stats.p_cap_se > 0 else 0.0
    z_pay = (
        (stats.expected_payout - exact.expected_payout) / stats.expected_payout_se
        if stats.expected_payout_se > 0
        else 0.0
    )
    return OracleComparison(
        z_p_cap=float(z_p),
        z_payout=float(z_pay),
        within_3se=abs(z_p) <= 3.0 and abs(z_pay) <= 3.0,
    )


__all__ = [
    "ROUND_CENTS",
    "ROUND_REAL",
    "BatchSpec",
    "SummaryStats",
    "OracleComparison",
    "run_batch",
    "compare_to_oracle",
]
