"""Behavioral metrics over recorded betting sessions.

A SessionLedger is the durable trace of one session: config, the ordered
flip records, and questionnaire answers. The metrics below are pure
functions of ledgers: bet sizing (how much of the bankroll each wager
risked), tails betting and its relation to heads streaks, and a
loss-chasing score that separates martingale-style escalation from
bankroll-tracking strategies.

All metrics are ratio-based, so they are invariant to currency scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .engine import FlipRecord, GameConfig, Side, replay

# A score at or above this is flagged as martingale-like loss chasing. The
# value is a heuristic operating point: doubling martingales score >= 1 while
# bankroll-fraction bettors score near -f (their bets shrink after losses).
MARTINGALE_FLAG_THRESHOLD = 0.5

DEFAULT_STREAK_K = 3

BELIEF_QUESTION_ID = "believes_bias"

_TRUTHY = {"yes", "true", "1", "y"}


@dataclass(frozen=True, slots=True)
class SessionLedger:
    """One recorded session: rules, every flip in order, and answers."""

    session_id: str
    config: GameConfig
    records: tuple[FlipRecord, ...]
    answers: tuple[tuple[str, object], ...] = ()

    def answer_map(self) -> dict[str, object]:
        """Answers with last-write-wins semantics."""
        return dict(self.answers)


def verify_replayable(ledger: SessionLedger) -> None:
    """Raise ValueError unless the records fold into a consistent state."""
    replay(ledger.config, ledger.records)


def bankroll_before(record: FlipRecord) -> int:
    """The bankroll the bet was placed from, recovered from the record."""
    if record.won:
        return record.bankroll_after_cents - record.amount_cents
    return record.bankroll_after_cents + record.amount_cents


@dataclass(frozen=True, slots=True)
class BetFractionStats:
    """How much of the bankroll each wager risked."""

    mean: float
    std: float
    max: float
    all_in_flips: int


def bet_fraction_stats(ledger: SessionLedger) -> BetFractionStats:
    """Per-flip bet fractions: amount over the bankroll it was placed from.

    ``std`` (population) is the erraticism measure; ``all_in_flips`` counts
    wagers of the entire bankroll (fraction exactly 1).
    """
    if not ledger.records:
        raise ValueError("ledger has no flips")
    fractions = [rec.amount_cents / bankroll_before(rec) for rec in ledger.records]
    mean = sum(fractions) / len(fractions)
    var = sum((x - mean) ** 2 for x in fractions) / len(fractions)
    all_in = sum(
        1 for rec in ledger.records if rec.amount_cents == bankroll_before(rec)
    )
    return BetFractionStats(mean=mean, std=math.sqrt(var), max=max(fractions), all_in_flips=all_in)


@dataclass(frozen=True, slots=True)
class TailsStats:
    """Tails betting overall and right after runs of heads outcomes."""

    tails_count: int
    tails_share: float
    post_streak_tails_rate: Optional[float]
    streak_lift: Optional[float]
    streak_k: int


def tails_stats(ledger: SessionLedger, streak_k: int = DEFAULT_STREAK_K) -> TailsStats:
    """Tails-betting metrics; the streak window is the immediately preceding
    run of heads outcomes (length >= streak_k qualifies).

    ``streak_lift`` = P(bet tails | just saw >= k heads) − overall tails
    share; absent when no qualifying windows exist.
    """
    if streak_k < 1:
        raise ValueError("streak_k must be >= 1")
    if not ledger.records:
        raise ValueError("ledger has no flips")

    records = ledger.records
    tails_count = sum(1 for rec in records if rec.side is Side.TAILS)
    tails_share = tails_count / len(records)

    qualifying = 0
    tails_after_streak = 0
    heads_run = 0  # consecutive heads outcomes before the current flip
    for rec in records:
        if heads_run >= streak_k:
            qualifying += 1
            if rec.side is Side.TAILS:
                tails_after_streak += 1
        heads_run = heads_run + 1 if rec.outcome is Side.HEADS else 0

    if qualifying == 0:
        rate: Optional[float] = None
        lift: Optional[float] = None
    else:
        rate = tails_after_streak / qualifying
        lift = rate - tails_share
    return TailsStats(
        tails_count=tails_count,
        tails_share=tails_share,
        post_streak_tails_rate=rate,
        streak_lift=lift,
        streak_k=streak_k,
    )


def martingale_score(ledger: SessionLedger) -> Optional[float]:
    """Loss-chasing score: mean bet ratio after losses minus after wins.

    The ratio at flip t is amount_t / amount_{t−1}, conditioned on whether
    flip t−1 was lost or won. Doubling martingales score >= 1; constant
    bets score exactly 0; fraction-of-bankroll bettors score about −2f
    (ratios track the bankroll: 1−f after a loss, 1+f after a win). Absent
    (None) for fewer than 3 flips or when either conditional set is empty.
    """
    records = ledger.records
    if len(records) < 3:
        return None
    after_loss: list[float] = []
    after_win: list[float] = []
    for prev, cur in zip(records, records[1:]):
        ratio = cur.amount_cents / prev.amount_cents
        (after_win if prev.won else after_loss).append(ratio)
    if not after_loss or not after_win:
        return None
    return sum(after_loss) / len(after_loss) - sum(after_win) / len(after_win)


def is_martingale_like(score: Optional[float], threshold: float = MARTINGALE_FLAG_THRESHOLD) -> bool:
    return score is not None and score >= threshold


@dataclass(frozen=True, slots=True)
class CohortStats:
    """Aggregates of the per-session metrics over a cohort of ledgers."""

    n_sessions: int
    mean_bet_fraction: float
    all_in_count: int
    tails_any_count: int
    tails_gt5_count: int
    tails_share_gt25_count: int
    mean_streak_lift: Optional[float]
    martingale_flagged_count: int
    belief_in_bias_share: Optional[float]
    streak_k: int


def _truthy(value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return value != 0
    return str(value).strip().lower() in _TRUTHY


def cohort_report(
    ledgers: list[SessionLedger] | tuple[SessionLedger, ...],
    streak_k: int = DEFAULT_STREAK_K,
    martingale_threshold: float = MARTINGALE_FLAG_THRESHOLD,
    belief_question_id: str = BELIEF_QUESTION_ID,
) -> CohortStats:
    """Cohort aggregation of the per-session metrics.

    Counts sessions (not flips): any-all-in, any-tails, more than 5 tails
    bets, tails share above 25%, and martingale-flagged. The belief share is
    computed only over sessions that answered the bias question; absent when
    none did. mean_streak_lift averages sessions whose lift is defined.
    """
    if not ledgers:
        raise ValueError("cohort_report needs at least one ledger")

    mean_fractions: list[float] = []
    all_in_count = 0
    tails_any = 0
    tails_gt5 = 0
    share_gt25 = 0
    lifts: list[float] = []
    flagged = 0
    belief_answers: list[bool] = []

    for ledger in ledgers:
        bets = bet_fraction_stats(ledger)
        mean_fractions.append(bets.mean)
        if bets.all_in_flips > 0:
            all_in_count += 1
        tails = tails_stats(ledger, streak_k=streak_k)
        if tails.tails_count > 0:
            tails_any += 1
        if tails.tails_count > 5:
            tails_gt5 += 1
        if tails.tails_share > 0.25:
            share_gt25 += 1
        if tails.streak_lift is not None:
            lifts.append(tails.streak_lift)
        if is_martingale_like(martingale_score(ledger), martingale_threshold):
            flagged += 1
        answers = ledger.answer_map()
        if belief_question_id in answers:
            belief_answers.append(_truthy(answers[belief_question_id]))

    return CohortStats(
        n_sessions=len(ledgers),
        mean_bet_fraction=sum(mean_fractions) / len(mean_fractions),
        all_in_count=all_in_count,
        tails_any_count=tails_any,
        tails_gt5_count=tails_gt5,
        tails_share_gt25_count=share_gt25,
        mean_streak_lift=sum(lifts) / len(lifts) if lifts else None,
        martingale_flagged_count=flagged,
        belief_in_bias_share=(
            sum(belief_answers) / len(belief_answers) if belief_answers else None
        ),
        streak_k=streak_k,
    )


__all__ = [
    "MARTINGALE_FLAG_THRESHOLD",
    "DEFAULT_STREAK_K",
    "BELIEF_QUESTION_ID",
    "SessionLedger",
    "verify_replayable",
    "bankroll_before",
    "BetFractionStats",
    "bet_fraction_stats",
    "TailsStats",
    "tails_stats",
    "martingale_score",
    "is_martingale_like",
    "CohortStats",
    "cohort_report",
]
