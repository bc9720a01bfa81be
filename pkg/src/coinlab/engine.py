"""Integer-cents coin-flip game engine.

Pure transition functions over immutable state. No hidden randomness and no
wall-clock reads: generators and timestamps are always passed in explicitly,
so any session can be replayed bit-for-bit from its flip records. Wealth is
tracked in integer cents using Python's unbounded ints, so long winning runs
never overflow or round.

Randomness, when used, comes from numpy PCG64 generators. Path streams are
derived with SeedSequence(entropy=master_seed, spawn_key=(path_index,)),
which is deterministic and platform-independent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np


class Side(str, Enum):
    HEADS = "heads"
    TAILS = "tails"


class Status(str, Enum):
    ACTIVE = "active"
    FINISHED = "finished"  # flip budget exhausted
    RUINED = "ruined"      # bankroll below the minimum bet, flips remaining


class CapDisclosure(str, Enum):
    HIDDEN = "hidden"
    SHOWN = "shown"


# Violation tags returned by validate_bet.
BELOW_MINIMUM = "below_minimum"
EXCEEDS_BANKROLL = "exceeds_bankroll"
SESSION_OVER = "session_over"


@dataclass(frozen=True, slots=True)
class GameConfig:
    """Immutable rules for one game session.

    All money fields are integer cents. ``cap_cents=None`` means winnings are
    never clipped at payout time. ``session_seconds=0`` means untimed; the
    wall clock is enforced by the service layer, never in here.
    """

    p_heads: float = 0.6
    start_cents: int = 2500
    cap_cents: Optional[int] = 25000
    max_flips: int = 300
    session_seconds: int = 1800
    min_bet_cents: int = 1
    cap_disclosure: CapDisclosure = CapDisclosure.HIDDEN

    def __post_init__(self) -> None:
        if not isinstance(self.cap_disclosure, CapDisclosure):
            # Accept the wire strings "hidden"/"shown"; reject anything else.
            object.__setattr__(self, "cap_disclosure", CapDisclosure(self.cap_disclosure))
        if not 0.0 <= self.p_heads <= 1.0:
            raise ValueError(f"p_heads must be in [0, 1], got {self.p_heads}")
        if self.start_cents < 1:
            raise ValueError("start_cents must be a positive number of cents")
        if self.min_bet_cents < 1:
            raise ValueError("min_bet_cents must be >= 1")
        if self.min_bet_cents > self.start_cents:
            raise ValueError("min_bet_cents cannot exceed start_cents")
        if self.cap_cents is not None:
            if self.cap_cents < 1:
                raise ValueError("cap_cents must be positive when set")
            if self.cap_cents < self.start_cents:
                raise ValueError("cap_cents must be >= start_cents when set")
        if self.max_flips < 0:
            raise ValueError("max_flips must be >= 0")
        if self.session_seconds < 0:
            raise ValueError("session_seconds must be >= 0 (0 = untimed)")


@dataclass(frozen=True, slots=True)
class BetIntent:
    """A player's declared wager: which side, how many cents."""

    side: Side
    amount_cents: int


@dataclass(frozen=True, slots=True)
class FlipRecord:
    """One resolved flip. ``bankroll_after_cents`` makes records replayable."""

    seq: int
    side: Side
    amount_cents: int
    outcome: Side
    won: bool
    bankroll_after_cents: int
    timestamp_ms: int = 0


@dataclass(frozen=True, slots=True)
class GameState:
    """Snapshot of a session between flips."""

    bankroll_cents: int
    flips_done: int = 0
    status: Status = Status.ACTIVE
    cap_hit: bool = False
    seq: int = 0


def new_session(config: GameConfig) -> GameState:
    """A fresh state at the starting bankroll.

    A zero-flip budget starts the session already finished; a starting
    bankroll at or above the cap starts it with cap_hit latched.
    """
    status = Status.FINISHED if config.max_flips == 0 else Status.ACTIVE
    cap_hit = config.cap_cents is not None and config.start_cents >= config.cap_cents
    return GameState(bankroll_cents=config.start_cents, status=status, cap_hit=cap_hit)


def validate_bet(state: GameState, intent: BetIntent, config: GameConfig) -> Optional[str]:
    """Why this bet cannot be placed, or None if it can.

    Checked in order: the session must still be live with flips remaining,
    the amount must meet the table minimum, and the amount must not exceed
    the bankroll. Never mutates anything.
    """
    if state.status is not Status.ACTIVE or state.flips_done >= config.max_flips:
        return SESSION_OVER
    if intent.amount_cents < config.min_bet_cents:
        return BELOW_MINIMUM
    if intent.amount_cents > state.bankroll_cents:
        return EXCEEDS_BANKROLL
    return None


def apply_flip(
    state: GameState,
    intent: BetIntent,
    outcome: Side,
    config: GameConfig,
    ts_ms: int = 0,
) -> tuple[GameState, FlipRecord]:
    """Resolve one flip against a known outcome; return (next state, record).

    Pure: the same (state, intent, outcome) always yields the same result.
    Raises ValueError if the bet is invalid in this state.
    """
    violation = validate_bet(state, intent, config)
    if violation is not None:
        raise ValueError(f"invalid bet: {violation}")

    won = outcome == intent.side
    bankroll = state.bankroll_cents + (intent.amount_cents if won else -intent.amount_cents)
    flips_done = state.flips_done + 1

    if flips_done >= config.max_flips:
        status = Status.FINISHED
    elif bankroll < config.min_bet_cents:
        status = Status.RUINED
    else:
        status = Status.ACTIVE

    cap_hit = state.cap_hit or (config.cap_cents is not None and bankroll >= config.cap_cents)
    record = FlipRecord(
        seq=state.seq,
        side=intent.side,
        amount_cents=intent.amount_cents,
        outcome=outcome,
        won=won,
        bankroll_after_cents=bankroll,
        timestamp_ms=ts_ms,
    )
    next_state = GameState(
        bankroll_cents=bankroll,
        flips_done=flips_done,
        status=status,
        cap_hit=cap_hit,
        seq=state.seq + 1,
    )
    return next_state, record


def place_bet(
    state: GameState,
    intent: BetIntent,
    config: GameConfig,
    rng: np.random.Generator,
    ts_ms: int = 0,
) -> tuple[GameState, FlipRecord]:
    """Resolve one flip using the next uniform draw from ``rng``.

    Consumes exactly one draw per flip: heads iff u < p_heads. Keeping the
    draw count fixed is what lets a recovered session skip ahead to the same
    point in its stream.
    """
    outcome = Side.HEADS if rng.random() < config.p_heads else Side.TAILS
    return apply_flip(state, intent, outcome, config, ts_ms=ts_ms)


def payout(state: GameState, config: GameConfig) -> int:
    """What the player walks away with: bankroll, clipped to the cap if any."""
    if config.cap_cents is not None:
        return min(state.bankroll_cents, config.cap_cents)
    return state.bankroll_cents


def replay(
    config: GameConfig, records: list[FlipRecord] | tuple[FlipRecord, ...]
) -> GameState:
    """Rebuild a state by folding flip records through apply_flip.

    Raises ValueError if any record's bankroll_after_cents disagrees with the
    recomputed transition — a corrupt or reordered log fails loudly.
    """
    state = new_session(config)
    for rec in records:
        intent = BetIntent(side=rec.side, amount_cents=rec.amount_cents)
        state, _ = apply_flip(state, intent, rec.outcome, config, ts_ms=rec.timestamp_ms)
        if state.bankroll_cents != rec.bankroll_after_cents:
            raise ValueError(
                f"replay mismatch at seq {rec.seq}: "
                f"recomputed {state.bankroll_cents}, recorded {rec.bankroll_after_cents}"
            )
    return state


def derive_path_stream(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one simulated path.

    Spawn-key derivation gives every path its own PCG64 stream; the same
    (master_seed, path_index) pair always yields the same stream, regardless
    of how many other paths exist or in what order they run.
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.PCG64(seq))


def derive_session_stream(
    session_id: str,
    master_seed: Optional[int] = None,
    explicit_seed: Optional[int] = None,
) -> np.random.Generator:
    """Stream for a live session.

    An explicit seed (test mode) wins outright; otherwise the stream hashes
    the server master seed together with the session id. Either way the
    derivation is stable, so a restarted server rebuilds the identical
    stream for an existing session and can skip already-consumed draws.
    """
    if explicit_seed is not None:
        entropy: int = explicit_seed
    else:
        material = f"{'' if master_seed is None else master_seed}|{session_id}"
        digest = hashlib.sha256(material.encode("utf-8")).digest()
        entropy = int.from_bytes(digest[:8], "big")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=entropy)))


__all__ = [
    "Side",
    "Status",
    "CapDisclosure",
    "GameConfig",
    "BetIntent",
    "FlipRecord",
    "GameState",
    "new_session",
    "validate_bet",
    "apply_flip",
    "place_bet",
    "payout",
    "replay",
    "derive_path_stream",
    "derive_session_stream",
    "BELOW_MINIMUM",
    "EXCEEDS_BANKROLL",
    "SESSION_OVER",
]
