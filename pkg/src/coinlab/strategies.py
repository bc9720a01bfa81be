"""Parameterized betting policies over a read-only view of the game.

Each policy maps what a live player can see (bankroll, flips left, the last
flip, the cap if it has been revealed) to the next bet, or to "stop". All
policies here bet the favourable side (heads) except all_in, which takes the
side as a parameter. Amounts are floored to whole cents and clamped into
[min_bet, bankroll], so every emitted intent passes validate_bet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional

from .engine import BetIntent, FlipRecord, GameConfig, GameState, Side

# Strategy kinds.
KELLY = "kelly"
FRACTIONAL = "fractional"
CONSTANT_AMOUNT = "constant_amount"
MARTINGALE = "martingale"
ALL_IN = "all_in"
GLIDE = "glide"

# Martingale win-handling modes.
RESET_ON_WIN = "reset_on_win"
HALVE_ON_WIN = "halve_on_win"

_KINDS = (KELLY, FRACTIONAL, CONSTANT_AMOUNT, MARTINGALE, ALL_IN, GLIDE)

GLIDE_TOLERANCE = 1e-6  # absolute tolerance of the bisection solve


@dataclass(frozen=True, slots=True)
class StateView:
    """The information set a live player has between flips.

    ``known_cap_cents`` is present only when the cap is disclosed up front or
    has already been hit; a hidden, untouched cap stays invisible to policies.
    """

    bankroll_cents: int
    flips_done: int
    flips_remaining: int
    last_record: Optional[FlipRecord] = None
    known_cap_cents: Optional[int] = None


def view_of(
    state: GameState, config: GameConfig, last_record: Optional[FlipRecord] = None
) -> StateView:
    """Project a full GameState down to what a player may act on."""
    cap_known = config.cap_cents is not None and (
        config.cap_disclosure.value == "shown" or state.cap_hit
    )
    return StateView(
        bankroll_cents=state.bankroll_cents,
        flips_done=state.flips_done,
        flips_remaining=config.max_flips - state.flips_done,
        last_record=last_record,
        known_cap_cents=config.cap_cents if cap_known else None,
    )


@dataclass(frozen=True, slots=True)
class StrategySpec:
    """A named policy with its parameters.

    kind            parameters
    ----            ----------
    kelly           (none; fraction is 2·p_heads − 1)
    fractional      f in (0, 1]: fixed fraction of bankroll
    constant_amount c cents >= 1: same wager every flip
    martingale      base cents >= 1, factor > 1, mode reset_on_win|halve_on_win
    all_in          side: whole bankroll on one flip, then stop
    glide           f_start in (0, 1]: fixed fraction until the cap is known,
                    then the smallest fraction that still reaches the cap
    """

    kind: str
    f: Optional[float] = None
    c: Optional[int] = None
    base: Optional[int] = None
    factor: float = 2.0
    mode: str = RESET_ON_WIN
    side: Side = Side.HEADS
    f_start: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == FRACTIONAL:
            if self.f is None or not 0.0 < self.f <= 1.0:
                raise ValueError("fractional requires f in (0, 1]")
        if self.kind == CONSTANT_AMOUNT:
            if self.c is None or self.c < 1:
                raise ValueError("constant_amount requires c >= 1 cents")
        if self.kind == MARTINGALE:
            if self.base is None or self.base < 1:
                raise ValueError("martingale requires base >= 1 cents")
            if self.factor <= 1.0:
                raise ValueError("martingale requires factor > 1")
            if self.mode not in (RESET_ON_WIN, HALVE_ON_WIN):
                raise ValueError(f"unknown martingale mode {self.mode!r}")
        if self.kind == GLIDE:
            if self.f_start is None or not 0.0 < self.f_start <= 1.0:
                raise ValueError("glide requires f_start in (0, 1]")

    def label(self) -> str:
        """Compact CLI-style name, e.g. 'fractional:f=0.15'."""
        if self.kind == KELLY:
            return "kelly"
        if self.kind == FRACTIONAL:
            return f"fractional:f={self.f:g}"
        if self.kind == CONSTANT_AMOUNT:
            return f"constant:c={self.c}"
        if self.kind == MARTINGALE:
            text = f"martingale:base={self.base},factor={self.factor:g}"
            if self.mode != RESET_ON_WIN:
                text += f",mode={self.mode}"
            return text
        if self.kind == ALL_IN:
            return f"allin:side={self.side.value}"
        return f"glide:f={self.f_start:g}"


def kelly_fraction(p: float) -> float:
    """Optimal fixed fraction for an even-money bet won with probability p.

    2p − 1, clamped to [0, 1]: no edge means no bet, certainty means all of it.
    Computed in decimal arithmetic on the shortest decimal form of p: binary
    dust in 2·0.6 − 1 would otherwise floor the opening bet on 2500¢ to 499¢.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    f = float(2 * Decimal(str(p)) - 1)
    return min(1.0, max(0.0, f))


def glide_fraction(
    bankroll_cents: float, known_cap_cents: float, flips_remaining: int, f_start: float
) -> float:
    """Smallest fraction that still reaches the cap if every flip wins.

    Solves bankroll·(1+g)^flips_remaining >= cap for the least g in
    [0, f_start] by bisection to 1e-6 absolute tolerance. Returns 0 when the
    bankroll is already at the cap, and falls back to f_start when even
    f_start cannot get there.
    """
    if flips_remaining < 1:
        raise ValueError("flips_remaining must be >= 1")
    if bankroll_cents >= known_cap_cents:
        return 0.0
    target = known_cap_cents / bankroll_cents

    def reaches(g: float) -> bool:
        return (1.0 + g) ** flips_remaining >= target

    if not reaches(f_start):
        return f_start
    lo, hi = 0.0, f_start  # reaches(hi) holds; shrink toward the least g
    while hi - lo > GLIDE_TOLERANCE:
        mid = (lo + hi) / 2.0
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _clamp(amount: int, bankroll: int, min_bet: int) -> int:
    """Common amount rule: floor already applied; lift to min_bet, cap at bankroll."""
    return min(max(amount, min_bet), bankroll)


def next_bet(
    spec: StrategySpec,
    view: StateView,
    p_heads: float,
    min_bet_cents: int = 1,
) -> Optional[BetIntent]:
    """The policy's next wager for this view, or None to stop betting.

    Stops on ruin (bankroll below the minimum bet) and after an all_in has
    fired. Pure given (spec, view): martingale's memory is the last record
    carried by the view itself.
    """
    bankroll = view.bankroll_cents
    if bankroll < min_bet_cents:
        return None

    if spec.kind == ALL_IN:
        if view.flips_done > 0:
            return None  # the one shot has been taken
        return BetIntent(side=spec.side, amount_cents=bankroll)

    if spec.kind == KELLY:
        amount = math.floor(kelly_fraction(p_heads) * bankroll)
    elif spec.kind == FRACTIONAL:
        amount = math.floor(spec.f * bankroll)
    elif spec.kind == CONSTANT_AMOUNT:
        amount = min(spec.c, bankroll)
    elif spec.kind == MARTINGALE:
        last = view.last_record
        if last is None:
            amount = spec.base
        elif last.won:
            amount = spec.base if spec.mode == RESET_ON_WIN else last.amount_cents // 2
        else:
            amount = math.floor(last.amount_cents * spec.factor)
    else:  # GLIDE
        if view.known_cap_cents is None:
            g = spec.f_start
        else:
            g = glide_fraction(
                bankroll, view.known_cap_cents, max(1, view.flips_remaining), spec.f_start
            )
        amount = math.floor(g * bankroll)

    return BetIntent(side=Side.HEADS, amount_cents=_clamp(amount, bankroll, min_bet_cents))


def parse_strategy(text: str) -> StrategySpec:
    """Parse the CLI vocabulary into a StrategySpec.

    Accepted forms: kelly | fractional:f=0.15 | constant:c=100 |
    martingale:base=25,factor=2[,mode=reset_on_win] | allin:side=heads |
    glide:f=0.2
    """
    name, _, arg_text = text.strip().partition(":")
    name = name.strip().lower()
    args: dict[str, str] = {}
    if arg_text:
        for part in arg_text.split(","):
            key, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"malformed strategy argument {part!r} in {text!r}")
            args[key.strip()] = value.strip()

    try:
        if name == "kelly":
            return StrategySpec(kind=KELLY)
        if name == "fractional":
            return StrategySpec(kind=FRACTIONAL, f=float(args["f"]))
        if name == "constant":
            return StrategySpec(kind=CONSTANT_AMOUNT, c=int(args["c"]))
        if name == "martingale":
            return StrategySpec(
                kind=MARTINGALE,
                base=int(args["base"]),
                factor=float(args.get("factor", "2")),
                mode=args.get("mode", RESET_ON_WIN),
            )
        if name == "allin":
            return StrategySpec(kind=ALL_IN, side=Side(args.get("side", "heads")))
        if name == "glide":
            raw = args.get("f", args.get("f_start"))
            if raw is None:
                raise KeyError("'f'")
            return StrategySpec(kind=GLIDE, f_start=float(raw))
    except KeyError as exc:
        raise ValueError(f"strategy {name!r} is missing required argument {exc}") from exc
    raise ValueError(
        f"unknown strategy {name!r}; expected kelly | fractional:f= | constant:c= | "
        f"martingale:base=,factor= | allin:side= | glide:f="
    )


__all__ = [
    "KELLY",
    "FRACTIONAL",
    "CONSTANT_AMOUNT",
    "MARTINGALE",
    "ALL_IN",
    "GLIDE",
    "RESET_ON_WIN",
    "HALVE_ON_WIN",
    "StateView",
    "StrategySpec",
    "view_of",
    "kelly_fraction",
    "glide_fraction",
    "next_bet",
    "parse_strategy",
]
