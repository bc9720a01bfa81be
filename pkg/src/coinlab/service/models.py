"""Request/response bodies for the HTTP API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    """Optional overrides of the default game rules.

    ``seed`` pins the session's outcome stream and is accepted only when the
    server runs in test mode.
    """

    p_heads: Optional[float] = None
    start_cents: Optional[int] = None
    cap_cents: Optional[int] = None
    max_flips: Optional[int] = None
    session_seconds: Optional[int] = None
    min_bet_cents: Optional[int] = None
    cap_disclosure: Optional[Literal["hidden", "shown"]] = None
    seed: Optional[int] = None


class SessionStateView(BaseModel):
    """What a player may see of a session; a hidden cap stays absent."""

    session_id: str
    status: Literal["active", "finished", "ruined"]
    bankroll_cents: int
    flips_done: int
    flips_remaining: int
    max_flips: int
    min_bet_cents: int
    p_heads: float
    start_cents: int
    cap_hit: bool
    cap_cents: Optional[int] = None
    deadline_ms: Optional[int] = None
    server_now_ms: int
    payout_cents: Optional[int] = None


class BetRequest(BaseModel):
    side: Literal["heads", "tails"]
    amount_cents: int = Field(description="whole cents, >= the table minimum")


class BetResponse(BaseModel):
    seq: int
    outcome: Literal["heads", "tails"]
    won: bool
    bankroll_after_cents: int
    flips_done: int
    flips_remaining: int
    status: Literal["active", "finished", "ruined"]
    cap_reached_now: bool
    cap_cents: Optional[int] = None  # present once the cap is known


class FinishResponse(BaseModel):
    session_id: str
    payout_cents: int


class AnswerRequest(BaseModel):
    question_id: str
    value: Any


class AnswerResponse(BaseModel):
    session_id: str
    question_id: str
    recorded: bool


class EventModel(BaseModel):
    session_id: str
    seq: int
    ts_ms: int
    kind: str
    payload: dict


class Question(BaseModel):
    id: str
    prompt: str
    kind: Literal["boolean", "number", "text"]
    phase: Literal["pre", "post"]


__all__ = [
    "CreateSessionRequest",
    "SessionStateView",
    "BetRequest",
    "BetResponse",
    "FinishResponse",
    "AnswerRequest",
    "AnswerResponse",
    "EventModel",
    "Question",
]
