"""Shared test helpers: scripted randomness, ledger builders, app factories."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import pytest
from fastapi.testclient import TestClient

from coinlab.behavior import SessionLedger
from coinlab.engine import BetIntent, GameConfig, Side, apply_flip, new_session
from coinlab.service import ServiceSettings, create_app

# A uniform draw below p_heads resolves heads; at or above it, tails.
HEADS_DRAW = 0.0
TAILS_DRAW = 0.999999


class ScriptedRng:
    """Stands in for a numpy Generator, replaying a fixed list of uniforms."""

    def __init__(self, draws: Iterable[float]) -> None:
        self._draws = list(draws)
        self._pos = 0

    def random(self, size: Optional[int] = None):
        if size is not None:
            raise NotImplementedError("scripted draws are scalar-only")
        u = self._draws[self._pos]
        self._pos += 1
        return u


def rng_for_outcomes(outcomes: Sequence[Side | str]) -> ScriptedRng:
    """An rng whose draws force the given outcome sequence at any p in (0, 1)."""
    return ScriptedRng(
        [HEADS_DRAW if Side(o) is Side.HEADS else TAILS_DRAW for o in outcomes]
    )


def build_ledger(
    bets: Sequence[tuple[Side | str, int]],
    outcomes: Sequence[Side | str],
    config: Optional[GameConfig] = None,
    session_id: str = "fixture",
    answers: Sequence[tuple[str, object]] = (),
) -> SessionLedger:
    """Fold scripted (side, amount) bets against scripted outcomes."""
    assert len(bets) == len(outcomes)
    if config is None:
        config = GameConfig(max_flips=max(len(bets), 1))
    state = new_session(config)
    records = []
    for (side, amount), outcome in zip(bets, outcomes):
        intent = BetIntent(side=Side(side), amount_cents=amount)
        state, rec = apply_flip(state, intent, Side(outcome), config)
        records.append(rec)
    return SessionLedger(
        session_id=session_id,
        config=config,
        records=tuple(records),
        answers=tuple(answers),
    )


def store_ledger(store, ledger: SessionLedger) -> None:
    """Persist a fixture ledger as a well-formed event log."""
    from coinlab.service import store as ev

    events = [{
        "session_id": ledger.session_id, "seq": 0, "ts_ms": 0,
        "kind": ev.SESSION_CREATED,
        "payload": {"config": ev.config_to_payload(ledger.config)},
    }]
    seq = 1
    for rec in ledger.records:
        events.append({
            "session_id": ledger.session_id, "seq": seq, "ts_ms": 0,
            "kind": ev.BET_PLACED,
            "payload": {"side": rec.side.value, "amount_cents": rec.amount_cents},
        })
        events.append({
            "session_id": ledger.session_id, "seq": seq + 1, "ts_ms": 0,
            "kind": ev.FLIP_RESOLVED, "payload": ev.record_to_payload(rec),
        })
        seq += 2
    for question_id, value in ledger.answers:
        events.append({
            "session_id": ledger.session_id, "seq": seq, "ts_ms": 0,
            "kind": ev.ANSWER_RECORDED,
            "payload": {"question_id": question_id, "value": value},
        })
        seq += 1
    store.append(ledger.session_id, events)


@pytest.fixture
def make_app(tmp_path):
    """Factory for a TestClient over a fresh (or shared) data dir.

    Returns (client, clock) where ``clock`` is a mutable dict: set
    ``clock["now"]`` to steer the server's notion of the current time (ms).
    """
    counter = {"n": 0}

    def make(data_dir=None, now: int = 1_000_000, **settings_kw):
        if data_dir is None:
            counter["n"] += 1
            data_dir = tmp_path / f"data{counter['n']}"
        settings_kw.setdefault("test_mode", True)
        settings = ServiceSettings(data_dir=data_dir, **settings_kw)
        clock = {"now": now}
        app = create_app(settings, clock=lambda: clock["now"])
        return TestClient(app), clock

    return make
