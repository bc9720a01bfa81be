"""Append-only event-log persistence, one JSONL file per session.

The log is the source of truth: every state the service reports is
reconstructable by folding a session's events through the engine. Writes
are single os.write calls so multi-event appends (a bet and its flip) land
together; recovery tolerates a torn tail by truncating to the last
consistent prefix — a bet_placed whose flip_resolved never made it is
dropped with it, so a half-recorded flip is unobservable after restart.
Terminal events are fsynced before the call returns.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Optional

from ..behavior import SessionLedger
from ..engine import CapDisclosure, FlipRecord, GameConfig, Side

# Event kinds.
SESSION_CREATED = "session_created"
BET_PLACED = "bet_placed"
FLIP_RESOLVED = "flip_resolved"
CAP_REACHED = "cap_reached"
SESSION_FINISHED = "session_finished"
ANSWER_RECORDED = "answer_recorded"

TERMINAL_KINDS = {SESSION_FINISHED}


def config_to_payload(config: GameConfig) -> dict:
    return {
        "p_heads": config.p_heads,
        "start_cents": config.start_cents,
        "cap_cents": config.cap_cents,
        "max_flips": config.max_flips,
        "session_seconds": config.session_seconds,
        "min_bet_cents": config.min_bet_cents,
        "cap_disclosure": config.cap_disclosure.value,
    }


def payload_to_config(payload: dict) -> GameConfig:
    return GameConfig(
        p_heads=payload["p_heads"],
        start_cents=payload["start_cents"],
        cap_cents=payload["cap_cents"],
        max_flips=payload["max_flips"],
        session_seconds=payload["session_seconds"],
        min_bet_cents=payload["min_bet_cents"],
        cap_disclosure=CapDisclosure(payload["cap_disclosure"]),
    )


def record_to_payload(record: FlipRecord) -> dict:
    return {
        "seq": record.seq,
        "side": record.side.value,
        "amount_cents": record.amount_cents,
        "outcome": record.outcome.value,
        "won": record.won,
        "bankroll_after_cents": record.bankroll_after_cents,
        "timestamp_ms": record.timestamp_ms,
    }


def payload_to_record(payload: dict) -> FlipRecord:
    return FlipRecord(
        seq=payload["seq"],
        side=Side(payload["side"]),
        amount_cents=payload["amount_cents"],
        outcome=Side(payload["outcome"]),
        won=payload["won"],
        bankroll_after_cents=payload["bankroll_after_cents"],
        timestamp_ms=payload["timestamp_ms"],
    )


class EventStore:
    """Per-session JSONL event logs under ``data_dir/sessions``."""

    def __init__(self, data_dir: str | Path) -> None:
        self.root = Path(data_dir) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, events: list[dict], fsync: bool = False) -> None:
        """Append events as one write; fsync when asked or on terminal kinds."""
        data = "".join(json.dumps(e, separators=(",", ":")) + "\n" for e in events)
        must_sync = fsync or any(e.get("kind") in TERMINAL_KINDS for e in events)
        fd = os.open(self._path(session_id), os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
        try:
            os.write(fd, data.encode("utf-8"))
            if must_sync:
                os.fsync(fd)
        finally:
            os.close(fd)

    def load(self, session_id: str, repair: bool = True) -> list[dict]:
        """Read a session's events, truncating any inconsistent tail.

        Drops (and, with ``repair``, physically truncates away) a torn final
        line and a trailing bet_placed that lost its flip_resolved to a
        crash, so every loaded log respects the bet/flip pairing invariant.
        """
        path = self._path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        raw = path.read_bytes()

        events: list[dict] = []
        ends: list[int] = []  # byte offset just past each parsed event
        offset = 0
        for line in raw.split(b"\n")[:-1]:
            end = offset + len(line) + 1
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                break  # torn write: ignore this and anything after it
            ends.append(end)
            offset = end

        # A dangling bet_placed means its flip never committed: drop the pair head.
        while events and events[-1].get("kind") == BET_PLACED:
            events.pop()
            ends.pop()
        good_bytes = ends[-1] if ends else 0

        if repair and good_bytes < len(raw):
            with open(path, "r+b") as fh:
                fh.truncate(good_bytes)
        return events

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))


def _ledger_from_events(session_id: str, events: Iterable[dict]) -> Optional[SessionLedger]:
    config: Optional[GameConfig] = None
    records: list[FlipRecord] = []
    answers: dict[str, object] = {}
    for event in events:
        kind = event.get("kind")
        payload = event.get("payload", {})
        if kind == SESSION_CREATED:
            config = payload_to_config(payload["config"])
        elif kind == FLIP_RESOLVED:
            records.append(payload_to_record(payload))
        elif kind == ANSWER_RECORDED:
            answers[payload["question_id"]] = payload["value"]
    if config is None:
        return None
    return SessionLedger(
        session_id=session_id,
        config=config,
        records=tuple(records),
        answers=tuple(answers.items()),
    )


def read_ledgers(path: str | Path) -> list[SessionLedger]:
    """Load session ledgers from an events file, directory, or store root.

    Accepts a single .jsonl file (one or many sessions' events, grouped by
    their session_id field), a directory of .jsonl files, or a data dir
    containing a ``sessions/`` subdirectory.
    """
    path = Path(path)
    files: list[Path]
    if path.is_dir():
        sub = path / "sessions"
        root = sub if sub.is_dir() else path
        files = sorted(root.glob("*.jsonl"))
    else:
        files = [path]

    grouped: dict[str, list[dict]] = {}
    order: list[str] = []
    for file in files:
        with open(file, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                sid = event.get("session_id", file.stem)
                if sid not in grouped:
                    grouped[sid] = []
                    order.append(sid)
                grouped[sid].append(event)

    ledgers = []
    for sid in order:
        ledger = _ledger_from_events(sid, grouped[sid])
        if ledger is not None and ledger.records:
            ledgers.append(ledger)
    return ledgers


__all__ = [
    "SESSION_CREATED",
    "BET_PLACED",
    "FLIP_RESOLVED",
    "CAP_REACHED",
    "SESSION_FINISHED",
    "ANSWER_RECORDED",
    "EventStore",
    "config_to_payload",
    "payload_to_config",
    "record_to_payload",
    "payload_to_record",
    "read_ledgers",
]
