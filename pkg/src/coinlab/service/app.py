"""FastAPI facade over the engine with event-sourced sessions.

One live object per session guards its state, RNG stream, and event-log
appends behind a lock, so concurrent bets serialize cleanly. Every mutation
is persisted before the response leaves; a restarted server rebuilds all
sessions by scanning the store and replaying events, then fast-forwards
each session's RNG stream past the draws it already consumed (exactly one
per flip).
"""

from __future__ import annotations

import importlib.resources
import json
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles

from ..engine import (
    BELOW_MINIMUM,
    EXCEEDS_BANKROLL,
    BetIntent,
    GameConfig,
    GameState,
    Side,
    derive_session_stream,
    new_session,
    payout,
    place_bet,
    replay,
    validate_bet,
)
from . import store as ev
from .models import (
    AnswerRequest,
    AnswerResponse,
    BetRequest,
    BetResponse,
    CreateSessionRequest,
    EventModel,
    FinishResponse,
    Question,
    SessionStateView,
)
from .store import EventStore


def _now_ms() -> int:
    return int(time.time() * 1000)


@dataclass
class ServiceSettings:
    """Server-level knobs; per-session rules live in GameConfig."""

    data_dir: str | Path = "coinlab-data"
    session_seconds: int = 1800
    max_flips: int = 300
    min_interval_ms: int = 0          # optional throttle between bets (0 = off)
    master_seed: Optional[int] = None
    test_mode: bool = False           # allows explicit per-session seeds
    max_cap_cents: int = 100_000      # ceiling for cap overrides
    questionnaire_path: Optional[str | Path] = None
    static_dir: Optional[str | Path] = None


def load_questionnaire(path: Optional[str | Path] = None) -> list[Question]:
    """The static pre/post question list (id, prompt, kind, phase)."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            importlib.resources.files("coinlab.service")
            .joinpath("questionnaire.json")
            .read_text(encoding="utf-8")
        )
    return [Question(**q) for q in json.loads(text)]


class LiveSession:
    """Runtime shell around one session's state, stream, and lock."""

    __slots__ = (
        "id",
        "config",
        "state",
        "lock",
        "rng",
        "deadline_ms",
        "last_bet_ms",
        "next_seq",
        "finished_payout",
        "answers",
        "last_record",
    )

    def __init__(self, sid: str, config: GameConfig, state: GameState, rng,
                 deadline_ms: Optional[int], next_seq: int) -> None:
        self.id = sid
        self.config = config
        self.state = state
        self.lock = threading.Lock()
        self.rng = rng
        self.deadline_ms = deadline_ms
        self.last_bet_ms = 0
        self.next_seq = next_seq
        self.finished_payout: Optional[int] = None
        self.answers: dict[str, object] = {}
        self.last_record = None


def _error(status: int, tag: str, detail: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"error": tag, "detail": detail})


class SessionManager:
    """All live sessions plus the store; rebuilds everything on startup."""

    def __init__(self, settings: ServiceSettings, clock: Callable[[], int]) -> None:
        self.settings = settings
        self.clock = clock
        self.store = EventStore(settings.data_dir)
        self.questions = load_questionnaire(settings.questionnaire_path)
        self.question_ids = {q.id for q in self.questions}
        self._sessions: dict[str, LiveSession] = {}
        self._registry_lock = threading.Lock()
        for sid in self.store.session_ids():
            sess = self._rebuild(sid)
            if sess is not None:
                self._sessions[sid] = sess

    # -- construction -----------------------------------------------------

    def _rebuild(self, sid: str) -> Optional[LiveSession]:
        events = self.store.load(sid)
        if not events or events[0].get("kind") != ev.SESSION_CREATED:
            return None
        created = events[0]["payload"]
        config = ev.payload_to_config(created["config"])
        records = [
            ev.payload_to_record(e["payload"])
            for e in events
            if e.get("kind") == ev.FLIP_RESOLVED
        ]
        state = replay(config, records)
        rng = derive_session_stream(
            sid, master_seed=self.settings.master_seed, explicit_seed=created.get("seed")
        )
        rng.random(state.flips_done)  # skip draws already consumed by replayed flips
        sess = LiveSession(
            sid, config, state, rng,
            deadline_ms=created.get("deadline_ms"),
            next_seq=events[-1]["seq"] + 1,
        )
        if records:
            sess.last_record = records[-1]
            sess.last_bet_ms = records[-1].timestamp_ms
        for e in events:
            if e.get("kind") == ev.ANSWER_RECORDED:
                sess.answers[e["payload"]["question_id"]] = e["payload"]["value"]
            elif e.get("kind") == ev.SESSION_FINISHED:
                sess.finished_payout = e["payload"]["payout_cents"]
        return sess

    def create(self, req: CreateSessionRequest) -> LiveSession:
        if req.seed is not None and not self.settings.test_mode:
            raise _error(400, "seed_requires_test_mode",
                         "explicit seeds are only accepted when the server runs in test mode")
        if req.cap_cents is not None and req.cap_cents > self.settings.max_cap_cents:
            raise _error(400, "cap_above_maximum",
                         f"cap_cents may not exceed {self.settings.max_cap_cents}")

        defaults = GameConfig(
            session_seconds=self.settings.session_seconds,
            max_flips=self.settings.max_flips,
        )
        overrides = {
            k: v
            for k, v in (
                ("p_heads", req.p_heads),
                ("start_cents", req.start_cents),
                ("cap_cents", req.cap_cents),
                ("max_flips", req.max_flips),
                ("session_seconds", req.session_seconds),
                ("min_bet_cents", req.min_bet_cents),
                ("cap_disclosure", req.cap_disclosure),
            )
            if v is not None
        }
        try:
            config = GameConfig(
                p_heads=overrides.get("p_heads", defaults.p_heads),
                start_cents=overrides.get("start_cents", defaults.start_cents),
                cap_cents=overrides.get("cap_cents", defaults.cap_cents),
                max_flips=overrides.get("max_flips", defaults.max_flips),
                session_seconds=overrides.get("session_seconds", defaults.session_seconds),
                min_bet_cents=overrides.get("min_bet_cents", defaults.min_bet_cents),
                cap_disclosure=overrides.get("cap_disclosure", defaults.cap_disclosure),
            )
        except ValueError as exc:
            raise _error(400, "invalid_config", str(exc)) from exc

        sid = uuid.uuid4().hex[:16]
        now = self.clock()
        deadline = now + config.session_seconds * 1000 if config.session_seconds > 0 else None
        state = new_session(config)
        rng = derive_session_stream(
            sid, master_seed=self.settings.master_seed, explicit_seed=req.seed
        )
        payload = {
            "config": ev.config_to_payload(config),
            "deadline_ms": deadline,
            "created_ms": now,
        }
        if req.seed is not None:
            payload["seed"] = req.seed
        self.store.append(
            sid,
            [{"session_id": sid, "seq": 0, "ts_ms": now, "kind": ev.SESSION_CREATED,
              "payload": payload}],
        )
        sess = LiveSession(sid, config, state, rng, deadline, next_seq=1)
        with self._registry_lock:
            self._sessions[sid] = sess
        return sess

    def get(self, sid: str) -> LiveSession:
        with self._registry_lock:
            sess = self._sessions.get(sid)
        if sess is None:
            raise _error(404, "unknown_session", f"no session {sid!r}")
        return sess

    # -- views ------------------------------------------------------------

    def state_view(self, sess: LiveSession) -> SessionStateView:
        cfg = sess.config
        cap_known = cfg.cap_cents is not None and (
            cfg.cap_disclosure.value == "shown" or sess.state.cap_hit
        )
        status = sess.state.status.value
        if sess.finished_payout is not None and status == "active":
            status = "finished"  # cashed out voluntarily with flips left
        return SessionStateView(
            session_id=sess.id,
            status=status,
            bankroll_cents=sess.state.bankroll_cents,
            flips_done=sess.state.flips_done,
            flips_remaining=cfg.max_flips - sess.state.flips_done,
            max_flips=cfg.max_flips,
            min_bet_cents=cfg.min_bet_cents,
            p_heads=cfg.p_heads,
            start_cents=cfg.start_cents,
            cap_hit=sess.state.cap_hit,
            cap_cents=cfg.cap_cents if cap_known else None,
            deadline_ms=sess.deadline_ms,
            server_now_ms=self.clock(),
            payout_cents=sess.finished_payout,
        )

    # -- operations -------------------------------------------------------

    def bet(self, sid: str, req: BetRequest) -> BetResponse:
        sess = self.get(sid)
        with sess.lock:
            now = self.clock()
            if sess.finished_payout is not None:
                raise _error(409, "session_over", "session already finished")
            if sess.deadline_ms is not None and now >= sess.deadline_ms:
                raise _error(409, "session_over", "session deadline has passed")
            if (
                self.settings.min_interval_ms > 0
                and sess.last_bet_ms
                and now - sess.last_bet_ms < self.settings.min_interval_ms
            ):
                raise _error(429, "too_many_bets",
                             f"wait {self.settings.min_interval_ms} ms between bets")

            intent = BetIntent(side=Side(req.side), amount_cents=req.amount_cents)
            violation = validate_bet(sess.state, intent, sess.config)
            if violation == "session_over":
                raise _error(409, "session_over", "no flips remaining or session ended")
            if violation in (BELOW_MINIMUM, EXCEEDS_BANKROLL):
                raise _error(400, violation, f"bet of {req.amount_cents} cents is invalid")

            prev_cap = sess.state.cap_hit
            state, record = place_bet(sess.state, intent, sess.config, sess.rng, ts_ms=now)
            cap_now = state.cap_hit and not prev_cap

            seq = sess.next_seq
            batch = [
                {"session_id": sid, "seq": seq, "ts_ms": now, "kind": ev.BET_PLACED,
                 "payload": {"side": req.side, "amount_cents": req.amount_cents}},
                {"session_id": sid, "seq": seq + 1, "ts_ms": now, "kind": ev.FLIP_RESOLVED,
                 "payload": ev.record_to_payload(record)},
            ]
            if cap_now:
                batch.append(
                    {"session_id": sid, "seq": seq + 2, "ts_ms": now, "kind": ev.CAP_REACHED,
                     "payload": {"bankroll_cents": state.bankroll_cents,
                                 "cap_cents": sess.config.cap_cents}}
                )
            self.store.append(sid, batch)

            sess.state = state
            sess.last_record = record
            sess.last_bet_ms = now
            sess.next_seq = seq + len(batch)

            cfg = sess.config
            cap_known = cfg.cap_cents is not None and (
                cfg.cap_disclosure.value == "shown" or state.cap_hit
            )
            return BetResponse(
                seq=record.seq,
                outcome=record.outcome.value,
                won=record.won,
                bankroll_after_cents=state.bankroll_cents,
                flips_done=state.flips_done,
                flips_remaining=cfg.max_flips - state.flips_done,
                status=state.status.value,
                cap_reached_now=cap_now,
                cap_cents=cfg.cap_cents if cap_known else None,
            )

    def finish(self, sid: str) -> FinishResponse:
        sess = self.get(sid)
        with sess.lock:
            if sess.finished_payout is None:
                pay = payout(sess.state, sess.config)
                now = self.clock()
                self.store.append(
                    sid,
                    [{"session_id": sid, "seq": sess.next_seq, "ts_ms": now,
                      "kind": ev.SESSION_FINISHED, "payload": {"payout_cents": pay}}],
                )
                sess.next_seq += 1
                sess.finished_payout = pay
            return FinishResponse(session_id=sid, payout_cents=sess.finished_payout)

    def answer(self, sid: str, req: AnswerRequest) -> AnswerResponse:
        sess = self.get(sid)
        if req.question_id not in self.question_ids:
            raise _error(400, "unknown_question", f"no question {req.question_id!r}")
        with sess.lock:
            now = self.clock()
            self.store.append(
                sid,
                [{"session_id": sid, "seq": sess.next_seq, "ts_ms": now,
                  "kind": ev.ANSWER_RECORDED,
                  "payload": {"question_id": req.question_id, "value": req.value}}],
            )
            sess.next_seq += 1
            sess.answers[req.question_id] = req.value
        return AnswerResponse(session_id=sid, question_id=req.question_id, recorded=True)

    def events(self, sid: str) -> list[EventModel]:
        sess = self.get(sid)
        cfg = sess.config
        cap_known = cfg.cap_cents is not None and (
            cfg.cap_disclosure.value == "shown" or sess.state.cap_hit
        )
        out = []
        for e in self.store.load(sid, repair=False):
            if not cap_known and e.get("kind") == ev.SESSION_CREATED:
                payload = dict(e["payload"])
                conf = dict(payload.get("config", {}))
                conf["cap_cents"] = None  # hidden cap never leaves the server
                payload["config"] = conf
                e = {**e, "payload": payload}
            out.append(EventModel(**e))
        return out


def create_app(
    settings: Optional[ServiceSettings] = None,
    clock: Optional[Callable[[], int]] = None,
) -> FastAPI:
    """Build the HTTP app. ``clock`` (ms since epoch) is injectable for tests."""
    settings = settings or ServiceSettings()
    manager = SessionManager(settings, clock or _now_ms)

    app = FastAPI(title="coinlab", version="0.1.0")
    app.state.manager = manager

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/api/sessions", response_model=SessionStateView, status_code=201)
    def create_session(req: CreateSessionRequest) -> SessionStateView:
        return manager.state_view(manager.create(req))

    @app.get("/api/sessions/{sid}", response_model=SessionStateView)
    def get_session(sid: str) -> SessionStateView:
        return manager.state_view(manager.get(sid))

    @app.post("/api/sessions/{sid}/bets", response_model=BetResponse)
    def post_bet(sid: str, req: BetRequest) -> BetResponse:
        return manager.bet(sid, req)

    @app.post("/api/sessions/{sid}/finish", response_model=FinishResponse)
    def finish_session(sid: str) -> FinishResponse:
        return manager.finish(sid)

    @app.post("/api/sessions/{sid}/answers", response_model=AnswerResponse)
    def record_answer(sid: str, req: AnswerRequest) -> AnswerResponse:
        return manager.answer(sid, req)

    @app.get("/api/sessions/{sid}/events", response_model=list[EventModel])
    def list_events(sid: str) -> list[EventModel]:
        return manager.events(sid)

    @app.get("/api/questionnaire", response_model=list[Question])
    def questionnaire() -> list[Question]:
        return manager.questions

    if settings.static_dir is not None:
        app.mount("/", StaticFiles(directory=str(settings.static_dir), html=True), name="ui")

    return app


__all__ = ["ServiceSettings", "SessionManager", "create_app", "load_questionnaire"]
