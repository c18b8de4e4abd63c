"""HTTP session service for the interactive planning loop.

A session is one game: create it, submit strategy text, review the proposed
deployment (each step shown with its intent and constraint), accept or
refine, then let scripted opponents take their turns. Three interaction
modes: the planner follows the stated intent, ignores it, or works against
it. Sessions persist as JSON files; one lock per session serializes writes.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .constraints import ConstraintSequence, MathAssign, SOFT, satisfies
from .engine import (
    Action,
    GameState,
    HistoryTrajectory,
    WHITE,
    apply as engine_apply,
    heuristic_opponent_turn,
    is_terminal,
    legal_actions,
    new_game,
)
from .errors import (
    CgplanError,
    EmptySequence,
    ExtractionParseError,
    IllegalAction,
    MalformedResponse,
    MissingReplayEntry,
    NoLegalAction,
    ProviderError,
)
from .extraction import ExtractionResult, StrategyInput, extract
from .fitness import EMPTY_PARAMS, FitnessWeights, fitness, params_from_constraints
from .gateway import LmGateway
from .riskmap import MapGraph, build_default_map
from .search import PlanResult, RiskDomain, SearchConfig, cg_mcts

ALIGNED = "Aligned"
AGNOSTIC = "Agnostic"
ADVERSARIAL = "Adversarial"
MODES = (ALIGNED, AGNOSTIC, ADVERSARIAL)

IDLE = "idle"
PLANNING = "planning"
READY = "ready"


@dataclass(frozen=True)
class ServiceConfig:
    sessions_dir: str = "sessions"
    weights: FitnessWeights = FitnessWeights()
    search: SearchConfig = SearchConfig()
    free_rollouts: int = 16  # budget when planning without constraints
    proposal_source: str = "exhaustive"  # or "gateway": ask the model for actions
    auth_token: str | None = None


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass
class Session:
    session_id: str
    mode: str
    state: GameState
    history: HistoryTrajectory = field(default_factory=HistoryTrajectory)
    pending_actions: list[Action] | None = None
    pending_proposal: dict | None = None
    last_intent: str | None = None
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "mode": self.mode,
            "state": self.state.to_json(),
            "history": self.history.to_json(),
            "pending_actions": [a.to_json() for a in self.pending_actions] if self.pending_actions else None,
            "pending_proposal": self.pending_proposal,
            "last_intent": self.last_intent,
            "created": self.created,
            "updated": self.updated,
        }

    @staticmethod
    def from_json(d: dict) -> "Session":
        return Session(
            session_id=d["session_id"],
            mode=d["mode"],
            state=GameState.from_json(d["state"]),
            history=HistoryTrajectory.from_json(d["history"]),
            pending_actions=(
                [Action.from_json(a) for a in d["pending_actions"]] if d.get("pending_actions") else None
            ),
            pending_proposal=d.get("pending_proposal"),
            last_intent=d.get("last_intent"),
            created=d["created"],
            updated=d["updated"],
        )


class _AdversarialDomain(RiskDomain):
    """Plans against the stated intent: an action qualifies only when it
    matches none of the extracted constraints."""

    def __init__(self, seq: ConstraintSequence, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._pairs = list(seq.pairs)

    def _conflicts(self, state, a) -> bool:
        for pair in self._pairs:
            c = pair.constraint_ast
            if isinstance(c, MathAssign):
                continue
            if satisfies(c, state, a, SOFT):
                return True
        return False

    def satisfies(self, pair, state, a, mode) -> bool:
        return not self._conflicts(state, a)

    def satisfying_actions(self, state, pair, mode):
        return [a for a in self.legal(state) if not self._conflicts(state, a)]


class SessionStore:
    """In-memory sessions with JSON-file persistence and per-session locks."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._status: dict[str, str] = {}
        self._registry_lock = threading.Lock()

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def status(self, session_id: str) -> str:
        return self._status.get(session_id, IDLE)

    def set_status(self, session_id: str, status: str) -> None:
        self._status[session_id] = status

    def add(self, session: Session) -> None:
        self._sessions[session.session_id] = session
        self.save(session)

    def get(self, session_id: str) -> Session:
        if session_id in self._sessions:
            return self._sessions[session_id]
        path = self._path(session_id)
        if path.exists():
            session = Session.from_json(json.loads(path.read_text(encoding="utf-8")))
            self._sessions[session_id] = session
            return session
        raise ApiError(404, "not_found", f"no session {session_id}")

    def save(self, session: Session) -> None:
        session.updated = time.time()
        self._path(session.session_id).write_text(
            json.dumps(session.to_json(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


# -- request bodies ----------------------------------------------------------------


class CreateSessionBody(BaseModel):
    mode: str
    seed: int | None = None


class IntentBody(BaseModel):
    strategy_text: str = ""
    reuse_last_intent: bool = False


class RefineBody(BaseModel):
    feedback_text: str


class ActionBody(BaseModel):
    action: dict


# -- planning ----------------------------------------------------------------------


def _project_steps(s0: GameState, result: PlanResult, g: MapGraph) -> list[dict]:
    """Wire steps, checked legal in sequence against the projected states."""
    steps = []
    state = s0
    for i, step in enumerate(result.per_step, start=1):
        a = step.action
        if not isinstance(a, Action):
            raise ApiError(500, "bad_plan", f"step {i} is not a board action")
        state = engine_apply(state, a, g)  # raises IllegalAction if drifted
        steps.append(
            {
                "step_id": i,
                "intent": step.intent,
                "constraint": step.constraint,
                "action": a.to_json(),
            }
        )
    return steps


def plan_for_mode(
    mode: str,
    strategy_text: str,
    state: GameState,
    g: MapGraph,
    gateway: LmGateway,
    cfg: ServiceConfig,
) -> tuple[PlanResult, ExtractionResult | None]:
    """Produce a plan per interaction mode.

    Follow: extract constraints, search with the hard filter. Ignore: skip
    extraction, search by fitness alone. Oppose: extract, then admit only
    actions that match none of the constraints.
    """
    player = state.current_player
    if mode == AGNOSTIC:
        domain = RiskDomain(
            g,
            player,
            weights=cfg.weights,
            gateway=gateway if cfg.proposal_source == "gateway" else None,
            strategy=strategy_text,
            proposal_source=cfg.proposal_source,
        )
        search_cfg = replace(cfg.search, constraint_filter=False, rollout_budget=cfg.free_rollouts)
        return cg_mcts(state, None, strategy_text, search_cfg, domain), None

    extraction = extract(StrategyInput(description=strategy_text, domain="risk", state=state), gateway, g)
    seq = extraction.sequence
    if mode == ALIGNED:
        params = params_from_constraints([p.constraint_ast for p in seq.pairs])
        domain = RiskDomain(
            g,
            player,
            weights=cfg.weights,
            params=params,
            gateway=gateway if cfg.proposal_source == "gateway" else None,
            strategy=strategy_text,
            proposal_source=cfg.proposal_source,
        )
        return cg_mcts(state, seq, strategy_text, cfg.search, domain), extraction
    # Adversarial: guided by the same rollouts but the filter is negated,
    # and fitness carries no constraint penalties.
    domain = _AdversarialDomain(
        seq,
        g,
        player,
        weights=cfg.weights,
        params=EMPTY_PARAMS,
        gateway=gateway if cfg.proposal_source == "gateway" else None,
        strategy=strategy_text,
        proposal_source=cfg.proposal_source,
    )
    search_cfg = replace(cfg.search, mode=SOFT, rollout_budget=max(seq.K, cfg.free_rollouts))
    return cg_mcts(state, seq, strategy_text, search_cfg, domain), extraction


def _proposal_json(
    session: Session, result: PlanResult, g: MapGraph, cfg: ServiceConfig
) -> tuple[dict, list[Action]]:
    if not result.actions:
        raise ApiError(502, "empty_plan", "planner returned no actions")
    steps = _project_steps(session.state, result, g)
    player = session.state.current_player
    before = fitness(session.state, player, g, cfg.weights, EMPTY_PARAMS)
    projected = session.state
    for a in result.actions:
        projected = engine_apply(projected, a, g)
    after = fitness(projected, player, g, cfg.weights, EMPTY_PARAMS)
    telemetry = result.telemetry.to_json()
    telemetry["constraint_filter"] = True  # overwritten below for free search
    proposal = {
        "steps": steps,
        "fitness_before": before,
        "fitness_after": after,
        "telemetry": telemetry,
    }
    return proposal, list(result.actions)


# -- the app -----------------------------------------------------------------------


def create_app(
    cfg: ServiceConfig,
    gateway: LmGateway,
    g: MapGraph | None = None,
) -> FastAPI:
    g = g or build_default_map()
    store = SessionStore(cfg.sessions_dir)
    app = FastAPI(title="constraint-guided planner service")
    app.state.store = store
    app.state.config = cfg

    def check_auth(request: Request) -> None:
        if cfg.auth_token is None:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {cfg.auth_token}":
            raise ApiError(401, "unauthorized", "missing or wrong bearer token")

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(CgplanError)
    async def _domain_error(_request: Request, exc: CgplanError):
        return JSONResponse(
            status_code=500,
            content={"code": "internal", "message": str(exc), "detail": type(exc).__name__},
        )

    @app.post("/sessions", status_code=201, dependencies=[Depends(check_auth)])
    def create_session(body: CreateSessionBody):
        if body.mode not in MODES:
            raise ApiError(400, "invalid_mode", f"mode must be one of {list(MODES)}")
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            mode=body.mode,
            state=new_game(seed=body.seed if body.seed is not None else 0),
        )
        store.add(session)
        return {"session_id": session.session_id, "state": session.state.to_json()}

    @app.post("/sessions/{session_id}/intent", dependencies=[Depends(check_auth)])
    def submit_intent(session_id: str, body: IntentBody):
        with store.lock(session_id):
            session = store.get(session_id)
            if session.pending_actions is not None:
                raise ApiError(409, "pending_plan", "a plan is already pending; accept or refine it")
            strategy = body.strategy_text.strip()
            if not strategy and body.reuse_last_intent:
                strategy = session.last_intent or ""
            if not strategy and session.mode != AGNOSTIC:
                raise ApiError(400, "empty_intent", "strategy_text is required in this mode")
            store.set_status(session_id, PLANNING)
            try:
                result, _extraction = plan_for_mode(
                    session.mode, strategy, session.state, g, gateway, cfg
                )
            except (
                ProviderError,
                MissingReplayEntry,
                ExtractionParseError,
                MalformedResponse,
                EmptySequence,
                NoLegalAction,
            ) as e:
                store.set_status(session_id, IDLE)
                raise ApiError(502, "planning_failed", "extraction or planning failed", str(e))
            proposal, actions = _proposal_json(session, result, g, cfg)
            if session.mode != ALIGNED:
                proposal["telemetry"]["constraint_filter"] = False
            session.pending_actions = actions
            session.pending_proposal = proposal
            session.last_intent = strategy or session.last_intent
            store.save(session)
            store.set_status(session_id, READY)
            return proposal

    def _advance_and_play_opponents(session: Session) -> None:
        """End phases that offer no real choice, then let scripted seats
        play until the human is back on the clock."""
        guard = 0
        while not is_terminal(session.state):
            if session.state.current_player == WHITE:
                legal = legal_actions(session.state, g)
                if len(legal) == 1 and legal[0].kind == "end_phase":
                    session.history.append(session.state, legal[0])
                    session.state = engine_apply(session.state, legal[0], g)
                    continue
                return
            for a in heuristic_opponent_turn(session.state, session.state.current_player, g):
                session.history.append(session.state, a)
                session.state = engine_apply(session.state, a, g)
                if is_terminal(session.state):
                    return
            guard += 1
            if guard > 200:
                raise ApiError(500, "opponent_loop", "opponents never yielded the turn")

    @app.post("/sessions/{session_id}/plan/accept", dependencies=[Depends(check_auth)])
    def accept_plan(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            if session.pending_actions is None:
                raise ApiError(409, "no_pending_plan", "nothing to accept")
            state = session.state
            try:
                for a in session.pending_actions:
                    state = engine_apply(state, a, g)
                    session.history.append(session.state, a)
                    session.state = state
            except IllegalAction as e:
                session.pending_actions = None
                session.pending_proposal = None
                store.save(session)
                store.set_status(session_id, IDLE)
                raise ApiError(500, "plan_stale", "plan is no longer legal and was discarded", str(e))
            _advance_and_play_opponents(session)
            session.pending_actions = None
            session.pending_proposal = None
            store.save(session)
            store.set_status(session_id, IDLE)
            return {"state": session.state.to_json()}

    @app.get("/sessions/{session_id}/actions", dependencies=[Depends(check_auth)])
    def list_actions(session_id: str):
        session = store.get(session_id)
        return {"actions": [a.to_json() for a in legal_actions(session.state, g)]}

    @app.post("/sessions/{session_id}/actions", dependencies=[Depends(check_auth)])
    def play_action(session_id: str, body: ActionBody):
        """Direct phase play (attack, freemove, ending a phase)."""
        with store.lock(session_id):
            session = store.get(session_id)
            if session.pending_actions is not None:
                raise ApiError(409, "pending_plan", "resolve the pending plan before direct play")
            try:
                action = Action.from_json(body.action)
            except (KeyError, TypeError, ValueError) as e:
                raise ApiError(400, "bad_action", "unparseable action payload", str(e))
            try:
                nxt = engine_apply(session.state, action, g)
            except IllegalAction as e:
                raise ApiError(400, "illegal_action", "action is not legal here", str(e))
            session.history.append(session.state, action)
            session.state = nxt
            _advance_and_play_opponents(session)
            store.save(session)
            return {"state": session.state.to_json()}

    @app.post("/sessions/{session_id}/plan/refine", dependencies=[Depends(check_auth)])
    def refine_plan(session_id: str, body: RefineBody):
        with store.lock(session_id):
            session = store.get(session_id)
            if session.pending_actions is None:
                raise ApiError(409, "no_pending_plan", "nothing to refine")
            strategy = f"{session.last_intent or ''}\n{body.feedback_text}".strip()
            store.set_status(session_id, PLANNING)
            try:
                result, _extraction = plan_for_mode(
                    session.mode, strategy, session.state, g, gateway, cfg
                )
            except (
                ProviderError,
                MissingReplayEntry,
                ExtractionParseError,
                MalformedResponse,
                EmptySequence,
                NoLegalAction,
            ) as e:
                store.set_status(session_id, READY)  # the prior plan still stands
                raise ApiError(502, "planning_failed", "extraction or planning failed", str(e))
            proposal, actions = _proposal_json(session, result, g, cfg)
            if session.mode != ALIGNED:
                proposal["telemetry"]["constraint_filter"] = False
            session.pending_actions = actions
            session.pending_proposal = proposal
            session.last_intent = strategy
            store.save(session)
            store.set_status(session_id, READY)
            return proposal

    @app.get("/sessions/{session_id}/plan/status", dependencies=[Depends(check_auth)])
    def plan_status(session_id: str):
        store.get(session_id)  # 404 on unknown id
        return {"status": store.status(session_id)}

    @app.get("/sessions/{session_id}", dependencies=[Depends(check_auth)])
    def get_session(session_id: str):
        session = store.get(session_id)
        return {
            "session_id": session.session_id,
            "mode": session.mode,
            "state": session.state.to_json(),
            "pending_proposal": session.pending_proposal,
            "history_len": len(session.history),
            "plan_status": store.status(session_id),
            "created": session.created,
            "updated": session.updated,
        }

    @app.get("/sessions/{session_id}/history", dependencies=[Depends(check_auth)])
    def get_history(session_id: str):
        session = store.get(session_id)
        return {"steps": session.history.to_json()}

    return app
