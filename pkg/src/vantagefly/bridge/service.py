"""HTTP + server-push surface for operator sessions.

All angles are degrees at this boundary and every number rides as decimal
text inside JSON. The stream endpoint emits server-sent events, one event
per simulation step.
"""

from __future__ import annotations

import json
import math
import queue
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from ..config import WorkbenchConfig
from ..geometry import InvalidCapture, OutOfSafeZone, SmdCapture
from ..nets import CheckpointError
from .session import (
    BusyFlying,
    Gesture,
    InvalidGesture,
    NotAirborne,
    SessionClosed,
    SessionManager,
    gesture_from_pitch,
)

STREAM_POLL_S = 0.25
CONSOLE_DIR_DEFAULT = Path(__file__).resolve().parents[3] / "frontend"


def _mount_console(app: FastAPI, console_dir):
    """Serve the operator console statically when a built copy is present."""
    root = Path(console_dir) if console_dir else CONSOLE_DIR_DEFAULT
    if (root / "index.html").exists() and (root / "dist").exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/console", StaticFiles(directory=root, html=True), name="console")


class CreateSessionBody(BaseModel):
    checkpoint: str | None = None


class CaptureBody(BaseModel):
    pitch_deg: float = 0.0
    yaw_deg: float = 0.0
    face_cx: float = 0.5
    face_cy: float = 0.5
    face_ratio: float = 0.15


class GestureBody(BaseModel):
    gesture: str | None = None
    pitch_deg: float | None = None


def create_app(cfg: WorkbenchConfig | None = None, default_checkpoint=None,
               turbo: bool = False, console_dir=None) -> FastAPI:
    cfg = cfg if cfg is not None else WorkbenchConfig()
    manager = SessionManager(cfg, default_checkpoint=default_checkpoint, turbo=turbo)
    app = FastAPI(title="vantagefly bridge")
    app.state.manager = manager
    _mount_console(app, console_dir)

    def get_session(session_id: str):
        session = manager.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions")
    def create_session(body: CreateSessionBody | None = None):
        path = body.checkpoint if body else None
        try:
            session = manager.create(path)
        except CheckpointError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        det = session.detection()
        return {"id": session.id, "phase": session.phase.value,
                "cx": det.cx_d, "ratio": det.ratio_omega_d}

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        session = get_session(session_id)
        det = session.detection()
        return {"id": session.id, "phase": session.phase.value,
                "x": session.pose.x, "y": session.pose.y, "z": session.pose.z,
                "yaw": math.degrees(session.pose.yaw),
                "cx": det.cx_d, "cy": det.cy_d, "ratio": det.ratio_omega_d,
                "gallery_size": len(session.gallery)}

    @app.post("/sessions/{session_id}/capture")
    def submit_capture(session_id: str, body: CaptureBody):
        session = get_session(session_id)
        capture = SmdCapture(
            pitch_phi=math.radians(body.pitch_deg),
            yaw_psi=math.radians(body.yaw_deg),
            face_cx=body.face_cx,
            face_cy=body.face_cy,
            face_ratio_omega=body.face_ratio,
        )
        try:
            vantage = session.submit_capture(capture)
        except BusyFlying as exc:
            raise HTTPException(status_code=409, detail={"error": "busy_flying",
                                                         "message": str(exc)})
        except NotAirborne as exc:
            raise HTTPException(status_code=409, detail={"error": "not_airborne",
                                                         "message": str(exc)})
        except OutOfSafeZone as exc:
            raise HTTPException(status_code=422, detail={
                "error": "out_of_safe_zone", "field": exc.field, "value": exc.value,
                "range": list(exc.bounds)})
        except InvalidCapture as exc:
            raise HTTPException(status_code=422, detail={"error": "invalid_capture",
                                                         "message": str(exc)})
        except SessionClosed:
            raise HTTPException(status_code=410, detail="session closed")
        return {
            "azimuth_deg": math.degrees(vantage.azimuth_psi_v),
            "height_m": vantage.height_upsilon_v,
            "cx": vantage.target_cx_v,
            "cy": vantage.target_cy_v,
            "body_ratio": vantage.body_ratio_omega_v,
            "phase": session.phase.value,
        }

    @app.post("/sessions/{session_id}/gesture")
    def gesture(session_id: str, body: GestureBody):
        session = get_session(session_id)
        try:
            if body.gesture is not None:
                g = Gesture(body.gesture.lower())
            elif body.pitch_deg is not None:
                g = gesture_from_pitch(body.pitch_deg)
            else:
                raise InvalidGesture("provide either gesture or pitch_deg")
            phase = session.gesture_command(g)
        except (InvalidGesture, ValueError) as exc:
            raise HTTPException(status_code=409, detail={"error": "invalid_gesture",
                                                         "message": str(exc)})
        except SessionClosed:
            raise HTTPException(status_code=410, detail="session closed")
        return {"phase": phase.value}

    @app.get("/sessions/{session_id}/gallery")
    def gallery(session_id: str):
        session = get_session(session_id)
        return {"selfies": session.gallery}

    @app.get("/sessions/{session_id}/stream")
    def stream(session_id: str, max_events: int | None = None):
        session = get_session(session_id)
        try:
            q = session.subscribe()
        except SessionClosed:
            raise HTTPException(status_code=410, detail="session closed")

        def event_source():
            sent = 0
            try:
                while max_events is None or sent < max_events:
                    try:
                        event = q.get(timeout=STREAM_POLL_S)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    if event is None:
                        break
                    yield f"data: {json.dumps(event)}\n\n"
                    sent += 1
            finally:
                session.unsubscribe(q)

        return StreamingResponse(event_source(), media_type="text/event-stream")

    return app
