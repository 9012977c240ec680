"""Operator sessions: a live world, a loaded policy, and a phase machine.

Phases follow the flight script: Grounded -> (take-off) Hovering ->
(capture) Flying -> AtVantage on success, back to the scripted hover on
failure; Land returns to Grounded from anywhere. Each session owns its
world state and fans out step events to any number of subscriber queues
without blocking the flight loop (bounded buffers, drop-oldest).
"""

from __future__ import annotations

import enum
import itertools
import math
import queue
import threading
import time

from ..config import WorkbenchConfig
from ..env import SelfieEnv, Termination
from ..evaluation import fly_steps, load_policy
from ..geometry import (
    GeometryConfig,
    SmdCapture,
    smd_capture_to_vantage,
    validate_vantage,
)
from ..world import DronePose, project_person, required_distance, wrap_angle

HOVER_RATIO = 0.24
EVENT_QUEUE_SIZE = 256


class Phase(str, enum.Enum):
    GROUNDED = "grounded"
    HOVERING = "hovering"
    FLYING = "flying"
    AT_VANTAGE = "at_vantage"


class Gesture(str, enum.Enum):
    TAKE_OFF = "takeoff"
    LAND = "land"


class InvalidGesture(RuntimeError):
    pass


class BusyFlying(RuntimeError):
    pass


class NotAirborne(RuntimeError):
    """Capture submitted while the drone is grounded."""


class SessionClosed(RuntimeError):
    pass


def gesture_from_pitch(pitch_deg: float) -> Gesture:
    """Map device tilt to a gesture: flat -> take off, ~90 deg -> land."""
    if abs(pitch_deg) < 10.0:
        return Gesture.TAKE_OFF
    if abs(abs(pitch_deg) - 90.0) < 15.0:
        return Gesture.LAND
    raise InvalidGesture(f"pitch {pitch_deg:.1f} deg is neither flat nor tilted 90 deg")


class Session:
    def __init__(self, session_id: str, cfg: WorkbenchConfig, checkpoint_path,
                 turbo: bool = False):
        self.id = session_id
        self.cfg = cfg
        self.turbo = turbo
        self.policy, self.agent_id = load_policy(checkpoint_path, cfg)
        self.geometry = GeometryConfig(
            eye_height_m=cfg.geometry.eye_height_m,
            k_cy=cfg.geometry.k_cy,
            person_height_m=cfg.world.person_height,
            camera=cfg.world.camera,
        )
        self.phase = Phase.GROUNDED
        self.pose = self._grounded_pose()
        self.target = None
        self.gallery: list[dict] = []
        self._lock = threading.RLock()
        self._seq = itertools.count()
        self._subscribers: list[queue.Queue] = []
        self._flight: threading.Thread | None = None
        self._abort = threading.Event()
        self._closed = False

    # -- scripted poses ----------------------------------------------------

    def _hover_pose(self) -> DronePose:
        w = self.cfg.world
        d = required_distance(HOVER_RATIO, w.camera, w.person_height)
        return DronePose(x=d, y=0.0, z=w.person_height / 2.0, yaw=wrap_angle(math.pi))

    def _grounded_pose(self) -> DronePose:
        hover = self._hover_pose()
        return DronePose(x=hover.x, y=hover.y, z=0.0, yaw=hover.yaw)

    def detection(self):
        return project_person(self.pose, self.cfg.world.camera, self.cfg.world.person_height)

    # -- phase machine -----------------------------------------------------

    def gesture_command(self, gesture: Gesture) -> Phase:
        with self._lock:
            self._ensure_open()
            if gesture is Gesture.TAKE_OFF:
                if self.phase is not Phase.GROUNDED:
                    raise InvalidGesture(f"take-off from {self.phase.value}")
                self.pose = self._hover_pose()
                self.phase = Phase.HOVERING
            else:  # landing is valid from any phase
                self._abort.set()
                self.pose = self._grounded_pose()
                self.phase = Phase.GROUNDED
            self._publish(self._phase_event())
            return self.phase

    def submit_capture(self, capture: SmdCapture):
        with self._lock:
            self._ensure_open()
            if self.phase is Phase.FLYING:
                raise BusyFlying("a flight is already in progress")
            if self.phase not in (Phase.HOVERING, Phase.AT_VANTAGE):
                raise NotAirborne(f"cannot accept a capture while {self.phase.value}")
            vantage = validate_vantage(
                smd_capture_to_vantage(capture, self.geometry, clamp_height=False))
            self.target = vantage
            self.phase = Phase.FLYING
            self._abort.clear()
            self._publish(self._phase_event())
            self._flight = threading.Thread(target=self._run_flight, args=(vantage,),
                                            daemon=True)
            self._flight.start()
            return vantage

    def wait_flight(self, timeout: float = 30.0):
        flight = self._flight
        if flight is not None:
            flight.join(timeout)

    def close(self):
        with self._lock:
            self._closed = True
            self._abort.set()
            for q in self._subscribers:
                self._offer(q, None)

    # -- flight loop ---------------------------------------------------------

    def _run_flight(self, vantage):
        env = SelfieEnv(self.cfg.env_config("shaped"))
        env.reset_to(self.pose, vantage)
        outcome_kind = None
        dt = self.cfg.world.dt
        for record in fly_steps(env, self.policy):
            if self._abort.is_set():
                return  # landed mid-flight; gesture handler owns the phase
            self.pose = env.pose
            self._publish(self._state_event(record))
            outcome_kind = record["outcome"]
            if not self.turbo:
                time.sleep(dt)
        with self._lock:
            if self._abort.is_set():
                return
            if outcome_kind == Termination.SUCCESS.value:
                self.pose = env.pose
                self.phase = Phase.AT_VANTAGE
                selfie = self._selfie_record(env)
                self.gallery.append(selfie)
                self._publish({"type": "selfie", **self._common_fields(), **selfie})
            else:
                self.pose = self._hover_pose()
                self.phase = Phase.HOVERING
                self._publish({"type": "fault", "fault": outcome_kind,
                               **self._common_fields()})
            self._publish(self._phase_event())

    def _selfie_record(self, env: SelfieEnv) -> dict:
        det = env.detection
        t = env.target
        return {
            "step": env.steps,
            "x": env.pose.x, "y": env.pose.y, "z": env.pose.z,
            "yaw_deg": math.degrees(env.pose.yaw),
            "cx": det.cx_d, "cy": det.cy_d, "ratio": det.ratio_omega_d,
            "target_azimuth_deg": math.degrees(t.azimuth_psi_v),
            "target_height": t.height_upsilon_v,
            "target_ratio": t.body_ratio_omega_v,
        }

    # -- event stream --------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        with self._lock:
            self._ensure_open()
            q = queue.Queue(maxsize=EVENT_QUEUE_SIZE)
            self._subscribers.append(q)
            self._offer(q, self._phase_event())
            return q

    def unsubscribe(self, q: queue.Queue):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _publish(self, event: dict):
        for q in list(self._subscribers):
            self._offer(q, event)

    @staticmethod
    def _offer(q: queue.Queue, event):
        while True:
            try:
                q.put_nowait(event)
                return
            except queue.Full:
                try:
                    q.get_nowait()  # drop-oldest for slow consumers
                except queue.Empty:
                    pass

    def _common_fields(self) -> dict:
        return {"seq": next(self._seq), "phase": self.phase.value}

    def _phase_event(self) -> dict:
        det = self.detection()
        return {"type": "phase", **self._common_fields(),
                "x": self.pose.x, "y": self.pose.y, "z": self.pose.z,
                "yaw_deg": math.degrees(self.pose.yaw),
                "cx": det.cx_d, "cy": det.cy_d, "ratio": det.ratio_omega_d}

    def _state_event(self, record: dict) -> dict:
        return {
            "type": "state", **self._common_fields(),
            "step": record["t"],
            "x": record["x"], "y": record["y"], "z": record["z"],
            "yaw": record["yaw_deg"],
            "cx": record["cx"], "cy": record["cy"], "ratio": record["ratio"],
            "reward": record["reward"],
        }

    def _ensure_open(self):
        if self._closed:
            raise SessionClosed(self.id)


class SessionManager:
    def __init__(self, cfg: WorkbenchConfig, default_checkpoint=None, turbo: bool = False):
        self.cfg = cfg
        self.default_checkpoint = default_checkpoint
        self.turbo = turbo
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = itertools.count(1)

    def create(self, checkpoint_path=None) -> Session:
        path = checkpoint_path or self.default_checkpoint
        with self._lock:
            sid = f"s{next(self._counter):04d}"
            session = Session(sid, self.cfg, path, turbo=self.turbo)
            self._sessions[sid] = session
            return session

    def get(self, session_id: str) -> Session | None:
        return self._sessions.get(session_id)

    def close_all(self):
        for session in self._sessions.values():
            session.close()
