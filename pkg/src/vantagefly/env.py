"""Episodic vantage-seeking MDP over the kinematic world.

State is 14-D: drone pose tuple a (relative yaw, height, box center, size
ratio; all normalized to [0,1]), velocity tuple b (body-frame, normalized to
[-1,1]), and target tuple c (the vantage point in the same coordinates as a).

The per-step reward is a clipped cosine basin of the normalized pose distance
damped by an exponential velocity penalty, then routed through a fixed
priority ladder of termination and shaping rules.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import VantagePoint
from .world import (
    CameraModel,
    Detection,
    DronePose,
    SafeZone,
    WorldParams,
    body_velocities,
    goal_check,
    in_safe_zone,
    project_person,
    relative_yaw,
    required_distance,
    step_kinematics,
    wrap_angle,
)

ACTION_LIMIT = 0.8
FAILURE_REWARD = -0.8
SUCCESS_REWARD = 1.0

REWARD_MODES = ("shaped", "sparse", "linear")


class StateUnavailable(RuntimeError):
    """State cannot be assembled because the person is not detected."""


class EpisodeFinished(RuntimeError):
    """step() was called after the episode terminated."""


class SamplingFailure(RuntimeError):
    """reset() could not find a valid start pose; the config is inconsistent."""


class Termination(enum.Enum):
    SUCCESS = "success"
    OUT_OF_ZONE = "out_of_zone"
    LOST_DETECTION = "lost_detection"
    TIMEOUT = "timeout"
    RUNNING = "running"


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    terminal: bool
    kind: Termination


@dataclass(frozen=True)
class RewardParams:
    alpha: float = 1.3
    beta: float = 0.35
    gamma: float = 11.3
    success_cut: float = 0.85
    explore_cut: float = 0.75
    edge_margin_px: int = 10
    max_steps: int = 41
    guard_distance: float = 1.5
    mode: str = "shaped"

    def __post_init__(self):
        if self.mode not in REWARD_MODES:
            raise ValueError(f"unknown reward mode {self.mode!r}")
        if not self.explore_cut < self.success_cut:
            raise ValueError("explore_cut must be below success_cut")


@dataclass(frozen=True)
class NormalizationSpec:
    """Maps raw pose quantities onto the unit ranges used by the state vector."""

    yaw_limit: float = math.radians(75.0)
    height_range: tuple[float, float] = (0.5, 3.0)
    ratio_range: tuple[float, float] = (0.03, 0.5)
    v_max: float = 5.0
    yaw_rate_max: float = 2.0

    def norm_yaw(self, yaw_rel: float) -> float:
        return (yaw_rel + self.yaw_limit) / (2.0 * self.yaw_limit)

    def norm_height(self, z: float) -> float:
        lo, hi = self.height_range
        return (z - lo) / (hi - lo)

    def norm_ratio(self, ratio: float) -> float:
        lo, hi = self.ratio_range
        return (ratio - lo) / (hi - lo)


def base_reward(a, b, c, p: RewardParams) -> float:
    """Cosine basin around the target pose damped by an L1 velocity penalty.

    Forced to zero beyond ``guard_distance``: the cosine argument falls back
    under pi/2 for large distances, which would otherwise open a spurious
    positive plateau far from the goal.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    d = float(np.linalg.norm(a - c))
    if d >= p.guard_distance:
        return 0.0
    speed = float(np.abs(np.asarray(b, dtype=float)).sum())
    r = math.cos(p.gamma * d * math.exp(-p.alpha * d)) * math.exp(-p.beta * speed)
    return min(1.0, max(0.0, r))


def linear_reward(a, b, c, p: RewardParams) -> float:
    """Distance-linear baseline basin with the same velocity penalty."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    d = float(np.linalg.norm(a - c))
    if d >= p.guard_distance:
        return 0.0
    r = (1.0 - d / p.guard_distance) * math.exp(-p.beta * float(np.abs(np.asarray(b)).sum()))
    return min(1.0, max(0.0, r))


def near_frame_edge(det: Detection, p: RewardParams, camera: CameraModel) -> bool:
    if not det.visible:
        return False
    mx = p.edge_margin_px / camera.image_width_px
    my = p.edge_margin_px / camera.image_height_px
    return det.cx_d < mx or det.cx_d > 1.0 - mx or det.cy_d < my or det.cy_d > 1.0 - my


def shape_and_terminate(R: float, det: Detection, zone_ok: bool, at_goal_disc: bool,
                        step: int, p: RewardParams, camera: CameraModel | None = None) -> StepOutcome:
    """Apply the termination/shaping ladder; exactly one branch fires.

    Priority: early success, out-of-zone failure, lost detection failure,
    edge-of-frame penalty (non-terminal), exploration bonus, timeout, plain R.
    """
    if camera is None:
        camera = CameraModel()
    if R > p.success_cut or at_goal_disc:
        return StepOutcome(SUCCESS_REWARD, True, Termination.SUCCESS)
    if not zone_ok:
        return StepOutcome(FAILURE_REWARD, True, Termination.OUT_OF_ZONE)
    if not det.visible:
        return StepOutcome(FAILURE_REWARD, True, Termination.LOST_DETECTION)
    if near_frame_edge(det, p, camera):
        return StepOutcome(FAILURE_REWARD, False, Termination.RUNNING)
    if R > p.explore_cut:
        return StepOutcome(SUCCESS_REWARD, False, Termination.RUNNING)
    if step >= p.max_steps:
        return StepOutcome(R, True, Termination.TIMEOUT)
    return StepOutcome(R, False, Termination.RUNNING)


def assemble_state(pose: DronePose, det: Detection, target: VantagePoint,
                   norms: NormalizationSpec) -> np.ndarray:
    """Concatenate tuples a, b, c into the 14-D state vector."""
    if not det.visible:
        raise StateUnavailable("person not detected; no state to assemble")
    a = np.array([
        norms.norm_yaw(relative_yaw(pose)),
        norms.norm_height(pose.z),
        det.cx_d,
        det.cy_d,
        norms.norm_ratio(det.ratio_omega_d),
    ])
    bx, by, bz = body_velocities(pose)
    b = np.array([bx / norms.v_max, by / norms.v_max, bz / norms.v_max,
                  pose.yaw_rate / norms.yaw_rate_max])
    c = np.array([
        norms.norm_yaw(target.azimuth_psi_v),
        norms.norm_height(target.height_upsilon_v),
        target.target_cx_v,
        target.target_cy_v,
        norms.norm_ratio(target.body_ratio_omega_v),
    ])
    return np.concatenate([np.clip(a, 0.0, 1.0), np.clip(b, -1.0, 1.0), np.clip(c, 0.0, 1.0)])


@dataclass(frozen=True)
class EnvConfig:
    world: WorldParams = field(default_factory=WorldParams)
    reward: RewardParams = field(default_factory=RewardParams)
    target_ratio_range: tuple[float, float] = (0.03, 0.4)
    reset_yaw_jitter: float = math.radians(10.0)
    max_reset_attempts: int = 1000

    @property
    def norms(self) -> NormalizationSpec:
        zone = self.world.zone
        return NormalizationSpec(
            yaw_limit=zone.yaw_range[1],
            height_range=zone.z_range,
            ratio_range=zone.ratio_range,
            v_max=self.world.v_max,
            yaw_rate_max=self.world.yaw_rate_max,
        )


class SelfieEnv:
    """Single-episode-at-a-time MDP; drive one instance per thread."""

    def __init__(self, cfg: EnvConfig | None = None, rng=None):
        self.cfg = cfg if cfg is not None else EnvConfig()
        self._rng = np.random.default_rng(rng)
        self._norms = self.cfg.norms
        self.pose: DronePose | None = None
        self.target: VantagePoint | None = None
        self.detection: Detection | None = None
        self._state: np.ndarray | None = None
        self._steps = 0
        self._terminal = True

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def state(self) -> np.ndarray:
        """Latest assembled state (kept across a lost-detection terminal step)."""
        return self._state.copy()

    @property
    def norms(self) -> NormalizationSpec:
        return self._norms

    def reset(self, seed=None) -> np.ndarray:
        """Sample a start pose in the safe zone (person visible) and a target."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        w = self.cfg.world
        zone = w.zone
        for _ in range(self.cfg.max_reset_attempts):
            az = self._rng.uniform(*zone.yaw_range)
            ratio = self._rng.uniform(*zone.ratio_range)
            z = self._rng.uniform(*zone.z_range)
            rel_yaw = az + self._rng.uniform(-self.cfg.reset_yaw_jitter, self.cfg.reset_yaw_jitter)
            d = required_distance(ratio, w.camera, w.person_height)
            pose = DronePose(x=d * math.cos(az), y=d * math.sin(az), z=z,
                             yaw=wrap_angle(rel_yaw + math.pi))
            det = project_person(pose, w.camera, w.person_height)
            if det.visible and in_safe_zone(pose, det, zone):
                break
        else:
            raise SamplingFailure(f"no valid start pose in {self.cfg.max_reset_attempts} attempts")

        self.target = VantagePoint(
            azimuth_psi_v=self._rng.uniform(*zone.yaw_range),
            height_upsilon_v=self._rng.uniform(*zone.z_range),
            target_cx_v=0.5,
            target_cy_v=0.5,
            body_ratio_omega_v=self._rng.uniform(*self.cfg.target_ratio_range),
        )
        self.pose = pose
        self.detection = det
        self._steps = 0
        self._terminal = False
        self._state = assemble_state(pose, det, self.target, self._norms)
        return self._state.copy()

    def reset_to(self, pose: DronePose, target: VantagePoint) -> np.ndarray:
        """Start an episode from an explicit pose and target (scenario replay)."""
        w = self.cfg.world
        det = project_person(pose, w.camera, w.person_height)
        if not det.visible:
            raise SamplingFailure("scenario start pose does not see the person")
        self.pose = pose
        self.target = target
        self.detection = det
        self._steps = 0
        self._terminal = False
        self._state = assemble_state(pose, det, target, self._norms)
        return self._state.copy()

    def step(self, action) -> tuple[np.ndarray, StepOutcome]:
        if self._terminal:
            raise EpisodeFinished("episode is over; call reset()")
        w = self.cfg.world
        p = self.cfg.reward
        cmd = np.clip(np.asarray(action, dtype=float), -ACTION_LIMIT, ACTION_LIMIT)
        self.pose = step_kinematics(self.pose, cmd, w)
        det = project_person(self.pose, w.camera, w.person_height)
        self.detection = det
        zone_ok = in_safe_zone(self.pose, det, w.zone)
        disc = goal_check(self.pose, self.target, w.camera, w.person_height)
        self._steps += 1

        if det.visible:
            self._state = assemble_state(self.pose, det, self.target, self._norms)
            R = self._base_reward(self._state)
        else:
            R = 0.0  # ladder terminates on lost detection; last state is kept

        outcome = shape_and_terminate(R, det, zone_ok, disc, self._steps, p, w.camera)
        if not outcome.terminal and self._steps >= p.max_steps:
            # Edge-penalty and bonus branches outrank the timeout branch but
            # cannot extend the episode beyond its step budget.
            outcome = StepOutcome(outcome.reward, True, Termination.TIMEOUT)
        if p.mode == "sparse":
            outcome = replace(outcome, reward=self._sparse_reward(outcome))
        self._terminal = outcome.terminal
        return self._state.copy(), outcome

    def _base_reward(self, state: np.ndarray) -> float:
        p = self.cfg.reward
        a, b, c = state[:5], state[5:9], state[9:]
        if p.mode == "linear":
            return linear_reward(a, b, c, p)
        return base_reward(a, b, c, p)

    def state_distance(self) -> float:
        """Current normalized distance between pose tuple a and target tuple c."""
        return float(np.linalg.norm(self._state[:5] - self._state[9:]))

    @staticmethod
    def _sparse_reward(outcome: StepOutcome) -> float:
        if outcome.kind is Termination.SUCCESS:
            return SUCCESS_REWARD
        if outcome.kind in (Termination.OUT_OF_ZONE, Termination.LOST_DETECTION):
            return FAILURE_REWARD
        return 0.0
