"""Kinematic quadcopter world with a static person and a pinhole detection model.

The person stands at the world origin facing the +x axis. Drone poses use a
standard world frame (yaw 0 along +x, counter-clockwise positive). Because a
drone photographing the person always points roughly back at the origin, the
quantity that enters safe-zone checks and the RL state is the *relative yaw*
``wrap(yaw - pi)``: it equals the drone's azimuth around the person whenever
the camera is aimed at them, and stays in the frontal cone [-75 deg, 75 deg].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DT_DEFAULT = 0.16  # seconds between observations
V_MAX_DEFAULT = 5.0  # m/s; normalized command 0.8 -> 4 m/s
YAW_RATE_MAX_DEFAULT = 2.0  # rad/s
TAU_V_DEFAULT = 0.3  # velocity lag time constant, s
TAU_YAW_DEFAULT = 0.25  # yaw-rate lag time constant, s
PERSON_HEIGHT_DEFAULT = 1.7  # meters

YAW_LIMIT = math.radians(75.0)
Z_RANGE = (0.5, 3.0)
RATIO_RANGE = (0.03, 0.5)
HOVER_RATIO = 0.24  # default framing while hovering in front of the user


class DomainError(ValueError):
    """Raised when a projection quantity is outside its mathematical domain."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.atan2(math.sin(a), math.cos(a))


@dataclass(frozen=True)
class CameraModel:
    """Pinhole front camera; the mount looks along the drone heading."""

    image_width_px: int = 640
    image_height_px: int = 360
    vertical_fov: float = math.radians(65.0)

    def __post_init__(self):
        if not 0.0 < self.vertical_fov < math.pi:
            raise DomainError(f"vertical_fov out of (0, pi): {self.vertical_fov}")

    @property
    def tan_half_vfov(self) -> float:
        return math.tan(self.vertical_fov / 2.0)

    @property
    def horizontal_fov(self) -> float:
        aspect = self.image_width_px / self.image_height_px
        return 2.0 * math.atan(self.tan_half_vfov * aspect)

    @property
    def tan_half_hfov(self) -> float:
        return math.tan(self.horizontal_fov / 2.0)


@dataclass(frozen=True)
class DronePose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0  # world heading, radians
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    yaw_rate: float = 0.0


@dataclass(frozen=True)
class Detection:
    """Simulated person detection: normalized bbox center and height ratio."""

    cx_d: float
    cy_d: float
    ratio_omega_d: float
    visible: bool

    @staticmethod
    def invisible() -> "Detection":
        return Detection(0.0, 0.0, 0.0, False)


@dataclass(frozen=True)
class SafeZone:
    z_range: tuple[float, float] = Z_RANGE
    yaw_range: tuple[float, float] = (-YAW_LIMIT, YAW_LIMIT)
    ratio_range: tuple[float, float] = RATIO_RANGE


@dataclass(frozen=True)
class WorldParams:
    camera: CameraModel = field(default_factory=CameraModel)
    zone: SafeZone = field(default_factory=SafeZone)
    person_height: float = PERSON_HEIGHT_DEFAULT
    v_max: float = V_MAX_DEFAULT
    yaw_rate_max: float = YAW_RATE_MAX_DEFAULT
    tau_v: float = TAU_V_DEFAULT
    tau_yaw: float = TAU_YAW_DEFAULT
    dt: float = DT_DEFAULT


def relative_yaw(pose: DronePose) -> float:
    """Heading relative to the person-facing datum; equals azimuth when aimed."""
    return wrap_angle(pose.yaw - math.pi)


def azimuth_of(pose: DronePose) -> float:
    return math.atan2(pose.y, pose.x)


def horizontal_distance(pose: DronePose) -> float:
    return math.hypot(pose.x, pose.y)


def step_kinematics(pose: DronePose, cmd, params: WorldParams, dt: float | None = None) -> DronePose:
    """Advance the pose by one first-order velocity-tracking step.

    ``cmd`` is a 4-vector of normalized body-frame commands in [-1, 1]:
    forward, left, up, yaw rate. Commanded velocities are rotated into the
    world frame by the current yaw before the lag is applied.
    """
    if dt is None:
        dt = params.dt
    c = np.clip(np.asarray(cmd, dtype=float), -1.0, 1.0)
    cos_h, sin_h = math.cos(pose.yaw), math.sin(pose.yaw)
    vt_x = (c[0] * cos_h - c[1] * sin_h) * params.v_max
    vt_y = (c[0] * sin_h + c[1] * cos_h) * params.v_max
    vt_z = c[2] * params.v_max
    # overall speed cap: diagonal commands cannot exceed the craft's limit,
    # so the lagged velocity stays inside the v_max ball on every axis
    speed = math.sqrt(vt_x * vt_x + vt_y * vt_y + vt_z * vt_z)
    if speed > params.v_max:
        scale = params.v_max / speed
        vt_x *= scale
        vt_y *= scale
        vt_z *= scale
    rt = c[3] * params.yaw_rate_max

    k_v = 1.0 - math.exp(-dt / params.tau_v)
    k_y = 1.0 - math.exp(-dt / params.tau_yaw)
    vx = pose.vx + (vt_x - pose.vx) * k_v
    vy = pose.vy + (vt_y - pose.vy) * k_v
    vz = pose.vz + (vt_z - pose.vz) * k_v
    yaw_rate = pose.yaw_rate + (rt - pose.yaw_rate) * k_y

    z = max(0.0, pose.z + vz * dt)
    return DronePose(
        x=pose.x + vx * dt,
        y=pose.y + vy * dt,
        z=z,
        yaw=wrap_angle(pose.yaw + yaw_rate * dt),
        vx=vx,
        vy=vy,
        vz=vz,
        yaw_rate=yaw_rate,
    )


def body_velocities(pose: DronePose) -> tuple[float, float, float]:
    """World velocity expressed in the drone body frame (forward, left, up)."""
    cos_h, sin_h = math.cos(pose.yaw), math.sin(pose.yaw)
    return (
        pose.vx * cos_h + pose.vy * sin_h,
        -pose.vx * sin_h + pose.vy * cos_h,
        pose.vz,
    )


def required_distance(ratio: float, camera: CameraModel, person_height: float = PERSON_HEIGHT_DEFAULT) -> float:
    """Horizontal distance at which the person subtends ``ratio`` of the frame."""
    if ratio <= 0.0:
        raise DomainError(f"ratio must be positive, got {ratio}")
    return person_height / (2.0 * ratio * camera.tan_half_vfov)


def project_person(pose: DronePose, camera: CameraModel, person_height: float = PERSON_HEIGHT_DEFAULT) -> Detection:
    """Project the person (a vertical segment at the origin) into the camera.

    The size ratio follows the exact pinhole law person_height / (2 d tan(vfov/2))
    so it round-trips with required_distance; cx/cy come from the bearing and
    elevation of the person relative to the camera axis.
    """
    d = horizontal_distance(pose)
    if d <= 1e-9:
        return Detection.invisible()

    bearing = wrap_angle(math.atan2(-pose.y, -pose.x) - pose.yaw)  # + means person left of axis
    if abs(bearing) >= camera.horizontal_fov / 2.0:
        return Detection.invisible()
    cx = 0.5 - math.tan(bearing) / (2.0 * camera.tan_half_hfov)

    tv2 = 2.0 * camera.tan_half_vfov
    y_top = 0.5 - math.tan(math.atan2(person_height - pose.z, d)) / tv2
    y_bot = 0.5 - math.tan(math.atan2(0.0 - pose.z, d)) / tv2
    if y_bot <= 0.0 or y_top >= 1.0:
        return Detection.invisible()  # person entirely above or below the frame

    mid = 0.5 - math.tan(math.atan2(person_height / 2.0 - pose.z, d)) / tv2
    cy = min(1.0, max(0.0, mid))
    ratio = person_height / (d * tv2)
    return Detection(cx_d=cx, cy_d=cy, ratio_omega_d=ratio, visible=True)


def vantage_world_point(azimuth: float, body_ratio: float, height: float,
                        camera: CameraModel, person_height: float = PERSON_HEIGHT_DEFAULT):
    """Metric (x, y, z) implied by a vantage descriptor."""
    d = required_distance(body_ratio, camera, person_height)
    return d * math.cos(azimuth), d * math.sin(azimuth), height


def goal_check(pose: DronePose, vantage, camera: CameraModel,
               person_height: float = PERSON_HEIGHT_DEFAULT,
               radius_m: float = 1.0, yaw_tol: float = math.radians(10.0)) -> bool:
    """True when the drone sits on the goal disc: within 1 m and +-10 deg."""
    gx, gy, gz = vantage_world_point(vantage.azimuth_psi_v, vantage.body_ratio_omega_v,
                                     vantage.height_upsilon_v, camera, person_height)
    dist = math.sqrt((pose.x - gx) ** 2 + (pose.y - gy) ** 2 + (pose.z - gz) ** 2)
    yaw_err = abs(wrap_angle(relative_yaw(pose) - vantage.azimuth_psi_v))
    return dist <= radius_m and yaw_err <= yaw_tol


def in_safe_zone(pose: DronePose, det: Detection, zone: SafeZone) -> bool:
    if not zone.z_range[0] <= pose.z <= zone.z_range[1]:
        return False
    if not zone.yaw_range[0] <= relative_yaw(pose) <= zone.yaw_range[1]:
        return False
    if det.visible and not zone.ratio_range[0] <= det.ratio_omega_d <= zone.ratio_range[1]:
        return False
    return True
