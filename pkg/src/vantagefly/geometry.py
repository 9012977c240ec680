"""Virtual selfie stick: turn a phone selfie capture into a drone vantage point.

The phone's yaw passes straight through as the drone azimuth. The face ratio
maps affinely onto the body-ratio command range. Height comes from a ray cast
from the user's eye point along the device tilt, extended by the stick length
(the metric camera distance at which the person subtends the mapped ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .world import CameraModel, PERSON_HEIGHT_DEFAULT, YAW_LIMIT, Z_RANGE, RATIO_RANGE, required_distance, wrap_angle

FACE_RATIO_RANGE = (0.1, 0.2)
BODY_RATIO_RANGE = (0.03, 0.4)
_RATIO_SLOPE = (BODY_RATIO_RANGE[1] - BODY_RATIO_RANGE[0]) / (FACE_RATIO_RANGE[1] - FACE_RATIO_RANGE[0])


class InvalidCapture(ValueError):
    """Raised when a selfie capture violates its bounds."""


class OutOfSafeZone(ValueError):
    """A vantage-point field falls outside the flight safe zone."""

    def __init__(self, fieldname: str, value: float, bounds: tuple[float, float]):
        self.field = fieldname
        self.value = value
        self.bounds = bounds
        super().__init__(f"{fieldname}={value:.4g} outside [{bounds[0]:.4g}, {bounds[1]:.4g}]")


@dataclass(frozen=True)
class SmdCapture:
    """One selfie specification: device orientation plus face framing."""

    pitch_phi: float  # radians, device tilt about its x axis (up positive)
    yaw_psi: float  # radians, device azimuth
    face_cx: float
    face_cy: float
    face_ratio_omega: float


@dataclass(frozen=True)
class VantagePoint:
    azimuth_psi_v: float  # radians
    height_upsilon_v: float  # meters
    target_cx_v: float
    target_cy_v: float
    body_ratio_omega_v: float


@dataclass(frozen=True)
class GeometryConfig:
    eye_height_m: float = 1.6
    k_cy: float = 0.5
    person_height_m: float = PERSON_HEIGHT_DEFAULT
    camera: CameraModel = field(default_factory=CameraModel)


def map_face_ratio(face_ratio_omega: float) -> tuple[float, bool]:
    """Affinely map the face ratio range [0.1, 0.2] onto body ratios [0.03, 0.4].

    Out-of-range inputs are clamped first; the second return value flags that
    a clamp happened so the UI can warn the user.
    """
    clamped = not FACE_RATIO_RANGE[0] <= face_ratio_omega <= FACE_RATIO_RANGE[1]
    w = min(max(face_ratio_omega, FACE_RATIO_RANGE[0]), FACE_RATIO_RANGE[1])
    return BODY_RATIO_RANGE[0] + _RATIO_SLOPE * (w - FACE_RATIO_RANGE[0]), clamped


def stick_height(pitch_phi: float, face_cy: float, body_ratio: float, cfg: GeometryConfig) -> float:
    """Raw (unclamped) drone height from the selfie-stick ray geometry.

    The stick leaves the eye point at elevation ``pitch_phi`` with length equal
    to the camera distance for ``body_ratio``; framing the face below the image
    center raises the drone by k_cy per unit of center offset.
    """
    stick = required_distance(body_ratio, cfg.camera, cfg.person_height_m)
    return cfg.eye_height_m + stick * math.sin(pitch_phi) - (face_cy - 0.5) * cfg.k_cy * stick


def smd_capture_to_vantage(capture: SmdCapture, cfg: GeometryConfig | None = None,
                           clamp_height: bool = True) -> VantagePoint:
    """Extrapolate the virtual selfie stick: capture -> drone vantage point.

    Azimuth is the device yaw unchanged; the face box center carries over as
    the desired framing. Raises InvalidCapture for bad framing coordinates or
    a yaw outside the +-75 deg cone (after wrap-around normalization).
    """
    if cfg is None:
        cfg = GeometryConfig()
    if not (0.0 <= capture.face_cx <= 1.0 and 0.0 <= capture.face_cy <= 1.0):
        raise InvalidCapture(f"face center ({capture.face_cx}, {capture.face_cy}) outside [0,1]^2")
    if capture.face_ratio_omega <= 0.0:
        raise InvalidCapture(f"face ratio must be positive, got {capture.face_ratio_omega}")
    yaw = wrap_angle(capture.yaw_psi)
    if abs(yaw) > YAW_LIMIT:
        raise InvalidCapture(f"yaw {math.degrees(yaw):.1f} deg outside +-75 deg")

    body_ratio, _ = map_face_ratio(capture.face_ratio_omega)
    height = stick_height(capture.pitch_phi, capture.face_cy, body_ratio, cfg)
    if clamp_height:
        height = min(max(height, Z_RANGE[0]), Z_RANGE[1])
    return VantagePoint(
        azimuth_psi_v=yaw,
        height_upsilon_v=height,
        target_cx_v=capture.face_cx,
        target_cy_v=capture.face_cy,
        body_ratio_omega_v=body_ratio,
    )


def validate_vantage(v: VantagePoint) -> VantagePoint:
    """Return ``v`` unchanged if every field sits inside the safe zone."""
    if not Z_RANGE[0] <= v.height_upsilon_v <= Z_RANGE[1]:
        raise OutOfSafeZone("height", v.height_upsilon_v, Z_RANGE)
    if abs(v.azimuth_psi_v) > YAW_LIMIT:
        raise OutOfSafeZone("azimuth", v.azimuth_psi_v, (-YAW_LIMIT, YAW_LIMIT))
    if not RATIO_RANGE[0] <= v.body_ratio_omega_v <= RATIO_RANGE[1]:
        raise OutOfSafeZone("ratio", v.body_ratio_omega_v, RATIO_RANGE)
    for name, value in (("target_cx", v.target_cx_v), ("target_cy", v.target_cy_v)):
        if not 0.0 <= value <= 1.0:
            raise OutOfSafeZone(name, value, (0.0, 1.0))
    return v
