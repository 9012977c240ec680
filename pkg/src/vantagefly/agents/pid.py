"""Classical PID baseline that servos the four pose errors independently.

Forward speed closes the size-ratio error, lateral speed sweeps the azimuth,
vertical speed closes the height error, and yaw rate keeps the person
centered horizontally. All errors are in normalized state units and the
output command is clamped to the actuation range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import ACTION_LIMIT, NormalizationSpec
from ..geometry import VantagePoint
from ..world import Detection, DronePose, relative_yaw


@dataclass(frozen=True)
class PidGains:
    kp_forward: float = 14.0
    kd_forward: float = 12.0
    kp_lateral: float = 4.0
    kd_lateral: float = 5.0
    kp_vertical: float = 4.0
    kd_vertical: float = 3.0
    kp_yaw: float = 3.0
    ki: float = 0.0  # shared integral gain; zero by default


class PidController:
    def __init__(self, gains: PidGains | None = None,
                 norms: NormalizationSpec | None = None, dt: float = 0.16):
        self.gains = gains if gains is not None else PidGains()
        self.norms = norms if norms is not None else NormalizationSpec()
        self.dt = dt
        self.reset()

    def reset(self):
        self._int = np.zeros(3)
        self._prev = None

    def errors(self, pose: DronePose, det: Detection, target: VantagePoint) -> np.ndarray:
        n = self.norms
        return np.array([
            n.norm_ratio(target.body_ratio_omega_v) - n.norm_ratio(det.ratio_omega_d),
            n.norm_yaw(target.azimuth_psi_v) - n.norm_yaw(relative_yaw(pose)),
            n.norm_height(target.height_upsilon_v) - n.norm_height(pose.z),
        ])

    def act(self, pose: DronePose, det: Detection, target: VantagePoint) -> np.ndarray:
        g = self.gains
        e = self.errors(pose, det, target)
        de = np.zeros(3) if self._prev is None else (e - self._prev) / self.dt
        self._prev = e
        self._int += e * self.dt
        cmd = np.array([
            g.kp_forward * e[0] + g.kd_forward * de[0],
            -(g.kp_lateral * e[1] + g.kd_lateral * de[1]),  # body-right raises azimuth
            g.kp_vertical * e[2] + g.kd_vertical * de[2],
            g.kp_yaw * (0.5 - det.cx_d),
        ])
        cmd[:3] += g.ki * self._int
        return np.clip(cmd, -ACTION_LIMIT, ACTION_LIMIT)


def pid_act(pose: DronePose, det: Detection, target: VantagePoint,
            gains: PidGains | None = None, norms: NormalizationSpec | None = None) -> np.ndarray:
    """One-shot command with zero integrator and no derivative history."""
    return PidController(gains, norms).act(pose, det, target)
