"""Canonical evaluation scenarios resolved into world poses and targets."""

from __future__ import annotations

import math

from .config import ScenarioSpec, WorkbenchConfig
from .geometry import VantagePoint
from .world import DronePose, WorldParams, required_distance, wrap_angle


def scenario_start_pose(spec: ScenarioSpec, world: WorldParams) -> DronePose:
    """Drone at rest on the start ray, camera aimed at the person."""
    az = math.radians(spec.start_azimuth_deg)
    d = required_distance(spec.start_ratio, world.camera, world.person_height)
    return DronePose(x=d * math.cos(az), y=d * math.sin(az), z=spec.start_z,
                     yaw=wrap_angle(az + math.pi))


def scenario_target(spec: ScenarioSpec) -> VantagePoint:
    return VantagePoint(
        azimuth_psi_v=math.radians(spec.target_azimuth_deg),
        height_upsilon_v=spec.target_z,
        target_cx_v=0.5,
        target_cy_v=0.5,
        body_ratio_omega_v=spec.target_ratio,
    )


def resolve_scenarios(cfg: WorkbenchConfig, ids=None) -> list[tuple[ScenarioSpec, DronePose, VantagePoint]]:
    out = []
    for spec in cfg.scenarios:
        if ids is not None and spec.id not in ids:
            continue
        out.append((spec, scenario_start_pose(spec, cfg.world), scenario_target(spec)))
    return out
