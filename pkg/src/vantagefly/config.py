"""Workbench configuration: plain-text key/value sections with code defaults.

Every tunable lives in a frozen dataclass; an INI file can override any field.
`dump_config` writes the effective configuration back out, which doubles as
the run manifest body.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .agents import DdpgConfig, DddqnConfig, PgConfig, PidGains
from .env import EnvConfig, RewardParams
from .world import CameraModel, SafeZone, WorldParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainParams:
    episodes: int = 18000
    checkpoint_every: int = 3000
    curve_window: int = 500
    buffer_capacity: int = 1_000_000
    warmup_transitions: int = 1000
    updates_per_step: int = 1
    ou_theta: float = 0.15
    sigma_start: float = 0.3
    sigma_end: float = 0.05
    sigma_decay: str = "exp"
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    bootstrap_timeout: bool = True


@dataclass(frozen=True)
class GeometryParams:
    eye_height_m: float = 1.6
    k_cy: float = 0.5


@dataclass(frozen=True)
class ScenarioSpec:
    """Start pose and target vantage, both given in operator units."""

    id: int
    start_azimuth_deg: float
    start_ratio: float
    start_z: float
    target_azimuth_deg: float
    target_ratio: float
    target_z: float


# Canonical evaluation scenarios: boresight pull-back, lateral arc, climb,
# and a combined far-low-left to high-right sweep (the hard one).
DEFAULT_SCENARIOS = (
    ScenarioSpec(1, 0.0, 0.24, 0.85, 0.0, 0.10, 0.85),
    ScenarioSpec(2, -15.0, 0.20, 1.20, 30.0, 0.20, 1.20),
    ScenarioSpec(3, 10.0, 0.30, 1.00, 10.0, 0.15, 2.50),
    ScenarioSpec(4, -20.0, 0.0667, 0.80, 20.0, 0.05, 2.20),
)


@dataclass(frozen=True)
class WorkbenchConfig:
    world: WorldParams = field(default_factory=WorldParams)
    reward: RewardParams = field(default_factory=RewardParams)
    geometry: GeometryParams = field(default_factory=GeometryParams)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    dddqn: DddqnConfig = field(default_factory=DddqnConfig)
    pg: PgConfig = field(default_factory=PgConfig)
    pid: PidGains = field(default_factory=PidGains)
    train: TrainParams = field(default_factory=TrainParams)
    scenarios: tuple[ScenarioSpec, ...] = DEFAULT_SCENARIOS

    def env_config(self, reward_mode: str = "shaped") -> EnvConfig:
        return EnvConfig(world=self.world, reward=replace(self.reward, mode=reward_mode))


def _world_from_section(sec) -> WorldParams:
    base = WorldParams()
    camera = CameraModel(
        image_width_px=sec.getint("image_width_px", 640),
        image_height_px=sec.getint("image_height_px", 360),
        vertical_fov=math.radians(sec.getfloat("vertical_fov_deg", 65.0)),
    )
    yaw_limit = math.radians(sec.getfloat("yaw_limit_deg", 75.0))
    zone = SafeZone(
        z_range=(sec.getfloat("z_min", 0.5), sec.getfloat("z_max", 3.0)),
        yaw_range=(-yaw_limit, yaw_limit),
        ratio_range=(sec.getfloat("ratio_min", 0.03), sec.getfloat("ratio_max", 0.5)),
    )
    return WorldParams(
        camera=camera,
        zone=zone,
        person_height=sec.getfloat("person_height_m", base.person_height),
        v_max=sec.getfloat("v_max", base.v_max),
        yaw_rate_max=sec.getfloat("yaw_rate_max", base.yaw_rate_max),
        tau_v=sec.getfloat("tau_v", base.tau_v),
        tau_yaw=sec.getfloat("tau_yaw", base.tau_yaw),
        dt=sec.getfloat("dt", base.dt),
    )


def _override(dc, sec, float_fields=(), int_fields=(), bool_fields=()):
    changes = {}
    for name in float_fields:
        if name in sec:
            changes[name] = sec.getfloat(name)
    for name in int_fields:
        if name in sec:
            changes[name] = sec.getint(name)
    for name in bool_fields:
        if name in sec:
            changes[name] = sec.getboolean(name)
    return replace(dc, **changes) if changes else dc


def _scenarios_from_section(sec) -> tuple[ScenarioSpec, ...]:
    specs = []
    for key, raw in sec.items():
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 6:
            raise ConfigError(f"scenario {key}: expected 6 comma-separated values, got {raw!r}")
        sid = int(key.lstrip("s"))
        vals = [float(p) for p in parts]
        specs.append(ScenarioSpec(sid, *vals))
    return tuple(sorted(specs, key=lambda s: s.id))


def load_config(path: str | Path | None = None) -> WorkbenchConfig:
    """Defaults, overridden by any sections present in the INI file."""
    cfg = WorkbenchConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    if parser.has_section("world"):
        cfg = replace(cfg, world=_world_from_section(parser["world"]))
    if parser.has_section("reward"):
        sec = parser["reward"]
        reward = _override(cfg.reward, sec,
                           float_fields=("alpha", "beta", "gamma", "success_cut",
                                         "explore_cut", "guard_distance"),
                           int_fields=("edge_margin_px", "max_steps"))
        if "mode" in sec:
            reward = replace(reward, mode=sec.get("mode"))
        cfg = replace(cfg, reward=reward)
    if parser.has_section("geometry"):
        cfg = replace(cfg, geometry=_override(cfg.geometry, parser["geometry"],
                                              float_fields=("eye_height_m", "k_cy")))
    if parser.has_section("agent.ddpg"):
        cfg = replace(cfg, ddpg=_override(cfg.ddpg, parser["agent.ddpg"],
                                          float_fields=("actor_lr", "critic_lr", "discount",
                                                        "tau", "action_limit", "final_init"),
                                          int_fields=("batch_size",)))
    if parser.has_section("agent.dddqn"):
        cfg = replace(cfg, dddqn=_override(cfg.dddqn, parser["agent.dddqn"],
                                           float_fields=("lr", "discount", "tau",
                                                         "huber_delta", "k_yaw"),
                                           int_fields=("batch_size",)))
    if parser.has_section("agent.pg"):
        cfg = replace(cfg, pg=_override(cfg.pg, parser["agent.pg"],
                                        float_fields=("policy_lr", "value_lr", "discount",
                                                      "log_std_init", "log_std_lr"),
                                        bool_fields=("normalize_advantages",)))
    if parser.has_section("agent.pid"):
        cfg = replace(cfg, pid=_override(cfg.pid, parser["agent.pid"],
                                         float_fields=("kp_forward", "kd_forward",
                                                       "kp_lateral", "kd_lateral",
                                                       "kp_vertical", "kd_vertical",
                                                       "kp_yaw", "ki")))
    if parser.has_section("harness"):
        train_params = _override(cfg.train, parser["harness"],
                                 float_fields=("ou_theta", "sigma_start", "sigma_end",
                                               "epsilon_start", "epsilon_end"),
                                 int_fields=("episodes", "checkpoint_every",
                                             "curve_window", "buffer_capacity",
                                             "warmup_transitions", "updates_per_step"),
                                 bool_fields=("bootstrap_timeout",))
        if "sigma_decay" in parser["harness"]:
            train_params = replace(train_params, sigma_decay=parser["harness"].get("sigma_decay"))
        cfg = replace(cfg, train=train_params)
    if parser.has_section("scenarios"):
        cfg = replace(cfg, scenarios=_scenarios_from_section(parser["scenarios"]))
    return cfg


def dump_config(cfg: WorkbenchConfig) -> str:
    """Serialize the effective configuration as INI text."""
    parser = configparser.ConfigParser()
    w = cfg.world
    parser["world"] = {
        "image_width_px": w.camera.image_width_px,
        "image_height_px": w.camera.image_height_px,
        "vertical_fov_deg": f"{math.degrees(w.camera.vertical_fov):.6g}",
        "person_height_m": w.person_height,
        "v_max": w.v_max,
        "yaw_rate_max": w.yaw_rate_max,
        "tau_v": w.tau_v,
        "tau_yaw": w.tau_yaw,
        "dt": w.dt,
        "z_min": w.zone.z_range[0],
        "z_max": w.zone.z_range[1],
        "yaw_limit_deg": f"{math.degrees(w.zone.yaw_range[1]):.6g}",
        "ratio_min": w.zone.ratio_range[0],
        "ratio_max": w.zone.ratio_range[1],
    }
    r = cfg.reward
    parser["reward"] = {
        "alpha": r.alpha, "beta": r.beta, "gamma": r.gamma,
        "success_cut": r.success_cut, "explore_cut": r.explore_cut,
        "edge_margin_px": r.edge_margin_px, "max_steps": r.max_steps,
        "guard_distance": r.guard_distance, "mode": r.mode,
    }
    parser["geometry"] = {"eye_height_m": cfg.geometry.eye_height_m, "k_cy": cfg.geometry.k_cy}
    d = cfg.ddpg
    parser["agent.ddpg"] = {
        "actor_lr": d.actor_lr, "critic_lr": d.critic_lr, "discount": d.discount,
        "tau": d.tau, "batch_size": d.batch_size, "action_limit": d.action_limit,
        "final_init": d.final_init,
    }
    q = cfg.dddqn
    parser["agent.dddqn"] = {
        "lr": q.lr, "discount": q.discount, "tau": q.tau,
        "batch_size": q.batch_size, "huber_delta": q.huber_delta, "k_yaw": q.k_yaw,
    }
    g = cfg.pg
    parser["agent.pg"] = {
        "policy_lr": g.policy_lr, "value_lr": g.value_lr, "discount": g.discount,
        "log_std_init": g.log_std_init, "log_std_lr": g.log_std_lr,
        "normalize_advantages": g.normalize_advantages,
    }
    p = cfg.pid
    parser["agent.pid"] = {
        "kp_forward": p.kp_forward, "kd_forward": p.kd_forward,
        "kp_lateral": p.kp_lateral, "kd_lateral": p.kd_lateral,
        "kp_vertical": p.kp_vertical, "kd_vertical": p.kd_vertical,
        "kp_yaw": p.kp_yaw, "ki": p.ki,
    }
    t = cfg.train
    parser["harness"] = {
        "episodes": t.episodes, "checkpoint_every": t.checkpoint_every,
        "curve_window": t.curve_window, "buffer_capacity": t.buffer_capacity,
        "warmup_transitions": t.warmup_transitions,
        "updates_per_step": t.updates_per_step, "ou_theta": t.ou_theta,
        "sigma_start": t.sigma_start, "sigma_end": t.sigma_end,
        "sigma_decay": t.sigma_decay,
        "epsilon_start": t.epsilon_start, "epsilon_end": t.epsilon_end,
        "bootstrap_timeout": t.bootstrap_timeout,
    }
    parser["scenarios"] = {
        f"s{s.id}": f"{s.start_azimuth_deg}, {s.start_ratio}, {s.start_z}, "
                    f"{s.target_azimuth_deg}, {s.target_ratio}, {s.target_z}"
        for s in cfg.scenarios
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
