"""Deterministic rollouts, scenario metrics, trajectory files, learning curves.

Trajectory files are CSV with one header line and one row per step; they carry
enough columns (pose, velocities, action, detection, target) that every
evaluation metric can be recomputed from the file alone, and the logged poses
can be replayed through the kinematics for consistency checks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import DdpgAgent, DddqnAgent, PgAgent, PidController, PidGains
from .config import WorkbenchConfig
from .env import SelfieEnv, Termination
from .geometry import VantagePoint
from .nets import CheckpointError, load_checkpoint
from .scenarios import resolve_scenarios
from .world import DronePose, body_velocities, relative_yaw, step_kinematics

TRAJECTORY_COLUMNS = (
    "t", "x", "y", "z", "yaw_deg", "vx", "vy", "vz", "yaw_rate",
    "a_fwd", "a_left", "a_up", "a_yaw", "cx", "cy", "ratio", "visible",
    "reward", "outcome",
    "target_azimuth_deg", "target_height", "target_cx", "target_cy", "target_ratio",
)

VEL_VAR_WINDOW = 10


class IoError(RuntimeError):
    pass


class WindowTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class EvalMetrics:
    scenario_id: int
    success: bool
    steps: int
    final_distance: float
    vel_variance: float


def load_policy(checkpoint_path, cfg: WorkbenchConfig):
    """Rebuild the greedy policy stored in a checkpoint.

    Returns (policy, agent_id) where policy(state, env) -> 4-vector command.
    """
    ckpt = load_checkpoint(checkpoint_path)
    agent_id = ckpt.meta.get("agent")
    if agent_id is None:
        raise CheckpointError(f"{checkpoint_path}: missing agent id")
    if agent_id.startswith("ddpg"):
        agent = DdpgAgent.from_checkpoint(ckpt, cfg.ddpg)
        return lambda state, env: agent.act(state), agent_id
    if agent_id == "dddqn":
        agent = DddqnAgent.from_checkpoint(ckpt, cfg.dddqn)

        def dddqn_policy(state, env):
            rng = np.random.default_rng(0)  # epsilon 0: rng unused
            return agent.command(agent.act_index(state, 0.0, rng), state)

        return dddqn_policy, agent_id
    if agent_id == "pg":
        agent = PgAgent.from_checkpoint(ckpt, cfg.pg)
        return lambda state, env: agent.act(state, rng=None), agent_id
    if agent_id == "pid":
        gains = PidGains(**ckpt.meta["gains"])
        controller = PidController(gains, cfg.env_config().norms, dt=cfg.world.dt)

        def pid_policy(state, env):
            return controller.act(env.pose, env.detection, env.target)

        pid_policy.reset = controller.reset  # stateful: cleared at flight start
        return pid_policy, agent_id
    raise CheckpointError(f"unknown agent id {agent_id!r} in {checkpoint_path}")


def fly_steps(env: SelfieEnv, policy):
    """Step the policy to termination, yielding one record per step.

    The bridge service streams from this same generator, so an operator
    flight and a harness rollout with equal start state and target produce
    bit-identical step records.
    """
    reset = getattr(policy, "reset", None)
    if reset is not None:
        reset()
    target = env.target
    while True:
        action = np.asarray(policy(env.state, env), dtype=float)
        state, outcome = env.step(action)
        pose = env.pose
        det = env.detection
        yield {
            "t": env.steps,
            "x": pose.x, "y": pose.y, "z": pose.z,
            "yaw_deg": math.degrees(pose.yaw),
            "vx": pose.vx, "vy": pose.vy, "vz": pose.vz, "yaw_rate": pose.yaw_rate,
            "a_fwd": action[0], "a_left": action[1], "a_up": action[2], "a_yaw": action[3],
            "cx": det.cx_d, "cy": det.cy_d, "ratio": det.ratio_omega_d,
            "visible": int(det.visible),
            "reward": outcome.reward, "outcome": outcome.kind.value,
            "target_azimuth_deg": math.degrees(target.azimuth_psi_v),
            "target_height": target.height_upsilon_v,
            "target_cx": target.target_cx_v, "target_cy": target.target_cy_v,
            "target_ratio": target.body_ratio_omega_v,
        }
        if outcome.terminal:
            return


def fly(env: SelfieEnv, policy) -> list[dict]:
    """Collect a full rollout as a list of step records."""
    return list(fly_steps(env, policy))


def metrics_from_records(records: list[dict], cfg: WorkbenchConfig,
                         scenario_id: int = 0) -> EvalMetrics:
    """Recompute the evaluation metrics from trajectory rows alone."""
    norms = cfg.env_config().norms
    success = records[-1]["outcome"] == Termination.SUCCESS.value
    last_visible = next(r for r in reversed(records) if r["visible"])
    a = np.clip([
        norms.norm_yaw(relative_yaw(DronePose(yaw=math.radians(last_visible["yaw_deg"])))),
        norms.norm_height(last_visible["z"]),
        last_visible["cx"], last_visible["cy"],
        norms.norm_ratio(last_visible["ratio"]),
    ], 0.0, 1.0)
    c = np.clip([
        norms.norm_yaw(math.radians(last_visible["target_azimuth_deg"])),
        norms.norm_height(last_visible["target_height"]),
        last_visible["target_cx"], last_visible["target_cy"],
        norms.norm_ratio(last_visible["target_ratio"]),
    ], 0.0, 1.0)
    final_distance = float(np.linalg.norm(a - c))

    tail = records[-min(VEL_VAR_WINDOW, len(records)):]
    vel = []
    for r in tail:
        pose = DronePose(x=r["x"], y=r["y"], z=r["z"], yaw=math.radians(r["yaw_deg"]),
                         vx=r["vx"], vy=r["vy"], vz=r["vz"], yaw_rate=r["yaw_rate"])
        bx, by, bz = body_velocities(pose)
        vel.append([bx / norms.v_max, by / norms.v_max, bz / norms.v_max,
                    pose.yaw_rate / norms.yaw_rate_max])
    vel = np.array(vel)
    vel_variance = float(np.mean(np.var(vel, axis=0)))
    return EvalMetrics(scenario_id, success, len(records), final_distance, vel_variance)


def evaluate(checkpoint_path, cfg: WorkbenchConfig, scenario_ids=None,
             episodes_per_scenario: int = 1, parallel: bool = False) -> list[EvalMetrics]:
    """No-noise rollouts of a stored policy over the canonical scenarios.

    With ``parallel`` the scenarios run on a thread pool (worlds are
    independent); each scenario loads its own policy so stateful controllers
    never share state across threads. Results keep scenario order either way.
    """
    mode = load_checkpoint(checkpoint_path).meta.get("reward_mode", "shaped")
    jobs = [(spec, pose, target)
            for spec, pose, target in resolve_scenarios(cfg, scenario_ids)
            for _ in range(episodes_per_scenario)]

    def run_one(job):
        spec, pose, target = job
        policy, _ = load_policy(checkpoint_path, cfg)
        env = SelfieEnv(cfg.env_config(mode))
        env.reset_to(pose, target)
        records = fly(env, policy)
        return metrics_from_records(records, cfg, spec.id)

    if parallel and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(4, len(jobs))) as pool:
            return list(pool.map(run_one, jobs))
    return [run_one(job) for job in jobs]


def rollout_scenario(checkpoint_path, cfg: WorkbenchConfig, scenario_id: int) -> list[dict]:
    policy, _ = load_policy(checkpoint_path, cfg)
    mode = load_checkpoint(checkpoint_path).meta.get("reward_mode", "shaped")
    matches = resolve_scenarios(cfg, [scenario_id])
    if not matches:
        raise IoError(f"no scenario with id {scenario_id}")
    spec, pose, target = matches[0]
    env = SelfieEnv(cfg.env_config(mode))
    env.reset_to(pose, target)
    return fly(env, policy)


def export_trajectory(records: list[dict], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=TRAJECTORY_COLUMNS)
            writer.writeheader()
            writer.writerows(records)
    except OSError as exc:
        raise IoError(f"cannot write trajectory {path}: {exc}") from exc
    return path


def load_trajectory(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read trajectory {path}: {exc}") from exc
    records = []
    for row in rows:
        rec = {}
        for key, value in row.items():
            if key == "outcome":
                rec[key] = value
            elif key in ("t", "visible"):
                rec[key] = int(value)
            else:
                rec[key] = float(value)
        records.append(rec)
    return records


def replay_trajectory(records: list[dict], start_pose: DronePose,
                      cfg: WorkbenchConfig) -> float:
    """Re-integrate logged actions from the start pose; max position error."""
    pose = start_pose
    worst = 0.0
    for r in records:
        cmd = [r["a_fwd"], r["a_left"], r["a_up"], r["a_yaw"]]
        pose = step_kinematics(pose, cmd, cfg.world)
        err = max(abs(pose.x - r["x"]), abs(pose.y - r["y"]), abs(pose.z - r["z"]))
        worst = max(worst, err)
    return worst


def moving_average(values, window: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if window > len(values):
        raise WindowTooLarge(f"window {window} exceeds series length {len(values)}")
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def read_run_log(run_dir) -> list[dict]:
    path = Path(run_dir) / "log.csv"
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read run log {path}: {exc}") from exc


def compare_learning_curves(run_dirs, window: int = 500) -> dict:
    """Per-run moving-average return series and final success rates."""
    out = {}
    for run_dir in run_dirs:
        rows = read_run_log(run_dir)
        returns = [float(r["return"]) for r in rows]
        series = moving_average(returns, window)
        tail = rows[-window:]
        success_rate = sum(r["outcome"] == "success" for r in tail) / len(tail)
        out[str(run_dir)] = {
            "series": series,
            "episodes": len(rows),
            "final_moving_average": float(series[-1]),
            "final_success_rate": success_rate,
        }
    return out
