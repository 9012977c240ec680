"""Seeded training runs: episode loop, replay, logging, checkpoints, manifest.

A run directory holds manifest.txt (effective config + run identity), log.csv
(one row per episode, fixed column order), and periodic checkpoints. Runs are
bit-reproducible for a given seed and config because every random stream is
derived from the run seed.
"""

from __future__ import annotations

import dataclasses
import math
import time
from pathlib import Path

import numpy as np

from . import __version__
from .agents import (
    DdpgAgent,
    DddqnAgent,
    OuNoise,
    PgAgent,
    PidController,
    ReplayBuffer,
    decayed_sigma,
)
from .config import ConfigError, WorkbenchConfig, dump_config
from .env import ACTION_LIMIT, SelfieEnv, Termination
from .nets import save_checkpoint

AGENT_IDS = ("ddpg-shaped", "ddpg-sparse", "ddpg-linear", "dddqn", "pg", "pid")
LOG_COLUMNS = ("episode", "steps", "return", "outcome", "final_distance", "explore")

REWARD_MODE_BY_AGENT = {
    "ddpg-shaped": "shaped",
    "ddpg-sparse": "sparse",
    "ddpg-linear": "linear",
    "dddqn": "shaped",
    "pg": "shaped",
    "pid": "shaped",
}


class DivergenceHalt(RuntimeError):
    pass


def _ep_rng(seed: int, episode: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, episode])


def _epsilon(episode: int, total: int, start: float, end: float) -> float:
    if total <= 1:
        return end
    frac = min(1.0, episode / (total - 1))
    return start + (end - start) * frac


def train(cfg: WorkbenchConfig, agent_id: str, episodes: int, seed: int,
          out_dir: str | Path, deterministic: bool = True,
          progress_every: int = 0) -> Path:
    """Run one training job and return the populated run directory."""
    if agent_id not in AGENT_IDS:
        raise ConfigError(f"unknown agent {agent_id!r}; expected one of {AGENT_IDS}")
    if episodes < 0:
        raise ConfigError("episodes must be non-negative")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = REWARD_MODE_BY_AGENT[agent_id]
    env = SelfieEnv(cfg.env_config(mode))
    t = cfg.train

    manifest = (f"[run]\nagent = {agent_id}\nseed = {seed}\nepisodes = {episodes}\n"
                f"reward_mode = {mode}\nversion = {__version__}\n"
                f"numpy = {np.__version__}\n\n" + dump_config(cfg))
    (out_dir / "manifest.txt").write_text(manifest)

    agent = _build_agent(agent_id, cfg, rng=_ep_rng(seed, 0, 1))
    buffer = None
    if agent_id.startswith("ddpg"):
        buffer = ReplayBuffer(t.buffer_capacity, state_dim=14, action_dim=4)
    elif agent_id == "dddqn":
        buffer = ReplayBuffer(t.buffer_capacity, state_dim=14, action_dim=None)

    sample_rng = _ep_rng(seed, 0, 2)
    warmup_rng = _ep_rng(seed, 0, 4)
    noise = OuNoise(4, theta=t.ou_theta, sigma=t.sigma_start, rng=_ep_rng(seed, 0, 3))

    log_path = out_dir / "log.csv"
    t_start = time.monotonic()
    with open(log_path, "w") as log:
        log.write(",".join(LOG_COLUMNS) + "\n")
        for ep in range(episodes):
            row = _run_episode(env, agent, agent_id, buffer, cfg, ep, episodes, seed,
                               noise, sample_rng, warmup_rng)
            log.write(",".join(str(v) for v in row) + "\n")
            log.flush()
            if t.checkpoint_every and (ep + 1) % t.checkpoint_every == 0:
                _save_agent(agent, agent_id, cfg, out_dir / f"ckpt_ep{ep + 1:06d}.npz",
                            episodes_trained=ep + 1, seed=seed)
            if progress_every and (ep + 1) % progress_every == 0:
                rate = (ep + 1) / (time.monotonic() - t_start)
                print(f"[{agent_id} seed={seed}] episode {ep + 1}/{episodes} "
                      f"({rate:.1f} ep/s)", flush=True)
    _save_agent(agent, agent_id, cfg, out_dir / "ckpt_final.npz",
                episodes_trained=episodes, seed=seed)
    return out_dir


def _build_agent(agent_id: str, cfg: WorkbenchConfig, rng):
    if agent_id.startswith("ddpg"):
        return DdpgAgent(cfg.ddpg, rng=rng)
    if agent_id == "dddqn":
        return DddqnAgent(cfg.dddqn, rng=rng)
    if agent_id == "pg":
        return PgAgent(cfg.pg, rng=rng)
    return PidController(cfg.pid, cfg.env_config().norms, dt=cfg.world.dt)


def _run_episode(env, agent, agent_id, buffer, cfg, ep, episodes, seed,
                 noise, sample_rng, warmup_rng):
    t = cfg.train
    state = env.reset(seed=[seed, 1000, ep])
    act_rng = _ep_rng(seed, ep, 5)
    noise.reset()
    noise.sigma = decayed_sigma(ep, episodes, t.sigma_start, t.sigma_end, t.sigma_decay)
    epsilon = _epsilon(ep, episodes, t.epsilon_start, t.epsilon_end)

    if agent_id == "pid":
        agent.reset()

    states, actions, rewards = [], [], []
    total = 0.0
    outcome = None
    while True:
        if agent_id.startswith("ddpg"):
            if len(buffer) < t.warmup_transitions:
                action = warmup_rng.uniform(-ACTION_LIMIT, ACTION_LIMIT, 4)
            else:
                action = agent.act(state, noise)
        elif agent_id == "dddqn":
            if len(buffer) < t.warmup_transitions:
                index = int(warmup_rng.integers(cfg.dddqn.n_actions))
            else:
                index = agent.act_index(state, epsilon, act_rng)
            action = agent.command(index, state)
        elif agent_id == "pg":
            action = agent.act(state, act_rng)
        else:
            action = agent.act(env.pose, env.detection, env.target)

        next_state, out = env.step(action)
        total += out.reward
        done_flag = out.terminal
        if t.bootstrap_timeout and out.kind is Termination.TIMEOUT:
            done_flag = False  # artificial horizon: keep the bootstrap

        if agent_id.startswith("ddpg"):
            buffer.add(state, action, out.reward, next_state, done_flag)
            if len(buffer) >= t.warmup_transitions and len(buffer) >= cfg.ddpg.batch_size:
                for _ in range(t.updates_per_step):
                    closs, _ = agent.update(buffer, sample_rng)
                    if not math.isfinite(closs):
                        raise DivergenceHalt(f"critic loss diverged at episode {ep}")
        elif agent_id == "dddqn":
            buffer.add(state, index, out.reward, next_state, done_flag)
            if len(buffer) >= t.warmup_transitions and len(buffer) >= cfg.dddqn.batch_size:
                for _ in range(t.updates_per_step):
                    loss = agent.update(buffer, sample_rng)
                    if not math.isfinite(loss):
                        raise DivergenceHalt(f"q loss diverged at episode {ep}")
        elif agent_id == "pg":
            states.append(state)
            actions.append(action)
            rewards.append(out.reward)

        state = next_state
        if out.terminal:
            outcome = out
            break

    if agent_id == "pg" and states:
        loss = agent.update(np.array(states), np.array(actions), np.array(rewards))
        if not math.isfinite(loss):
            raise DivergenceHalt(f"policy loss diverged at episode {ep}")

    explore = noise.sigma if agent_id.startswith("ddpg") else (
        epsilon if agent_id == "dddqn" else 0.0)
    return (ep, env.steps, f"{total:.6f}", outcome.kind.value,
            f"{env.state_distance():.6f}", f"{explore:.4f}")


def _save_agent(agent, agent_id, cfg, path: Path, episodes_trained: int, seed: int):
    meta = {"agent": agent_id, "episodes_trained": episodes_trained, "seed": seed,
            "reward_mode": REWARD_MODE_BY_AGENT[agent_id]}
    if agent_id == "pid":
        meta["gains"] = dataclasses.asdict(cfg.pid)
        save_checkpoint(path, {}, {}, meta=meta)
        return
    if agent_id == "pg":
        nets, opts, arrays = agent.to_checkpoint()
        save_checkpoint(path, nets, opts, arrays=arrays, meta=meta)
        return
    nets, opts = agent.to_checkpoint()
    save_checkpoint(path, nets, opts, meta=meta)
