"""Dueling double deep Q agent over a 27-way discretized velocity grid.

The grid covers the three linear axes with {-0.8, 0, +0.8}; the fourth action
channel (yaw rate) is a proportional rule on the normalized azimuth error,
since a 3x3x3 grid has no room for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets import Adam, Mlp, soft_update
from .replay import ReplayBuffer

N_GRID_ACTIONS = 27
GRID_STEP = 0.8


class IndexOutOfRange(ValueError):
    pass


def discretize_action(index: int, yaw_error: float = 0.0, k_yaw: float = 4.0,
                      limit: float = 0.8) -> np.ndarray:
    """Decode a grid index into the 4-D command vector."""
    if not 0 <= index < N_GRID_ACTIONS:
        raise IndexOutOfRange(f"grid index {index} outside 0..26")
    vx = (index // 9) - 1
    vy = (index // 3) % 3 - 1
    vz = index % 3 - 1
    yaw_cmd = min(max(k_yaw * yaw_error, -limit), limit)
    return np.array([vx * GRID_STEP, vy * GRID_STEP, vz * GRID_STEP, yaw_cmd])


def encode_action(vx: int, vy: int, vz: int) -> int:
    """Inverse of the base-3 decomposition; inputs in {-1, 0, 1}."""
    return (vx + 1) * 9 + (vy + 1) * 3 + (vz + 1)


class DuelingQNet:
    """Shared rectified trunk with separate state-value and advantage heads."""

    def __init__(self, state_dim: int = 14, hidden: tuple[int, ...] = (512, 256),
                 n_actions: int = N_GRID_ACTIONS, rng=None):
        rng = np.random.default_rng(rng)
        self.trunk = Mlp([state_dim, *hidden], output_activation="relu", rng=rng)
        self.v_head = Mlp([hidden[-1], 1], rng=rng)
        self.a_head = Mlp([hidden[-1], n_actions], rng=rng)
        self.n_actions = n_actions

    def forward(self, s: np.ndarray) -> np.ndarray:
        q, _ = self.forward_cached(s)
        return q

    def forward_cached(self, s: np.ndarray):
        t, t_cache = self.trunk.forward_cached(np.atleast_2d(np.asarray(s, dtype=float)))
        v, v_cache = self.v_head.forward_cached(t)
        adv, a_cache = self.a_head.forward_cached(t)
        q = v + adv - adv.mean(axis=1, keepdims=True)
        return q, (t_cache, v_cache, a_cache)

    def backward(self, caches, grad_q: np.ndarray):
        t_cache, v_cache, a_cache = caches
        gv = grad_q.sum(axis=1, keepdims=True)
        ga = grad_q - grad_q.mean(axis=1, keepdims=True)
        v_grads, gt_v = self.v_head.backward(v_cache, gv)
        a_grads, gt_a = self.a_head.backward(a_cache, ga)
        t_grads, _ = self.trunk.backward(t_cache, gt_v + gt_a)
        return t_grads, v_grads, a_grads

    def copy(self) -> "DuelingQNet":
        dup = DuelingQNet.__new__(DuelingQNet)
        dup.trunk = self.trunk.copy()
        dup.v_head = self.v_head.copy()
        dup.a_head = self.a_head.copy()
        dup.n_actions = self.n_actions
        return dup

    def nets(self) -> dict:
        return {"trunk": self.trunk, "v_head": self.v_head, "a_head": self.a_head}


@dataclass(frozen=True)
class DddqnConfig:
    state_dim: int = 14
    hidden: tuple[int, ...] = (512, 256)
    n_actions: int = N_GRID_ACTIONS
    lr: float = 1e-3
    discount: float = 0.99
    tau: float = 0.005
    batch_size: int = 64
    huber_delta: float = 1.0
    k_yaw: float = 4.0


class DddqnAgent:
    def __init__(self, cfg: DddqnConfig | None = None, rng=None):
        self.cfg = cfg if cfg is not None else DddqnConfig()
        rng = np.random.default_rng(rng)
        c = self.cfg
        self.q = DuelingQNet(c.state_dim, c.hidden, c.n_actions, rng=rng)
        self.q_target = self.q.copy()
        self.opts = {name: Adam(net, lr=c.lr) for name, net in self.q.nets().items()}

    def act_index(self, state: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
        if rng.random() < epsilon:
            return int(rng.integers(self.cfg.n_actions))
        return int(np.argmax(self.q.forward(state)[0]))

    def command(self, index: int, state: np.ndarray) -> np.ndarray:
        yaw_error = float(state[9] - state[0])  # normalized target azimuth minus pose yaw
        return discretize_action(index, yaw_error=yaw_error, k_yaw=self.cfg.k_yaw)

    def update(self, buffer: ReplayBuffer, rng: np.random.Generator) -> float:
        batch = buffer.sample(rng, self.cfg.batch_size)
        loss = self.update_from_batch(batch)
        for name, net in self.q.nets().items():
            soft_update(self.q_target.nets()[name], net, self.cfg.tau)
        return loss

    def q_targets(self, s2: np.ndarray, r: np.ndarray, done: np.ndarray) -> np.ndarray:
        """Double-DQN targets: online network picks the action, target evaluates it."""
        n = s2.shape[0]
        a_star = np.argmax(self.q.forward(s2), axis=1)
        q2 = self.q_target.forward(s2)[np.arange(n), a_star]
        return r + self.cfg.discount * (1.0 - done) * q2

    def update_from_batch(self, batch) -> float:
        """Regress the selected Q entries toward double-DQN targets (Huber loss)."""
        s, a, r, s2, done = batch
        a = a.astype(int)
        n = s.shape[0]
        y = self.q_targets(s2, r, done)
        q_all, caches = self.q.forward_cached(s)
        err = q_all[np.arange(n), a] - y
        delta = self.cfg.huber_delta
        grad_sel = np.where(np.abs(err) <= delta, err, delta * np.sign(err)) / n
        grad_q = np.zeros_like(q_all)
        grad_q[np.arange(n), a] = grad_sel
        t_grads, v_grads, a_grads = self.q.backward(caches, grad_q)
        self.opts["trunk"].step(self.q.trunk, t_grads)
        self.opts["v_head"].step(self.q.v_head, v_grads)
        self.opts["a_head"].step(self.q.a_head, a_grads)
        huber = np.where(np.abs(err) <= delta, 0.5 * err * err,
                         delta * (np.abs(err) - 0.5 * delta))
        return float(np.mean(huber))

    def to_checkpoint(self) -> tuple[dict, dict]:
        nets = {}
        for name, net in self.q.nets().items():
            nets[f"q_{name}"] = net
        for name, net in self.q_target.nets().items():
            nets[f"qt_{name}"] = net
        opts = {f"q_{name}": opt for name, opt in self.opts.items()}
        return nets, opts

    @classmethod
    def from_checkpoint(cls, ckpt, cfg: DddqnConfig | None = None) -> "DddqnAgent":
        agent = cls(cfg)
        agent.q.trunk = ckpt.nets["q_trunk"]
        agent.q.v_head = ckpt.nets["q_v_head"]
        agent.q.a_head = ckpt.nets["q_a_head"]
        agent.q_target.trunk = ckpt.nets["qt_trunk"]
        agent.q_target.v_head = ckpt.nets["qt_v_head"]
        agent.q_target.a_head = ckpt.nets["qt_a_head"]
        return agent
