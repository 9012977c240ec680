"""Deterministic actor-critic with target networks and replay (DDPG)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets import Adam, Mlp, soft_update
from .noise import OuNoise
from .replay import ReplayBuffer


@dataclass(frozen=True)
class DdpgConfig:
    state_dim: int = 14
    action_dim: int = 4
    hidden: tuple[int, ...] = (512, 256)
    action_limit: float = 0.8
    actor_lr: float = 1e-5
    critic_lr: float = 1e-3
    discount: float = 0.99
    tau: float = 0.001
    batch_size: int = 64
    final_init: float = 3e-3


class DdpgAgent:
    def __init__(self, cfg: DdpgConfig | None = None, rng=None):
        self.cfg = cfg if cfg is not None else DdpgConfig()
        rng = np.random.default_rng(rng)
        c = self.cfg
        self.actor = Mlp([c.state_dim, *c.hidden, c.action_dim], output_activation="tanh",
                         output_scale=c.action_limit, rng=rng, final_init=c.final_init)
        self.critic = Mlp([c.state_dim + c.action_dim, *c.hidden, 1], rng=rng,
                          final_init=c.final_init)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = Adam(self.actor, lr=c.actor_lr)
        self.critic_opt = Adam(self.critic, lr=c.critic_lr)

    def act(self, state: np.ndarray, noise: OuNoise | None = None) -> np.ndarray:
        a = self.actor.forward(state)
        if noise is not None:
            a = np.clip(a + noise.sample(), -self.cfg.action_limit, self.cfg.action_limit)
        return a

    def update(self, buffer: ReplayBuffer, rng: np.random.Generator) -> tuple[float, float]:
        """One critic regression step plus one actor ascent step on a minibatch."""
        batch = buffer.sample(rng, self.cfg.batch_size)
        critic_loss = self.update_critic(batch)
        actor_objective = self.update_actor(batch[0])
        soft_update(self.critic_target, self.critic, self.cfg.tau)
        soft_update(self.actor_target, self.actor, self.cfg.tau)
        return critic_loss, actor_objective

    def critic_targets(self, s2: np.ndarray, r: np.ndarray, done: np.ndarray) -> np.ndarray:
        """Bootstrapped regression targets y = r + gamma (1-done) Q'(s', pi'(s'))."""
        a2 = self.actor_target.forward(s2)
        q2 = self.critic_target.forward(np.concatenate([s2, a2], axis=1))[:, 0]
        return r + self.cfg.discount * (1.0 - done) * q2

    def update_critic(self, batch) -> float:
        s, a, r, s2, done = batch
        n = s.shape[0]
        y = self.critic_targets(s2, r, done)
        q, cache = self.critic.forward_cached(np.concatenate([s, a], axis=1))
        err = q[:, 0] - y
        grads, _ = self.critic.backward(cache, (2.0 / n) * err[:, None])
        self.critic_opt.step(self.critic, grads)
        return float(np.mean(err * err))

    def update_actor(self, states: np.ndarray) -> float:
        """Ascend the critic's value of the actor's actions (chain rule through Q)."""
        n = states.shape[0]
        actions, a_cache = self.actor.forward_cached(states)
        q, c_cache = self.critic.forward_cached(np.concatenate([states, actions], axis=1))
        _, grad_in = self.critic.backward(c_cache, np.full((n, 1), -1.0 / n))
        grad_action = grad_in[:, self.cfg.state_dim:]
        grads, _ = self.actor.backward(a_cache, grad_action)
        self.actor_opt.step(self.actor, grads)
        return float(np.mean(q))

    def to_checkpoint(self) -> tuple[dict, dict]:
        nets = {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}
        opts = {"actor": self.actor_opt, "critic": self.critic_opt}
        return nets, opts

    @classmethod
    def from_checkpoint(cls, ckpt, cfg: DdpgConfig | None = None) -> "DdpgAgent":
        agent = cls(cfg)
        agent.actor = ckpt.nets["actor"]
        agent.critic = ckpt.nets["critic"]
        agent.actor_target = ckpt.nets["actor_target"]
        agent.critic_target = ckpt.nets["critic_target"]
        if "actor" in ckpt.optimizers:
            agent.actor_opt = ckpt.optimizers["actor"]
            agent.critic_opt = ckpt.optimizers["critic"]
        return agent
