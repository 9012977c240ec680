"""On-policy Gaussian policy gradient (REINFORCE) with a learned value baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets import Adam, Mlp


@dataclass(frozen=True)
class PgConfig:
    state_dim: int = 14
    action_dim: int = 4
    hidden: tuple[int, ...] = (512, 256)
    action_limit: float = 0.8
    policy_lr: float = 1e-4
    value_lr: float = 1e-3
    discount: float = 0.99
    log_std_init: float = -1.2  # sigma ~= 0.30
    log_std_lr: float = 1e-3
    normalize_advantages: bool = True


class GaussianPolicy:
    """Tanh-bounded state-dependent mean with a global learnable log-std."""

    def __init__(self, cfg: PgConfig, rng=None):
        rng = np.random.default_rng(rng)
        self.cfg = cfg
        self.mean_net = Mlp([cfg.state_dim, *cfg.hidden, cfg.action_dim],
                            output_activation="tanh", output_scale=cfg.action_limit,
                            rng=rng, final_init=3e-3)
        self.log_std = np.full(cfg.action_dim, cfg.log_std_init)

    def mean(self, states: np.ndarray) -> np.ndarray:
        return self.mean_net.forward(states)

    def sample(self, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        mu = self.mean_net.forward(state)
        return mu + np.exp(self.log_std) * rng.standard_normal(mu.shape)

    def log_prob(self, states: np.ndarray, actions: np.ndarray) -> np.ndarray:
        mu = self.mean_net.forward(np.atleast_2d(states))
        actions = np.atleast_2d(actions)
        var = np.exp(2.0 * self.log_std)
        z = (actions - mu) ** 2 / var
        return -0.5 * np.sum(z + 2.0 * self.log_std + np.log(2.0 * np.pi), axis=1)


class PgAgent:
    def __init__(self, cfg: PgConfig | None = None, rng=None):
        self.cfg = cfg if cfg is not None else PgConfig()
        rng = np.random.default_rng(rng)
        self.policy = GaussianPolicy(self.cfg, rng=rng)
        self.value_net = Mlp([self.cfg.state_dim, *self.cfg.hidden, 1], rng=rng)
        self.policy_opt = Adam(self.policy.mean_net, lr=self.cfg.policy_lr)
        self.value_opt = Adam(self.value_net, lr=self.cfg.value_lr)
        self._log_std_m = np.zeros(self.cfg.action_dim)
        self._log_std_v = np.zeros(self.cfg.action_dim)
        self._log_std_t = 0

    def act(self, state: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        lim = self.cfg.action_limit
        if rng is None:
            return np.clip(self.policy.mean(state), -lim, lim)
        return np.clip(self.policy.sample(state, rng), -lim, lim)

    def returns_to_go(self, rewards: np.ndarray) -> np.ndarray:
        g = np.zeros(len(rewards))
        acc = 0.0
        for i in range(len(rewards) - 1, -1, -1):
            acc = rewards[i] + self.cfg.discount * acc
            g[i] = acc
        return g

    def update(self, states: np.ndarray, actions: np.ndarray, rewards: np.ndarray) -> float:
        """One REINFORCE step on a complete episode; returns the policy loss."""
        states = np.atleast_2d(states)
        actions = np.atleast_2d(actions)
        n = states.shape[0]
        g = self.returns_to_go(np.asarray(rewards, dtype=float))

        v, v_cache = self.value_net.forward_cached(states)
        adv = g - v[:, 0]
        if self.cfg.normalize_advantages and n > 1 and adv.std() > 1e-8:
            adv = (adv - adv.mean()) / adv.std()

        mu, m_cache = self.policy.mean_net.forward_cached(states)
        var = np.exp(2.0 * self.policy.log_std)
        # loss = -mean(adv * log pi); d/dmu = -adv (a - mu) / var / n
        gmu = -(adv[:, None] * (actions - mu) / var) / n
        grads, _ = self.policy.mean_net.backward(m_cache, gmu)
        self.policy_opt.step(self.policy.mean_net, grads)

        glogstd = -(adv[:, None] * ((actions - mu) ** 2 / var - 1.0)).mean(axis=0)
        self._adam_log_std(glogstd)

        v_grads, _ = self.value_net.backward(v_cache, (2.0 / n) * (v[:, 0] - g)[:, None])
        self.value_opt.step(self.value_net, v_grads)

        logp = self.policy.log_prob(states, actions)
        return float(-np.mean(adv * logp))

    def _adam_log_std(self, grad: np.ndarray):
        c = self.cfg
        self._log_std_t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        self._log_std_m = b1 * self._log_std_m + (1 - b1) * grad
        self._log_std_v = b2 * self._log_std_v + (1 - b2) * grad ** 2
        mh = self._log_std_m / (1 - b1 ** self._log_std_t)
        vh = self._log_std_v / (1 - b2 ** self._log_std_t)
        self.policy.log_std -= c.log_std_lr * mh / (np.sqrt(vh) + eps)

    def to_checkpoint(self) -> tuple[dict, dict, dict]:
        nets = {"policy_mean": self.policy.mean_net, "value": self.value_net}
        opts = {"policy_mean": self.policy_opt, "value": self.value_opt}
        arrays = {"log_std": self.policy.log_std}
        return nets, opts, arrays

    @classmethod
    def from_checkpoint(cls, ckpt, cfg: PgConfig | None = None) -> "PgAgent":
        agent = cls(cfg)
        agent.policy.mean_net = ckpt.nets["policy_mean"]
        agent.value_net = ckpt.nets["value"]
        agent.policy.log_std = ckpt.arrays["log_std"].copy()
        return agent
