import math

import numpy as np
import pytest

from vantagefly.agents import (
    DdpgAgent,
    DdpgConfig,
    DddqnAgent,
    DddqnConfig,
    DuelingQNet,
    EmptyBuffer,
    OuNoise,
    PgAgent,
    PgConfig,
    ReplayBuffer,
    Transition,
    decayed_sigma,
    discretize_action,
    encode_action,
)
from vantagefly.agents.dddqn import IndexOutOfRange
from vantagefly.nets import Mlp


class TestReplayBuffer:
    def test_fifo_eviction(self):
        buf = ReplayBuffer(capacity=5, state_dim=2, action_dim=1)
        for i in range(8):
            buf.add([i, i], [0.0], float(i), [i, i], False)
        assert len(buf) == 5
        rewards = buf._r[:len(buf)]
        assert set(rewards.tolist()) == {3.0, 4.0, 5.0, 6.0, 7.0}

    def test_uniform_sampling_hits_every_index(self):
        # chi-square sanity: 1e5 draws over 32 slots stay near uniform
        buf = ReplayBuffer(capacity=32, state_dim=1, action_dim=1)
        for i in range(32):
            buf.add([0.0], [0.0], float(i), [0.0], False)
        rng = np.random.default_rng(0)
        counts = np.zeros(32)
        batch, rounds = 25, 4000  # 1e5 draws, batch within the fill
        draws = batch * rounds
        for _ in range(rounds):
            _, _, r, _, _ = buf.sample(rng, batch)
            counts += np.bincount(r.astype(int), minlength=32)
        assert np.all(counts > 0)
        expected = draws / 32
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 70  # df=31; p ~ 1e-4 cutoff, far from pathological

    def test_sampling_errors(self):
        buf = ReplayBuffer(capacity=4, state_dim=1, action_dim=1)
        with pytest.raises(EmptyBuffer):
            buf.sample(np.random.default_rng(0), 1)
        buf.add([0.0], [0.0], 0.0, [0.0], False)
        with pytest.raises(ValueError):
            buf.sample(np.random.default_rng(0), 2)

    def test_transition_record(self):
        buf = ReplayBuffer(capacity=4, state_dim=2, action_dim=1)
        buf.add_transition(Transition(np.zeros(2), np.array([0.4]), 0.7,
                                      np.ones(2), True))
        s, a, r, s2, done = buf.sample(np.random.default_rng(0), 1)
        assert r[0] == 0.7
        assert done[0] == 1.0


class TestNoise:
    def test_reset_and_shape(self):
        noise = OuNoise(4, rng=0)
        first = noise.sample()
        assert first.shape == (4,)
        noise.reset()
        assert np.array_equal(noise._x, np.zeros(4))

    def test_sigma_decay_endpoints(self):
        for schedule in ("exp", "linear"):
            assert decayed_sigma(0, 100, schedule=schedule) == pytest.approx(0.3)
            assert decayed_sigma(99, 100, schedule=schedule) == pytest.approx(0.05, abs=1e-3)
            assert decayed_sigma(200, 100, schedule=schedule) == pytest.approx(0.05, abs=1e-3)
        values = [decayed_sigma(ep, 100) for ep in range(0, 100, 10)]
        assert all(a >= b for a, b in zip(values, values[1:]))  # monotone decay
        # exponential front-loads the decay relative to linear
        assert decayed_sigma(20, 100) < decayed_sigma(20, 100, schedule="linear")


class TestDdpg:
    def small_cfg(self, **kw):
        defaults = dict(state_dim=3, action_dim=2, hidden=(16, 16), batch_size=8)
        defaults.update(kw)
        return DdpgConfig(**defaults)

    def test_zero_weight_actor_hovers(self):
        agent = DdpgAgent(self.small_cfg(), rng=0)
        for w in agent.actor.weights:
            w[:] = 0.0
        for b in agent.actor.biases:
            b[:] = 0.0
        assert np.all(agent.act(np.ones(3)) == 0.0)

    def test_act_deterministic_without_noise(self):
        agent = DdpgAgent(self.small_cfg(), rng=1)
        s = np.array([0.1, -0.2, 0.3])
        np.testing.assert_array_equal(agent.act(s), agent.act(s))

    def test_actions_always_bounded(self):
        agent = DdpgAgent(self.small_cfg(), rng=2)
        rng = np.random.default_rng(3)
        noise = OuNoise(2, sigma=2.0, rng=4)
        for _ in range(500):
            a = agent.act(rng.normal(size=3), noise)
            assert np.all(np.abs(a) <= 0.8 + 1e-12)

    def test_terminal_transitions_cut_bootstrap(self):
        agent = DdpgAgent(self.small_cfg(), rng=5)
        s2 = np.random.default_rng(6).normal(size=(4, 3))
        r = np.array([0.3, -0.8, 1.0, 0.0])
        y = agent.critic_targets(s2, r, done=np.ones(4))
        np.testing.assert_array_equal(y, r)

    def test_critic_regression_fixed_point(self):
        cfg = self.small_cfg(critic_lr=1e-2)
        agent = DdpgAgent(cfg, rng=7)
        s = np.tile(np.array([0.5, -0.5, 0.2]), (8, 1))
        a = np.tile(np.array([0.1, -0.1]), (8, 1))
        batch = (s, a, np.full(8, 0.7), s.copy(), np.ones(8))
        for _ in range(500):
            agent.update_critic(batch)
        q = agent.critic.forward(np.concatenate([s[:1], a[:1]], axis=1))
        assert q[0, 0] == pytest.approx(0.7, abs=1e-3)

    def test_actor_descends_quadratic_critic(self):
        # critic stub Q(s, a) = -|a|^2: gradient ascent must shrink the actions
        cfg = self.small_cfg(actor_lr=1e-2)
        agent = DdpgAgent(cfg, rng=8)

        class QuadraticCritic:
            def forward_cached(self, x):
                act = x[:, 3:]
                return -np.sum(act ** 2, axis=1, keepdims=True), act

            def backward(self, act, upstream):
                grad_x = np.concatenate(
                    [np.zeros((act.shape[0], 3)), upstream * (-2.0 * act)], axis=1)
                return [], grad_x

        agent.critic = QuadraticCritic()
        states = np.random.default_rng(9).normal(size=(8, 3))
        before = float(np.mean(np.abs(agent.actor.forward(states))))
        for _ in range(300):
            agent.update_actor(states)
        after = float(np.mean(np.abs(agent.actor.forward(states))))
        assert after < before * 0.2

    def test_lr_zero_freezes_policies(self):
        cfg = self.small_cfg(actor_lr=0.0, critic_lr=0.0, tau=0.0)
        agent = DdpgAgent(cfg, rng=10)
        buf = ReplayBuffer(16, state_dim=3, action_dim=2)
        rng = np.random.default_rng(11)
        for _ in range(16):
            buf.add(rng.normal(size=3), rng.uniform(-0.8, 0.8, 2), rng.normal(),
                    rng.normal(size=3), False)
        w_before = [w.copy() for w in agent.actor.weights + agent.critic.weights]
        for _ in range(10):
            agent.update(buf, rng)
        w_after = agent.actor.weights + agent.critic.weights
        for wb, wa in zip(w_before, w_after):
            np.testing.assert_array_equal(wb, wa)


class TestDiscretization:
    def test_center_index_is_hover(self):
        np.testing.assert_array_equal(discretize_action(13), np.zeros(4))

    def test_corner_index(self):
        np.testing.assert_array_equal(discretize_action(0)[:3], [-0.8, -0.8, -0.8])

    def test_bijection(self):
        decoded = {tuple(discretize_action(i)[:3]) for i in range(27)}
        assert len(decoded) == 27
        for vx in (-1, 0, 1):
            for vy in (-1, 0, 1):
                for vz in (-1, 0, 1):
                    idx = encode_action(vx, vy, vz)
                    np.testing.assert_allclose(discretize_action(idx)[:3],
                                               [vx * 0.8, vy * 0.8, vz * 0.8])

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            discretize_action(27)
        with pytest.raises(IndexOutOfRange):
            discretize_action(-1)

    def test_yaw_channel_proportional_rule(self):
        assert discretize_action(13, yaw_error=0.05, k_yaw=4.0)[3] == pytest.approx(0.2)
        assert discretize_action(13, yaw_error=1.0, k_yaw=4.0)[3] == 0.8
        assert discretize_action(13, yaw_error=-1.0, k_yaw=4.0)[3] == -0.8


class TestDddqn:
    def test_dueling_constant_advantage_collapses_to_value(self):
        net = DuelingQNet(state_dim=3, hidden=(8, 8), n_actions=5, rng=0)
        for w in net.a_head.weights:
            w[:] = 0.0
        net.a_head.biases[0][:] = 4.2  # constant advantage across actions
        s = np.random.default_rng(1).normal(size=(6, 3))
        q = net.forward(s)
        v = net.v_head.forward(net.trunk.forward(s))
        np.testing.assert_allclose(q, np.repeat(v, 5, axis=1), atol=1e-12)

    def test_terminal_target_is_reward(self):
        agent = DddqnAgent(DddqnConfig(state_dim=2, hidden=(8, 8), n_actions=3), rng=2)
        r = np.array([1.0, -0.8])
        y = agent.q_targets(np.zeros((2, 2)), r, done=np.ones(2))
        np.testing.assert_array_equal(y, r)

    def test_double_dqn_uses_online_argmax(self):
        agent = DddqnAgent(DddqnConfig(state_dim=2, hidden=(4, 4), n_actions=2,
                                       discount=0.5), rng=3)
        # craft conflicting argmaxes: online prefers action 1, target values action 0
        agent.q.forward = lambda s: np.tile([0.0, 10.0], (np.atleast_2d(s).shape[0], 1))
        agent.q_target.forward = lambda s: np.tile([5.0, 1.0], (np.atleast_2d(s).shape[0], 1))
        y = agent.q_targets(np.zeros((1, 2)), np.zeros(1), np.zeros(1))
        assert y[0] == pytest.approx(0.5 * 1.0)  # target's value of the online argmax

    def test_toy_mdp_matches_value_iteration(self):
        # deterministic 2-state 2-action MDP solved by exact dynamic programming
        gamma = 0.9
        next_state = {(0, 0): 0, (0, 1): 1, (1, 0): 0, (1, 1): 1}
        reward = {(0, 0): 1.0, (0, 1): 0.0, (1, 0): 2.0, (1, 1): 0.0}
        q_star = np.zeros((2, 2))
        for _ in range(400):
            q_new = np.array([[reward[s, a] + gamma * q_star[next_state[s, a]].max()
                               for a in (0, 1)] for s in (0, 1)])
            q_star = q_new
        np.testing.assert_allclose(q_star, [[10.0, 9.9], [11.0, 9.9]], atol=1e-6)

        cfg = DddqnConfig(state_dim=2, hidden=(32, 32), n_actions=2, lr=3e-3,
                          discount=gamma, tau=0.05, batch_size=32)
        agent = DddqnAgent(cfg, rng=4)
        buf = ReplayBuffer(64, state_dim=2, action_dim=None)
        eye = np.eye(2)
        for s in (0, 1):
            for a in (0, 1):
                for _ in range(16):
                    buf.add(eye[s], a, reward[s, a], eye[next_state[s, a]], False)
        rng = np.random.default_rng(5)
        for _ in range(8000):
            agent.update(buf, rng)
        learned = agent.q.forward(eye)
        np.testing.assert_allclose(learned, q_star, atol=1e-2)


class TestActionBounds:
    def test_every_agent_commands_within_limits(self):
        rng = np.random.default_rng(0)
        states = rng.uniform(0, 1, size=(200, 14))
        states[:, 5:9] = rng.uniform(-1, 1, size=(200, 4))

        ddpg = DdpgAgent(DdpgConfig(hidden=(16, 16)), rng=1)
        noise = OuNoise(4, sigma=1.5, rng=2)
        pg = PgAgent(PgConfig(hidden=(16, 16)), rng=3)
        dddqn = DddqnAgent(DddqnConfig(hidden=(16, 16)), rng=4)
        for s in states:
            for a in (ddpg.act(s, noise), pg.act(s, rng),
                      dddqn.command(int(rng.integers(27)), s)):
                assert np.all(np.abs(a) <= 0.8 + 1e-12)


class TestPg:
    def test_zero_advantages_give_zero_policy_gradient(self):
        cfg = PgConfig(state_dim=2, action_dim=1, hidden=(8, 8),
                       normalize_advantages=False)
        agent = PgAgent(cfg, rng=0)
        for w in agent.value_net.weights:
            w[:] = 0.0
        for b in agent.value_net.biases:
            b[:] = 0.0
        before = [w.copy() for w in agent.policy.mean_net.weights]
        states = np.random.default_rng(1).normal(size=(5, 2))
        actions = np.random.default_rng(2).uniform(-0.5, 0.5, size=(5, 1))
        agent.update(states, actions, np.zeros(5))  # returns 0 == V -> adv 0
        for wb, wa in zip(before, agent.policy.mean_net.weights):
            np.testing.assert_array_equal(wb, wa)

    def test_log_prob_gradient_finite_difference(self):
        cfg = PgConfig(state_dim=3, action_dim=2, hidden=(6, 6))
        agent = PgAgent(cfg, rng=3)
        s = np.random.default_rng(4).normal(size=3)
        a = np.array([0.2, -0.4])

        def neg_logp():
            return -float(agent.policy.log_prob(s, a)[0])

        mu, cache = agent.policy.mean_net.forward_cached(s[None, :])
        var = np.exp(2.0 * agent.policy.log_std)
        gmu = (mu - a[None, :]) / var  # d(-logp)/dmu
        grads, _ = agent.policy.mean_net.backward(cache, gmu)
        flat = [g for pair in grads for g in pair]
        params = agent.policy.mean_net.parameters()
        rng = np.random.default_rng(6)
        h = 1e-5
        for _ in range(60):
            pi = int(rng.integers(len(params)))
            arr = params[pi].reshape(-1)
            ci = int(rng.integers(arr.size))
            orig = arr[ci]
            arr[ci] = orig + h
            fp = neg_logp()
            arr[ci] = orig - h
            fm = neg_logp()
            arr[ci] = orig
            numeric = (fp - fm) / (2 * h)
            analytic = flat[pi].reshape(-1)[ci]
            assert abs(analytic - numeric) / max(abs(numeric), abs(analytic), 1e-8) < 1e-4

        # log-std gradient
        base = neg_logp()
        glogstd_analytic = -((a - mu[0]) ** 2 / var - 1.0)
        for i in range(2):
            orig = agent.policy.log_std[i]
            agent.policy.log_std[i] = orig + h
            fp = neg_logp()
            agent.policy.log_std[i] = orig - h
            fm = neg_logp()
            agent.policy.log_std[i] = orig
            numeric = (fp - fm) / (2 * h)
            assert abs(glogstd_analytic[i] - numeric) / max(abs(numeric), 1e-8) < 1e-4
        assert base == pytest.approx(neg_logp())

    def test_bandit_converges_to_optimum(self):
        # one-step episodes, reward -(action - 0.3)^2; optimal mean is 0.3
        cfg = PgConfig(state_dim=1, action_dim=1, hidden=(16, 16), policy_lr=5e-3,
                       value_lr=1e-2, log_std_lr=0.0, normalize_advantages=False)
        agent = PgAgent(cfg, rng=7)
        rng = np.random.default_rng(8)
        state = np.array([1.0])
        for _ in range(3000):
            a = agent.act(state, rng)
            r = -(float(a[0]) - 0.3) ** 2
            agent.update(state[None, :], a[None, :], np.array([r]))
        mean = float(agent.policy.mean(state)[0])
        assert mean == pytest.approx(0.3, abs=0.05)
