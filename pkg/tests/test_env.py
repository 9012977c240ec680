import math

import numpy as np
import pytest
from scipy.optimize import brentq

from vantagefly.env import (
    EnvConfig,
    EpisodeFinished,
    NormalizationSpec,
    RewardParams,
    SelfieEnv,
    StateUnavailable,
    StepOutcome,
    Termination,
    assemble_state,
    base_reward,
    linear_reward,
    shape_and_terminate,
)
from vantagefly.geometry import VantagePoint
from vantagefly.world import (
    CameraModel,
    Detection,
    DronePose,
    in_safe_zone,
    project_person,
    required_distance,
    wrap_angle,
)

P = RewardParams()
CAM = CameraModel()
VIS = Detection(0.5, 0.5, 0.24, True)


def reward_oracle(a, b, c):
    """Independent scalar evaluation of the basin-times-velocity-penalty reward."""
    d = math.sqrt(sum((ai - ci) ** 2 for ai, ci in zip(a, c)))
    if d >= 1.5:
        return 0.0
    speed = sum(abs(bi) for bi in b)
    raw = math.cos(11.3 * d * math.exp(-1.3 * d)) * math.exp(-0.35 * speed)
    return min(1.0, max(0.0, raw))


class TestBaseReward:
    def test_goal_at_rest_is_exactly_one(self):
        a = np.array([0.5, 0.5, 0.5, 0.5, 0.5])
        assert base_reward(a, np.zeros(4), a.copy(), P) == 1.0

    def test_half_unit_distance_clips_to_zero(self):
        # inner argument 11.3 * 0.5 * e^-0.65 ~= 2.9496 rad, cosine negative
        a = np.zeros(5)
        c = np.array([0.5, 0, 0, 0, 0])
        assert base_reward(a, np.zeros(4), c, P) == 0.0

    def test_near_goal_with_speed(self):
        a = np.zeros(5)
        c = np.array([0.1, 0, 0, 0, 0])
        b = np.array([0.25, -0.25, 0.25, -0.25])  # L1 norm 1
        expected = math.cos(1.13 * math.exp(-0.13)) * math.exp(-0.35)
        got = base_reward(a, b, c, P)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.386, abs=1e-3)

    def test_matches_oracle_on_random_triples(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            a = rng.uniform(0, 1, 5)
            c = rng.uniform(0, 1, 5)
            b = rng.uniform(-1, 1, 4)
            assert base_reward(a, b, c, P) == pytest.approx(
                reward_oracle(a, b, c), abs=1e-12)

    def test_far_field_guard(self):
        a = np.zeros(5)
        c = np.full(5, 0.95)  # distance ~2.12, inside the spurious cosine plateau
        assert base_reward(a, np.zeros(4), c, P) == 0.0

    def test_velocity_penalty_monotone(self):
        a = np.zeros(5)
        c = np.array([0.05, 0, 0, 0, 0])
        speeds = np.linspace(0, 1, 11)
        rewards = [base_reward(a, [s, 0, 0, 0], c, P) for s in speeds]
        assert all(r1 > r2 for r1, r2 in zip(rewards, rewards[1:]))

    def test_basin_radii_by_root_finding(self):
        inner = lambda d: 11.3 * d * math.exp(-1.3 * d)
        d0 = brentq(lambda d: inner(d) - math.pi / 2, 1e-6, 1.0)
        assert d0 == pytest.approx(0.175, abs=1e-3)
        d_success = brentq(lambda d: math.cos(inner(d)) - 0.85, 1e-6, d0)
        assert d_success == pytest.approx(0.053, abs=1e-3)
        d_far = brentq(lambda d: inner(d) - math.pi / 2, 1.0, 4.0)
        assert d_far == pytest.approx(2.08, abs=5e-3)  # exact root; ~2.07 to 3 figures
        assert d_far > 1.5  # the guard distance covers the spurious plateau

    def test_linear_reward_basin(self):
        a = np.zeros(5)
        assert linear_reward(a, np.zeros(4), a, P) == 1.0
        c = np.array([0.75, 0, 0, 0, 0])
        assert linear_reward(a, np.zeros(4), c, P) == pytest.approx(0.5, rel=1e-12)
        assert linear_reward(a, np.zeros(4), np.array([1.6, 0, 0, 0, 0]), P) == 0.0


class TestTerminationLadder:
    def test_success_by_reward(self):
        out = shape_and_terminate(0.9, VIS, True, False, 5, P)
        assert out == StepOutcome(1.0, True, Termination.SUCCESS)

    def test_success_by_goal_disc(self):
        out = shape_and_terminate(0.1, VIS, True, True, 5, P)
        assert out == StepOutcome(1.0, True, Termination.SUCCESS)

    def test_out_of_zone(self):
        out = shape_and_terminate(0.3, VIS, False, False, 5, P)
        assert out == StepOutcome(-0.8, True, Termination.OUT_OF_ZONE)

    def test_lost_detection(self):
        out = shape_and_terminate(0.0, Detection.invisible(), True, False, 5, P)
        assert out == StepOutcome(-0.8, True, Termination.LOST_DETECTION)

    def test_edge_penalty_is_not_terminal(self):
        near_left = Detection(6.0 / 640.0, 0.5, 0.2, True)  # 6 px from the border
        out = shape_and_terminate(0.4, near_left, True, False, 5, P)
        assert out == StepOutcome(-0.8, False, Termination.RUNNING)

    def test_exploration_bonus(self):
        out = shape_and_terminate(0.78, VIS, True, False, 5, P)
        assert out == StepOutcome(1.0, False, Termination.RUNNING)

    def test_timeout_keeps_current_reward(self):
        out = shape_and_terminate(0.42, VIS, True, False, 41, P)
        assert out == StepOutcome(0.42, True, Termination.TIMEOUT)

    def test_plain_running_reward(self):
        out = shape_and_terminate(0.42, VIS, True, False, 17, P)
        assert out == StepOutcome(0.42, False, Termination.RUNNING)

    def test_priority_zone_beats_detection(self):
        out = shape_and_terminate(0.0, Detection.invisible(), False, False, 3, P)
        assert out.kind is Termination.OUT_OF_ZONE

    def test_priority_success_beats_everything(self):
        out = shape_and_terminate(0.9, Detection.invisible(), False, True, 41, P)
        assert out.kind is Termination.SUCCESS

    def test_exactly_one_branch_fires(self):
        rng = np.random.default_rng(0)
        kinds = {k: 0 for k in Termination}
        for _ in range(5000):
            det = Detection(rng.uniform(-0.05, 1.05), rng.uniform(-0.05, 1.05),
                            rng.uniform(0.01, 0.6), rng.random() < 0.9)
            out = shape_and_terminate(
                rng.uniform(0, 1), det, rng.random() < 0.8, rng.random() < 0.05,
                int(rng.integers(1, 42)), P)
            assert out.terminal == (out.kind is not Termination.RUNNING)
            kinds[out.kind] += 1
        assert all(kinds[k] > 0 for k in Termination if k is not Termination.TIMEOUT)


class TestStateAssembly:
    NORMS = NormalizationSpec()

    def target(self, az=0.2, z=0.85, ratio=0.24):
        return VantagePoint(az, z, 0.5, 0.5, ratio)

    def test_range_endpoints(self):
        pose = DronePose(x=5.0, y=0.0, z=0.5, yaw=wrap_angle(math.radians(75) + math.pi))
        det = Detection(0.5, 0.5, 0.03, True)
        s = assemble_state(pose, det, self.target(), self.NORMS)
        assert s[1] == 0.0  # z at bottom of range
        assert s[0] == pytest.approx(1.0)  # yaw at +75 deg
        assert s[4] == 0.0  # ratio at lower bound
        pose_hi = DronePose(x=5.0, y=0.0, z=3.0, yaw=wrap_angle(-math.radians(75) + math.pi))
        s = assemble_state(pose_hi, Detection(0.5, 0.5, 0.5, True), self.target(), self.NORMS)
        assert s[1] == 1.0
        assert s[0] == pytest.approx(0.0)
        assert s[4] == 1.0

    def test_matched_pose_gives_a_equals_c(self):
        az, ratio, z = 0.2, 0.24, 0.85
        d = required_distance(ratio, CAM)
        pose = DronePose(x=d * math.cos(az), y=d * math.sin(az), z=z,
                         yaw=wrap_angle(az + math.pi))
        det = project_person(pose, CAM)
        s = assemble_state(pose, det, self.target(az, z, ratio), self.NORMS)
        np.testing.assert_allclose(s[:5], s[9:], atol=1e-9)
        np.testing.assert_allclose(s[5:9], 0.0)

    def test_invisible_detection_raises(self):
        with pytest.raises(StateUnavailable):
            assemble_state(DronePose(x=5), Detection.invisible(), self.target(), self.NORMS)


class TestEpisodes:
    def make_env(self, mode="shaped"):
        return SelfieEnv(EnvConfig(reward=RewardParams(mode=mode)))

    def test_reset_is_deterministic(self):
        env1, env2 = self.make_env(), self.make_env()
        s1 = env1.reset(seed=123)
        s2 = env2.reset(seed=123)
        np.testing.assert_array_equal(s1, s2)
        assert env1.target == env2.target

    def test_reset_sweep_valid_and_visible(self):
        env = self.make_env()
        for seed in range(1000):
            env.reset(seed=seed)
            assert env.detection.visible
            assert in_safe_zone(env.pose, env.detection, env.cfg.world.zone)
            assert 0.03 <= env.target.body_ratio_omega_v <= 0.4
            assert abs(env.target.azimuth_psi_v) <= math.radians(75)
            assert 0.5 <= env.target.height_upsilon_v <= 3.0

    def test_zero_action_from_goal_succeeds_in_one_step(self):
        env = self.make_env()
        az, ratio, z = 0.2, 0.24, 0.85
        d = required_distance(ratio, CAM)
        pose = DronePose(x=d * math.cos(az), y=d * math.sin(az), z=z,
                         yaw=wrap_angle(az + math.pi))
        env.reset_to(pose, VantagePoint(az, z, 0.5, 0.5, ratio))
        _, outcome = env.step(np.zeros(4))
        assert outcome.kind is Termination.SUCCESS
        assert outcome.reward == 1.0

    def test_full_forward_ends_in_failure(self):
        env = self.make_env()
        env.reset(seed=5)
        outcome = None
        for _ in range(41):
            _, outcome = env.step([0.8, 0.0, 0.0, 0.0])
            if outcome.terminal:
                break
        assert outcome.terminal
        assert outcome.kind in (Termination.LOST_DETECTION, Termination.OUT_OF_ZONE)

    def test_episode_never_exceeds_max_steps(self):
        env = self.make_env()
        for seed in range(10):
            env.reset(seed=seed)
            steps = 0
            while True:
                _, outcome = env.step(np.zeros(4))
                steps += 1
                if outcome.terminal:
                    break
            assert steps <= 41

    def test_timeout_carries_current_base_reward(self):
        env = self.make_env()
        az, z = 0.0, 1.5
        d = required_distance(0.1, CAM)  # far from the sampled target's basin
        pose = DronePose(x=d, y=0.0, z=z, yaw=wrap_angle(math.pi))
        env.reset_to(pose, VantagePoint(math.radians(60), 2.8, 0.5, 0.5, 0.35))
        outcome = None
        for _ in range(41):
            _, outcome = env.step(np.zeros(4))
        assert outcome.kind is Termination.TIMEOUT
        assert outcome.terminal
        assert outcome.reward == 0.0  # hovering far out: the basin reward is zero

    def test_step_after_terminal_raises(self):
        env = self.make_env()
        env.reset(seed=11)
        while True:
            _, outcome = env.step(np.zeros(4))
            if outcome.terminal:
                break
        with pytest.raises(EpisodeFinished):
            env.step(np.zeros(4))

    def test_sparse_mode_rewards(self):
        env = self.make_env(mode="sparse")
        env.reset(seed=5)
        _, outcome = env.step([0.8, 0, 0, 0])
        # far from goal: running reward must be 0, failures -0.8, success +1
        if outcome.kind is Termination.RUNNING:
            assert outcome.reward == 0.0
        elif outcome.kind is Termination.SUCCESS:
            assert outcome.reward == 1.0
        else:
            assert outcome.reward == -0.8

    def test_sparse_success_is_plus_one(self):
        env = self.make_env(mode="sparse")
        az, ratio, z = 0.0, 0.24, 0.85
        d = required_distance(ratio, CAM)
        pose = DronePose(x=d, y=0.0, z=z, yaw=wrap_angle(math.pi))
        env.reset_to(pose, VantagePoint(az, z, 0.5, 0.5, ratio))
        _, outcome = env.step(np.zeros(4))
        assert outcome.kind is Termination.SUCCESS
        assert outcome.reward == 1.0
