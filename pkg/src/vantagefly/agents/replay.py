"""FIFO ring replay buffer with uniform sampling, preallocated in numpy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyBuffer(RuntimeError):
    pass


@dataclass(frozen=True)
class Transition:
    """One off-policy learning record."""

    s: np.ndarray
    action: np.ndarray | int
    reward: float
    s_next: np.ndarray
    done: bool


class ReplayBuffer:
    """Stores (s, action, reward, s', done); actions may be vectors or indices."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int | None = None):
        self.capacity = int(capacity)
        self.state_dim = state_dim
        self.action_dim = action_dim
        self._s = np.zeros((capacity, state_dim))
        if action_dim is None:
            self._a = np.zeros(capacity, dtype=np.int64)
        else:
            self._a = np.zeros((capacity, action_dim))
        self._r = np.zeros(capacity)
        self._s2 = np.zeros((capacity, state_dim))
        self._done = np.zeros(capacity)
        self._idx = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, s, action, reward, s2, done):
        i = self._idx
        self._s[i] = s
        self._a[i] = action
        self._r[i] = reward
        self._s2[i] = s2
        self._done[i] = 1.0 if done else 0.0
        self._idx = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def add_transition(self, t: Transition):
        self.add(t.s, t.action, t.reward, t.s_next, t.done)

    def sample(self, rng: np.random.Generator, batch_size: int):
        if self._size == 0:
            raise EmptyBuffer("cannot sample from an empty buffer")
        if batch_size > self._size:
            raise ValueError(f"batch {batch_size} exceeds buffer fill {self._size}")
        idx = rng.integers(0, self._size, size=batch_size)
        return (self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._done[idx])
