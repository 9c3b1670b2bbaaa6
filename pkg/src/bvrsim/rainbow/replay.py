"""Replay machinery: sum tree, prioritized buffer, n-step aggregation."""
from __future__ import annotations

from collections import deque
from typing import NamedTuple

import numpy as np


class Transition(NamedTuple):
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    gamma_eff: float


class SumTree:
    """Array-backed binary tree whose internal nodes hold child sums.

    Leaves are padded to a power of two; unused leaves carry zero priority
    and can never be selected. Updates and prefix-sum lookups are O(log n).
    """

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.n_leaves = 1 << (capacity - 1).bit_length()
        self.nodes = np.zeros(2 * self.n_leaves, dtype=np.float64)

    @property
    def total(self) -> float:
        return float(self.nodes[1])

    def get(self, index: int) -> float:
        return float(self.nodes[self.n_leaves + index])

    def update(self, index: int, value: float) -> None:
        if not 0 <= index < self.capacity:
            raise IndexError(f"leaf {index} out of range")
        if value < 0.0:
            raise ValueError("priorities must be non-negative")
        i = self.n_leaves + index
        delta = value - self.nodes[i]
        while i >= 1:
            self.nodes[i] += delta
            i >>= 1
        # pin the leaf exactly (the loop added delta to it as well)
        self.nodes[self.n_leaves + index] = value

    def find(self, cumsum: float) -> int:
        """Leaf index i such that cumsum falls in leaf i's priority span."""
        i = 1
        while i < self.n_leaves:
            left = 2 * i
            if cumsum <= self.nodes[left]:
                i = left
            else:
                cumsum -= self.nodes[left]
                i = left + 1
        return i - self.n_leaves

    def leaf_priorities(self) -> np.ndarray:
        return self.nodes[self.n_leaves : self.n_leaves + self.capacity].copy()


class PrioritizedReplay:
    """Ring buffer with proportional prioritization.

    New entries take the running max priority so everything is replayed at
    least once; sampling is stratified over equal mass segments and returns
    importance weights normalized to the batch max.
    """

    def __init__(
        self,
        capacity: int,
        obs_dim: int,
        alpha: float,
        epsilon: float,
        rng: np.random.Generator,
        prioritized: bool = True,
    ):
        self.capacity = capacity
        self.alpha = alpha
        self.epsilon = epsilon
        self.rng = rng
        self.prioritized = prioritized
        self.tree = SumTree(capacity)
        self.pos = 0
        self.count = 0
        self.max_priority = 1.0
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float64)
        self.dones = np.zeros(capacity, dtype=bool)
        self.gammas = np.zeros(capacity, dtype=np.float64)

    def __len__(self) -> int:
        return self.count

    def push(self, t: Transition) -> int:
        idx = self.pos
        self.obs[idx] = t.obs
        self.next_obs[idx] = t.next_obs
        self.actions[idx] = t.action
        self.rewards[idx] = t.reward
        self.dones[idx] = t.done
        self.gammas[idx] = t.gamma_eff
        self.tree.update(idx, self.max_priority)
        self.pos = (self.pos + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)
        return idx

    def sample(self, batch_size: int, beta: float):
        if batch_size > self.count:
            raise ValueError(f"batch {batch_size} exceeds population {self.count}")
        if self.prioritized:
            total = self.tree.total
            segment = total / batch_size
            draws = (np.arange(batch_size) + self.rng.random(batch_size)) * segment
            indices = np.array([min(self.tree.find(u), self.count - 1) for u in draws], dtype=np.int64)
            priorities = np.array([self.tree.get(i) for i in indices])
            probs = priorities / total
            weights = (self.count * probs) ** (-beta)
            weights = weights / weights.max()
        else:
            indices = self.rng.integers(0, self.count, size=batch_size)
            weights = np.ones(batch_size, dtype=np.float64)
        batch = dict(
            obs=self.obs[indices],
            actions=self.actions[indices],
            rewards=self.rewards[indices],
            next_obs=self.next_obs[indices],
            dones=self.dones[indices],
            gammas=self.gammas[indices],
        )
        return batch, indices, weights

    def update_priorities(self, indices: np.ndarray, td_errors: np.ndarray) -> None:
        new = (np.abs(td_errors) + self.epsilon) ** self.alpha
        for idx, p in zip(indices, new):
            self.tree.update(int(idx), float(p))
        if len(new):
            self.max_priority = max(self.max_priority, float(new.max()))


def accumulate_nstep(window: list[Transition], gamma: float) -> Transition:
    """Collapse consecutive single-step transitions into one n-step record."""
    if not window:
        raise ValueError("empty n-step window")
    reward = 0.0
    for k, t in enumerate(window):
        reward += (gamma**k) * t.reward
    last = window[-1]
    return Transition(
        obs=window[0].obs,
        action=window[0].action,
        reward=reward,
        next_obs=last.next_obs,
        done=last.done,
        gamma_eff=gamma ** len(window),
    )


class NStepAccumulator:
    """Streams single-step transitions in, emits n-step transitions out.

    Terminal steps flush every pending suffix so no experience is lost at
    episode boundaries.
    """

    def __init__(self, n: int, gamma: float):
        self.n = n
        self.gamma = gamma
        self.window: deque[Transition] = deque()

    def push(self, t: Transition, episode_end: bool | None = None) -> list[Transition]:
        """episode_end defaults to t.done; pass True with t.done False for
        time-limit truncation, which flushes the window but still lets the
        final transition bootstrap."""
        if episode_end is None:
            episode_end = t.done
        self.window.append(t)
        out: list[Transition] = []
        if episode_end:
            while self.window:
                out.append(accumulate_nstep(list(self.window), self.gamma))
                self.window.popleft()
        elif len(self.window) == self.n:
            out.append(accumulate_nstep(list(self.window), self.gamma))
            self.window.popleft()
        return out

    def reset(self) -> None:
        self.window.clear()
