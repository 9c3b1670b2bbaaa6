"""Learning agent: noisy-greedy acting, double-Q distributional updates,
prioritized replay bookkeeping and target-network synchronization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import RainbowConfig
from .network import Adam, QNetwork
from .projection import project_distribution
from .replay import NStepAccumulator, PrioritizedReplay, Transition


class LearnerFault(RuntimeError):
    """Non-finite loss or gradients; carries a diagnostic snapshot."""


@dataclass
class LearnStats:
    loss: float
    mean_td_error: float
    learn_steps: int


class RainbowAgent:
    """One learner owning an online/target net pair and the replay buffer."""

    def __init__(self, cfg: RainbowConfig, obs_dim: int = 16, n_actions: int = 6, seed: int = 0):
        self.cfg = cfg
        self.n_actions = n_actions
        self.online = QNetwork(cfg, obs_dim, n_actions, seed=seed)
        self.target = QNetwork(cfg, obs_dim, n_actions, seed=seed)
        self.target.copy_from(self.online)
        self.optimizer = Adam(
            self.online.parameters(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon
        )
        self.noise_rng = np.random.Generator(np.random.Philox(seed + 101))
        self.sample_rng = np.random.Generator(np.random.Philox(seed + 202))
        self.replay = PrioritizedReplay(
            cfg.buffer_capacity, obs_dim, cfg.per_alpha, cfg.per_epsilon, self.sample_rng, prioritized=cfg.use_per
        )
        self.nstep = NStepAccumulator(cfg.n_step, cfg.gamma)
        self.learn_steps = 0

    # --- acting -----------------------------------------------------------
    def select_action(self, obs: np.ndarray, training: bool) -> int:
        """Greedy over expected return; exploration comes from parameter
        noise while training (or epsilon-greedy in the no-noise ablation).
        Evaluation mode is a pure function of (parameters, observation)."""
        if training and not self.cfg.use_noisy and self.sample_rng.random() < self.cfg.epsilon_greedy:
            return int(self.sample_rng.integers(0, self.n_actions))
        use_noise = bool(training and self.cfg.use_noisy)
        if use_noise:
            self.online.sample_noise(self.noise_rng)
        dist = self.online.forward(obs, use_noise=use_noise)
        q = self.online.q_values(dist)[0]
        return int(np.argmax(q))

    # --- experience -------------------------------------------------------
    def observe(self, obs, action, reward, next_obs, done, truncated: bool = False) -> int:
        """Feed one environment step through n-step aggregation into replay;
        returns how many replay entries were produced.

        Truncated episode ends (the clock ran out) flush the n-step window
        but stay bootstrappable: the stored transition is non-terminal."""
        terminal = bool(done) and not truncated
        produced = self.nstep.push(
            Transition(obs, int(action), float(reward), next_obs, terminal, self.cfg.gamma),
            episode_end=bool(done),
        )
        for t in produced:
            self.replay.push(t)
        if done:
            self.nstep.reset()
        return len(produced)

    # --- learning ---------------------------------------------------------
    def learn(self, beta: float) -> LearnStats:
        cfg = self.cfg
        batch, indices, weights = self.replay.sample(cfg.batch_size, beta)
        td_errors, loss = self.learner_step(batch, weights)
        self.replay.update_priorities(indices, td_errors)
        self.learn_steps += 1
        if self.learn_steps % cfg.target_sync == 0:
            self.sync_target()
        return LearnStats(loss=loss, mean_td_error=float(np.mean(np.abs(td_errors))), learn_steps=self.learn_steps)

    def learner_step(self, batch: dict, weights: np.ndarray) -> tuple[np.ndarray, float]:
        """One gradient update from a sampled batch.

        Action selection for the bootstrap value uses the online net under
        fresh noise when double-Q is on (the target net scores it under
        independent noise); the projected target distribution feeds a
        weighted cross-entropy loss.
        """
        cfg = self.cfg
        use_noise = cfg.use_noisy
        if use_noise:
            self.online.sample_noise(self.noise_rng)
            self.target.sample_noise(self.noise_rng)

        next_obs = batch["next_obs"]
        rewards = batch["rewards"]
        dones = batch["dones"].astype(np.float64)
        gammas = batch["gammas"]
        actions = batch["actions"]

        target_next = self.target.forward(next_obs, use_noise=use_noise)
        if cfg.use_double:
            online_next = self.online.forward(next_obs, use_noise=use_noise)
            a_star = np.argmax(self.online.q_values(online_next), axis=1)
        else:
            a_star = np.argmax(self.target.q_values(target_next), axis=1)
        rows = np.arange(len(actions))

        if cfg.use_distributional:
            target_probs = project_distribution(
                target_next[rows, a_star], rewards, gammas, dones, self.online.support
            )
            loss, grads, q_sel = self.online.distributional_loss(
                batch["obs"], actions, target_probs.astype(self.online.dtype), weights.astype(self.online.dtype), use_noise
            )
            q_boot = self.target.q_values(target_next)[rows, a_star]
        else:
            q_boot = self.target.q_values(target_next)[rows, a_star]
            target_q = rewards + gammas * (1.0 - dones) * q_boot
            loss, grads, q_sel = self.online.scalar_loss(
                batch["obs"], actions, target_q.astype(self.online.dtype), weights.astype(self.online.dtype), use_noise
            )

        if not np.isfinite(loss) or any(not np.all(np.isfinite(g)) for g in grads.values()):
            raise LearnerFault(
                f"non-finite loss/gradients at learn step {self.learn_steps}: "
                f"loss={loss!r} rewards=[{rewards.min()}, {rewards.max()}]"
            )
        self.optimizer.step(self.online.parameters(), grads)

        td_errors = np.abs(np.asarray(q_sel, dtype=np.float64) - (rewards + gammas * (1.0 - dones) * q_boot))
        return td_errors, loss

    def sync_target(self) -> None:
        self.target.copy_from(self.online)

    def beta_at(self, step: int, total_steps: int) -> float:
        cfg = self.cfg
        if total_steps <= 0:
            return cfg.per_beta_end
        frac = min(1.0, max(0.0, step / total_steps))
        return cfg.per_beta_start + frac * (cfg.per_beta_end - cfg.per_beta_start)
