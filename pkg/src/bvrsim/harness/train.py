"""Self-play training: acting, learning, snapshots, ratings, metrics.

Single-worker mode runs one interleaved act/learn loop and is exactly
reproducible. Multi-worker mode runs rollout threads feeding a bounded
transition queue into the one learner thread; episode logs stay per-seed
deterministic while metrics ordering follows queue arrival.
"""
from __future__ import annotations

import csv
import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import RunConfig, config_hash
from ..mdp import BvrEnv
from ..rainbow.agent import LearnerFault, RainbowAgent
from ..rainbow.checkpoint import save_checkpoint
from ..rainbow.network import QNetwork
from ..rainbow.replay import NStepAccumulator, Transition
from ..replaylog import EpisodeLog
from .baselines import BASELINE_NAMES, NetPolicy, make_baseline
from .evaluate import eval_seeds, evaluate
from .pool import OpponentPool

EVAL_SEED_BASE = 900_000


class TrainingAborted(RuntimeError):
    def __init__(self, message: str, last_good_checkpoint: str | None):
        super().__init__(message)
        self.last_good_checkpoint = last_good_checkpoint


@dataclass
class TrainResult:
    env_steps: int
    episodes: int
    checkpoints: list[str]
    final_checkpoint: str
    metrics_path: str
    wall_time_s: float
    aborted: bool = False


class MetricsWriter:
    """Append-only CSV: step, episodes, mean_return, win_vs_<baseline>...,
    loss, mean_dca, wall_time_s."""

    def __init__(self, path: Path, baseline_names=BASELINE_NAMES):
        self.path = path
        self.baseline_names = tuple(baseline_names)
        self.header = (
            ["step", "episodes", "mean_return"]
            + [f"win_vs_{n}" for n in self.baseline_names]
            + ["loss", "mean_dca", "wall_time_s"]
        )
        if not path.exists():
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh).writerow(self.header)

    def append(self, step, episodes, mean_return, win_rates, loss, mean_dca, wall_time_s) -> None:
        row = [step, episodes, f"{mean_return:.6f}"]
        row += [f"{win_rates.get(n, 0.0):.4f}" for n in self.baseline_names]
        row += [f"{loss:.6f}", f"{mean_dca:.6f}", f"{wall_time_s:.3f}"]
        with open(self.path, "a", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerow(row)


@dataclass
class _Progress:
    env_steps: int = 0
    episodes: int = 0
    loss_ema: float = 0.0
    has_loss: bool = False
    recent_returns: list[float] = field(default_factory=list)
    recent_dca: list[float] = field(default_factory=list)

    def record_episode(self, ep_return: float, mean_dca: float) -> None:
        self.episodes += 1
        self.recent_returns.append(ep_return)
        self.recent_dca.append(mean_dca)
        if len(self.recent_returns) > 50:
            self.recent_returns.pop(0)
            self.recent_dca.pop(0)

    def record_loss(self, loss: float) -> None:
        self.loss_ema = loss if not self.has_loss else 0.99 * self.loss_ema + 0.01 * loss
        self.has_loss = True

    def mean_return(self) -> float:
        return float(np.mean(self.recent_returns)) if self.recent_returns else 0.0

    def mean_dca(self) -> float:
        return float(np.mean(self.recent_dca)) if self.recent_dca else 0.0


def _opponent_policy(kind: str, entry, pool: OpponentPool, agent: RainbowAgent, cfg: RunConfig, cache: dict):
    if kind == "latest":
        snap = QNetwork(agent.cfg, obs_dim=agent.online.obs_dim, n_actions=agent.n_actions)
        snap.copy_from(agent.online)
        return NetPolicy(snap, cfg, name="latest"), pool.live
    if entry.kind == "baseline":
        return make_baseline(entry.entry_id, cfg), entry
    if entry.entry_id not in cache:
        cache[entry.entry_id] = pool.make_policy(entry)
    return cache[entry.entry_id], entry


def train(cfg: RunConfig, out_dir: str | Path, resume: bool = False) -> TrainResult:
    """Run the configured number of environment steps and leave behind the
    checkpoint series, metrics CSV and (optionally) per-episode logs."""
    h = cfg.harness
    out = Path(out_dir)
    (out / "checkpoints").mkdir(parents=True, exist_ok=True)
    if h.log_episodes:
        (out / "episodes").mkdir(exist_ok=True)

    agent = RainbowAgent(cfg.rainbow, seed=h.seed)
    pool = OpponentPool(cfg)
    metrics = MetricsWriter(out / "metrics.csv")
    progress = _Progress()
    state_path = out / "train_state.json"

    if resume and state_path.exists():
        state = json.loads(state_path.read_text())
        progress.env_steps = state["env_steps"]
        progress.episodes = state["episodes"]
        from ..rainbow.checkpoint import load_checkpoint

        net = load_checkpoint(state["latest_checkpoint"], cfg.rainbow)
        agent.online.copy_from(net)
        agent.sync_target()
        for entry_id, path in state.get("pool", []):
            pool.add_checkpoint(entry_id, path)

    start = time.monotonic()
    initial_path = out / "checkpoints" / "ckpt_initial.ckpt"
    save_checkpoint(agent.online, initial_path)
    checkpoints = [str(initial_path)]
    last_good = str(initial_path)

    if h.num_workers <= 1:
        runner = _SingleWorkerLoop(cfg, agent, pool, progress, out, checkpoints)
    else:
        runner = _MultiWorkerLoop(cfg, agent, pool, progress, out, checkpoints)

    aborted = False
    try:
        runner.run(metrics, start)
        last_good = checkpoints[-1]
    except LearnerFault as exc:
        aborted = True
        raise TrainingAborted(str(exc), last_good_checkpoint=last_good) from exc
    finally:
        final_path = out / "checkpoints" / "ckpt_final.ckpt"
        if not aborted:
            save_checkpoint(agent.online, final_path)
            checkpoints.append(str(final_path))
            wall = time.monotonic() - start
            win_rates = _eval_win_rates(cfg, agent, progress)
            metrics.append(
                progress.env_steps,
                progress.episodes,
                progress.mean_return(),
                win_rates,
                progress.loss_ema,
                progress.mean_dca(),
                wall,
            )
            state_path.write_text(
                json.dumps(
                    {
                        "env_steps": progress.env_steps,
                        "episodes": progress.episodes,
                        "latest_checkpoint": str(final_path),
                        "config_hash": config_hash(cfg),
                        "pool": [[e.entry_id, e.path] for e in pool.checkpoints()],
                    },
                    indent=2,
                )
            )

    return TrainResult(
        env_steps=progress.env_steps,
        episodes=progress.episodes,
        checkpoints=checkpoints,
        final_checkpoint=checkpoints[-1],
        metrics_path=str(out / "metrics.csv"),
        wall_time_s=time.monotonic() - start,
        aborted=aborted,
    )


def _eval_win_rates(cfg: RunConfig, agent: RainbowAgent, progress: _Progress) -> dict[str, float]:
    h = cfg.harness
    if h.eval_matches <= 0:
        return {}
    policy = NetPolicy(agent.online, cfg, name="learner")
    opponents = [(n, make_baseline(n, cfg)) for n in BASELINE_NAMES]
    rows = evaluate(cfg, policy, opponents, h.eval_matches, eval_seeds(EVAL_SEED_BASE, h.eval_matches))
    return {r.opponent: r.win_rate for r in rows}


class _SingleWorkerLoop:
    def __init__(self, cfg, agent, pool, progress, out, checkpoints):
        self.cfg = cfg
        self.agent = agent
        self.pool = pool
        self.progress = progress
        self.out = out
        self.checkpoints = checkpoints
        self.env = BvrEnv(cfg)
        self.pool_rng = np.random.Generator(np.random.Philox(cfg.harness.seed + 77))
        self.policy_cache: dict[str, object] = {}

    def run(self, metrics: MetricsWriter, start: float) -> None:
        cfg, h, r = self.cfg, self.cfg.harness, self.cfg.rainbow
        agent, progress = self.agent, self.progress
        while progress.env_steps < h.total_steps:
            kind, entry = self.pool.sample(self.pool_rng)
            opponent, rated = _opponent_policy(kind, entry, self.pool, agent, cfg, self.policy_cache)
            seed = h.seed * 1_000_000 + progress.episodes
            agent_side = progress.episodes % 2 if h.alternate_sides else 0
            opp_side = 1 - agent_side
            loadout = None
            if getattr(opponent, "spawn_missiles", None) is not None:
                loadout = {opp_side: opponent.spawn_missiles}
            obs = self.env.reset(seed, opponent=opponent, loadout=loadout, agent_side=agent_side)

            log = None
            if h.log_episodes:
                sides = {str(agent_side): "learner", str(opp_side): getattr(opponent, "name", kind)}
                log = EpisodeLog(cfg, seed, loadout, sides, agent_side=agent_side)
            ep_return = 0.0
            phis = []

            while not self.env.done and progress.env_steps < h.total_steps:
                action = agent.select_action(obs, training=True)
                step = self.env.step(action)
                agent.observe(obs, action, step.reward, step.observation, step.done, truncated=step.truncated)
                obs = step.observation
                ep_return += step.reward
                phis.append(step.phi)
                progress.env_steps += 1
                if log is not None:
                    log.append_tick(self.env.world, step)

                if (
                    progress.env_steps >= r.warmup_steps
                    and progress.env_steps % r.learn_every == 0
                    and len(agent.replay) >= r.batch_size
                ):
                    stats = agent.learn(agent.beta_at(progress.env_steps, h.total_steps))
                    progress.record_loss(stats.loss)

                if progress.env_steps % h.snapshot_period == 0:
                    self._snapshot(progress.env_steps)
                if h.eval_every > 0 and progress.env_steps % h.eval_every == 0:
                    win_rates = _eval_win_rates(cfg, agent, progress)
                    metrics.append(
                        progress.env_steps,
                        progress.episodes,
                        progress.mean_return(),
                        win_rates,
                        progress.loss_ema,
                        progress.mean_dca(),
                        time.monotonic() - start,
                    )

            agent.nstep.reset()
            progress.record_episode(ep_return, float(np.mean(phis)) if phis else 0.0)
            if self.env.done and rated is not self.pool.live:
                from .pool import update_rating

                update_rating(self.pool.live, rated, self.env.outcome, h.elo_k)
            if log is not None:
                log.write(self.out / "episodes" / f"ep_{progress.episodes - 1:06d}.jsonl")

    def _snapshot(self, env_steps: int) -> None:
        path = self.out / "checkpoints" / f"ckpt_{env_steps:09d}.ckpt"
        save_checkpoint(self.agent.online, path)
        self.checkpoints.append(str(path))
        self.pool.add_checkpoint(f"ckpt_{env_steps:09d}", path)


class _MultiWorkerLoop:
    """Rollout threads -> bounded queue -> learner thread (this thread)."""

    def __init__(self, cfg, agent, pool, progress, out, checkpoints):
        self.cfg = cfg
        self.agent = agent
        self.pool = pool
        self.progress = progress
        self.out = out
        self.checkpoints = checkpoints
        self.queue: queue.Queue = queue.Queue(maxsize=cfg.harness.queue_capacity)
        self.stop = threading.Event()
        self.params_lock = threading.Lock()
        self.shared_params = {k: v.copy() for k, v in agent.online.parameters().items()}
        self.episode_counter = 0
        self.counter_lock = threading.Lock()
        self.policy_cache: dict[str, object] = {}

    def _next_episode_seed(self) -> tuple[int, int]:
        with self.counter_lock:
            idx = self.episode_counter
            self.episode_counter += 1
        return idx, self.cfg.harness.seed * 1_000_000 + idx

    def _refresh_params(self) -> None:
        with self.params_lock:
            for k, v in self.agent.online.parameters().items():
                np.copyto(self.shared_params[k], v)

    def _worker(self, worker_id: int) -> None:
        cfg, h, r = self.cfg, self.cfg.harness, self.cfg.rainbow
        env = BvrEnv(cfg)
        net = QNetwork(r, obs_dim=self.agent.online.obs_dim, n_actions=self.agent.n_actions)
        noise_rng = np.random.Generator(np.random.Philox(h.seed + 5000 + worker_id))
        pool_rng = np.random.Generator(np.random.Philox(h.seed + 9000 + worker_id))
        nstep = NStepAccumulator(r.n_step, r.gamma)
        while not self.stop.is_set():
            with self.params_lock:
                net.set_parameters(self.shared_params)
            kind, entry = self.pool.sample(pool_rng)
            if kind == "latest":
                opponent = NetPolicy(net, cfg, name="latest")
                rated_id = None
            elif entry.kind == "baseline":
                opponent = make_baseline(entry.entry_id, cfg)
                rated_id = entry.entry_id
            else:
                if entry.entry_id not in self.policy_cache:
                    self.policy_cache[entry.entry_id] = self.pool.make_policy(entry)
                opponent = self.policy_cache[entry.entry_id]
                rated_id = entry.entry_id
            episode_idx, seed = self._next_episode_seed()
            agent_side = episode_idx % 2 if h.alternate_sides else 0
            loadout = None
            if getattr(opponent, "spawn_missiles", None) is not None:
                loadout = {1 - agent_side: opponent.spawn_missiles}
            obs = env.reset(seed, opponent=opponent, loadout=loadout, agent_side=agent_side)
            nstep.reset()
            ep_return = 0.0
            phis = []
            while not env.done and not self.stop.is_set():
                if not r.use_noisy and noise_rng.random() < r.epsilon_greedy:
                    action = int(noise_rng.integers(0, 6))
                else:
                    if r.use_noisy:
                        net.sample_noise(noise_rng)
                    q = net.q_values(net.forward(obs, use_noise=r.use_noisy))[0]
                    action = int(np.argmax(q))
                step = env.step(action)
                emitted = nstep.push(
                    Transition(
                        obs, action, step.reward, step.observation, step.done and not step.truncated, r.gamma
                    ),
                    episode_end=step.done,
                )
                obs = step.observation
                ep_return += step.reward
                phis.append(step.phi)
                try:
                    self.queue.put(("step", emitted), timeout=0.5)
                except queue.Full:
                    if self.stop.is_set():
                        return
            if env.done:
                self.queue.put(
                    ("episode", ep_return, float(np.mean(phis)) if phis else 0.0, rated_id, env.outcome)
                )

    def run(self, metrics: MetricsWriter, start: float) -> None:
        cfg, h, r = self.cfg, self.cfg.harness, self.cfg.rainbow
        agent, progress = self.agent, self.progress
        workers = [
            threading.Thread(target=self._worker, args=(i,), daemon=True, name=f"rollout-{i}")
            for i in range(h.num_workers)
        ]
        for w in workers:
            w.start()
        try:
            while progress.env_steps < h.total_steps:
                try:
                    msg = self.queue.get(timeout=1.0)
                except queue.Empty:
                    continue
                if msg[0] == "episode":
                    _, ep_return, mean_phi, rated_id, outcome = msg
                    progress.record_episode(ep_return, mean_phi)
                    if rated_id is not None:
                        from .pool import update_rating

                        update_rating(self.pool.live, self.pool.get(rated_id), outcome, h.elo_k)
                    continue
                _, transitions = msg
                for t in transitions:
                    agent.replay.push(t)
                progress.env_steps += 1
                if (
                    progress.env_steps >= r.warmup_steps
                    and progress.env_steps % r.learn_every == 0
                    and len(agent.replay) >= r.batch_size
                ):
                    stats = agent.learn(agent.beta_at(progress.env_steps, h.total_steps))
                    progress.record_loss(stats.loss)
                    if stats.learn_steps % 50 == 0:
                        self._refresh_params()
                if progress.env_steps % h.snapshot_period == 0:
                    path = self.out / "checkpoints" / f"ckpt_{progress.env_steps:09d}.ckpt"
                    save_checkpoint(agent.online, path)
                    self.checkpoints.append(str(path))
                    self.pool.add_checkpoint(f"ckpt_{progress.env_steps:09d}", path)
                if h.eval_every > 0 and progress.env_steps % h.eval_every == 0:
                    win_rates = _eval_win_rates(cfg, agent, progress)
                    metrics.append(
                        progress.env_steps,
                        progress.episodes,
                        progress.mean_return(),
                        win_rates,
                        progress.loss_ema,
                        progress.mean_dca(),
                        time.monotonic() - start,
                    )
        finally:
            self.stop.set()
            while True:
                try:
                    self.queue.get_nowait()
                except queue.Empty:
                    break
            for w in workers:
                w.join(timeout=5.0)
