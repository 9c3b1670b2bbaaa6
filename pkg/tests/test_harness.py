import numpy as np
import pytest

from bvrsim.config import RunConfig
from bvrsim.harness import (
    NetPolicy,
    OpponentPool,
    eval_seeds,
    evaluate,
    make_baseline,
    run_episode,
    train,
    update_rating,
)
from bvrsim.harness.pool import ELO_INITIAL, PoolEntry
from bvrsim.rainbow.checkpoint import save_checkpoint
from bvrsim.rainbow.network import QNetwork
from bvrsim.simcore import Outcome


def quick_cfg(**kw) -> RunConfig:
    cfg = RunConfig()
    cfg.sim.t_max = kw.pop("t_max", 30.0)
    cfg.rainbow.hidden1 = 16
    cfg.rainbow.hidden2 = 16
    cfg.rainbow.atoms = 5
    cfg.rainbow.warmup_steps = 50
    cfg.rainbow.batch_size = 8
    cfg.rainbow.target_sync = 100
    cfg.harness.total_steps = kw.pop("total_steps", 300)
    cfg.harness.num_workers = kw.pop("num_workers", 1)
    cfg.harness.snapshot_period = kw.pop("snapshot_period", 150)
    cfg.harness.eval_every = 0
    cfg.harness.eval_matches = 0
    cfg.harness.log_episodes = kw.pop("log_episodes", False)
    for key, value in kw.items():
        raise TypeError(f"unused override {key}={value}")
    return cfg


class TestRunEpisode:
    def test_passive_pair_draws_with_no_launches(self):
        cfg = quick_cfg(t_max=25.0)
        res = run_episode(cfg, make_baseline("cap", cfg), make_baseline("cap", cfg), seed=6, record=True)
        assert res.outcome == Outcome.DRAW
        assert res.ticks == 25
        header_and_ticks = res.log.text().strip().splitlines()
        assert len(header_and_ticks) == 26
        assert all('"missiles":[]' in line for line in header_and_ticks[1:])

    def test_fixed_seed_identical_log_hash(self):
        cfg = quick_cfg(t_max=20.0)
        a = run_episode(cfg, make_baseline("commit", cfg), make_baseline("straight", cfg), seed=12, record=True)
        b = run_episode(cfg, make_baseline("commit", cfg), make_baseline("straight", cfg), seed=12, record=True)
        assert a.log.text() == b.log.text()

    def test_aggressor_beats_unarmed_straight_flier(self):
        cfg = RunConfig()  # full-length episode, pinned scripted matchup
        res = run_episode(cfg, make_baseline("commit", cfg), make_baseline("straight", cfg), seed=3)
        assert res.outcome == Outcome.AGENT_WIN
        assert res.ticks < cfg.sim.t_max

    def test_unarmed_flier_cannot_win(self):
        cfg = quick_cfg(t_max=40.0)
        res = run_episode(cfg, make_baseline("cap", cfg), make_baseline("straight", cfg), seed=8)
        assert res.outcome in (Outcome.DRAW, Outcome.AGENT_WIN)


class TestElo:
    def test_equal_ratings_draw_unchanged(self):
        a, b = PoolEntry("a", "checkpoint"), PoolEntry("b", "checkpoint")
        update_rating(a, b, Outcome.DRAW, 32.0)
        assert a.rating == pytest.approx(ELO_INITIAL)
        assert b.rating == pytest.approx(ELO_INITIAL)

    def test_equal_ratings_win_moves_sixteen(self):
        a, b = PoolEntry("a", "checkpoint"), PoolEntry("b", "checkpoint")
        update_rating(a, b, Outcome.AGENT_WIN, 32.0)
        assert a.rating == pytest.approx(ELO_INITIAL + 16.0)
        assert b.rating == pytest.approx(ELO_INITIAL - 16.0)

    def test_rating_sum_conserved_over_random_matches(self):
        rng = np.random.default_rng(5)
        entries = [PoolEntry(str(i), "checkpoint", rating=float(rng.uniform(800, 1200))) for i in range(6)]
        total = sum(e.rating for e in entries)
        outcomes = (Outcome.AGENT_WIN, Outcome.AGENT_LOSS, Outcome.DRAW)
        for _ in range(500):
            i, j = rng.choice(6, size=2, replace=False)
            update_rating(entries[i], entries[j], outcomes[int(rng.integers(0, 3))], 24.0)
        assert sum(e.rating for e in entries) == pytest.approx(total, abs=1e-9)


class TestPool:
    def test_baselines_always_present(self):
        pool = OpponentPool(quick_cfg())
        assert {e.entry_id for e in pool.baselines()} == {"straight", "cap", "commit"}

    def test_capacity_evicts_lowest_rated(self):
        cfg = quick_cfg()
        pool = OpponentPool(cfg, capacity=2)
        pool.add_checkpoint("c1", "/tmp/c1.ckpt")
        pool.get("c1").rating = 900.0
        pool.add_checkpoint("c2", "/tmp/c2.ckpt")
        pool.get("c2").rating = 1100.0
        pool.add_checkpoint("c3", "/tmp/c3.ckpt")
        ids = {e.entry_id for e in pool.checkpoints()}
        assert ids == {"c2", "c3"}

    def test_mix_all_latest(self):
        cfg = quick_cfg()
        cfg.harness.mix_latest, cfg.harness.mix_pool, cfg.harness.mix_baseline = 1.0, 0.0, 0.0
        pool = OpponentPool(cfg)
        rng = np.random.default_rng(0)
        assert all(pool.sample(rng)[0] == "latest" for _ in range(50))

    def test_mix_all_baseline_single(self):
        cfg = quick_cfg()
        cfg.harness.mix_latest, cfg.harness.mix_pool, cfg.harness.mix_baseline = 0.0, 0.0, 1.0
        cfg.harness.baselines = "straight"
        pool = OpponentPool(cfg)
        rng = np.random.default_rng(0)
        for _ in range(50):
            kind, entry = pool.sample(rng)
            assert kind == "baseline" and entry.entry_id == "straight"

    def test_empirical_mix_frequencies(self):
        cfg = quick_cfg()
        cfg.harness.mix_latest, cfg.harness.mix_pool, cfg.harness.mix_baseline = 0.5, 0.3, 0.2
        pool = OpponentPool(cfg)
        pool.add_checkpoint("c1", "/tmp/x.ckpt")
        rng = np.random.default_rng(42)
        n = 100_000
        counts = {"latest": 0, "pool": 0, "baseline": 0}
        for _ in range(n):
            counts[pool.sample(rng)[0]] += 1
        assert counts["latest"] / n == pytest.approx(0.5, abs=0.01)
        assert counts["pool"] / n == pytest.approx(0.3, abs=0.01)
        assert counts["baseline"] / n == pytest.approx(0.2, abs=0.01)


class TestEvaluate:
    def test_deterministic_table(self, tmp_path):
        cfg = quick_cfg(t_max=15.0)
        net = QNetwork(cfg.rainbow, seed=3)
        policy = NetPolicy(net, cfg, name="net")
        opponents = [("cap", make_baseline("cap", cfg))]
        seeds = eval_seeds(50, 6)
        r1 = evaluate(cfg, policy, opponents, 6, seeds)
        r2 = evaluate(cfg, policy, opponents, 6, seeds)
        assert r1 == r2

    def test_zero_matches_empty_counts(self):
        cfg = quick_cfg(t_max=10.0)
        rows = evaluate(cfg, make_baseline("cap", cfg), [("cap", make_baseline("cap", cfg))], 0, [1])
        assert rows[0].matches == 0

    def test_mirrored_self_play_is_symmetric(self):
        cfg = quick_cfg(t_max=60.0)
        commit = make_baseline("commit", cfg)
        rows = evaluate(cfg, commit, [("self", make_baseline("commit", cfg))], 12, eval_seeds(300, 6), mirror=True)
        assert rows[0].wins == rows[0].losses  # exact: deterministic mirrored pairs


class TestTrainLoop:
    def test_smoke_single_worker_with_logs(self, tmp_path):
        cfg = quick_cfg(total_steps=250, log_episodes=True, t_max=20.0)
        res = train(cfg, tmp_path / "run")
        assert res.env_steps == 250
        assert not res.aborted
        assert (tmp_path / "run" / "metrics.csv").is_file()
        logs = list((tmp_path / "run" / "episodes").glob("*.jsonl"))
        assert logs

    def test_metrics_steps_monotone(self, tmp_path):
        cfg = quick_cfg(total_steps=400, t_max=20.0)
        cfg.harness.eval_every = 100
        cfg.harness.eval_matches = 2
        train(cfg, tmp_path / "run")
        import csv

        with open(tmp_path / "run" / "metrics.csv") as fh:
            rows = list(csv.DictReader(fh))
        steps = [int(r["step"]) for r in rows]
        assert steps == sorted(steps)
        assert all(int(r["episodes"]) >= 0 for r in rows)

    def test_resume_continues_counter(self, tmp_path):
        cfg = quick_cfg(total_steps=200, t_max=20.0)
        res1 = train(cfg, tmp_path / "run")
        cfg.harness.total_steps = 300
        res2 = train(cfg, tmp_path / "run", resume=True)
        assert res2.env_steps == 300

    def test_plain_dqn_smoke(self, tmp_path):
        cfg = quick_cfg(total_steps=300, t_max=20.0)
        cfg.rainbow.use_double = False
        cfg.rainbow.use_dueling = False
        cfg.rainbow.use_noisy = False
        cfg.rainbow.use_distributional = False
        cfg.rainbow.use_per = False
        cfg.rainbow.n_step = 1
        res = train(cfg, tmp_path / "run")
        assert res.env_steps == 300
        assert not res.aborted

    def test_multiworker_smoke(self, tmp_path):
        cfg = quick_cfg(total_steps=300, num_workers=2, t_max=20.0)
        res = train(cfg, tmp_path / "run")
        assert res.env_steps >= 300
        assert not res.aborted

    def test_single_worker_training_is_reproducible(self, tmp_path):
        cfg = quick_cfg(total_steps=200, t_max=20.0, log_episodes=True)
        r1 = train(cfg, tmp_path / "a")
        r2 = train(cfg, tmp_path / "b")
        ck1 = (tmp_path / "a" / "checkpoints" / "ckpt_final.ckpt").read_bytes()
        ck2 = (tmp_path / "b" / "checkpoints" / "ckpt_final.ckpt").read_bytes()
        assert ck1 == ck2
        logs_a = sorted((tmp_path / "a" / "episodes").glob("*.jsonl"))
        logs_b = sorted((tmp_path / "b" / "episodes").glob("*.jsonl"))
        assert [p.name for p in logs_a] == [p.name for p in logs_b] and logs_a
        for pa, pb in zip(logs_a, logs_b):
            assert pa.read_bytes() == pb.read_bytes()
