import json
import subprocess
import sys
from pathlib import Path

import pytest

from bvrsim import __version__
from bvrsim.cli import main
from bvrsim.config import RunConfig, dump_config
from bvrsim.harness import make_baseline, run_episode
from bvrsim.rainbow.checkpoint import save_checkpoint
from bvrsim.rainbow.network import QNetwork


def small_config_text() -> str:
    cfg = RunConfig()
    cfg.sim.t_max = 20.0
    cfg.rainbow.hidden1 = 16
    cfg.rainbow.hidden2 = 16
    cfg.rainbow.atoms = 5
    cfg.rainbow.warmup_steps = 40
    cfg.rainbow.batch_size = 8
    cfg.harness.total_steps = 100
    cfg.harness.num_workers = 1
    cfg.harness.snapshot_period = 50
    cfg.harness.eval_every = 0
    cfg.harness.eval_matches = 0
    cfg.harness.log_episodes = True
    return dump_config(cfg)


class TestBasics:
    def test_version_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--does-not-exist"])
        assert exc.value.code == 2

    def test_missing_required_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["train"])  # --out is required
        assert exc.value.code == 2

    def test_config_parse_error_exits_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.config"
        bad.write_text("[simcore]\nnot a key value pair\n")
        rc = main(["replay", "--config", str(bad), "--log", "x.jsonl"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_config_key_exits_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.config"
        bad.write_text("[simcore]\nwarp_drive = 9\n")
        rc = main(["replay", "--config", str(bad), "--log", "x.jsonl"])
        assert rc == 2

    def test_module_invocation(self):
        out = subprocess.run(
            [sys.executable, "-m", "bvrsim.cli", "--version"], capture_output=True, text=True
        )
        assert out.returncode == 0
        assert __version__ in out.stdout


class TestTrainCommand:
    def test_tiny_train_writes_artifacts_and_manifest(self, tmp_path, capsys):
        cfg_path = tmp_path / "run.config"
        cfg_path.write_text(small_config_text())
        out_dir = tmp_path / "out"
        rc = main(["train", "--config", str(cfg_path), "--out", str(out_dir)])
        assert rc == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["seeds"] == [1]
        assert (out_dir / "metrics.csv").is_file()
        assert (out_dir / "checkpoints" / "ckpt_final.ckpt").is_file()
        episodes = sorted((out_dir / "episodes").glob("*.jsonl"))
        assert episodes
        # every training episode log re-simulates, both learner seats
        for ep in episodes:
            rc = main(["replay", "--config", str(cfg_path), "--log", str(ep), "--verify"])
            assert rc == 0, ep

    def test_zero_steps_emits_only_initial_checkpoint(self, tmp_path):
        cfg_path = tmp_path / "run.config"
        text = small_config_text().replace("total_steps = 100", "total_steps = 0")
        cfg_path.write_text(text)
        out_dir = tmp_path / "out"
        rc = main(["train", "--config", str(cfg_path), "--out", str(out_dir)])
        assert rc == 0
        ckpts = sorted(p.name for p in (out_dir / "checkpoints").glob("*.ckpt"))
        assert ckpts == ["ckpt_final.ckpt", "ckpt_initial.ckpt"]


class TestEvalCommand:
    def test_eval_table_and_csv(self, tmp_path, capsys):
        cfg = RunConfig()
        cfg.rainbow.hidden1 = 16
        cfg.rainbow.hidden2 = 16
        ckpt = tmp_path / "net.ckpt"
        save_checkpoint(QNetwork(cfg.rainbow, seed=5), ckpt)
        cfg_path = tmp_path / "run.config"
        cfg2 = RunConfig()
        cfg2.sim.t_max = 10.0
        cfg_path.write_text(dump_config(cfg2))
        out_dir = tmp_path / "evalout"
        rc = main(
            [
                "eval", "--config", str(cfg_path), "--checkpoint", str(ckpt),
                "--opponents", "cap", "--matches", "4", "--seed", "100",
                "--out", str(out_dir),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "cap" in out
        assert (out_dir / "eval.csv").is_file()
        assert (out_dir / "manifest.json").is_file()

    def test_missing_checkpoint_exits_one(self, tmp_path, capsys):
        rc = main(["eval", "--checkpoint", str(tmp_path / "ghost.ckpt"), "--matches", "1"])
        assert rc == 1


class TestReplayCommand:
    def test_verify_round_trip(self, tmp_path, capsys):
        cfg = RunConfig()
        cfg.sim.t_max = 15.0
        result = run_episode(cfg, make_baseline("commit", cfg), make_baseline("straight", cfg), seed=9, record=True)
        log_path = tmp_path / "ep.jsonl"
        result.log.write(log_path)
        cfg_path = tmp_path / "run.config"
        cfg_path.write_text(dump_config(cfg))
        rc = main(["replay", "--config", str(cfg_path), "--log", str(log_path), "--verify"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "OK" in out and "bit-identical" in out

    def test_summary_without_verify(self, tmp_path, capsys):
        cfg = RunConfig()
        cfg.sim.t_max = 5.0
        result = run_episode(cfg, make_baseline("cap", cfg), make_baseline("cap", cfg), seed=2, record=True)
        log_path = tmp_path / "ep.jsonl"
        result.log.write(log_path)
        cfg_path = tmp_path / "run.config"
        cfg_path.write_text(dump_config(cfg))
        rc = main(["replay", "--config", str(cfg_path), "--log", str(log_path)])
        assert rc == 0
        assert "seed 2" in capsys.readouterr().out

    def test_malformed_log_reports_line(self, tmp_path, capsys):
        log_path = tmp_path / "bad.jsonl"
        log_path.write_text('{"type":"header","v":1,"seed":1,"sides":{},"loadout":{}}\nnot json\n')
        rc = main(["replay", "--log", str(log_path), "--verify"])
        assert rc == 1
        assert "line 2" in capsys.readouterr().err

    def test_missing_log_file(self, capsys):
        rc = main(["replay", "--log", "/nonexistent/ep.jsonl"])
        assert rc == 1
