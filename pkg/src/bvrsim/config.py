"""Run configuration: typed parameter blocks plus INI-style file loading.

One section per subsystem; every default is overridable from the config
file and, through the CLI, from flags. Unknown sections or keys are
rejected so typos fail loudly.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

G0 = 9.80665  # standard gravity, m/s^2


class ConfigError(ValueError):
    """Raised for malformed config files or unknown keys."""


@dataclass
class SimParams:
    """Physics, sensor and weapon constants for the engagement sandbox."""

    dt_physics: float = 0.1          # s
    v_min: float = 100.0             # m/s
    v_max: float = 450.0             # m/s
    n_max_g: float = 9.0             # sustained turn load factor
    a_max: float = 10.0              # m/s^2 longitudinal
    climb_max: float = 100.0         # m/s vertical rate
    alt_min: float = 1000.0          # m
    alt_max: float = 15000.0         # m
    fuel_initial: float = 3000.0     # kg
    fuel_burn_base: float = 1.0      # kg/s
    fuel_burn_per_speed: float = 0.002  # kg/s per m/s
    radar_range: float = 80000.0     # m
    gimbal_limit_deg: float = 60.0
    rwr_range: float = 20000.0       # m
    track_timeout: float = 5.0       # s
    missile_speed_boost: float = 1000.0  # m/s at launch
    missile_speed_decay: float = 20.0    # m/s^2 after boost
    missile_speed_floor: float = 500.0   # m/s
    missile_nav_gain: float = 4.0
    missile_g_max: float = 30.0
    pitbull_range: float = 15000.0   # m, seeker goes active
    kill_radius: float = 100.0       # m
    missile_max_tof: float = 100.0   # s
    initial_missiles: int = 4
    t_max: float = 900.0             # s, episode truncation

    @property
    def gimbal_limit(self) -> float:
        return math.radians(self.gimbal_limit_deg)


@dataclass
class TacticParams:
    """Geometry knobs for the six maneuver controllers."""

    cap_radius: float = 10000.0       # m
    cap_speed: float = 250.0          # m/s
    abort_descend_to: float = 2000.0  # m of altitude shed when aborting
    break_g: float = 9.0
    support_offset_deg: float = 50.0  # radar-nose offset held while supporting
    fire_max_range: float = 40000.0   # m

    @property
    def support_offset(self) -> float:
        return math.radians(self.support_offset_deg)


@dataclass
class RewardConfig:
    """Weights for the mission-success potential used as the reward base."""

    w_surv: float = 0.3
    w_cap: float = 0.3
    w_wpn: float = 0.15
    w_fuel: float = 0.1
    w_threat: float = 0.15
    station_sigma: float = 10000.0   # m
    defended_radius: float = 30000.0  # m around the station
    terminal_win: float = 1.0
    terminal_loss: float = -1.0

    def validate(self) -> None:
        total = self.w_surv + self.w_cap + self.w_wpn + self.w_fuel + self.w_threat
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"reward weights must sum to 1, got {total!r}")


@dataclass
class MdpConfig:
    """Episode setup and observation normalization constants."""

    arena_half_extent: float = 50000.0   # m, position normalization
    obs_distance_norm: float = 100000.0  # m, relative-distance normalization
    station_offset: float = 25000.0      # m, stations at +/- this on the x axis
    spawn_distance_min: float = 70000.0  # m
    spawn_distance_max: float = 90000.0  # m
    spawn_bearing_spread_deg: float = 30.0
    spawn_alt_min: float = 8000.0        # m
    spawn_alt_max: float = 10000.0       # m
    spawn_speed: float = 250.0           # m/s
    decision_substeps: int = 10          # physics steps per decision tick


@dataclass
class RainbowConfig:
    """Learner hyperparameters and per-component ablation switches."""

    atoms: int = 51
    v_min: float = -3.0
    v_max: float = 3.0
    gamma: float = 0.99
    n_step: int = 3
    buffer_capacity: int = 100000
    batch_size: int = 32
    learn_every: int = 4
    warmup_steps: int = 2000
    target_sync: int = 2000
    per_alpha: float = 0.5
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    per_epsilon: float = 1e-3
    hidden1: int = 256
    hidden2: int = 256
    sigma0: float = 0.5
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    epsilon_greedy: float = 0.05   # used only when noisy layers are disabled
    # component switches (all on = full Rainbow)
    use_double: bool = True
    use_dueling: bool = True
    use_noisy: bool = True
    use_distributional: bool = True
    use_per: bool = True
    float64: bool = False

    @property
    def hidden_sizes(self) -> tuple[int, int]:
        return (self.hidden1, self.hidden2)


@dataclass
class HarnessConfig:
    """Self-play training loop settings."""

    total_steps: int = 200000
    snapshot_period: int = 10000
    mix_latest: float = 0.5
    mix_pool: float = 0.3
    mix_baseline: float = 0.2
    pool_capacity: int = 20
    elo_k: float = 32.0
    eval_every: int = 25000
    eval_matches: int = 10
    num_workers: int = 4
    queue_capacity: int = 256
    seed: int = 1
    log_episodes: bool = True  # single-worker mode writes one JSONL per episode
    baselines: str = "straight,cap,commit"  # comma list of pool baselines
    alternate_sides: bool = True  # train defender and attacker seats alternately

    def validate(self) -> None:
        total = self.mix_latest + self.mix_pool + self.mix_baseline
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"opponent mix fractions must sum to 1, got {total!r}")


@dataclass
class ServiceConfig:
    """Live match server settings."""

    port: int = 8731
    tick_hz: float = 1.0
    compression: float = 1.0       # real-time speed-up factor (1x, 2x, 4x)
    client_timeout_s: float = 30.0
    ping_interval_s: float = 10.0
    checkpoint_dir: str = "checkpoints"
    static_dir: str = ""
    replay_dir: str = "replays"


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, one block per subsystem."""

    sim: SimParams = field(default_factory=SimParams)
    tactics: TacticParams = field(default_factory=TacticParams)
    reward: RewardConfig = field(default_factory=RewardConfig)
    mdp: MdpConfig = field(default_factory=MdpConfig)
    rainbow: RainbowConfig = field(default_factory=RainbowConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def validate(self) -> None:
        self.reward.validate()
        self.harness.validate()


_SECTIONS = {
    "simcore": "sim",
    "tactics": "tactics",
    "reward": "reward",
    "mdp": "mdp",
    "rainbow": "rainbow",
    "harness": "harness",
    "service": "service",
}


def _coerce(raw: str, kind: type) -> object:
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def load_config(path: str | Path) -> RunConfig:
    """Load a RunConfig from an INI file, applying defaults for absent keys."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return config_from_parser(parser)


def loads_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> RunConfig:
    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        block = getattr(cfg, _SECTIONS[section])
        fields = {f.name: f for f in dataclasses.fields(block)}
        for key, raw in parser.items(section):
            if key not in fields:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            current = getattr(block, key)
            setattr(block, key, _coerce(raw, type(current)))
    cfg.validate()
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Render a RunConfig as canonical INI text (stable key order)."""
    lines: list[str] = []
    for section, attr in _SECTIONS.items():
        block = getattr(cfg, attr)
        lines.append(f"[{section}]")
        for f in dataclasses.fields(block):
            lines.append(f"{f.name} = {getattr(block, f.name)}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    """Content hash of the canonical config text."""
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()


def episode_config_hash(cfg: RunConfig) -> str:
    """Hash of the sections that determine episode dynamics.

    Service/learner/harness settings do not change what a (seed, action
    stream) pair simulates to, so episode logs are stamped with this
    narrower identity and stay verifiable across serving setups.
    """
    lines: list[str] = []
    for section in ("simcore", "tactics", "reward", "mdp"):
        block = getattr(cfg, _SECTIONS[section])
        lines.append(f"[{section}]")
        for f in dataclasses.fields(block):
            lines.append(f"{f.name} = {getattr(block, f.name)}")
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
