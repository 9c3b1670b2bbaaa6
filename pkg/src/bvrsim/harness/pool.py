"""Opponent pool with Elo ratings: permanent scripted baselines plus a
capped ring of learned snapshots, lowest-rated evicted first."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import RunConfig
from ..simcore import Outcome
from .baselines import BASELINE_NAMES, make_baseline

ELO_SCALE = 400.0
ELO_INITIAL = 1000.0

_SCORES = {Outcome.AGENT_WIN: 1.0, Outcome.AGENT_LOSS: 0.0, Outcome.DRAW: 0.5}


@dataclass
class PoolEntry:
    entry_id: str
    kind: str  # "baseline" | "checkpoint"
    rating: float = ELO_INITIAL
    games: int = 0
    path: str | None = None


def expected_score(rating_a: float, rating_b: float) -> float:
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / ELO_SCALE))


def update_rating(a: PoolEntry, b: PoolEntry, outcome_for_a: Outcome, k_factor: float) -> None:
    """Standard Elo exchange; the rating sum is conserved exactly."""
    score = _SCORES[outcome_for_a]
    expected = expected_score(a.rating, b.rating)
    delta = k_factor * (score - expected)
    a.rating += delta
    b.rating -= delta
    a.games += 1
    b.games += 1


class OpponentPool:
    """Sampling mix: latest self with probability mix_latest, a uniform
    learned snapshot with mix_pool (falling back to latest while none
    exist), a uniform baseline otherwise."""

    def __init__(self, cfg: RunConfig, capacity: int | None = None):
        self.cfg = cfg
        self.capacity = capacity if capacity is not None else cfg.harness.pool_capacity
        self.entries: dict[str, PoolEntry] = {}
        self.live = PoolEntry(entry_id="__live__", kind="live")
        names = [n.strip() for n in cfg.harness.baselines.split(",") if n.strip()]
        for name in names or list(BASELINE_NAMES):
            if name not in BASELINE_NAMES:
                raise ValueError(f"unknown baseline {name!r}")
            self.entries[name] = PoolEntry(entry_id=name, kind="baseline")

    def baselines(self) -> list[PoolEntry]:
        return [e for e in self.entries.values() if e.kind == "baseline"]

    def checkpoints(self) -> list[PoolEntry]:
        return [e for e in self.entries.values() if e.kind == "checkpoint"]

    def get(self, entry_id: str) -> PoolEntry:
        return self.entries[entry_id]

    def add_checkpoint(self, entry_id: str, path: str | Path) -> PoolEntry:
        entry = PoolEntry(entry_id=entry_id, kind="checkpoint", rating=self.live.rating, path=str(path))
        self.entries[entry_id] = entry
        learned = self.checkpoints()
        if len(learned) > self.capacity:
            worst = min(learned, key=lambda e: (e.rating, e.entry_id))
            del self.entries[worst.entry_id]
        return entry

    def sample(self, rng: np.random.Generator) -> tuple[str, PoolEntry | None]:
        """Returns ("latest", None) or ("pool"|"baseline", entry)."""
        h = self.cfg.harness
        u = rng.random()
        if u < h.mix_latest:
            return "latest", None
        if u < h.mix_latest + h.mix_pool:
            learned = self.checkpoints()
            if not learned:
                return "latest", None
            return "pool", learned[int(rng.integers(0, len(learned)))]
        baselines = self.baselines()
        return "baseline", baselines[int(rng.integers(0, len(baselines)))]

    def make_policy(self, entry: PoolEntry):
        from .baselines import NetPolicy

        if entry.kind == "baseline":
            return make_baseline(entry.entry_id, self.cfg)
        return NetPolicy.from_checkpoint(entry.path, self.cfg, name=entry.entry_id)

    def total_rating(self) -> float:
        return self.live.rating + sum(e.rating for e in self.entries.values())
