"""Deterministic evaluation tournaments over fixed seed lists."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..config import RunConfig
from ..simcore import Outcome
from .episode import run_episode


@dataclass
class EvalRow:
    opponent: str
    wins: int
    losses: int
    draws: int
    mean_return: float
    mean_dca: float
    # behavior summary (candidate side): tactic usage and engagement geometry
    action_freqs: list[float] | None = None
    mean_launches: float = 0.0
    mean_min_range: float = 0.0
    mean_first_launch_range: float | None = None

    @property
    def matches(self) -> int:
        return self.wins + self.losses + self.draws

    @property
    def win_rate(self) -> float:
        return self.wins / self.matches if self.matches else 0.0

    @property
    def score(self) -> float:
        """Elo-style score: wins plus half of draws, per match."""
        return (self.wins + 0.5 * self.draws) / self.matches if self.matches else 0.0


def eval_seeds(base_seed: int, n: int) -> list[int]:
    return [base_seed + i for i in range(n)]


def evaluate(
    cfg: RunConfig,
    candidate,
    opponents: list[tuple[str, object]],
    n_matches: int,
    seeds: list[int],
    mirror: bool = False,
) -> list[EvalRow]:
    """Pure evaluation: zero-noise policies, fixed seeds, no state mutated.

    With mirror=True consecutive matches reuse one seed with the sides
    swapped, so a policy playing itself scores wins and losses equally.
    """
    rows: list[EvalRow] = []
    for name, opponent in opponents:
        wins = losses = draws = 0
        total_return = 0.0
        total_dca = 0.0
        action_totals = [0] * 6
        total_launches = 0
        min_ranges: list[float] = []
        first_launch_ranges: list[float] = []
        for i in range(n_matches):
            if mirror:
                seed = seeds[(i // 2) % len(seeds)]
                swapped = i % 2 == 1
            else:
                seed = seeds[i % len(seeds)]
                swapped = False
            if swapped:
                result = run_episode(cfg, opponent, candidate, seed)
                outcome = result.outcome_b
                candidate_return = result.return_b
                candidate_dca = result.dca_trace_b
            else:
                result = run_episode(cfg, candidate, opponent, seed)
                outcome = result.outcome
                candidate_return = result.return_a
                candidate_dca = result.dca_trace
            if outcome == Outcome.AGENT_WIN:
                wins += 1
            elif outcome == Outcome.AGENT_LOSS:
                losses += 1
            else:
                draws += 1
            total_return += candidate_return
            if candidate_dca:
                total_dca += sum(candidate_dca) / len(candidate_dca)
            if not swapped and result.action_counts is not None:
                for a in range(6):
                    action_totals[a] += result.action_counts[a]
                total_launches += result.launches
                if result.min_range != float("inf"):
                    min_ranges.append(result.min_range)
                if result.first_launch_range is not None:
                    first_launch_ranges.append(result.first_launch_range)
        n = max(1, n_matches)
        acted = sum(action_totals)
        rows.append(
            EvalRow(
                opponent=name,
                wins=wins,
                losses=losses,
                draws=draws,
                mean_return=total_return / n,
                mean_dca=total_dca / n,
                action_freqs=[c / acted for c in action_totals] if acted else None,
                mean_launches=total_launches / n,
                mean_min_range=sum(min_ranges) / len(min_ranges) if min_ranges else 0.0,
                mean_first_launch_range=(
                    sum(first_launch_ranges) / len(first_launch_ranges) if first_launch_ranges else None
                ),
            )
        )
    return rows


def write_eval_table(rows: list[EvalRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["opponent", "wins", "losses", "draws", "mean_return", "mean_dca"])
        for r in rows:
            writer.writerow([r.opponent, r.wins, r.losses, r.draws, f"{r.mean_return:.6f}", f"{r.mean_dca:.6f}"])


def table_text(rows: list[EvalRow]) -> str:
    lines = ["opponent      win  loss  draw  win_rate  mean_return  mean_dca"]
    for r in rows:
        lines.append(
            f"{r.opponent:<12} {r.wins:>4} {r.losses:>5} {r.draws:>5}  {r.win_rate:>7.1%}  {r.mean_return:>11.4f}  {r.mean_dca:>8.4f}"
        )
    return "\n".join(lines)
