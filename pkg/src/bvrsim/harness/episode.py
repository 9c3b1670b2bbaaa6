"""Single-episode runner shared by evaluation, tournaments and tests."""
from __future__ import annotations

from dataclasses import dataclass

from ..config import RunConfig
from ..mdp import BvrEnv
from ..replaylog import EpisodeLog
from ..simcore import Outcome, check_termination
from ..vec import distance


@dataclass
class EpisodeResult:
    outcome: Outcome
    outcome_b: Outcome  # from side b's perspective (mutual kills lose for both)
    return_a: float
    return_b: float
    dca_trace: list[float]
    dca_trace_b: list[float]
    ticks: int
    log: EpisodeLog | None
    # behavior summary for side a: tactic usage and engagement geometry
    action_counts: list[int] | None = None
    min_range: float = float("inf")
    launches: int = 0
    first_launch_range: float | None = None


def run_episode(cfg: RunConfig, policy_a, policy_b, seed: int, record: bool = False) -> EpisodeResult:
    """Play one full engagement, side a as the defender (agent side).

    Both policies go through the identical interface; the outcome and the
    summed reward are reported from side a's perspective.
    """
    env = BvrEnv(cfg)
    loadout = {}
    for side, policy in ((BvrEnv.AGENT_ID, policy_a), (BvrEnv.OPPONENT_ID, policy_b)):
        override = getattr(policy, "spawn_missiles", None)
        if override is not None:
            loadout[side] = override

    env.reset(seed, opponent=policy_b, loadout=loadout or None)
    if hasattr(policy_a, "reset"):
        policy_a.reset(seed, BvrEnv.AGENT_ID)

    log = None
    if record:
        sides = {"0": getattr(policy_a, "name", "a"), "1": getattr(policy_b, "name", "b")}
        log = EpisodeLog(cfg, seed, loadout or None, sides)

    total = 0.0
    total_b = 0.0
    dca_trace: list[float] = []
    dca_trace_b: list[float] = []
    ticks = 0
    action_counts = [0] * 6
    min_range = float("inf")
    launches_before = 0
    first_launch_range: float | None = None
    while not env.done:
        world = env.world
        rng_now = _pair_range(world)
        min_range = min(min_range, rng_now)
        action = policy_a.act(world, BvrEnv.AGENT_ID)
        step = env.step(action)
        acted = step.actions.get(BvrEnv.AGENT_ID)
        if acted is not None:
            action_counts[acted] += 1
        launched = env.world.launches.get(BvrEnv.AGENT_ID, 0)
        if launched > launches_before and first_launch_range is None:
            first_launch_range = rng_now
        launches_before = launched
        total += step.reward
        total_b += step.reward_opponent
        dca_trace.append(step.phi)
        dca_trace_b.append(step.phi_opponent)
        ticks += 1
        if log is not None:
            log.append_tick(env.world, step)
    return EpisodeResult(
        outcome=env.outcome,
        outcome_b=check_termination(env.world, BvrEnv.OPPONENT_ID),
        return_a=total,
        return_b=total_b,
        dca_trace=dca_trace,
        dca_trace_b=dca_trace_b,
        ticks=ticks,
        log=log,
        action_counts=action_counts,
        min_range=min_range,
        launches=launches_before,
        first_launch_range=first_launch_range,
    )


def _pair_range(world) -> float:
    a, b = world.aircraft[0], world.aircraft[1]
    if not (a.alive and b.alive):
        return float("inf")
    return distance(a.position, b.position)
