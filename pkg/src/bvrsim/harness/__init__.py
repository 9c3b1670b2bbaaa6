from .baselines import BASELINE_NAMES, AggressiveCommit, NetPolicy, PureCap, StraightFlier, make_baseline
from .episode import EpisodeResult, run_episode
from .evaluate import EvalRow, eval_seeds, evaluate, table_text, write_eval_table
from .pool import ELO_INITIAL, OpponentPool, PoolEntry, expected_score, update_rating
from .train import MetricsWriter, TrainingAborted, TrainResult, train

__all__ = [
    "AggressiveCommit",
    "BASELINE_NAMES",
    "ELO_INITIAL",
    "EpisodeResult",
    "EvalRow",
    "MetricsWriter",
    "NetPolicy",
    "OpponentPool",
    "PoolEntry",
    "PureCap",
    "StraightFlier",
    "TrainResult",
    "TrainingAborted",
    "eval_seeds",
    "evaluate",
    "expected_score",
    "make_baseline",
    "run_episode",
    "table_text",
    "train",
    "update_rating",
    "write_eval_table",
]
