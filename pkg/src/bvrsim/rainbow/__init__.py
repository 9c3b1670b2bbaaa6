from .agent import LearnerFault, LearnStats, RainbowAgent
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .network import Adam, DenseLayer, NoisyLayer, QNetwork
from .projection import project_distribution, project_target
from .replay import NStepAccumulator, PrioritizedReplay, SumTree, Transition, accumulate_nstep

__all__ = [
    "Adam",
    "CheckpointError",
    "DenseLayer",
    "LearnStats",
    "LearnerFault",
    "NStepAccumulator",
    "NoisyLayer",
    "PrioritizedReplay",
    "QNetwork",
    "RainbowAgent",
    "SumTree",
    "Transition",
    "accumulate_nstep",
    "load_checkpoint",
    "project_distribution",
    "project_target",
    "save_checkpoint",
]
