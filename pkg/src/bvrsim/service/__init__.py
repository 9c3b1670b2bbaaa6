from .app import CheckpointRegistry, create_app
from .session import MatchSession, Phase, filter_state

__all__ = ["CheckpointRegistry", "MatchSession", "Phase", "create_app", "filter_state"]
