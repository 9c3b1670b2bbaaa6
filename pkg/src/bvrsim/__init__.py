"""BVR air-combat sandbox with a self-play distributional Q-learning agent."""

__version__ = "0.1.0"
