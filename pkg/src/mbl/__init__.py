"""Mistake-bound online learning with bandit feedback: games, strategies, exact values and bound checks."""
from .engine import Protocol, Transcript, run_game
from .families import (
    FunctionFamily, LinearFamily, PermutationFamily, ThresholdFamily,
    build_avoiding_family, build_linear_family, build_permutation_family, build_threshold_family,
)

__all__ = [
    "Protocol", "Transcript", "run_game",
    "FunctionFamily", "LinearFamily", "PermutationFamily", "ThresholdFamily",
    "build_avoiding_family", "build_linear_family", "build_permutation_family",
    "build_threshold_family",
]
