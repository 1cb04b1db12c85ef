"""Diverse negative sequential pattern selection with mixed explicit/implicit k-DPPs."""
from .core import Element, Pattern, SequenceDatabase, support
from .datagen import DataFactors, generate
from .miner import PatternCollection, mine_nsp, mine_psp
from .pipeline import ModelParams, SelectionContext
from .sampler import InfeasibleK, MixWeights, SelectionResult, select_subset

__all__ = [
    "DataFactors", "Element", "InfeasibleK", "MixWeights", "ModelParams", "Pattern",
    "PatternCollection", "SelectionContext", "SelectionResult", "SequenceDatabase",
    "generate", "mine_nsp", "mine_psp", "select_subset", "support",
]
