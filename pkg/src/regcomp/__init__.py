"""Regenerative composition structures: exact decrement matrices, composition and
partition probabilities, samplers and block-count statistics."""

from .combinat import Composition, DistributionTable, Partition
from .decrement import DecrementMatrix, cpf, cpf_table, ppf, ppf_table
from .families import build_decrement, build_model, parse_family

__all__ = [
    "Composition",
    "Partition",
    "DistributionTable",
    "DecrementMatrix",
    "cpf",
    "cpf_table",
    "ppf",
    "ppf_table",
    "build_decrement",
    "build_model",
    "parse_family",
]
__version__ = "0.1.0"
