"""Dataset readers, writers and the synthetic stream generator."""

from .arff import ArffDataset, load_arff, write_arff
from .common import DatasetHeader, MinMaxScaler
from .sparse import SparseDataset, load_sparse, write_sparse
from .synthetic import (
    ConceptTable,
    SyntheticSpec,
    SyntheticStream,
    generate_synthetic,
    parse_synthetic,
)

__all__ = [
    "ArffDataset",
    "ConceptTable",
    "DatasetHeader",
    "MinMaxScaler",
    "SparseDataset",
    "SyntheticSpec",
    "SyntheticStream",
    "generate_synthetic",
    "load_arff",
    "load_sparse",
    "parse_synthetic",
    "write_arff",
    "write_sparse",
]
