"""Multiple-instance learning in a bag dissimilarity space."""

__version__ = "0.1.0"

from .data import Bag, DatasetSummary, Label, MILDataset, dataset_summary, validate_dataset  # noqa: E402
from .space import DissimMatrix, FeatureTable, Measure, build_representation, compute_matrix  # noqa: E402

__all__ = [
    "Bag", "DatasetSummary", "DissimMatrix", "FeatureTable", "Label", "MILDataset", "Measure",
    "build_representation", "compute_matrix", "dataset_summary", "validate_dataset",
]
