"""Offline trainer for smlrt surrogate models."""

from . import errors
from .dataset import Dataset, load_dataset
from .export import export_model
from .mlp import TrainableMLP, init_mlp
from .search import ArchSpace, sample_arch, sample_hypers, search
from .srdb_reader import read_manifest, read_region, region_info
from .train import Arch, HyperParams, TrialResult, train

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Dataset",
    "load_dataset",
    "export_model",
    "TrainableMLP",
    "init_mlp",
    "ArchSpace",
    "sample_arch",
    "sample_hypers",
    "search",
    "read_manifest",
    "read_region",
    "region_info",
    "Arch",
    "HyperParams",
    "TrialResult",
    "train",
    "__version__",
]
