"""Python access to the fcmdnn core.

Datasets travel as ``Dataset`` tuples of (pixels, labels, side, ids) where
``pixels`` is an n x side*side float array.  Structured results come back as
plain dicts.
"""

import json
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _core
from ._core import FcmdnnError, confusion, roc_auc, run_fcm

__all__ = [
    "Dataset",
    "FcmdnnError",
    "confusion",
    "default_config",
    "gen_synthetic",
    "load_dataset",
    "make_fold_plan",
    "metrics",
    "preprocess",
    "roc_auc",
    "run_experiment",
    "run_fcm",
    "write_dataset",
]


class Dataset(NamedTuple):
    pixels: np.ndarray
    labels: list
    side: int
    ids: list


def gen_synthetic(healthy: int, sick: int, side: int, seed: int) -> Dataset:
    return Dataset(*_core.gen_synthetic(healthy, sick, side, seed))


def load_dataset(root) -> Dataset:
    return Dataset(*_core.load_dataset(str(root)))


def write_dataset(data: Dataset, root) -> None:
    _core.write_dataset(data.pixels, list(data.labels), data.side, str(root))


def preprocess(data: Dataset, target_side: int = 100, normalization: str = "scale_by_255") -> np.ndarray:
    return _core.preprocess(data.pixels, list(data.labels), data.side, target_side, normalization)


def make_fold_plan(n: int, k: int, seed: int, stratify_labels: Optional[Sequence[int]] = None) -> dict:
    labels = None if stratify_labels is None else list(stratify_labels)
    return json.loads(_core.make_fold_plan(n, k, seed, labels))


def metrics(tp: int, fp: int, tn: int, fn: int) -> dict:
    return json.loads(_core.metrics(tp, fp, tn, fn))


def default_config(model: str) -> dict:
    return json.loads(_core.default_config(model))


def run_experiment(data: Dataset, model: str, config: Optional[dict] = None, seed: Optional[int] = None) -> dict:
    """Cross-validate ``model`` ("nn", "dnn" or "fcm-dnn") and return the run report."""
    overlay = "" if config is None else json.dumps(config)
    return json.loads(_core.run_experiment(data.pixels, list(data.labels), data.side, model, overlay, seed))
