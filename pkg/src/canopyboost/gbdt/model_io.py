"""JSON model files.

Format (``format_version`` 1)::

    {
      "format_version": 1,
      "loss": "WeightedRmse" | "WeightedMultiClass",
      "n_features": M,
      "learning_rate": nu,
      "base_score": float | [float, ...],
      "quantization": null | {"origin": m, "bin_width": m, "n_classes": T},
      "trees": [{"splits": [[feature, threshold], ...],
                 "leaves": [float, ...] | [[float, ...], ...]}, ...]
    }

Leaf ``j`` of a depth-``d`` tree is reached when the bits of ``j`` (most
significant first) equal the outcomes ``x[feature] > threshold`` of the levels
in order. Floats are written with ``repr`` precision, so a reloaded model
reproduces predictions bit for bit.
"""
import json
from pathlib import Path

import numpy as np

from .boosting import GbdtModel, ObliviousTree
from .losses import LOSSES, WEIGHTED_RMSE, QuantizationMap

FORMAT_VERSION = 1


def model_to_dict(model: GbdtModel) -> dict:
    scalar = model.loss == WEIGHTED_RMSE
    trees = []
    for t in model.trees:
        leaves = t.leaf_values[:, 0].tolist() if scalar else t.leaf_values.tolist()
        trees.append({
            "splits": [[int(f), float(v)] for f, v in zip(t.features, t.thresholds)],
            "leaves": leaves,
        })
    q = model.quantization
    return {
        "format_version": FORMAT_VERSION,
        "loss": model.loss,
        "n_features": model.n_features,
        "learning_rate": model.learning_rate,
        "base_score": float(model.base_score[0]) if scalar else model.base_score.tolist(),
        "quantization": None if q is None else {
            "origin": q.origin, "bin_width": q.bin_width, "n_classes": q.n_classes,
        },
        "trees": trees,
    }


def model_from_dict(doc: dict) -> GbdtModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}")
    if doc["loss"] not in LOSSES:
        raise ValueError(f"unknown loss {doc['loss']!r}")
    trees = []
    for t in doc["trees"]:
        splits = t["splits"]
        trees.append(ObliviousTree(
            np.array([s[0] for s in splits], dtype=np.int64),
            np.array([s[1] for s in splits], dtype=np.float64),
            np.array(t["leaves"], dtype=np.float64),
        ))
    q = doc.get("quantization")
    return GbdtModel(
        base_score=np.atleast_1d(np.array(doc["base_score"], dtype=np.float64)),
        trees=trees,
        learning_rate=float(doc["learning_rate"]),
        loss=doc["loss"],
        n_features=int(doc["n_features"]),
        quantization=None if q is None else QuantizationMap(q["origin"], q["bin_width"], int(q["n_classes"])),
    )


def save_model(model: GbdtModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), separators=(",", ":")) + "\n")


def load_model(path) -> GbdtModel:
    return model_from_dict(json.loads(Path(path).read_text()))
