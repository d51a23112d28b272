"""Gradient boosting with oblivious trees on histogram-binned features."""
from .binning import QuantileBinner, find_thresholds
from .boosting import (
    GbdtHyperparams,
    GbdtModel,
    ObliviousTree,
    TrainingSet,
    find_best_oblivious_split,
    grow_oblivious_tree,
    predict,
    train,
)
from .estimators import HeightClassifier, ObliviousBoostingClassifier, ObliviousBoostingRegressor
from .losses import (
    WEIGHTED_MULTICLASS,
    WEIGHTED_RMSE,
    ClassProbabilities,
    QuantizationMap,
    class_weights,
    gradients,
    loss_weighted_multiclass,
    loss_weighted_rmse,
    quantize_labels,
)
from .model_io import load_model, model_from_dict, model_to_dict, save_model

__all__ = [
    "QuantileBinner", "find_thresholds", "GbdtHyperparams", "GbdtModel", "ObliviousTree",
    "TrainingSet", "find_best_oblivious_split", "grow_oblivious_tree", "predict", "train",
    "HeightClassifier", "ObliviousBoostingClassifier", "ObliviousBoostingRegressor",
    "WEIGHTED_MULTICLASS", "WEIGHTED_RMSE", "ClassProbabilities", "QuantizationMap",
    "class_weights", "gradients", "loss_weighted_multiclass", "loss_weighted_rmse",
    "quantize_labels", "load_model", "model_from_dict", "model_to_dict", "save_model",
]
