"""scikit-learn compatible wrappers around :func:`boosting.train`."""
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .boosting import GbdtHyperparams, TrainingSet, predict, train
from .losses import WEIGHTED_MULTICLASS, WEIGHTED_RMSE, ClassProbabilities, class_weights, quantize_labels


class _ObliviousBoostingBase(BaseEstimator):
    def __init__(self, n_estimators=500, depth=6, learning_rate=0.1, histogram_bins=255,
                 min_samples_leaf=20, early_stopping_rounds=50, l2_reg=None,
                 subsample=1.0, random_state=0, n_threads=None):
        self.n_estimators = n_estimators
        self.depth = depth
        self.learning_rate = learning_rate
        self.histogram_bins = histogram_bins
        self.min_samples_leaf = min_samples_leaf
        self.early_stopping_rounds = early_stopping_rounds
        self.l2_reg = l2_reg
        self.subsample = subsample
        self.random_state = random_state
        self.n_threads = n_threads

    def _hyperparams(self, loss):
        return GbdtHyperparams(
            num_trees=self.n_estimators,
            depth=self.depth,
            learning_rate=self.learning_rate,
            histogram_bins=self.histogram_bins,
            min_samples_leaf=self.min_samples_leaf,
            loss=loss,
            early_stopping_rounds=self.early_stopping_rounds,
            l2_reg=self.l2_reg,
            subsample=self.subsample,
            seed=0 if self.random_state is None else int(self.random_state),
        )

    def _raw(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    @property
    def n_trees_(self):
        return len(self.model_.trees)


class ObliviousBoostingRegressor(RegressorMixin, _ObliviousBoostingBase):
    """Boosted oblivious trees minimizing weighted squared error.

    Parameters
    ----------
    n_estimators : int
        Maximum number of trees.
    depth : int
        Levels per tree; each tree has ``2**depth`` leaves.
    early_stopping_rounds : int or None
        Used only when ``eval_set`` is passed to :meth:`fit`.
    """

    def fit(self, X, y, sample_weight=None, eval_set=None, eval_sample_weight=None):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        data = TrainingSet(X, y, sample_weight)
        validation = None
        if eval_set is not None:
            Xv, yv = eval_set
            validation = TrainingSet(Xv, yv, eval_sample_weight)
        self.history_ = []
        self.model_ = train(data, validation, self._hyperparams(WEIGHTED_RMSE),
                            n_threads=self.n_threads, history=self.history_)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return predict(self.model_, self._raw(X), n_threads=self.n_threads)


class ObliviousBoostingClassifier(ClassifierMixin, _ObliviousBoostingBase):
    """Multiclass boosted oblivious trees with vector leaves.

    ``class_weight="balanced"`` weights each sample by ``N / (T n_c)``.
    """

    def __init__(self, n_estimators=500, depth=6, learning_rate=0.1, histogram_bins=255,
                 min_samples_leaf=20, early_stopping_rounds=50, l2_reg=None,
                 subsample=1.0, random_state=0, n_threads=None, class_weight="balanced"):
        super().__init__(n_estimators, depth, learning_rate, histogram_bins, min_samples_leaf,
                         early_stopping_rounds, l2_reg, subsample, random_state, n_threads)
        self.class_weight = class_weight

    def _encode(self, y):
        return np.searchsorted(self.classes_, y)

    def _weights(self, labels, sample_weight):
        w = np.ones(labels.size) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        if self.class_weight == "balanced":
            w = w * class_weights(labels, self.classes_.size)
        elif self.class_weight is not None:
            raise ValueError("class_weight must be 'balanced' or None")
        return w

    def _fit_labels(self, X, labels, sample_weight, eval_set, eval_sample_weight, quantization=None):
        data = TrainingSet(X, labels, self._weights(labels, sample_weight))
        validation = None
        if eval_set is not None:
            Xv, yv = eval_set
            validation = TrainingSet(Xv, yv, self._weights(yv, eval_sample_weight))
        self.history_ = []
        self.model_ = train(data, validation, self._hyperparams(WEIGHTED_MULTICLASS),
                            n_classes=self.classes_.size, quantization=quantization,
                            n_threads=self.n_threads, history=self.history_)
        self.n_features_in_ = X.shape[1]
        return self

    def fit(self, X, y, sample_weight=None, eval_set=None, eval_sample_weight=None):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise ValueError("need at least two classes")
        ev = None if eval_set is None else (eval_set[0], self._encode(np.asarray(eval_set[1])))
        return self._fit_labels(X, self._encode(y), sample_weight, ev, eval_sample_weight)

    def predict_logits(self, X):
        return self.model_.raw_predict(self._raw(X))

    def predict_proba(self, X):
        return ClassProbabilities.from_logits(self.predict_logits(X)).probabilities

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_logits(X), axis=1)]


class HeightClassifier(ObliviousBoostingClassifier):
    """Classifier over quantized heights that predicts bin-center heights.

    ``fit`` takes continuous heights; they are quantized into ``bin_width``
    classes over ``height_range`` (or the data range when None).
    """

    def __init__(self, n_estimators=500, depth=6, learning_rate=0.1, histogram_bins=255,
                 min_samples_leaf=20, early_stopping_rounds=50, l2_reg=None,
                 subsample=1.0, random_state=0, n_threads=None, class_weight="balanced",
                 bin_width=1.0, height_range=None):
        super().__init__(n_estimators, depth, learning_rate, histogram_bins, min_samples_leaf,
                         early_stopping_rounds, l2_reg, subsample, random_state, n_threads,
                         class_weight)
        self.bin_width = bin_width
        self.height_range = height_range

    def fit(self, X, y, sample_weight=None, eval_set=None, eval_sample_weight=None):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        labels, qmap = quantize_labels(y, self.bin_width, self.height_range)
        self.quantization_ = qmap
        self.classes_ = np.arange(qmap.n_classes)
        ev = None if eval_set is None else (eval_set[0], qmap.classes(eval_set[1]))
        return self._fit_labels(X, labels, sample_weight, ev, eval_sample_weight, quantization=qmap)

    def predict_class(self, X):
        return np.argmax(self.predict_logits(X), axis=1)

    def predict(self, X):
        return self.quantization_.heights(self.predict_class(X))
