"""Classical classifiers over TF-IDF features, with tuned default parameters."""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier
from sklearn.linear_model import LogisticRegression
from sklearn.multiclass import OneVsRestClassifier
from sklearn.svm import SVC
from sklearn.tree import DecisionTreeClassifier

from .corpus import Label

CHECKPOINT_FORMAT = "sabia-classical"
CHECKPOINT_VERSION = 1

ALGORITHMS = ("logreg", "gboost", "forest", "svm_rbf", "tree")

#: Tuned defaults per algorithm; overridable through ClassicalConfig.params.
DEFAULT_PARAMS = {
    "logreg": {"C": 1.0, "penalty": "l2", "solver": "liblinear"},
    "gboost": {"n_estimators": 200, "max_depth": 6, "learning_rate": 0.1, "subsample": 0.8},
    "forest": {
        "n_estimators": 150,
        "max_depth": 10,
        "min_samples_split": 2,
        "max_features": "sqrt",
    },
    # Single-tree variant of the forest settings.
    "tree": {"max_depth": 10, "min_samples_split": 2},
    # gamma="scale" means 1 / (n_features * Var(X)).
    "svm_rbf": {"C": 1.0, "kernel": "rbf", "gamma": "scale"},
}


class ClassicalError(ValueError):
    pass


@dataclass(frozen=True)
class ClassicalConfig:
    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 80

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ClassicalError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )

    def resolved_params(self) -> dict:
        return {**DEFAULT_PARAMS[self.algorithm], **self.params}


@dataclass
class ClassicalModel:
    config: ClassicalConfig
    estimator: object
    n_features: int


def _build_estimator(config: ClassicalConfig):
    params = config.resolved_params()
    if config.algorithm == "logreg":
        base = LogisticRegression(random_state=config.seed, **params)
        if params.get("solver") == "liblinear":
            # liblinear is inherently one-vs-rest; wrap explicitly so sklearn
            # keeps the scheme for multiclass targets.
            return OneVsRestClassifier(base)
        return base
    if config.algorithm == "gboost":
        return GradientBoostingClassifier(random_state=config.seed, **params)
    if config.algorithm == "forest":
        return RandomForestClassifier(random_state=config.seed, **params)
    if config.algorithm == "tree":
        return DecisionTreeClassifier(random_state=config.seed, **params)
    return SVC(random_state=config.seed, **params)


def _as_matrix(X):
    if sparse.issparse(X):
        return X
    return np.asarray(X)


def train_classical(config: ClassicalConfig, X, y: list[Label]) -> ClassicalModel:
    """Fit the configured estimator. Deterministic for a given seed."""
    X = _as_matrix(X)
    y_codes = np.array([int(lab) for lab in y])
    if X.shape[0] != len(y_codes):
        raise ClassicalError(f"dimension mismatch: {X.shape[0]} rows vs {len(y_codes)} labels")
    if X.shape[0] == 0:
        raise ClassicalError("empty training set")
    if len(np.unique(y_codes)) < 2:
        raise ClassicalError("training needs at least two classes")
    estimator = _build_estimator(config)
    estimator.fit(X, y_codes)
    return ClassicalModel(config=config, estimator=estimator, n_features=X.shape[1])


def predict(model: ClassicalModel, X) -> list[Label]:
    """One label per row; argmax ties break toward the lower class code."""
    X = _as_matrix(X)
    if X.shape[0] == 0:
        return []
    if X.shape[1] != model.n_features:
        raise ClassicalError(
            f"dimension mismatch: model expects {model.n_features} features, got {X.shape[1]}"
        )
    est = model.estimator
    if hasattr(est, "predict_proba"):
        scores = est.predict_proba(X)
    else:
        scores = est.decision_function(X)
        if scores.ndim == 1:  # binary decision function
            scores = np.stack([-scores, scores], axis=1)
    # classes_ is sorted ascending, so np.argmax favors the lower class code.
    codes = est.classes_[np.argmax(scores, axis=1)]
    return [Label(int(c)) for c in codes]


def save_classical(model: ClassicalModel, path: str | Path) -> None:
    """Versioned binary blob with the config embedded."""
    blob = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "algorithm": model.config.algorithm,
        "params": model.config.params,
        "seed": model.config.seed,
        "n_features": model.n_features,
        "estimator": model.estimator,
    }
    with Path(path).open("wb") as f:
        pickle.dump(blob, f)


def load_classical(path: str | Path) -> ClassicalModel:
    with Path(path).open("rb") as f:
        blob = pickle.load(f)
    if blob.get("format") != CHECKPOINT_FORMAT or blob.get("version") != CHECKPOINT_VERSION:
        raise ClassicalError(f"{path}: not a classical model checkpoint")
    config = ClassicalConfig(
        algorithm=blob["algorithm"], params=blob["params"], seed=blob["seed"]
    )
    return ClassicalModel(config=config, estimator=blob["estimator"], n_features=blob["n_features"])
