"""Uniform train/predict surface over the eleven classifier kinds.

Every classifier consumes (n, 10000) pixel matrices with binary labels
and exposes ``predict`` plus ``scores``; probabilistic kinds score the
open-wire posterior (label 1 iff score > 0.5), margin kinds a signed
decision value (label 1 iff score > 0).
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataFormatError
from .boost import AdaBoostSamme
from .gaussian import GaussianNaiveBayes, QuadraticDiscriminant
from .gpc import GaussianProcessClassifier, laplace_lml_and_gradient
from .knn import KNearestNeighbors, NearestCentroid
from .linear import SGDHingeClassifier
from .mlp import MultilayerPerceptron
from .svm import SupportVectorMachine
from .tree import DecisionTreeClassifier, RandomForestClassifier

__all__ = [
    "ClassifierSpec", "CLASSIFIER_KINDS", "make_classifier", "train",
    "predict", "predict_batch", "save_model", "load_model",
    "laplace_lml_and_gradient",
    "SupportVectorMachine", "KNearestNeighbors", "GaussianProcessClassifier",
    "GaussianNaiveBayes", "MultilayerPerceptron", "SGDHingeClassifier",
    "AdaBoostSamme", "DecisionTreeClassifier", "RandomForestClassifier",
    "QuadraticDiscriminant", "NearestCentroid",
]

CLASSIFIER_KINDS = ("svm", "knn", "gpc", "gnb", "mlp", "sgd", "adaboost",
                    "dtc", "rf", "qda", "centroid")

# kinds whose fit consumes the spec seed
SEEDED_KINDS = ("gpc", "mlp", "sgd", "adaboost", "dtc", "rf")


@dataclass
class ClassifierSpec:
    """Declarative classifier configuration."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0


def _positive(params, key):
    if key in params and not params[key] > 0:
        raise DataFormatError(f"hyperparameter {key} must be positive")


def make_classifier(spec: ClassifierSpec):
    """Instantiate (and validate) the classifier a spec describes."""
    kind = spec.kind.lower()
    p = dict(spec.hyperparameters)
    if kind == "svm":
        _positive(p, "c"), _positive(p, "gamma"), _positive(p, "tol")
        return SupportVectorMachine(c=p.get("c", 1.0), gamma=p.get("gamma", 0.001),
                                    tol=p.get("tol", 1e-3),
                                    max_steps=p.get("max_steps", 100_000))
    if kind == "knn":
        k = int(p.get("k", 3))
        if k < 1 or k % 2 == 0:
            raise DataFormatError("knn needs an odd k >= 1")
        return KNearestNeighbors(k=k)
    if kind == "gpc":
        if not int(p.get("restarts", 3)) >= 1:
            raise DataFormatError("gpc needs at least one restart")
        return GaussianProcessClassifier(restarts=p.get("restarts", 3),
                                         max_iter=p.get("max_iter", 60),
                                         grad_tol=p.get("grad_tol", 1e-5),
                                         seed=spec.seed)
    if kind == "gnb":
        _positive(p, "var_smoothing")
        return GaussianNaiveBayes(var_smoothing=p.get("var_smoothing", 1e-9))
    if kind == "mlp":
        _positive(p, "hidden"), _positive(p, "epochs"), _positive(p, "learning_rate")
        return MultilayerPerceptron(hidden=p.get("hidden", 100),
                                    epochs=p.get("epochs", 500),
                                    learning_rate=p.get("learning_rate", 1e-3),
                                    seed=spec.seed)
    if kind == "sgd":
        _positive(p, "epochs"), _positive(p, "eta0")
        return SGDHingeClassifier(alpha=p.get("alpha", 1e-4),
                                  epochs=p.get("epochs", 1000),
                                  eta0=p.get("eta0", 0.01),
                                  power=p.get("power", 0.25), seed=spec.seed)
    if kind == "adaboost":
        if not int(p.get("rounds", 50)) >= 1:
            raise DataFormatError("adaboost needs at least one round")
        return AdaBoostSamme(rounds=p.get("rounds", 50), seed=spec.seed)
    if kind == "dtc":
        depth = p.get("max_depth")
        if depth is not None and int(depth) < 1:
            raise DataFormatError("dtc max_depth must be None or >= 1")
        return DecisionTreeClassifier(max_depth=depth, seed=spec.seed)
    if kind == "rf":
        trees = int(p.get("n_trees", 100))
        feats = int(p.get("max_features", 100))
        if trees < 1 or feats < 1:
            raise DataFormatError("rf needs n_trees >= 1 and max_features >= 1")
        return RandomForestClassifier(n_trees=trees, max_features=feats,
                                      seed=spec.seed)
    if kind == "qda":
        r = float(p.get("shrinkage", 0.1))
        if not 0.0 <= r <= 1.0:
            raise DataFormatError("qda shrinkage must lie in [0, 1]")
        return QuadraticDiscriminant(shrinkage=r)
    if kind == "centroid":
        return NearestCentroid()
    raise DataFormatError(f"unknown classifier kind {spec.kind!r}")


def train(spec: ClassifierSpec, x, y):
    """Fit a fresh model; training data must contain both classes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.ndim != 2 or len(x) != len(y) or len(y) < 2:
        raise DataFormatError("training set must be a non-trivial (n, d) matrix")
    if not np.all(np.isfinite(x)):
        raise DataFormatError("training features must be finite")
    if len(np.unique(y)) < 2:
        raise DataFormatError("single-class training set")
    model = make_classifier(spec)
    model.fit(x, y)
    model.spec = spec
    return model


def predict(model, x):
    """Label and score of one feature vector under the stated conventions."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    score = float(model.scores(x)[0])
    if model.score_convention == "probability":
        return int(score > 0.5), score
    return int(score > 0), score


def predict_batch(model, x):
    scores = np.asarray(model.scores(np.asarray(x, dtype=float)))
    cut = 0.5 if model.score_convention == "probability" else 0.0
    return (scores > cut).astype(int), scores


# ---------------------------------------------------------------------------
# model persistence

MODEL_MAGIC = b"WIRESCAN-MODEL\x00"
MODEL_VERSION = 1


def save_model(model, path):
    """Versioned binary dump of spec plus fitted parameters."""
    payload = {
        "kind": model.kind,
        "spec": {
            "kind": model.spec.kind,
            "hyperparameters": model.spec.hyperparameters,
            "seed": model.spec.seed,
        } if hasattr(model, "spec") else None,
        "state": model.__dict__,
        "class": type(model).__name__,
    }
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(MODEL_VERSION.to_bytes(4, "little"))
        fh.write(pickle.dumps(payload, protocol=4))


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise DataFormatError(f"{path}: not a wirescan model file")
        version = int.from_bytes(fh.read(4), "little")
        if version != MODEL_VERSION:
            raise DataFormatError(f"{path}: unsupported model version {version}")
        payload = pickle.loads(fh.read())
    classes = {cls.__name__: cls for cls in (
        SupportVectorMachine, KNearestNeighbors, GaussianProcessClassifier,
        GaussianNaiveBayes, MultilayerPerceptron, SGDHingeClassifier,
        AdaBoostSamme, DecisionTreeClassifier, RandomForestClassifier,
        QuadraticDiscriminant, NearestCentroid)}
    cls = classes.get(payload["class"])
    if cls is None:
        raise DataFormatError(f"{path}: unknown model class {payload['class']!r}")
    model = cls.__new__(cls)
    model.__dict__.update(payload["state"])
    if payload["spec"] is not None:
        model.spec = ClassifierSpec(**payload["spec"])
    return model
