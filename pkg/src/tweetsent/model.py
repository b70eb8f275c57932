"""One-vs-rest L2 logistic regression and a bagging ensemble on top of it.

Each class gets an independent binary problem in the primal form

    min_{w,b}  0.5 * ||w||^2  +  C * sum_i s_i * log(1 + exp(-y_i (w.x_i + b)))

with y_i = +1 for the class' own instances, per-sample weights s_i taken
from the class-weight mode, and an unregularized bias.  The problem is
convex, so any deterministic descent method reaching the gradient tolerance
finds the same optimum; we run L-BFGS-B on an analytic objective/gradient
pair and stop when the gradient infinity norm drops below ``tol``.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, sparse
from scipy.special import expit

from .corpus import LABELS, Label
from .vectorize import SparseVector

CLASS_WEIGHT_MODES = ("none", "balanced")


@dataclass(frozen=True)
class LrConfig:
    C: float = 1.0
    class_weight: str = "none"
    tol: float = 1e-6
    max_iter: int = 1000

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.class_weight not in CLASS_WEIGHT_MODES:
            raise ValueError(f"class_weight must be one of {CLASS_WEIGHT_MODES}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(eq=False)
class LinearModel:
    classes: tuple[Label, ...]
    weights: np.ndarray  # shape (K, D)
    biases: np.ndarray  # shape (K,)
    config: LrConfig
    converged: bool = True


def compute_class_weights(label_counts: Mapping[Label, int], mode: str) -> dict[Label, float]:
    """Per-class sample weights: 1 everywhere, or N / (K * n_c) when balanced."""
    if mode not in CLASS_WEIGHT_MODES:
        raise ValueError(f"class_weight must be one of {CLASS_WEIGHT_MODES}")
    for label, count in label_counts.items():
        if count <= 0:
            raise ValueError(f"class {label.value} has non-positive count {count}")
    if mode == "none":
        return {label: 1.0 for label in label_counts}
    total = sum(label_counts.values())
    k = len(label_counts)
    return {label: total / (k * count) for label, count in label_counts.items()}


def binary_objective(
    features: np.ndarray | sparse.spmatrix,
    signs: np.ndarray,
    sample_weight: np.ndarray,
    C: float,
) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    """Objective and gradient for one binary subproblem.

    ``theta`` packs the weight vector with the bias appended.  The loss term
    uses log1p/expit forms, so it stays finite for any margin.
    """

    def value_and_grad(theta: np.ndarray) -> tuple[float, np.ndarray]:
        w, b = theta[:-1], theta[-1]
        margins = features @ w + b
        t = signs * margins
        value = 0.5 * float(w @ w) + C * float(sample_weight @ np.logaddexp(0.0, -t))
        coeff = -C * sample_weight * signs * expit(-t)
        grad_w = w + features.T @ coeff
        grad = np.empty(theta.shape)
        grad[:-1] = grad_w
        grad[-1] = coeff.sum()
        return value, grad

    return value_and_grad


def _check_features(features: np.ndarray | sparse.spmatrix, count: int) -> None:
    if features.shape[0] != count:
        raise ValueError(f"feature matrix has {features.shape[0]} rows for {count} labels")
    data = features.data if sparse.issparse(features) else features
    if not np.isfinite(data).all():
        raise ValueError("feature matrix contains non-finite values")


def train_lr(
    features: np.ndarray | sparse.spmatrix,
    labels: Sequence[Label],
    config: LrConfig,
    sample_weight: np.ndarray | None = None,
    iteration_callback: Callable[[Label, float], None] | None = None,
) -> LinearModel:
    """Fit one binary L2 logistic regression per present class.

    ``sample_weight`` overrides the class-weight mode (a test and calibration
    hook).  ``iteration_callback`` receives the objective value at every
    optimizer iterate.  A subproblem that fails to reach ``tol`` within
    ``max_iter`` still yields a model, with a warning and ``converged=False``.
    """
    labels = list(labels)
    _check_features(features, len(labels))
    classes = tuple(label for label in LABELS if label in set(labels))
    if len(classes) < 2:
        raise ValueError("training needs at least 2 distinct labels")
    if sample_weight is None:
        weight_by_class = compute_class_weights(Counter(labels), config.class_weight)
        sample_weight = np.array([weight_by_class[label] for label in labels])
    else:
        sample_weight = np.asarray(sample_weight, dtype=float)
        if sample_weight.shape != (len(labels),):
            raise ValueError("sample_weight must have one entry per instance")

    dim = features.shape[1]
    weights = np.empty((len(classes), dim))
    biases = np.empty(len(classes))
    converged = True
    label_array = np.array([label.value for label in labels])
    for k, cls in enumerate(classes):
        signs = np.where(label_array == cls.value, 1.0, -1.0)
        objective = binary_objective(features, signs, sample_weight, config.C)
        callback = None
        if iteration_callback is not None:
            callback = lambda theta, _cls=cls: iteration_callback(_cls, objective(theta)[0])
        result = optimize.minimize(
            objective,
            x0=np.zeros(dim + 1),
            jac=True,
            method="L-BFGS-B",
            callback=callback,
            options={
                "maxiter": config.max_iter,
                "maxfun": max(15000, 20 * config.max_iter),
                "ftol": 0.0,
                "gtol": config.tol,
            },
        )
        if not result.success:
            converged = False
            warnings.warn(
                f"optimizer did not reach tol={config.tol} for class {cls.value}: {result.message}",
                RuntimeWarning,
                stacklevel=2,
            )
        weights[k] = result.x[:-1]
        biases[k] = result.x[-1]
    return LinearModel(classes=classes, weights=weights, biases=biases, config=config, converged=converged)


def _as_dense_row(x: np.ndarray | SparseVector, dim: int) -> np.ndarray:
    if isinstance(x, SparseVector):
        if x.dim != dim:
            raise ValueError(f"feature vector has dim {x.dim}, model expects {dim}")
        return x.to_dense()
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"feature vector has shape {x.shape}, model expects ({dim},)")
    return x


def predict_proba(model: LinearModel, x: np.ndarray | SparseVector) -> np.ndarray:
    """Per-class probabilities: normalized sigmoids of the raw scores.

    All-zero scores land on the uniform distribution.
    """
    dense = _as_dense_row(x, model.weights.shape[1])
    raw = expit(model.weights @ dense + model.biases)
    total = raw.sum()
    if total == 0.0:
        return np.full(len(model.classes), 1.0 / len(model.classes))
    return raw / total


def predict(model: LinearModel, x: np.ndarray | SparseVector) -> Label:
    """Argmax of ``predict_proba``; ties break in canonical class order."""
    return model.classes[int(np.argmax(predict_proba(model, x)))]


@dataclass(frozen=True)
class BaggingConfig:
    n_estimators: int = 40
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(eq=False)
class BaggingEnsemble:
    classes: tuple[Label, ...]
    members: tuple[LinearModel, ...]
    lr_config: LrConfig
    bagging_config: BaggingConfig


BootstrapFn = Callable[[int, int, np.random.Generator], np.ndarray]


def train_bagging(
    features: np.ndarray | sparse.spmatrix,
    labels: Sequence[Label],
    lr_config: LrConfig,
    bagging_config: BaggingConfig,
    bootstrap_fn: BootstrapFn | None = None,
) -> BaggingEnsemble:
    """Train members on bootstrap samples of the instances.

    Member k draws its own generator from ``(seed, k)``, so every member and
    the whole ensemble are reproducible.  A sample that collapses to a single
    class is redrawn, at most 10 times.  ``bootstrap_fn`` overrides sampling
    for tests.
    """
    labels = list(labels)
    _check_features(features, len(labels))
    classes = tuple(label for label in LABELS if label in set(labels))
    if len(classes) < 2:
        raise ValueError("training needs at least 2 distinct labels")
    n = len(labels)
    members: list[LinearModel] = []
    for k in range(bagging_config.n_estimators):
        rng = np.random.default_rng([bagging_config.seed, k])
        for attempt in range(10):
            if bootstrap_fn is None:
                idx = rng.integers(0, n, size=n)
            else:
                idx = np.asarray(bootstrap_fn(k, n, rng))
            if len({labels[i] for i in idx}) >= 2:
                break
        else:
            raise RuntimeError(
                f"bootstrap sample for member {k} collapsed to a single class in 10 attempts"
            )
        member_labels = [labels[i] for i in idx]
        members.append(train_lr(features[idx], member_labels, lr_config))
    return BaggingEnsemble(
        classes=classes,
        members=tuple(members),
        lr_config=lr_config,
        bagging_config=bagging_config,
    )


def _member_proba_matrix(member: LinearModel, X, classes: tuple[Label, ...]) -> np.ndarray:
    raw = expit(np.asarray(X @ member.weights.T) + member.biases)
    totals = raw.sum(axis=1, keepdims=True)
    uniform = totals[:, 0] == 0.0
    totals[uniform] = 1.0
    raw = raw / totals
    raw[uniform] = 1.0 / len(member.classes)
    # A bootstrap sample can miss a rare class; it then gets probability 0.
    aligned = np.zeros((raw.shape[0], len(classes)))
    for i, cls in enumerate(member.classes):
        aligned[:, classes.index(cls)] = raw[:, i]
    return aligned


def predict_proba_matrix(
    predictor: LinearModel | BaggingEnsemble, X: np.ndarray | sparse.spmatrix
) -> np.ndarray:
    """Row-wise class distributions for a batch, ensemble members averaged."""
    if isinstance(predictor, LinearModel):
        return _member_proba_matrix(predictor, X, predictor.classes)
    stacked = np.zeros((X.shape[0], len(predictor.classes)))
    for member in predictor.members:
        stacked += _member_proba_matrix(member, X, predictor.classes)
    return stacked / len(predictor.members)


def predict_many(
    predictor: LinearModel | BaggingEnsemble, X: np.ndarray | sparse.spmatrix
) -> list[Label]:
    proba = predict_proba_matrix(predictor, X)
    return [predictor.classes[int(i)] for i in np.argmax(proba, axis=1)]


def predict_bagging(ensemble: BaggingEnsemble, x: np.ndarray | SparseVector) -> tuple[Label, np.ndarray]:
    """Average the member distributions, then argmax with canonical ties."""
    dense = _as_dense_row(x, ensemble.members[0].weights.shape[1])
    proba = predict_proba_matrix(ensemble, dense.reshape(1, -1))[0]
    return ensemble.classes[int(np.argmax(proba))], proba


MODEL_FORMAT_VERSION = 1


def save_model(
    predictor: LinearModel | BaggingEnsemble,
    directory: str | Path,
    layout: Sequence[tuple[str, int]],
) -> None:
    """Persist a model or ensemble with its fit-time feature layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    layout = [(name, int(dim)) for name, dim in layout]
    dim = sum(d for _, d in layout)
    meta: dict = {
        "format_version": MODEL_FORMAT_VERSION,
        "layout": layout,
    }
    if isinstance(predictor, LinearModel):
        if predictor.weights.shape[1] != dim:
            raise ValueError("model dimension does not match the feature layout")
        meta["kind"] = "linear"
        meta["classes"] = [c.value for c in predictor.classes]
        meta["config"] = _lr_config_dict(predictor.config)
        meta["converged"] = predictor.converged
        np.save(directory / "weights.npy", predictor.weights)
        np.save(directory / "biases.npy", predictor.biases)
    else:
        meta["kind"] = "bagging"
        meta["classes"] = [c.value for c in predictor.classes]
        meta["config"] = _lr_config_dict(predictor.lr_config)
        meta["bagging"] = {
            "n_estimators": predictor.bagging_config.n_estimators,
            "seed": predictor.bagging_config.seed,
        }
        meta["members"] = []
        for k, member in enumerate(predictor.members):
            if member.weights.shape[1] != dim:
                raise ValueError("ensemble member dimension does not match the feature layout")
            meta["members"].append(
                {"classes": [c.value for c in member.classes], "converged": member.converged}
            )
            np.save(directory / f"member_{k:03d}_weights.npy", member.weights)
            np.save(directory / f"member_{k:03d}_biases.npy", member.biases)
    with open(directory / "model.json", "w", encoding="utf-8", newline="\n") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


def _lr_config_dict(config: LrConfig) -> dict:
    return {
        "C": config.C,
        "class_weight": config.class_weight,
        "tol": config.tol,
        "max_iter": config.max_iter,
    }


def load_model(directory: str | Path) -> tuple[LinearModel | BaggingEnsemble, list[tuple[str, int]]]:
    """Load a persisted model, verifying dimensions against the stored layout."""
    directory = Path(directory)
    with open(directory / "model.json", encoding="utf-8") as handle:
        meta = json.load(handle)
    if meta.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {meta.get('format_version')!r}")
    layout = [(str(name), int(dim)) for name, dim in meta["layout"]]
    dim = sum(d for _, d in layout)
    config = LrConfig(**meta["config"])
    if meta["kind"] == "linear":
        weights = np.load(directory / "weights.npy")
        biases = np.load(directory / "biases.npy")
        classes = tuple(Label.parse(c) for c in meta["classes"])
        if weights.shape != (len(classes), dim) or biases.shape != (len(classes),):
            raise ValueError("stored weights do not match the feature layout")
        model = LinearModel(
            classes=classes,
            weights=weights,
            biases=biases,
            config=config,
            converged=bool(meta.get("converged", True)),
        )
        return model, layout
    if meta["kind"] == "bagging":
        ensemble_classes = tuple(Label.parse(c) for c in meta["classes"])
        members: list[LinearModel] = []
        for k, member_meta in enumerate(meta["members"]):
            weights = np.load(directory / f"member_{k:03d}_weights.npy")
            biases = np.load(directory / f"member_{k:03d}_biases.npy")
            classes = tuple(Label.parse(c) for c in member_meta["classes"])
            if weights.shape != (len(classes), dim) or biases.shape != (len(classes),):
                raise ValueError(f"stored weights for member {k} do not match the feature layout")
            members.append(
                LinearModel(
                    classes=classes,
                    weights=weights,
                    biases=biases,
                    config=config,
                    converged=bool(member_meta.get("converged", True)),
                )
            )
        bagging_config = BaggingConfig(**meta["bagging"])
        return (
            BaggingEnsemble(
                classes=ensemble_classes,
                members=tuple(members),
                lr_config=config,
                bagging_config=bagging_config,
            ),
            layout,
        )
    raise ValueError(f"unknown model kind {meta['kind']!r}")
