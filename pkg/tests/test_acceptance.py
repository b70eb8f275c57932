"""Release gate: one test per numbered acceptance criterion.

Each test prints a single verdict line (visible with ``pytest -s``); under
plain ``pytest -v`` the per-test PASSED/FAILED line serves the same purpose.
Tolerances are pinned here and should not be loosened without a recorded
reason.
"""

import hashlib
import random
import time
from collections import Counter
from functools import reduce
from pathlib import Path

import numpy as np

from tweetsent.augment import CrossoverConfig, crossover_augment, crossover_pair, split_halves
from tweetsent.corpus import Dataset, Label, Tweet, load_tsv
from tweetsent.embeddings import (
    EmbeddingTable,
    SifConfig,
    SubwordTable,
    UnigramModel,
    remove_common_component,
    sif_embed,
    sif_weight,
    word_vector,
)
from tweetsent.experiment import ABLATIONS, ExperimentConfig, run_ablation, run_experiment
from tweetsent.metrics import ConfusionMatrix, confusion, report_from_confusion
from tweetsent.model import (
    BaggingConfig,
    LrConfig,
    binary_objective,
    compute_class_weights,
    predict,
    save_model,
    train_bagging,
    train_lr,
)
from tweetsent.vectorize import NgramConfig, extract_word_ngrams, fit_vocabulary, transform


def verdict(number: int, title: str) -> None:
    # Reached only after every assert above it held.
    print(f"criterion {number:02d} PASS: {title}")


# Two frozen report/matrix pairs: a four-class dev result and a second run of
# the same system, used as exact regression oracles for the metric arithmetic.
MATRIX_A = ConfusionMatrix(((114, 36, 5, 13), (28, 215, 8, 15), (29, 43, 4, 7), (17, 23, 2, 22)))
EXPECTED_A = {
    Label.P: (60.64, 67.86, 64.04),
    Label.N: (67.82, 80.83, 73.76),
    Label.NEU: (21.05, 4.82, 7.84),
    Label.NONE: (38.60, 34.38, 36.36),
}
MACRO_A = (47.03, 46.97, 47.00)
ACCURACY_A = 61.10

MATRIX_B = ConfusionMatrix(((122, 42, 1, 3), (27, 233, 1, 5), (29, 49, 2, 3), (20, 27, 0, 17)))
EXPECTED_B = {
    Label.P: (61.62, 72.62, 66.67),
    Label.N: (66.38, 87.59, 75.53),
    Label.NEU: (50.00, 2.41, 4.60),
    Label.NONE: (60.71, 26.56, 36.96),
}
MACRO_B = (59.68, 47.30, 52.77)
ACCURACY_B = 64.37


def test_criterion_01_report_reproduces_the_frozen_tables():
    started = time.perf_counter()
    for matrix, expected, macro, accuracy in (
        (MATRIX_A, EXPECTED_A, MACRO_A, ACCURACY_A),
        (MATRIX_B, EXPECTED_B, MACRO_B, ACCURACY_B),
    ):
        report = report_from_confusion(matrix)
        for label, (precision, recall, f1) in expected.items():
            metrics = report.per_class[label]
            assert abs(metrics.precision - precision) <= 0.01, (label, "precision")
            assert abs(metrics.recall - recall) <= 0.01, (label, "recall")
            assert abs(metrics.f1 - f1) <= 0.01, (label, "f1")
        assert abs(report.macro_precision - macro[0]) <= 0.01
        assert abs(report.macro_recall - macro[1]) <= 0.01
        assert abs(report.macro_f1 - macro[2]) <= 0.01
        assert abs(report.accuracy - accuracy) <= 0.01
    assert time.perf_counter() - started < 1.0
    verdict(1, "both frozen report tables reproduced within 0.01")


def test_criterion_02_macro_f1_is_harmonic_of_macro_averages():
    report = report_from_confusion(MATRIX_A)
    mean_of_f1s = sum(report.per_class[label].f1 for label in Label) / 4
    assert round(mean_of_f1s, 2) == 45.50
    assert report.macro_f1 == 47.00
    assert abs(mean_of_f1s - report.macro_f1) > 0.5  # the two conventions disagree here
    harmonic = 2 * MACRO_A[0] * MACRO_A[1] / (MACRO_A[0] + MACRO_A[1])
    assert abs(report.macro_f1 - harmonic) <= 0.01
    verdict(2, "macro F1 is harmonic(macro P, macro R), not the mean of class F1s")


def test_criterion_03_sif_weighting():
    assert sif_weight(0.0, 0.1) == 1.0
    assert sif_weight(0.1, 0.1) == 0.5
    table = EmbeddingTable(
        dim=3,
        vectors={
            "sol": np.array([1.0, 0.0, 2.0]),
            "mar": np.array([0.0, 3.0, 1.0]),
            "luna": np.array([2.0, 1.0, 0.0]),
        },
    )
    unigram = UnigramModel(counts={"sol": 50, "mar": 5, "luna": 1}, total=100)
    tokens = ["sol", "mar", "luna", "sol"]
    huge_a = sif_embed(tokens, table, unigram, SifConfig(a=1e9))
    plain_mean = np.mean([table.vectors[t] for t in tokens], axis=0)
    assert np.linalg.norm(huge_a - plain_mean) <= 1e-6 * np.linalg.norm(plain_mean)
    assert np.array_equal(sif_embed([], table, unigram, SifConfig(a=0.1)), np.zeros(3))
    verdict(3, "SIF weight formula, huge-a limit, and empty-input zero vector")


TWEET_A = (
    "@USER fue genial debemos organizar más cosas así sin necesidad "
    "de que nadie abandone el país"
)
TWEET_B = (
    "@USER me alegro mucho ! ! es importante darnos cuenta del gran valor "
    "que podemos aportar y encontrar nuestra misión"
)


def _crossover_fixture() -> Dataset:
    texts = {
        Label.P: ["me encanta este lugar", "qué día tan bueno hoy", "todo salió muy bien",
                  "gran partido esta noche", "la comida estuvo rica", "feliz con el resultado"],
        Label.N: ["no me gustó nada esto", "qué mal servicio otra vez",
                  "todo salió terrible hoy", "pésima organización del evento"],
        Label.NEU: ["está bien pero podría mejorar", "no sé qué pensar de esto",
                    "tiene cosas buenas y malas"],
        Label.NONE: ["mañana hay reunión a las diez", "el informe sale el lunes",
                     "la oficina abre a las nueve"],
    }
    tweets = []
    counter = 0
    for label, rows in texts.items():
        for text in rows:
            counter += 1
            tweets.append(Tweet(f"t{counter}", text, label))
    return Dataset("fixture", "train", tweets)


def test_criterion_04_crossover_properties_and_worked_example():
    rng = random.Random(123)
    for _ in range(1000):
        tokens = [f"w{rng.randrange(50)}" for _ in range(rng.randint(1, 40))]
        first, second = split_halves(tokens)
        assert first + second == tokens

    dataset = _crossover_fixture()
    before = Counter(t.label for t in dataset.tweets)
    for factor in (4, 8, 12, 16, 20):
        grown = crossover_augment(dataset, CrossoverConfig(factor=factor, seed=99))
        assert len(grown) == factor * len(dataset)
        after = Counter(t.label for t in grown.tweets)
        assert after == {label: factor * count for label, count in before.items()}

    child = crossover_pair(TWEET_A.split(), TWEET_B.split())
    assert " ".join(child) == (
        "@USER fue genial debemos organizar más cosas así "
        "del gran valor que podemos aportar y encontrar nuestra misión"
    )
    verdict(4, "half-split identity, exact size/label scaling, worked crossover example")


def _stable_objective(X, signs, weights, C, theta):
    w, b = theta[:-1], theta[-1]
    t = signs * (X @ w + b)
    # log(1 + exp(-t)) written via |t| so huge margins cannot overflow.
    losses = np.log1p(np.exp(-np.abs(t))) + np.maximum(-t, 0.0)
    return 0.5 * float(w @ w) + C * float(weights @ losses)


def _stable_gradient(X, signs, weights, C, theta):
    w, b = theta[:-1], theta[-1]
    t = signs * (X @ w + b)
    exp_neg = np.exp(-np.abs(t))
    sigma_neg = np.where(t >= 0, exp_neg / (1 + exp_neg), 1 / (1 + exp_neg))
    coeff = -C * weights * signs * sigma_neg
    return np.concatenate([w + X.T @ coeff, [coeff.sum()]])


def _reference_minimize(X, signs, weights, C, iters=30000):
    """Plain gradient descent with backtracking, run to a tight gradient norm."""
    theta = np.zeros(X.shape[1] + 1)
    step = 1.0
    value = _stable_objective(X, signs, weights, C, theta)
    for _ in range(iters):
        grad = _stable_gradient(X, signs, weights, C, theta)
        if np.linalg.norm(grad) < 1e-9:
            break
        while step > 1e-18:
            candidate = theta - step * grad
            new_value = _stable_objective(X, signs, weights, C, candidate)
            if new_value <= value - 0.5 * step * float(grad @ grad):
                break
            step /= 2
        theta = theta - step * grad
        value = _stable_objective(X, signs, weights, C, theta)
        step = min(step * 2, 1e4)
    return theta, value


def test_criterion_05_logistic_regression_optimum_and_gradient():
    started = time.perf_counter()
    rng = np.random.default_rng(11)
    for _ in range(50):
        X = rng.normal(size=(6, 3))
        signs = rng.choice([-1.0, 1.0], size=6)
        weights = rng.uniform(0.5, 2.0, size=6)
        theta = rng.normal(size=4)
        fun = binary_objective(X, signs, weights, C=0.8)
        _, grad = fun(theta)
        fd = np.empty_like(theta)
        h = 1e-6
        for j in range(len(theta)):
            bump = np.zeros_like(theta)
            bump[j] = h
            fd[j] = (fun(theta + bump)[0] - fun(theta - bump)[0]) / (2 * h)
        assert np.linalg.norm(grad - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))

    X = rng.normal(size=(30, 4))
    labels = [Label.P if x[0] + 0.3 * x[1] > 0 else Label.N for x in X]
    tiny_c = train_lr(X, labels, LrConfig(C=1e-9, tol=1e-10))
    for row in tiny_c.weights:
        assert np.linalg.norm(row) <= 1e-6

    X_sep = np.array([[2.0, 0.0], [3.0, 1.0], [2.5, -0.5], [-2.0, 0.0], [-3.0, 1.0], [-2.5, 0.5]])
    y_sep = [Label.P, Label.P, Label.P, Label.N, Label.N, Label.N]
    separable = train_lr(X_sep, y_sep, LrConfig(C=1e4, tol=1e-9, max_iter=5000))
    assert all(predict(separable, x) == label for x, label in zip(X_sep, y_sep))

    X20 = rng.normal(size=(20, 3))
    y20 = [Label.P if rng.random() < 0.5 else Label.N for _ in range(20)]
    if len(set(y20)) < 2:
        y20[0] = Label.P if y20[1] is Label.N else Label.N
    config = LrConfig(C=0.7, tol=1e-9, max_iter=5000)
    model = train_lr(X20, y20, config)
    ones = np.ones(20)
    for k, cls in enumerate(model.classes):
        signs = np.array([1.0 if label is cls else -1.0 for label in y20])
        theta_model = np.concatenate([model.weights[k], [model.biases[k]]])
        value_model = _stable_objective(X20, signs, ones, 0.7, theta_model)
        _, value_ref = _reference_minimize(X20, signs, ones, 0.7)
        assert abs(value_model - value_ref) <= 1e-6 * max(1.0, abs(value_ref))
    assert time.perf_counter() - started < 10.0
    verdict(5, "gradient check, C->0 shrinkage, separable fit, independent optimum match")


def test_criterion_06_class_weights_and_c_scaling():
    weights = compute_class_weights({Label.P: 30, Label.N: 10}, "balanced")
    assert abs(weights[Label.P] - 0.6667) <= 1e-4
    assert weights[Label.N] == 2.0

    rng = np.random.default_rng(21)
    X = rng.normal(size=(24, 3))
    labels = [Label.P if x[0] > -0.2 else Label.N for x in X]
    sample = rng.uniform(0.5, 1.5, size=24)
    lam = 3.0
    scaled_weights = train_lr(
        X, labels, LrConfig(C=0.4, tol=1e-10, max_iter=5000), sample_weight=sample * lam
    )
    scaled_c = train_lr(
        X, labels, LrConfig(C=0.4 * lam, tol=1e-10, max_iter=5000), sample_weight=sample
    )
    assert np.allclose(scaled_weights.weights, scaled_c.weights, atol=1e-5)
    assert np.allclose(scaled_weights.biases, scaled_c.biases, atol=1e-5)
    verdict(6, "balanced weights formula and weight/C scaling equivalence")


def _tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_criterion_07_bagging_determinism_and_identity_bootstrap(tmp_path):
    rng = np.random.default_rng(31)
    X = rng.normal(size=(40, 3))
    labels = [Label.P if x[0] > 0 else Label.N for x in X]
    lr_config = LrConfig(C=1.0, tol=1e-8)
    bag_config = BaggingConfig(n_estimators=4, seed=3)
    layout = [("bow", 3)]

    first = train_bagging(X, labels, lr_config, bag_config)
    second = train_bagging(X, labels, lr_config, bag_config)
    save_model(first, tmp_path / "a", layout)
    save_model(second, tmp_path / "b", layout)
    assert _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "b")

    identity = train_bagging(
        X, labels, lr_config, BaggingConfig(n_estimators=1, seed=3),
        bootstrap_fn=lambda k, n, rng: np.arange(n),
    )
    base = train_lr(X, labels, lr_config)
    assert np.array_equal(identity.members[0].weights, base.weights)
    assert np.array_equal(identity.members[0].biases, base.biases)
    verdict(7, "seeded bagging is byte-identical; identity bootstrap equals plain LR")


def test_criterion_08_tfidf_smoothing_and_normalization():
    docs = [
        extract_word_ngrams(["perro", "gato"], 1),
        extract_word_ngrams(["perro", "sol"], 1),
        extract_word_ngrams(["perro", "mar", "mar"], 1),
    ]
    vocabulary = fit_vocabulary(docs)
    rare = [vocabulary.idf[vocabulary.index["gato"]],
            vocabulary.idf[vocabulary.index["sol"]],
            vocabulary.idf[vocabulary.index["mar"]]]
    expected = np.log(4 / 2) + 1  # one matching document out of three, smoothed
    for value in rare:
        assert abs(value - 1.6931) <= 1e-4
        assert abs(value - expected) <= 1e-4
    config = NgramConfig(word_n_max=1, char_n_max=1, tfidf=True)
    for counts in docs:
        vector = transform(counts, vocabulary, config)
        norm = np.linalg.norm(vector.to_dense())
        assert abs(norm - 1.0) <= 1e-9
    verdict(8, "smoothed idf constant and unit-norm tf-idf vectors")


def _reference_fnv(data: bytes) -> int:
    return reduce(lambda acc, byte: ((acc ^ byte) * 16777619) & 0xFFFFFFFF, data, 2166136261)


def test_criterion_09_subword_fallback_for_unknown_words():
    rng = random.Random(5)
    buckets = {b: np.array([float(b % 7), float(b % 3)]) for b in range(0, 64, 2)}
    table = EmbeddingTable(
        dim=2,
        vectors={"conocida": np.array([4.0, 5.0])},
        subword=SubwordTable(min_n=3, max_n=5, bucket_count=64, buckets=buckets),
    )
    assert np.array_equal(word_vector(table, "conocida"), np.array([4.0, 5.0]))

    for _ in range(20):
        word = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(4, 9)))
        wrapped = f"<{word}>"
        grams = [
            wrapped[i : i + n]
            for n in range(3, 6)
            for i in range(len(wrapped) - n + 1)
        ]
        total = np.zeros(2)
        for gram in grams:
            bucket = _reference_fnv(gram.encode("utf-8")) % 64
            if bucket in buckets:
                total += buckets[bucket]
        expected = total / len(grams)
        assert np.allclose(word_vector(table, word), expected, atol=1e-12)

    bare = EmbeddingTable(dim=2, vectors={"conocida": np.array([4.0, 5.0])})
    assert np.array_equal(word_vector(bare, "desconocida"), np.zeros(2))
    verdict(9, "exact lookup, hash-bucket OOV average vs brute force, zero without subwords")


def test_criterion_10_common_component_removal():
    rng = np.random.default_rng(41)
    for _ in range(50):
        matrix = rng.normal(size=(5, 3))
        cleaned = remove_common_component(matrix)
        _, _, vt = np.linalg.svd(matrix, full_matrices=False)
        direction = vt[0]
        assert np.max(np.abs(cleaned @ direction)) <= 1e-9

    base = rng.normal(size=3)
    rank_one = np.outer(rng.uniform(0.5, 2.0, size=5), base)
    assert np.max(np.abs(remove_common_component(rank_one))) <= 1e-9
    verdict(10, "rows orthogonal to the reference leading direction; rank-1 maps to zero")


def test_criterion_11_end_to_end_beats_the_baseline_deterministically(full_corpus, tmp_path):
    started = time.perf_counter()
    config = ExperimentConfig.from_json(full_corpus / "config.json")
    assert config.augment.translation is not None
    assert config.augment.crossover is not None and config.augment.crossover.factor == 4
    assert config.model.bagging is not None and config.model.bagging.n_estimators == 5

    result = run_experiment(config, tmp_path / "run1")
    golds = [t.label for t in load_tsv(full_corpus / "dev.tsv", split="dev").tweets]
    top = Counter(golds).most_common(1)[0][0]
    baseline = report_from_confusion(confusion(golds, [top] * len(golds)))
    assert result.dev_report.macro_f1 >= baseline.macro_f1 + 10.0

    again = run_experiment(config, tmp_path / "run2")
    assert _tree_digest(tmp_path / "run1") == _tree_digest(tmp_path / "run2")
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    verdict(11, f"full pipeline beats the majority baseline and reruns byte-identical ({elapsed:.1f}s)")


def test_criterion_12_ablation_emits_every_row(mini_corpus, tmp_path):
    config = ExperimentConfig.from_json(mini_corpus / "config.json")
    rows = run_ablation(config, tmp_path / "ablation")
    assert [row["variant"] for row in rows] == ["full-system", *ABLATIONS]
    assert all("skipped" not in row for row in rows)

    standalone = run_experiment(config, tmp_path / "standalone")
    assert rows[0]["accuracy"] == standalone.dev_report.accuracy
    assert rows[0]["macro_f1"] == standalone.dev_report.macro_f1
    verdict(12, "all seven removals plus a full-system row matching the standalone run")
