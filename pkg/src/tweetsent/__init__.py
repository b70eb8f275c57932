"""Sentiment polarity pipeline for Spanish tweets.

The package covers the full path from TSV tweet files to a trained
classifier: tweet-aware preprocessing with negation marking, training-set
augmentation by two-way translation and instance crossover, bag-of-words,
bag-of-characters and weighted-average embedding features, one-vs-rest
logistic regression with optional bagging, and exact-arithmetic evaluation
reports.  ``run_experiment`` drives everything from a single JSON config;
the ``tweetsent`` CLI wraps it.
"""

from .augment import (
    CrossoverConfig,
    FixtureTranslator,
    RemoteTranslator,
    TranslationCache,
    TranslationConfig,
    TranslationError,
    TranslatorClient,
    crossover_augment,
    translation_augment,
)
from .corpus import LABELS, Dataset, Label, Tweet, label_distribution, load_tsv, merge, save_tsv
from .embeddings import (
    EmbeddingTable,
    SifConfig,
    UnigramModel,
    load_embeddings,
    load_unigram_counts,
    remove_common_component,
    sif_embed,
    word_vector,
)
from .experiment import (
    PRESET_NAMES,
    ExperimentConfig,
    IncompatibleAblation,
    StageError,
    ablation_variant,
    derive_seed,
    eval_file,
    grid_search,
    load_bundle,
    load_preset,
    predict_file,
    run_ablation,
    run_experiment,
)
from .metrics import ClassificationReport, ConfusionMatrix, confusion, evaluate, format_report, report_from_confusion
from .model import (
    BaggingConfig,
    BaggingEnsemble,
    LinearModel,
    LrConfig,
    compute_class_weights,
    load_model,
    predict,
    predict_proba,
    save_model,
    train_bagging,
    train_lr,
)
from .pipeline import FeatureBlocks, FeaturePipeline, load_pipeline, save_pipeline
from .preprocess import (
    PreprocessConfig,
    Token,
    TokenKind,
    basic_preprocess,
    handle_negation,
    join_tokens,
    semantic_preprocess,
    tokenize,
)
from .vectorize import NgramConfig, SparseVector, Vocabulary, fit_vocabulary, transform

__version__ = "0.1.0"

__all__ = [
    "BaggingConfig",
    "BaggingEnsemble",
    "ClassificationReport",
    "ConfusionMatrix",
    "CrossoverConfig",
    "Dataset",
    "EmbeddingTable",
    "ExperimentConfig",
    "FeatureBlocks",
    "FeaturePipeline",
    "FixtureTranslator",
    "IncompatibleAblation",
    "LABELS",
    "Label",
    "LinearModel",
    "LrConfig",
    "NgramConfig",
    "PRESET_NAMES",
    "PreprocessConfig",
    "RemoteTranslator",
    "SifConfig",
    "SparseVector",
    "StageError",
    "Token",
    "TokenKind",
    "TranslationCache",
    "TranslationConfig",
    "TranslationError",
    "TranslatorClient",
    "Tweet",
    "UnigramModel",
    "Vocabulary",
    "ablation_variant",
    "basic_preprocess",
    "compute_class_weights",
    "confusion",
    "crossover_augment",
    "derive_seed",
    "eval_file",
    "evaluate",
    "fit_vocabulary",
    "format_report",
    "grid_search",
    "handle_negation",
    "join_tokens",
    "label_distribution",
    "load_bundle",
    "load_embeddings",
    "load_model",
    "load_pipeline",
    "load_preset",
    "load_tsv",
    "load_unigram_counts",
    "merge",
    "predict",
    "predict_file",
    "predict_proba",
    "remove_common_component",
    "report_from_confusion",
    "run_ablation",
    "run_experiment",
    "save_model",
    "save_pipeline",
    "save_tsv",
    "semantic_preprocess",
    "sif_embed",
    "tokenize",
    "train_bagging",
    "train_lr",
    "transform",
    "translation_augment",
    "word_vector",
]
