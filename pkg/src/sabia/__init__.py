"""Five-class opioid-behavior text classification toolkit."""

from .annotate import (
    AnnotationSet,
    agreement_report,
    cohen_kappa,
    load_annotations,
    majority_vote,
)
from .corpus import (
    AnnotatedPost,
    Corpus,
    CorpusStats,
    Label,
    SplitSpec,
    compute_stats,
    load_corpus,
    save_corpus,
    stratified_split,
)
from .evaluate import MetricsReport, compare, evaluate
from .features import EmbeddingTable, TfidfModel, fit_tfidf, load_embeddings, transform_tfidf
from .ingest import IngestConfig, collect
from .lexicon import Lexicon, default_lexicon, load_lexicon, match_keywords, normalize_text
from .model import (
    SabiaConfig,
    SabiaModel,
    explain,
    fine_tune,
    predict_sabia,
    train_encoder_baseline,
)
from .preprocess import PreprocessConfig, clean, detect_english
from .synth import generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AnnotatedPost",
    "AnnotationSet",
    "Corpus",
    "CorpusStats",
    "EmbeddingTable",
    "IngestConfig",
    "Label",
    "Lexicon",
    "MetricsReport",
    "PreprocessConfig",
    "SabiaConfig",
    "SabiaModel",
    "SplitSpec",
    "TfidfModel",
    "agreement_report",
    "clean",
    "cohen_kappa",
    "collect",
    "compare",
    "compute_stats",
    "default_lexicon",
    "detect_english",
    "evaluate",
    "explain",
    "fine_tune",
    "fit_tfidf",
    "generate_synthetic",
    "load_annotations",
    "load_corpus",
    "load_embeddings",
    "load_lexicon",
    "majority_vote",
    "match_keywords",
    "normalize_text",
    "predict_sabia",
    "save_corpus",
    "stratified_split",
    "train_encoder_baseline",
    "transform_tfidf",
]
