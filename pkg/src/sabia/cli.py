"""Single executable exposing the whole pipeline as subcommands.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training/runtime error.
A key=value config file can pre-set any subcommand flag ("train.epochs = 8");
explicit flags win, unknown keys are rejected, and relative paths in the file
resolve against the file's directory. Every artifact-producing run writes an
effective-config snapshot next to its outputs, which can be passed back via
--config to reproduce the run.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import pickle
import sys
from pathlib import Path

from . import annotate as annotate_mod
from . import baselines, features, ingest, model as model_mod, neural
from .evaluate import (
    EvalError,
    MetricsReport,
    compare as compare_reports,
    confusion_to_csv,
    evaluate as evaluate_metrics,
    render_heatmap,
)
from .corpus import (
    Corpus,
    CorpusError,
    Label,
    SplitSpec,
    compute_stats,
    load_corpus,
    save_corpus,
    stratified_split,
)
from .annotate import AnnotationError
from .features import FeatureError
from .ingest import IngestError
from .lexicon import LexiconError, default_lexicon, load_lexicon
from .model import TrainingError
from .preprocess import PreprocessConfig, clean, detect_english
from .synth import generate_synthetic

log = logging.getLogger("sabia")

MODEL_CHOICES = ("logreg", "gboost", "forest", "svm", "tree", "cnn", "bilstm", "encoder", "sabia")
CLASSICAL_BY_CLI = {"logreg": "logreg", "gboost": "gboost", "forest": "forest",
                    "svm": "svm_rbf", "tree": "tree"}

#: Learning rate substituted for sabia/encoder training when the tiny test
#: encoder is selected and no explicit rate is given; the recorded default of
#: 2e-5 assumes a pretrained encoder and barely moves a random-init one.
TINY_DEFAULT_LR = 1e-3

DATA_ERRORS = (
    CorpusError,
    LexiconError,
    FeatureError,
    AnnotationError,
    EvalError,
    IngestError,
    TrainingError,
    baselines.ClassicalError,
    neural.NeuralError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    UnicodeDecodeError,
    json.JSONDecodeError,
)

#: Option dests holding filesystem paths; config-file values for these are
#: resolved relative to the config file.
PATH_DESTS = {
    "input", "out", "out_dir", "train", "test", "dev", "fixture", "lexicon",
    "embeddings", "model_dir", "train_out", "test_out", "unresolved_out",
    "adjudicated", "export", "reports", "json_out",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage errors to 1
        raise UsageError(message)


def _build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="sabia", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="global seed (default 80)")
    parser.add_argument("--config", type=Path, default=None, help="key=value config file")
    parser.add_argument("--out-dir", dest="out_dir", type=Path, default=None,
                        help="directory for artifacts (default .)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="collect posts from a fixture dump or the live API")
    p.add_argument("--source", choices=("fixture", "live"), default=None)
    p.add_argument("--fixture", type=Path, default=None, help="JSONL dump for fixture mode")
    p.add_argument("--subreddits", default=None, help="comma-separated subreddit names")
    p.add_argument("--window-start", dest="window_start", type=int, default=None)
    p.add_argument("--window-end", dest="window_end", type=int, default=None)
    p.add_argument("--rate-limit", dest="rate_limit", type=int, default=None)
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None, help="output corpus JSONL")

    p = sub.add_parser("lexicon", help="inspect, match, or export the keyword dictionary")
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--match", default=None, help="print keyword matches for a text")
    p.add_argument("--normalize", default=None, help="print the normalized form of a text")
    p.add_argument("--export", type=Path, default=None, help="write the starter lexicon CSV")

    p = sub.add_parser("clean", help="run the cleaning chain over a corpus")
    p.add_argument("--in", dest="input", type=Path, default=None, required=False)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--english-threshold", dest="english_threshold", type=float, default=None,
                   help="drop posts below this function-word fraction (0 disables)")

    p = sub.add_parser("stats", help="corpus statistics JSON")
    p.add_argument("--in", dest="input", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("split", help="stratified train/test split")
    p.add_argument("--in", dest="input", type=Path, default=None)
    p.add_argument("--train-out", dest="train_out", type=Path, default=None)
    p.add_argument("--test-out", dest="test_out", type=Path, default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=None)
    p.add_argument("--no-stratify", dest="stratified", action="store_false", default=None)

    p = sub.add_parser("synth", help="generate the synthetic desk-scale corpus")
    p.add_argument("--per-class", dest="per_class", type=int, default=None,
                   help="posts per class (default 40)")
    p.add_argument("--counts", default=None, help='per-label counts, e.g. "Dealer=40,NonUser=10"')
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("train", help="train a model and write checkpoint + metrics")
    p.add_argument("--model", choices=MODEL_CHOICES, default=None, required=False)
    p.add_argument("--train", type=Path, default=None, help="labeled training corpus")
    p.add_argument("--dev", type=Path, default=None, help="optional labeled dev corpus")
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--embeddings", type=Path, default=None,
                   help="embedding file for cnn/bilstm (default: bundled toy table)")
    p.add_argument("--embedding-dim", dest="embedding_dim", type=int, default=None)
    p.add_argument("--encoder", default=None,
                   help='encoder checkpoint for sabia/encoder (default "tiny")')
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--mask-pooling", dest="mask_pooling", action="store_true", default=None)
    p.add_argument("--class-weights", dest="class_weights", action="store_true", default=None)

    p = sub.add_parser("eval", help="evaluate a trained model on a labeled corpus")
    p.add_argument("--model-dir", dest="model_dir", type=Path, default=None)
    p.add_argument("--test", type=Path, default=None)
    p.add_argument("--name", default=None, help="model name recorded in the report")
    p.add_argument("--heatmap", action="store_true", default=None)

    p = sub.add_parser("predict", help="label new posts with a trained model")
    p.add_argument("--model-dir", dest="model_dir", type=Path, default=None)
    p.add_argument("--in", dest="input", type=Path, default=None)
    p.add_argument("--text", default=None, help="classify a single text instead of a corpus")
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("compare", help="rank evaluation reports and compute improvement")
    p.add_argument("reports", nargs="+", type=Path, help="report JSON files")
    p.add_argument("--baseline", default=None, help="baseline model name")
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("kappa", help="pairwise inter-annotator agreement")
    p.add_argument("annotations", type=Path, help="CSV: id,annotator_1..annotator_k")
    p.add_argument("--json", dest="json_out", type=Path, default=None)

    p = sub.add_parser("resolve", help="majority-vote label resolution")
    p.add_argument("annotations", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--unresolved-out", dest="unresolved_out", type=Path, default=None)
    p.add_argument("--adjudicated", type=Path, default=None, help="id,label merge file")

    p = sub.add_parser("explain", help="top-k token attributions for a text")
    p.add_argument("--model-dir", dest="model_dir", type=Path, default=None)
    p.add_argument("--text", default=None)
    p.add_argument("-k", dest="k", type=int, default=None)

    return parser, dict(sub.choices)


# Defaults applied after merging CLI flags and config-file values.
BUILTIN_DEFAULTS = {
    ("", "seed"): 80,
    ("", "out_dir"): Path("."),
    ("ingest", "source"): "fixture",
    ("ingest", "subreddits"): "opiates,chronicpain,OpiatesRecovery,addiction",
    ("ingest", "window_start"): ingest.IngestConfig.window_start,
    ("ingest", "window_end"): ingest.IngestConfig.window_end,
    ("ingest", "rate_limit"): 60,
    ("ingest", "out"): Path("collected.jsonl"),
    ("clean", "english_threshold"): 0.10,
    ("clean", "out"): Path("cleaned.jsonl"),
    ("stats", "out"): Path("stats.json"),
    ("split", "train_fraction"): 0.8,
    ("split", "stratified"): True,
    ("split", "train_out"): Path("train.jsonl"),
    ("split", "test_out"): Path("test.jsonl"),
    ("synth", "per_class"): 40,
    ("synth", "out"): Path("synthetic.jsonl"),
    ("train", "encoder"): model_mod.TINY_CHECKPOINT,
    ("train", "embedding_dim"): 50,
    ("eval", "name"): None,
    ("explain", "k"): 10,
}


def _parse_config_file(path: Path) -> dict[tuple[str, str], object]:
    """Read "section.key = value" lines; values are JSON literals when they
    parse, raw strings otherwise. Paths resolve against the file's parent."""
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    values: dict[tuple[str, str], object] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if "." in key:
            section, dest = key.split(".", 1)
        else:
            section, dest = "", key
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        if dest in PATH_DESTS and isinstance(value, str):
            value = (path.parent / value).resolve()
        values[(section, dest.replace("-", "_"))] = value
    return values


def _known_dests(subparsers: dict[str, _Parser]) -> dict[str, set[str]]:
    known = {"": {"seed", "out_dir", "config"}}
    for name, subparser in subparsers.items():
        known[name] = {a.dest for a in subparser._actions if a.dest != "help"}
    return known


class Options:
    """Resolved option values: CLI flag > config file > builtin default."""

    def __init__(self, args: argparse.Namespace, config: dict, command: str):
        self._args = args
        self._config = config
        self._command = command
        self.resolved: dict[str, object] = {}

    def positional(self, dest: str):
        return getattr(self._args, dest)

    def get(self, dest: str, default=None):
        value = getattr(self._args, dest, None)
        if value is None:
            value = self._config.get((self._command, dest))
        if value is None:
            value = self._config.get(("", dest))
        if value is None:
            value = BUILTIN_DEFAULTS.get((self._command, dest))
        if value is None:
            value = BUILTIN_DEFAULTS.get(("", dest))
        if value is None:
            value = default
        if dest in PATH_DESTS and isinstance(value, str):
            value = Path(value)
        self.resolved[dest] = value
        return value

    def require(self, dest: str, flag: str):
        value = self.get(dest)
        if value is None:
            raise UsageError(f"missing required option {flag}")
        return value

    def snapshot(self, out_dir: Path) -> None:
        """Write the effective configuration next to the run's outputs."""
        lines = [f"# effective configuration for '{self._command}'"]
        for dest in sorted(self.resolved):
            value = self.resolved[dest]
            if dest == "config" or value is None:
                continue
            if isinstance(value, Path):
                value = str(Path(value).resolve())
            if isinstance(value, str):
                rendered = value
            else:
                rendered = json.dumps(value)
            section = self._command if dest not in ("seed", "out_dir") else ""
            key = f"{section}.{dest}" if section else dest
            lines.append(f"{key} = {rendered}")
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "effective-config.txt").write_text("\n".join(lines) + "\n")


def _load_lexicon_opt(opts: Options):
    path = opts.get("lexicon")
    return load_lexicon(path) if path else default_lexicon()


def _out_path(opts: Options, dest: str) -> Path:
    out_dir = Path(opts.get("out_dir"))
    value = opts.get(dest)
    path = Path(value)
    if not path.is_absolute():
        path = out_dir / path
    path.parent.mkdir(parents=True, exist_ok=True)
    opts.resolved[dest] = path.resolve()  # snapshot records the final location
    return path


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_ingest(opts: Options) -> int:
    lexicon = _load_lexicon_opt(opts)
    source = opts.get("source")
    subreddits = tuple(s.strip() for s in str(opts.get("subreddits")).split(",") if s.strip())
    credentials = None
    if source == "live":
        client_id = os.environ.get("REDDIT_CLIENT_ID")
        client_secret = os.environ.get("REDDIT_CLIENT_SECRET")
        if not client_id or not client_secret:
            raise UsageError(
                "live mode needs REDDIT_CLIENT_ID and REDDIT_CLIENT_SECRET in the environment"
            )
        credentials = (client_id, client_secret)
        fixture = None
    else:
        fixture = opts.require("fixture", "--fixture")
    config = ingest.IngestConfig(
        subreddits=subreddits,
        window_start=int(opts.get("window_start")),
        window_end=int(opts.get("window_end")),
        credentials=credentials,
        rate_limit=int(opts.get("rate_limit")),
        source=source,
        fixture_path=str(fixture) if fixture else None,
    )
    corpus = ingest.collect(config, lexicon)
    out = _out_path(opts, "out")
    save_corpus(corpus, out)
    log.info("collected %d posts -> %s", len(corpus), out)
    opts.snapshot(out.parent)
    return 0


def _cmd_lexicon(opts: Options) -> int:
    lexicon = _load_lexicon_opt(opts)
    match_text = opts.get("match")
    normalize_text_arg = opts.get("normalize")
    export = opts.get("export")
    if export:
        export = Path(export)
        export.parent.mkdir(parents=True, exist_ok=True)
        rows = ["surface,canonical,kind"]
        rows += [f"{e.surface},{e.canonical},{e.kind}" for e in lexicon.entries]
        export.write_text("\n".join(rows) + "\n")
        log.info("wrote %d entries -> %s", len(lexicon.entries), export)
    if match_text is not None:
        for m in lexicon.match_keywords(match_text):
            print(f"{m.offset}\t{m.kind}\t{m.surface}")
    if normalize_text_arg is not None:
        print(lexicon.normalize_text(normalize_text_arg))
    if export is None and match_text is None and normalize_text_arg is None:
        kinds: dict[str, int] = {}
        for e in lexicon.entries:
            kinds[e.kind] = kinds.get(e.kind, 0) + 1
        print(f"{len(lexicon.entries)} entries: " + ", ".join(
            f"{k}={n}" for k, n in sorted(kinds.items())))
    return 0


def _cmd_clean(opts: Options) -> int:
    lexicon = _load_lexicon_opt(opts)
    corpus = load_corpus(opts.require("input", "--in"))
    threshold = float(opts.get("english_threshold"))
    out = _out_path(opts, "out")
    kept = 0
    with out.open("w", encoding="utf-8") as f:
        for post in corpus:
            if threshold > 0 and not detect_english(post.text, threshold):
                continue
            record = {"id": post.id, "tokens": clean(post.text, lexicon)}
            if post.label is not None:
                record["label"] = post.label.canonical_name
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
            kept += 1
    log.info("cleaned %d/%d posts -> %s", kept, len(corpus), out)
    opts.snapshot(out.parent)
    return 0


def _cmd_stats(opts: Options) -> int:
    corpus = load_corpus(opts.require("input", "--in"))
    stats = compute_stats(corpus)
    payload = json.dumps(stats.to_dict(), indent=2, sort_keys=True)
    out = _out_path(opts, "out")
    out.write_text(payload + "\n")
    print(payload)
    opts.snapshot(out.parent)
    return 0


def _cmd_split(opts: Options) -> int:
    corpus = load_corpus(opts.require("input", "--in"))
    spec = SplitSpec(
        train_fraction=float(opts.get("train_fraction")),
        seed=int(opts.get("seed")),
        stratified=bool(opts.get("stratified")),
    )
    train, test = stratified_split(corpus, spec)
    train_out = _out_path(opts, "train_out")
    test_out = _out_path(opts, "test_out")
    save_corpus(train, train_out)
    save_corpus(test, test_out)
    log.info("split %d -> %d train / %d test", len(corpus), len(train), len(test))
    opts.snapshot(train_out.parent)
    return 0


def _parse_counts(raw: str) -> dict[Label, int]:
    counts = {}
    for part in raw.split(","):
        name, _, value = part.partition("=")
        if not value:
            raise UsageError(f"bad --counts entry: {part!r}")
        counts[Label.from_name(name.strip())] = int(value)
    return counts


def _cmd_synth(opts: Options) -> int:
    lexicon = _load_lexicon_opt(opts)
    raw_counts = opts.get("counts")
    if raw_counts:
        counts = _parse_counts(str(raw_counts))
    else:
        counts = {lab: int(opts.get("per_class")) for lab in Label}
    corpus = generate_synthetic(counts, lexicon, seed=int(opts.get("seed")))
    out = _out_path(opts, "out")
    save_corpus(corpus, out)
    log.info("generated %d posts -> %s", len(corpus), out)
    opts.snapshot(out.parent)
    return 0


def _train_corpus_docs(corpus: Corpus, lexicon) -> list[list[str]]:
    return [clean(p.text, lexicon) for p in corpus]


def _cmd_train(opts: Options) -> int:
    name = opts.require("model", "--model")
    train_path = opts.require("train", "--train")
    out_dir = Path(opts.get("out_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(train_path)
    dev_path = opts.get("dev")
    dev = load_corpus(dev_path) if dev_path else None
    lexicon = _load_lexicon_opt(opts)
    seed = int(opts.get("seed"))

    info: dict[str, object] = {"model": name}
    history = None

    if name in CLASSICAL_BY_CLI:
        docs = _train_corpus_docs(corpus, lexicon)
        tfidf = features.fit_tfidf(docs)
        X = features.transform_matrix(tfidf, docs)
        config = baselines.ClassicalConfig(algorithm=CLASSICAL_BY_CLI[name], seed=seed)
        clf = baselines.train_classical(config, X, corpus.labels())
        baselines.save_classical(clf, out_dir / "classifier.pkl")
        with (out_dir / "tfidf.pkl").open("wb") as f:
            pickle.dump(tfidf, f)
        info["kind"] = "classical"
        predictions = baselines.predict(clf, X)
    elif name in ("cnn", "bilstm"):
        emb_path = opts.get("embeddings") or features.toy_embeddings_path()
        dim = int(opts.get("embedding_dim"))
        table = features.load_embeddings(emb_path, dim=dim)
        config = neural.NeuralConfig(
            arch=name,
            embedding=table,
            learning_rate=float(opts.get("learning_rate") or 0.1),
            epochs=int(opts.get("epochs") or 5),
            batch_size=int(opts.get("batch_size") or 32),
            max_len=int(opts.get("max_len") or 128),
            seed=seed,
        )
        nm = neural.train_neural(config, corpus, lexicon)
        nm.embedding_source = str(Path(emb_path).resolve())
        neural.save_neural(nm, out_dir / "weights.pt")
        info.update(kind="neural", embeddings=nm.embedding_source, embedding_dim=dim)
        predictions = neural.predict_neural(nm, corpus.posts, lexicon)
    else:  # sabia / encoder
        checkpoint = str(opts.get("encoder"))
        lr = opts.get("learning_rate")
        if lr is None:
            lr = TINY_DEFAULT_LR if checkpoint == model_mod.TINY_CHECKPOINT else 2e-5
        config = model_mod.SabiaConfig(
            checkpoint=checkpoint,
            learning_rate=float(lr),
            epochs=int(opts.get("epochs") or 4),
            batch_size=int(opts.get("batch_size") or 16),
            max_len=int(opts.get("max_len") or 128),
            mask_pooling=bool(opts.get("mask_pooling") or False),
            class_weights=bool(opts.get("class_weights") or False),
            seed=seed,
        )
        if name == "sabia":
            result = model_mod.fine_tune(config, corpus, dev)
        else:
            result = model_mod.train_encoder_baseline(config, corpus, dev)
        model_mod.save_checkpoint(result.model, out_dir / "checkpoint")
        info["kind"] = "sabia"
        history = result.loss_history
        predictions, _ = model_mod.predict_sabia(result.model, corpus.texts())

    report = evaluate_metrics(corpus.labels(), predictions)
    metrics = {"model": name, "split": "train", "report": report.to_dict()}
    if history is not None:
        metrics["loss_history"] = history
    (out_dir / "model_info.json").write_text(json.dumps(info, indent=2, sort_keys=True))
    (out_dir / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    log.info("trained %s: train accuracy %.4f -> %s", name, report.accuracy, out_dir)
    opts.snapshot(out_dir)
    return 0


def _load_trained(model_dir: Path, lexicon):
    info_path = model_dir / "model_info.json"
    if not info_path.exists():
        raise TrainingError(f"{model_dir}: missing model_info.json")
    info = json.loads(info_path.read_text())
    kind = info.get("kind")
    if kind == "classical":
        clf = baselines.load_classical(model_dir / "classifier.pkl")
        with (model_dir / "tfidf.pkl").open("rb") as f:
            tfidf = pickle.load(f)

        def predict_posts(posts):
            docs = [clean(p.text, lexicon) for p in posts]
            return baselines.predict(clf, features.transform_matrix(tfidf, docs))

        return info, predict_posts, None
    if kind == "neural":
        table = features.load_embeddings(info["embeddings"], dim=int(info["embedding_dim"]))
        nm = neural.load_neural(model_dir / "weights.pt", table)

        def predict_posts(posts):
            return neural.predict_neural(nm, posts, lexicon)

        return info, predict_posts, None
    if kind == "sabia":
        m = model_mod.load_checkpoint(model_dir / "checkpoint")

        def predict_posts(posts):
            labels, _ = model_mod.predict_sabia(m, [p.text for p in posts])
            return labels

        return info, predict_posts, m
    raise TrainingError(f"{model_dir}: unknown model kind {kind!r}")


def _cmd_eval(opts: Options) -> int:
    model_dir = Path(opts.require("model_dir", "--model-dir"))
    test_path = opts.require("test", "--test")
    lexicon = _load_lexicon_opt(opts)
    corpus = load_corpus(test_path)
    info, predict_posts, _ = _load_trained(model_dir, lexicon)
    predictions = predict_posts(corpus.posts)
    report = evaluate_metrics(corpus.labels(), predictions)

    out_dir = Path(opts.get("out_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    name = opts.get("name") or info["model"]
    payload = {"model": name, "split": "test", "report": report.to_dict()}
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    confusion_to_csv(report, out_dir / "confusion.csv")
    if opts.get("heatmap"):
        render_heatmap(report, out_dir / "heatmap.png")
    log.info("eval %s: accuracy %.4f -> %s", name, report.accuracy, out_dir / "report.json")
    print(json.dumps({"model": name, "accuracy": report.accuracy}, sort_keys=True))
    opts.snapshot(out_dir)
    return 0


def _cmd_predict(opts: Options) -> int:
    model_dir = Path(opts.require("model_dir", "--model-dir"))
    lexicon = _load_lexicon_opt(opts)
    info, predict_posts, sabia_model = _load_trained(model_dir, lexicon)
    text = opts.get("text")
    if text is not None:
        if sabia_model is not None:
            labels, probs = model_mod.predict_sabia(sabia_model, [str(text)])
            print(labels[0].canonical_name)
            print(json.dumps({lab.canonical_name: float(p)
                              for lab, p in zip(Label, probs[0])}, sort_keys=True))
        else:
            from .corpus import AnnotatedPost

            post = AnnotatedPost(id="cli-text", subreddit="", created_utc=0, text=str(text))
            print(predict_posts([post])[0].canonical_name)
        return 0
    corpus = load_corpus(opts.require("input", "--in"))
    out = _out_path(opts, "out") if opts.get("out") else None
    if sabia_model is not None:
        labels, probs = model_mod.predict_sabia(sabia_model, corpus.texts())
        rows = [
            {
                "id": p.id,
                "predicted": lab.canonical_name,
                "probabilities": {l.canonical_name: float(pr) for l, pr in zip(Label, prob)},
            }
            for p, lab, prob in zip(corpus.posts, labels, probs)
        ]
    else:
        labels = predict_posts(corpus.posts)
        rows = [{"id": p.id, "predicted": lab.canonical_name}
                for p, lab in zip(corpus.posts, labels)]
    lines = [json.dumps(r, sort_keys=True) for r in rows]
    if out:
        out.write_text("\n".join(lines) + "\n")
        log.info("predictions -> %s", out)
        opts.snapshot(out.parent)
    else:
        print("\n".join(lines))
    return 0


def _cmd_compare(opts: Options) -> int:
    reports = {}
    for path in opts.positional("reports"):
        payload = json.loads(Path(path).read_text())
        name = payload.get("model") or Path(path).stem
        reports[str(name)] = MetricsReport.from_dict(payload["report"])
    comparison = compare_reports(reports, baseline=opts.get("baseline"))
    print(comparison.format_table())
    out = opts.get("out")
    if out:
        out = _out_path(opts, "out")
        out.write_text(
            json.dumps(
                {
                    "ranking": [
                        {"model": n, "accuracy": a, "weighted_f1": f}
                        for n, a, f in comparison.rows
                    ],
                    "baseline": comparison.baseline,
                    "improvement_pct": comparison.improvement_pct,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        opts.snapshot(out.parent)
    return 0


def _cmd_kappa(opts: Options) -> int:
    annotation_set = annotate_mod.load_annotations(opts.positional("annotations"))
    report = annotate_mod.agreement_report(annotation_set)
    print(report.format_table())
    json_out = opts.get("json_out")
    if json_out:
        path = _out_path(opts, "json_out")
        path.write_text(
            json.dumps(
                {
                    "pairwise": {f"{a}|{b}": k for (a, b), k in report.pairwise.items()},
                    "mean_kappa": report.mean_kappa,
                    "n_disagreements": len(report.disagreements),
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
    return 0


def _cmd_resolve(opts: Options) -> int:
    annotation_set = annotate_mod.load_annotations(opts.positional("annotations"))
    result = annotate_mod.majority_vote(annotation_set)
    adjudicated = opts.get("adjudicated")
    if adjudicated:
        result = annotate_mod.merge_adjudications(result, adjudicated)
    out = opts.get("out")
    if out:
        annotate_mod.save_resolutions(result, _out_path(opts, "out"))
    unresolved_out = opts.get("unresolved_out")
    if unresolved_out:
        annotate_mod.save_unresolved(result, annotation_set, _out_path(opts, "unresolved_out"))
    print(f"resolved {len(result.resolved)}, unresolved {len(result.unresolved)}")
    for item_id in result.unresolved:
        votes = annotation_set.votes(item_id)
        rendered = ", ".join(
            f"{ann}={votes[ann].canonical_name}" for ann in annotation_set.annotators
        )
        print(f"unresolved: {item_id}: {rendered}")
    return 0


def _cmd_explain(opts: Options) -> int:
    model_dir = Path(opts.require("model_dir", "--model-dir"))
    text = opts.require("text", "--text")
    lexicon = _load_lexicon_opt(opts)
    info, _, sabia_model = _load_trained(model_dir, lexicon)
    if sabia_model is None:
        raise UsageError("explain requires an encoder-based model checkpoint")
    for token, score in model_mod.explain(sabia_model, str(text), int(opts.get("k"))):
        print(f"{token}\t{score:.6f}")
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "lexicon": _cmd_lexicon,
    "clean": _cmd_clean,
    "stats": _cmd_stats,
    "split": _cmd_split,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
    "compare": _cmd_compare,
    "kappa": _cmd_kappa,
    "resolve": _cmd_resolve,
    "explain": _cmd_explain,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    parser, subparsers = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        config: dict[tuple[str, str], object] = {}
        if args.config:
            config = _parse_config_file(Path(args.config))
            known = _known_dests(subparsers)
            for section, dest in config:
                if section not in known or (section and dest not in known[section]):
                    key = f"{section}.{dest}" if section else dest
                    raise UsageError(f"unknown config key: {key}")
        opts = Options(args, config, args.command)
        return _HANDLERS[args.command](opts)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except DATA_ERRORS as e:
        log.error("%s", e)
        return 2
    except Exception as e:  # training/runtime failures
        log.error("%s: %s", type(e).__name__, e)
        return 3


if __name__ == "__main__":
    sys.exit(main())
