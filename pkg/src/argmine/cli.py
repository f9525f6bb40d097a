"""Command-line entry point.

Exit codes: 0 success, 1 data error, 2 usage error. Every command writes a
``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .codecs import TASK_SCHEMES, encode_document, gold_unit_labels, unit_labels, unit_positions
from .corpus import (
    AnnotatedDocument,
    CorpusError,
    format_stats,
    corpus_stats,
    parse_html_essay,
    parse_persuade_table,
    read_brat_dir,
    read_corpus,
    write_corpus,
)
from .correspondence import collapse_to_words, corpus_correspondence, format_side_by_side, words_to_spans
from .encoder import ConfigError, ModelConfig, Params, init_params
from .ensemble import build_seed_plan, synthesize_labels, train_seed_models, train_universal, vote_table
from .metrics import MetricError, evaluate, evaluate_labels, format_report, scored_tags
from .render import export_html, load_palette
from .schemes import SchemeError, SchemeId, get_scheme
from .tokenizer import Vocab, VocabError, train_vocab
from .training import TrainConfig, TrainingError, predict_labels, train

log = logging.getLogger("argmine")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# --- config file --------------------------------------------------------------

_MODEL_KEYS = [f.name for f in dataclasses.fields(ModelConfig) if f.name != "num_labels"]
_TRAIN_KEYS = [f.name for f in dataclasses.fields(TrainConfig)]
CONFIG_KEYS = _TRAIN_KEYS + _MODEL_KEYS
_OPTIONAL_KEYS = {"task", "vocab_pieces"}


def _convert(key: str, value: str, field_type):
    if value.lower() in ("auto", "none") and key in ("mem_len", "ffn_width"):
        return None
    kind = str(field_type)
    try:
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError:
        raise UsageError(f"config key {key!r}: cannot read {value!r} as a number") from None
    return value


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Every model and training field is required."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    raw = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        if k not in CONFIG_KEYS and k not in _OPTIONAL_KEYS:
            raise UsageError(f"{path}:{n}: unknown config key {k!r}")
        raw[k] = v
    for k in CONFIG_KEYS:
        if k not in raw:
            raise UsageError(f"config is missing key {k!r}")
    types = {f.name: f.type for f in dataclasses.fields(ModelConfig) + dataclasses.fields(TrainConfig)}
    out = {k: _convert(k, v, types.get(k, "str")) for k, v in raw.items()}
    if "vocab_pieces" in out:
        out["vocab_pieces"] = int(out["vocab_pieces"])
    return out


def split_config(cfg: dict, task: str, seed: int | None):
    if cfg.get("task") and cfg["task"] != task:
        raise UsageError(f"config is for task {cfg['task']!r}, not {task!r}")
    train_kw = {k: cfg[k] for k in _TRAIN_KEYS}
    if seed is not None:
        train_kw["seed"] = seed
    model_kw = {k: cfg[k] for k in _MODEL_KEYS}
    model_kw["num_labels"] = TASK_SCHEMES[task].num_labels
    try:
        return ModelConfig(**model_kw), TrainConfig(**train_kw)
    except (ConfigError, TrainingError) as exc:
        raise UsageError(str(exc)) from None


# --- manifest ------------------------------------------------------------------

def _digest_outputs(out_dir: Path) -> dict[str, str]:
    digests = {}
    for p in sorted(out_dir.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            digests[p.relative_to(out_dir).as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
    return digests


def write_manifest(out_dir: Path, command: str, args: argparse.Namespace) -> dict:
    """Record the run; ``digest`` covers everything except the timestamp."""
    body = {
        "command": command,
        "config": str(args.config) if getattr(args, "config", None) else None,
        "inputs": [str(x) for x in (getattr(args, "inp", None), getattr(args, "gold", None),
                                     getattr(args, "checkpoint", None)) if x],
        "output": str(out_dir),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": _digest_outputs(out_dir),
    }
    body["digest"] = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
    body["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    (out_dir / "manifest.json").write_text(json.dumps(body, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return body


# --- helpers ---------------------------------------------------------------------

def _out_dir(path) -> Path:
    if path is None:
        raise UsageError("--out is required")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus(path) -> list[AnnotatedDocument]:
    if path is None:
        raise UsageError("--in is required")
    p = Path(path)
    if not (p / "index.json").exists():
        raise DataError(f"{p}: not a canonical corpus directory (no index.json)")
    try:
        return read_corpus(p)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{p}: {exc}") from None


def _task(args) -> str:
    if args.task not in TASK_SCHEMES:
        raise UsageError(f"--task must be one of {sorted(TASK_SCHEMES)}")
    return args.task


def _check_pairing(task: str, docs) -> None:
    expected = {"arrow_sentence": SchemeId.ARROW, "persuade_word": SchemeId.PERSUADE}.get(task)
    schemes = {d.source_scheme for d in docs}
    if expected is None:
        ok = schemes <= {SchemeId.AAE_COMPONENT, SchemeId.AAE_BIO, SchemeId.AAE_RELATION, SchemeId.AAE_STANCE}
    else:
        ok = schemes <= {expected}
    if not ok:
        raise UsageError(f"task {task} does not fit a corpus annotated with "
                         f"{sorted(s.value for s in schemes)}")


def _vocab_extra(vocab: Vocab) -> dict:
    return {"base": vocab.base, "merges": [list(m) for m in vocab.merges]}


def _vocab_from_extra(extra: dict) -> Vocab:
    try:
        return Vocab(extra["vocab"]["base"], extra["vocab"]["merges"])
    except KeyError:
        raise DataError("checkpoint carries no vocabulary") from None


def _load_checkpoint(path):
    if path is None:
        raise UsageError("--checkpoint is required")
    try:
        params, extra = Params.load(path)
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc.strerror}") from None
    except (ConfigError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None
    return params, extra


# --- commands --------------------------------------------------------------------

def cmd_ingest(args) -> int:
    src = Path(args.inp) if args.inp else None
    if src is None or not src.exists():
        raise DataError(f"unreadable input path: {args.inp}")
    fmt = args.format
    failures = []
    docs: list[AnnotatedDocument] = []
    if fmt == "brat":
        if not src.is_dir():
            raise DataError(f"{src}: brat input must be a directory")
        try:
            docs = read_brat_dir(src)
        except CorpusError as exc:
            failures.append(str(exc))
    elif fmt == "persuade":
        texts = None
        if args.texts:
            texts = {p.stem: p.read_text(encoding="utf-8") for p in sorted(Path(args.texts).glob("*.txt"))}
        try:
            docs = parse_persuade_table(src.read_text(encoding="utf-8"), texts, strict=not args.lenient)
        except CorpusError as exc:
            failures.append(f"{src}: {exc}")
    else:
        files = sorted(src.glob("*.html")) if src.is_dir() else [src]
        for f in files:
            try:
                docs.append(parse_html_essay(f.read_text(encoding="utf-8"), doc_id=f.stem))
            except (CorpusError, UnicodeDecodeError) as exc:
                failures.append(f"{f}: {exc}")
    if failures:
        for f in failures:
            print(f"error: {f}", file=sys.stderr)
        return EXIT_DATA
    if not docs:
        log.warning("no documents found in %s", src)
    out = _out_dir(args.out)
    write_corpus(docs, out / "corpus")
    splits = sorted({d.meta.get("split", "all") for d in docs})
    reports = []
    for split in splits:
        part = [d for d in docs if d.meta.get("split", "all") == split]
        report = corpus_stats(part)
        scheme = get_scheme(report.scheme) if report.scheme else None
        reports.append(f"[{split}] {len(part)} documents\n{format_stats(report, scheme)}")
    text = "\n\n".join(reports) if reports else "empty corpus"
    (out / "stats.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    write_manifest(out, "ingest", args)
    return EXIT_OK


def cmd_train(args) -> int:
    task = _task(args)
    if args.config is None:
        raise UsageError("--config is required")
    cfg = read_config(args.config)
    docs = _load_corpus(args.inp)
    _check_pairing(task, docs)
    train_docs = [d for d in docs if d.meta.get("split", "train") == "train"]
    if not train_docs:
        raise DataError("no training documents")
    model_cfg, train_cfg = split_config(cfg, task, args.seed)
    pieces = cfg.get("vocab_pieces", model_cfg.vocab_size - 8)
    try:
        vocab = train_vocab([d.text for d in train_docs], pieces)
    except VocabError as exc:
        raise UsageError(str(exc)) from None
    if len(vocab) > model_cfg.vocab_size:
        raise UsageError(f"vocabulary of {len(vocab)} exceeds vocab_size {model_cfg.vocab_size}")
    examples = [ex for d in train_docs for ex in encode_document(d, vocab, task)]
    if not examples:
        raise DataError("training corpus yields no examples")
    out = _out_dir(args.out)
    params = init_params(model_cfg, seed=train_cfg.seed)
    result = train(params, examples, train_cfg, log_path=out / "metrics.jsonl")
    extra = {"task": task, "vocab": _vocab_extra(vocab), "train_config": dataclasses.asdict(train_cfg),
             "best_epoch": result.best_epoch}
    result.params.save(out / "checkpoint.ckpt", extra)
    print(f"best epoch {result.best_epoch}; checkpoint {out / 'checkpoint.ckpt'}")
    write_manifest(out, "train", args)
    return EXIT_OK


def predict_documents(params: Params, vocab: Vocab, task: str, docs):
    """Per-document unit predictions for ``task``."""
    if params.config.num_labels != TASK_SCHEMES[task].num_labels:
        raise UsageError(f"checkpoint predicts {params.config.num_labels} labels; {task} needs "
                         f"{TASK_SCHEMES[task].num_labels}")
    rows = []
    for d in docs:
        labels = []
        for ex in encode_document(d, vocab, task):
            pos = unit_positions(ex)
            pred = dict(zip(pos, predict_labels(params, ex, pos).tolist())) if pos else {}
            labels.extend(unit_labels(ex, pred))
        rows.append({"doc_id": d.doc_id, "task": task, "labels": labels})
    return rows


def _apply_predictions(doc: AnnotatedDocument, task: str, labels) -> AnnotatedDocument:
    if task == "arrow_sentence":
        from .corpus import AnnotationSpan
        spans = [AnnotationSpan(f"S{k}", t, "sentence", k, k + 1, rater="model")
                 for k, t in enumerate(labels) if t != "None"]
        return doc.with_spans(spans, [])
    return doc.with_spans(words_to_spans(labels, rater="model"), [])


def cmd_predict(args) -> int:
    params, extra = _load_checkpoint(args.checkpoint)
    task = extra.get("task")
    if args.task and task and args.task != task:
        raise UsageError(f"checkpoint was trained for {task}, not {args.task}")
    task = task or _task(args)
    vocab = _vocab_from_extra(extra)
    docs = _load_corpus(args.inp)
    _check_pairing(task, docs)
    rows = predict_documents(params, vocab, task, docs)
    out = _out_dir(args.out)
    with open(out / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    if task in ("arrow_sentence", "persuade_word"):
        write_corpus([_apply_predictions(d, task, r["labels"]) for d, r in zip(docs, rows)], out / "corpus")
    write_manifest(out, "predict", args)
    print(f"{len(rows)} documents predicted")
    return EXIT_OK


def _read_predictions(path: Path) -> dict[str, dict]:
    rows = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if line.strip():
            try:
                r = json.loads(line)
                rows[r["doc_id"]] = r
            except (json.JSONDecodeError, KeyError):
                raise DataError(f"{path}:{n}: malformed prediction record") from None
    return rows


def cmd_evaluate(args) -> int:
    if args.gold is None or args.inp is None:
        raise UsageError("--in (predictions) and --gold are required")
    gold = _load_corpus(args.gold)
    pred_path = Path(args.inp)
    if pred_path.is_file():
        preds = _read_predictions(pred_path)
        tasks = {r["task"] for r in preds.values()}
        task = args.task or (tasks.pop() if len(tasks) == 1 else None)
        if task not in TASK_SCHEMES:
            raise UsageError("cannot tell the task; pass --task")
        missing = sorted({d.doc_id for d in gold} - set(preds))
        extra_ids = sorted(set(preds) - {d.doc_id for d in gold})
        if missing or extra_ids:
            raise UsageError(f"document ids differ; missing predictions: {missing}; unknown: {extra_ids}")
        g, p = [], []
        for d in sorted(gold, key=lambda d: d.doc_id):
            gl = gold_unit_labels(d, task)
            pl = preds[d.doc_id]["labels"]
            if len(gl) != len(pl):
                raise DataError(f"{d.doc_id}: {len(gl)} gold units vs {len(pl)} predicted")
            g.extend(gl)
            p.extend(pl)
        scheme = TASK_SCHEMES[task]
        tags, macro = scored_tags(scheme)
        if "None" in g + p and "None" not in tags:
            tags = tags + ("None",)
        report = evaluate_labels(g, p, tags, macro)
    else:
        scheme = get_scheme(args.scheme or (gold[0].source_scheme if gold else SchemeId.ARROW))
        try:
            report = evaluate(_load_corpus(pred_path), gold, scheme)
        except MetricError as exc:
            raise UsageError(str(exc)) from None
    text = format_report(report, title=f"{scheme.scheme.value} evaluation")
    print(text)
    if args.out:
        out = _out_dir(args.out)
        (out / "report.txt").write_text(text + "\n", encoding="utf-8")
        write_manifest(out, "evaluate", args)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    if args.config is None:
        raise UsageError("--config is required")
    cfg = read_config(args.config)
    model_cfg, train_cfg = split_config(cfg, "arrow_sentence", args.seed)
    labeled = _load_corpus(args.inp)
    _check_pairing("arrow_sentence", labeled)
    unlabeled = _load_corpus(args.unlabeled) if args.unlabeled else [d.with_spans([], []) for d in labeled]
    prompts = sorted({d.meta.get("prompt") for d in labeled if d.meta.get("prompt")})
    if len(prompts) != len({d.meta.get("prompt") for d in labeled}):
        raise DataError("every labeled document needs a prompt id")
    try:
        plan = build_seed_plan(prompts, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    vocab = train_vocab([d.text for d in labeled + unlabeled], cfg.get("vocab_pieces", model_cfg.vocab_size - 8))
    out = _out_dir(args.out)
    (out / "plan.json").write_text(plan.to_json() + "\n", encoding="utf-8")
    seeds = train_seed_models(labeled, vocab, plan, model_cfg, train_cfg)
    for i, r in enumerate(seeds):
        r.params.save(out / f"seed-{i}.ckpt", {"task": "arrow_sentence", "vocab": _vocab_extra(vocab)})
    synthetic = synthesize_labels([r.params for r in seeds], unlabeled, vocab)
    write_corpus(synthetic, out / "synthetic")
    rows = vote_table(synthetic)
    with open(out / "votes.csv", "w", encoding="utf-8", newline="") as fh:
        fields = ["doc_id", "sentence", "resolved"] + [f"vote_{i}" for i in range(len(seeds))]
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    universal = train_universal(synthetic, vocab, model_cfg, train_cfg)
    universal.params.save(out / "universal.ckpt", {"task": "arrow_sentence", "vocab": _vocab_extra(vocab)})
    write_manifest(out, "ensemble", args)
    print(f"{len(seeds)} seed models, {len(rows)} voted sentences; universal model {out / 'universal.ckpt'}")
    return EXIT_OK


def cmd_correspond(args) -> int:
    human = _load_corpus(args.inp)
    if not args.scheme:
        raise UsageError("--scheme (human scheme) is required")
    if not args.synthetic:
        raise UsageError("at least one --synthetic DIR:SCHEME is required")
    matrices = {}
    for item in args.synthetic:
        path, _, scheme = item.rpartition(":")
        if not path:
            raise UsageError(f"--synthetic expects DIR:SCHEME, got {item!r}")
        try:
            matrices[scheme] = corpus_correspondence(human, _load_corpus(path), args.scheme, scheme)
        except SchemeError as exc:
            raise UsageError(str(exc)) from None
        except ValueError as exc:
            raise DataError(str(exc)) from None
    text = format_side_by_side(matrices)
    print(text)
    if args.out:
        out = _out_dir(args.out)
        (out / "correspondence.txt").write_text(text + "\n", encoding="utf-8")
        for name, m in matrices.items():
            (out / f"correspondence-{name}.csv").write_text(m.to_delimited(), encoding="utf-8")
        write_manifest(out, "correspond", args)
    return EXIT_OK


def cmd_export_html(args) -> int:
    docs = _load_corpus(args.inp)
    scheme = get_scheme(args.scheme or (docs[0].source_scheme if docs else SchemeId.ARROW))
    palette = load_palette(args.palette) if args.palette else None
    out = _out_dir(args.out)
    for d in docs:
        tags = collapse_to_words(d, scheme)
        name = "".join(c if c.isalnum() or c in "._-" else "_" for c in d.doc_id) or "doc"
        (out / f"{name}.html").write_text(export_html(d, tags, scheme, palette), encoding="utf-8")
    write_manifest(out, "export-html", args)
    print(f"{len(docs)} documents rendered to {out}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------

def _common(p, *flags):
    if "in" in flags:
        p.add_argument("--in", dest="inp", help="input path")
    if "out" in flags:
        p.add_argument("--out", help="output directory")
    if "task" in flags:
        p.add_argument("--task", choices=sorted(TASK_SCHEMES))
    if "scheme" in flags:
        p.add_argument("--scheme", help="annotation scheme id")
    if "config" in flags:
        p.add_argument("--config", help="flat key = value config file")
    if "seed" in flags:
        p.add_argument("--seed", type=int, help="overrides the config seed")
    if "checkpoint" in flags:
        p.add_argument("--checkpoint")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="argmine", description="Argument annotation tooling.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read raw annotations into a canonical corpus")
    _common(p, "in", "out")
    p.add_argument("--format", choices=("brat", "persuade", "html"), required=True)
    p.add_argument("--texts", help="directory of <essay id>.txt files for PERSUADE tables")
    p.add_argument("--lenient", action="store_true", help="record offset disagreements instead of failing")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train one task model")
    _common(p, "in", "out", "task", "config", "seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a checkpoint")
    _common(p, "in", "out", "task", "checkpoint")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    _common(p, "in", "out", "task", "scheme")
    p.add_argument("--gold", help="gold canonical corpus")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ensemble", help="seed models, voted labels and a universal model")
    _common(p, "in", "out", "config", "seed")
    p.add_argument("--k", type=int, default=5, help="number of seed models")
    p.add_argument("--unlabeled", help="corpus to label (defaults to the input essays)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("correspond", help="cross-tabulate schemes at the word level")
    _common(p, "in", "out", "scheme")
    p.add_argument("--synthetic", action="append", help="DIR:SCHEME, repeatable")
    p.set_defaults(func=cmd_correspond)

    p = sub.add_parser("export-html", help="color-coded HTML per document")
    _common(p, "in", "out", "scheme")
    p.add_argument("--palette", help="JSON file mapping tags to colors")
    p.set_defaults(func=cmd_export_html)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CorpusError, SchemeError, VocabError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
