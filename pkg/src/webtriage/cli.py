"""Batch entry points for every pipeline stage.

Exit codes: 0 success, 1 domain error (bad data, bad config), 2 usage error.
Every subcommand that involves randomness takes --seed, and rerunning with
identical inputs and seed produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, annotation, collector, corpus, metrics, trainer, triage
from .errors import WebTriageError
from .features import fit_vocabulary, load_vocabulary, vectorize

MODEL_FILE = "model.tsv"
VOCAB_FILE = "vocab.tsv"
LOG_FILE = "training_log.tsv"

SPLIT_DIRS = ("train", "dev-0", "test-A")


def _parse_ratios(text: str) -> tuple[Fraction, Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated ratios, got {len(parts)}")
    ratios = []
    for part in parts:
        part = part.strip()
        # accept both decimals ("0.8042") and exact fractions ("92028/114432")
        ratios.append(Fraction(part) if "/" in part else Fraction(float(part)))
    return tuple(ratios)


def _parse_engine(spec: str) -> collector.SearchEngineSpec:
    """Engine flag format: name=fixture:path.tsv or name=plugin:module:attr,
    with optional ,pages=N and ,rate=R suffixes."""
    name, sep, rest = spec.partition("=")
    if not sep:
        raise ValueError(f"--engine must look like name=fixture:PATH, got {spec!r}")
    pages, rate = collector.DEFAULT_PAGES_PER_QUERY, 0.0
    while "," in rest:
        rest, _, opt = rest.rpartition(",")
        key, _, value = opt.partition("=")
        if key == "pages":
            pages = int(value)
        elif key == "rate":
            rate = float(value)
        else:
            raise ValueError(f"unknown engine option {key!r}")
    kind, sep, target = rest.partition(":")
    if not sep:
        raise ValueError(f"engine {name}: expected fixture:PATH or plugin:module:attr")
    if kind == "fixture":
        connector = collector.fixture_engine_from_tsv(name, target)
    elif kind == "plugin":
        connector = collector.load_connector(target)
    else:
        raise ValueError(f"engine {name}: unknown kind {kind!r}")
    return collector.SearchEngineSpec(name=name, connector=connector,
                                      pages_per_query=pages, rate_limit=rate)


def _load_train_config(path: str | None, seed: int | None):
    raw = {}
    if path:
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    feature_keys = {"min_df", "max_features", "ngram_max"}
    opt_keys = {"beta1", "beta2", "eps", "peak_lr", "warmup_steps", "total_steps"}
    features_cfg = {k: raw.pop(k) for k in list(raw) if k in feature_keys}
    optimizer = trainer.linear_optimizer_config(**{k: raw.pop(k) for k in list(raw) if k in opt_keys})
    if seed is not None:
        raw["seed"] = seed
    training = trainer.TrainingConfig(**raw)
    return training, optimizer, features_cfg


# -- subcommand implementations --

def _cmd_expand(args) -> int:
    lexicon = collector.load_lexicon(args.lexicon) if args.lexicon else collector.EMPTY_LEXICON
    queries = collector.expand_query(args.inquiry, lexicon)
    body = "".join(q + "\n" for q in queries)
    if args.output:
        Path(args.output).write_text(body, encoding="utf-8", newline="")
    else:
        sys.stdout.write(body)
    return 0


def _cmd_collect(args) -> int:
    if args.queries_file:
        queries = [q for q in Path(args.queries_file).read_text(encoding="utf-8").splitlines() if q.strip()]
    else:
        queries = args.query
    engines = [_parse_engine(e) for e in args.engine]
    snippets, job = collector.collect(queries, engines, pages_per_query=args.pages)
    corpus.write_snippets(snippets, args.output)
    for name, stats in sorted(job.stats.items()):
        print(f"{name}\tfetched={stats.fetched}\tdeduped={stats.deduped}\tfailures={stats.failures}",
              file=sys.stderr)
    if job.status != "ok":
        print(f"warning: {'; '.join(job.warnings)}", file=sys.stderr)
    return 0


def _cmd_adjudicate(args) -> int:
    journal = annotation.read_journal(args.journal)
    labels = annotation.adjudicate_all(journal)
    snippets = corpus.read_snippets(args.input)
    missing = [s.id for s in snippets if s.id not in labels]
    if missing:
        raise WebTriageError(f"no adjudicated label for snippet ids: {missing[:5]}"
                             f"{'...' if len(missing) > 5 else ''}")
    corpus.write_labels((labels[s.id] for s in snippets), args.output)
    return 0


def _cmd_agreement(args) -> int:
    report = annotation.agreement(annotation.read_journal(args.journal))
    kappa = "undefined" if report.kappa is None else f"{report.kappa:.4f}"
    print(f"pairs: {report.n_pairs}\nobserved: {report.observed:.4f}\nkappa: {kappa}")
    return 0


def _cmd_split(args) -> int:
    records = _read_labeled(args.input, args.expected)
    split = corpus.stratified_split(records, _parse_ratios(args.ratios), seed=args.seed)
    outdir = Path(args.outdir)
    for name, part in zip(SPLIT_DIRS, (split.train, split.validation, split.test)):
        corpus.write_dataset(part, outdir / name)
    print("\t".join(f"{name}={len(part)}" for name, part in
                    zip(SPLIT_DIRS, (split.train, split.validation, split.test))))
    return 0


def _cmd_export_benchmark(args) -> int:
    rc = _cmd_split(args)
    if not args.with_test_expected:
        (Path(args.outdir) / "test-A" / corpus.EXPECTED_TSV).unlink()
    return rc


def _cmd_report(args) -> int:
    target = Path(args.input)
    if target.is_dir():
        records = corpus.read_dataset(target)
    elif args.expected:
        records = _read_labeled(args.input, args.expected)
    else:
        records = corpus.read_snippets(target)
    print(corpus.distribution_report(records).render())
    return 0


def _read_labeled(in_path: str, expected_path: str) -> list[corpus.LabeledSnippet]:
    snippets = corpus.read_snippets(in_path)
    labels = corpus.read_labels(expected_path)
    if len(snippets) != len(labels):
        raise WebTriageError(f"line-count mismatch: {in_path} has {len(snippets)} lines, "
                             f"{expected_path} has {len(labels)}")
    return [corpus.LabeledSnippet(s, l) for s, l in zip(snippets, labels)]


def _samples(records, vocabulary):
    return [(vectorize(r.snippet.snippet_text, vocabulary),
             1 if r.label is corpus.Label.INTERESTING else 0) for r in records]


def _cmd_train(args) -> int:
    training, optimizer, features_cfg = _load_train_config(args.config, args.seed)
    train_records = corpus.read_dataset(args.train)
    valid_records = corpus.read_dataset(args.valid)
    ngram_max = features_cfg.get("ngram_max", 2)
    vocabulary = fit_vocabulary(
        (r.snippet.snippet_text for r in train_records),
        min_df=features_cfg.get("min_df", 2),
        max_features=features_cfg.get("max_features", 100_000),
        ngram_range=(1, ngram_max))
    params, log = trainer.fit(_samples(train_records, vocabulary),
                              _samples(valid_records, vocabulary),
                              training, optimizer, len(vocabulary))
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    vocabulary.save(outdir / VOCAB_FILE)
    trainer.save_model(params, outdir / MODEL_FILE, vocab_hash=vocabulary.content_hash())
    (outdir / LOG_FILE).write_text(log.render(), encoding="utf-8", newline="")
    print(f"best_step={log.best_step}\tbest_f1={log.best_f1:.6f}\tstop={log.stop_reason.value}"
          f"\tvalidations={len(log.records)}")
    return 0


def _cmd_predict(args) -> int:
    model_dir = Path(args.model)
    params, vocab_hash = trainer.load_model(model_dir / MODEL_FILE)
    vocabulary = load_vocabulary(model_dir / VOCAB_FILE)
    if vocab_hash and vocab_hash != vocabulary.content_hash():
        raise WebTriageError(f"vocabulary hash mismatch in {model_dir}: model was trained "
                             "against a different vocabulary")
    snippets = corpus.read_snippets(args.input)
    probs = trainer.predict_many(params, [vectorize(s.snippet_text, vocabulary) for s in snippets])
    labels = [corpus.Label.INTERESTING if p >= 0.5 else corpus.Label.NOT_INTERESTING for p in probs]
    corpus.write_labels(labels, args.output)
    if args.probs:
        Path(args.probs).write_text("".join(f"{float(p)!r}\n" for p in probs),
                                    encoding="utf-8", newline="")
    if args.ranked:
        thresholds = triage.Thresholds(red=args.tau_red, yellow=args.tau_yellow)
        ranked = triage.rank([triage.classify(s, float(p), thresholds)
                              for s, p in zip(snippets, probs)])
        Path(args.ranked).write_text(
            "".join(f"{r.snippet.id}\t{r.probability!r}\t{r.verdict.value}\n" for r in ranked),
            encoding="utf-8", newline="")
    return 0


def _cmd_eval(args) -> int:
    f1 = metrics.geval_evaluate(args.expected, args.out)
    print(f"F1: {f1:.6f}")
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server

    run_server(args.config)
    return 0


# -- parser wiring --

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webtriage",
                                     description="Snippet collection, classification and triage pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="expand an inquiry into a query set")
    p.add_argument("inquiry")
    p.add_argument("--lexicon", help="synonym/template lexicon TSV")
    p.add_argument("-o", "--output", help="write queries here instead of stdout")
    p.set_defaults(fn=_cmd_expand)

    p = sub.add_parser("collect", help="collect snippets from engines into an in.tsv")
    p.add_argument("--queries-file", help="file with one query per line")
    p.add_argument("--query", action="append", default=[], help="inline query (repeatable)")
    p.add_argument("--engine", action="append", required=True,
                   help="name=fixture:PATH or name=plugin:module:attr (repeatable)")
    p.add_argument("--pages", type=int, default=None, help="override pages per query")
    p.add_argument("-o", "--output", required=True, help="output in.tsv path")
    p.set_defaults(fn=_cmd_collect)

    p = sub.add_parser("annotate", help="annotation workflows")
    asub = p.add_subparsers(dest="annotate_command", required=True)
    pa = asub.add_parser("adjudicate", help="OR-adjudicate a journal into expected.tsv")
    pa.add_argument("--journal", required=True)
    pa.add_argument("--in", dest="input", required=True, help="in.tsv giving the output order")
    pa.add_argument("-o", "--output", required=True, help="output expected.tsv path")
    pa.set_defaults(fn=_cmd_adjudicate)
    pg = asub.add_parser("agreement", help="observed agreement and Cohen's kappa of a journal")
    pg.add_argument("--journal", required=True)
    pg.set_defaults(fn=_cmd_agreement)

    for name, help_text in (("split", "stratified train/dev-0/test-A split"),
                            ("export-benchmark", "split and withhold test labels")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--ratios", required=True,
                       help="three ratios, decimals or fractions: 0.8,0.1,0.1 or 8/10,1/10,1/10")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("input", help="in.tsv")
        p.add_argument("expected", help="expected.tsv")
        p.add_argument("outdir")
        if name == "split":
            p.set_defaults(fn=_cmd_split)
        else:
            p.add_argument("--with-test-expected", action="store_true",
                           help="also write test-A/expected.tsv")
            p.set_defaults(fn=_cmd_export_benchmark)

    p = sub.add_parser("report", help="theme/label distribution report")
    p.add_argument("input", help="in.tsv, labeled TSV directory, or dataset dir")
    p.add_argument("expected", nargs="?", help="optional expected.tsv")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("train", help="fit vocabulary and classifier")
    p.add_argument("--train", required=True, help="training dataset directory (in.tsv+expected.tsv)")
    p.add_argument("--valid", required=True, help="validation dataset directory")
    p.add_argument("--config", help="TOML with training/optimizer/feature settings")
    p.add_argument("--seed", type=int, default=None, help="override the training seed")
    p.add_argument("-o", "--output", required=True, help="model output directory")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("predict", help="label an in.tsv with a trained model")
    p.add_argument("--model", required=True, help="model directory from `train`")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("-o", "--output", required=True, help="output out.tsv path")
    p.add_argument("--probs", help="also write one probability per line")
    p.add_argument("--ranked", help="also write ranked id/probability/verdict TSV")
    p.add_argument("--tau-red", type=float, default=0.7)
    p.add_argument("--tau-yellow", type=float, default=0.3)
    p.set_defaults(fn=_cmd_predict)

    p = sub.add_parser("eval", help="score out.tsv against expected.tsv (prints F1)")
    p.add_argument("--expected", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True, help="service TOML config")
    p.set_defaults(fn=_cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except WebTriageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
