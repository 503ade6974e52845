"""Command-line entry points: generate, evaluate, rank, train-baseline,
serve, report."""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import datagen, metrics, scoring
from .corpus import read_corpus
from .datagen import GenConfig, balance, build_manifest, dedupe, generate, \
    read_dataset, write_dataset
from .paraphrase import OfflineTableProvider, UnavailableProvider
from .transforms import Label, TransformKind


def _parse_transforms(spec: str) -> dict[TransformKind, float]:
    """Parse "identity,negation" or "identity=1,negation=0.5"."""
    mix: dict[TransformKind, float] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            name, weight = part.split("=", 1)
            mix[TransformKind(name.strip())] = float(weight)
        else:
            mix[TransformKind(part)] = 1.0
    return mix


def _make_scorer(name: str):
    if name == "overlap":
        return scoring.OverlapScorer()
    if name == "constant":
        return scoring.ConstantScorer()
    if name.startswith("random"):
        seed = int(name.split(":", 1)[1]) if ":" in name else 0
        return scoring.RandomScorer(seed)
    if name.startswith("baseline:"):
        return scoring.BaselineScorer(scoring.BaselineModel.load(name.split(":", 1)[1]))
    raise SystemExit(f"unknown scorer {name!r} "
                     "(use overlap, constant, random[:SEED], baseline:PATH)")


def cmd_generate(args: argparse.Namespace) -> None:
    mix = _parse_transforms(args.transforms) if args.transforms \
        else dict(datagen.DEFAULT_TRANSFORM_MIX)
    config = GenConfig(claims_per_doc=args.claims_per_doc,
                       min_claim_tokens=args.min_claim_tokens,
                       transform_mix=mix, noise_p=args.noise_p,
                       target_negative_ratio=args.balance or 0.5,
                       seed=args.seed)
    provider = UnavailableProvider()
    if args.paraphrase_table:
        provider = OfflineTableProvider.from_file(args.paraphrase_table)
    documents = list(read_corpus(args.corpus))
    examples, skips = generate(documents, config, provider=provider,
                               max_workers=args.workers)
    examples = dedupe(examples)
    if args.balance is not None:
        examples = balance(examples, args.balance, random.Random(config.seed))
    manifest = build_manifest(examples, config, skips)
    write_dataset(examples, args.out, manifest)
    print(f"wrote {manifest.example_count} examples to {args.out} "
          f"(negative fraction {manifest.negative_fraction:.3f})")


def cmd_evaluate(args: argparse.Namespace) -> None:
    examples = read_dataset(args.data)
    golds = [e.label for e in examples]
    if args.pred:
        predictions = scoring.load_external_predictions(args.pred)
        matched = [(e, predictions[e.id]) for e in examples if e.id in predictions]
        unmatched = len(examples) - len(matched)
        if not matched:
            raise SystemExit("no prediction ids match the dataset (100% unmatched)")
        golds = [e.label for e, _ in matched]
        probs = [p for _, (p, _, _) in matched]
    else:
        scorer = _make_scorer(args.scorer)
        probs = [scorer.score(e.text, e.claim) for e in examples]
        unmatched = 0
    preds = [Label.CONSISTENT if p >= args.threshold else Label.INCONSISTENT
             for p in probs]
    report = {
        "balanced_accuracy": metrics.balanced_accuracy(preds, golds),
        "f1": metrics.binary_f1(preds, golds, positive_class=Label(args.positive_class)),
        "positive_class": args.positive_class,
        "examples": len(golds),
        "unmatched_predictions": unmatched,
    }
    print(json.dumps(report, indent=2))


def cmd_rank(args: argparse.Namespace) -> None:
    items = metrics.read_ranking_pairs(args.pairs)
    scorer = _make_scorer(args.scorer)
    accuracy = metrics.ranking_accuracy(scorer.score, items)
    print(json.dumps({"ranking_accuracy": accuracy, "pairs": len(items)}, indent=2))


def cmd_train_baseline(args: argparse.Namespace) -> None:
    from .corpus import Document
    from .annotate import tag_entities
    examples = read_dataset(args.data)
    doc_cache: dict[str, tuple] = {}
    features, labels = [], []
    for e in examples:
        if e.doc_id not in doc_cache:
            doc = Document.from_text(e.doc_id, e.text)
            doc_cache[e.doc_id] = (doc, tag_entities(doc))
        doc, entities = doc_cache[e.doc_id]
        features.append(scoring.featurize(doc, e.claim, document_entities=entities))
        labels.append(1 if e.label == Label.CONSISTENT else 0)
    model = scoring.train_baseline(features, labels, epochs=args.epochs,
                                   learning_rate=args.lr, seed=args.seed)
    model.save(args.out)
    print(f"trained on {len(examples)} examples, final loss {model.final_loss:.4f}, "
          f"saved to {args.out}")


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn
    from .service import Session, create_app
    examples = read_dataset(args.data)
    predictions = scoring.load_external_predictions(args.pred) if args.pred else None
    session = Session("default", examples, n_target=args.n_judgments,
                      highlights_policy=args.highlights, log_path=args.log,
                      predictions=predictions, data_path=args.data)
    app = create_app(session, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)


def cmd_report(args: argparse.Namespace) -> None:
    from .service import Session, read_log
    header, _, _ = read_log(args.log)
    data_path = args.data or (header or {}).get("data_path")
    if not data_path:
        raise SystemExit("dataset path not recorded in log; pass --data")
    examples = read_dataset(data_path)
    session = Session((header or {}).get("session_id", "default"), examples,
                      n_target=(header or {}).get("n_target", 3),
                      highlights_policy=(header or {}).get("highlights_policy", "ab"),
                      log_path=args.log, data_path=data_path)
    print(json.dumps(session.report(args.filter), indent=2))


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="claimcheck")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a weakly supervised dataset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-p", type=float, default=0.05)
    p.add_argument("--transforms", default=None,
                   help="comma list, e.g. identity,negation or identity=1,negation=0.5")
    p.add_argument("--balance", type=float, default=None,
                   help="target negative fraction, e.g. 0.5")
    p.add_argument("--claims-per-doc", type=int, default=3)
    p.add_argument("--min-claim-tokens", type=int, default=5)
    p.add_argument("--paraphrase-table", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="evaluate predictions or a scorer")
    p.add_argument("--data", required=True)
    p.add_argument("--pred", default=None)
    p.add_argument("--scorer", default="overlap")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--positive-class", default="INCONSISTENT",
                   choices=["CONSISTENT", "INCONSISTENT"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="sentence-ranking experiment")
    p.add_argument("--pairs", required=True)
    p.add_argument("--scorer", default="overlap")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train-baseline", help="train the featurized baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--data", required=True)
    p.add_argument("--highlights", default="ab", choices=["on", "off", "ab"])
    p.add_argument("--n-judgments", type=int, default=3)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--log", required=True)
    p.add_argument("--pred", default=None)
    p.add_argument("--static", default=None,
                   help="directory of UI static assets to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="report on a judgment log")
    p.add_argument("--log", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--filter", default="raw", choices=["raw", "golden", "majority"])
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
