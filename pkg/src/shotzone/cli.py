"""Command-line surface over the full pipeline.

Subcommands: ingest | synth | featurize | train | eval | predict | simulate |
export-features | serve. Usage errors exit 2 (argparse); operational errors
print a one-line cause to stderr and exit 1. Pass --format structured for
machine-readable JSON output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .data import parse_corpus, write_corpus
from .errors import ShotzoneError
from .frames import (
    build_dataset,
    build_profile_store,
    feature_ledger_export,
    load_profile_store,
    save_profile_store,
)
from .models import (
    TrainConfig,
    evaluate,
    load_bundle,
    make_experiment,
    save_bundle,
    train_model,
)
from .profiles import AuxGlobals, export_feature_vectors
from .simulate import (
    grid_from_dict,
    predict_scenario,
    scenario_from_dict,
    summarize,
    sweep_report,
)
from .synth import load_roster, make_default_roster, save_roster, synthesize
from .taxonomy import ZONES, taxonomy_export


def _emit(doc: dict, fmt: str, table_lines) -> None:
    if fmt == "structured":
        print(json.dumps(doc, indent=2))
    else:
        for line in table_lines:
            print(line)


def _load_store(args):
    if getattr(args, "store", None):
        return load_profile_store(args.store)
    if getattr(args, "corpus", None):
        return build_profile_store(parse_corpus(args.corpus))
    raise ShotzoneError("give --store or --corpus to resolve player profiles")


def cmd_ingest(args) -> int:
    corpus = parse_corpus(args.corpus)
    if args.out:
        write_corpus(corpus, args.out)
    labels = Counter(d.shot_label for d in corpus.deliveries if d.shot_label)
    extras = sum(1 for d in corpus.deliveries if d.is_extra)
    matches = len({d.match_id for d in corpus.deliveries})
    doc = {
        "deliveries": len(corpus),
        "matches": matches,
        "players": len(corpus.players),
        "extras": extras,
        "date_range": [corpus.deliveries[0].date.isoformat(),
                       corpus.deliveries[-1].date.isoformat()],
        "distinct_shot_labels": len(labels),
    }
    _emit(doc, args.format, [
        f"deliveries      {doc['deliveries']}",
        f"matches         {doc['matches']}",
        f"players         {doc['players']}",
        f"extras          {doc['extras']}",
        f"dates           {doc['date_range'][0]} .. {doc['date_range'][1]}",
        f"shot labels     {doc['distinct_shot_labels']}",
    ])
    return 0


def cmd_synth(args) -> int:
    if args.players:
        roster = load_roster(args.players)
    else:
        roster = make_default_roster(n_batsmen=args.batsmen, n_bowlers=args.bowlers,
                                     seed=args.seed, signal=args.signal)
    if args.roster_out:
        save_roster(roster, args.roster_out)
    corpus = synthesize(roster, args.n, seed=args.seed)
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} deliveries to {args.out}", file=sys.stderr)
    return 0


def cmd_featurize(args) -> int:
    corpus = parse_corpus(args.corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "taxonomy.json", "w", encoding="utf-8") as fh:
        json.dump(taxonomy_export(), fh, indent=2)
    with open(out_dir / "feature_ledger.json", "w", encoding="utf-8") as fh:
        json.dump(feature_ledger_export(), fh, indent=2)
    from .profiles import compute_aux_globals

    globals_ = compute_aux_globals(corpus.deliveries)
    dataset = build_dataset(corpus, globals_)
    zone_counts = Counter(int(z) for z in dataset.y if z >= 0)
    summary = {
        "frames": len(dataset),
        "labeled_frames": int(len(dataset.labeled_indices)),
        "zone_histogram": {ZONES[z].name: zone_counts.get(z, 0) for z in range(17)},
    }
    with open(out_dir / "frames_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    if args.save_profiles:
        store = build_profile_store(corpus)
        save_profile_store(store, out_dir / "profiles.json")
    print(f"featurized {summary['frames']} deliveries "
          f"({summary['labeled_frames']} labeled) into {out_dir}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    corpus = parse_corpus(args.corpus)
    experiment = make_experiment(corpus, holdout_fraction=args.holdout)
    config = TrainConfig(hidden=args.hidden, depth=args.depth, lr=args.lr,
                         batch_size=args.batch, max_epochs=args.epochs,
                         patience=args.patience, precision=args.precision)
    bundle = train_model(args.kind, experiment, config, seed=args.seed)
    save_bundle(bundle, args.out)
    report = evaluate(bundle, experiment.dataset, experiment.test_rows)
    doc = {"bundle": str(args.out), "manifest": bundle.manifest,
           "holdout_report": report.to_dict()}
    _emit(doc, args.format, [
        f"model       {args.kind}",
        f"epochs      {bundle.manifest['epochs_run']}",
        f"holdout n   {report.n}",
        f"accuracy    {report.accuracy:.4f}",
        f"log loss    {report.log_loss:.4f}",
        f"bundle      {args.out}",
    ])
    return 0


def cmd_eval(args) -> int:
    bundle = load_bundle(args.bundle)
    bundle.check_versions()
    corpus = parse_corpus(args.corpus)
    dataset = build_dataset(corpus, AuxGlobals(values=bundle.aux_globals))
    report = evaluate(bundle, dataset)
    doc = report.to_dict()
    doc.pop("confusion", None)
    _emit(doc, args.format, [
        "model                accuracy   log loss   n",
        f"{report.kind:<20} {report.accuracy:<10.4f} {report.log_loss:<10.4f} {report.n}",
    ])
    return 0


def cmd_predict(args) -> int:
    bundle = load_bundle(args.bundle)
    store = _load_store(args)
    with open(args.scenario, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.allow_unknown:
        doc["allow_unknown"] = True
    scenario = scenario_from_dict(doc)
    dist = predict_scenario(bundle, store, scenario)
    summary = summarize(dist)
    out = {"distribution": {z.name: float(p) for z, p in zip(ZONES, dist)},
           "summary": summary.to_dict()}
    lines = ["zone                     p"]
    for zone, p in zip(ZONES, dist):
        lines.append(f"{zone.name:<24} {p:.4f}")
    lines.append("")
    lines.append(f"defensive/rotate/attack/deflect  "
                 f"{summary.p_defensive:.3f}/{summary.p_rotate:.3f}/"
                 f"{summary.p_attack:.3f}/{summary.p_deflect:.3f}")
    _emit(out, args.format, lines)
    return 0


def cmd_simulate(args) -> int:
    bundle = load_bundle(args.bundle)
    store = _load_store(args)
    with open(args.grid, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.allow_unknown:
        doc.setdefault("base", {})["allow_unknown"] = True
    grid = grid_from_dict(doc)
    rows = sweep_report(bundle, store, grid)
    if args.format == "structured":
        payload = {"n_scenarios": len(rows), "rows": [r.to_dict() for r in rows]}
        text = json.dumps(payload, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
        return 0
    # delimited table: axes + group masses + full distribution
    axis_names = sorted({k for r in rows for k in r.axes})
    header = axis_names + ["p_defensive", "p_rotate", "p_attack", "p_deflect",
                           "off_share", "leg_share"] + [z.name for z in ZONES]
    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            s = r.summary
            writer.writerow(
                [r.axes.get(a, "") for a in axis_names]
                + [repr(s.p_defensive), repr(s.p_rotate), repr(s.p_attack),
                   repr(s.p_deflect),
                   "" if s.off_side_share is None else repr(s.off_side_share),
                   "" if s.leg_side_share is None else repr(s.leg_side_share)]
                + [repr(float(p)) for p in r.distribution])
    finally:
        if args.out:
            sink.close()
    if args.out:
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_export_features(args) -> int:
    store = _load_store(args)
    header, rows = export_feature_vectors(store.profiles, args.role,
                                          min_matches=args.min_matches)
    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float)
                             else v for v in row])
    finally:
        if args.out:
            sink.close()
    if args.out:
        print(f"wrote {len(rows)} {args.role} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        bundle_path=args.bundle,
        corpus_path=args.corpus,
        store_path=args.store,
        allow_unknown=args.allow_unknown,
        static_dir=args.static,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shotzone",
        description="Personalized cricket shot-zone prediction and what-if tactics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("table", "structured"), default="table")

    p = sub.add_parser("ingest", help="validate a corpus file and report stats")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="rewrite the validated, sorted corpus here")
    add_format(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--players", help="roster spec JSON (default: generated roster)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--batsmen", type=int, default=20)
    p.add_argument("--bowlers", type=int, default=8)
    p.add_argument("--signal", choices=("High", "Low"), default="High")
    p.add_argument("--roster-out", help="save the roster actually used")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("featurize", help="build frames and export the ledgers")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--save-profiles", action="store_true")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train one model rung")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", required=True,
                   choices=("naive", "ffn", "lstm", "personalized_lstm"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=float, default=0.2)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--precision", choices=("float32", "float64"), default="float32")
    add_format(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a bundle on a corpus")
    p.add_argument("--bundle", required=True)
    p.add_argument("--corpus", required=True)
    add_format(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict one scenario")
    p.add_argument("--bundle", required=True)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--corpus", help="corpus to fold player profiles from")
    p.add_argument("--store", help="prebuilt profile store JSON")
    p.add_argument("--allow-unknown", action="store_true")
    add_format(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run a scenario grid sweep")
    p.add_argument("--bundle", required=True)
    p.add_argument("--grid", required=True, help="grid JSON file")
    p.add_argument("--corpus", help="corpus to fold player profiles from")
    p.add_argument("--store", help="prebuilt profile store JSON")
    p.add_argument("--allow-unknown", action="store_true")
    p.add_argument("--out", help="write the report here instead of stdout")
    add_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-features", help="export personal feature vectors")
    p.add_argument("--role", choices=("batsman", "bowler"), required=True)
    p.add_argument("--corpus")
    p.add_argument("--store")
    p.add_argument("--min-matches", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_features)

    p = sub.add_parser("serve", help="run the HTTP JSON service")
    p.add_argument("--bundle", required=True)
    p.add_argument("--corpus")
    p.add_argument("--store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--allow-unknown", action="store_true")
    p.add_argument("--static", help="directory of UI assets served at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ShotzoneError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
