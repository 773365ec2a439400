"""``molforge`` command-line interface.

Exit codes: 0 success, 1 bad molecular input, 2 configuration or schema
error, 3 I/O error. ``MOLFORGE_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from molforge import __version__
from molforge.analytics import calibrate, ingest_benchmark, ingest_scores, novelty_analysis
from molforge.campaign import CampaignConfig, SeriesSpec, emit_reports, run_campaign, run_series
from molforge.errors import ConfigError, MolforgeError, SchemaError
from molforge.filters import FilterPolicy, batch_filter, summarize_reports
from molforge.genops import DecodeParams, train_frequency_model
from molforge.molgraph.descriptors import descriptors
from molforge.smiles import iter_smiles_records, parse_smiles, read_smiles_file, write_canonical, write_smiles_file

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("molforge")


def _dump(path: str | None, data) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_molecules(path: str):
    if path.endswith(".csv"):
        records, skipped = ingest_benchmark(path)
        for s in skipped:
            log.warning("%s:%d skipped: %s", path, s.line, s.reason)
        return [parse_smiles(r.smiles, name=r.id) for r in records]
    return read_smiles_file(path, skip_invalid=True)


def toy_dir() -> Path:
    """Directory holding the shipped three-seed toy campaign."""
    return Path(str(resources.files("molforge") / "data" / "toy"))


# ----------------------------------------------------------------- commands


def cmd_canon(args) -> int:
    if args.smiles:
        lines = [(i + 1, s, "") for i, s in enumerate(args.smiles)]
    else:
        fh = open(args.input, encoding="utf-8") if args.input not in (None, "-") else sys.stdin
        with fh:
            lines = list(iter_smiles_records(fh))
    out = []
    status = EXIT_OK
    for lineno, smi, ident in lines:
        try:
            text = write_canonical(parse_smiles(smi))
        except MolforgeError as exc:
            log.error("record %d: %s", lineno, exc)
            status = EXIT_INPUT
            continue
        out.append(f"{text}\t{ident}" if ident else text)
    _write_lines(args.out, out)
    return status


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "".join(l + "\n" for l in lines)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_descriptors(args) -> int:
    mols = read_smiles_file(args.input, skip_invalid=True)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out not in (None, "-") else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        header = None
        for m in mols:
            d = descriptors(m).as_dict()
            if header is None:
                header = list(d)
                w.writerow(["id", "smiles", *header])
            w.writerow([m.name, write_canonical(m), *(f"{d[k]:.4f}" if isinstance(d[k], float) else d[k] for k in header)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_filter(args) -> int:
    policy = FilterPolicy.from_json(args.policy) if args.policy else FilterPolicy()
    mols = read_smiles_file(args.input, skip_invalid=True)
    kept, stats, reports = batch_filter(mols, policy)
    write_smiles_file(args.out, kept)
    if args.report:
        _dump(args.report, {
            "summary": summarize_reports(reports),
            "attrition": stats.to_dict(),
            "molecules": [{"id": m.name, **r.to_dict()} for m, r in zip(mols, reports)],
        })
    log.info("kept %d of %d", stats.retained, stats.total)
    return EXIT_OK


def cmd_novelty(args) -> int:
    gen = read_smiles_file(args.generated, skip_invalid=True)
    bench = _read_molecules(args.benchmark)
    report = novelty_analysis(gen, bench, radius=args.radius, width=args.width)
    _dump(args.out, report.to_dict())
    return EXIT_OK


def cmd_calibrate(args) -> int:
    bench, _ = ingest_benchmark(args.benchmark)
    scores, _ = ingest_scores(args.scores)
    rep = calibrate(bench, scores, args.threshold, args.halfwidth, exclude_high_variance=args.exclude_high_variance)
    _dump(args.out, rep.to_dict())
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.spec}: invalid JSON ({exc})") from None
    if "seed_smiles" not in spec_data or "primitive" not in spec_data:
        raise ConfigError("generation spec needs seed_smiles and primitive")
    seeds = {"seed": parse_smiles(spec_data["seed_smiles"], name="seed")}
    if spec_data.get("partner_smiles"):
        seeds["partner"] = parse_smiles(spec_data["partner_smiles"], name="partner")
    spec = SeriesSpec.from_dict({
        "series_id": spec_data.get("series_id", "series"),
        "seed_id": "seed",
        "tier": spec_data.get("tier", 1),
        "primitive": spec_data["primitive"],
        "primitive_args": spec_data.get("primitive_args", {}),
        "edit_script": spec_data.get("edit_script", []),
        "partner_seed_id": "partner" if "partner" in seeds else None,
    })
    corpus = list(seeds.values()) + (read_smiles_file(args.corpus, skip_invalid=True) if args.corpus else [])
    try:
        params = DecodeParams.from_dict(spec_data.get("decode_params", {}))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad decode_params: {exc}") from None
    res = run_series(spec, seeds, train_frequency_model(corpus), params)
    if res.failure:
        log.error("series %s: %s", spec.series_id, res.failure)
        return EXIT_INPUT
    _write_lines(args.out, [f"{write_canonical(m)}\t{spec.series_id}_{i:04d}\t{lp:.6f}" for i, (m, lp) in enumerate(res.products)])
    return EXIT_OK


def cmd_campaign(args) -> int:
    if args.toy:
        base = toy_dir()
        config_path = args.config or str(base / "campaign.json")
        bench_path = args.benchmark or str(base / "benchmark.csv")
        scores_path = args.scores or str(base / "scores.csv")
    else:
        if not args.config or not args.benchmark:
            raise ConfigError("--config and --benchmark are required (or use --toy)")
        config_path, bench_path, scores_path = args.config, args.benchmark, args.scores
    config = CampaignConfig.from_json(config_path)
    bench, skipped = ingest_benchmark(bench_path)
    for s in skipped:
        log.warning("benchmark line %d skipped: %s", s.line, s.reason)
    scores = ingest_scores(scores_path)[0] if scores_path else []
    state = run_campaign(config, bench, scores)
    paths = emit_reports(state, bench, args.out, scores or None, config=config)
    log.info("library: %d molecules; wrote %d files to %s", len(state.library), len(paths), args.out)
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="molforge", description="Molecular graph toolkit and generation campaign runner.")
    p.add_argument("--version", action="version", version=f"molforge {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("canon", parents=[common], help="canonical SMILES")
    s.add_argument("smiles", nargs="*", help="SMILES strings (otherwise read --in)")
    s.add_argument("--in", dest="input", help="SMILES file (default stdin)")
    s.add_argument("--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_canon)

    s = sub.add_parser("descriptors", parents=[common], help="descriptor table for a SMILES file")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_descriptors)

    s = sub.add_parser("filter", parents=[common], help="three-stage filtering")
    s.add_argument("--policy", help="policy JSON (default policy if omitted)")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("novelty", parents=[common], help="similarity and scaffold novelty against a benchmark")
    s.add_argument("--generated", required=True)
    s.add_argument("--benchmark", required=True, help="benchmark CSV or SMILES file")
    s.add_argument("--radius", type=int, default=2)
    s.add_argument("--width", type=int, default=2048)
    s.add_argument("--out")
    s.set_defaults(func=cmd_novelty)

    s = sub.add_parser("calibrate", parents=[common], help="Spearman and ROC AUC of scores against pChEMBL")
    s.add_argument("--benchmark", required=True)
    s.add_argument("--scores", required=True)
    s.add_argument("--threshold", type=float, default=6.5)
    s.add_argument("--halfwidth", type=float, default=0.5)
    s.add_argument("--exclude-high-variance", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("generate", parents=[common], help="run one generation spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--corpus", help="SMILES file to train the frequency model on (seed is always included)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("campaign", parents=[common], help="run a multi-wave campaign")
    s.add_argument("--config")
    s.add_argument("--benchmark")
    s.add_argument("--scores")
    s.add_argument("--toy", action="store_true", help="use the shipped toy campaign for missing inputs")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_campaign)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SchemaError) as exc:
        print(f"molforge: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"molforge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MolforgeError as exc:
        print(f"molforge: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
