"""Command-line entry point: one subcommand per pipeline stage.

Every stage reads JSON/JSONL from disk and writes under ``--out`` so any
stage can be rerun on its own. Exit status: 0 on success, 1 on a domain
error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from pathlib import Path
from typing import Sequence

from accmine.config import PipelineConfig, load_config
from accmine.curate import SplitAssignment, corpus_stats, deduplicate, filter_pairs, split
from accmine.dataset import (
    DatasetRecord,
    load_system_prompt,
    prompt_record,
    read_generations,
    read_records,
    training_record,
    write_jsonl,
    write_records,
)
from accmine.errors import AccmineError, NotADirectory
from accmine.extract import PragmaLoopPair, corpus_extract
from accmine.ingest import (
    default_queries,
    ingest_directory,
    is_snapshot,
    load_snapshot,
    save_snapshot,
    search_remote,
    token_from_env,
)
from accmine.mcu import (
    CompileReport,
    compile_report,
    load_mcu_dir,
    run_compile_matrix,
    synthesize_mcu,
    toolchain_info,
)
from accmine.metrics import EvalReport, evaluate_corpus
from accmine.pragma import parse_pragma
from accmine.report import PipelineCounts, render_report
from accmine.taxonomy import TaxonomyReport, taxonomy_report

log = logging.getLogger("accmine")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_pairs(path: str | Path) -> list[PragmaLoopPair]:
    return [PragmaLoopPair.from_dict(p) for p in read_json(path)["pairs"]]


# -- stages -------------------------------------------------------------------------------


def cmd_mine(args, cfg: PipelineConfig) -> dict:
    token = token_from_env()
    files = search_remote(default_queries(), token, cfg.remote.page_limit, cfg.remote.build())
    manifest = save_snapshot(files, _out_dir(cfg) / "snapshot")
    write_json(_out_dir(cfg) / "mine.config.json", {"config": cfg.provenance(), "files": len(files)})
    return {"files": len(files), "manifest": str(manifest)}


def cmd_extract(args, cfg: PipelineConfig) -> dict:
    src = args.input or cfg.snapshot or cfg.corpus
    if src is None:
        raise NotADirectory("extract needs --in (a source directory or snapshot)")
    files = load_snapshot(src) if is_snapshot(src) else ingest_directory(src).files
    report = corpus_extract(files, jobs=cfg.jobs)
    out = report.to_dict()
    out["config"] = cfg.provenance()
    write_json(_out_dir(cfg) / "pairs.json", out)
    return out["totals"]


def cmd_curate(args, cfg: PipelineConfig) -> dict:
    pairs = _load_pairs(args.input)
    kept, rejected = filter_pairs(pairs)
    dd = deduplicate(kept)
    stats = corpus_stats(dd.kept)
    counts = {"raw_pairs": len(pairs), "filtered": len(kept), "unique": len(dd.kept)}
    write_json(_out_dir(cfg) / "curated.json", {
        "config": cfg.provenance(),
        "counts": counts,
        "rejected": [r.to_dict() for r in rejected],
        "duplicates": sorted(p.id for p in dd.dropped),
        "group_sizes": dict(sorted(dd.group_sizes.items())),
        "stats": stats,
        "pairs": [p.to_dict() for p in dd.kept],
    })
    return counts


def cmd_split(args, cfg: PipelineConfig) -> dict:
    pairs = _load_pairs(args.input)
    s = split(pairs, cfg.ratio, cfg.seed)
    out = s.to_dict()
    out["config"] = cfg.provenance()
    write_json(_out_dir(cfg) / "split.json", out)
    return out["sizes"]


def cmd_format(args, cfg: PipelineConfig) -> dict:
    pairs = {p.id: p for p in _load_pairs(args.input)}
    assignment = SplitAssignment.from_dict(read_json(args.split)).assignment
    system_prompt = load_system_prompt(cfg.system_prompt)
    out = _out_dir(cfg)
    sizes = {}
    for part in ("train", "test"):
        ids = sorted(i for i, a in assignment.items() if a == part)
        records = [training_record(i, pairs[i].loop_text, pairs[i].pragma.canonical, system_prompt) for i in ids]
        write_records(records, out / f"{part}.jsonl")
        sizes[part] = len(records)
    test_ids = sorted(i for i, a in assignment.items() if a == "test")
    write_records([prompt_record(i, pairs[i].loop_text, system_prompt) for i in test_ids], out / "test_prompts.jsonl")
    write_json(out / "format.config.json", {"config": cfg.provenance(), "sizes": sizes})
    return sizes


def _reference_pragmas(records: Sequence[DatasetRecord]) -> dict:
    refs = {}
    for r in records:
        if r.reference is None:
            raise AccmineError(f"reference record {r.id} has no assistant message")
        refs[r.id] = parse_pragma(r.reference)
    return refs


def cmd_evaluate(args, cfg: PipelineConfig) -> dict:
    refs = _reference_pragmas(read_records(args.refs))
    report = evaluate_corpus(refs, read_generations(args.gens))
    out = _out_dir(cfg)
    d = report.to_dict()
    d["config"] = cfg.provenance()
    d["label"] = args.label
    write_json(out / "eval.json", d)
    (out / "eval.md").write_text(report.to_markdown(args.label), encoding="utf-8")
    return {"n": report.n, "exact_match_rate": report.exact_match_rate}


def cmd_taxonomy(args, cfg: PipelineConfig) -> dict:
    ev = EvalReport.from_dict(read_json(args.input))
    tax = taxonomy_report(ev.records)
    out = _out_dir(cfg)
    d = tax.to_dict()
    d["config"] = cfg.provenance()
    write_json(out / "taxonomy.json", d)
    (out / "taxonomy.md").write_text(tax.to_markdown(args.label), encoding="utf-8")
    return {"non_exact": tax.non_exact}


def cmd_mcu(args, cfg: PipelineConfig) -> dict:
    refs = read_records(args.refs)
    ref_pragmas = {r.id: r.reference for r in refs}
    gens = {g.id: g for g in read_generations(args.gens)} if args.gens else {}
    imported = load_mcu_dir(args.mcus) if args.mcus else {}
    pairs = {p.id: p for p in _load_pairs(args.input)} if args.input else {}
    mcus, missing = [], []
    for r in refs:
        if r.id in imported:
            mcus.append(imported[r.id])
        elif r.id in pairs:
            mcus.append(synthesize_mcu(pairs[r.id]))
        else:
            missing.append(r.id)
    compiler = cfg.compiler.build()
    outcomes = run_compile_matrix(mcus, ref_pragmas, gens, compiler, jobs=cfg.jobs)
    out = _out_dir(cfg)
    write_jsonl((o.to_dict() for o in outcomes), out / "outcomes.jsonl")
    rep = compile_report(outcomes, toolchain_info(compiler))
    d = rep.to_dict()
    d["config"] = cfg.provenance()
    d["missing_mcus"] = sorted(missing)
    d["incomplete_mcus"] = sorted(m.pair_id for m in mcus if m.incomplete)
    write_json(out / "compile.json", d)
    return {"mcus": rep.mcus, "baseline_pass": rep.baseline_pass}


def cmd_report(args, cfg: PipelineConfig) -> dict:
    src = Path(args.input)
    pipeline = stats = ev = tax = comp = None
    label = args.label
    if (src / "curated.json").is_file():
        cur = read_json(src / "curated.json")
        stats = cur["stats"]
        train = test = ratio = None
        if (src / "split.json").is_file():
            sp = read_json(src / "split.json")
            train, test, ratio = sp["sizes"]["train"], sp["sizes"]["test"], sp["ratio"]
        pipeline = PipelineCounts(**cur["counts"], train=train, test=test, ratio=ratio)
    if (src / "eval.json").is_file():
        raw = read_json(src / "eval.json")
        ev = EvalReport.from_dict(raw)
        label = raw.get("label", label) if args.label == "model" else args.label
    if (src / "taxonomy.json").is_file():
        tax = TaxonomyReport.from_dict(read_json(src / "taxonomy.json"))
    if (src / "compile.json").is_file():
        comp = CompileReport.from_dict(read_json(src / "compile.json"))
    md, data = render_report(pipeline, stats, ev, tax, comp, label=label)
    out = _out_dir(cfg)
    data["config"] = cfg.provenance()
    (out / "report.md").write_text(md, encoding="utf-8")
    write_json(out / "report.json", data)
    return {"sections": sorted(k for k in data if k != "config")}


COMMANDS = {
    "mine": (cmd_mine, "search the code-search API and store a snapshot"),
    "extract": (cmd_extract, "extract pragma-loop pairs from a directory or snapshot"),
    "curate": (cmd_curate, "filter invalid loops, deduplicate, and tally distributions"),
    "split": (cmd_split, "stratified train/test split"),
    "format": (cmd_format, "write JSONL training records and inference prompts"),
    "evaluate": (cmd_evaluate, "score generations against references"),
    "taxonomy": (cmd_taxonomy, "classify non-exact generations"),
    "mcu": (cmd_mcu, "run the gated compile matrix"),
    "report": (cmd_report, "render markdown and JSON summary tables"),
}


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _ratio(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"ratio must lie strictly between 0 and 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON pipeline config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=_positive_int)
    common.add_argument("--compiler", help="compiler executable")
    common.add_argument("--acc-flags", help="flags that enable OpenACC, e.g. '-fopenacc'")
    common.add_argument("--ratio", type=_ratio, help="training fraction")
    common.add_argument("--system-prompt", help="file holding the system prompt")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="accmine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("extract", "curate", "split", "format", "taxonomy", "report", "mcu"):
            p.add_argument("--in", dest="input", required=name not in ("extract", "mcu"),
                           help="input file or directory for this stage")
        else:
            p.set_defaults(input=None)
        if name == "format":
            p.add_argument("--split", required=True, help="split.json from the split stage")
        if name in ("evaluate", "mcu"):
            p.add_argument("--refs", required=True, help="reference JSONL records (with assistant messages)")
            p.add_argument("--gens", required=name == "evaluate", help="generations JSONL with id and output")
        if name == "mcu":
            p.add_argument("--mcus", help="directory of authored <pair-id>.c/.cpp MCUs")
        if name in ("evaluate", "taxonomy", "report"):
            p.add_argument("--label", default="model", help="model name for table rows")
    return parser


def effective_config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=args.seed,
        out=args.out,
        jobs=args.jobs,
        ratio=args.ratio,
        system_prompt=args.system_prompt,
        compiler_executable=args.compiler,
        compiler_acc_flags=shlex.split(args.acc_flags) if args.acc_flags is not None else None,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    fn, _ = COMMANDS[args.command]
    try:
        cfg = effective_config(args)
        summary = fn(args, cfg)
    except AccmineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
