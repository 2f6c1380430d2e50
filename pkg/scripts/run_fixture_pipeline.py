"""Run every offline stage on the bundled fixture corpus and print the report.

Generations are simulated from the test references (most echoed, a few
perturbed) unless --gens is given. Compilation uses gcc with -fopenacc when it
is on PATH; pass --compiler/--acc-flags for another toolchain or --no-mcu to skip.
"""

import argparse
import random
import shutil
import sys
from pathlib import Path

from accmine.cli import main as cli
from accmine.dataset import read_records, write_jsonl

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "tests" / "fixtures" / "corpus"


def simulate_generations(refs_path, out_path, seed):
    rng = random.Random(seed)
    rows = []
    for rec in read_records(refs_path):
        ref = rec.reference
        roll = rng.random()
        if roll < 0.15:
            text = "Unable to determine a pragma for this loop."
        elif roll < 0.3:
            text = "#pragma acc kernels"
        elif roll < 0.45:
            text = ref + " independent"
        else:
            text = ref
        rows.append({"id": rec.id, "output": text})
    write_jsonl(rows, out_path)


def run(*argv):
    code = cli([str(a) for a in argv])
    if code != 0:
        sys.exit(code)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/fixture")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--gens", help="generations JSONL with id and output")
    ap.add_argument("--compiler", default="gcc")
    ap.add_argument("--acc-flags", default="-fopenacc")
    ap.add_argument("--no-mcu", action="store_true")
    args = ap.parse_args()

    out = Path(args.out)
    run("extract", "--in", CORPUS, "--out", out)
    run("curate", "--in", out / "pairs.json", "--out", out)
    run("split", "--in", out / "curated.json", "--seed", args.seed, "--out", out)
    run("format", "--in", out / "curated.json", "--split", out / "split.json", "--out", out)
    gens = Path(args.gens) if args.gens else out / "generations.jsonl"
    if not args.gens:
        simulate_generations(out / "test.jsonl", gens, args.seed)
    run("evaluate", "--refs", out / "test.jsonl", "--gens", gens, "--label", "simulated", "--out", out)
    run("taxonomy", "--in", out / "eval.json", "--out", out)
    if not args.no_mcu and shutil.which(args.compiler):
        run("mcu", "--in", out / "curated.json", "--refs", out / "test.jsonl", "--gens", gens,
            "--compiler", args.compiler, f"--acc-flags={args.acc_flags}", "--out", out)
    run("report", "--in", out, "--out", out)
    print((out / "report.md").read_text())


if __name__ == "__main__":
    main()
