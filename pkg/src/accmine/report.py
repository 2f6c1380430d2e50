"""Markdown and JSON summary of whichever pipeline stages have been run."""

from __future__ import annotations

from dataclasses import dataclass

from accmine.errors import EmptyInput
from accmine.mcu import CompileReport
from accmine.metrics import EvalReport
from accmine.pragma import ComplexityBin, DirectiveType
from accmine.taxonomy import TaxonomyReport

BIN_LABELS = {
    ComplexityBin.SIMPLE.value: "simple (0-2)",
    ComplexityBin.MEDIUM.value: "medium (3-5)",
    ComplexityBin.COMPLEX.value: "complex (6-10)",
    ComplexityBin.VERY_COMPLEX.value: "very complex (11+)",
}


@dataclass
class PipelineCounts:
    raw_pairs: int
    filtered: int
    unique: int
    train: int | None = None
    test: int | None = None
    ratio: float | None = None

    def to_dict(self) -> dict:
        return {"raw_pairs": self.raw_pairs, "filtered": self.filtered, "unique": self.unique,
                "train": self.train, "test": self.test, "ratio": self.ratio}

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineCounts":
        return cls(d["raw_pairs"], d["filtered"], d["unique"], d.get("train"), d.get("test"), d.get("ratio"))


def _table(header: list[str], rows: list[list], align: str) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---:" if a == "r" else "---" for a in align) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _pipeline_section(c: PipelineCounts) -> list[str]:
    rows = [
        ["*Initially*", c.raw_pairs],
        ["Remove Pairs with Invalid Loops", c.filtered],
        ["Deduplicate", c.unique],
        ["**Total Pragma-Loop Pairs**", f"**{c.unique}**"],
    ]
    if c.train is not None and c.ratio is not None:
        train_pct = round(100 * c.ratio)
        rows.append([f"Training Dataset ({train_pct}%)", c.train])
        rows.append([f"Testing Dataset ({100 - train_pct}%)", c.test])
    return ["## Dataset Creation through the Steps", ""] + _table(["Processing Step", "# of pragma-loop pairs"], rows, "lr")


def _distribution_sections(stats: dict) -> list[str]:
    bins = [[BIN_LABELS[k], v] for k, v in stats["complexity_bins"].items()]
    order = {d.value: k for k, d in enumerate(DirectiveType)}
    types = sorted(stats["directive_types"].items(), key=lambda kv: (-kv[1], order.get(kv[0], len(order))))
    out = ["## Pragma Complexity Distribution", ""]
    out += _table(["Pragma Complexity Type (by Complexity Score)", "Frequency"], bins, "lr")
    out += ["", "## Directive Type Distribution", ""]
    out += _table(["Directive Type", "Frequency"], [[k, v] for k, v in types], "lr")
    return out


def _eval_section(ev: EvalReport, label: str) -> list[str]:
    m = ev.prf
    out = ["## Precision, Recall, and F1-Score for Directive Type Prediction", ""]
    out += _table(["Model", "P (%)", "R (%)", "F1 (%)"],
                  [[label, f"{100 * m.macro_precision:.2f}", f"{100 * m.macro_recall:.2f}", f"{100 * m.macro_f1:.2f}"]],
                  "lrrr")
    out += ["", "## Evaluation Metrics", ""]
    out += _table(["Metric", "Value"], [
        ["Exact match accuracy", f"{ev.exact_match_rate:.4f}"],
        ["Mean Levenshtein similarity", f"{ev.mean_levenshtein:.4f}"],
        ["Directive-type match accuracy", f"{ev.directive_accuracy:.4f}"],
        ["Directive-type match accuracy (extraction failures excluded)", f"{ev.directive_accuracy_excluding_failures:.4f}"],
        ["Mean clause-wise Jaccard similarity", f"{ev.mean_jaccard:.4f}"],
        ["Extraction failure rate", f"{ev.extraction_failure_rate:.4f}"],
        ["Records", ev.n],
    ], "lr")
    return out


def _taxonomy_section(tax: TaxonomyReport, label: str) -> list[str]:
    out = ["## Comparison of Error Categories", ""]
    return out + _table(["Error Category", label], [[k, v] for k, v in tax.rows()], "lr")


def _compile_section(comp: CompileReport) -> list[str]:
    out = ["## Compilation Success by MCU Variant", ""]
    out += comp.to_markdown().rstrip("\n").split("\n")
    tc = comp.toolchain
    if tc:
        out += ["", f"Toolchain: `{tc.get('executable')}` {tc.get('version') or '(version unknown)'}"]
    return out


def render_report(
    pipeline: PipelineCounts | None = None,
    stats: dict | None = None,
    evaluation: EvalReport | None = None,
    taxonomy: TaxonomyReport | None = None,
    compile_rates: CompileReport | None = None,
    label: str = "model",
) -> tuple[str, dict]:
    """Markdown text and a JSON-ready dict; sections without input are left out."""
    if all(x is None for x in (pipeline, stats, evaluation, taxonomy, compile_rates)):
        raise EmptyInput("nothing to report")
    sections: list[list[str]] = []
    data: dict = {}
    if pipeline is not None:
        sections.append(_pipeline_section(pipeline))
        data["pipeline"] = pipeline.to_dict()
    if stats is not None:
        sections.append(_distribution_sections(stats))
        data["distributions"] = {"complexity_bins": stats["complexity_bins"], "directive_types": stats["directive_types"]}
    if evaluation is not None:
        sections.append(_eval_section(evaluation, label))
        summary = evaluation.to_dict()
        summary.pop("records")
        data["evaluation"] = summary
    if taxonomy is not None:
        sections.append(_taxonomy_section(taxonomy, label))
        data["taxonomy"] = taxonomy.to_dict()
    if compile_rates is not None:
        sections.append(_compile_section(compile_rates))
        data["compile"] = compile_rates.to_dict()
    md = "# Pipeline Report\n\n" + "\n\n".join("\n".join(s) for s in sections) + "\n"
    return md, data
