"""Per-record and corpus-level scores for generated pragmas."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from rapidfuzz.distance import Levenshtein

from accmine.dataset import GenerationRecord
from accmine.errors import EmptyInput, NotAnAccPragma, UnbalancedParentheses, UnknownId
from accmine.pragma import Pragma, clause_set, directive_type, normalize_pragma, parse_pragma

NONE_CLASS = "none"


def exact_match(ref: Pragma, gen: Pragma) -> bool:
    return ref.canonical == gen.canonical


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance over code points."""
    return Levenshtein.distance(a, b)


def levenshtein_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


def clause_jaccard(ref: Pragma, gen: Pragma) -> float:
    r, g = clause_set(ref), clause_set(gen)
    union = r | g
    if not union:
        return 1.0
    return len(r & g) / len(union)


@dataclass(frozen=True)
class EvalRecord:
    id: str
    reference: Pragma
    generated: Pragma | None
    generated_text: str | None
    extraction_failed: bool
    exact_match: bool
    levenshtein_sim: float
    directive_match: bool
    jaccard: float

    @property
    def gold_class(self) -> str:
        return directive_type(self.reference).value

    @property
    def predicted_class(self) -> str:
        if self.extraction_failed:
            return NONE_CLASS
        if self.generated is None:
            return "unknown"
        return directive_type(self.generated).value

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "reference": self.reference.canonical,
            "generated": self.generated_text,
            "extraction_failed": self.extraction_failed,
            "exact_match": self.exact_match,
            "levenshtein_sim": self.levenshtein_sim,
            "directive_match": self.directive_match,
            "jaccard": self.jaccard,
            "gold_class": self.gold_class,
            "predicted_class": self.predicted_class,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        generated = None
        if d.get("generated") is not None:
            try:
                generated = parse_pragma(d["generated"])
            except (NotAnAccPragma, UnbalancedParentheses):
                generated = None
        return cls(
            id=d["id"],
            reference=parse_pragma(d["reference"]),
            generated=generated,
            generated_text=d.get("generated"),
            extraction_failed=d["extraction_failed"],
            exact_match=d["exact_match"],
            levenshtein_sim=d["levenshtein_sim"],
            directive_match=d["directive_match"],
            jaccard=d["jaccard"],
        )


def evaluate_record(record_id: str, ref: Pragma, generated_text: str | None) -> EvalRecord:
    """Score one generation. ``generated_text`` is None for an extraction failure.

    A generated line that starts with ``#pragma acc`` but does not parse still
    gets a Levenshtein score; its directive and clause scores are zero.
    """
    if generated_text is None:
        return EvalRecord(record_id, ref, None, None, True, False, 0.0, False, 0.0)
    text = normalize_pragma(generated_text)
    try:
        gen = parse_pragma(text)
    except (NotAnAccPragma, UnbalancedParentheses):
        lev = levenshtein_similarity(ref.canonical, text)
        return EvalRecord(record_id, ref, None, text, False, False, lev, False, 0.0)
    return EvalRecord(
        id=record_id,
        reference=ref,
        generated=gen,
        generated_text=gen.canonical,
        extraction_failed=False,
        exact_match=exact_match(ref, gen),
        levenshtein_sim=levenshtein_similarity(ref.canonical, gen.canonical),
        directive_match=directive_type(ref) == directive_type(gen),
        jaccard=clause_jaccard(ref, gen),
    )


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1, "support": self.support}


@dataclass
class PRF:
    per_class: dict[str, ClassScores]
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "per_class": {k: v.to_dict() for k, v in self.per_class.items()},
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall, "f1": self.macro_f1},
        }


def prf_from_labels(gold: Sequence[str], pred: Sequence[str]) -> PRF:
    """Macro precision/recall/F1 over the classes present in ``gold``.

    Computed with exact fractions and converted to float at the end.
    """
    if not gold:
        raise EmptyInput("directive P/R/F1 needs at least one record")
    if len(gold) != len(pred):
        raise ValueError("gold and predicted label lists differ in length")
    classes = sorted(set(gold))
    per_class = {}
    sums = [Fraction(0), Fraction(0), Fraction(0)]
    for c in classes:
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
        per_class[c] = ClassScores(float(precision), float(recall), float(f1), tp + fn)
        sums[0] += precision
        sums[1] += recall
        sums[2] += f1
    k = len(classes)
    return PRF(per_class, float(sums[0] / k), float(sums[1] / k), float(sums[2] / k))


def directive_prf(records: Sequence[EvalRecord]) -> PRF:
    return prf_from_labels([r.gold_class for r in records], [r.predicted_class for r in records])


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


@dataclass
class EvalReport:
    records: list[EvalRecord]
    exact_match_rate: float
    mean_levenshtein: float
    directive_accuracy: float
    directive_accuracy_excluding_failures: float
    mean_jaccard: float
    extraction_failure_rate: float
    prf: PRF
    missing_ids: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.records)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "exact_match_rate": self.exact_match_rate,
            "mean_levenshtein": self.mean_levenshtein,
            "directive_accuracy": self.directive_accuracy,
            "directive_accuracy_excluding_failures": self.directive_accuracy_excluding_failures,
            "mean_jaccard": self.mean_jaccard,
            "extraction_failure_rate": self.extraction_failure_rate,
            "directive_prf": self.prf.to_dict(),
            "missing_ids": list(self.missing_ids),
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return aggregate([EvalRecord.from_dict(r) for r in d["records"]], d.get("missing_ids", []))

    def to_markdown(self, label: str = "model") -> str:
        m = self.prf
        lines = [
            "| Model | P (%) | R (%) | F1 (%) |",
            "|---|---:|---:|---:|",
            f"| {label} | {100 * m.macro_precision:.2f} | {100 * m.macro_recall:.2f} | {100 * m.macro_f1:.2f} |",
            "",
            "| Metric | Value |",
            "|---|---:|",
            f"| Exact match accuracy | {self.exact_match_rate:.4f} |",
            f"| Mean Levenshtein similarity | {self.mean_levenshtein:.4f} |",
            f"| Directive-type match accuracy | {self.directive_accuracy:.4f} |",
            f"| Mean clause-wise Jaccard similarity | {self.mean_jaccard:.4f} |",
            f"| Extraction failure rate | {self.extraction_failure_rate:.4f} |",
            f"| Records | {self.n} |",
        ]
        return "\n".join(lines) + "\n"


def aggregate(records: Sequence[EvalRecord], missing_ids: Sequence[str] = ()) -> EvalReport:
    if not records:
        raise EmptyInput("no generations to evaluate")
    extracted = [r for r in records if not r.extraction_failed]
    return EvalReport(
        records=list(records),
        exact_match_rate=_mean([float(r.exact_match) for r in records]),
        mean_levenshtein=_mean([r.levenshtein_sim for r in records]),
        directive_accuracy=_mean([float(r.directive_match) for r in records]),
        directive_accuracy_excluding_failures=_mean([float(r.directive_match) for r in extracted]),
        mean_jaccard=_mean([r.jaccard for r in records]),
        extraction_failure_rate=_mean([float(r.extraction_failed) for r in records]),
        prf=directive_prf(records),
        missing_ids=list(missing_ids),
    )


def evaluate_corpus(refs: Mapping[str, Pragma], gens: Sequence[GenerationRecord]) -> EvalReport:
    """Score every generation against the reference with the same id.

    Records come out sorted by id. References without a generation are listed
    in ``missing_ids``; a generation without a reference raises ``UnknownId``.
    """
    for g in gens:
        if g.id not in refs:
            raise UnknownId(g.id)
    records = [
        evaluate_record(g.id, refs[g.id], None if g.extraction_failed else g.extracted_pragma)
        for g in sorted(gens, key=lambda g: g.id)
    ]
    seen = {g.id for g in gens}
    missing = sorted(i for i in refs if i not in seen)
    return aggregate(records, missing)
