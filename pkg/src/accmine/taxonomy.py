"""Four-way classification of non-exact generations and its summary table."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable

from accmine.errors import NotAnError
from accmine.metrics import EvalRecord

MAJOR_THRESHOLD = 0.5


class ErrorCategory(str, enum.Enum):
    DIRECTIVE_CHOICE = "directive_choice"
    CLAUSE_REORDERING = "clause_reordering"
    MAJOR_CLAUSE = "major_clause"
    MINOR_CLAUSE = "minor_clause"


def classify(rec: EvalRecord) -> ErrorCategory:
    """Category of a non-exact record. A jaccard of exactly 0.5 counts as minor."""
    if rec.exact_match:
        raise NotAnError(rec.id)
    if not rec.directive_match:
        return ErrorCategory.DIRECTIVE_CHOICE
    if rec.jaccard == 1.0:
        return ErrorCategory.CLAUSE_REORDERING
    if rec.jaccard < MAJOR_THRESHOLD:
        return ErrorCategory.MAJOR_CLAUSE
    return ErrorCategory.MINOR_CLAUSE


def percent(part: int, whole: int) -> int:
    """Integer percentage, halves rounded up; 0 for an empty whole."""
    if whole == 0:
        return 0
    return int((Decimal(100 * part) / Decimal(whole)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class TaxonomyReport:
    test_size: int
    non_exact: int
    directive_choice: int
    reordering: int
    major: int
    minor: int

    @property
    def clause_errors(self) -> int:
        return self.non_exact - self.directive_choice

    def check(self) -> None:
        assert self.reordering + self.major + self.minor == self.clause_errors
        assert 0 <= self.non_exact <= self.test_size

    def to_dict(self) -> dict:
        t, c = self.test_size, self.clause_errors
        return {
            "test_size": t,
            "non_exact": {"count": self.non_exact, "pct_of_test": percent(self.non_exact, t)},
            "directive_choice": {"count": self.directive_choice, "pct_of_test": percent(self.directive_choice, t)},
            "clause_errors": {
                "count": c,
                "pct_of_test": percent(c, t),
                "reordering": {"count": self.reordering, "pct_of_clause": percent(self.reordering, c)},
                "major": {"count": self.major, "pct_of_clause": percent(self.major, c)},
                "minor": {"count": self.minor, "pct_of_clause": percent(self.minor, c)},
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaxonomyReport":
        c = d["clause_errors"]
        return cls(
            test_size=d["test_size"],
            non_exact=d["non_exact"]["count"],
            directive_choice=d["directive_choice"]["count"],
            reordering=c["reordering"]["count"],
            major=c["major"]["count"],
            minor=c["minor"]["count"],
        )

    def rows(self) -> list[tuple[str, str]]:
        t, c = self.test_size, self.clause_errors
        return [
            ("Total Non-Exact Matches", f"{self.non_exact}({percent(self.non_exact, t)}% of {t})"),
            ("Directive Choice Error", f"{self.directive_choice}({percent(self.directive_choice, t)}% of {t})"),
            ("Clause Error (Correct Directive)", f"{c}({percent(c, t)}% of {t})"),
            ("a. Clause Reordering", f"{self.reordering}({percent(self.reordering, c)}% of {c})"),
            ("b. Major Clause Error", f"{self.major}({percent(self.major, c)}% of {c})"),
            ("c. Minor Clause Error", f"{self.minor}({percent(self.minor, c)}% of {c})"),
        ]

    def to_markdown(self, label: str = "model") -> str:
        lines = [f"| Error Category | {label} |", "|---|---:|"]
        lines += [f"| {name} | {value} |" for name, value in self.rows()]
        return "\n".join(lines) + "\n"


def taxonomy_report(records: Iterable[EvalRecord]) -> TaxonomyReport:
    records = list(records)
    counts = {c: 0 for c in ErrorCategory}
    for rec in records:
        if not rec.exact_match:
            counts[classify(rec)] += 1
    report = TaxonomyReport(
        test_size=len(records),
        non_exact=sum(counts.values()),
        directive_choice=counts[ErrorCategory.DIRECTIVE_CHOICE],
        reordering=counts[ErrorCategory.CLAUSE_REORDERING],
        major=counts[ErrorCategory.MAJOR_CLAUSE],
        minor=counts[ErrorCategory.MINOR_CLAUSE],
    )
    report.check()
    return report
