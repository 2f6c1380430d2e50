"""Filtering, deduplication, stratified splitting and corpus statistics."""

from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Iterable, Sequence

from accmine.errors import EmptyCorpus
from accmine.extract import FOR_TYPES, PragmaLoopPair, parse_text
from accmine.pragma import ComplexityBin, DirectiveType, complexity_bin, complexity_score, directive_type

DEFAULT_SEED = 42
DEFAULT_RATIO = 0.8
PRNG_NAME = "mt19937"  # random.Random; stable across CPython versions and platforms


class RejectionReason(str, enum.Enum):
    EMPTY_LOOP = "empty_loop"
    INFINITE_LOOP = "infinite_loop_no_body"
    BREAK = "break_statement"
    GOTO = "goto_statement"
    CONTINUE = "continue_statement"
    RETURN = "return_statement"


_CONTROL = {
    "break_statement": RejectionReason.BREAK,
    "goto_statement": RejectionReason.GOTO,
    "continue_statement": RejectionReason.CONTINUE,
    "return_statement": RejectionReason.RETURN,
}
_LOOPS = FOR_TYPES | {"while_statement", "do_statement"}
_WRAP_HEAD = "void accmine_wrap(void) {\n"


@dataclass(frozen=True)
class Rejection:
    pair: PragmaLoopPair
    reason: RejectionReason

    def to_dict(self) -> dict:
        return {"id": self.pair.id, "file": self.pair.file, "reason": self.reason.value}


def _loop_node(pair: PragmaLoopPair):
    tree = parse_text(_WRAP_HEAD + pair.loop_text + "\n}\n", pair.language)
    stack = [tree.root_node]
    while stack:
        node = stack.pop()
        if node.type in FOR_TYPES:
            return node
        stack.extend(reversed(node.children))
    return None


def _is_empty_statement(node) -> bool:
    if node.type == "comment":
        return True
    if node.type == "expression_statement":
        return node.named_child_count == 0
    if node.type == "compound_statement":
        return all(_is_empty_statement(c) for c in node.named_children)
    return False


def _break_leaves_loop(node, loop) -> bool:
    parent = node.parent
    while parent is not None and parent != loop:
        if parent.type == "switch_statement":
            return False
        if parent.type in _LOOPS:
            return True
        parent = parent.parent
    return True


def rejection_reason(pair: PragmaLoopPair) -> RejectionReason | None:
    """First rule that rejects ``pair``, or None when the loop is kept."""
    loop = _loop_node(pair)
    if loop is None:
        return RejectionReason.EMPTY_LOOP
    body = loop.child_by_field_name("body")
    empty_body = body is None or _is_empty_statement(body)
    if loop.type == "for_statement" and loop.child_by_field_name("condition") is None:
        return RejectionReason.INFINITE_LOOP
    if empty_body:
        return RejectionReason.EMPTY_LOOP

    found = set()
    stack = [body]
    while stack:
        node = stack.pop()
        reason = _CONTROL.get(node.type)
        if reason is RejectionReason.BREAK:
            if _break_leaves_loop(node, loop):
                found.add(reason)
        elif reason is not None:
            found.add(reason)
        stack.extend(node.children)
    for reason in (RejectionReason.BREAK, RejectionReason.GOTO, RejectionReason.CONTINUE, RejectionReason.RETURN):
        if reason in found:
            return reason
    return None


def filter_pairs(pairs: Iterable[PragmaLoopPair]) -> tuple[list[PragmaLoopPair], list[Rejection]]:
    kept, rejected = [], []
    for pair in pairs:
        reason = rejection_reason(pair)
        if reason is None:
            kept.append(pair)
        else:
            rejected.append(Rejection(pair, reason))
    return kept, rejected


@dataclass
class DedupResult:
    kept: list[PragmaLoopPair]
    dropped: list[PragmaLoopPair]
    group_sizes: dict[str, int] = field(default_factory=dict)


def deduplicate(pairs: Sequence[PragmaLoopPair]) -> DedupResult:
    """Keep one pair per byte-identical loop body.

    The representative is the first pair of its group in input order, except
    that a pair flagged ``stacked`` gives way to the first non-stacked pair of
    the same group (the nearest pragma describes the loop).
    """
    groups: dict[str, list[int]] = {}
    for idx, pair in enumerate(pairs):
        groups.setdefault(pair.loop_body, []).append(idx)
    keep_idx = set()
    sizes = {}
    for members in groups.values():
        rep = next((i for i in members if not pairs[i].stacked), members[0])
        keep_idx.add(rep)
        if len(members) > 1:
            sizes[pairs[rep].id] = len(members)
    kept = [p for i, p in enumerate(pairs) if i in keep_idx]
    dropped = [p for i, p in enumerate(pairs) if i not in keep_idx]
    return DedupResult(kept, dropped, sizes)


def pair_bin(pair: PragmaLoopPair) -> ComplexityBin:
    return complexity_bin(complexity_score(pair.pragma))


@dataclass
class SplitAssignment:
    assignment: dict[str, str]
    seed: int
    ratio: float
    prng: str = PRNG_NAME

    @property
    def train(self) -> list[str]:
        return [k for k, v in self.assignment.items() if v == "train"]

    @property
    def test(self) -> list[str]:
        return [k for k, v in self.assignment.items() if v == "test"]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "ratio": self.ratio,
            "prng": self.prng,
            "sizes": {"train": len(self.train), "test": len(self.test)},
            "assignment": dict(sorted(self.assignment.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitAssignment":
        return cls(assignment=dict(d["assignment"]), seed=d["seed"], ratio=d["ratio"], prng=d.get("prng", PRNG_NAME))


def _round_half_up(x: Fraction) -> int:
    return floor(x + Fraction(1, 2))


def bin_quotas(bin_sizes: dict[ComplexityBin, int], ratio: float) -> dict[ComplexityBin, int]:
    """Train count per bin: floor(ratio*size) plus one for the bins with the
    largest fractional parts until the total reaches round(ratio*N)."""
    r = Fraction(str(ratio))
    exact = {b: r * n for b, n in bin_sizes.items()}
    quota = {b: floor(x) for b, x in exact.items()}
    target = _round_half_up(r * sum(bin_sizes.values()))
    order = list(ComplexityBin)
    extra = sorted(
        (b for b in bin_sizes if exact[b] != quota[b]),
        key=lambda b: (-(exact[b] - quota[b]), order.index(b)),
    )
    for b in extra[: target - sum(quota.values())]:
        quota[b] += 1
    return quota


def split(pairs: Sequence[PragmaLoopPair], ratio: float = DEFAULT_RATIO, seed: int = DEFAULT_SEED) -> SplitAssignment:
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    if not pairs:
        raise EmptyCorpus("cannot split an empty corpus")
    ids = [p.id for p in pairs]
    if len(set(ids)) != len(ids):
        raise ValueError("pair ids must be unique; deduplicate first")

    by_bin: dict[ComplexityBin, list[str]] = {}
    for p in pairs:
        by_bin.setdefault(pair_bin(p), []).append(p.id)
    quotas = bin_quotas({b: len(v) for b, v in by_bin.items()}, ratio)

    rng = random.Random(seed)
    assignment = {}
    for b in ComplexityBin:
        members = sorted(by_bin.get(b, []))
        rng.shuffle(members)
        k = quotas.get(b, 0)
        for i, pid in enumerate(members):
            assignment[pid] = "train" if i < k else "test"
    return SplitAssignment(assignment=assignment, seed=seed, ratio=ratio)


def corpus_stats(pairs: Iterable[PragmaLoopPair]) -> dict:
    types, bins = Counter(), Counter()
    n = 0
    for p in pairs:
        types[directive_type(p.pragma).value] += 1
        bins[pair_bin(p).value] += 1
        n += 1
    return {
        "directive_types": {t.value: types[t.value] for t in DirectiveType},
        "complexity_bins": {b.value: bins[b.value] for b in ComplexityBin},
        "total": n,
    }
