"""JSONL chat records, inference prompts, and model generations."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from accmine.errors import MalformedLine
from accmine.pragma import is_acc_text, normalize_pragma

MARKER = "<TARGET_PRAGMA_LOCATION>"


def default_system_prompt() -> str:
    return resources.files("accmine").joinpath("assets/system_prompt.txt").read_text(encoding="utf-8")


def load_system_prompt(path: str | os.PathLike | None = None) -> str:
    if path is None:
        return default_system_prompt()
    return Path(path).read_text(encoding="utf-8")


def build_user_content(loop_text: str) -> str:
    if not loop_text:
        raise ValueError("loop text must be non-empty")
    return f"{MARKER}\n{loop_text}"


def loop_from_user_content(content: str) -> str:
    head, sep, rest = content.partition("\n")
    if head != MARKER or not sep:
        raise ValueError("user content does not start with the target marker line")
    return rest


@dataclass
class DatasetRecord:
    id: str
    messages: list[dict] = field(default_factory=list)

    @property
    def user_content(self) -> str:
        return next(m["content"] for m in self.messages if m["role"] == "user")

    @property
    def reference(self) -> str | None:
        return next((m["content"] for m in self.messages if m["role"] == "assistant"), None)

    def to_dict(self) -> dict:
        return {"id": self.id, "messages": [dict(m) for m in self.messages]}

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        return cls(id=d["id"], messages=[{"role": m["role"], "content": m["content"]} for m in d["messages"]])

    def as_prompt(self) -> "DatasetRecord":
        return DatasetRecord(self.id, [dict(m) for m in self.messages if m["role"] != "assistant"])


def training_record(pair_id: str, loop_text: str, pragma_text: str, system_prompt: str) -> DatasetRecord:
    return DatasetRecord(
        pair_id,
        [
            {"role": "system", "content": system_prompt},
            {"role": "user", "content": build_user_content(loop_text)},
            {"role": "assistant", "content": normalize_pragma(pragma_text)},
        ],
    )


def prompt_record(pair_id: str, loop_text: str, system_prompt: str) -> DatasetRecord:
    return DatasetRecord(
        pair_id,
        [
            {"role": "system", "content": system_prompt},
            {"role": "user", "content": build_user_content(loop_text)},
        ],
    )


def write_jsonl(rows: Iterable[dict], path: str | os.PathLike) -> None:
    lines = [json.dumps(r, ensure_ascii=False) for r in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(line + "\n" for line in lines))


def read_jsonl(path: str | os.PathLike) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(number, exc.msg) from exc
            if not isinstance(obj, dict):
                raise MalformedLine(number, "expected a JSON object")
            rows.append(obj)
    return rows


def write_records(records: Sequence[DatasetRecord], path: str | os.PathLike) -> None:
    write_jsonl((r.to_dict() for r in records), path)


def read_records(path: str | os.PathLike) -> list[DatasetRecord]:
    out = []
    for number, row in enumerate(read_jsonl(path), start=1):
        try:
            out.append(DatasetRecord.from_dict(row))
        except (KeyError, TypeError) as exc:
            raise MalformedLine(number, f"missing field {exc}") from exc
    return out


# -- generations --------------------------------------------------------------------


@dataclass(frozen=True)
class GenerationRecord:
    id: str
    raw_output: str
    extracted_pragma: str | None
    extraction_failed: bool


def extract_generation(raw_output: str) -> tuple[str | None, bool]:
    """First line of ``raw_output`` that normalizes to a ``#pragma acc`` line."""
    for line in raw_output.splitlines():
        if is_acc_text(line):
            return normalize_pragma(line), False
    return None, True


def generation_record(record_id: str, raw_output: str) -> GenerationRecord:
    pragma, failed = extract_generation(raw_output)
    return GenerationRecord(record_id, raw_output, pragma, failed)


def read_generations(path: str | os.PathLike) -> list[GenerationRecord]:
    out = []
    for number, row in enumerate(read_jsonl(path), start=1):
        if "id" not in row or "output" not in row:
            raise MalformedLine(number, "generation rows need 'id' and 'output'")
        out.append(generation_record(str(row["id"]), str(row["output"])))
    return out


@dataclass
class Pairing:
    matched: list[tuple[DatasetRecord, GenerationRecord]]
    missing_generations: list[str]
    unknown_generations: list[str]


def join_generations(refs: Sequence[DatasetRecord], gens: Sequence[GenerationRecord]) -> Pairing:
    by_id = {r.id: r for r in refs}
    matched, unknown = [], []
    seen = set()
    for g in gens:
        if g.id in by_id:
            matched.append((by_id[g.id], g))
            seen.add(g.id)
        else:
            unknown.append(g.id)
    missing = [r.id for r in refs if r.id not in seen]
    return Pairing(matched, missing, unknown)
