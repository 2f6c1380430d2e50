"""Locate ``#pragma acc`` lines that sit directly above a ``for`` loop.

Files are parsed with tree-sitter (C or C++ grammar by extension). Pragma nodes
are scanned within each sibling list: comments and further pragma lines are
skipped, and if the next real statement is a ``for`` (or C++ range-for) the
pragma is paired with it.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import tree_sitter
import tree_sitter_c
import tree_sitter_cpp

from accmine.errors import GrammarUnavailable, NotAnAccPragma, UnbalancedParentheses
from accmine.ingest import SourceFile
from accmine.pragma import Pragma, parse_pragma

C_EXTENSIONS = frozenset({"c", "h"})
CPP_EXTENSIONS = frozenset({"cc", "cpp", "cxx", "c++", "hpp", "hh", "hxx", "h++"})
FOR_TYPES = frozenset({"for_statement", "for_range_loop"})

SKIP_NOT_FOR = "NotFollowedByFor"

_BLOCK_COMMENT = re.compile(r"/\*.*?\*/", re.S)
_CONTINUATION = re.compile(r"\\\r?\n")


@lru_cache(maxsize=None)
def _language(name: str) -> tree_sitter.Language:
    module = tree_sitter_c if name == "c" else tree_sitter_cpp
    return tree_sitter.Language(module.language())


def language_for(path: str) -> str:
    ext = path.rsplit(".", 1)[-1].lower() if "." in path else ""
    if ext in C_EXTENSIONS:
        return "c"
    if ext in CPP_EXTENSIONS:
        return "cpp"
    raise GrammarUnavailable(f"no C/C++ grammar for {path!r}")


def parse_text(text: str | bytes, language: str) -> tree_sitter.Tree:
    data = text.encode("utf-8") if isinstance(text, str) else text
    return tree_sitter.Parser(_language(language)).parse(data)


@dataclass(frozen=True)
class ParsedSource:
    tree: tree_sitter.Tree
    source: bytes
    language: str

    @property
    def root(self) -> tree_sitter.Node:
        return self.tree.root_node


def parse_source(f: SourceFile) -> ParsedSource:
    language = language_for(f.path)
    source = f.text.encode("utf-8")
    return ParsedSource(parse_text(source, language), source, language)


@dataclass(frozen=True)
class PragmaLoopPair:
    id: str
    pragma: Pragma
    loop_text: str
    loop_body: str
    file: str
    pragma_line: int
    loop_line: int
    loop_span: tuple[int, int]
    stacked: bool = False
    language: str = "c"
    raw_pragma: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pragma": self.pragma.canonical,
            "raw_pragma": self.raw_pragma,
            "loop_text": self.loop_text,
            "loop_body": self.loop_body,
            "file": self.file,
            "pragma_line": self.pragma_line,
            "loop_line": self.loop_line,
            "loop_span": list(self.loop_span),
            "stacked": self.stacked,
            "language": self.language,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PragmaLoopPair":
        return cls(
            id=d["id"],
            pragma=parse_pragma(d["pragma"]),
            loop_text=d["loop_text"],
            loop_body=d["loop_body"],
            file=d["file"],
            pragma_line=d["pragma_line"],
            loop_line=d["loop_line"],
            loop_span=tuple(d["loop_span"]),
            stacked=d.get("stacked", False),
            language=d.get("language", "c"),
            raw_pragma=d.get("raw_pragma", ""),
        )


def pair_id(pragma: Pragma, loop_text: str) -> str:
    return hashlib.sha256(f"{pragma.canonical}\n{loop_text}".encode("utf-8")).hexdigest()[:16]


def logical_line(source: bytes, start: int) -> str:
    """Text of the preprocessor line starting at ``start``, continuations joined
    and comments removed."""
    end = start
    while True:
        nl = source.find(b"\n", end)
        if nl < 0:
            end = len(source)
            break
        if source[start:nl].rstrip(b"\r").endswith(b"\\"):
            end = nl + 1
            continue
        end = nl
        break
    text = source[start:end].decode("utf-8", errors="replace")
    text = _CONTINUATION.sub(" ", text)
    text = _BLOCK_COMMENT.sub(" ", text)
    cut = text.find("//")
    if cut >= 0:
        text = text[:cut]
    return text.replace("\r", " ").strip()


def _is_pragma_node(node: tree_sitter.Node) -> bool:
    if node.type not in ("preproc_call", "ERROR") or node.child_count == 0:
        return False
    first = node.children[0]
    return first.type == "preproc_directive" and first.text.replace(b" ", b"").replace(b"\t", b"") == b"#pragma"


def _pragma_text(node: tree_sitter.Node, source: bytes) -> str:
    return logical_line(source, node.start_byte)


def _is_acc(text: str) -> bool:
    return " ".join(text.split()).startswith("#pragma acc")


def loop_body_text(loop: tree_sitter.Node, source: bytes) -> str:
    body = loop.child_by_field_name("body")
    if body is None:
        return ""
    raw = source[body.start_byte : body.end_byte]
    if body.type == "compound_statement" and raw.startswith(b"{") and raw.endswith(b"}"):
        raw = raw[1:-1]
    return raw.decode("utf-8", errors="replace").strip()


@dataclass
class FileExtraction:
    pairs: list[PragmaLoopPair] = field(default_factory=list)
    skipped: Counter = field(default_factory=Counter)
    pragmas: int = 0


def extract_pairs(parsed: ParsedSource, f: SourceFile) -> FileExtraction:
    source = parsed.source
    out = FileExtraction()
    stack = [parsed.root]
    found = []
    while stack:
        node = stack.pop()
        children = node.children
        for i, child in enumerate(children):
            if not _is_pragma_node(child):
                continue
            text = _pragma_text(child, source)
            if not _is_acc(text):
                continue
            out.pragmas += 1
            found.append((child, text, _next_statement(children, i, source)))
        stack.extend(reversed([c for c in children if c.child_count]))

    for node, text, (target, stacked) in sorted(found, key=lambda t: t[0].start_byte):
        try:
            pragma = parse_pragma(text)
        except (NotAnAccPragma, UnbalancedParentheses) as exc:
            out.skipped[type(exc).__name__] += 1
            continue
        if target is None or target.type not in FOR_TYPES:
            out.skipped[SKIP_NOT_FOR] += 1
            continue
        loop_text = source[target.start_byte : target.end_byte].decode("utf-8", errors="replace")
        out.pairs.append(
            PragmaLoopPair(
                id=pair_id(pragma, loop_text),
                pragma=pragma,
                loop_text=loop_text,
                loop_body=loop_body_text(target, source),
                file=f.location,
                pragma_line=node.start_point.row + 1,
                loop_line=target.start_point.row + 1,
                loop_span=(target.start_byte, target.end_byte),
                stacked=stacked,
                language=parsed.language,
                raw_pragma=text,
            )
        )
    return out


def _next_statement(siblings, i: int, source: bytes):
    """First sibling after ``i`` that is neither a comment nor a pragma line.

    Returns (node or None, stacked) where ``stacked`` says another ``acc``
    pragma lies between ``siblings[i]`` and that node.
    """
    stacked = False
    for sib in siblings[i + 1 :]:
        if sib.type == "comment":
            continue
        if _is_pragma_node(sib):
            if _is_acc(_pragma_text(sib, source)):
                stacked = True
            continue
        return sib, stacked
    return None, stacked


@dataclass
class ExtractionReport:
    pairs: list[PragmaLoopPair]
    skipped: dict[str, int]
    files: int
    pragmas: int
    unparsed_files: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pairs": [p.to_dict() for p in self.pairs],
            "skipped": dict(sorted(self.skipped.items())),
            "unparsed_files": list(self.unparsed_files),
            "totals": {
                "files": self.files,
                "pragmas": self.pragmas,
                "pairs": len(self.pairs),
                "skipped": sum(self.skipped.values()),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionReport":
        return cls(
            pairs=[PragmaLoopPair.from_dict(p) for p in d["pairs"]],
            skipped=dict(d.get("skipped", {})),
            files=d["totals"]["files"],
            pragmas=d["totals"]["pragmas"],
            unparsed_files=list(d.get("unparsed_files", [])),
        )


def _extract_file(f: SourceFile) -> FileExtraction | str:
    try:
        parsed = parse_source(f)
    except GrammarUnavailable as exc:
        return str(exc)
    return extract_pairs(parsed, f)


def corpus_extract(files: Iterable[SourceFile], jobs: int = 1) -> ExtractionReport:
    files = list(files)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_file, files, chunksize=8))
    else:
        results = [_extract_file(f) for f in files]

    pairs, skipped, pragmas, unparsed = [], Counter(), 0, []
    for f, res in zip(files, results):
        if isinstance(res, str):
            unparsed.append(f.location)
            continue
        pairs.extend(res.pairs)
        skipped.update(res.skipped)
        pragmas += res.pragmas
    return ExtractionReport(pairs=pairs, skipped=dict(skipped), files=len(files), pragmas=pragmas, unparsed_files=unparsed)
