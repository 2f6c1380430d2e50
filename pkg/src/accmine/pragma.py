"""Parsing, normalization, classification and scoring of ``#pragma acc`` lines.

Every other module goes through :func:`parse_pragma` and :func:`normalize_pragma`
so that the canonical form used for exact matching is defined in one place.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from accmine.errors import NotAnAccPragma, UnbalancedParentheses

PREFIX = "#pragma acc"

# Keywords that may form the directive part of a pragma, e.g. ``enter data``.
DIRECTIVE_VOCAB = frozenset(
    {
        "parallel",
        "kernels",
        "serial",
        "loop",
        "data",
        "enter",
        "exit",
        "wait",
        "atomic",
        "routine",
        "update",
        "host_data",
        "declare",
        "cache",
    }
)

_TIGHT = set("()[]:,")
_OPEN = {"(": ")", "[": "]"}
_CLOSE = {")": "(", "]": "["}
_WS = re.compile(r"\s+")


class DirectiveType(str, enum.Enum):
    LOOP = "loop"
    PARALLEL = "parallel"
    KERNELS = "kernels"
    SERIAL = "serial"
    DATA = "data"
    ENTER = "enter"
    EXIT = "exit"
    WAIT = "wait"
    UNKNOWN = "unknown"


class ComplexityBin(str, enum.Enum):
    SIMPLE = "simple"
    MEDIUM = "medium"
    COMPLEX = "complex"
    VERY_COMPLEX = "very_complex"


@dataclass(frozen=True)
class RawPragma:
    text: str
    file: str
    line: int

    def __post_init__(self):
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("pragma text must be a single line")
        if self.line < 1:
            raise ValueError("line numbers are 1-based")


@dataclass(frozen=True)
class Clause:
    name: str
    args: str
    canonical: str


@dataclass(frozen=True)
class Pragma:
    directives: tuple[str, ...]
    clauses: tuple[Clause, ...]
    canonical: str

    @property
    def directive_type(self) -> DirectiveType:
        return directive_type(self)

    def __str__(self) -> str:
        return self.canonical


def normalize_pragma(text: str) -> str:
    """Return the canonical spelling of a pragma line.

    Whitespace runs collapse to one space. Inside parenthesized argument text,
    spaces next to ``( ) [ ] : ,`` are dropped, and a space before ``(`` is
    dropped everywhere so that ``copyin (a)`` and ``copyin(a)`` coincide.
    Case is preserved. The transform is idempotent.
    """
    collapsed = _WS.sub(" ", text.strip())
    out = []
    depth = 0
    n = len(collapsed)
    for k, ch in enumerate(collapsed):
        if ch == " ":
            prev = collapsed[k - 1] if k > 0 else ""
            nxt = collapsed[k + 1] if k + 1 < n else ""
            if nxt == "(":
                continue
            if depth > 0 and (prev in _TIGHT or nxt in _TIGHT):
                continue
            out.append(ch)
            continue
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth = max(depth - 1, 0)
        out.append(ch)
    return "".join(out)


def _check_balanced(body: str, source: str) -> None:
    stack = []
    for ch in body:
        if ch in _OPEN:
            stack.append(ch)
        elif ch in _CLOSE:
            if not stack or stack[-1] != _CLOSE[ch]:
                raise UnbalancedParentheses(f"unbalanced {ch!r} in {source!r}")
            stack.pop()
    if stack:
        raise UnbalancedParentheses(f"unclosed {stack[-1]!r} in {source!r}")


def _tokens(body: str) -> list[str]:
    # split on spaces and commas that sit outside any brackets
    tokens, cur, depth = [], [], 0
    for ch in body:
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
        if depth == 0 and ch in " ,":
            if cur:
                tokens.append("".join(cur))
            cur = []
            continue
        cur.append(ch)
    if cur:
        tokens.append("".join(cur))
    return tokens


def _clause(token: str) -> Clause:
    paren = token.find("(")
    if paren < 0:
        return Clause(name=token.lower(), args="", canonical=token)
    depth = 0
    end = len(token) - 1
    for k in range(paren, len(token)):
        if token[k] in _OPEN:
            depth += 1
        elif token[k] in _CLOSE:
            depth -= 1
            if depth == 0:
                end = k
                break
    return Clause(name=token[:paren].lower(), args=token[paren + 1 : end], canonical=token)


def is_acc_text(text: str) -> bool:
    """True when the normalized text starts with ``#pragma acc`` as a whole word."""
    norm = normalize_pragma(text)
    return norm == PREFIX or norm.startswith(PREFIX + " ")


def parse_pragma(text: str) -> Pragma:
    canonical = normalize_pragma(text)
    if not (canonical == PREFIX or canonical.startswith(PREFIX + " ")):
        raise NotAnAccPragma(f"not an OpenACC pragma: {text!r}")
    body = canonical[len(PREFIX) + 1 :]
    if not body:
        raise NotAnAccPragma(f"OpenACC pragma without a directive: {text!r}")
    _check_balanced(body, text)
    tokens = _tokens(body)
    head = tokens[0].split("(", 1)[0]
    if not head:
        raise NotAnAccPragma(f"OpenACC pragma without a directive: {text!r}")

    directives = [head.lower()]
    clauses: list[Clause] = []
    # a parenthesized head such as ``wait(1)`` ends the directive part
    in_directives = "(" not in tokens[0]
    for tok in tokens[1:]:
        if in_directives and "(" not in tok and tok.lower() in DIRECTIVE_VOCAB:
            directives.append(tok.lower())
            continue
        in_directives = False
        clauses.append(_clause(tok))
    return Pragma(directives=tuple(directives), clauses=tuple(clauses), canonical=canonical)


_TYPED = {t.value for t in DirectiveType} - {"unknown"}


def directive_type(p: Pragma) -> DirectiveType:
    first = p.directives[0] if p.directives else ""
    return DirectiveType(first) if first in _TYPED else DirectiveType.UNKNOWN


def complexity_score(p: Pragma) -> int:
    return len(p.directives) + len(p.clauses)


def complexity_bin(score: int) -> ComplexityBin:
    if score < 0:
        raise ValueError(f"complexity score must be non-negative, got {score}")
    if score <= 2:
        return ComplexityBin.SIMPLE
    if score <= 5:
        return ComplexityBin.MEDIUM
    if score <= 10:
        return ComplexityBin.COMPLEX
    return ComplexityBin.VERY_COMPLEX


def clause_set(p: Pragma) -> frozenset[str]:
    return frozenset(c.canonical for c in p.clauses)
