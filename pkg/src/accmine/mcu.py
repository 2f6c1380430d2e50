"""Minimal compilable units: instantiation, synthesis, and the gated compile matrix.

Each unit is compiled three ways: without a pragma and without OpenACC
enabled (the baseline), then with the reference pragma and with the generated
pragma, both with OpenACC enabled. The pragma variants only run when the
baseline compiles.
"""

from __future__ import annotations

import enum
import logging
import os
import re
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import tree_sitter

from accmine.dataset import MARKER, GenerationRecord
from accmine.errors import CompilerNotFound, MarkerDuplicated, MarkerMissing, SynthesisIncomplete
from accmine.extract import PragmaLoopPair, parse_text
from accmine.pragma import Pragma

log = logging.getLogger(__name__)

MCU_SIZE = 1000
MATH_FUNCTIONS = frozenset(
    {"sqrt", "sqrtf", "exp", "expf", "log", "logf", "pow", "powf", "fabs", "fabsf", "abs", "sin", "sinf", "cos",
     "cosf", "tan", "atan", "atan2", "floor", "ceil", "fmax", "fmin", "fmod", "tanh", "log10", "cbrt", "round"}
)
KNOWN_TYPES = frozenset({"size_t", "ptrdiff_t"})
INT_OPERATORS = frozenset({"%", "<<", ">>", "&", "|", "^"})
# clauses whose arguments are keywords, not variables
KEYWORD_CLAUSES = frozenset({"default", "device_type", "dtype"})
_CLAUSE_ARG = re.compile(r"([A-Za-z_]\w*)((?:\s*\[[^\]]*\])*)")
_IDENT = re.compile(r"[A-Za-z_]\w*")
_ARG_PREFIX = re.compile(r"^\s*(?:num|static|length|force)\s*:\s*")


class Origin(str, enum.Enum):
    IMPORTED = "imported"
    SYNTHESIZED = "synthesized"


class Variant(str, enum.Enum):
    NO_PRAGMA = "no_pragma"
    REFERENCE = "reference_pragma"
    GENERATED = "generated_pragma"


VARIANT_ORDER = {v: k for k, v in enumerate(Variant)}


@dataclass(frozen=True)
class Mcu:
    pair_id: str
    source: str
    origin: Origin = Origin.IMPORTED
    language: str = "c"
    incomplete: tuple[str, ...] = ()

    def __post_init__(self):
        _check_marker(self.source)

    @property
    def suffix(self) -> str:
        return "cpp" if self.language == "cpp" else "c"


def _check_marker(source: str) -> None:
    n = source.count(MARKER)
    if n == 0:
        raise MarkerMissing("source has no target marker")
    if n > 1:
        raise MarkerDuplicated(f"target marker occurs {n} times")


def instantiate(mcu: Mcu | str, pragma: Pragma | str | None) -> str:
    """Replace the marker line with ``pragma`` (keeping its indentation) or delete it."""
    source = mcu.source if isinstance(mcu, Mcu) else mcu
    _check_marker(source)
    lines = source.splitlines(keepends=True)
    k = next(i for i, line in enumerate(lines) if MARKER in line)
    line = lines[k]
    if pragma is None:
        lines[k] = ""
    else:
        text = pragma.canonical if isinstance(pragma, Pragma) else pragma
        body = line.rstrip("\r\n")
        ending = line[len(body):]
        indent = body[: len(body) - len(body.lstrip())]
        lines[k] = indent + text + ending
    return "".join(lines)


# -- compilation ------------------------------------------------------------------------


@dataclass
class CompilerConfig:
    executable: str = "nvc"
    base_flags: tuple[str, ...] = ("-c",)
    acc_flags: tuple[str, ...] = ("-acc", "-Minfo=accel")
    timeout: float = 60.0
    workdir: str | None = None
    cxx_executable: str | None = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("compiler timeout must be positive")
        self.base_flags = tuple(self.base_flags)
        self.acc_flags = tuple(self.acc_flags)

    def executable_for(self, language: str) -> str:
        if language == "cpp" and self.cxx_executable:
            return self.cxx_executable
        return self.executable

    def argv(self, language: str, src: str, obj: str, acc_enabled: bool) -> list[str]:
        acc = list(self.acc_flags) if acc_enabled else []
        return [self.executable_for(language), *self.base_flags, *acc, src, "-o", obj]

    def to_dict(self) -> dict:
        return {
            "executable": self.executable,
            "cxx_executable": self.cxx_executable,
            "base_flags": list(self.base_flags),
            "acc_flags": list(self.acc_flags),
            "timeout": self.timeout,
        }


@dataclass
class McuOutcome:
    pair_id: str
    variant: Variant
    attempted: bool
    success: bool
    diagnostics: str = ""
    duration: float = 0.0
    skip_reason: str | None = None

    def __post_init__(self):
        if not self.attempted and (self.success or self.variant == Variant.NO_PRAGMA):
            raise ValueError("an unattempted outcome must be a failed pragma variant")

    def sort_key(self):
        return self.pair_id, VARIANT_ORDER[self.variant]

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "variant": self.variant.value,
            "attempted": self.attempted,
            "success": self.success,
            "diagnostics": self.diagnostics,
            "duration": round(self.duration, 6),
            "skip_reason": self.skip_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McuOutcome":
        return cls(d["pair_id"], Variant(d["variant"]), d["attempted"], d["success"], d.get("diagnostics", ""),
                   d.get("duration", 0.0), d.get("skip_reason"))


def resolve_compiler(cfg: CompilerConfig, languages: Iterable[str] = ("c",)) -> None:
    for lang in sorted(set(languages)):
        exe = cfg.executable_for(lang)
        if shutil.which(exe) is None:
            raise CompilerNotFound(exe)


def compile(source: str, cfg: CompilerConfig, acc_enabled: bool, pair_id: str = "mcu",
            variant: Variant = Variant.NO_PRAGMA, language: str = "c") -> McuOutcome:
    """Compile ``source`` once, compile-only, and record the result."""
    exe = cfg.executable_for(language)
    if shutil.which(exe) is None:
        raise CompilerNotFound(exe)
    suffix = "cpp" if language == "cpp" else "c"
    with tempfile.TemporaryDirectory(prefix="accmine-", dir=cfg.workdir) as tmp:
        src = os.path.join(tmp, f"{pair_id}.{variant.value}.{suffix}")
        obj = os.path.join(tmp, f"{pair_id}.{variant.value}.o")
        Path(src).write_text(source, encoding="utf-8")
        argv = cfg.argv(language, src, obj, acc_enabled)
        start = time.perf_counter()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.timeout, cwd=tmp)
        except subprocess.TimeoutExpired:
            return McuOutcome(pair_id, variant, True, False, "timeout", time.perf_counter() - start)
        duration = time.perf_counter() - start
    diagnostics = (proc.stdout + proc.stderr).replace(tmp + os.sep, "")
    return McuOutcome(pair_id, variant, True, proc.returncode == 0, diagnostics, duration)


def _pragma_text(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, GenerationRecord):
        return None if value.extraction_failed else value.extracted_pragma
    if isinstance(value, Pragma):
        return value.canonical
    return str(value)


def _run_one(mcu: Mcu, ref, gen, cfg: CompilerConfig) -> list[McuOutcome]:
    pid = mcu.pair_id
    base = compile(instantiate(mcu, None), cfg, False, pid, Variant.NO_PRAGMA, mcu.language)
    out = [base]
    ref_text, gen_text = _pragma_text(ref), _pragma_text(gen)
    for variant, text, missing in (
        (Variant.REFERENCE, ref_text, "missing_reference"),
        (Variant.GENERATED, gen_text, "extraction_failure" if gen is not None else "missing_generation"),
    ):
        if not base.success:
            out.append(McuOutcome(pid, variant, False, False, skip_reason="baseline_failed"))
        elif text is None:
            out.append(McuOutcome(pid, variant, False, False, skip_reason=missing))
        else:
            out.append(compile(instantiate(mcu, text), cfg, True, pid, variant, mcu.language))
    return out


def run_compile_matrix(mcus: Iterable[Mcu], refs: Mapping[str, object], gens: Mapping[str, object],
                       cfg: CompilerConfig, jobs: int = 1) -> list[McuOutcome]:
    """Gated three-variant compile of every MCU, sorted by pair id then variant.

    ``refs`` and ``gens`` map pair ids to pragma text, :class:`Pragma` or
    :class:`GenerationRecord`. A generation that is missing or failed
    extraction is skipped without invoking the compiler.
    """
    mcus = sorted(mcus, key=lambda m: m.pair_id)
    resolve_compiler(cfg, {m.language for m in mcus} or {"c"})
    work = [(m, refs.get(m.pair_id), gens.get(m.pair_id)) for m in mcus]
    if jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda w: _run_one(*w, cfg), work))
    else:
        results = [_run_one(*w, cfg) for w in work]
    outcomes = [o for group in results for o in group]
    outcomes.sort(key=McuOutcome.sort_key)
    return outcomes


def toolchain_info(cfg: CompilerConfig) -> dict:
    exe = shutil.which(cfg.executable)
    info = {"executable": cfg.executable, "resolved": exe, "version": None}
    if exe is None:
        return info
    try:
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True, timeout=10)
        lines = [ln for ln in (proc.stdout + proc.stderr).splitlines() if ln.strip()]
        info["version"] = lines[0].strip() if lines else None
    except (OSError, subprocess.TimeoutExpired):
        pass
    return info


# -- report -------------------------------------------------------------------------------


@dataclass
class VariantStats:
    attempted: int = 0
    success: int = 0

    @property
    def rate(self) -> float:
        return self.success / self.attempted if self.attempted else 0.0

    def to_dict(self) -> dict:
        return {"attempted": self.attempted, "success": self.success, "rate": self.rate}


@dataclass
class CompileReport:
    mcus: int
    variants: dict[str, VariantStats]
    skipped: dict[str, int]
    toolchain: dict = field(default_factory=dict)

    @property
    def baseline_pass(self) -> int:
        return self.variants[Variant.NO_PRAGMA.value].success

    def to_dict(self) -> dict:
        return {
            "mcus": self.mcus,
            "baseline_pass": self.baseline_pass,
            "variants": {k: v.to_dict() for k, v in self.variants.items()},
            "skipped": dict(sorted(self.skipped.items())),
            "toolchain": self.toolchain,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompileReport":
        variants = {k: VariantStats(v["attempted"], v["success"]) for k, v in d["variants"].items()}
        return cls(d["mcus"], variants, dict(d.get("skipped", {})), dict(d.get("toolchain", {})))

    def to_markdown(self) -> str:
        names = {
            Variant.NO_PRAGMA.value: "MCU with no pragma",
            Variant.REFERENCE.value: "MCU with reference pragma",
            Variant.GENERATED.value: "MCU with generated pragma",
        }
        lines = ["| Variant | Success | Attempted | Rate (%) |", "|---|---:|---:|---:|"]
        for key, label in names.items():
            s = self.variants[key]
            lines.append(f"| {label} | {s.success} | {s.attempted} | {100 * s.rate:.1f} |")
        return "\n".join(lines) + "\n"


def compile_report(outcomes: Iterable[McuOutcome], toolchain: dict | None = None) -> CompileReport:
    variants = {v.value: VariantStats() for v in Variant}
    skipped: dict[str, int] = {}
    ids = set()
    for o in outcomes:
        ids.add(o.pair_id)
        stats = variants[o.variant.value]
        if o.attempted:
            stats.attempted += 1
            stats.success += int(o.success)
        else:
            key = f"{o.variant.value}:{o.skip_reason}"
            skipped[key] = skipped.get(key, 0) + 1
    return CompileReport(len(ids), variants, skipped, dict(toolchain or {}))


# -- import and synthesis -----------------------------------------------------------------


def load_mcu_dir(path: str | os.PathLike) -> dict[str, Mcu]:
    """MCUs authored elsewhere, one ``<pair-id>.c`` or ``.cpp`` per unit."""
    out = {}
    for p in sorted(Path(path).iterdir()):
        if p.suffix not in (".c", ".cpp") or not p.is_file():
            continue
        lang = "cpp" if p.suffix == ".cpp" else "c"
        out[p.stem] = Mcu(p.stem, p.read_text(encoding="utf-8"), Origin.IMPORTED, lang)
    return out


@dataclass
class _Role:
    dims: int = 0
    integer: bool = False


def _innermost_identifier(node: tree_sitter.Node) -> tree_sitter.Node | None:
    while node is not None and node.type != "identifier":
        node = node.child_by_field_name("declarator")
    return node


def _base_identifier(node: tree_sitter.Node) -> tree_sitter.Node | None:
    while node.type in ("subscript_expression", "parenthesized_expression"):
        node = node.child_by_field_name("argument") if node.type == "subscript_expression" else node.named_children[0]
    return node if node.type == "identifier" else None


def _walk(node: tree_sitter.Node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def _in_field(node: tree_sitter.Node, parent_type: str, field_name: str, stop: tree_sitter.Node) -> bool:
    child, parent = node, node.parent
    while parent is not None and child != stop:
        if parent.type == parent_type and parent.child_by_field_name(field_name) == child:
            return True
        child, parent = parent, parent.parent
    return False


def _collect_loop_roles(loop: tree_sitter.Node, roles: dict[str, _Role], reasons: list[str]) -> set[str]:
    local: set[str] = set()
    for n in _walk(loop):
        t = n.type
        if t == "declaration":
            for d in n.children_by_field_name("declarator"):
                ident = _innermost_identifier(d)
                if ident is not None:
                    local.add(ident.text.decode())
        elif t == "type_identifier" and n.text.decode() not in KNOWN_TYPES:
            reasons.append(f"unknown type {n.text.decode()}")
        elif t == "field_expression":
            reasons.append(f"member access {n.text.decode()}")
        elif t == "pointer_expression":
            reasons.append(f"pointer dereference {n.text.decode()}")
        elif t in ("qualified_identifier", "template_function"):
            reasons.append(f"qualified name {n.text.decode()}")
        elif t == "binary_expression":
            op = n.child_by_field_name("operator")
            if op is not None and op.type in INT_OPERATORS:
                for side in ("left", "right"):
                    base = _base_identifier(n.child_by_field_name(side))
                    if base is not None:
                        roles.setdefault(base.text.decode(), _Role()).integer = True
        elif t == "identifier":
            _identifier_role(n, loop, roles, reasons)
    return local


def _identifier_role(n: tree_sitter.Node, loop: tree_sitter.Node, roles: dict[str, _Role], reasons: list[str]) -> None:
    name = n.text.decode()
    parent = n.parent
    if parent.type == "call_expression" and parent.child_by_field_name("function") == n:
        if name not in MATH_FUNCTIONS:
            reasons.append(f"unknown call {name}")
        return
    if parent.type in ("labeled_statement", "goto_statement"):
        return
    role = roles.setdefault(name, _Role())
    dims, node = 0, n
    while node.parent is not None and node.parent.type == "subscript_expression" \
            and node.parent.child_by_field_name("argument") == node:
        dims += 1
        node = node.parent
    role.dims = max(role.dims, dims)
    if _in_field(n, "subscript_expression", "index", loop):
        role.integer = True
    elif dims == 0 and any(_in_field(n, "for_statement", f, loop.parent) for f in ("initializer", "condition", "update")):
        role.integer = True


def _collect_pragma_roles(pragma: Pragma, roles: dict[str, _Role]) -> None:
    for clause in pragma.clauses:
        if clause.args is None or clause.name in KEYWORD_CLAUSES:
            continue
        args = clause.args
        if clause.name == "reduction":
            args = args.split(":", 1)[-1]
        data_clause = clause.name not in {"collapse", "num_gangs", "num_workers", "vector_length", "async", "wait",
                                          "if", "tile", "gang", "worker", "vector", "self"}
        for part in args.split(","):
            part = _ARG_PREFIX.sub("", part)
            for m in _CLAUSE_ARG.finditer(part):
                name, brackets = m.group(1), m.group(2)
                role = roles.setdefault(name, _Role())
                if not data_clause:
                    role.integer = True
                role.dims = max(role.dims, brackets.count("["))
                for inner in _IDENT.findall(brackets):
                    roles.setdefault(inner, _Role()).integer = True


def _find_loop(tree: tree_sitter.Tree) -> tree_sitter.Node | None:
    for n in _walk(tree.root_node):
        if n.type in ("for_statement", "for_range_loop"):
            return n
    return None


def synthesize_mcu(pair: PragmaLoopPair, strict: bool = False) -> Mcu:
    """Heuristic MCU around one loop.

    Free identifiers become file-scope ``double`` arrays when subscripted and
    function-scope scalars otherwise; scalars used as indices, loop bounds or
    with integer-only operators become ``int``. Anything outside those roles
    (unknown calls, member access, unknown types) is listed in
    ``Mcu.incomplete``; with ``strict`` it raises ``SynthesisIncomplete``.
    """
    language = pair.language
    fn_open, fn_close = "void accmine_mcu(void) {\n", "\n}\n"
    tree = parse_text(fn_open + pair.loop_text + fn_close, language)
    loop = _find_loop(tree)
    roles: dict[str, _Role] = {}
    reasons: list[str] = []
    if loop is None or tree.root_node.has_error:
        reasons.append("loop does not parse")
        local: set[str] = set()
    else:
        local = _collect_loop_roles(loop, roles, reasons)
    pragma_roles: dict[str, _Role] = {}
    _collect_pragma_roles(pair.pragma, pragma_roles)
    for name, r in pragma_roles.items():
        role = roles.setdefault(name, _Role())
        role.dims = max(role.dims, r.dims)
        role.integer = role.integer or r.integer
    pragma_names = set(pragma_roles)

    arrays, scalars = [], []
    for name in sorted(roles):
        role = roles[name]
        if name in local and name not in pragma_names:
            continue
        ctype = "int" if role.integer else "double"
        if role.dims:
            arrays.append(f"{ctype} {name}" + "[MCU_SIZE]" * role.dims + ";")
        elif ctype == "int":
            scalars.append(f"    int {name} = MCU_SIZE;")
        else:
            scalars.append(f"    double {name} = 0.0;")

    reasons = sorted(set(reasons))
    if reasons and strict:
        raise SynthesisIncomplete("; ".join(reasons))
    header = [
        "#include <math.h>",
        "#include <stddef.h>",
        "",
        f"enum {{ MCU_SIZE = {MCU_SIZE} }};",
        "",
        *arrays,
        "" if arrays else None,
        fn_open.rstrip("\n"),
        *scalars,
        f"    {MARKER}",
    ]
    source = "\n".join(line for line in header if line is not None) + "\n" + pair.loop_text + fn_close
    return Mcu(pair.id, source, Origin.SYNTHESIZED, language, tuple(reasons))


def resolve_mcus(pairs: Sequence[PragmaLoopPair], imported: Mapping[str, Mcu] | None = None) -> list[Mcu]:
    """Imported MCUs win; every other pair gets a synthesized one."""
    imported = imported or {}
    out = []
    for p in pairs:
        m = imported.get(p.id)
        if m is None:
            m = synthesize_mcu(p)
            if m.incomplete:
                log.info("MCU for %s is incomplete: %s", p.id, "; ".join(m.incomplete))
        out.append(m)
    return sorted(out, key=lambda m: m.pair_id)


def mcu_to_dict(m: Mcu) -> dict:
    return {"pair_id": m.pair_id, "source": m.source, "origin": m.origin.value, "language": m.language,
            "incomplete": list(m.incomplete)}


def mcu_from_dict(d: dict) -> Mcu:
    return Mcu(d["pair_id"], d["source"], Origin(d["origin"]), d.get("language", "c"), tuple(d.get("incomplete", ())))
