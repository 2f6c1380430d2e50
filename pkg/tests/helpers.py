"""Builders for synthetic pairs and records used across test modules."""

from accmine.extract import PragmaLoopPair, pair_id
from accmine.pragma import parse_pragma

_CLAUSES = ["gang", "vector", "independent", "copyin(a)", "copyout(b)", "present(c)", "private(t)",
            "collapse(2)", "async(1)", "num_gangs(8)", "vector_length(64)", "reduction(+:s)", "seq"]


def pragma_with_score(score):
    """``#pragma acc`` text whose complexity score is exactly ``score`` (>= 1)."""
    clauses = []
    for k in range(score - 1):
        base = _CLAUSES[k % len(_CLAUSES)]
        clauses.append(base if k < len(_CLAUSES) else f"async({k})")
    return " ".join(["#pragma acc loop", *clauses])


def make_pair(idx, pragma="#pragma acc parallel loop", body=None, file="synthetic.c", stacked=False, loop_text=None):
    body = body if body is not None else f"a[i] = {idx};"
    loop_text = loop_text or f"for (i = 0; i < n; i++) {{\n    {body}\n}}"
    p = parse_pragma(pragma)
    return PragmaLoopPair(
        id=pair_id(p, loop_text),
        pragma=p,
        loop_text=loop_text,
        loop_body=body,
        file=file,
        pragma_line=1,
        loop_line=2,
        loop_span=(0, len(loop_text)),
        stacked=stacked,
    )


_CATEGORY_PAIRS = {
    "exact": ("#pragma acc parallel loop gang", "#pragma acc parallel loop gang"),
    "directive": ("#pragma acc parallel loop", "#pragma acc kernels"),
    "reordering": ("#pragma acc parallel loop present(val[0:gs0]) reduction(+:sum)",
                   "#pragma acc parallel loop reduction(+:sum) present(val[0:gs0])"),
    "major": ("#pragma acc parallel loop present(x)", "#pragma acc parallel loop copyin(x)"),
    "minor": ("#pragma acc parallel loop gang present(a) copyout(b)", "#pragma acc parallel loop present(a) copyout(b)"),
    "failure": ("#pragma acc loop", None),
}


def synthetic_eval_records(**counts):
    """EvalRecords with the requested number of each category key in ``_CATEGORY_PAIRS``."""
    from accmine.metrics import evaluate_record

    out = []
    for kind, n in counts.items():
        ref, gen = _CATEGORY_PAIRS[kind]
        for k in range(n):
            out.append(evaluate_record(f"{kind}-{k:04d}", parse_pragma(ref), gen))
    return out


def stub_mcus(n, failing=()):
    """``n`` tiny MCUs; ids in ``failing`` carry the stub's fail-baseline comment."""
    from accmine.mcu import Mcu

    out = []
    for k in range(n):
        pid = f"m{k:02d}"
        tag = "/* stub:fail-baseline */\n" if pid in failing else ""
        src = f"{tag}void f(int n, double *a) {{\n    <TARGET_PRAGMA_LOCATION>\n    for (int i = 0; i < n; i++) a[i] = {k};\n}}\n"
        out.append(Mcu(pid, src))
    return out


def read_stub_log(path):
    import json

    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines()]
