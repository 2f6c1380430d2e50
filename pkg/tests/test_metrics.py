import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from accmine.dataset import generation_record
from accmine.errors import EmptyInput, UnknownId
from accmine.metrics import (
    EvalReport,
    clause_jaccard,
    directive_prf,
    edit_distance,
    evaluate_corpus,
    evaluate_record,
    exact_match,
    levenshtein_similarity,
    prf_from_labels,
)
from accmine.pragma import parse_pragma

REORDER_A = "#pragma acc parallel loop present(val[0:gs0]) reduction(+ : sum)"
REORDER_B = "#pragma acc parallel loop reduction(+ : sum) present(val[0:gs0])"


def full_matrix_distance(a, b):
    """Textbook Wagner-Fischer with the whole (len(a)+1) x (len(b)+1) table."""
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[len(a)][len(b)]


def oracle_similarity(a, b):
    if not a and not b:
        return 1.0
    return 1.0 - full_matrix_distance(a, b) / max(len(a), len(b))


# -- exact match ----------------------------------------------------------------------


def test_exact_match_identity():
    p = parse_pragma("#pragma acc loop gang vector")
    assert exact_match(p, p)


def test_exact_match_reordered_is_false():
    assert not exact_match(parse_pragma(REORDER_A), parse_pragma(REORDER_B))


def test_exact_match_after_spacing_normalization():
    a = parse_pragma("#pragma acc  parallel loop   copyin( a[0 : n] )")
    b = parse_pragma("#pragma acc parallel loop copyin(a[0:n])")
    assert exact_match(a, b)


# -- levenshtein --------------------------------------------------------------------


def test_levenshtein_identity_and_empty():
    assert levenshtein_similarity("abc", "abc") == 1.0
    assert levenshtein_similarity("", "") == 1.0
    assert levenshtein_similarity("", "abcd") == 0.0


def test_levenshtein_known_values():
    assert edit_distance("kitten", "sitting") == 3
    assert levenshtein_similarity("kitten", "sitting") == pytest.approx(1 - 3 / 7)


def test_levenshtein_code_points():
    # one substitution of a non-BMP character, not two UTF-16 units
    assert edit_distance("a\U0001F600b", "a\U0001F601b") == 1


def test_levenshtein_matches_oracle_seeded():
    rng = random.Random(2024)
    alphabet = "ab#() :,acc"
    for _ in range(1000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 64)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 64)))
        assert levenshtein_similarity(a, b) == oracle_similarity(a, b)


@given(st.text(max_size=30), st.text(max_size=30), st.text(max_size=30))
@settings(max_examples=150)
def test_levenshtein_properties(a, b, c):
    s = levenshtein_similarity(a, b)
    assert s == levenshtein_similarity(b, a)
    assert 0.0 <= s <= 1.0
    assert (s == 1.0) == (a == b)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


# -- jaccard ------------------------------------------------------------------------


def test_jaccard_two_thirds():
    ref = parse_pragma("#pragma acc parallel loop copyin(a) present(b)")
    gen = parse_pragma("#pragma acc parallel loop present(b) copyin(a) reduction(+:c)")
    assert abs(clause_jaccard(ref, gen) - 2 / 3) < 1e-12


def test_jaccard_empty_sets():
    assert clause_jaccard(parse_pragma("#pragma acc kernels"), parse_pragma("#pragma acc parallel loop")) == 1.0


def test_jaccard_disjoint():
    a = parse_pragma("#pragma acc parallel loop present(x)")
    b = parse_pragma("#pragma acc parallel loop copyin(x)")
    assert clause_jaccard(a, b) == 0.0


CLAUSE_POOL = ["gang", "vector", "seq", "copyin(a)", "copyout(b)", "present(c)", "reduction(+:s)", "collapse(2)"]


@given(
    st.lists(st.sampled_from(CLAUSE_POOL), unique=True, max_size=6),
    st.lists(st.sampled_from(CLAUSE_POOL), unique=True, max_size=6),
    st.randoms(use_true_random=False),
)
@settings(max_examples=100)
def test_jaccard_symmetric_and_order_blind(xs, ys, rnd):
    a = parse_pragma(" ".join(["#pragma acc loop", *xs]))
    b = parse_pragma(" ".join(["#pragma acc loop", *ys]))
    shuffled = list(xs)
    rnd.shuffle(shuffled)
    a2 = parse_pragma(" ".join(["#pragma acc loop", *shuffled]))
    assert clause_jaccard(a, b) == clause_jaccard(b, a) == clause_jaccard(a2, b)


@given(st.lists(st.sampled_from(CLAUSE_POOL), unique=True, max_size=6), st.sampled_from(["loop", "parallel loop", "kernels"]))
def test_exact_implies_other_metrics(xs, head):
    text = " ".join([f"#pragma acc {head}", *xs])
    rec = evaluate_record("r", parse_pragma(text), text)
    assert rec.exact_match
    assert rec.directive_match and rec.jaccard == 1.0 and rec.levenshtein_sim == 1.0


# -- record scoring -------------------------------------------------------------------


def test_reorder_record():
    rec = evaluate_record("l2", parse_pragma(REORDER_A), REORDER_B)
    assert not rec.exact_match
    assert rec.directive_match
    assert rec.jaccard == 1.0


def test_extraction_failure_record():
    rec = evaluate_record("f", parse_pragma("#pragma acc loop"), None)
    assert rec.extraction_failed and rec.predicted_class == "none"
    assert (rec.exact_match, rec.levenshtein_sim, rec.directive_match, rec.jaccard) == (False, 0.0, False, 0.0)


def test_unparseable_generation_still_scored():
    rec = evaluate_record("u", parse_pragma("#pragma acc loop copyin(a)"), "#pragma acc loop copyin(a")
    assert not rec.extraction_failed and rec.generated is None
    assert 0.0 < rec.levenshtein_sim < 1.0
    assert not rec.directive_match and rec.jaccard == 0.0


# -- P/R/F1 -------------------------------------------------------------------------


def test_prf_six_record_confusion():
    gold = ["parallel", "parallel", "loop", "loop", "kernels", "kernels"]
    pred = ["parallel", "parallel", "loop", "parallel", "kernels", "kernels"]
    # confusion by hand:
    #   parallel TP2 FP1 FN0 -> P 2/3, R 1, F1 4/5
    #   loop     TP1 FP0 FN1 -> P 1,   R 1/2, F1 2/3
    #   kernels  TP2 FP0 FN0 -> P 1,   R 1, F1 1
    prf = prf_from_labels(gold, pred)
    assert prf.macro_precision == float(Fraction(8, 9))
    assert prf.macro_recall == float(Fraction(5, 6))
    assert prf.macro_f1 == float(Fraction(37, 45))
    assert prf.per_class["loop"].recall == 0.5
    assert prf.per_class["parallel"].precision == float(Fraction(2, 3))


def test_prf_all_wrong_is_zero():
    prf = prf_from_labels(["parallel", "loop", "kernels"], ["none", "none", "none"])
    assert (prf.macro_precision, prf.macro_recall, prf.macro_f1) == (0.0, 0.0, 0.0)


def test_prf_perfect():
    labels = ["parallel", "loop", "kernels", "loop"]
    prf = prf_from_labels(labels, labels)
    assert (prf.macro_precision, prf.macro_recall, prf.macro_f1) == (1.0, 1.0, 1.0)


def test_prf_empty():
    with pytest.raises(EmptyInput):
        directive_prf([])


CLASSES = ["parallel", "loop", "kernels", "serial"]


@given(st.lists(st.tuples(st.sampled_from(CLASSES), st.sampled_from(CLASSES + ["none"])), min_size=1, max_size=40), st.permutations(CLASSES))
def test_prf_relabeling_invariant(pairs, perm):
    mapping = dict(zip(CLASSES, perm))
    mapping["none"] = "none"
    gold, pred = zip(*pairs)
    a = prf_from_labels(gold, pred)
    b = prf_from_labels([mapping[g] for g in gold], [mapping[p] for p in pred])
    assert a.macro_f1 == pytest.approx(b.macro_f1, abs=1e-12)
    assert a.macro_precision == pytest.approx(b.macro_precision, abs=1e-12)
    f1s = [s.f1 for s in a.per_class.values()]
    assert a.macro_f1 == pytest.approx(sum(f1s) / len(f1s), abs=1e-12)


# -- corpus -------------------------------------------------------------------------


def test_corpus_one_exact_one_failure():
    refs = {"a": parse_pragma("#pragma acc loop"), "b": parse_pragma("#pragma acc kernels")}
    gens = [generation_record("a", "#pragma acc loop"), generation_record("b", "sorry")]
    rep = evaluate_corpus(refs, gens)
    assert rep.exact_match_rate == 0.5 and rep.extraction_failure_rate == 0.5
    assert rep.directive_accuracy == 0.5 and rep.directive_accuracy_excluding_failures == 1.0


def test_corpus_all_exact():
    refs = {str(k): parse_pragma(f"#pragma acc loop collapse({k})") for k in range(1, 5)}
    gens = [generation_record(k, v.canonical) for k, v in refs.items()]
    rep = evaluate_corpus(refs, gens)
    assert rep.exact_match_rate == rep.mean_levenshtein == rep.directive_accuracy == rep.mean_jaccard == 1.0
    assert rep.extraction_failure_rate == 0.0
    assert rep.prf.macro_f1 == 1.0


def test_corpus_unknown_id():
    with pytest.raises(UnknownId):
        evaluate_corpus({"a": parse_pragma("#pragma acc loop")}, [generation_record("zz", "#pragma acc loop")])


def test_corpus_missing_listed():
    refs = {"a": parse_pragma("#pragma acc loop"), "b": parse_pragma("#pragma acc loop")}
    rep = evaluate_corpus(refs, [generation_record("b", "#pragma acc loop")])
    assert rep.missing_ids == ["a"] and rep.n == 1


def test_corpus_empty_generations():
    with pytest.raises(EmptyInput):
        evaluate_corpus({"a": parse_pragma("#pragma acc loop")}, [])


TEN = [
    ("r0", "#pragma acc parallel loop", "#pragma acc parallel loop"),
    ("r1", "#pragma acc parallel loop present(val[0:gs0]) reduction(+:sum)", "#pragma acc parallel loop reduction(+:sum) present(val[0:gs0])"),
    ("r2", "#pragma acc parallel loop present(x)", "#pragma acc parallel loop copyin(x)"),
    ("r3", "#pragma acc parallel loop", "#pragma acc kernels"),
    ("r4", "#pragma acc loop gang vector", "no pragma here"),
    ("r5", "#pragma acc parallel loop present(b,c) copyout(a)", "#pragma acc parallel loop present(b) copyout(a)"),
    ("r6", "#pragma acc kernels", "#pragma acc kernels"),
    ("r7", "#pragma acc loop seq", "#pragma acc loop independent"),
    ("r8", "#pragma acc serial", "#pragma acc parallel"),
    ("r9", "#pragma acc parallel loop collapse(2) copyin(a) copyout(b)", "Here:\n#pragma acc parallel loop collapse(2) copyin(a) copyout(b)"),
]


def test_ten_record_fixture_recomputed_independently(tmp_path):
    refs = {i: parse_pragma(r) for i, r, _ in TEN}
    rep = evaluate_corpus(refs, [generation_record(i, g) for i, _, g in TEN])
    path = tmp_path / "report.json"
    path.write_text(json.dumps(rep.to_dict(), sort_keys=True))
    rows = json.loads(path.read_text())["records"]
    # recompute every aggregate from the serialized per-record rows only
    n = len(rows)
    assert rep.exact_match_rate == sum(r["exact_match"] for r in rows) / n == 0.3
    assert rep.extraction_failure_rate == sum(r["extraction_failed"] for r in rows) / n == 0.1
    assert rep.directive_accuracy == sum(r["directive_match"] for r in rows) / n == 0.7
    assert rep.mean_jaccard == pytest.approx(sum(r["jaccard"] for r in rows) / n)
    assert rep.mean_levenshtein == pytest.approx(sum(r["levenshtein_sim"] for r in rows) / n)
    by_id = {r["id"]: r for r in rows}
    assert by_id["r5"]["jaccard"] == pytest.approx(1 / 3)
    assert by_id["r1"]["jaccard"] == 1.0 and not by_id["r1"]["exact_match"]
    assert by_id["r4"]["predicted_class"] == "none"


def test_report_round_trip_and_markdown():
    refs = {i: parse_pragma(r) for i, r, _ in TEN}
    rep = evaluate_corpus(refs, [generation_record(i, g) for i, _, g in TEN])
    d = rep.to_dict()
    again = EvalReport.from_dict(json.loads(json.dumps(d)))
    assert json.dumps(again.to_dict(), sort_keys=True) == json.dumps(d, sort_keys=True)
    md = rep.to_markdown("tuned")
    assert "| Model | P (%) | R (%) | F1 (%) |" in md and "| tuned |" in md


@given(st.lists(st.floats(0, 1), min_size=3, max_size=30), st.data())
def test_removing_record_bounds_mean_change(values, data):
    k = data.draw(st.integers(0, len(values) - 1))
    rest = values[:k] + values[k + 1:]
    n = len(values)
    assert abs(sum(values) / n - sum(rest) / (n - 1)) <= 1 / (n - 1) + 1e-12
