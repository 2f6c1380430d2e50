import json

import pytest
from hypothesis import given, strategies as st

from accmine.dataset import (
    MARKER,
    DatasetRecord,
    build_user_content,
    default_system_prompt,
    extract_generation,
    join_generations,
    generation_record,
    loop_from_user_content,
    prompt_record,
    read_generations,
    read_jsonl,
    read_records,
    training_record,
    write_jsonl,
    write_records,
)
from accmine.errors import MalformedLine

MATSUM_LOOP = (
    "for(size_t i=0; i<size; ++i){\n"
    "    for(size_t j=0; j<size; ++j){\n"
    "        sum += mat[i*size+j];\n"
    "        }\n"
    "    }"
)
MATSUM_PRAGMA = "#pragma acc parallel loop present(mat[0: size*size]) reduction(+:sum)"


def test_user_content_marker_line():
    assert build_user_content("for(...)...") == "<TARGET_PRAGMA_LOCATION>\nfor(...)..."


def test_user_content_verbatim_newlines():
    loop = "for (int j = 0; j < gs0; ++j) {\r\n  sum += val[j];\n}\n"
    content = build_user_content(loop)
    assert content == MARKER + "\n" + loop
    assert content.count(MARKER) == 1
    assert loop_from_user_content(content) == loop
    assert build_user_content(loop) == content


def test_user_content_rejects_empty():
    with pytest.raises(ValueError):
        build_user_content("")


def test_system_prompt_asset():
    prompt = default_system_prompt()
    assert prompt.startswith("You are an expert in crafting optimal OpenACC pragma directives")
    assert "EXACTLY ONE LINE" in prompt
    assert prompt.endswith("NO additional text, explanation, comments, or code.")


def test_matsum_record(tmp_path):
    rec = training_record("l1", MATSUM_LOOP, MATSUM_PRAGMA, default_system_prompt())
    assert [m["role"] for m in rec.messages] == ["system", "user", "assistant"]
    assert rec.reference == "#pragma acc parallel loop present(mat[0:size*size]) reduction(+:sum)"
    path = tmp_path / "one.jsonl"
    write_records([rec], path)
    raw = path.read_text(encoding="utf-8")
    assert raw.count("\n") == 1 and raw.endswith("}\n")
    assert read_records(path) == [rec]


def test_prompt_matches_training_minus_assistant():
    sp = default_system_prompt()
    rec = training_record("x", MATSUM_LOOP, MATSUM_PRAGMA, sp)
    assert rec.as_prompt() == prompt_record("x", MATSUM_LOOP, sp)


def test_malformed_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"a": 1}\n{"b": 2}\nnot json\n{"c": 3}\n')
    with pytest.raises(MalformedLine) as info:
        read_jsonl(path)
    assert info.value.line_number == 3


def test_non_object_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"a": 1}\n[1, 2]\n')
    with pytest.raises(MalformedLine) as info:
        read_jsonl(path)
    assert info.value.line_number == 2


def test_write_is_byte_stable(tmp_path):
    rows = [{"id": str(k), "text": "é\n" * k} for k in range(5)]
    write_jsonl(rows, tmp_path / "a.jsonl")
    write_jsonl(rows, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert read_jsonl(tmp_path / "a.jsonl") == rows


def test_empty_file_round_trip(tmp_path):
    write_jsonl([], tmp_path / "e.jsonl")
    assert (tmp_path / "e.jsonl").read_bytes() == b""
    assert read_jsonl(tmp_path / "e.jsonl") == []


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("#pragma acc kernels\n", "#pragma acc kernels"),
        ("Sure! Here is the pragma:\n#pragma acc loop gang", "#pragma acc loop gang"),
        ("  #pragma   acc parallel loop  reduction(+ : s)  ", "#pragma acc parallel loop reduction(+:s)"),
        ("#pragma omp parallel for\n#pragma acc loop\n#pragma acc kernels", "#pragma acc loop"),
    ],
)
def test_extract_generation_hits(raw, expected):
    assert extract_generation(raw) == (expected, False)


@pytest.mark.parametrize("raw", ["I cannot determine the pragma.", "", "`#pragma acc loop`", "#pragma accel loop"])
def test_extract_generation_failures(raw):
    assert extract_generation(raw) == (None, True)


@given(st.text())
def test_extraction_fixpoint(raw):
    pragma, failed = extract_generation(raw)
    assert failed == (pragma is None)
    if pragma is not None:
        assert extract_generation(pragma) == (pragma, False)


def test_generation_file(tmp_path):
    path = tmp_path / "gens.jsonl"
    write_jsonl([{"id": "a", "output": "#pragma acc loop"}, {"id": "b", "output": "no idea"}], path)
    gens = read_generations(path)
    assert gens[0] == generation_record("a", "#pragma acc loop")
    assert gens[1].extraction_failed and gens[1].extracted_pragma is None


def test_generation_file_missing_field(tmp_path):
    path = tmp_path / "gens.jsonl"
    write_jsonl([{"id": "a"}], path)
    with pytest.raises(MalformedLine):
        read_generations(path)


def test_join_reports_unmatched():
    sp = "sys"
    refs = [training_record(i, "for(;;){x();}", "#pragma acc loop", sp) for i in ("a", "b")]
    gens = [generation_record("a", "#pragma acc loop"), generation_record("zz", "#pragma acc loop")]
    pairing = join_generations(refs, gens)
    assert [r.id for r, _ in pairing.matched] == ["a"]
    assert pairing.missing_generations == ["b"]
    assert pairing.unknown_generations == ["zz"]


def test_record_from_dict_round_trip():
    rec = DatasetRecord("q", [{"role": "system", "content": "s"}, {"role": "user", "content": MARKER + "\nfor"}])
    assert DatasetRecord.from_dict(json.loads(json.dumps(rec.to_dict()))) == rec
    assert rec.reference is None
