import os
import sys
from pathlib import Path

import hypothesis
import pytest

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def stub_compiler(tmp_path):
    """Executable stub compiler; returns (path, log_path)."""
    log = tmp_path / "stub_cc.log"
    script = tmp_path / "stub_cc"
    body = (FIXTURES / "stub_cc.py").read_text()
    script.write_text(f"#!{sys.executable}\n" + body)
    script.chmod(0o755)
    os.environ["STUB_CC_LOG"] = str(log)
    yield script, log
    os.environ.pop("STUB_CC_LOG", None)


ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
