from pathlib import Path

import pytest

from c2po.extraction import align_plot_points, parse_annotated_story, select_cluster
from c2po.inference import TableBackend, load_table

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mini_parsed():
    return parse_annotated_story((FIXTURES / "mini.story").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def mini_outline(mini_parsed):
    text, clusters, triples = mini_parsed
    return align_plot_points(select_cluster(clusters), triples, source_length=len(text))


@pytest.fixture(scope="session")
def mini_backend():
    return TableBackend(load_table(str(FIXTURES / "mini_table.tsv")))


@pytest.fixture(scope="session")
def holmes_outline():
    text, clusters, triples = parse_annotated_story((FIXTURES / "holmes.story").read_text(encoding="utf-8"))
    return align_plot_points(select_cluster(clusters), triples, source_length=len(text))


@pytest.fixture(scope="session")
def holmes_backend():
    return TableBackend(load_table(str(FIXTURES / "holmes_table.tsv")))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                rows.append((name, "PASS" if status == "passed" else "FAIL"))
    if rows:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, verdict in sorted(rows):
            terminalreporter.write_line(f"  {verdict}  {name}")
