import pytest

from termalign.extract import Document, extract_occurrences


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and rep.when in ("call", "setup"):
                name = nodeid.split("::")[-1]
                if status == "skipped" or rep.when == "call":
                    rows.append((name, status.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(set(rows)):
            terminalreporter.write_line(f"{status:8s} {name}")

# The motivating two-context fixture: one French term, two different Arabic
# translations, hyphenated candidate in the first context.
CONTEXT_1 = (
    "ولا يتحول نقده الحاد للمركزية - الإثنية (l’ethnocentrisme) هنا إلى نسبية "
    "ثقافية، بل إلى كونية عقلية: <(...) نقبل بأنّ الأفكار والمبادئ العقلية فطرية لدينا>."
)
CONTEXT_2 = (
    "انتقد كثيراً النزعة الإثنية المركزية (l’ethnocentrisme) التي تريد <إحلال "
    "أفكارنا الأوروبية محل أفكار الإنسان البدائي عن العالم والمجتمع>، وتحذّر من "
    "خطر <نسبة الأفكار المتقدمة إلى الإنسان البدائي لأنها تتجاوز إمكاناته العقلية>."
)

CONTEXT_1_CANDIDATES = [
    "الإثنية",
    "للمركزية - الإثنية",
    "الحاد للمركزية - الإثنية",
    "نقده الحاد للمركزية - الإثنية",
    "يتحول نقده الحاد للمركزية - الإثنية",
    "ولا يتحول نقده الحاد للمركزية - الإثنية",
]
CONTEXT_2_CANDIDATES = [
    "المركزية",
    "الإثنية المركزية",
    "النزعة الإثنية المركزية",
    "كثيراً النزعة الإثنية المركزية",
    "انتقد كثيراً النزعة الإثنية المركزية",
]


@pytest.fixture
def fixture_document():
    return Document(doc_id="fixture", book_id="fixture",
                    text=CONTEXT_1 + "\n\n" + CONTEXT_2)


@pytest.fixture
def fixture_occurrences(fixture_document):
    occs = extract_occurrences(fixture_document)
    assert len(occs) == 2
    return occs
