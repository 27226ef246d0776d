import os
from pathlib import Path

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def yeast_path():
    """Location of a user-supplied Yeast ARFF file, or None."""
    raw = os.environ.get("MLBELS_YEAST")
    if raw and Path(raw).is_file():
        return Path(raw)
    return None


def load_yeast(path):
    """Open a Yeast ARFF whether or not its relation carries a ``-C`` tag
    (the MULAN release does not, and puts the 14 labels last)."""
    from mlbels.data import load_arff
    from mlbels.errors import ConfigurationError

    try:
        return load_arff(path, chunk_size=50)
    except ConfigurationError:
        return load_arff(path, n_labels=14, label_position="suffix", chunk_size=50)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, list[tuple[str, str]]] = {}


def record_criterion(number: int, status: str, detail: str):
    ACCEPTANCE_LINES.setdefault(number, []).append((status, detail))
    print(f"criterion {number}: {status} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        parts = ACCEPTANCE_LINES[number]
        statuses = {s for s, _ in parts}
        if "FAIL" in statuses:
            status = "FAIL"
        elif statuses == {"NOT RUN"}:
            status = "NOT RUN"
        elif "NOT RUN" in statuses:
            status = "PARTIAL"
        else:
            status = "PASS"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {status:<8} {detail}")
