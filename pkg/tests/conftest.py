import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# verdict lines recorded by the acceptance tests, echoed after the run so
# they appear in the log regardless of output capture
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    for line in ACCEPTANCE_VERDICTS:
        terminalreporter.write_line(line)
