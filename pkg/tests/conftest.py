import pytest

VERDICTS = []


class Verdict:
    """Print one ``CRITERION n: PASS|FAIL`` line, keep it for the summary, then assert."""

    def __init__(self, capsys):
        self._capsys = capsys

    def __call__(self, number, title, ok, detail=""):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip()
        VERDICTS.append((number, line))
        with self._capsys.disabled():
            print("\n" + line)
        assert ok, line


@pytest.fixture
def verdict(capsys):
    return Verdict(capsys)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(VERDICTS):
        terminalreporter.write_line(line)
