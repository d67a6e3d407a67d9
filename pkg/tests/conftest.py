"""Shared pytest hooks: echo acceptance pass/fail lines after the run.

Acceptance tests record one line per criterion via ``record_acceptance``;
printing them in the terminal summary keeps them visible in captured runs
(plain ``pytest`` without ``-s``).
"""

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
