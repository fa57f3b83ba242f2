ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    # echo the acceptance verdicts even when output capture is on
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
