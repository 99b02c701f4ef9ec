ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    """List the acceptance verdicts, one line per criterion, after the run."""
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
