ACCEPTANCE_LINES: dict[str, str] = {}


def record(key: str, ok: bool, detail: str) -> None:
    """Store one acceptance line; ``key`` like "4a" sorts numerically."""
    line = f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)


def _order(key: str):
    digits = "".join(ch for ch in key if ch.isdigit())
    return int(digits), key


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=_order):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
