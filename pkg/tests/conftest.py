import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(num: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[num] = (bool(ok), detail)
    print(f"acceptance {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[num]
        terminalreporter.write_line(f"{num:2d}  {'PASS' if ok else 'FAIL'}  {detail}")
