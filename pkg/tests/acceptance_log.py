"""Collects the one-line acceptance verdicts for the terminal summary."""

LINES: list[str] = []


def record(number: int, ok: bool, title: str, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    LINES.append(line)
    print(line)
    return line
