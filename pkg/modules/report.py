"""
report.py — Check Reports
Named pass/fail checks with margins and timings, serialized with the tool
version and the resolved experiment configuration.
"""

import time
from contextlib import contextmanager

import config
from modules import persistence
from modules.errors import ContractError
from modules.visualization import format_number


class Report:
    """Ordered collection of uniquely named checks.

    `passed` is True iff every check that is not noise-exempt passed.
    """

    def __init__(self, command, settings=None):
        self.command = command
        self.settings = settings or {}
        self.checks = []
        self.insights = []
        self._names = set()

    def add(self, name, passed, margin=None, seconds=0.0, noise_exempt=False, detail=None):
        if name in self._names:
            raise ContractError(f"check '{name}' recorded twice")
        self._names.add(name)
        self.checks.append({
            "name": name,
            "passed": bool(passed),
            "margin": None if margin is None else float(margin),
            "seconds": round(float(seconds), 6),
            "noise_exempt": bool(noise_exempt),
            "detail": detail or {},
        })

    def extend(self, result, prefix=""):
        """Merge an acceptance result dict ({"checks", "charts", "insights"})."""
        for check in result.get("checks", []):
            self.add(
                prefix + check["name"], check["passed"], check.get("margin"),
                check.get("seconds", 0.0), check.get("noise_exempt", False), check.get("detail"),
            )
        self.insights.extend(result.get("insights", []))

    @contextmanager
    def timed(self, name, noise_exempt=False):
        """Time a block; the block sets entry["passed"] and optionally margin/detail."""
        entry = {"passed": False, "margin": None, "detail": None}
        start = time.perf_counter()
        try:
            yield entry
        finally:
            self.add(name, entry["passed"], entry["margin"], time.perf_counter() - start,
                     noise_exempt, entry["detail"])

    @property
    def passed(self):
        return all(c["passed"] or c["noise_exempt"] for c in self.checks)

    def to_dict(self):
        return {
            "version": config.VERSION,
            "command": self.command,
            "config": self.settings,
            "passed": self.passed,
            "checks": self.checks,
            "insights": self.insights,
        }

    def to_json(self):
        return persistence.dumps(self.to_dict())

    def save(self, path):
        return persistence.write_json(path, self.to_dict())


def format_lines(report):
    """Console lines, one per check plus a verdict."""
    lines = []
    for c in report.checks:
        status = "PASS" if c["passed"] else ("WARN" if c["noise_exempt"] else "FAIL")
        lines.append(f"[{status}] {c['name']:<40} margin={format_number(c['margin'])} ({c['seconds']:.2f}s)")
    for note in report.insights:
        lines.append(f"  - {note}")
    failed = sum(1 for c in report.checks if not (c["passed"] or c["noise_exempt"]))
    lines.append(f"{report.command}: {'all checks passed' if report.passed else f'{failed} check(s) failed'}")
    return lines
