import re
from collections import defaultdict

_CRIT = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, aggregated over its sub-tests."""
    by_crit = defaultdict(list)
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome == "passed":
                continue
            m = _CRIT.search(rep.nodeid)
            if m:
                by_crit[int(m.group(1))].append((rep.nodeid.split("::")[-1], outcome == "passed"))
    if not by_crit:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(by_crit):
        subs = by_crit[n]
        ok = all(p for _, p in subs)
        failed = [name for name, p in subs if not p]
        tail = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  [{sum(p for _, p in subs)}/{len(subs)} sub-tests]{tail}")
