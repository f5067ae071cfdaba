import time
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "histopos",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("histopos")

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Context manager timing one acceptance criterion and logging PASS/FAIL."""

    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = limit is None or elapsed < limit
            status = "PASS" if ok and within else "FAIL"
            budget = f" (limit {limit:.0f} s)" if limit is not None else ""
            line = f"criterion {number}: {status}  {title}  [{elapsed:.2f} s{budget}]"
            _ACCEPTANCE[number] = line
            print(line)
        assert within, f"criterion {number} took {elapsed:.1f} s, limit {limit} s"

    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
