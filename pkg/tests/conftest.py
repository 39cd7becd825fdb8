import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

import reporting  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    if reporting.LINES:
        terminalreporter.section("acceptance criteria")
        for line in reporting.LINES:
            terminalreporter.write_line(line)
