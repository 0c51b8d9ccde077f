import functools

import pytest
from hypothesis import settings

from surflab.families import build_family, default_config

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@functools.cache
def chart_of(family_id: str, **overrides):
    cfg = default_config(family_id, **overrides) if overrides else default_config(family_id)
    return build_family(cfg, warn=False)


@pytest.fixture(scope="session")
def chart():
    """Cached catalog charts: ``chart("classA/e31")``."""
    return chart_of


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
