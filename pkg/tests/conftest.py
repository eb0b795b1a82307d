import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("SNLSE_CACHE_DIR", str(d))
    return d


@pytest.fixture(scope="session")
def shared_cache(tmp_path_factory):
    """Reference cache reused across tests; honours SNLSE_CACHE_DIR when set."""
    import os
    from pathlib import Path

    env = os.environ.get("SNLSE_CACHE_DIR")
    return Path(env) if env else tmp_path_factory.mktemp("ref-cache")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    """Record one PASS/FAIL line for the terminal summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
