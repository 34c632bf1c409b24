import pytest

from rabi_lab import _backend, rabi, specfun, uaa

BACKENDS = list(_backend.available_backends())


def _clear_caches():
    rabi._sector_eigensystem.cache_clear()
    uaa._TABLES.clear()


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = _backend.available_backends()[request.param]
    for target in (rabi, specfun, uaa):
        monkeypatch.setattr(target, "kernels", mod)
    _clear_caches()
    yield request.param
    _clear_caches()


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_lines(request):
    """Shared list of acceptance result lines, echoed in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
