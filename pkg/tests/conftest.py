import pytest

from dlczmem.config import ExperimentConfig


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    # tests that care about threading set it explicitly
    monkeypatch.delenv("DLCZMEM_THREADS", raising=False)


@pytest.fixture
def fast_config():
    """Small, quick configuration for smoke tests of the pipeline."""
    cfg = ExperimentConfig()
    return cfg.override("simulation", n_atoms=2000, n_trials=4, probe_count=6)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """record(number, title, ok, detail): log one acceptance verdict, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail=""):
        lines.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"))
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)
