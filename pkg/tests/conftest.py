import time

import pytest

from adaptlin import PRESETS, run_experiment


class AcceptanceRun:
    def __init__(self, config, path, elapsed):
        self.config = config
        self.path = path
        self.elapsed = elapsed


def _run_preset(name, tmp_path_factory):
    config = PRESETS[name]
    out = tmp_path_factory.mktemp(f"accept-{name}")
    t0 = time.perf_counter()
    path = run_experiment(config, out / "run", jobs=1, quiet=True)
    return AcceptanceRun(config, path, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def fig2_low_run(tmp_path_factory):
    return _run_preset("fig2-low", tmp_path_factory)


@pytest.fixture(scope="session")
def fig2_high_run(tmp_path_factory):
    return _run_preset("fig2-high", tmp_path_factory)


@pytest.fixture(scope="session")
def fig1_desk_run(tmp_path_factory):
    return _run_preset("fig1-desk", tmp_path_factory)
