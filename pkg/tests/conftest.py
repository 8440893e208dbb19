import pytest

from bnslrm.model import BnsModel, preset
from bnslrm.paths import McConfig

_CRITERIA = []


def record_criterion(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} -- {detail}"
    _CRITERIA.append(line)
    print(line)
    return passed


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def nv_model():
    return BnsModel.from_params(preset("NV").at(0.1))


@pytest.fixture(scope="session")
def scho_model():
    return BnsModel.from_params(preset("Scho").at(0.1))


@pytest.fixture
def small_config():
    return McConfig(n_paths=400, batch_size=150, master_seed=7)
