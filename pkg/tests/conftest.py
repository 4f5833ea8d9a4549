import pytest
from hypothesis import HealthCheck, settings

from fedmech.accuracy import AccuracyForm, AccuracyModel
from fedmech.device import Device
from fedmech.payoff import Payoff

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CIFAR_COST = 2.5e-4
MNIST_COST = 4e-5


@pytest.fixture
def cifar_acc():
    return AccuracyModel(0.95, 10.0, AccuracyForm.GENERALIZATION_BOUND)


@pytest.fixture
def cifar_device(cifar_acc):
    return Device(0, CIFAR_COST, Payoff.power(1.0), cifar_acc)


@pytest.fixture
def simple_linear_device():
    # closed form: m_opt = (sqrt(k)/c)^(2/3) = 100
    return Device(0, 1e-3, Payoff.linear(1.0), AccuracyModel(0.95, 1.0, AccuracyForm.SIMPLIFIED))


_REPORT_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT_KEY] = []


@pytest.fixture
def acceptance_report(request):
    """Append ``(criterion, passed, detail)`` lines shown after the run."""
    return request.config.stash[_REPORT_KEY]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(lines):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
