import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from fedmech.accuracy import AccuracyForm, AccuracyModel
from fedmech.accuracy import eval as acc_eval
from fedmech.device import Device, local_optimum
from fedmech.errors import AssumptionViolation, DomainError, RewardExceedsCostError
from fedmech.payoff import Payoff, phi
from fedmech.shaping import ShapingConfig, gamma, shaped_optimum

GB = AccuracyForm.GENERALIZATION_BOUND
CFG = ShapingConfig()


def _cifar_population_star(dev):
    lo = local_optimum(dev)
    others = 15 * lo.m_opt
    return lo, others, shaped_optimum(dev, lo.m_opt, others, dev.accuracy, 0.0, CFG)


def test_gamma_zero_at_local_optimum(cifar_device, simple_linear_device):
    for d in (cifar_device, simple_linear_device):
        m_opt = local_optimum(d).m_opt
        assert gamma(d, m_opt, 0.0, CFG, m_opt) == 0.0


def test_linear_reduction(simple_linear_device):
    d = simple_linear_device
    g = gamma(d, 100.0, 0.0, CFG, 200.0)
    eps = CFG.epsilon_for(d.cost)
    assert g == pytest.approx(d.cost * 100.0 + eps * 100.0, rel=4e-16)
    assert g == pytest.approx(0.1, rel=2e-6)  # eps adds 1e-7


def test_power_gamma_value_and_inequality():
    # a_bar = 0.5 gives phi' = 16 and phi'' = 96 for z = 1
    d = Device(0, 0.01, Payoff.power(1.0), AccuracyModel(0.9, 1.0, AccuracyForm.SIMPLIFIED))
    from fedmech import kernels
    coef = 0.01 + 1e-9
    g = kernels.gamma(kernels.POWER, 1.0, 0.5, coef, 1000.0)
    x = coef * 1000.0
    want = (-16.0 + np.sqrt(16.0 ** 2 + 2 * 96.0 * x)) / 96.0
    assert g == pytest.approx(want, rel=1e-12)
    assert 16.0 * g + 48.0 * g * g == pytest.approx(x, rel=1e-12)
    assert phi(d.payoff, 0.5 + g) - phi(d.payoff, 0.5) > 0.01 * 1000.0


def test_gamma_below_local_optimum_rejected(cifar_device):
    with pytest.raises(DomainError):
        gamma(cifar_device, 1000.0, 0.0, CFG, 999.0)


def test_reward_exceeding_cost(cifar_device):
    with pytest.raises(RewardExceedsCostError):
        gamma(cifar_device, 0.0, 1.0, CFG, 10.0)


def test_shaped_optimum_single_device_touches(cifar_device):
    lo = local_optimum(cifar_device)
    so = shaped_optimum(cifar_device, lo.m_opt, 0.0, cifar_device.accuracy, 0.0, CFG)
    assert so.m_star == pytest.approx(lo.m_opt, rel=1e-8)


def test_shaped_optimum_sign_scan(cifar_device):
    lo, others, so = _cifar_population_star(cifar_device)
    scan = oracles.sign_scan_shaped(0.95, 10.0, "gen", 1.0, cifar_device.cost, lo.m_opt, others,
                                    0.95, CFG.epsilon_for(cifar_device.cost))
    assert scan - 1.0 < so.m_star <= scan
    assert so.m_star == pytest.approx(680881.98547, rel=1e-9)


def test_curves_meet_at_star(cifar_device):
    lo, others, so = _cifar_population_star(cifar_device)
    a_bar = acc_eval(cifar_device.accuracy, lo.m_opt)
    assert a_bar + so.gamma_at_star == pytest.approx(
        acc_eval(cifar_device.accuracy, so.m_star + others), abs=1e-9)


def test_lower_a_opt_shapes_earlier():
    server = AccuracyModel(0.93, 10.0, GB)
    lo_dev = Device(0, 2.5e-4, Payoff.power(), AccuracyModel(0.91, 10.0, GB))
    hi_dev = Device(1, 2.5e-4, Payoff.power(), AccuracyModel(0.95, 10.0, GB))
    stars = []
    for d in (lo_dev, hi_dev):
        lo = local_optimum(d)
        stars.append(shaped_optimum(d, lo.m_opt, 3e6, server, 0.0, CFG).m_star)
    assert stars[0] < stars[1]


def test_assumption_violation(cifar_device):
    lo = local_optimum(cifar_device)
    weak = AccuracyModel(0.5, 10.0, GB)
    with pytest.raises(AssumptionViolation):
        shaped_optimum(cifar_device, lo.m_opt, 0.0, weak, 0.0, CFG)


def test_gamma_satisfies_inequality_on_samples(cifar_device):
    lo, others, so = _cifar_population_star(cifar_device)
    a_bar = acc_eval(cifar_device.accuracy, lo.m_opt)
    base = phi(cifar_device.payoff, a_bar)
    for m in np.linspace(lo.m_opt, so.m_star, 201)[1:]:
        g = gamma(cifar_device, lo.m_opt, 0.0, CFG, float(m))
        assert phi(cifar_device.payoff, a_bar + g) - base > cifar_device.cost * (m - lo.m_opt)


@given(st.floats(1e-5, 1e-2), st.floats(0.5, 2.0), st.floats(0.0, 0.8))
def test_gamma_increasing_and_concave(cost, z, r_frac):
    d = Device(0, cost, Payoff.power(z), AccuracyModel(0.95, 10.0, GB))
    r = r_frac * cost
    m_opt = local_optimum(d).m_opt
    ms = m_opt + np.linspace(0.0, 1e6, 101)
    g = np.array([gamma(d, m_opt, r, CFG, float(m)) for m in ms])
    assert np.all(np.diff(g) > 0)
    second = np.diff(g, 2)
    assert np.all(second <= 1e-12 * np.max(g))
