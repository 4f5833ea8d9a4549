import dataclasses
import math

import pytest
from hypothesis import given, strategies as st

from fedmech.errors import ConfigError
from fedmech.scenarios import (
    ScenarioSpec, build, cifar10_spec, mnist_spec, parse_scenarios, run_linear_baseline,
    run_local_baseline, run_realfm, sample_devices, spec_to_config,
)


def test_uniform_population_identical():
    devices, _ = build(cifar10_spec())
    assert len(devices) == 16
    assert len({(d.cost, d.payoff, d.accuracy) for d in devices}) == 1


def test_gaussian_population_deterministic():
    spec = cifar10_spec(cost_mode="gaussian", payoff_mode="power_nonuniform", seed=11)
    assert sample_devices(spec) == sample_devices(spec)
    assert sample_devices(spec) != sample_devices(spec.with_seed(12))
    assert all(d.cost > 0 for d in sample_devices(spec))


def test_streams_are_independent():
    # changing the cost model must not perturb the payoff draws
    a = sample_devices(cifar10_spec(payoff_mode="power_nonuniform", seed=5))
    b = sample_devices(cifar10_spec(payoff_mode="power_nonuniform", cost_mode="gaussian", seed=5))
    assert [d.payoff for d in a] == [d.payoff for d in b]


def test_cifar_builds_with_participation():
    from fedmech.device import local_optimum
    devices, _ = build(cifar10_spec())
    assert all(local_optimum(d).m_opt > 0 for d in devices)


@pytest.mark.parametrize("spec_fn", [cifar10_spec, mnist_spec])
def test_mechanism_ordering(spec_fn):
    spec = spec_fn(payoff_mode="power_nonuniform")
    real, lin, loc = run_realfm(spec), run_linear_baseline(spec), run_local_baseline(spec)
    assert loc.totals.total_contribution == math.fsum(lo.m_opt for lo in loc.baseline_local)
    assert real.totals.total_contribution >= loc.totals.total_contribution
    assert real.totals.server_utility >= lin.totals.server_utility
    assert real.totals.total_contribution >= lin.totals.total_contribution


def test_run_is_deterministic():
    spec = cifar10_spec(cost_mode="gaussian", payoff_mode="power_nonuniform", seed=9)
    a, b = run_realfm(spec), run_realfm(spec)
    assert a.outcome == b.outcome and a.device_utilities == b.device_utilities


def test_heterogeneity_degrades_server_utility():
    utils = [run_realfm(cifar10_spec(heterogeneity="aopt_spread", aopt_delta=dlt, seed=1)).totals.server_utility
             for dlt in (0.0, 0.01, 0.02, 0.04)]
    assert all(x >= y for x, y in zip(utils, utils[1:]))


def test_config_round_trip():
    spec = mnist_spec(cost_mode="gaussian", seed=7, epsilon=1e-8)
    (back,) = parse_scenarios(spec_to_config(spec))
    assert back == spec


@given(st.integers(1, 64), st.floats(1e-6, 1e-2), st.floats(0.5, 0.99), st.floats(0.1, 50.0),
       st.integers(0, 2**32))
def test_config_round_trip_property(n, cost, a_opt, k, seed):
    spec = ScenarioSpec("s", n_devices=n, base_cost=cost, a_opt=a_opt, k=k, seed=seed)
    assert parse_scenarios(spec_to_config(spec)) == [spec]


def test_unknown_key_reports_line():
    text = "[a]\nn_devices = 3\nbase_cots = 1\n"
    with pytest.raises(ConfigError) as info:
        parse_scenarios(text)
    assert info.value.key == "base_cots" and info.value.line == 3


def test_bad_value_reports_key():
    with pytest.raises(ConfigError) as info:
        parse_scenarios("[a]\nk = -1\n")
    assert info.value.key == "k" and info.value.line == 2


@pytest.mark.parametrize("field, value", [("cost_mode", "lognormal"), ("n_devices", 0),
                                          ("a_opt", 1.0), ("payoff_mode", "cubic")])
def test_spec_validation(field, value):
    with pytest.raises(ConfigError):
        dataclasses.replace(ScenarioSpec(), **{field: value})
