"""Experiment scenarios: device populations, the mechanism run, and baselines.

Scenario specs round-trip through an INI-style key/value document: one
section per scenario, the section name being the scenario id.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from fedmech.accuracy import AccuracyForm, AccuracyModel
from fedmech.accuracy import eval as acc_eval
from fedmech.assumptions import check_device
from fedmech.device import Device, LocalOptimum, local_optimum
from fedmech.equilibrium import EquilibriumOutcome, SolveOptions, solve
from fedmech.errors import ConfigError
from fedmech.mechanism import MechanismConfig, RewardBundle, server_utility
from fedmech.payoff import Payoff, phi
from fedmech.shaping import ShapingConfig

COST_MODES = ("uniform", "gaussian")
PAYOFF_MODES = ("linear", "power_uniform", "power_nonuniform")
HETEROGENEITY = ("homogeneous", "aopt_spread")
MECHANISMS = ("realfm", "linear", "local")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str = "scenario"
    n_devices: int = 16
    base_cost: float = 2.5e-4
    cost_mode: str = "uniform"
    cost_stddev_frac: float = 0.1
    payoff_mode: str = "power_uniform"
    linear_w: float = 1.0
    z_lo: float = 0.9
    z_hi: float = 1.1
    a_opt: float = 0.95
    k: float = 10.0
    accuracy_form: AccuracyForm = AccuracyForm.GENERALIZATION_BOUND
    heterogeneity: str = "homogeneous"
    aopt_delta: float = 0.0
    profit_margin: float = 1.0
    server_payoff: str = "power"
    server_scale: float = 1.0
    seed: int = 0
    reward_mode: str = "fixed_point"
    max_sweeps: int = 100
    tol: float = 1e-6
    damping: float = 1.0
    epsilon: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "accuracy_form", AccuracyForm(self.accuracy_form))
        _choice("cost_mode", self.cost_mode, COST_MODES)
        _choice("payoff_mode", self.payoff_mode, PAYOFF_MODES)
        _choice("heterogeneity", self.heterogeneity, HETEROGENEITY)
        _choice("server_payoff", self.server_payoff, ("power", "linear"))
        if self.n_devices < 1:
            raise ConfigError("n_devices must be at least 1", key="n_devices")
        if not self.base_cost > 0:
            raise ConfigError("base_cost must be positive", key="base_cost")
        if not (0.0 < self.a_opt < 1.0):
            raise ConfigError("a_opt must lie in (0, 1)", key="a_opt")
        if not self.k > 0:
            raise ConfigError("k must be positive", key="k")
        if self.aopt_delta < 0:
            raise ConfigError("aopt_delta must be non-negative", key="aopt_delta")
        if not self.z_lo <= self.z_hi or not self.z_lo > 0:
            raise ConfigError("need 0 < z_lo <= z_hi", key="z_lo")
        if not self.cost_stddev_frac > 0:
            raise ConfigError("cost_stddev_frac must be positive", key="cost_stddev_frac")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer", key="seed")

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=seed)


def _choice(key, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {value!r}", key=key)


@dataclass(frozen=True)
class ScenarioTotals:
    total_contribution: float
    mean_device_utility: float
    server_utility: float


@dataclass
class ScenarioResult:
    mechanism: str
    spec: ScenarioSpec
    devices: list[Device]
    outcome: EquilibriumOutcome
    baseline_local: list[LocalOptimum]
    device_utilities: list[float]
    totals: ScenarioTotals = field(init=False)

    def __post_init__(self):
        self.totals = ScenarioTotals(
            total_contribution=math.fsum(self.outcome.contributions),
            mean_device_utility=math.fsum(self.device_utilities) / len(self.device_utilities),
            server_utility=self.outcome.server_utility,
        )


# -- construction -------------------------------------------------------------

def _streams(seed: int):
    cost_ss, payoff_ss, aopt_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(cost_ss), np.random.default_rng(payoff_ss),
            np.random.default_rng(aopt_ss))


def _server_payoff(spec: ScenarioSpec) -> Payoff:
    if spec.server_payoff == "linear":
        return Payoff.linear(spec.server_scale)
    return Payoff.power(spec.server_scale)


def mechanism_config(spec: ScenarioSpec) -> MechanismConfig:
    return MechanismConfig(
        profit_margin=spec.profit_margin,
        server_payoff=_server_payoff(spec),
        shaping=ShapingConfig(epsilon=spec.epsilon),
    )


def sample_devices(spec: ScenarioSpec) -> list[Device]:
    """Draw the population without validating assumptions."""
    cost_rng, payoff_rng, aopt_rng = _streams(spec.seed)
    n = spec.n_devices

    if spec.cost_mode == "uniform":
        costs = [spec.base_cost] * n
    else:
        sd = spec.cost_stddev_frac * spec.base_cost
        costs = []
        for _ in range(n):
            c = cost_rng.normal(spec.base_cost, sd)
            while not c > 0.0:
                c = cost_rng.normal(spec.base_cost, sd)
            costs.append(float(c))

    if spec.payoff_mode == "linear":
        payoffs = [Payoff.linear(spec.linear_w)] * n
    elif spec.payoff_mode == "power_uniform":
        payoffs = [Payoff.power(1.0)] * n
    else:
        payoffs = [Payoff.power(float(z)) for z in payoff_rng.uniform(spec.z_lo, spec.z_hi, n)]

    if spec.heterogeneity == "homogeneous":
        a_opts = [spec.a_opt] * n
    else:
        a_opts = [spec.a_opt - float(u) for u in aopt_rng.uniform(0.0, spec.aopt_delta, n)]
        if any(not (0.0 < a < 1.0) for a in a_opts):
            raise ConfigError("aopt_delta pushes some a_opt outside (0, 1)", key="aopt_delta")

    return [
        Device(i, costs[i], payoffs[i], AccuracyModel(a_opts[i], spec.k, spec.accuracy_form))
        for i in range(n)
    ]


def build(spec: ScenarioSpec) -> tuple[list[Device], MechanismConfig]:
    """Deterministic population for ``spec.seed``; raises ConfigError on a failed check."""
    devices = sample_devices(spec)
    problems = [p for d in devices for p in check_device(d)]
    if problems:
        raise ConfigError(f"scenario {spec.scenario_id!r}: " + "; ".join(problems))
    return devices, mechanism_config(spec)


def solve_options(spec: ScenarioSpec, reward_mode: Optional[str] = None) -> SolveOptions:
    return SolveOptions(max_sweeps=spec.max_sweeps, tol=spec.tol, damping=spec.damping,
                        reward_mode=reward_mode or spec.reward_mode)


# -- runs -----------------------------------------------------------------------

def run_realfm(spec: ScenarioSpec) -> ScenarioResult:
    devices, cfg = build(spec)
    outcome = solve(devices, cfg, solve_options(spec))
    return ScenarioResult("realfm", spec, devices, outcome,
                          [local_optimum(d) for d in devices], list(outcome.device_utilities))


def run_linear_baseline(spec: ScenarioSpec) -> ScenarioResult:
    """Same population, but the mechanism sees linear payoffs and pays nothing.

    Device utilities are re-evaluated with each device's true payoff so they
    compare directly with the other mechanisms.
    """
    devices, cfg = build(spec)
    linear = [replace(d, payoff=Payoff.linear(1.0)) for d in devices]
    outcome = solve(linear, cfg, solve_options(spec, reward_mode="none"))
    utils = [
        phi(d.payoff, b.accuracy_reward) + b.monetary_reward - d.cost * m
        for d, b, m in zip(devices, outcome.bundles, outcome.contributions)
    ]
    return ScenarioResult("linear", spec, devices, outcome,
                          [local_optimum(d) for d in devices], utils)


def run_local_baseline(spec: ScenarioSpec) -> ScenarioResult:
    """Everyone trains alone at m_opt; the server is credited the mean local accuracy."""
    devices, cfg = build(spec)
    locals_ = [local_optimum(d) for d in devices]
    accs = [acc_eval(d.accuracy, lo.m_opt) for d, lo in zip(devices, locals_)]
    bundles = [RewardBundle(a, 0.0, phi(d.payoff, a)) for d, a in zip(devices, accs)]
    mean_acc = math.fsum(accs) / len(accs)
    outcome = EquilibriumOutcome(
        contributions=[lo.m_opt for lo in locals_],
        local_optima=[lo.m_opt for lo in locals_],
        shaped_optima=[lo.m_opt for lo in locals_],
        reward_rate=0.0,
        bundles=bundles,
        server_utility=server_utility(cfg, mean_acc),
        iterations=0,
        converged=True,
        server_accuracy=mean_acc,
        device_utilities=[lo.utility for lo in locals_],
        max_change=0.0,
    )
    return ScenarioResult("local", spec, devices, outcome, locals_, [lo.utility for lo in locals_])


RUNNERS = {
    "realfm": run_realfm,
    "linear": run_linear_baseline,
    "local": run_local_baseline,
}


def run(spec: ScenarioSpec, mechanism: str) -> ScenarioResult:
    try:
        runner = RUNNERS[mechanism]
    except KeyError:
        raise ConfigError(f"unknown mechanism {mechanism!r}", key="mechanisms") from None
    return runner(spec)


# -- reference configurations --------------------------------------------------

def cifar10_spec(**overrides) -> ScenarioSpec:
    """Analytic stand-in for the CIFAR-10 experiments (16 devices, greedy server)."""
    base = dict(scenario_id="cifar10", n_devices=16, base_cost=2.5e-4, a_opt=0.95, k=10.0,
                accuracy_form=AccuracyForm.GENERALIZATION_BOUND, profit_margin=1.0)
    base.update(overrides)
    return ScenarioSpec(**base)


def mnist_spec(**overrides) -> ScenarioSpec:
    """Analytic stand-in for the MNIST experiments; uses the simplified curve."""
    base = dict(scenario_id="mnist", n_devices=16, base_cost=4e-5, a_opt=0.9975, k=0.25,
                accuracy_form=AccuracyForm.SIMPLIFIED, profit_margin=1.0)
    base.update(overrides)
    return ScenarioSpec(**base)


# -- config documents -----------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioSpec) if f.name != "scenario_id"}
_INT_KEYS = {"n_devices", "seed", "max_sweeps"}
_FLOAT_KEYS = {"base_cost", "cost_stddev_frac", "linear_w", "z_lo", "z_hi", "a_opt", "k",
               "aopt_delta", "profit_margin", "server_scale", "tol", "damping", "epsilon"}


def _key_line(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        head = re.match(r"\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return lineno
    return None


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _INT_KEYS:
        return int(raw, 0)
    if key in _FLOAT_KEYS:
        if key == "epsilon" and raw.lower() in ("", "none", "auto"):
            return None
        return float(raw)
    if key == "accuracy_form":
        return AccuracyForm.parse(raw)
    return raw.lower()


def spec_from_section(name: str, items: Iterable[tuple[str, str]], text: str = "") -> ScenarioSpec:
    kwargs = {"scenario_id": name}
    for key, raw in items:
        if key not in _FIELDS:
            raise ConfigError(f"[{name}] unknown key {key!r}", key=key,
                              line=_key_line(text, name, key))
        try:
            kwargs[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"[{name}] bad value for {key!r}: {exc}", key=key,
                              line=_key_line(text, name, key)) from None
    try:
        return ScenarioSpec(**kwargs)
    except ConfigError as exc:
        exc.line = exc.line or _key_line(text, name, exc.key or "")
        raise


def new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # keys are case-sensitive field names
    return parser


def parse_scenarios(text: str, skip: Iterable[str] = ("manifest",)) -> list[ScenarioSpec]:
    parser = new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}", line=getattr(exc, "lineno", None)) from None
    skip = set(skip)
    return [spec_from_section(s, parser.items(s), text) for s in parser.sections() if s not in skip]


def load_scenarios(path) -> list[ScenarioSpec]:
    with open(path, encoding="utf-8") as fh:
        return parse_scenarios(fh.read())


def _format_value(value) -> str:
    if isinstance(value, AccuracyForm):
        return value.label
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "auto"
    return str(value)


def spec_to_config(spec: ScenarioSpec) -> str:
    lines = [f"[{spec.scenario_id}]"]
    for name in _FIELDS:
        lines.append(f"{name} = {_format_value(getattr(spec, name))}")
    return "\n".join(lines) + "\n"
