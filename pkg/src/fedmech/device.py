"""Devices, standalone utility, and the locally optimal data contribution."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable

from fedmech import kernels
from fedmech.accuracy import AccuracyModel, zero_crossing
from fedmech.accuracy import eval as acc_eval
from fedmech.errors import DomainError, SolverError
from fedmech.payoff import Payoff, phi

LOCAL_RTOL = 1e-10
M_MAX = kernels.M_MAX


@dataclass(frozen=True)
class Device:
    id: Hashable
    cost: float
    payoff: Payoff
    accuracy: AccuracyModel

    def __post_init__(self):
        if not self.cost > 0.0:
            raise DomainError(f"device {self.id!r}: cost must be positive, got {self.cost!r}")


@dataclass(frozen=True)
class LocalOptimum:
    m_opt: float
    utility: float

    @property
    def participates(self) -> bool:
        return self.m_opt > 0.0


def local_utility(d: Device, m: float) -> float:
    """phi(a(m)) - c m for a device training alone."""
    if m < 0:
        raise DomainError(f"data amount must be non-negative, got {m!r}")
    return phi(d.payoff, acc_eval(d.accuracy, m)) - d.cost * m


def marginal_benefit(d: Device, m: float) -> float:
    acc = d.accuracy
    return kernels.marginal_benefit(
        int(acc.form), acc.a_opt, acc.k, int(d.payoff.family), d.payoff.scale, float(m))


@lru_cache(maxsize=4096)
def local_optimum(d: Device) -> LocalOptimum:
    """Maximiser of standalone utility.

    Past the zero crossing m0 the marginal benefit phi'(a(m)) a'(m) is
    non-increasing, so the first-order condition is bisected on
    [m0 (1 + 1e-9), M_MAX]. A root with non-positive utility means the device
    stays out (ties go to zero).
    """
    acc = d.accuracy
    if acc.a_opt <= 0.0:
        return LocalOptimum(0.0, 0.0)
    m0 = zero_crossing(acc)
    lo = m0 * (1.0 + 1e-9)
    if marginal_benefit(d, lo) <= d.cost:
        return LocalOptimum(0.0, 0.0)
    if marginal_benefit(d, M_MAX) > d.cost:
        raise SolverError(
            f"device {d.id!r}: marginal benefit still exceeds cost {d.cost!r} at the {M_MAX:g} data cap")
    m = kernels.foc_root(int(acc.form), acc.a_opt, acc.k, int(d.payoff.family),
                         d.payoff.scale, d.cost, lo, M_MAX, LOCAL_RTOL)
    u = local_utility(d, m)
    if u <= 0.0:
        return LocalOptimum(0.0, 0.0)
    return LocalOptimum(m, u)

