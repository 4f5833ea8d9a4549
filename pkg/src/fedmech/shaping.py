"""Accuracy shaping: the boost schedule gamma_i and the shaped optimum m_i^*."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from fedmech import kernels
from fedmech.accuracy import AccuracyModel
from fedmech.accuracy import eval as acc_eval
from fedmech.device import Device
from fedmech.errors import DomainError, RewardExceedsCostError


@dataclass(frozen=True)
class ShapingConfig:
    """``epsilon=None`` means ``1e-9 * max(1, c_i)`` per device."""

    epsilon: Optional[float] = None
    tol: float = 1e-12

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")
        if not self.tol > 0.0:
            raise DomainError(f"tol must be positive, got {self.tol!r}")

    def epsilon_for(self, cost: float) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 1e-9 * max(1.0, cost)


@dataclass(frozen=True)
class ShapedOptimum:
    m_star: float
    gamma_at_star: float


def shaping_coef(d: Device, r: float, cfg: ShapingConfig) -> float:
    """c_i - r + eps, the per-unit cost that shaping must out-earn."""
    if r < 0:
        raise DomainError(f"reward rate must be non-negative, got {r!r}")
    coef = d.cost - r + cfg.epsilon_for(d.cost)
    if not coef > 0.0:
        raise RewardExceedsCostError(
            f"device {d.id!r}: reward rate {r!r} >= cost {d.cost!r} + eps; shaping undefined")
    return coef


def gamma(d: Device, m_opt: float, r: float, cfg: ShapingConfig, m: float) -> float:
    """Accuracy boost granted for contributing ``m >= m_opt``.

    Solves phi'(a) g + phi''(a) g^2 / 2 = (c - r + eps)(m - m_opt) for the
    positive root g, with a = a_i(m_opt); reduces to the linear rule when
    phi'' vanishes.
    """
    if m < m_opt:
        raise DomainError(f"shaping defined for m >= m_opt ({m_opt!r}), got {m!r}")
    a_bar = acc_eval(d.accuracy, m_opt)
    coef = shaping_coef(d, r, cfg)
    return kernels.gamma(int(d.payoff.family), d.payoff.scale, a_bar, coef, float(m - m_opt))


def shaped_optimum(
    d: Device,
    m_opt: float,
    others_total: float,
    server: AccuracyModel,
    r: float,
    cfg: ShapingConfig,
) -> ShapedOptimum:
    """First ``m >= m_opt`` where a_C(m + others) meets a_i(m_opt) + gamma(m).

    Raises AssumptionViolation when the server model starts below the
    device's standalone accuracy.
    """
    if others_total < 0:
        raise DomainError(f"others_total must be non-negative, got {others_total!r}")
    a_bar = acc_eval(d.accuracy, m_opt)
    coef = shaping_coef(d, r, cfg)
    fam, scale = int(d.payoff.family), d.payoff.scale
    m_star = kernels.shaped_root(fam, scale, a_bar, coef, float(m_opt), float(others_total),
                                 int(server.form), server.a_opt, server.k, cfg.tol)
    g = kernels.gamma(fam, scale, a_bar, coef, m_star - m_opt)
    return ShapedOptimum(m_star, g)
