"""Reward and utility maps of the mechanism, plus feasibility / IR audits."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from fedmech import kernels
from fedmech.accuracy import AccuracyModel, ServerAccuracyModel
from fedmech.accuracy import eval as acc_eval
from fedmech.device import Device
from fedmech.errors import DegenerateInputError, DomainError, FeasibilityError
from fedmech.payoff import Payoff, phi
from fedmech.shaping import ShapingConfig, shaping_coef

FEASIBILITY_TOL = 1e-9
IR_TOL = 1e-12


@dataclass(frozen=True)
class MechanismConfig:
    profit_margin: float = 1.0
    server_payoff: Payoff = field(default_factory=Payoff.power)
    shaping: ShapingConfig = field(default_factory=ShapingConfig)
    # None: derive from the devices (they must share k and form)
    server_accuracy: Optional[ServerAccuracyModel] = None

    def __post_init__(self):
        if not (0.0 < self.profit_margin <= 1.0):
            raise DomainError(f"profit margin must lie in (0, 1], got {self.profit_margin!r}")


@dataclass(frozen=True)
class RewardBundle:
    accuracy_reward: float
    monetary_reward: float
    utility: float


def reward_rate(cfg: MechanismConfig, server_acc_at_total: float, total_m: float) -> float:
    """Per-point payment funded by the (1 - p_m) share of server payoff."""
    if not total_m > 0.0:
        raise DegenerateInputError("reward rate needs a positive total contribution")
    if cfg.profit_margin == 1.0:
        return 0.0
    return (1.0 - cfg.profit_margin) * phi(cfg.server_payoff, server_acc_at_total) / total_m


def server_utility(cfg: MechanismConfig, server_acc_at_total: float) -> float:
    return cfg.profit_margin * phi(cfg.server_payoff, server_acc_at_total)


def settle(
    d: Device,
    m_i: float,
    m_opt: float,
    m_star: float,
    others_total: float,
    r: float,
    cfg: MechanismConfig,
    server_model: AccuracyModel,
    shaping_rate: Optional[float] = None,
) -> RewardBundle:
    """Accuracy and monetary reward for device ``d`` contributing ``m_i``.

    Free riders (``m_i <= m_opt``) get their standalone accuracy and no money;
    between ``m_opt`` and ``m_star`` accuracy is shaped upward; past ``m_star``
    the device gets the global model. Money is ``r (m_i - m_opt)`` beyond the
    local optimum. ``shaping_rate`` is the rate baked into gamma when it
    differs from the paid rate ``r`` (post-hoc payment mode).
    """
    if m_i < 0:
        raise DomainError(f"contribution must be non-negative, got {m_i!r}")
    if r < 0:
        raise DomainError(f"reward rate must be non-negative, got {r!r}")
    s_rate = r if shaping_rate is None else shaping_rate
    a_bar = acc_eval(d.accuracy, m_opt)
    if m_i <= m_opt:
        acc = acc_eval(d.accuracy, m_i)
        money = 0.0
    elif m_i <= m_star:
        coef = shaping_coef(d, s_rate, cfg.shaping)
        acc = a_bar + kernels.gamma(int(d.payoff.family), d.payoff.scale, a_bar, coef, m_i - m_opt)
        money = r * (m_i - m_opt)
    else:
        acc = acc_eval(server_model, m_i + others_total)
        money = r * (m_i - m_opt)

    global_acc = acc_eval(server_model, m_i + others_total)
    if acc > global_acc + FEASIBILITY_TOL:
        raise FeasibilityError(
            f"device {d.id!r}: accuracy reward {acc!r} exceeds global accuracy {global_acc!r}")
    return RewardBundle(acc, money, phi(d.payoff, acc) + money)


def audit_ir(d: Device, bundle: RewardBundle, m_i: float) -> bool:
    """Participation pays at least as well as training alone on ``m_i`` points.

    Both sides omit the identical data cost ``c_i m_i``.
    """
    alone = phi(d.payoff, acc_eval(d.accuracy, m_i))
    return bundle.utility >= alone - IR_TOL * max(1.0, abs(alone))
