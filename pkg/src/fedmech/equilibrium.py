"""Pure Nash equilibrium of the mechanism via Gauss-Seidel best response."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from fedmech import kernels
from fedmech.accuracy import AccuracyModel, ServerAccuracyModel, server_mixture, zero_crossing
from fedmech.accuracy import eval as acc_eval
from fedmech.device import Device, LocalOptimum, local_optimum
from fedmech.errors import ConfigError, DomainError
from fedmech.mechanism import MechanismConfig, RewardBundle, reward_rate, server_utility, settle
from fedmech.shaping import shaped_optimum, shaping_coef

log = logging.getLogger(__name__)

REWARD_MODES = ("fixed_point", "post_hoc", "none")
_IMPROVE_RTOL = 1e-12


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for :func:`solve`.

    ``reward_mode``: ``fixed_point`` recomputes r from the current total every
    sweep and shapes with it; ``post_hoc`` shapes with r = 0 and pays r from
    the final total only at settlement; ``none`` never pays.
    """

    max_sweeps: int = 100
    tol: float = 1e-6
    damping: float = 1.0
    reward_mode: str = "fixed_point"

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise DomainError("max_sweeps must be at least 1")
        if not self.tol > 0.0:
            raise DomainError("tol must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise DomainError("damping must lie in (0, 1]")
        if self.reward_mode not in REWARD_MODES:
            raise DomainError(f"reward_mode must be one of {REWARD_MODES}")


@dataclass
class EquilibriumOutcome:
    contributions: list[float]
    local_optima: list[float]
    shaped_optima: list[float]
    reward_rate: float
    bundles: list[RewardBundle]
    server_utility: float
    iterations: int
    converged: bool
    server_accuracy: float = 0.0
    server_model: Optional[AccuracyModel] = None
    device_utilities: list[float] = field(default_factory=list)
    max_change: float = math.inf

    @property
    def total_contribution(self) -> float:
        return math.fsum(self.contributions)


def resolve_server(devices: Sequence[Device], cfg: MechanismConfig) -> ServerAccuracyModel:
    if cfg.server_accuracy is not None:
        return cfg.server_accuracy
    ks = {d.accuracy.k for d in devices}
    forms = {d.accuracy.form for d in devices}
    if len(ks) != 1 or len(forms) != 1:
        raise ConfigError("devices disagree on k / accuracy form; pass server_accuracy explicitly")
    return ServerAccuracyModel(ks.pop(), forms.pop())


def current_server_model(devices, server: ServerAccuracyModel, contributions) -> AccuracyModel:
    if math.fsum(contributions) > 0.0:
        return server_mixture(server, [d.accuracy for d in devices], contributions)
    # nobody contributes yet: fall back to equal weights
    return server_mixture(server, [d.accuracy for d in devices], [1.0] * len(devices))


def _others(contributions, i) -> float:
    return math.fsum(m for j, m in enumerate(contributions) if j != i)


def _grid_args(d: Device, lo: LocalOptimum, m_star: float, coef: float, others: float,
               server_model: AccuracyModel, rate: float):
    acc = d.accuracy
    a_bar = acc_eval(acc, lo.m_opt)
    return (int(acc.form), acc.a_opt, acc.k, int(d.payoff.family), d.payoff.scale, d.cost,
            lo.m_opt, m_star, a_bar, coef, others,
            int(server_model.form), server_model.a_opt, server_model.k, rate)


def net_utilities(ms, d: Device, m_opt: float, m_star: float, others_total: float,
                  r: float, cfg: MechanismConfig, server_model: AccuracyModel,
                  shaping_rate: Optional[float] = None) -> np.ndarray:
    """u_i^r = mechanism payoff - c m, vectorised over contributions ``ms``."""
    s_rate = r if shaping_rate is None else shaping_rate
    coef = shaping_coef(d, s_rate, cfg.shaping)
    lo = LocalOptimum(m_opt, 0.0)
    args = _grid_args(d, lo, m_star, coef, others_total, server_model, r)
    return kernels.net_utility_grid(np.asarray(ms, dtype=float), *args)


def best_response(
    d: Device,
    others_total: float,
    r: float,
    cfg: MechanismConfig,
    server_model: AccuracyModel,
    shaping_rate: Optional[float] = None,
    grid_points: int = 201,
) -> float:
    """Utility-maximising contribution against frozen others, server model and r.

    The shaped optimum is the analytic candidate; a coarse grid over
    [0, 3 max(m*, m_opt, 1)] and a bounded scalar search past m* confirm no
    better point exists. Returns 0 when the best utility is not positive.
    """
    s_rate = r if shaping_rate is None else shaping_rate
    lo = local_optimum(d)
    coef = shaping_coef(d, s_rate, cfg.shaping)
    m_star = shaped_optimum(d, lo.m_opt, others_total, server_model, s_rate, cfg.shaping).m_star
    args = _grid_args(d, lo, m_star, coef, others_total, server_model, r)

    def u(m):
        return float(kernels.net_utility_grid(np.array([m], dtype=float), *args)[0])

    best_m, best_u = m_star, u(m_star)

    def consider(m, val):
        nonlocal best_m, best_u
        if val > best_u + _IMPROVE_RTOL * max(1.0, abs(best_u)):
            best_m, best_u = m, val

    hi = 3.0 * max(m_star, lo.m_opt, 1.0)
    grid = np.linspace(0.0, hi, grid_points)
    vals = kernels.net_utility_grid(grid, *args)
    j = int(np.argmax(vals))
    consider(float(grid[j]), float(vals[j]))
    if best_m != m_star:
        # refine the grid winner between its neighbours
        a = float(grid[max(j - 1, 0)])
        b = float(grid[min(j + 1, grid_points - 1)])
        res = minimize_scalar(lambda m: -u(m), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-9 * max(1.0, b)})
        consider(float(res.x), -float(res.fun))

    res = minimize_scalar(lambda m: -u(m), bounds=(m_star, hi), method="bounded",
                          options={"xatol": 1e-9 * max(1.0, hi)})
    consider(float(res.x), -float(res.fun))

    if best_u <= 0.0:
        return 0.0
    return best_m


def participation_threshold(d: Device) -> float:
    """Infimum of contributions with positive mechanism payoff."""
    lo = local_optimum(d)
    if lo.m_opt > 0.0:
        return zero_crossing(d.accuracy)
    return 0.0


def _rate_for(mode, cfg, server_model, total):
    if mode == "none" or not total > 0.0:
        return 0.0
    return reward_rate(cfg, acc_eval(server_model, total), total)


def solve(
    devices: Sequence[Device],
    cfg: MechanismConfig,
    opts: SolveOptions = SolveOptions(),
) -> EquilibriumOutcome:
    """Best-response dynamics from the local optima.

    Devices update in index order; the server mixture and reward rate are
    refreshed between sweeps. Non-convergence is reported through
    ``converged=False``; assumption violations raise.
    """
    if not devices:
        raise DomainError("solve needs at least one device")
    server = resolve_server(devices, cfg)
    locals_ = [local_optimum(d) for d in devices]
    m = [lo.m_opt for lo in locals_]
    mode = opts.reward_mode
    converged = False
    sweeps = 0
    max_change = math.inf

    for sweeps in range(1, opts.max_sweeps + 1):
        total = math.fsum(m)
        model = current_server_model(devices, server, m)
        r = _rate_for(mode, cfg, model, total)
        s_rate = r if mode == "fixed_point" else 0.0
        max_change = 0.0
        for i, d in enumerate(devices):
            br = best_response(d, _others(m, i), r, cfg, model, shaping_rate=s_rate)
            new = m[i] + opts.damping * (br - m[i])
            max_change = max(max_change, abs(new - m[i]) / max(abs(m[i]), 1.0))
            m[i] = new
        total_after = math.fsum(m)
        r_after = _rate_for(mode, cfg, current_server_model(devices, server, m), total_after)
        r_change = abs(r_after - r) / max(r, 1e-300) if r_after != r else 0.0
        log.debug("sweep %d: max_change=%.3e r=%.6g", sweeps, max_change, r_after)
        if max_change <= opts.tol and r_change <= opts.tol:
            converged = True
            break

    if not converged:
        log.warning("best response did not converge in %d sweeps (max change %.3e)",
                    opts.max_sweeps, max_change)
    return _finalize(devices, cfg, server, locals_, m, mode, sweeps, converged, max_change)


def _finalize(devices, cfg, server, locals_, m, mode, sweeps, converged, max_change):
    total = math.fsum(m)
    model = current_server_model(devices, server, m)
    r = _rate_for(mode, cfg, model, total)
    s_rate = r if mode == "fixed_point" else 0.0
    stars, bundles, utils = [], [], []
    for i, d in enumerate(devices):
        others = _others(m, i)
        m_star = shaped_optimum(d, locals_[i].m_opt, others, model, s_rate, cfg.shaping).m_star
        b = settle(d, m[i], locals_[i].m_opt, m_star, others, r, cfg, model, shaping_rate=s_rate)
        stars.append(m_star)
        bundles.append(b)
        utils.append(b.utility - d.cost * m[i])
    acc_total = acc_eval(model, total)
    return EquilibriumOutcome(
        contributions=list(m),
        local_optima=[lo.m_opt for lo in locals_],
        shaped_optima=stars,
        reward_rate=r,
        bundles=bundles,
        server_utility=server_utility(cfg, acc_total),
        iterations=sweeps,
        converged=converged,
        server_accuracy=acc_total,
        server_model=model,
        device_utilities=utils,
        max_change=max_change,
    )


def deviation_gains(
    devices: Sequence[Device],
    cfg: MechanismConfig,
    outcome: EquilibriumOutcome,
    grid_points: int = 500,
    span: float = 2.0,
    reward_mode: str = "fixed_point",
) -> list[float]:
    """Largest relative gain any unilateral deviation on [0, span m_eq] achieves.

    Others, the server mixture and r are held at their equilibrium values.
    """
    s_rate = outcome.reward_rate if reward_mode == "fixed_point" else 0.0
    m = outcome.contributions
    gains = []
    for i, d in enumerate(devices):
        others = _others(m, i)
        lo = local_optimum(d)
        grid = np.linspace(0.0, span * max(m[i], 1.0), grid_points)
        vals = net_utilities(grid, d, lo.m_opt, outcome.shaped_optima[i], others,
                             outcome.reward_rate, cfg, outcome.server_model, shaping_rate=s_rate)
        u_eq = outcome.device_utilities[i]
        gains.append(max(0.0, float(vals.max()) - u_eq) / max(1.0, abs(u_eq)))
    return gains
