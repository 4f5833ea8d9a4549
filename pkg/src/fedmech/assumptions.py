"""Sampled checks of the modelling assumptions the theory relies on.

Each check returns a list of human-readable problems; empty means it passed.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from fedmech.accuracy import AccuracyModel, eval_raw, zero_crossing
from fedmech.accuracy import eval as acc_eval
from fedmech.device import Device
from fedmech.errors import NoRootError
from fedmech.payoff import phi

_EPS = np.finfo(float).eps


def _slope_violations(ms: np.ndarray, fs: np.ndarray, rtol: float) -> int:
    """Count places where secant slopes increase beyond rounding + rtol."""
    slopes = np.diff(fs) / np.diff(ms)
    noise = 8 * _EPS * (np.abs(fs[:-2]) + np.abs(fs[1:-1]) + np.abs(fs[2:])) / np.diff(ms)[:-1]
    rise = slopes[1:] - slopes[:-1]
    allowed = rtol * np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:])) + noise
    return int(np.count_nonzero(rise > allowed))


def check_accuracy(model: AccuracyModel, points: int = 400, upper: float = 1e12) -> list[str]:
    """Non-decreasing and concave on m > k, bounded by a_opt."""
    problems = []
    ms = np.geomspace(model.k * (1 + 1e-6), upper, points)
    raw = np.array([eval_raw(model, m) for m in ms])
    clamped = np.array([acc_eval(model, m) for m in ms])
    if np.any(np.diff(clamped) < -8 * _EPS):
        problems.append("accuracy decreases with more data")
    if np.any(clamped >= model.a_opt):
        problems.append("accuracy reaches a_opt at finite data")
    bad = _slope_violations(ms, raw, 1e-9)
    if bad:
        problems.append(f"raw accuracy not concave at {bad} sampled points")
    return problems


def check_payoff_composition(d: Device, points: int = 400, upper: float = 1e12) -> list[str]:
    """phi(a(m)) must stay concave and increasing where accuracy is positive."""
    acc = d.accuracy
    if acc.a_opt <= 0.0:
        return []
    try:
        m0 = zero_crossing(acc)
    except NoRootError as exc:
        return [f"device {d.id!r}: {exc}"]
    lo = max(m0 * (1 + 1e-3), acc.k * (1 + 1e-6))
    if lo >= upper:
        return []
    ms = np.geomspace(lo, upper, points)
    fs = np.array([phi(d.payoff, acc_eval(acc, m)) for m in ms])
    problems = []
    if np.any(np.diff(fs) < -8 * _EPS * np.abs(fs[1:])):
        problems.append(f"device {d.id!r}: payoff of accuracy not increasing in data")
    bad = _slope_violations(ms, fs, 1e-9)
    if bad:
        problems.append(f"device {d.id!r}: payoff of accuracy not concave at {bad} sampled points")
    return problems


def check_device(d: Device) -> list[str]:
    return [f"device {d.id!r}: {p}" for p in check_accuracy(d.accuracy)] + check_payoff_composition(d)


def server_dominance(devices: Sequence[Device], contributions: Sequence[float],
                     server_model: AccuracyModel, local_optima: Sequence[float]) -> list[bool]:
    """Per device: does the global model beat its standalone accuracy?"""
    total = math.fsum(contributions)
    a_c = acc_eval(server_model, total)
    return [a_c >= acc_eval(d.accuracy, mo) for d, mo in zip(devices, local_optima)]
