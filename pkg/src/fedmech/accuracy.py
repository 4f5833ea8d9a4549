"""Analytic accuracy-vs-data curves for devices and for the server mixture."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from fedmech import kernels
from fedmech.errors import DegenerateInputError, DomainError

ZERO_CROSSING_RTOL = 1e-10


class AccuracyForm(enum.IntEnum):
    GENERALIZATION_BOUND = kernels.GEN_BOUND
    SIMPLIFIED = kernels.SIMPLIFIED

    @classmethod
    def parse(cls, text: str) -> "AccuracyForm":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "generalization_bound": cls.GENERALIZATION_BOUND,
            "gen_bound": cls.GENERALIZATION_BOUND,
            "simplified": cls.SIMPLIFIED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown accuracy form {text!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class AccuracyModel:
    """Accuracy curve ``a_opt - gap(m)`` with task difficulty ``k``.

    ``GENERALIZATION_BOUND`` uses ``(sqrt(2k(2 + log(m/k))) + 4) / sqrt(m)`` as
    the gap, ``SIMPLIFIED`` uses ``2 sqrt(k/m)``. Below ``m = k e^-2`` the log
    term of the bound would go negative and is clamped to zero.
    """

    a_opt: float
    k: float
    form: AccuracyForm = AccuracyForm.GENERALIZATION_BOUND

    def __post_init__(self):
        if not (0.0 <= self.a_opt < 1.0):
            raise DomainError(f"a_opt must lie in [0, 1), got {self.a_opt!r}")
        if not self.k > 0.0:
            raise DomainError(f"k must be positive, got {self.k!r}")
        object.__setattr__(self, "form", AccuracyForm(self.form))

    def raw(self, m: float) -> float:
        return eval_raw(self, m)

    def __call__(self, m: float) -> float:
        return eval(self, m)


@dataclass(frozen=True)
class ServerAccuracyModel:
    base_k: float
    form: AccuracyForm = AccuracyForm.GENERALIZATION_BOUND

    def __post_init__(self):
        if not self.base_k > 0.0:
            raise DomainError(f"base_k must be positive, got {self.base_k!r}")
        object.__setattr__(self, "form", AccuracyForm(self.form))


def eval_raw(model: AccuracyModel, m: float) -> float:
    """Unclamped accuracy; may be negative for small ``m``."""
    return kernels.acc_raw(int(model.form), model.a_opt, model.k, float(m))


def eval(model: AccuracyModel, m: float) -> float:  # noqa: A001 - domain name
    """Clamped accuracy ``max(raw, 0)``, exactly 0 at ``m = 0``."""
    return kernels.acc_eval(int(model.form), model.a_opt, model.k, float(m))


def deriv(model: AccuracyModel, m: float) -> float:
    return kernels.acc_deriv(int(model.form), model.k, float(m))


def zero_crossing(model: AccuracyModel) -> float:
    """Data size where raw accuracy turns positive."""
    if not model.a_opt > 0.0:
        raise DomainError("zero crossing needs a_opt > 0")
    return kernels.zero_crossing(int(model.form), model.a_opt, model.k, ZERO_CROSSING_RTOL)


def mixture_weights(contributions: Sequence[float]) -> list[float]:
    total = float(sum(contributions))
    if not total > 0.0:
        raise DegenerateInputError("mixture weights need a positive total contribution")
    return [float(m) / total for m in contributions]


def server_mixture(
    server: ServerAccuracyModel,
    devices: Sequence[AccuracyModel],
    contributions: Sequence[float],
) -> AccuracyModel:
    """Server accuracy model whose ``a_opt`` is the data-weighted device mean."""
    if len(devices) != len(contributions):
        raise ValueError("devices and contributions differ in length")
    if any(m < 0 for m in contributions):
        raise DomainError("contributions must be non-negative")
    weights = mixture_weights(contributions)
    a_bar = sum(w * d.a_opt for w, d in zip(weights, devices))
    # rounding can nudge a uniform mixture past its inputs
    lo = min(d.a_opt for d in devices)
    hi = max(d.a_opt for d in devices)
    a_bar = min(max(a_bar, lo), hi)
    return AccuracyModel(a_bar, server.base_k, server.form)
