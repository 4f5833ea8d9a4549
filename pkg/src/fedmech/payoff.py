"""Accuracy payoff functions: linear ``w a`` and power ``z (1/(1-a)^2 - 1)``."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from fedmech import kernels
from fedmech.errors import DomainError


class PayoffFamily(enum.IntEnum):
    LINEAR = kernels.LINEAR
    POWER = kernels.POWER


@dataclass(frozen=True)
class Payoff:
    family: PayoffFamily
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise DomainError(f"payoff scale must be positive, got {self.scale!r}")
        object.__setattr__(self, "family", PayoffFamily(self.family))

    @classmethod
    def linear(cls, w: float = 1.0) -> "Payoff":
        return cls(PayoffFamily.LINEAR, float(w))

    @classmethod
    def power(cls, z: float = 1.0) -> "Payoff":
        return cls(PayoffFamily.POWER, float(z))

    @property
    def is_linear(self) -> bool:
        return self.family is PayoffFamily.LINEAR

    def __call__(self, a: float) -> float:
        return phi(self, a)


def phi(p: Payoff, a: float) -> float:
    return kernels.phi(int(p.family), p.scale, float(a))


def phi_d1(p: Payoff, a: float) -> float:
    return kernels.phi_d1(int(p.family), p.scale, float(a))


def phi_d2(p: Payoff, a: float) -> float:
    return kernels.phi_d2(int(p.family), p.scale, float(a))
