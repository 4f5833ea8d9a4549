"""Pure-Python scalar kernels.

Reference implementation of every hot routine. ``_ckernels.pyx`` mirrors this
file operation-for-operation so both backends round identically; keep them in
lockstep when editing.

Integer codes: accuracy form 0 = generalization bound, 1 = simplified;
payoff family 0 = linear, 1 = power.
"""
from math import log, sqrt

import numpy as np

from fedmech.errors import AssumptionViolation, DomainError, NoRootError, SolverError

GEN_BOUND = 0
SIMPLIFIED = 1
LINEAR = 0
POWER = 1

M_MAX = 1e12
MAX_BISECT = 2000

BACKEND = "python"


# -- accuracy ---------------------------------------------------------------

def acc_raw(form, a_opt, k, m):
    if not m > 0.0:
        raise DomainError(f"raw accuracy needs m > 0, got {m!r}")
    if form == SIMPLIFIED:
        return a_opt - 2.0 * sqrt(k / m)
    lg = 2.0 + log(m / k)
    if lg < 0.0:
        lg = 0.0
    return a_opt - (sqrt(2.0 * k * lg) + 4.0) / sqrt(m)


def acc_eval(form, a_opt, k, m):
    if m < 0.0:
        raise DomainError(f"accuracy needs m >= 0, got {m!r}")
    if m == 0.0:
        return 0.0
    v = acc_raw(form, a_opt, k, m)
    return v if v > 0.0 else 0.0


def acc_deriv(form, k, m):
    if not m > 0.0:
        raise DomainError(f"accuracy derivative needs m > 0, got {m!r}")
    if form == SIMPLIFIED:
        return sqrt(k) / (m * sqrt(m))
    lg = 2.0 + log(m / k)
    if lg <= 0.0:
        # log term clamped to zero: only the 4/sqrt(m) part varies
        return 2.0 / (m * sqrt(m))
    s = sqrt(2.0 * k * lg)
    return (0.5 * (s + 4.0) - k / s) / (m * sqrt(m))


def zero_crossing(form, a_opt, k, rtol):
    """First m with positive raw accuracy, bisected on [1e-12 k, 1e12 k]."""
    lo = 1e-12 * k
    hi = 1e12 * k
    if acc_raw(form, a_opt, k, lo) > 0.0 or acc_raw(form, a_opt, k, hi) <= 0.0:
        raise NoRootError(f"raw accuracy has no sign change on [{lo}, {hi}]")
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if acc_raw(form, a_opt, k, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


# -- payoff -----------------------------------------------------------------

def _check_acc(a):
    if not (0.0 <= a < 1.0):
        raise DomainError(f"payoff defined on [0, 1), got a={a!r}")


def phi(family, scale, a):
    _check_acc(a)
    if family == LINEAR:
        return scale * a
    t = 1.0 - a
    return scale * (1.0 / (t * t) - 1.0)


def phi_d1(family, scale, a):
    _check_acc(a)
    if family == LINEAR:
        return scale
    t = 1.0 - a
    return 2.0 * scale / (t * t * t)


def phi_d2(family, scale, a):
    _check_acc(a)
    if family == LINEAR:
        return 0.0
    t = 1.0 - a
    return 6.0 * scale / (t * t * t * t)


# -- local optimum ----------------------------------------------------------

def marginal_benefit(form, a_opt, k, family, scale, m):
    return phi_d1(family, scale, acc_raw(form, a_opt, k, m)) * acc_deriv(form, k, m)


def foc_root(form, a_opt, k, family, scale, cost, lo, hi, rtol):
    """Bisect marginal_benefit(m) = cost; caller guarantees g(lo) > cost >= g(hi)."""
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if marginal_benefit(form, a_opt, k, family, scale, mid) > cost:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- accuracy shaping ---------------------------------------------------------

def gamma(family, scale, a_bar, coef, dm):
    if dm < 0.0:
        raise DomainError(f"shaping defined for m >= m_opt, got offset {dm!r}")
    d1 = phi_d1(family, scale, a_bar)
    d2 = phi_d2(family, scale, a_bar)
    if d2 == 0.0:
        return coef * dm / d1
    # rationalised quadratic root; no cancellation near dm = 0
    x = coef * dm
    return 2.0 * x / (d1 + sqrt(d1 * d1 + 2.0 * d2 * x))


def _shape_gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, m):
    return (acc_eval(s_form, s_a, s_k, m + others) - a_bar
            - gamma(family, scale, a_bar, coef, m - m_opt))


def shaped_root(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, rtol):
    """Smallest m >= m_opt where server accuracy meets a_bar + gamma(m)."""
    g0 = _shape_gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, m_opt)
    if g0 < 0.0:
        raise AssumptionViolation(
            f"server accuracy {g0 + a_bar!r} below standalone accuracy {a_bar!r}")
    if g0 == 0.0:
        return m_opt
    lo = m_opt
    step = 1.0
    hi = m_opt + step
    while True:
        g = _shape_gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, hi)
        if g <= 0.0:
            break
        if hi >= M_MAX:
            raise SolverError("no crossing for shaped optimum below the data cap")
        lo = hi
        step *= 2.0
        hi = m_opt + step
    if g == 0.0:
        return hi
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if _shape_gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


# -- mechanism utility --------------------------------------------------------

def mech_gross(form, a_opt, k, family, scale, m_opt, m_star, a_bar, coef,
               others, s_form, s_a, s_k, rate, m):
    """Three-branch payoff the mechanism delivers to one device (before cost)."""
    if m <= m_opt:
        return phi(family, scale, acc_eval(form, a_opt, k, m))
    if m <= m_star:
        acc = a_bar + gamma(family, scale, a_bar, coef, m - m_opt)
    else:
        acc = acc_eval(s_form, s_a, s_k, m + others)
    return phi(family, scale, acc) + rate * (m - m_opt)


def net_utility_grid(ms, form, a_opt, k, family, scale, cost, m_opt, m_star,
                     a_bar, coef, others, s_form, s_a, s_k, rate):
    out = np.empty(len(ms))
    for i, m in enumerate(ms):
        m = float(m)
        out[i] = mech_gross(form, a_opt, k, family, scale, m_opt, m_star, a_bar,
                            coef, others, s_form, s_a, s_k, rate, m) - cost * m
    return out
