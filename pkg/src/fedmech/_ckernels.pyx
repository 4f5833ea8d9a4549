# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; line-for-line mirror of ``_pykernels.py``."""
from libc.math cimport log, sqrt

import numpy as np

from fedmech.errors import AssumptionViolation, DomainError, NoRootError, SolverError

cdef enum:
    _SIMPLIFIED = 1
    _LINEAR = 0

GEN_BOUND = 0
SIMPLIFIED = 1
LINEAR = 0
POWER = 1

M_MAX = 1e12
MAX_BISECT = 2000
cdef double _M_MAX = 1e12
cdef int _MAX_BISECT = 2000

BACKEND = "cython"


# -- accuracy ---------------------------------------------------------------

cdef inline double _acc_raw(int form, double a_opt, double k, double m) noexcept nogil:
    cdef double lg
    if form == _SIMPLIFIED:
        return a_opt - 2.0 * sqrt(k / m)
    lg = 2.0 + log(m / k)
    if lg < 0.0:
        lg = 0.0
    return a_opt - (sqrt(2.0 * k * lg) + 4.0) / sqrt(m)


cdef inline double _acc_eval(int form, double a_opt, double k, double m) noexcept nogil:
    cdef double v
    if m == 0.0:
        return 0.0
    v = _acc_raw(form, a_opt, k, m)
    return v if v > 0.0 else 0.0


cdef inline double _acc_deriv(int form, double k, double m) noexcept nogil:
    cdef double lg, s
    if form == _SIMPLIFIED:
        return sqrt(k) / (m * sqrt(m))
    lg = 2.0 + log(m / k)
    if lg <= 0.0:
        return 2.0 / (m * sqrt(m))
    s = sqrt(2.0 * k * lg)
    return (0.5 * (s + 4.0) - k / s) / (m * sqrt(m))


def acc_raw(int form, double a_opt, double k, double m):
    if not m > 0.0:
        raise DomainError(f"raw accuracy needs m > 0, got {m!r}")
    return _acc_raw(form, a_opt, k, m)


def acc_eval(int form, double a_opt, double k, double m):
    if m < 0.0:
        raise DomainError(f"accuracy needs m >= 0, got {m!r}")
    return _acc_eval(form, a_opt, k, m)


def acc_deriv(int form, double k, double m):
    if not m > 0.0:
        raise DomainError(f"accuracy derivative needs m > 0, got {m!r}")
    return _acc_deriv(form, k, m)


def zero_crossing(int form, double a_opt, double k, double rtol):
    cdef double lo = 1e-12 * k
    cdef double hi = 1e12 * k
    cdef double mid
    cdef int it
    if _acc_raw(form, a_opt, k, lo) > 0.0 or _acc_raw(form, a_opt, k, hi) <= 0.0:
        raise NoRootError(f"raw accuracy has no sign change on [{lo}, {hi}]")
    for it in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if _acc_raw(form, a_opt, k, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


# -- payoff -----------------------------------------------------------------

cdef inline bint _bad_acc(double a) noexcept nogil:
    return not (0.0 <= a < 1.0)


cdef inline double _phi(int family, double scale, double a) noexcept nogil:
    cdef double t
    if family == _LINEAR:
        return scale * a
    t = 1.0 - a
    return scale * (1.0 / (t * t) - 1.0)


cdef inline double _phi_d1(int family, double scale, double a) noexcept nogil:
    cdef double t
    if family == _LINEAR:
        return scale
    t = 1.0 - a
    return 2.0 * scale / (t * t * t)


cdef inline double _phi_d2(int family, double scale, double a) noexcept nogil:
    cdef double t
    if family == _LINEAR:
        return 0.0
    t = 1.0 - a
    return 6.0 * scale / (t * t * t * t)


cdef inline _raise_acc(double a):
    raise DomainError(f"payoff defined on [0, 1), got a={a!r}")


def phi(int family, double scale, double a):
    if _bad_acc(a):
        _raise_acc(a)
    return _phi(family, scale, a)


def phi_d1(int family, double scale, double a):
    if _bad_acc(a):
        _raise_acc(a)
    return _phi_d1(family, scale, a)


def phi_d2(int family, double scale, double a):
    if _bad_acc(a):
        _raise_acc(a)
    return _phi_d2(family, scale, a)


# -- local optimum ----------------------------------------------------------

cdef inline double _marginal(int form, double a_opt, double k, int family,
                             double scale, double m) noexcept nogil:
    return _phi_d1(family, scale, _acc_raw(form, a_opt, k, m)) * _acc_deriv(form, k, m)


def marginal_benefit(int form, double a_opt, double k, int family, double scale, double m):
    cdef double a
    if not m > 0.0:
        raise DomainError(f"raw accuracy needs m > 0, got {m!r}")
    a = _acc_raw(form, a_opt, k, m)
    if _bad_acc(a):
        _raise_acc(a)
    return _marginal(form, a_opt, k, family, scale, m)


def foc_root(int form, double a_opt, double k, int family, double scale,
             double cost, double lo, double hi, double rtol):
    cdef double mid
    cdef int it
    for it in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if _marginal(form, a_opt, k, family, scale, mid) > cost:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- accuracy shaping ---------------------------------------------------------

cdef inline double _gamma(int family, double scale, double a_bar, double coef,
                          double dm) noexcept nogil:
    cdef double d1 = _phi_d1(family, scale, a_bar)
    cdef double d2 = _phi_d2(family, scale, a_bar)
    cdef double x
    if d2 == 0.0:
        return coef * dm / d1
    x = coef * dm
    return 2.0 * x / (d1 + sqrt(d1 * d1 + 2.0 * d2 * x))


def gamma(int family, double scale, double a_bar, double coef, double dm):
    if dm < 0.0:
        raise DomainError(f"shaping defined for m >= m_opt, got offset {dm!r}")
    if _bad_acc(a_bar):
        _raise_acc(a_bar)
    return _gamma(family, scale, a_bar, coef, dm)


cdef inline double _gap(int family, double scale, double a_bar, double coef,
                        double m_opt, double others, int s_form, double s_a,
                        double s_k, double m) noexcept nogil:
    return (_acc_eval(s_form, s_a, s_k, m + others) - a_bar
            - _gamma(family, scale, a_bar, coef, m - m_opt))


def shaped_root(int family, double scale, double a_bar, double coef, double m_opt,
                double others, int s_form, double s_a, double s_k, double rtol):
    cdef double g0, g, lo, hi, mid, step
    cdef int it
    if _bad_acc(a_bar):
        _raise_acc(a_bar)
    g0 = _gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, m_opt)
    if g0 < 0.0:
        raise AssumptionViolation(
            f"server accuracy {g0 + a_bar!r} below standalone accuracy {a_bar!r}")
    if g0 == 0.0:
        return m_opt
    lo = m_opt
    step = 1.0
    hi = m_opt + step
    while True:
        g = _gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, hi)
        if g <= 0.0:
            break
        if hi >= _M_MAX:
            raise SolverError("no crossing for shaped optimum below the data cap")
        lo = hi
        step *= 2.0
        hi = m_opt + step
    if g == 0.0:
        return hi
    for it in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * hi:
            break
        if _gap(family, scale, a_bar, coef, m_opt, others, s_form, s_a, s_k, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


# -- mechanism utility --------------------------------------------------------

cdef inline double _mech_gross(int form, double a_opt, double k, int family,
                               double scale, double m_opt, double m_star,
                               double a_bar, double coef, double others,
                               int s_form, double s_a, double s_k, double rate,
                               double m) noexcept nogil:
    cdef double acc
    if m <= m_opt:
        return _phi(family, scale, _acc_eval(form, a_opt, k, m))
    if m <= m_star:
        acc = a_bar + _gamma(family, scale, a_bar, coef, m - m_opt)
    else:
        acc = _acc_eval(s_form, s_a, s_k, m + others)
    return _phi(family, scale, acc) + rate * (m - m_opt)


def mech_gross(int form, double a_opt, double k, int family, double scale,
               double m_opt, double m_star, double a_bar, double coef,
               double others, int s_form, double s_a, double s_k, double rate,
               double m):
    cdef double acc
    if m < 0.0:
        raise DomainError(f"accuracy needs m >= 0, got {m!r}")
    if m <= m_opt:
        acc = _acc_eval(form, a_opt, k, m)
    elif m <= m_star:
        acc = a_bar + _gamma(family, scale, a_bar, coef, m - m_opt)
    else:
        acc = _acc_eval(s_form, s_a, s_k, m + others)
    if _bad_acc(acc):
        _raise_acc(acc)
    return _mech_gross(form, a_opt, k, family, scale, m_opt, m_star, a_bar, coef,
                       others, s_form, s_a, s_k, rate, m)


def net_utility_grid(ms, int form, double a_opt, double k, int family, double scale,
                     double cost, double m_opt, double m_star, double a_bar,
                     double coef, double others, int s_form, double s_a, double s_k,
                     double rate):
    cdef double[::1] src = np.ascontiguousarray(ms, dtype=np.float64)
    cdef Py_ssize_t n = src.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double m, acc
    for i in range(n):
        m = src[i]
        if m < 0.0:
            raise DomainError(f"accuracy needs m >= 0, got {m!r}")
        if m <= m_opt:
            acc = _acc_eval(form, a_opt, k, m)
        elif m <= m_star:
            acc = a_bar + _gamma(family, scale, a_bar, coef, m - m_opt)
        else:
            acc = _acc_eval(s_form, s_a, s_k, m + others)
        if _bad_acc(acc):
            _raise_acc(acc)
        out[i] = _mech_gross(form, a_opt, k, family, scale, m_opt, m_star, a_bar,
                             coef, others, s_form, s_a, s_k, rate, m) - cost * m
    return out_arr
