"""Independent reference computations used to derive frozen test values.

Nothing here imports the package: formulas are re-typed in mpmath or plain
numpy so a shared bug cannot hide. Run as a script to print the values the
tests freeze.
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 50


def acc_genbound_mp(a_opt, k, m):
    a_opt, k, m = mp.mpf(a_opt), mp.mpf(k), mp.mpf(m)
    log_term = max(2 + mp.log(m / k), mp.mpf(0))
    return a_opt - (mp.sqrt(2 * k * log_term) + 4) / mp.sqrt(m)


def acc_simplified_mp(a_opt, k, m):
    return mp.mpf(a_opt) - 2 * mp.sqrt(mp.mpf(k) / mp.mpf(m))


def power_mp(z, a):
    return mp.mpf(z) * (1 / (1 - a) ** 2 - 1)


def acc_genbound_np(a_opt, k, m):
    m = np.asarray(m, dtype=float)
    log_term = np.maximum(2.0 + np.log(m / k), 0.0)
    return a_opt - (np.sqrt(2.0 * k * log_term) + 4.0) / np.sqrt(m)


def acc_simplified_np(a_opt, k, m):
    return a_opt - 2.0 * np.sqrt(k / np.asarray(m, dtype=float))


def acc_np(form, a_opt, k, m):
    raw = acc_genbound_np(a_opt, k, m) if form == "gen" else acc_simplified_np(a_opt, k, m)
    return np.maximum(raw, 0.0)


def payoff_np(family, scale, a):
    a = np.asarray(a, dtype=float)
    if family == "linear":
        return scale * a
    return scale * (1.0 / (1.0 - a) ** 2 - 1.0)


def grid_local_optimum(form, a_opt, k, family, scale, cost, m_max=2_000_000):
    """Best integer contribution in [0, m_max] by exhaustive evaluation."""
    ms = np.arange(1, m_max + 1, dtype=float)
    u = payoff_np(family, scale, acc_np(form, a_opt, k, ms)) - cost * ms
    j = int(np.argmax(u))
    if u[j] <= 0.0:
        return 0.0, 0.0
    return float(ms[j]), float(u[j])


def sign_scan_shaped(a_opt, k, form, scale, cost, m_opt, others, server_a_opt, eps, span=3_000_000):
    """First integer offset past m_opt where a_C(m + others) <= a_bar + gamma(m), power payoff, r = 0."""
    a_bar = float(acc_np(form, a_opt, k, m_opt))
    d1 = 2.0 * scale / (1.0 - a_bar) ** 3
    d2 = 6.0 * scale / (1.0 - a_bar) ** 4
    dm = np.arange(1, span + 1, dtype=float)
    x = (cost + eps) * dm
    gam = (-d1 + np.sqrt(d1 * d1 + 2.0 * d2 * x)) / d2
    gap = acc_np(form, server_a_opt, k, m_opt + dm + others) - (a_bar + gam)
    j = int(np.argmax(gap <= 0.0))
    assert gap[j] <= 0.0, "no crossing inside scan span"
    return m_opt + float(dm[j])


if __name__ == "__main__":
    print("genbound(0.95,10,1e4) =", mp.nstr(acc_genbound_mp(0.95, 10, 10000), 20))
    print("genbound(0.95,10,5e3) =", mp.nstr(acc_genbound_mp(0.95, 10, 5000), 20))
    a = acc_genbound_mp(0.95, 10, 20000)
    print("cifar utility m=2e4 =", mp.nstr(power_mp(1, a) - mp.mpf("2.5e-4") * 20000, 20))
    ms = np.arange(1, 100_000, dtype=float)
    raw = acc_genbound_np(0.95, 10, ms)
    j = int(np.argmax(raw > 0))
    print("genbound zero crossing in (", ms[j - 1], ",", ms[j], "]")
    print("cifar grid local opt =", grid_local_optimum("gen", 0.95, 10, "power", 1.0, 2.5e-4))
    print("mnist grid local opt =", grid_local_optimum("simp", 0.9975, 0.25, "power", 1.0, 4e-5, 50_000_000))
    print("closed-form linear =", grid_local_optimum("simp", 0.95, 1, "linear", 1.0, 1e-3, 1_000_000))
