"""Backend selection for the numerical kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module is used. Set ``FEDMECH_PURE_PYTHON=1`` to
force the fallback. Both expose the same names and produce bit-identical
floats.
"""
import os

if os.environ.get("FEDMECH_PURE_PYTHON", "").strip() not in ("", "0"):
    from fedmech import _pykernels as _impl
else:
    try:
        from fedmech import _ckernels as _impl
    except ImportError:  # extension not built
        from fedmech import _pykernels as _impl

BACKEND = _impl.BACKEND
GEN_BOUND = _impl.GEN_BOUND
SIMPLIFIED = _impl.SIMPLIFIED
LINEAR = _impl.LINEAR
POWER = _impl.POWER
M_MAX = _impl.M_MAX

acc_raw = _impl.acc_raw
acc_eval = _impl.acc_eval
acc_deriv = _impl.acc_deriv
zero_crossing = _impl.zero_crossing
phi = _impl.phi
phi_d1 = _impl.phi_d1
phi_d2 = _impl.phi_d2
marginal_benefit = _impl.marginal_benefit
foc_root = _impl.foc_root
gamma = _impl.gamma
shaped_root = _impl.shaped_root
mech_gross = _impl.mech_gross
net_utility_grid = _impl.net_utility_grid
