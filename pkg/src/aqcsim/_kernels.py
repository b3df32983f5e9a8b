"""Hot loops: energy enumeration, transverse-field matvec and RK4 stepping.

Every kernel exists twice, a numba ``@njit`` version and a pure-numpy
version with the same signature.  ``AQC_SIM_BACKEND=numpy`` (or a missing
numba install) selects the fallback at import time; ``use_backend`` switches
for the duration of a block, which is what the tests and the backend
benchmark rely on.
"""

import contextlib
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _np_energy_range(masks, falsifiers, start, out):
    # clause c is violated by index i iff (i & mask_c) == falsifier_c
    idx = np.arange(start, start + out.shape[0], dtype=np.uint64)
    out[:] = 0
    for c in range(masks.shape[0]):
        out += (idx & masks[c]) == falsifiers[c]


def _np_apply_h(psi, diag, n, a, b, out):
    # out = a * H_i psi + b * diag * psi,  H_i = sum_k (1 - X_k) / 2
    np.multiply(psi, a * 0.5 * n + b * diag, out=out)
    half = 0.5 * a
    dim = psi.shape[0]
    for k in range(n):
        blk = 1 << k
        flipped = psi.reshape(dim // (2 * blk), 2, blk)[:, ::-1, :].reshape(dim)
        out -= half * flipped


def _np_rk4_segment(psi, diag, n, tau, dt, k0, nsteps):
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    tmp = np.empty_like(psi)
    for j in range(nsteps):
        t = (k0 + j) * dt
        s0 = t / tau
        sm = (t + 0.5 * dt) / tau
        s1 = (t + dt) / tau
        _np_apply_h(psi, diag, n, 1.0 - s0, s0, k1)
        k1 *= -1j
        np.add(psi, 0.5 * dt * k1, out=tmp)
        _np_apply_h(tmp, diag, n, 1.0 - sm, sm, k2)
        k2 *= -1j
        np.add(psi, 0.5 * dt * k2, out=tmp)
        _np_apply_h(tmp, diag, n, 1.0 - sm, sm, k3)
        k3 *= -1j
        np.add(psi, dt * k3, out=tmp)
        _np_apply_h(tmp, diag, n, 1.0 - s1, s1, k4)
        k4 *= -1j
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(nogil=True, cache=True)
    def _nb_energy_range(masks, falsifiers, start, out):
        m = masks.shape[0]
        for j in range(out.shape[0]):
            i = np.uint64(start + j)
            e = 0
            for c in range(m):
                if (i & masks[c]) == falsifiers[c]:
                    e += 1
            out[j] = e

    @njit(nogil=True, cache=True)
    def _nb_apply_h(psi, diag, n, a, b, out):
        half = 0.5 * a
        base = 0.5 * a * n
        for i in range(psi.shape[0]):
            acc = (base + b * diag[i]) * psi[i]
            for k in range(n):
                acc -= half * psi[i ^ (1 << k)]
            out[i] = acc

    @njit(nogil=True, cache=True)
    def _nb_rk4_segment(psi, diag, n, tau, dt, k0, nsteps):
        dim = psi.shape[0]
        k1 = np.empty_like(psi)
        k2 = np.empty_like(psi)
        k3 = np.empty_like(psi)
        k4 = np.empty_like(psi)
        tmp = np.empty_like(psi)
        for j in range(nsteps):
            t = (k0 + j) * dt
            s0 = t / tau
            sm = (t + 0.5 * dt) / tau
            s1 = (t + dt) / tau
            _nb_apply_h(psi, diag, n, 1.0 - s0, s0, k1)
            for i in range(dim):
                k1[i] *= -1j
                tmp[i] = psi[i] + 0.5 * dt * k1[i]
            _nb_apply_h(tmp, diag, n, 1.0 - sm, sm, k2)
            for i in range(dim):
                k2[i] *= -1j
                tmp[i] = psi[i] + 0.5 * dt * k2[i]
            _nb_apply_h(tmp, diag, n, 1.0 - sm, sm, k3)
            for i in range(dim):
                k3[i] *= -1j
                tmp[i] = psi[i] + dt * k3[i]
            _nb_apply_h(tmp, diag, n, 1.0 - s1, s1, k4)
            for i in range(dim):
                psi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] - 1j * k4[i])


_IMPLS = {
    "numpy": (_np_energy_range, _np_apply_h, _np_rk4_segment),
}
if HAVE_NUMBA:
    _IMPLS["numba"] = (_nb_energy_range, _nb_apply_h, _nb_rk4_segment)

BACKENDS = tuple(_IMPLS)


def _default_backend():
    requested = os.environ.get("AQC_SIM_BACKEND", "").strip().lower()
    if requested:
        if requested not in _IMPLS:
            raise ImportError(
                f"AQC_SIM_BACKEND={requested!r} unavailable; choose from {BACKENDS}"
            )
        return requested
    return "numba" if HAVE_NUMBA else "numpy"


_active = _default_backend()


def get_backend():
    return _active


def set_backend(name):
    global _active
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch the kernel backend."""
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def energy_range(masks, falsifiers, start, out):
    """Write violated-clause counts for indices ``start .. start+len(out)``."""
    _IMPLS[_active][0](masks, falsifiers, start, out)


def apply_h(psi, diag, n, a, b, out):
    """``out = a * H_i @ psi + b * diag * psi`` without forming H_i."""
    _IMPLS[_active][1](psi, diag, n, float(a), float(b), out)


def rk4_segment(psi, diag, n, tau, dt, k0, nsteps):
    """Advance ``psi`` in place by ``nsteps`` RK4 steps of the linear sweep.

    Step ``j`` starts at ``t = (k0 + j) * dt``.
    """
    _IMPLS[_active][2](psi, diag, n, float(tau), float(dt), int(k0), int(nsteps))
