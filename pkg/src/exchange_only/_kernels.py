"""Hot loops for exchange-pulse composition.

Every exchange pulse is ``1 + (exp(-i t) - 1) * (1 + SWAP_ij) / 2`` on the
2**n product space, so applying one to a matrix only mixes each row with the
row whose bits i and j are swapped.  Two interchangeable backends implement
that update: a numba ``@njit`` kernel and a vectorised numpy one.  Set
``EXCHANGE_ONLY_DISABLE_NUMBA=1`` to force the numpy path (numba is also
skipped automatically when it cannot be imported).
"""

import os

import numpy as np

_DISABLE_ENV = "EXCHANGE_ONLY_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by environment")
    from numba import njit
except ImportError:
    njit = None

HAVE_NUMBA = njit is not None
BACKEND = "numba" if HAVE_NUMBA else "numpy"


def swap_partner(n_sites, i, j):
    """Index permutation exchanging the spins on sites i and j.

    Site 0 is the most significant bit (``np.kron`` ordering).
    """
    idx = np.arange(2**n_sites)
    bi = n_sites - 1 - i
    bj = n_sites - 1 - j
    differ = ((idx >> bi) ^ (idx >> bj)) & 1
    return idx ^ (differ * ((1 << bi) | (1 << bj)))


# -- numpy backend ---------------------------------------------------------


def _apply_pulse_numpy(mat, n_sites, i, j, t):
    perm = swap_partner(n_sites, i, j)
    c = 0.5 * (np.exp(-1j * t) - 1.0)
    return mat + c * (mat + mat[perm])


def _compose_numpy(n_sites, pairs, times):
    dim = 2**n_sites
    out = np.eye(dim, dtype=np.complex128)
    for (i, j), t in zip(pairs, times):
        out = _apply_pulse_numpy(out, n_sites, int(i), int(j), float(t))
    return out


# -- numba backend ---------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _apply_pulse_inplace(mat, n_sites, i, j, t):
        dim = mat.shape[0]
        ncol = mat.shape[1]
        bi = n_sites - 1 - i
        bj = n_sites - 1 - j
        mask = (1 << bi) | (1 << bj)
        c = 0.5 * (np.exp(-1j * t) - 1.0)
        for k in range(dim):
            if ((k >> bi) ^ (k >> bj)) & 1 == 0:
                # both bits equal: pure triplet component
                e = 1.0 + 2.0 * c
                for col in range(ncol):
                    mat[k, col] *= e
            else:
                kp = k ^ mask
                if kp < k:
                    continue
                for col in range(ncol):
                    x = mat[k, col]
                    y = mat[kp, col]
                    mat[k, col] = x + c * (x + y)
                    mat[kp, col] = y + c * (x + y)

    @njit(cache=True)
    def _compose_numba(n_sites, pairs, times):
        dim = 1 << n_sites
        out = np.zeros((dim, dim), dtype=np.complex128)
        for k in range(dim):
            out[k, k] = 1.0
        for p in range(times.shape[0]):
            _apply_pulse_inplace(out, n_sites, pairs[p, 0], pairs[p, 1], times[p])
        return out


def apply_pulse(mat, n_sites, i, j, t, backend=None):
    """Return ``U_ij(t) @ mat`` without building the 2**n pulse matrix."""
    backend = backend or BACKEND
    mat = np.asarray(mat, dtype=np.complex128)
    if backend == "numba":
        out = np.array(mat, order="C", copy=True)
        if out.ndim == 1:
            _apply_pulse_inplace(out.reshape(-1, 1), n_sites, i, j, float(t))
        else:
            _apply_pulse_inplace(out, n_sites, i, j, float(t))
        return out
    if mat.ndim == 1:
        return _apply_pulse_numpy(mat[:, None], n_sites, i, j, t)[:, 0]
    return _apply_pulse_numpy(mat, n_sites, i, j, t)


def compose_pulses(n_sites, pairs, times, backend=None):
    """Ordered product ``U_N ... U_1`` of exchange pulses (first pulse acts first)."""
    backend = backend or BACKEND
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _compose_numba(int(n_sites), pairs, times)
    if backend != "numpy":
        raise ValueError(f"unknown backend {backend!r}")
    return _compose_numpy(n_sites, pairs, times)
