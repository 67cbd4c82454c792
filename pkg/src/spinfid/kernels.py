"""Hot numeric kernels: sector enumeration and bond-exchange matvec.

Every kernel exists twice: a numba-jitted scalar loop (default) and a
vectorized pure-numpy fallback.  The active implementation is chosen once
at import time from the SPINFID_BACKEND environment variable ("numba" or
"numpy"); without the variable, numba is used when importable.

Both implementations accumulate floating-point contributions in the same
per-entry order, so their outputs are bit-identical.  The matvec is a pure
gather (row i reads only v, never writes other rows), which keeps results
deterministic however calls are scheduled.
"""

from __future__ import annotations

import os

import numpy as np

BACKEND_ENV = "SPINFID_BACKEND"
MAX_SITES = 30


def _resolve_backend() -> str:
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ImportError(f"{BACKEND_ENV}=numba requested but numba is not installed")
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

try:  # HAVE_NUMBA is independent of the selected backend, for tests/benchmarks
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def binomial_table(n_max: int = MAX_SITES) -> np.ndarray:
    """Pascal triangle as an (n_max+1)^2 int64 array; zero where k > n."""
    t = np.zeros((n_max + 1, n_max + 1), dtype=np.int64)
    t[:, 0] = 1
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            t[n, k] = t[n - 1, k - 1] + t[n - 1, k]
    return t


BINOM = binomial_table()


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def fill_states_numpy(L: int, n_up: int, dim: int) -> np.ndarray:
    """Vectorized combinadic unrank of 0..dim-1 into ascending bitmasks."""
    r = np.arange(dim, dtype=np.int64)
    k = np.full(dim, n_up, dtype=np.int64)
    out = np.zeros(dim, dtype=np.int64)
    for p in range(L - 1, -1, -1):
        c = BINOM[p, k]  # zero above the diagonal, which forces remaining bits
        take = (k > 0) & (r >= c)
        out[take] |= np.int64(1) << p
        r[take] -= c[take]
        k[take] -= 1
    return out


def apply_bonds_numpy(states, offsets, low_rank, low_bits, L, c_nn, c_nnn, v, out):
    """out = H v for H = c_nn * sum_j s_j.s_{j+1} + c_nnn * sum_j s_j.s_{j+2}."""
    low_mask = np.int64((1 << low_bits) - 1)
    out[:] = 0.0
    diag = np.zeros(states.shape[0])
    for dist, coup in ((1, c_nn), (2, c_nnn)):
        if coup == 0.0:
            continue
        for j in range(L):
            k = (j + dist) % L
            differ = ((states >> j) & 1) != ((states >> k) & 1)
            diag += np.where(differ, -0.25 * coup, 0.25 * coup)
            rows = np.nonzero(differ)[0]
            f = states[rows] ^ np.int64((1 << j) | (1 << k))
            cols = offsets[f >> low_bits] + low_rank[f & low_mask]
            out[rows] += (0.5 * coup) * v[cols]
    out += diag * v
    return out


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily on first call)
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _fill_states_nb(L, n_up, binom, out):  # pragma: no cover - jitted
        dim = out.shape[0]
        for i in range(dim):
            r = i
            k = n_up
            m = np.int64(0)
            for p in range(L - 1, -1, -1):
                if k == 0:
                    break
                c = binom[p, k]
                if r >= c:
                    m |= np.int64(1) << p
                    r -= c
                    k -= 1
            out[i] = m

    @njit(cache=True)
    def _apply_bonds_nb(states, offsets, low_rank, low_bits, L, c_nn, c_nnn, v, out):  # pragma: no cover - jitted
        n = states.shape[0]
        low_mask = (np.int64(1) << low_bits) - np.int64(1)
        for i in range(n):
            m = states[i]
            off = 0.0
            diag = 0.0
            if c_nn != 0.0:
                for j in range(L):
                    k = j + 1
                    if k == L:
                        k = 0
                    if ((m >> j) & 1) == ((m >> k) & 1):
                        diag += 0.25 * c_nn
                    else:
                        diag -= 0.25 * c_nn
                        f = m ^ ((np.int64(1) << j) | (np.int64(1) << k))
                        off += 0.5 * c_nn * v[offsets[f >> low_bits] + low_rank[f & low_mask]]
            if c_nnn != 0.0:
                for j in range(L):
                    k = j + 2
                    if k >= L:
                        k -= L
                    if ((m >> j) & 1) == ((m >> k) & 1):
                        diag += 0.25 * c_nnn
                    else:
                        diag -= 0.25 * c_nnn
                        f = m ^ ((np.int64(1) << j) | (np.int64(1) << k))
                        off += 0.5 * c_nnn * v[offsets[f >> low_bits] + low_rank[f & low_mask]]
            out[i] = off + diag * v[i]

    def fill_states_numba(L: int, n_up: int, dim: int) -> np.ndarray:
        out = np.empty(dim, dtype=np.int64)
        _fill_states_nb(L, n_up, BINOM, out)
        return out

    def apply_bonds_numba(states, offsets, low_rank, low_bits, L, c_nn, c_nnn, v, out):
        _apply_bonds_nb(states, offsets, low_rank, low_bits, L, c_nn, c_nnn, v, out)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    fill_states = fill_states_numba
    apply_bonds = apply_bonds_numba
else:
    fill_states = fill_states_numpy
    apply_bonds = apply_bonds_numpy
