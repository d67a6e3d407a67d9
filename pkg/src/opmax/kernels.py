"""Hot numeric kernels: Q-value sweeps and diffusion belief increments.

Each kernel has a numba @njit implementation and a pure-numpy fallback that
produce bit-identical results. The default backend is chosen at import time
from the OPMAX_BACKEND environment variable:

    OPMAX_BACKEND=numba   require numba (ImportError if unavailable)
    OPMAX_BACKEND=numpy   force the numpy path
    OPMAX_BACKEND=auto    numba when importable, numpy otherwise (default)

Every public function also takes an explicit ``backend`` argument for tests
and benchmarks.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_BACKEND = os.environ.get("OPMAX_BACKEND", "auto").lower()
if _ENV_BACKEND not in ("auto", "numba", "numpy"):
    raise ValueError(f"OPMAX_BACKEND must be auto|numba|numpy, got {_ENV_BACKEND!r}")

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - mirror environment always has numba
    _HAS_NUMBA = False
    if _ENV_BACKEND == "numba":
        raise

DEFAULT_BACKEND = "numba" if (_ENV_BACKEND == "numba" or (_ENV_BACKEND == "auto" and _HAS_NUMBA)) else "numpy"


def _resolve(backend: str | None) -> str:
    backend = DEFAULT_BACKEND if backend is None else backend
    if backend not in ("numba", "numpy"):
        raise ValueError(f"backend must be numba|numpy, got {backend!r}")
    if backend == "numba" and not _HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# -- Q sweep ---------------------------------------------------------------
#
# One synchronous (Jacobi) sweep of the stateless action-value recursion on
# directed edge slots e = (u -> v):
#
#     Q'[e] = reward[v] + gamma * max_{w in N(v) \ {u}} Q[(v -> w)]
#
# Rows listed in `frozen` (random sources) stay at zero; the max over an
# empty set is zero (action values are nonnegative).


def q_sweep(
    indptr: np.ndarray,
    indices: np.ndarray,
    rev: np.ndarray,
    reward: np.ndarray,
    gamma: float,
    q: np.ndarray,
    frozen_rows: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    if _resolve(backend) == "numba":
        out = np.empty_like(q)
        _q_sweep_nb(indptr, indices, rev, reward, gamma, q, frozen_rows, out)
        return out
    return _q_sweep_np(indptr, indices, rev, reward, gamma, q, frozen_rows)


def _q_sweep_np(indptr, indices, rev, reward, gamma, q, frozen_rows):
    n = len(indptr) - 1
    if len(indices) == 0:
        return q.copy()
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    m1 = np.maximum.reduceat(q, indptr[:-1])
    slots = np.arange(len(q))
    candidates = np.where(q == m1[row_of], slots, len(q))
    arg1 = np.minimum.reduceat(candidates, indptr[:-1])
    masked = q.copy()
    masked[arg1] = -np.inf
    m2 = np.maximum.reduceat(masked, indptr[:-1])
    dst = indices
    max_term = np.where(rev == arg1[dst], m2[dst], m1[dst])
    max_term = np.maximum(max_term, 0.0)
    out = reward[dst] + gamma * max_term
    out[frozen_rows[row_of]] = 0.0
    return out


if _HAS_NUMBA:

    @njit(cache=True)
    def _q_sweep_nb(indptr, indices, rev, reward, gamma, q, frozen_rows, out):
        n = indptr.shape[0] - 1
        m1 = np.full(n, -np.inf)
        m2 = np.full(n, -np.inf)
        arg1 = np.full(n, -1, dtype=np.int64)
        for v in range(n):
            for e in range(indptr[v], indptr[v + 1]):
                x = q[e]
                if x > m1[v]:
                    m2[v] = m1[v]
                    m1[v] = x
                    arg1[v] = e
                elif x > m2[v]:
                    m2[v] = x
        for u in range(n):
            for e in range(indptr[u], indptr[u + 1]):
                if frozen_rows[u]:
                    out[e] = 0.0
                    continue
                v = indices[e]
                term = m2[v] if rev[e] == arg1[v] else m1[v]
                if term < 0.0:
                    term = 0.0
                out[e] = reward[v] + gamma * term


# -- diffusion increment -----------------------------------------------------
#
# Expected one-step belief-parameter increment under mixed strategy rows pi
# (one probability per directed edge slot):
#
#     delta[v, omega[u]] += zeta[v] * gate_mu[u] * pi[(u -> v)] * (1 - p_sp)
#
# for every sender u with a content-class omega[u] (negative omega marks the
# personal class and contributes nothing).


def diffusion_delta(
    indptr: np.ndarray,
    indices: np.ndarray,
    pi: np.ndarray,
    omega: np.ndarray,
    gate_mu: np.ndarray,
    zeta: np.ndarray,
    p_sp: float,
    n_classes: int,
    backend: str | None = None,
) -> np.ndarray:
    n = len(indptr) - 1
    out = np.zeros((n, n_classes))
    if len(indices) == 0:
        return out
    if _resolve(backend) == "numba":
        _diffusion_delta_nb(indptr, indices, pi, omega, gate_mu, zeta, p_sp, out)
        return out
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    live = omega[row_of] >= 0
    src = row_of[live]
    dst = indices[live]
    contrib = (gate_mu[src] * (1.0 - p_sp)) * pi[live] * zeta[dst]
    np.add.at(out, (dst, omega[src]), contrib)
    return out


if _HAS_NUMBA:

    @njit(cache=True)
    def _diffusion_delta_nb(indptr, indices, pi, omega, gate_mu, zeta, p_sp, out):
        n = indptr.shape[0] - 1
        for u in range(n):
            cls = omega[u]
            if cls < 0:
                continue
            base = gate_mu[u] * (1.0 - p_sp)
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                out[v, cls] += base * pi[e] * zeta[v]


# -- segment softmax ---------------------------------------------------------


def segment_softmax(values: np.ndarray, indptr: np.ndarray, temperature: float) -> np.ndarray:
    """Row-wise max-shifted softmax over CSR segments (numpy only)."""
    n = len(indptr) - 1
    if len(values) == 0:
        return values.astype(float)
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    h = values / temperature
    shifted = h - np.maximum.reduceat(h, indptr[:-1])[row_of]
    e = np.exp(shifted)
    return e / np.add.reduceat(e, indptr[:-1])[row_of]
