"""Forwarding-recommendation policies.

Four smart strategies compete with the uniform random baseline:

* DAMO: decentralized, samples a neighbor from a Boltzmann distribution over
  one-step (myopic) rewards.
* ADMO: decentralized, same sampling but over stateless Q-values built by
  synchronous sweeps with a time-decaying discount.
* CAMO: centralized, samples joint actions, scores each by an N-step
  probabilistic diffusion of expected belief parameters, keeps the best.
* ACMO: CAMO with the diffusion-internal Boltzmann rows built from Q-values
  instead of myopic rewards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import (
    DEFAULT_SMART_CLASS,
    NodeState,
    myopic_reward,
    myopic_reward_vector,
)
from .graph import Graph


class StrategyError(Exception):
    """Invalid strategy configuration or action."""


@dataclass(frozen=True)
class StrategyConfig:
    """Knobs shared by the strategy family.

    temperature: Boltzmann exploration temperature (> 0).
    gamma_prime, gamma_double_prime: bases of the time-varying discount
        gamma_t = gamma' * gamma''**t.
    n_q: number of Q sweeps per step.
    window: look-ahead length N of the centralized diffusion.
    n_samples: joint actions sampled per centralized decision.
    acmo_k_mode: "max" applies K = max(window - tau, n_q) sweeps inside the
        ACMO diffusion as written in the source procedure; "min" is the
        cheaper alternative reading.
    """

    temperature: float = 0.015
    gamma_prime: float = 0.95
    gamma_double_prime: float = 0.97
    n_q: int = 4
    window: int = 4
    n_samples: int = 20
    acmo_k_mode: str = "max"

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise StrategyError("temperature must be > 0")
        for name in ("gamma_prime", "gamma_double_prime"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise StrategyError(f"{name} must lie in [0, 1]")
        if self.n_q < 0:
            raise StrategyError("n_q must be >= 0")
        if self.window < 1:
            raise StrategyError("window must be >= 1")
        if self.n_samples < 1:
            raise StrategyError("n_samples must be >= 1")
        if self.acmo_k_mode not in ("max", "min"):
            raise StrategyError("acmo_k_mode must be 'max' or 'min'")


def boltzmann(h: np.ndarray, temperature: float) -> np.ndarray:
    """Soft-max distribution over action values, max-shifted for safety."""
    if temperature <= 0.0:
        raise StrategyError("temperature must be > 0")
    h = np.asarray(h, dtype=float)
    scaled = h / temperature
    e = np.exp(scaled - scaled.max())
    return e / e.sum()


def boltzmann_sample(h: np.ndarray, temperature: float, rng: np.random.Generator) -> int:
    p = boltzmann(h, temperature)
    return int(np.searchsorted(np.cumsum(p), rng.random(), side="right").clip(0, len(p) - 1))


def discount(t: int, cfg: StrategyConfig) -> float:
    """Time-varying discount factor gamma' * gamma''**t."""
    if t < 0:
        raise StrategyError("online time must be >= 0")
    return cfg.gamma_prime * cfg.gamma_double_prime**t


def random_recommend(v: int, g: Graph, rng: np.random.Generator) -> int:
    nbrs = g.neighbors(v)
    if len(nbrs) == 0:
        raise StrategyError(f"node {v} is isolated")
    return int(nbrs[rng.integers(len(nbrs))])


def damo_recommend(
    v: int,
    g: Graph,
    states: list[NodeState],
    cfg: StrategyConfig,
    rng: np.random.Generator,
    smart_class: int = DEFAULT_SMART_CLASS,
) -> int:
    """Sample a forwarding target from the Boltzmann distribution over the
    myopic rewards of v's neighbors."""
    nbrs = g.neighbors(v)
    if len(nbrs) == 0:
        raise StrategyError(f"node {v} is isolated")
    rewards = np.array([myopic_reward(states[int(w)], smart_class) for w in nbrs])
    return int(nbrs[boltzmann_sample(rewards, cfg.temperature, rng)])


# -- stateless Q-learning ----------------------------------------------------


class QTable:
    """Action values Q^(u)(v), one entry per directed adjacency slot."""

    __slots__ = ("graph", "values")

    def __init__(self, graph: Graph, values: np.ndarray | None = None):
        self.graph = graph
        indptr, indices = graph.csr()
        if values is None:
            values = np.zeros(len(indices))
        elif len(values) != len(indices):
            raise StrategyError("Q value array does not match adjacency")
        self.values = values

    def row(self, v: int) -> np.ndarray:
        indptr, _ = self.graph.csr()
        return self.values[indptr[v] : indptr[v + 1]]


def admo_q_sweep(
    q: QTable,
    node_rewards: np.ndarray,
    t: int,
    cfg: StrategyConfig,
    random_sources: frozenset[int] | set[int] = frozenset(),
    backend: str | None = None,
) -> QTable:
    """One synchronous sweep Q'[u][v] = r(v) + gamma_t * max_{w in N(v)\\u} Q[v][w].

    Rows of random sources are frozen at zero ("for all u in V minus the
    random sources"); the sender is excluded from the target's action set to
    avoid back-and-forth influence.
    """
    g = q.graph
    indptr, indices = g.csr()
    frozen = np.zeros(g.n, dtype=bool)
    if random_sources:
        frozen[list(random_sources)] = True
    values = kernels.q_sweep(
        indptr,
        indices,
        g.reverse_edges(),
        np.asarray(node_rewards, dtype=float),
        discount(t, cfg),
        q.values,
        frozen,
        backend=backend,
    )
    return QTable(g, values)


def build_q_table(
    g: Graph,
    node_rewards: np.ndarray,
    t: int,
    cfg: StrategyConfig,
    n_sweeps: int | None = None,
    random_sources: frozenset[int] | set[int] = frozenset(),
    backend: str | None = None,
) -> QTable:
    """Run n_sweeps (default cfg.n_q) Jacobi sweeps from the zero table."""
    q = QTable(g)
    sweeps = cfg.n_q if n_sweeps is None else n_sweeps
    for _ in range(sweeps):
        q = admo_q_sweep(q, node_rewards, t, cfg, random_sources, backend=backend)
    return q


def admo_recommend(
    v: int, q: QTable, cfg: StrategyConfig, rng: np.random.Generator
) -> int:
    """Boltzmann sample over the Q-row of v."""
    nbrs = q.graph.neighbors(v)
    if len(nbrs) == 0:
        raise StrategyError(f"node {v} is isolated")
    return int(nbrs[boltzmann_sample(q.row(v), cfg.temperature, rng)])


# -- centralized diffusion ----------------------------------------------------


@dataclass
class DiffusionState:
    """Offline working state: expected belief parameters, MAP classes, step."""

    alpha_hat: np.ndarray  # (n, classes), entries > 0
    omega_hat: np.ndarray  # (n,), MAP class per node
    tau: int = 0


def map_omega(alpha_hat: np.ndarray) -> np.ndarray:
    """MAP class per node; ties break toward the lowest class index."""
    return np.argmax(alpha_hat, axis=1)


def camo_mixed_strategy(
    d: DiffusionState,
    g: Graph,
    beta: np.ndarray,
    zeta: np.ndarray,
    cfg: StrategyConfig,
    smart_class: int = DEFAULT_SMART_CLASS,
) -> np.ndarray:
    """Per-node probability rows over neighbors, one value per directed edge.

    Nodes whose MAP class is the smart class use a Boltzmann row over the
    myopic rewards of their neighbors (computed from the expected belief
    parameters); all other nodes push uniformly at random.
    """
    rewards = myopic_reward_vector(d.alpha_hat, beta, zeta, smart_class)
    indptr, indices = g.csr()
    return _mixed_rows(g, indptr, indices, d.omega_hat == smart_class, rewards[indices], cfg.temperature)


def _mixed_rows(g, indptr, indices, smart_row_mask, edge_values, temperature):
    n = g.n
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    soft = kernels.segment_softmax(edge_values, indptr, temperature)
    uniform = 1.0 / np.diff(indptr).astype(float)[row_of]
    return np.where(smart_row_mask[row_of], soft, uniform)


def expected_delta(
    d: DiffusionState,
    g: Graph,
    pi: np.ndarray,
    zeta: np.ndarray,
    p_sp: float,
    backend: str | None = None,
) -> np.ndarray:
    """Expected belief-parameter increment for one diffusion step.

    Each sender u contributes only at its MAP class, weighted by its opinion
    of that class (the forward gate), its row probability of targeting v and
    the non-spontaneous factor (1 - p_sp).
    """
    indptr, indices = g.csr()
    n_classes = d.alpha_hat.shape[1]
    rho = d.alpha_hat.sum(axis=1)
    gate_mu = np.where(
        d.omega_hat >= 0,
        d.alpha_hat[np.arange(g.n), np.maximum(d.omega_hat, 0)] / rho,
        0.0,
    )
    return kernels.diffusion_delta(
        indptr, indices, pi, d.omega_hat, gate_mu, zeta, p_sp, n_classes, backend=backend
    )


def _point_mass_rows(g: Graph, a0: dict[int, int]) -> np.ndarray:
    """Degenerate tau=0 rows: sampled action for acting nodes, uniform else."""
    indptr, indices = g.csr()
    n = g.n
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    pi = 1.0 / np.diff(indptr).astype(float)[row_of]
    for v, target in a0.items():
        lo, hi = indptr[v], indptr[v + 1]
        pos = lo + int(np.searchsorted(indices[lo:hi], target))
        if pos >= hi or indices[pos] != target:
            raise StrategyError(f"action target {target} is not a neighbor of {v}")
        pi[lo:hi] = 0.0
        pi[pos] = 1.0
    return pi


def diffuse(
    g: Graph,
    alpha_0: np.ndarray,
    a_0: dict[int, int],
    omega_0: np.ndarray,
    n_steps: int,
    beta: np.ndarray,
    zeta: np.ndarray,
    cfg: StrategyConfig,
    p_sp: float,
    smart_class: int = DEFAULT_SMART_CLASS,
    mode: str = "camo",
    t_online: int = 0,
    random_sources: frozenset[int] | set[int] = frozenset(),
    backend: str | None = None,
) -> np.ndarray:
    """Probabilistic diffusion: iterate expected belief parameters n_steps times.

    At tau=0 the nodes that chose a smart-class message push deterministically
    to their sampled action and everyone else pushes uniformly; later steps
    rebuild MAP classes and mixed-strategy rows from the evolving parameters.
    """
    if n_steps < 1:
        raise StrategyError("diffusion needs at least one step")
    if mode not in ("camo", "acmo"):
        raise StrategyError(f"unknown diffusion mode {mode!r}")
    smart_now = {int(v) for v in np.flatnonzero(omega_0 == smart_class)}
    if smart_now != set(a_0):
        raise StrategyError("a_0 must assign exactly the nodes whose observed class is smart")
    alpha_hat = np.array(alpha_0, dtype=float)
    d = DiffusionState(alpha_hat, np.asarray(omega_0), 0)
    pi = _point_mass_rows(g, a_0)
    for tau in range(n_steps):
        if tau > 0:
            d = DiffusionState(alpha_hat, map_omega(alpha_hat), tau)
            pi = _diffusion_rows(
                d, g, beta, zeta, cfg, p_sp, smart_class, mode, t_online, tau,
                n_steps, random_sources, backend,
            )
        delta = expected_delta(d, g, pi, zeta, p_sp, backend=backend)
        alpha_hat = beta[:, None] * alpha_hat + delta
    return alpha_hat


def _diffusion_rows(
    d, g, beta, zeta, cfg, p_sp, smart_class, mode, t_online, tau, n_steps,
    random_sources, backend,
):
    if mode == "camo":
        return camo_mixed_strategy(d, g, beta, zeta, cfg, smart_class)
    # ACMO: smart rows come from Q-values built on the expected state
    if cfg.acmo_k_mode == "max":
        k = max(n_steps - tau, cfg.n_q)
    else:
        k = min(n_steps - tau, cfg.n_q)
    rewards = myopic_reward_vector(d.alpha_hat, beta, zeta, smart_class)
    q = build_q_table(g, rewards, t_online, cfg, n_sweeps=k,
                      random_sources=random_sources, backend=backend)
    indptr, indices = g.csr()
    smart_rows = d.omega_hat == smart_class
    if random_sources:
        smart_rows = smart_rows.copy()
        smart_rows[list(random_sources)] = False  # no Q rows for random sources
    return _mixed_rows(g, indptr, indices, smart_rows, q.values, cfg.temperature)


def camo_select(
    g: Graph,
    alpha: np.ndarray,
    beta: np.ndarray,
    zeta: np.ndarray,
    v_tilde: list[int],
    omega_0: np.ndarray,
    cfg: StrategyConfig,
    p_sp: float,
    rng: np.random.Generator,
    smart_class: int = DEFAULT_SMART_CLASS,
    mode: str = "camo",
    t_online: int = 0,
    random_sources: frozenset[int] | set[int] = frozenset(),
    backend: str | None = None,
) -> dict[int, int]:
    """Sample n_samples joint actions for the smart-choosing nodes, score each
    by diffusion, return the best. Deterministic given the rng state."""
    if not v_tilde:
        return {}
    rewards = myopic_reward_vector(alpha, beta, zeta, smart_class)
    rows = {
        v: (g.neighbors(v), np.cumsum(boltzmann(rewards[g.neighbors(v)], cfg.temperature)))
        for v in v_tilde
    }
    best_action: dict[int, int] = {}
    best_score = -np.inf
    for _ in range(cfg.n_samples):
        a0 = {}
        for v in v_tilde:
            nbrs, cum = rows[v]
            idx = int(np.searchsorted(cum, rng.random(), side="right").clip(0, len(nbrs) - 1))
            a0[v] = int(nbrs[idx])
        alpha_hat = diffuse(
            g, alpha, a0, omega_0, cfg.window, beta, zeta, cfg, p_sp,
            smart_class=smart_class, mode=mode, t_online=t_online,
            random_sources=random_sources, backend=backend,
        )
        score = float(np.sum(alpha_hat[:, smart_class] / alpha_hat.sum(axis=1)))
        if score > best_score:
            best_score = score
            best_action = a0
    return best_action


def acmo_select(
    g: Graph,
    alpha: np.ndarray,
    beta: np.ndarray,
    zeta: np.ndarray,
    v_tilde: list[int],
    omega_0: np.ndarray,
    cfg: StrategyConfig,
    p_sp: float,
    rng: np.random.Generator,
    smart_class: int = DEFAULT_SMART_CLASS,
    t_online: int = 0,
    random_sources: frozenset[int] | set[int] = frozenset(),
    backend: str | None = None,
) -> dict[int, int]:
    """CAMO with Q-derived Boltzmann rows inside the diffusion."""
    return camo_select(
        g, alpha, beta, zeta, v_tilde, omega_0, cfg, p_sp, rng,
        smart_class=smart_class, mode="acmo", t_online=t_online,
        random_sources=random_sources, backend=backend,
    )
