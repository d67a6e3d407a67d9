"""Online simulation loop, replication management and aggregation.

One replication is a pure function of (config, master seed, replication
index): the RNG stream is spawned from SeedSequence(master_seed, (rep,)),
and every stochastic event inside a step happens in a fixed order — sources
inject (ascending id), regular nodes select (ascending id), targets are
drawn (sources then regulars, ascending), deliveries are applied in the
order generated, then one vectorized belief update closes the step.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    DEFAULT_SMART_CLASS,
    PERSONAL_CLASS,
    Feed,
    Message,
    NodeState,
    deliver,
    myopic_reward_vector,
    select_message,
)
from .graph import (
    DisconnectedGraphError,
    Graph,
    RoleAssignment,
    classic_centrality,
    current_flow_closeness,
    generate_pa,
    load_edge_list,
    pearson,
)
from .strategies import (
    QTable,
    StrategyConfig,
    acmo_select,
    boltzmann_sample,
    build_q_table,
    camo_select,
)

ALGORITHMS = ("random", "damo", "admo", "camo", "acmo")


class EngineError(Exception):
    """Runtime failure inside the simulation engine."""


class ConfigError(EngineError):
    """Invalid simulation configuration, raised before step 0."""


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class GraphSpec:
    """Either a preferential-attachment recipe or a path to an edge list."""

    kind: str  # "pa" | "file"
    n: int = 0
    m: int = 0
    path: str = ""
    seed: int | None = None

    def __post_init__(self):
        if self.kind == "pa":
            if self.n < 2 or self.m < 1 or self.m >= self.n:
                raise ConfigError("pa graph needs n >= 2 and 1 <= m < n")
        elif self.kind == "file":
            if not self.path:
                raise ConfigError("file graph needs a path")
        else:
            raise ConfigError(f"unknown graph kind {self.kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "pa":
            return {"kind": "pa", "n": self.n, "m": self.m, "seed": self.seed}
        return {"kind": "file", "path": self.path}

    @staticmethod
    def from_dict(d: dict) -> "GraphSpec":
        kind = d.get("kind")
        if kind == "pa":
            return GraphSpec("pa", n=int(d["n"]), m=int(d["m"]),
                             seed=None if d.get("seed") is None else int(d["seed"]))
        if kind == "file":
            return GraphSpec("file", path=str(d["path"]))
        raise ConfigError(f"unknown graph kind {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    """Full description of a simulation experiment."""

    graph: GraphSpec
    roles: RoleAssignment | None = None  # None => auto placement by degree
    horizon: int = 100
    p_sp: float = 0.1
    feed_capacity: int = 20
    source_rate: int = 2
    n_classes: int = 3
    alpha_prior: float = 1.0
    beta_range: tuple[float, float] = (0.9, 1.0)
    zeta_range: tuple[float, float] = (0.0, 2.0)
    algorithm: str = "random"
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    master_seed: int = 0
    replications: int = 1
    smart_class: int = DEFAULT_SMART_CLASS
    snapshot_at: tuple[int, ...] = ()

    def __post_init__(self):
        if self.horizon < 0:
            raise ConfigError("horizon must be >= 0")
        if not 0.0 <= self.p_sp <= 1.0:
            raise ConfigError("p_sp must lie in [0, 1]")
        if self.feed_capacity < 1:
            raise ConfigError("feed capacity must be >= 1")
        if self.source_rate < 1:
            raise ConfigError("source rate must be >= 1")
        if self.n_classes < 2:
            raise ConfigError("need at least 2 classes")
        if self.alpha_prior <= 0.0:
            raise ConfigError("alpha prior must be > 0")
        lo, hi = self.beta_range
        if not (0.0 < lo <= hi <= 1.0):
            raise ConfigError("beta range must lie in (0, 1]")
        lo, hi = self.zeta_range
        if not (0.0 <= lo <= hi):
            raise ConfigError("zeta range must lie in [0, inf)")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if not 0 <= self.smart_class < self.n_classes:
            raise ConfigError("smart class out of range")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if any(t < 0 for t in self.snapshot_at):
            raise ConfigError("snapshot times must be >= 0")

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "roles": None if self.roles is None else {
                "smart_source": self.roles.smart_source,
                "random_sources": list(self.roles.random_sources),
            },
            "horizon": self.horizon,
            "p_sp": self.p_sp,
            "feed_capacity": self.feed_capacity,
            "source_rate": self.source_rate,
            "n_classes": self.n_classes,
            "alpha_prior": self.alpha_prior,
            "beta_range": list(self.beta_range),
            "zeta_range": list(self.zeta_range),
            "algorithm": self.algorithm,
            "strategy": {
                "temperature": self.strategy.temperature,
                "gamma_prime": self.strategy.gamma_prime,
                "gamma_double_prime": self.strategy.gamma_double_prime,
                "n_q": self.strategy.n_q,
                "window": self.strategy.window,
                "n_samples": self.strategy.n_samples,
                "acmo_k_mode": self.strategy.acmo_k_mode,
            },
            "master_seed": self.master_seed,
            "replications": self.replications,
            "smart_class": self.smart_class,
            "snapshot_at": list(self.snapshot_at),
        }

    @staticmethod
    def from_dict(d: dict) -> "SimConfig":
        try:
            graph = GraphSpec.from_dict(d["graph"])
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc
        roles = None
        if d.get("roles") is not None:
            r = d["roles"]
            roles = RoleAssignment(int(r["smart_source"]),
                                   tuple(int(v) for v in r["random_sources"]))
        strat = d.get("strategy", {})
        defaults = StrategyConfig()
        strategy = StrategyConfig(
            temperature=float(strat.get("temperature", defaults.temperature)),
            gamma_prime=float(strat.get("gamma_prime", defaults.gamma_prime)),
            gamma_double_prime=float(
                strat.get("gamma_double_prime", defaults.gamma_double_prime)),
            n_q=int(strat.get("n_q", defaults.n_q)),
            window=int(strat.get("window", defaults.window)),
            n_samples=int(strat.get("n_samples", defaults.n_samples)),
            acmo_k_mode=str(strat.get("acmo_k_mode", defaults.acmo_k_mode)),
        )
        kwargs = {}
        for name, caster in (
            ("horizon", int), ("p_sp", float), ("feed_capacity", int),
            ("source_rate", int), ("n_classes", int), ("alpha_prior", float),
            ("algorithm", str), ("master_seed", int), ("replications", int),
            ("smart_class", int),
        ):
            if name in d:
                kwargs[name] = caster(d[name])
        for name in ("beta_range", "zeta_range"):
            if name in d:
                kwargs[name] = tuple(float(x) for x in d[name])
        if "snapshot_at" in d:
            kwargs["snapshot_at"] = tuple(int(t) for t in d["snapshot_at"])
        return SimConfig(graph=graph, roles=roles, strategy=strategy, **kwargs)

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


# -- traces -------------------------------------------------------------------


@dataclass
class Trace:
    """Per-step per-class total opinion plus final state for one replication."""

    totals: np.ndarray  # (horizon + 1, n_classes)
    final_alpha: np.ndarray  # (n, n_classes)
    replication: int
    config_hash: str
    master_seed: int
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def mean_final_alpha(self) -> np.ndarray:
        """Per-class mean of the final belief parameters over nodes."""
        return self.final_alpha.mean(axis=0)


# -- graph / role resolution --------------------------------------------------


def build_graph(cfg: SimConfig) -> Graph:
    if cfg.graph.kind == "pa":
        seed = cfg.graph.seed
        if seed is None:
            # stable namespace distinct from every per-replication (rep,) key
            seed = np.random.SeedSequence(cfg.master_seed, spawn_key=(0, 0))
        g = generate_pa(cfg.graph.n, cfg.graph.m, seed)
    else:
        try:
            with open(cfg.graph.path) as f:
                g = load_edge_list(f).graph
        except OSError as exc:
            raise ConfigError(f"cannot read graph file: {exc}") from exc
    if not g.is_connected():
        raise DisconnectedGraphError("simulation requires a connected graph")
    return g


def resolve_roles(cfg: SimConfig, g: Graph) -> RoleAssignment:
    """Explicit roles pass through; otherwise the two highest-degree nodes
    become random sources and a median-degree node becomes the smart source."""
    if cfg.roles is not None:
        cfg.roles.validate(g.n)
        return cfg.roles
    n_random = min(cfg.n_classes - 1, 2)
    if g.n < n_random + 1:
        raise ConfigError("graph too small for automatic role placement")
    degs = g.degrees
    by_degree_desc = sorted(range(g.n), key=lambda v: (-degs[v], v))
    random_sources = tuple(by_degree_desc[:n_random])
    by_degree_asc = sorted(range(g.n), key=lambda v: (degs[v], v))
    mid = g.n // 2
    for offset in range(g.n):
        for idx in (mid - offset, mid + offset):
            if 0 <= idx < g.n and by_degree_asc[idx] not in random_sources:
                return RoleAssignment(by_degree_asc[idx], random_sources)
    raise ConfigError("graph too small for automatic role placement")


def _source_classes(cfg: SimConfig, roles: RoleAssignment) -> dict[int, int]:
    """Smart source owns the smart class; random sources cycle the others."""
    classes = {roles.smart_source: cfg.smart_class}
    others = [c for c in range(cfg.n_classes) if c != cfg.smart_class]
    for i, v in enumerate(roles.random_sources):
        classes[v] = others[i % len(others)]
    return classes


# -- the online loop ----------------------------------------------------------


def _class_totals(alpha: np.ndarray) -> np.ndarray:
    return (alpha / alpha.sum(axis=1, keepdims=True)).sum(axis=0)


def run(cfg: SimConfig, replication: int, graph: Graph | None = None,
        backend: str | None = None) -> Trace:
    """Execute one replication and return its trace."""
    if replication < 0:
        raise ConfigError("replication index must be >= 0")
    g = graph if graph is not None else build_graph(cfg)
    roles = resolve_roles(cfg, g)
    src_class = _source_classes(cfg, roles)
    sources_sorted = sorted(src_class)
    regular = [v for v in range(g.n) if v not in src_class]
    K = cfg.n_classes

    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(replication,)))
    beta = rng.uniform(cfg.beta_range[0], cfg.beta_range[1], g.n)
    zeta = rng.uniform(cfg.zeta_range[0], cfg.zeta_range[1], g.n)
    alpha = np.full((g.n, K), cfg.alpha_prior, dtype=float)
    states = [
        NodeState(alpha[v], float(beta[v]), float(zeta[v]), Feed(cfg.feed_capacity))
        for v in range(g.n)
    ]

    totals = np.empty((cfg.horizon + 1, K))
    totals[0] = _class_totals(alpha)
    snapshots: dict[int, np.ndarray] = {}
    if 0 in cfg.snapshot_at:
        snapshots[0] = alpha.copy()
    next_id = 0

    for t in range(cfg.horizon):
        # (1) source injection, ascending node id
        pushes: list[tuple[int, Message]] = []  # (pusher, message), target later
        for v in sources_sorted:
            for _ in range(cfg.source_rate):
                pushes.append((v, Message(next_id, src_class[v], v)))
                next_id += 1
        # (2) regular-node selections, ascending node id
        for v in regular:
            sel = select_message(states[v], rng, cfg.p_sp)
            if sel.kind == "personal":
                pushes.append((v, Message(next_id, PERSONAL_CLASS, v)))
                next_id += 1
            elif sel.kind == "forward" and sel.forward:
                pushes.append((v, sel.message))
        # (3) targeting
        targets = _assign_targets(cfg, g, roles, src_class, states, alpha, beta,
                                  zeta, pushes, t, rng, backend)
        # (4) batched deliveries
        counts = np.zeros((g.n, K))
        for (v, msg), w in zip(pushes, targets):
            if deliver(states[w], msg):
                counts[w, msg.cls] += 1.0
        # (5) one belief update per node (decay applies to everyone)
        alpha *= beta[:, None]
        alpha += zeta[:, None] * counts
        totals[t + 1] = _class_totals(alpha)
        if (t + 1) in cfg.snapshot_at:
            snapshots[t + 1] = alpha.copy()

    return Trace(totals, alpha.copy(), replication, cfg.config_hash(),
                 cfg.master_seed, snapshots)


def _assign_targets(cfg, g, roles, src_class, states, alpha, beta, zeta,
                    pushes, t, rng, backend):
    """Draw a destination for every pending push, in push order.

    Smart-class pushes route through the configured strategy; every other
    push (personal, non-smart content, random baseline) goes to a uniformly
    random neighbor.
    """
    random_sources = frozenset(roles.random_sources)
    algo = cfg.algorithm
    scfg = cfg.strategy

    def is_smart_push(v: int, msg: Message) -> bool:
        return algo != "random" and msg.cls == cfg.smart_class

    q: QTable | None = None
    joint: dict[int, int] = {}

    if algo == "admo" and any(is_smart_push(v, m) for v, m in pushes):
        rewards = myopic_reward_vector(alpha, beta, zeta, cfg.smart_class)
        q = build_q_table(g, rewards, t, scfg, random_sources=random_sources,
                          backend=backend)
    elif algo in ("camo", "acmo"):
        # observed pushed class per node this step (-1: silent or personal)
        omega = np.full(g.n, -1, dtype=np.int64)
        for v, msg in pushes:
            if msg.cls != PERSONAL_CLASS:
                omega[v] = msg.cls
        v_tilde = sorted({v for v, m in pushes if is_smart_push(v, m)})
        if v_tilde:
            select = camo_select if algo == "camo" else acmo_select
            joint = select(
                g, alpha, beta, zeta, v_tilde, omega, scfg, cfg.p_sp, rng,
                smart_class=cfg.smart_class, t_online=t,
                random_sources=random_sources, backend=backend,
            )

    targets = []
    for v, msg in pushes:
        nbrs = g.neighbors(v)
        if is_smart_push(v, msg):
            if algo == "damo":
                rewards = myopic_reward_vector(
                    alpha[nbrs], beta[nbrs], zeta[nbrs], cfg.smart_class)
                w = int(nbrs[boltzmann_sample(rewards, scfg.temperature, rng)])
            elif algo == "admo":
                w = int(nbrs[boltzmann_sample(q.row(v), scfg.temperature, rng)])
            else:  # camo / acmo: all of a node's pushes follow the joint action
                w = joint[v]
        else:
            w = int(nbrs[rng.integers(len(nbrs))])
        targets.append(w)
    return targets


# -- simplified single-message model -------------------------------------------


@dataclass
class SimplifiedResult:
    """Trajectory of one message walking a path: tracked-class totals and the
    per-step one-step rewards of the visited nodes."""

    totals: np.ndarray  # (len(path),)
    rewards: np.ndarray  # (len(path) - 1,)


def run_simplified(
    g: Graph,
    path: list[int],
    alpha: np.ndarray,
    beta: np.ndarray,
    zeta: np.ndarray,
    smart_class: int = DEFAULT_SMART_CLASS,
) -> SimplifiedResult:
    """Single message, single source, forced forwarding along `path`.

    At step t the message moves from path[t] to path[t+1]; only the receiving
    node gains belief mass (everyone decays, which leaves opinions unchanged),
    so the total tracked-class opinion gain telescopes into the sum of the
    visited nodes' one-step rewards.
    """
    if len(path) < 1:
        raise EngineError("path must contain the source")
    for u, v in zip(path, path[1:]):
        if u == v:
            raise EngineError("path must not stall (v_t != v_{t+1})")
        nbrs = g.neighbors(u)
        pos = int(np.searchsorted(nbrs, v))
        if pos >= len(nbrs) or nbrs[pos] != v:
            raise EngineError(f"step {u}->{v} is not an edge")
    alpha = np.array(alpha, dtype=float)
    steps = len(path) - 1
    totals = np.empty(steps + 1)
    rewards = np.empty(steps)
    totals[0] = (alpha[:, smart_class] / alpha.sum(axis=1)).sum()
    for t in range(steps):
        w = path[t + 1]
        rewards[t] = float(
            myopic_reward_vector(alpha[[w]], beta[[w]], zeta[[w]], smart_class)[0])
        alpha *= beta[:, None]
        alpha[w, smart_class] += zeta[w]
        totals[t + 1] = (alpha[:, smart_class] / alpha.sum(axis=1)).sum()
    return SimplifiedResult(totals, rewards)


def random_walk(g: Graph, source: int, steps: int, rng: np.random.Generator) -> list[int]:
    """Uniform neighbor walk of the given length starting at `source`."""
    path = [int(source)]
    for _ in range(steps):
        nbrs = g.neighbors(path[-1])
        path.append(int(nbrs[rng.integers(len(nbrs))]))
    return path


# -- aggregation ---------------------------------------------------------------


@dataclass
class Summary:
    """Replication-averaged view of a homogeneous trace set."""

    config_hash: str
    n_replications: int
    mean_totals: np.ndarray  # (horizon + 1, n_classes)
    std_totals: np.ndarray
    final_mean: np.ndarray  # (n_classes,)
    final_std: np.ndarray


def aggregate(traces: list[Trace]) -> Summary:
    if not traces:
        raise EngineError("no traces to aggregate")
    h = traces[0].config_hash
    if any(tr.config_hash != h for tr in traces):
        raise EngineError("traces come from different configs")
    ordered = sorted(traces, key=lambda tr: tr.replication)
    stack = np.stack([tr.totals for tr in ordered])
    return Summary(
        config_hash=h,
        n_replications=len(ordered),
        mean_totals=stack.mean(axis=0),
        std_totals=stack.std(axis=0),
        final_mean=stack[:, -1, :].mean(axis=0),
        final_std=stack[:, -1, :].std(axis=0),
    )


def run_replications(cfg: SimConfig, graph: Graph | None = None,
                     backend: str | None = None) -> list[Trace]:
    g = graph if graph is not None else build_graph(cfg)
    return [run(cfg, r, graph=g, backend=backend) for r in range(cfg.replications)]


# -- centrality sweep -----------------------------------------------------------


@dataclass
class SweepResult:
    """Smart-source placements paired with outcome and centrality scores."""

    placements: list[int]
    mean_final_total: np.ndarray  # mean smart-class final total per placement
    centralities: dict[str, np.ndarray]  # kind -> score at each placement
    pcc: dict[str, float]


SWEEP_CENTRALITIES = ("current_flow_closeness", "degree", "closeness", "betweenness")


def centrality_sweep(cfg: SimConfig, placements: list[int],
                     graph: Graph | None = None,
                     backend: str | None = None) -> SweepResult:
    """Re-run the experiment with the smart source moved to each placement and
    correlate the mean final smart-class total with centrality scores."""
    g = graph if graph is not None else build_graph(cfg)
    roles = resolve_roles(cfg, g)
    if len(placements) < 2 or len(set(placements)) != len(placements):
        raise ConfigError("need at least two distinct placements")
    for v in placements:
        if not 0 <= v < g.n:
            raise ConfigError(f"placement {v} out of range")
        if v in roles.random_sources:
            raise ConfigError(f"placement {v} collides with a random source")
    scores = {
        "current_flow_closeness": current_flow_closeness(g),
        "degree": classic_centrality(g, "degree"),
        "closeness": classic_centrality(g, "closeness"),
        "betweenness": classic_centrality(g, "betweenness"),
    }
    outcomes = np.empty(len(placements))
    for i, v in enumerate(placements):
        cfg_v = replace(cfg, roles=RoleAssignment(v, roles.random_sources))
        traces = run_replications(cfg_v, graph=g, backend=backend)
        outcomes[i] = aggregate(traces).final_mean[cfg.smart_class]
    sel = np.asarray(placements)
    cents = {k: s[sel] for k, s in scores.items()}
    pcc = {k: pearson(c, outcomes) for k, c in cents.items()}
    return SweepResult(list(placements), outcomes, cents, pcc)


# -- persistence -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the destination directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_basename(trace: Trace) -> str:
    return f"trace_{trace.config_hash}_rep{trace.replication:04d}"


def write_trace(trace: Trace, out_dir: str) -> tuple[str, str]:
    """Persist one trace as CSV (t,class,total_opinion) + JSON sidecar."""
    base = os.path.join(out_dir, trace_basename(trace))
    lines = ["t,class,total_opinion"]
    for t in range(trace.totals.shape[0]):
        for k in range(trace.totals.shape[1]):
            lines.append(f"{t},{k},{_fmt(trace.totals[t, k])}")
    csv_path = base + ".csv"
    atomic_write(csv_path, "\n".join(lines) + "\n")
    sidecar = {
        "config_hash": trace.config_hash,
        "replication": trace.replication,
        "master_seed": trace.master_seed,
        "final_alpha": trace.final_alpha.tolist(),
        "mean_final_alpha": trace.mean_final_alpha.tolist(),
        "snapshots": {str(t): a.tolist() for t, a in sorted(trace.snapshots.items())},
    }
    json_path = base + ".json"
    atomic_write(json_path, json.dumps(sidecar, sort_keys=True))
    return csv_path, json_path


def write_summary(cfg: SimConfig, summary: Summary, runtime_seconds: float,
                  out_dir: str) -> str:
    payload = {
        "config": cfg.to_dict(),
        "per_class_final_mean": summary.final_mean.tolist(),
        "per_class_final_std": summary.final_std.tolist(),
        "runtime_seconds": runtime_seconds,
    }
    path = os.path.join(out_dir, "summary.json")
    atomic_write(path, json.dumps(payload, sort_keys=True, indent=2))
    return path
