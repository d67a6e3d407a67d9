"""Communication and opinion-evolution primitives.

Message classes are integers 0..n_classes-1 for content classes;
PERSONAL_CLASS marks spontaneously generated personal messages, which fill
feeds but never alter beliefs and are never forwarded. The smart class is a
designated content class (default 0).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PERSONAL_CLASS = -1
DEFAULT_SMART_CLASS = 0


@dataclass(frozen=True)
class Message:
    """A content unit with a globally unique id.

    `recommendation` is the forwarding target attached when a strategy acts;
    personal messages never carry one.
    """

    id: int
    cls: int
    origin: int
    recommendation: Optional[int] = None

    def __post_init__(self):
        if self.cls == PERSONAL_CLASS and self.recommendation is not None:
            raise ValueError("personal messages never carry recommendations")


class Feed:
    """Bounded FIFO buffer of recently received messages, newest first."""

    __slots__ = ("capacity", "_slots")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"feed capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._slots: deque[Message] = deque(maxlen=capacity)

    def push(self, msg: Message) -> None:
        self._slots.appendleft(msg)

    @property
    def slots(self) -> list[Message]:
        return list(self._slots)

    def content_messages(self) -> list[Message]:
        """Messages of content classes (personal messages excluded)."""
        return [m for m in self._slots if m.cls != PERSONAL_CLASS]

    def __len__(self) -> int:
        return len(self._slots)

    def __iter__(self):
        return iter(self._slots)


@dataclass
class NodeState:
    """Per-node belief parameters, learning parameters, feed and duplicate set.

    `alpha` may be a row view into a shared matrix; updates are in place.
    """

    alpha: np.ndarray
    beta: float
    zeta: float
    feed: Feed
    seen: set[int] = field(default_factory=set)


def opinion(state: NodeState) -> np.ndarray:
    """Normalized belief parameters; a point on the class simplex."""
    a = state.alpha
    return a / a.sum()


def belief_update(state: NodeState, counts: np.ndarray) -> np.ndarray:
    """One Bayesian step: alpha <- beta * alpha + zeta * counts, in place."""
    state.alpha *= state.beta
    state.alpha += state.zeta * counts
    return state.alpha


def dirichlet_posterior_params(
    alpha: np.ndarray, beta: float, zeta: float, counts: np.ndarray
) -> np.ndarray:
    """Posterior Dirichlet concentration after a multinomial observation.

    Independent of belief_update; kept as the conjugate-pair oracle.
    """
    return beta * np.asarray(alpha, dtype=float) + zeta * np.asarray(counts, dtype=float)


def myopic_reward(state: NodeState, smart_class: int = DEFAULT_SMART_CLASS) -> float:
    """One-step opinion gain at this node from a single smart-class delivery.

    Peaks at weakly held, near-neutral opinions; zero when the opinion is
    saturated at 0 or 1, or when the node ignores incoming messages (zeta=0).
    """
    if state.zeta == 0.0:
        return 0.0
    a = state.alpha
    a_s = a[smart_class]
    mu = a_s / a.sum()
    return float(mu * (1.0 - mu) / (mu + a_s * state.beta / state.zeta))


def myopic_reward_vector(
    alpha: np.ndarray,
    beta: np.ndarray,
    zeta: np.ndarray,
    smart_class: int = DEFAULT_SMART_CLASS,
) -> np.ndarray:
    """Vectorized myopic_reward over an (n, classes) belief matrix."""
    a_s = alpha[:, smart_class]
    mu = a_s / alpha.sum(axis=1)
    out = np.zeros(len(alpha))
    live = zeta > 0.0
    denom = mu[live] + a_s[live] * beta[live] / zeta[live]
    out[live] = mu[live] * (1.0 - mu[live]) / denom
    return out


@dataclass(frozen=True)
class Selection:
    """Outcome of one per-step choice from a node's feed."""

    kind: str  # "personal" | "forward" | "noop"
    message: Optional[Message] = None
    forward: bool = False  # forward-gate outcome, relevant for kind="forward"


def select_message(state: NodeState, rng: np.random.Generator, p_sp: float) -> Selection:
    """Per-step node behavior: spontaneous personal message with probability
    p_sp, otherwise a uniform pick among content messages in the feed gated
    by the node's opinion of the picked class. Empty-of-content feeds no-op.
    """
    if rng.random() < p_sp:
        return Selection("personal")
    content = state.feed.content_messages()
    if not content:
        return Selection("noop")
    msg = content[rng.integers(len(content))]
    mu = state.alpha[msg.cls] / state.alpha.sum()
    return Selection("forward", msg, bool(rng.random() < mu))


def deliver(state: NodeState, msg: Message) -> int:
    """Push a message into the feed and return its count contribution.

    Duplicates re-enter the feed (and so may be re-forwarded) but never
    re-count toward beliefs; personal messages never count.
    """
    state.feed.push(msg)
    if msg.cls == PERSONAL_CLASS or msg.id in state.seen:
        return 0
    state.seen.add(msg.id)
    return 1
