"""Two-sender / two-receiver toy game: closed forms and brute-force checks.

Two senders each push one message of the tracked class to one of two shared
receivers c and d. A receiver absorbing k messages in one step gains opinion
according to the belief update, which exhibits diminishing returns in k, so
splitting the two messages across receivers beats doubling up whenever the
receivers' individual rewards are close enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ToyError(Exception):
    """Invalid toy-game instance or parameter regime."""


@dataclass(frozen=True)
class ReceiverParams:
    """One receiver's belief state over two classes plus update constants."""

    alpha_theta1: float
    alpha_theta2: float
    beta: float
    zeta: float

    def __post_init__(self):
        if self.alpha_theta1 <= 0.0 or self.alpha_theta2 <= 0.0:
            raise ToyError("belief parameters must be > 0")
        if not 0.0 < self.beta <= 1.0:
            raise ToyError("beta must lie in (0, 1]")
        if self.zeta <= 0.0:
            raise ToyError("zeta must be > 0")

    @property
    def rho(self) -> float:
        return self.alpha_theta1 + self.alpha_theta2

    @property
    def eta(self) -> float:
        return self.zeta / (self.beta * self.rho)


@dataclass(frozen=True)
class ToyInstance:
    c: ReceiverParams
    d: ReceiverParams

    @staticmethod
    def symmetric_unit() -> "ToyInstance":
        r = ReceiverParams(1.0, 1.0, 1.0, 1.0)
        return ToyInstance(r, r)


def _individual_reward(r: ReceiverParams) -> float:
    # opinion gain of one tracked-class message: mu' - mu at the receiver
    return r.alpha_theta2 * r.zeta / ((r.beta * r.rho + r.zeta) * r.rho)


def _double_reward(r: ReceiverParams) -> float:
    # opinion gain when both messages land on the same receiver
    return 2.0 * r.alpha_theta2 * r.zeta / ((r.beta * r.rho + 2.0 * r.zeta) * r.rho)


def individual_rewards(inst: ToyInstance) -> tuple[float, float]:
    return _individual_reward(inst.c), _individual_reward(inst.d)


def joint_rewards(inst: ToyInstance) -> tuple[float, float, float]:
    """(R_cc, R_cd, R_dd): joint reward per unordered pair of targets."""
    r_c, r_d = individual_rewards(inst)
    return _double_reward(inst.c), r_c + r_d, _double_reward(inst.d)


def proposition1_condition(inst: ToyInstance, use_statement_bounds: bool = False) -> bool:
    """True when the mixed strategy strictly beats both selfish joint actions.

    Receivers are relabeled so that r_c >= r_d. The default bounds are the
    ones consistent with the quadratic maximization (lower bound
    1/(1+2*eta_c)); `use_statement_bounds` switches the lower bound to
    1/(1+eta_c) for comparison.
    """
    r_c, r_d = individual_rewards(inst)
    c, d = inst.c, inst.d
    if r_c < r_d:
        r_c, r_d = r_d, r_c
        c, d = d, c
    ratio = r_d / r_c
    if use_statement_bounds:
        lower = 1.0 / (1.0 + c.eta)
    else:
        lower = 1.0 / (1.0 + 2.0 * c.eta)
    upper = min(
        1.0,
        ((1.0 + c.eta) / (1.0 + 2.0 * c.eta)) * ((1.0 + 2.0 * d.eta) / (1.0 + d.eta)),
    )
    return lower < ratio < upper


def optimal_p(
    r_cc: float, r_cd: float, r_dd: float, use_statement_denominator: bool = False
) -> float:
    """Maximizer of E[r] = R_cc p^2 + 2 R_cd p (1-p) + R_dd (1-p)^2 over [0,1].

    p* = 1 / (1 + (R_cd - R_cc)/(R_cd - R_dd)); the optional flag swaps the
    denominator for (R_cd + R_dd), the alternative published form.
    """
    if not (r_cd > r_cc >= r_dd):
        raise ToyError("requires R_cd > R_cc >= R_dd")
    denom = (r_cd + r_dd) if use_statement_denominator else (r_cd - r_dd)
    if denom == 0.0:
        raise ToyError("degenerate denominator")
    return 1.0 / (1.0 + (r_cd - r_cc) / denom)


def expected_reward(p: float, r_cc: float, r_cd: float, r_dd: float) -> float:
    """Quadratic expected joint reward under independent mixing with P(c)=p."""
    q = 1.0 - p
    return r_cc * p * p + 2.0 * r_cd * p * q + r_dd * q * q


def max_expected_reward(r_cc: float, r_cd: float, r_dd: float) -> float:
    """Expected reward at the optimal mixing probability."""
    return expected_reward(optimal_p(r_cc, r_cd, r_dd), r_cc, r_cd, r_dd)


def brute_force_expected_reward(p: float, r_cc: float, r_cd: float, r_dd: float) -> float:
    """Exact enumeration over the four joint actions (oracle for the quadratic)."""
    if not 0.0 <= p <= 1.0:
        raise ToyError("p must lie in [0, 1]")
    q = 1.0 - p
    total = 0.0
    for a1, p1 in (("c", p), ("d", q)):
        for a2, p2 in (("c", p), ("d", q)):
            pair = a1 + a2
            reward = {"cc": r_cc, "cd": r_cd, "dc": r_cd, "dd": r_dd}[pair]
            total += p1 * p2 * reward
    return total


def expected_sampled_reward(
    p: float, r_cc: float, r_cd: float, r_dd: float, n_samples: int
) -> float:
    """Closed-form expected best-of-n_samples joint reward.

    With p' = 1 - 2 p (1-p) and p'' = 1 - p^2/(p^2 + (1-p)^2):
        E = (1 - p'^Ns) R_cd + p'^Ns ((1 - p'')^Ns R_cc + p''^Ns R_dd)
    Evaluated as published; the branch weights (1-p'')^Ns + p''^Ns do not sum
    to one in general, so the Monte Carlo companion is the reference.
    """
    if n_samples < 1:
        raise ToyError("n_samples must be >= 1")
    q = 1.0 - p
    p1 = 1.0 - 2.0 * p * q
    denom = p * p + q * q
    p2 = 1.0 - (p * p / denom) if denom > 0.0 else 0.0
    miss = p1**n_samples
    return (1.0 - miss) * r_cd + miss * ((1.0 - p2) ** n_samples * r_cc + p2**n_samples * r_dd)


def mc_sampled_reward(
    p: float,
    r_cc: float,
    r_cd: float,
    r_dd: float,
    n_samples: int,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of E[max over n_samples draws of joint reward]."""
    if n_samples < 1 or trials < 1:
        raise ToyError("n_samples and trials must be >= 1")
    draws = rng.random((trials, n_samples, 2)) < p
    same = draws[..., 0] == draws[..., 1]
    rewards = np.where(
        same, np.where(draws[..., 0], r_cc, r_dd), r_cd
    )
    return float(rewards.max(axis=1).mean())


def random_instance(rng: np.random.Generator) -> ToyInstance:
    """Instance with parameters drawn from broad positive ranges."""

    def receiver():
        return ReceiverParams(
            alpha_theta1=float(rng.uniform(0.1, 5.0)),
            alpha_theta2=float(rng.uniform(0.1, 5.0)),
            beta=float(rng.uniform(0.5, 1.0)),
            zeta=float(rng.uniform(0.1, 3.0)),
        )

    return ToyInstance(receiver(), receiver())


def toy_table(
    n_instances: int, seed: int, n_samples: int = 20, mc_trials: int = 2000
) -> list[dict]:
    """Rows of (instance params, condition, p*, reward values, oracle deltas)."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_instances):
        inst = random_instance(rng)
        r_cc, r_cd, r_dd = joint_rewards(inst)
        cond = proposition1_condition(inst)
        row = {
            "instance": i,
            "alpha1_c": inst.c.alpha_theta1,
            "alpha2_c": inst.c.alpha_theta2,
            "beta_c": inst.c.beta,
            "zeta_c": inst.c.zeta,
            "alpha1_d": inst.d.alpha_theta1,
            "alpha2_d": inst.d.alpha_theta2,
            "beta_d": inst.d.beta,
            "zeta_d": inst.d.zeta,
            "R_cc": r_cc,
            "R_cd": r_cd,
            "R_dd": r_dd,
            "condition": cond,
        }
        big, small = (r_cc, r_dd) if r_cc >= r_dd else (r_dd, r_cc)
        if r_cd > big:
            p_star = optimal_p(big, r_cd, small)
            e_star = expected_reward(p_star, big, r_cd, small)
            closed = expected_sampled_reward(p_star, big, r_cd, small, n_samples)
            mc = mc_sampled_reward(p_star, big, r_cd, small, n_samples, mc_trials, rng)
            row.update(
                p_star=p_star,
                expected_reward=e_star,
                quad_delta=abs(
                    brute_force_expected_reward(p_star, big, r_cd, small) - e_star
                ),
                sampled_closed_form=closed,
                sampled_mc=mc,
                sampled_delta=closed - mc,
            )
        else:
            row.update(
                p_star=float("nan"),
                expected_reward=float("nan"),
                quad_delta=float("nan"),
                sampled_closed_form=float("nan"),
                sampled_mc=float("nan"),
                sampled_delta=float("nan"),
            )
        rows.append(row)
    return rows
