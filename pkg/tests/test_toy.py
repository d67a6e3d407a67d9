import numpy as np
import pytest

from opmax.toy import (
    ReceiverParams,
    ToyError,
    ToyInstance,
    brute_force_expected_reward,
    expected_reward,
    expected_sampled_reward,
    individual_rewards,
    joint_rewards,
    max_expected_reward,
    mc_sampled_reward,
    optimal_p,
    proposition1_condition,
    random_instance,
    toy_table,
)


def test_receiver_params_validation():
    with pytest.raises(ToyError):
        ReceiverParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ToyError):
        ReceiverParams(1.0, 1.0, 1.2, 1.0)
    with pytest.raises(ToyError):
        ReceiverParams(1.0, 1.0, 1.0, 0.0)
    r = ReceiverParams(1.0, 2.0, 0.5, 1.0)
    assert r.rho == 3.0
    assert r.eta == pytest.approx(1.0 / 1.5)


# -- rewards -------------------------------------------------------------------


def test_individual_reward_unit_instance():
    # alpha=(1,1), beta=zeta=1: gain = 1/((2+1)*2) = 1/6
    inst = ToyInstance.symmetric_unit()
    r_c, r_d = individual_rewards(inst)
    assert r_c == pytest.approx(1.0 / 6.0)
    assert r_d == r_c


def test_individual_reward_vanishes_with_tracked_mass():
    tiny = ReceiverParams(1.0, 1e-12, 1.0, 1.0)
    inst = ToyInstance(tiny, tiny)
    r_c, _ = individual_rewards(inst)
    assert r_c == pytest.approx(0.0, abs=1e-9)


def test_joint_rewards_unit_instance():
    r_cc, r_cd, r_dd = joint_rewards(ToyInstance.symmetric_unit())
    assert r_cd == pytest.approx(1.0 / 3.0)
    assert r_cc == pytest.approx(1.0 / 4.0)  # 2/((2+2)*2)
    assert r_dd == pytest.approx(1.0 / 4.0)


def test_joint_reward_split_identity_and_diminishing_returns():
    rng = np.random.default_rng(0)
    for _ in range(300):
        inst = random_instance(rng)
        r_c, r_d = individual_rewards(inst)
        r_cc, r_cd, r_dd = joint_rewards(inst)
        assert r_cd == r_c + r_d
        assert r_cc < 2 * r_c
        assert r_dd < 2 * r_d


def test_diminishing_returns_via_successive_updates():
    # the second same-target message gains strictly less than the first
    rng = np.random.default_rng(1)
    for _ in range(200):
        a1, a2 = rng.uniform(0.1, 5.0, 2)
        beta, zeta = rng.uniform(0.5, 1.0), rng.uniform(0.1, 3.0)
        rho = a1 + a2
        mu0 = a2 / rho
        mu1 = (beta * a2 + zeta) / (beta * rho + zeta)
        mu2 = (beta * a2 + 2 * zeta) / (beta * rho + 2 * zeta)
        assert mu2 - mu1 < mu1 - mu0


# -- mixed-strategy condition -------------------------------------------------------


def test_condition_false_for_symmetric_instance():
    assert not proposition1_condition(ToyInstance.symmetric_unit())


def test_condition_false_below_lower_bound():
    # receiver d has a vanishing reward relative to c
    c = ReceiverParams(1.0, 1.0, 1.0, 1.0)
    d = ReceiverParams(1.0, 1e-6, 1.0, 1e-6)
    assert not proposition1_condition(ToyInstance(c, d))


def test_condition_implies_reward_ordering_and_mixing_gain():
    rng = np.random.default_rng(2)
    hits = 0
    for _ in range(1000):
        inst = random_instance(rng)
        if not proposition1_condition(inst):
            continue
        hits += 1
        r_cc, r_cd, r_dd = joint_rewards(inst)
        big, small = max(r_cc, r_dd), min(r_cc, r_dd)
        assert r_cd > big > small
        assert max_expected_reward(big, r_cd, small) > big
    assert hits > 50  # the condition region is not degenerate


def test_statement_bounds_differ_from_proof_bounds():
    rng = np.random.default_rng(3)
    flips = sum(
        proposition1_condition(inst) != proposition1_condition(inst, use_statement_bounds=True)
        for inst in (random_instance(rng) for _ in range(2000))
    )
    assert flips > 0


# -- optimal mixing ------------------------------------------------------------------


def test_optimal_p_symmetric_is_half():
    assert optimal_p(0.25, 1.0 / 3.0, 0.25) == pytest.approx(0.5)


def test_optimal_p_matches_grid_search():
    rng = np.random.default_rng(4)
    grid = np.linspace(0.0, 1.0, 10**6 + 1)
    for _ in range(50):
        r_dd = rng.uniform(0.0, 0.5)
        r_cc = r_dd + rng.uniform(0.0, 0.3)
        r_cd = r_cc + rng.uniform(1e-3, 0.5)
        p = optimal_p(r_cc, r_cd, r_dd)
        vals = expected_reward(grid, r_cc, r_cd, r_dd)
        assert abs(p - grid[np.argmax(vals)]) < 1e-5


def test_optimal_p_precondition_and_degenerate_denominator():
    with pytest.raises(ToyError):
        optimal_p(0.5, 0.4, 0.3)  # R_cd not largest
    with pytest.raises(ToyError):
        optimal_p(0.2, 0.4, 0.4)  # violates R_cc >= R_dd


def test_expected_reward_between_bounds_under_condition():
    rng = np.random.default_rng(5)
    for _ in range(500):
        inst = random_instance(rng)
        if not proposition1_condition(inst):
            continue
        r_cc, r_cd, r_dd = joint_rewards(inst)
        big, small = max(r_cc, r_dd), min(r_cc, r_dd)
        e = max_expected_reward(big, r_cd, small)
        assert big < e < r_cd


# -- brute force oracle -----------------------------------------------------------------


def test_brute_force_endpoints():
    assert brute_force_expected_reward(0.0, 0.3, 0.5, 0.1) == pytest.approx(0.1)
    assert brute_force_expected_reward(1.0, 0.3, 0.5, 0.1) == pytest.approx(0.3)
    assert brute_force_expected_reward(0.5, 0.3, 0.5, 0.1) == pytest.approx(
        (0.3 + 2 * 0.5 + 0.1) / 4.0)


def test_brute_force_equals_quadratic_identically():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        p = rng.random()
        r = rng.uniform(0.0, 1.0, 3)
        assert abs(brute_force_expected_reward(p, *r) - expected_reward(p, *r)) < 1e-14


# -- sampled best-of reward ---------------------------------------------------------------


def test_sampled_reward_degenerate_p_one():
    for n in (1, 3, 10):
        assert expected_sampled_reward(1.0, 0.25, 1 / 3, 0.2, n) == pytest.approx(0.25)


def test_sampled_reward_limit_is_split_reward():
    val = expected_sampled_reward(0.5, 0.25, 1 / 3, 0.25, 500)
    assert val == pytest.approx(1 / 3, abs=1e-9)


def test_mc_sampled_reward_monotone_in_samples():
    vals = [
        mc_sampled_reward(0.5, 0.25, 1 / 3, 0.25, n, 40000, np.random.default_rng(9))
        for n in (1, 2, 5, 20)
    ]
    assert all(b > a - 5e-4 for a, b in zip(vals, vals[1:]))
    # n=1 is the plain expectation
    assert vals[0] == pytest.approx(expected_reward(0.5, 0.25, 1 / 3, 0.25), abs=5e-3)


def test_closed_form_vs_mc_logged_delta():
    # known open question: the closed form may deviate from the Monte Carlo
    # reference; record the delta without asserting agreement
    closed = expected_sampled_reward(0.5, 0.25, 1 / 3, 0.25, 3)
    mc = mc_sampled_reward(0.5, 0.25, 1 / 3, 0.25, 3, 10**6, np.random.default_rng(10))
    print(f"best-of-3 closed form {closed:.6f} vs Monte Carlo {mc:.6f} "
          f"(delta {closed - mc:+.6f})")
    assert np.isfinite(closed) and 0.2 < mc < 1 / 3 + 1e-3


def test_toy_table_shape():
    rows = toy_table(25, seed=0, mc_trials=200)
    assert len(rows) == 25
    assert {"R_cc", "R_cd", "R_dd", "condition", "p_star", "sampled_delta"} <= rows[0].keys()
