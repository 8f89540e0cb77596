import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asrnlab.agent import AgentConfig, init_agent, td_error
from asrnlab.bandit import broken_armed_bandit, fig3_bandit, make_env
from asrnlab.metrics import (StepRecord, TrapEvent, detect_trap_events, mean_loss_by_choice,
                             preference_scores, right_fraction, smooth, standard_error, trap_duration_stats,
                             trap_events_from_q, var_delta_oracle, var_delta_samples)
from asrnlab.rng import make_rng


def test_right_fraction_examples():
    assert right_fraction([[0, 20]] * 5) == 1.0
    assert right_fraction([[0, -0.3]] * 5) == 0.0
    assert right_fraction([[0, 20], [0, -1]]) == 0.5
    assert right_fraction([[1, 1], [0, 2]]) == 0.75


def test_right_fraction_empty():
    with pytest.raises(ValueError):
        right_fraction(np.empty((0, 2)))


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=30))
def test_right_fraction_bounds(rows):
    f = right_fraction(rows)
    assert 0.0 <= f <= 1.0
    assert (f == 1.0) == all(r > l for l, r in rows)


def test_loss_by_action():
    res = mean_loss_by_choice([1.0, 3.0, 2.0], actions=[1, 1, 0])
    assert res.mean_loss_right == 5.0 and res.mean_loss_left == 4.0
    assert (res.n_right, res.n_left) == (2, 1)


def test_loss_by_preference_drops_ties():
    q = [[0, 1], [1, 0], [2, 2]]
    res = mean_loss_by_choice([1.0, 2.0, 9.0], q_snapshots=q, by="preference")
    assert (res.mean_loss_right, res.mean_loss_left) == (1.0, 4.0)
    assert res.n_right + res.n_left == 2


def test_loss_empty_group_is_absent():
    res = mean_loss_by_choice([1.0], actions=[1])
    assert res.mean_loss_left is None and res.n_left == 0


def test_converged_group_losses():
    # right-arm pullers at the optimal table: delta^2 -> Var(r) = 6.25; left: exactly 0
    env = broken_armed_bandit()
    agent = init_agent(AgentConfig(), env, make_rng(0))
    rng = np.random.default_rng(3)
    right = [td_error(agent, 1, 1 + 2.5 * z) for z in rng.standard_normal(20_000)]
    left = [td_error(agent, 0, 0.0)] * 100
    # left pulls at [0, 20] bootstrap on Q_r: delta = -gamma * 20, not 0
    no_boot = init_agent(AgentConfig(bootstrap=False), env, make_rng(0))
    left_nb = [td_error(no_boot, 0, 0.0)] * 100
    res = mean_loss_by_choice(right + left_nb, actions=[1] * len(right) + [0] * 100)
    assert abs(res.mean_loss_right / 6.25 - 1) < 0.03
    assert res.mean_loss_left == 0.0
    assert left[0] == pytest.approx(-19.0)


def test_asrn_left_loss_is_noise_variance():
    m = 1.7
    z = np.random.default_rng(4).standard_normal(100_000)
    agent = init_agent(AgentConfig(bootstrap=False), broken_armed_bandit(), make_rng(0))
    d = [td_error(agent, 0, m * x) for x in z]
    res = mean_loss_by_choice(d, actions=[0] * len(d))
    # sd of a chi-square(1) mean is sqrt(2 / n)
    assert abs(res.mean_loss_left / m**2 - 1) <= 4 * math.sqrt(2 / len(d))


def records(signs):
    return [StepRecord(step=i, agent_id=3, action=0, raw_reward=0.0, emitted_reward=0.0, delta=0.0,
                       q_snapshot=(s, 0.0), epsilon=0.0) for i, s in enumerate(signs)]


def test_no_trap_events():
    assert detect_trap_events(records([-1, -2, -0.5])) == []


def test_synthetic_trap_event():
    events = detect_trap_events(records([-1, -1, 1, 1, -1]))
    assert events == [TrapEvent(3, 2, 4)]


def test_equality_keeps_regime():
    events = detect_trap_events(records([-1, 0, 1, 0, 1, 0, -1]))
    assert events == [TrapEvent(3, 2, 6)]


def test_unexited_trap():
    assert detect_trap_events(records([1, 1])) == [TrapEvent(3, 0, None)]


def test_trap_event_ordering():
    with pytest.raises(ValueError):
        TrapEvent(0, 5, 5)


def brute_force_events(diff):
    # independent scan over the sign sequence of Q_l - Q_r
    out, state, start = [], 0, None
    for i, d in enumerate(diff):
        s = (d > 0) - (d < 0)
        if s == 1 and state == 0:
            state, start = 1, i
        elif s == -1 and state == 1:
            out.append((start, i))
            state = 0
    if state:
        out.append((start, None))
    return out


@settings(max_examples=100)
@given(st.lists(st.sampled_from([-1.0, 0.0, 1.0, -2.5, 0.5]), max_size=60))
def test_trap_scan_matches_brute_force(diff):
    q = [[d, 0.0] for d in diff]
    got = [(e.entry_step, e.exit_step) for e in trap_events_from_q(range(len(diff)), q)]
    assert got == brute_force_events(diff)
    for a, b in zip(got, got[1:]):
        assert a[1] is not None and a[1] <= b[0]


def test_duration_stats_examples():
    assert trap_duration_stats([], 1000) == trap_duration_stats([], 5)
    empty = trap_duration_stats([], 1000)
    assert empty.median_duration is None and empty.never_exit_fraction == 0.0
    open_ = trap_duration_stats([TrapEvent(i, 10 * i, None) for i in range(5)], 1000)
    assert open_.median_duration == 1000.0 and open_.never_exit_fraction == 1.0
    mixed = trap_duration_stats([TrapEvent(0, 0, 10), TrapEvent(1, 5, 35), TrapEvent(2, 1, None)], 100)
    assert mixed.median_duration == 30.0
    assert mixed.never_exit_fraction == pytest.approx(1 / 3)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 50), st.one_of(st.none(), st.integers(1, 50))), max_size=20),
       st.integers(60, 200), st.integers(0, 100))
def test_duration_monotone_in_horizon(raw, horizon, extra):
    events = [TrapEvent(0, s, None if d is None else s + d) for s, d in raw]
    a = trap_duration_stats(events, horizon)
    b = trap_duration_stats(events, horizon + extra)
    assert all(y >= x for x, y in zip(a.durations, b.durations))
    if a.median_duration is not None:
        assert b.median_duration >= a.median_duration


def test_var_delta_oracle_values():
    env = broken_armed_bandit()
    assert abs(var_delta_oracle(env, "right", 0.95, 100_000, seed=1) / 6.25 - 1) <= 0.03
    assert var_delta_oracle(env, "left", 0.95, 1000) == 0.0
    assert abs(var_delta_oracle(fig3_bandit(), 1, 0.9, 100_000, seed=2) / 49 - 1) <= 0.03


def test_var_delta_oracle_without_bootstrap():
    env = broken_armed_bandit()
    assert abs(var_delta_oracle(env, 1, 0.95, 100_000, seed=5, bootstrap=False) / 6.25 - 1) <= 0.03


def test_oracle_agrees_with_agent_on_shared_samples():
    env = make_env([0.2, -0.7], [1.3, 0.4])
    # arm 0 is the best arm, where the agent's max-bootstrap equals its own value
    rewards, d2 = var_delta_samples(env, 0, 0.8, 20_000, seed=9)
    agent = init_agent(AgentConfig(gamma=0.8), env, make_rng(0))
    agent_d2 = np.array([td_error(agent, 0, r) ** 2 for r in rewards])
    se = math.hypot(standard_error(d2), standard_error(agent_d2))
    assert abs(d2.mean() - agent_d2.mean()) <= 2 * se
    np.testing.assert_allclose(agent_d2, d2, rtol=1e-9, atol=1e-9)


def test_oracle_needs_samples():
    with pytest.raises(ValueError):
        var_delta_oracle(broken_armed_bandit(), 1, 0.9, 0)


def test_smooth():
    out = smooth([1.0, 3.0, np.nan, 5.0], window=2)
    np.testing.assert_allclose(out, [1.0, 2.0, 3.0, 5.0])


def test_preference_scores_ties():
    np.testing.assert_array_equal(preference_scores([[1, 2], [2, 1], [1, 1]]), [1.0, 0.0, 0.5])
