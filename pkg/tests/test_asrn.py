import math

import numpy as np
import pytest
from scipy import stats

from asrnlab.asrn import (MAD_TO_STD, AsrnConfig, InterestWindow, ensemble_learning_rates, filter_reward,
                          init_asrn, interest_grade, median_interest, noise_scale, update_predictors)
from asrnlab.bandit import broken_armed_bandit, sample_reward
from asrnlab.rng import make_rng


class FrozenWindow:
    """Window stub with a fixed median, so a test can hold I_med constant."""

    def __init__(self, median, size=1000):
        self._median = median
        self._size = size

    def __len__(self):
        return self._size

    def median(self):
        return self._median

    def append(self, grade):
        pass


def zero_state(mode="median", n_arms=2, **kw):
    cfg = AsrnConfig(predictor_init_sigma=0.0, noise_scale_mode=mode, **kw)
    return init_asrn(cfg, n_arms, make_rng(0))


def test_zero_init_sigma():
    st = zero_state()
    assert st.ensemble.estimates == [[0.0, 0.0]] * 5


def test_ensemble_cardinality():
    st = init_asrn(AsrnConfig(ensemble_size=5), 2, make_rng(0))
    assert sum(len(row) for row in st.ensemble.estimates) == 10
    assert len(st.ensemble.lrs) == 5


def test_init_is_deterministic():
    a = init_asrn(AsrnConfig(), 2, make_rng(42))
    b = init_asrn(AsrnConfig(), 2, make_rng(42))
    assert a.ensemble.estimates == b.ensemble.estimates


def test_learning_rate_grid():
    assert ensemble_learning_rates(0.1, 5) == pytest.approx([0.05, 0.075, 0.1, 0.125, 0.15])
    assert ensemble_learning_rates(0.1, 1) == [0.1]
    assert max(ensemble_learning_rates(0.9, 3)) == 1.0


@pytest.mark.parametrize("kw", [dict(ensemble_size=0), dict(window_k=0), dict(predictor_lr=0.0),
                                dict(predictor_init_sigma=-1.0), dict(activation_step=-1),
                                dict(noise_scale_mode="loud")])
def test_bad_config(kw):
    with pytest.raises(ValueError):
        AsrnConfig(**kw)


def test_init_rejects_no_arms():
    with pytest.raises(ValueError):
        init_asrn(AsrnConfig(), 0, make_rng(0))


def test_grade_zero_on_perfect_prediction():
    st = zero_state()
    assert interest_grade(st, 0, 0.0) == 0.0


def test_grade_single_predictor():
    st = init_asrn(AsrnConfig(ensemble_size=1, predictor_init_sigma=0.0), 2, make_rng(0))
    assert interest_grade(st, 1, 5.0) == 5.0


def test_grade_is_mean_absolute_error():
    st = zero_state()
    st.ensemble.estimates = [[1.0, 0.0], [3.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [0.0, 0.0]]
    assert interest_grade(st, 0, 1.0) == pytest.approx((0 + 2 + 2 + 1 + 1) / 5)


def test_converged_grade_is_normal_mad():
    # E|X - mu| for X ~ N(mu, s^2) is s sqrt(2 / pi); predictors sit near mu
    env = broken_armed_bandit()
    st = init_asrn(AsrnConfig(predictor_lr=0.01), 2, make_rng(0))
    rng = make_rng(1)
    for _ in range(3000):
        update_predictors(st, 1, sample_reward(env, 1, rng))
    grades = []
    for _ in range(50_000):
        r = sample_reward(env, 1, rng)
        grades.append(interest_grade(st, 1, r))
        update_predictors(st, 1, r, grades[-1])
    assert abs(np.mean(grades) - 2.5 * math.sqrt(2 / math.pi)) <= 0.05


def test_update_one_step():
    st = init_asrn(AsrnConfig(ensemble_size=1, predictor_init_sigma=0.0, predictor_lr=0.1), 2, make_rng(0))
    update_predictors(st, 0, 10.0)
    assert st.ensemble.estimates == [[1.0, 0.0]]
    assert st.window.values() == [10.0]


def test_update_converges_geometrically():
    st = init_asrn(AsrnConfig(predictor_init_sigma=0.0, predictor_lr=0.2), 2, make_rng(0))
    gaps = []
    for _ in range(40):
        update_predictors(st, 1, 3.0)
        gaps.append(abs(st.ensemble.estimates[2][1] - 3.0))
    ratios = np.array(gaps[1:]) / np.array(gaps[:-1])
    np.testing.assert_allclose(ratios, 0.8, rtol=1e-9)
    assert all(row[0] == 0.0 for row in st.ensemble.estimates)


def test_window_evicts_oldest():
    st = zero_state(window_k=3)
    for r in (1.0, 2.0, 3.0, 4.0):
        update_predictors(st, 0, r, grade=r)
    assert st.window.values() == [2.0, 3.0, 4.0]
    assert len(st.window) == 3


def test_median_rules():
    w = InterestWindow(10)
    assert w.median() == math.inf
    for g in (3.0, 1.0, 2.0):
        w.append(g)
    assert w.median() == 2.0
    w.append(4.0)
    assert w.median() == 2.5
    z = InterestWindow(3)
    for _ in range(3):
        z.append(0.0)
    assert z.median() == 0.0


def test_window_median_matches_numpy():
    rng = np.random.default_rng(0)
    w = InterestWindow(37)
    hist = []
    for g in rng.exponential(size=500):
        w.append(float(g))
        hist.append(float(g))
        assert w.median() == np.median(hist[-37:])


def test_empty_window_means_no_noise():
    st = zero_state(warmup=1)
    assert median_interest(st) == math.inf
    assert filter_reward(st, 1, 7.0, make_rng(0)) == 7.0


def test_pass_through_at_or_above_median():
    st = zero_state()
    st.window = FrozenWindow(2.0)
    assert filter_reward(st, 1, 2.0, make_rng(0)) == 2.0  # grade == median, strict rule
    assert filter_reward(st, 1, 5.0, make_rng(0)) == 5.0


def test_zero_median_never_noises():
    st = zero_state()
    st.window = FrozenWindow(0.0)
    for r in (0.0, 1.0, -3.0):
        assert filter_reward(st, 0, r, make_rng(1)) == r


def test_warmup_blocks_noise():
    st = zero_state(window_k=1000)
    st.window = FrozenWindow(2.0, size=99)
    assert filter_reward(st, 0, 0.0, make_rng(0)) == 0.0
    st.window = FrozenWindow(2.0, size=100)
    assert filter_reward(st, 0, 0.0, make_rng(0)) != 0.0


def test_activation_step_gates_noise():
    st = zero_state(activation_step=3)
    st.window = FrozenWindow(2.0)
    rng = make_rng(0)
    out = [filter_reward(st, 0, 0.0, rng) for _ in range(5)]
    assert out[:3] == [0.0, 0.0, 0.0]
    assert out[3] != 0.0 and out[4] != 0.0


def test_boring_arm_noise_moments():
    st = zero_state("median")
    st.window = FrozenWindow(2.0)
    rng = make_rng(7)
    out = np.array([filter_reward(st, 0, 0.0, rng) for _ in range(100_000)])
    assert abs(out.mean()) <= 0.026
    assert abs(out.std() - 2.0) <= 0.02
    assert abs(stats.skew(out)) <= 4 * math.sqrt(6 / out.size)


@pytest.mark.parametrize("mode,grade,median,expected", [
    ("median", 0.5, 2.0, 2.0),
    ("scaled_median", 0.5, 2.0, 2.0 / MAD_TO_STD),
    ("variance_matching", 1.2, 2.0, 1.6),
    ("literal", 0.5, 2.0, 0.5),
    ("variance_matching", 3.0, 2.0, 0.0),
])
def test_noise_scale_modes(mode, grade, median, expected):
    assert noise_scale(mode, grade, median) == pytest.approx(expected)


def test_scaled_median_recovers_sigma():
    # the median of |N(0, s^2)| is s * MAD_TO_STD
    x = np.abs(np.random.default_rng(0).normal(0, 2.5, 200_000))
    assert np.median(x) / MAD_TO_STD == pytest.approx(2.5, rel=0.01)


def test_predictors_learn_raw_reward():
    st = zero_state()
    st.window = FrozenWindow(5.0)
    filter_reward(st, 0, 1.0, make_rng(0))
    assert [row[0] for row in st.ensemble.estimates] == pytest.approx(st.ensemble.lrs)


def test_grade_is_nonnegative_and_window_bounded():
    env = broken_armed_bandit()
    st = init_asrn(AsrnConfig(window_k=50), 2, make_rng(0))
    rng = make_rng(1)
    for t in range(500):
        arm = t % 2
        filter_reward(st, arm, sample_reward(env, arm, rng), rng)
        assert st.last_interest >= 0
        assert len(st.window) <= 50


def run_filter(arm_sequence, seed=0, **cfg):
    env = broken_armed_bandit()
    st = init_asrn(AsrnConfig(**cfg), 2, make_rng(seed))
    rng, noise = make_rng(seed + 1), make_rng(seed + 2)
    raw, out, arms = [], [], []
    for arm in arm_sequence:
        r = sample_reward(env, arm, rng)
        raw.append(r)
        out.append(filter_reward(st, arm, r, noise))
        arms.append(arm)
    return np.array(raw), np.array(out), np.array(arms)


def test_unbiased_and_symmetric_noise():
    # agent mostly on the interesting arm, boring arm visited one step in ten
    seq = [0 if t % 10 == 0 else 1 for t in range(120_000)]
    raw, out, _ = run_filter(seq)
    noise = (out - raw)[out != raw]
    n = noise.size
    assert n >= 50_000
    assert abs(noise.mean()) <= 4 * noise.std() / math.sqrt(n)
    assert abs(stats.skew(noise)) <= 4 * math.sqrt(6 / n)


def test_equalizes_boring_arm_variance():
    seq = [0 if t % 10 == 0 else 1 for t in range(100_000)]
    raw, out, arms = run_filter(seq, seed=3)
    boring = out[arms == 0][200:]
    interesting = out[arms == 1][2000:]
    assert raw[arms == 0].var() == 0.0
    ratio = boring.var() / interesting.var()
    assert 0.5 <= ratio <= 2.0


def test_even_alternation_collapses_the_median():
    # half of the window is the boring arm's near-zero grades, so the median
    # sits between the two clusters and the injected noise stays small
    seq = [t % 2 for t in range(20_000)]
    raw, out, arms = run_filter(seq, seed=5)
    assert out[arms == 0][2000:].std() < 0.5
