"""Mean tester: exact pairing statistic, threshold schedule, preset sample
sizes, the full test loop, and the gaussian reduction."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercube_tester.meantest import (
    GAUSS_REPS,
    MeanTestConfig,
    SampleBatch,
    TauSchedule,
    _exceeds_log2,
    default_k0,
    erf_lower_bound_holds,
    gaussian_mean_tester,
    gaussian_required_samples,
    mean_tester,
    paper_q,
    practical_q,
    second_moment_screen,
    tau_schedule,
    threshold_z_test,
    z_numerator,
    z_statistic,
)
from hypercube_tester.model import Decision, ProductDistribution
from hypercube_tester.oracle import ScondOracle
from hypercube_tester.rng import stream
from hypercube_tester.zoo import TwoPointDistribution

# ---------------------------------------------------------------------------
# the statistic


def test_z_numerator_small_exact():
    xs = np.array([[1, 1], [1, -1]])
    ys = np.array([[1, 1], [-1, 1]])
    # inner products: [2, 0], [0, -2]
    assert z_numerator(xs, ys, 0) == 0
    assert z_numerator(xs, ys, 1) == 8
    assert z_numerator(xs, ys, 2) == 32


def test_z_numerator_bigint_path_matches_python():
    rng = stream(51, 0, 0)
    n, q = 40, 6
    xs = (2 * rng.integers(0, 2, (q, n)) - 1).astype(np.int64)
    ys = (2 * rng.integers(0, 2, (q, n)) - 1).astype(np.int64)
    for level in (3, 4, 5):  # level 4+ overflows int64 at n=40
        want = sum(
            int(x @ y) ** (1 << level) for x in xs for y in ys
        )
        assert z_numerator(xs, ys, level) == want


def test_z_numerator_exactness_at_int64_boundary():
    # max |<x,y>| = n = 62: 62^8 * 36 pairs sits close to 2^63
    xs = np.ones((6, 62), dtype=np.int64)
    ys = np.ones((6, 62), dtype=np.int64)
    assert z_numerator(xs, ys, 3) == 36 * 62**8
    assert z_numerator(xs, ys, 4) == 36 * 62**16


def test_z_statistic_is_numerator_over_q_squared():
    rng = stream(52, 0, 0)
    xs = (2 * rng.integers(0, 2, (5, 8)) - 1).astype(np.int8)
    ys = (2 * rng.integers(0, 2, (5, 8)) - 1).astype(np.int8)
    batch = SampleBatch(xs, ys)
    for k in (0, 1, 2):
        assert z_statistic(batch, k) == pytest.approx(
            z_numerator(xs, ys, k) / 25, rel=1e-15
        )


def test_threshold_equality_accepts():
    # one pair with <x,y> = 2 in n=4: Z_1 = 4 exactly
    x = np.array([[1, 1, 1, 1]])
    y = np.array([[1, 1, 1, -1]])
    batch = SampleBatch(x, y)
    assert threshold_z_test(4.0, batch, 1) is Decision.ACCEPT
    assert threshold_z_test(math.nextafter(4.0, 0.0), batch, 1) is Decision.REJECT
    assert threshold_z_test(math.inf, batch, 1) is Decision.ACCEPT


def test_threshold_uses_exact_arithmetic():
    # q = 3: Z = num / 9 is not a dyadic float; the comparison must not
    # round through floating point
    xs = np.ones((3, 3), dtype=np.int8)
    ys = np.ones((3, 3), dtype=np.int8)
    batch = SampleBatch(xs, ys)
    num = z_numerator(xs, ys, 0)  # 9 * 3 = 27, Z = 3 exactly
    assert num == 27
    assert threshold_z_test(3.0, batch, 0) is Decision.ACCEPT
    tau_below = float(Fraction(27, 9) - Fraction(1, 10**12))
    assert threshold_z_test(tau_below, batch, 0) is Decision.REJECT


def test_exceeds_log2_matches_float_compare():
    rng = stream(53, 0, 0)
    xs = (2 * rng.integers(0, 2, (4, 10)) - 1).astype(np.int8)
    ys = (2 * rng.integers(0, 2, (4, 10)) - 1).astype(np.int8)
    batch = SampleBatch(xs, ys)
    z = z_statistic(batch, 1)
    assert z > 0
    assert _exceeds_log2(batch, 1, math.log2(z) - 0.01)
    assert not _exceeds_log2(batch, 1, math.log2(z) + 0.01)
    # non-positive numerators never exceed a huge threshold
    neg = SampleBatch(np.array([[1, -1]]), np.array([[1, 1]]))
    assert not _exceeds_log2(neg, 0, 1e6)


# ---------------------------------------------------------------------------
# the schedule


def test_tau_schedule_frozen_values():
    s = tau_schedule(0.5, 64, 250, 3)
    assert s.tau(0) == pytest.approx(8.0, rel=1e-12)
    assert s.tau(1) == pytest.approx(800.0, rel=1e-12)
    assert s.tau(2) == pytest.approx(8.0e6, rel=1e-12)
    assert s.tau(3) == pytest.approx(8.0e14, rel=1e-12)


def test_tau_first_level_dominates_twelve_n():
    # the level-1 threshold clears 12n at the criterion operating point
    s = tau_schedule(0.5, 64, 250, 1)
    assert s.tau(1) >= 12 * 64


@settings(max_examples=60)
@given(
    st.floats(0.05, 1.0),
    st.integers(2, 512),
    st.integers(2, 10_000),
    st.integers(0, 6),
)
def test_tau_recursion_matches_closed_form(eps, n, q, k0):
    s = tau_schedule(eps, n, q, k0)
    for k in range(k0 + 1):
        got = s.tau_log2(k)
        want = s.closed_form_log2(k)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_tau_recursion_step():
    s = tau_schedule(0.3, 32, 100, 4)
    a = 1.0 / 5000.0
    for k in range(1, 5):
        assert s.tau_log2(k) == pytest.approx(
            math.log2(a) + 2 * math.log2(100) + 2 * s.tau_log2(k - 1), rel=1e-12
        )


def test_tau_overflow_reports_inf():
    s = tau_schedule(1.0, 4, 10**6, 6)
    assert math.isinf(s.tau(6))
    assert s.tau_log2(6) > math.log2(1e300)
    assert not math.isinf(s.tau(0))


def test_default_k0():
    assert default_k0(1) == 0
    assert default_k0(2) == 0
    assert default_k0(3) == 1
    assert default_k0(4) == 1
    assert default_k0(16) == 2
    assert default_k0(17) == 3
    assert default_k0(64) == 3
    assert default_k0(256) == 3
    assert default_k0(257) == 4


def test_practical_q_frozen_values():
    assert practical_q(64, 0.5, 3) == 250
    assert practical_q(64, 0.25, 3) == 1000
    assert practical_q(4, 1.0, 1) == 250  # comp=250, sound small, floor 150
    assert practical_q(10_000, 1.0, 1) == 150  # floor binds


def test_paper_q_shape():
    # documented asymptotic preset: small constants, never executed at scale
    assert paper_q(64, 0.5, 3) == max(
        math.ceil(8 / (0.25 * 8.0)), math.ceil(8 * 4 ** (16 / 30)), 1
    )
    assert paper_q(4, 1.0, 0) >= 1


def test_config_validation():
    with pytest.raises(ValueError):
        MeanTestConfig(0.0)
    with pytest.raises(ValueError):
        MeanTestConfig(0.5, preset="fast")
    sched = MeanTestConfig(0.5, q=77, k0=2).resolve(16)
    assert sched.q == 77 and sched.k0 == 2


# ---------------------------------------------------------------------------
# the tester


def test_mean_tester_uses_exactly_2q_queries():
    o = ScondOracle(ProductDistribution.uniform(16), stream(54, 0, 0))
    v = mean_tester(o, MeanTestConfig(0.5))
    assert v.queries_used == 2 * v.trace["q"]
    assert o.queries == v.queries_used
    assert len(v.trace["z_levels"]) <= v.trace["k0"] + 1
    assert len(v.trace["tau_levels"]) == len(v.trace["z_levels"])


def test_mean_tester_accepts_uniform():
    accepts = 0
    for t in range(20):
        o = ScondOracle(ProductDistribution.uniform(32), stream(55, 0, t))
        accepts += mean_tester(o, MeanTestConfig(0.5)).decision is Decision.ACCEPT
    assert accepts >= 18


def test_mean_tester_rejects_planted_mean():
    rejects = 0
    for t in range(20):
        o = ScondOracle(ProductDistribution(np.full(32, 0.25)), stream(56, 0, t))
        v = mean_tester(o, MeanTestConfig(0.25))
        rejects += v.decision is Decision.REJECT
    assert rejects >= 18


def test_mean_tester_rejects_two_point_at_high_level():
    # +/- x has mu = 0 but <x_i, y_j> = +/- n, so higher levels blow up
    x = np.ones(16, dtype=np.int8)
    o = ScondOracle(TwoPointDistribution(x), stream(57, 0, 0))
    v = mean_tester(o, MeanTestConfig(0.5))
    assert v.decision is Decision.REJECT
    fired_level = len(v.trace["z_levels"]) - 1
    assert v.trace["z_levels"][fired_level] > v.trace["tau_levels"][fired_level]


def test_mean_tester_stops_at_first_exceedance():
    x = np.ones(16, dtype=np.int8)
    o = ScondOracle(TwoPointDistribution(x), stream(58, 0, 0))
    v = mean_tester(o, MeanTestConfig(0.5))
    k0 = v.trace["k0"]
    assert len(v.trace["z_levels"]) <= k0 + 1


def test_mean_tester_handles_overflowed_tau():
    # deep schedule: the top tau exceeds the float range; uniform must
    # still accept through the log-space comparison
    sched = tau_schedule(1.0, 4, 2000, 7)
    assert math.isinf(sched.tau(7)) and not math.isinf(sched.tau(6))
    o = ScondOracle(ProductDistribution.uniform(4), stream(59, 0, 0))
    v = mean_tester(o, MeanTestConfig(1.0, q=2000, k0=7))
    assert v.decision is Decision.ACCEPT
    assert v.trace["tau_levels"][-1] == math.inf
    assert v.trace["tau_levels_log2"][-1] > 1000


# ---------------------------------------------------------------------------
# gaussian reduction


def test_erf_lower_bound_grid():
    xs = np.linspace(-6, 6, 10_001)
    assert erf_lower_bound_holds(xs).all()


def test_second_moment_screen_flags_large_variance():
    rng = stream(60, 0, 0)
    good = rng.standard_normal((144, 8))
    assert not second_moment_screen(good)
    bad = good.copy()
    bad[:, 3] *= 2.0  # variance 4 in one coordinate
    assert second_moment_screen(bad)
    with pytest.raises(ValueError):
        second_moment_screen(good[:100])


def test_gaussian_tester_accepts_standard_normal():
    n, eps = 16, 0.5
    need = gaussian_required_samples(n, eps)
    accepts = 0
    for t in range(10):
        samples = stream(61, 0, t).standard_normal((need, n))
        accepts += gaussian_mean_tester(samples, eps).decision is Decision.ACCEPT
    assert accepts >= 9


def test_gaussian_tester_rejects_shifted_mean():
    n, eps = 16, 0.5
    need = gaussian_required_samples(n, eps)
    mu = np.full(n, 1.0 / math.sqrt(n))  # ||mu|| = 1 = 2 eps
    rejects = 0
    for t in range(10):
        samples = stream(62, 0, t).standard_normal((need, n)) + mu
        v = gaussian_mean_tester(samples, eps)
        rejects += v.decision is Decision.REJECT
    assert rejects >= 9


def test_gaussian_tester_screen_rejects_inflated_variance():
    n, eps = 16, 0.5
    need = gaussian_required_samples(n, eps)
    samples = stream(63, 0, 0).standard_normal((need, n))
    samples[:, 0] *= 2.0
    v = gaussian_mean_tester(samples, eps)
    assert v.decision is Decision.REJECT
    assert v.trace["stage"] == "screen"


def test_gaussian_tester_majority_and_requirements():
    n, eps = 8, 0.5
    need = gaussian_required_samples(n, eps)
    assert need >= 144
    assert need >= GAUSS_REPS * 2 * math.ceil(64 * math.sqrt(n) / eps**2)
    with pytest.raises(ValueError):
        gaussian_mean_tester(np.zeros((need - 1, n)), eps)
    with pytest.raises(ValueError):
        gaussian_mean_tester(np.zeros((need, n)), 0.0)
