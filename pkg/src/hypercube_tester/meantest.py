"""Mean testing on the hypercube via the paired-sample statistic.

Given 2q i.i.d. samples split into halves X and Y, the level-k statistic

    Z_k = (1/q^2) * sum_{i,j} <x_i, y_j>^(2^k)

has expectation ||mu(bl^k p)||^2, where bl is the tensor-square map from
the blowup module; raising inner products to the 2^k-th power avoids
materializing n^(2^k) coordinates. The tester compares Z_k against a
threshold schedule tau_k at levels k = 0..k0 and rejects at the first
exceedance.

Thresholds grow doubly exponentially in k, so the schedule is maintained
in log2 space; comparisons against Z use exact integer numerators, making
the strict `Z > tau` boundary reproducible.

A reduction for Gaussian mean testing is included: screen per-coordinate
second moments, map samples through sign(), and run the hypercube tester
at a reduced distance parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import Decision, TestVerdict
from .oracle import ScondOracle

TAU_RECURSION_COEFF = 1.0 / 5000.0
TAU_OVERFLOW_LIMIT = 1e300  # taus beyond this are reported as inf in traces

# practical preset: the two terms of the sample bound q >= max{...} carry
# calibrated constants; the first is forced by completeness at level 1
# (tau_1 must clear the blown-up uniform mean n with room to spare), the
# second mirrors the soundness bound's shape.
C_COMP_PRACTICAL = 500.0
C_SOUND_PRACTICAL = 48.0
Q_MIN_PRACTICAL = 150
C_PAPER = 8.0

# gaussian reduction
SCREEN_BATCHES = 9
SCREEN_BATCH_SIZE = 16
SCREEN_THRESHOLD = 1.5  # midpoint between E[x_i^2] <= 1 and > 2
GAUSS_Q_COEFF = 64.0
GAUSS_REPS = 3


@dataclass(frozen=True)
class SampleBatch:
    """Two independent halves of 2q i.i.d. sign-vector samples."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=np.int8))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=np.int8))
        if xs.shape != ys.shape or xs.shape[0] < 1:
            raise ValueError("halves must be nonempty and of equal shape")
        if not (np.isin(xs, (-1, 1)).all() and np.isin(ys, (-1, 1)).all()):
            raise ValueError("samples must be sign vectors")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def q(self) -> int:
        return self.xs.shape[0]

    @property
    def n(self) -> int:
        return self.xs.shape[1]


def z_numerator(xs: np.ndarray, ys: np.ndarray, level: int) -> int:
    """Exact integer sum_{i,j} <x_i, y_j>^(2^level)."""
    g = np.asarray(xs, dtype=np.int64) @ np.asarray(ys, dtype=np.int64).T
    power = 1 << int(level)
    max_abs = int(np.abs(g).max(initial=0))
    if max_abs == 0:
        return 0
    if power * math.log2(max_abs) + math.log2(g.size) < 62.0:
        return int((g**power).sum())
    # inner products take at most 2n+1 distinct values, so big-int powers
    # are needed only once per value
    vals, counts = np.unique(g, return_counts=True)
    return sum(int(c) * int(v) ** power for v, c in zip(vals, counts))


def z_statistic(batch: SampleBatch, level: int) -> float:
    num = z_numerator(batch.xs, batch.ys, level)
    denom = batch.q * batch.q
    try:
        return num / denom
    except OverflowError:
        return math.inf if num > 0 else -math.inf


def threshold_z_test(tau: float, batch: SampleBatch, level: int) -> Decision:
    """Reject iff Z_level > tau, decided in exact arithmetic."""
    if math.isinf(tau):
        return Decision.ACCEPT if tau > 0 else Decision.REJECT
    num = z_numerator(batch.xs, batch.ys, level)
    if Fraction(num, batch.q * batch.q) > Fraction(tau):
        return Decision.REJECT
    return Decision.ACCEPT


def _exceeds_log2(batch: SampleBatch, level: int, tau_log2: float) -> bool:
    """Z_level > 2^tau_log2, for thresholds too large to hold in a float."""
    num = z_numerator(batch.xs, batch.ys, level)
    if num <= 0:
        return False
    return math.log2(num) - 2.0 * math.log2(batch.q) > tau_log2


@dataclass(frozen=True)
class TauSchedule:
    """tau_0 = eps^2 n / 2 and tau_k = a q^2 tau_{k-1}^2, held in log2 space."""

    eps: float
    n: int
    q: int
    k0: int
    a: float = TAU_RECURSION_COEFF
    taus_log2: tuple = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if self.q < 1 or self.k0 < 0 or self.n < 1:
            raise ValueError("need q >= 1, k0 >= 0, n >= 1")
        step = math.log2(self.a) + 2.0 * math.log2(self.q)
        logs = [2.0 * math.log2(self.eps) + math.log2(self.n) - 1.0]
        for _ in range(self.k0):
            logs.append(step + 2.0 * logs[-1])
        object.__setattr__(self, "taus_log2", tuple(logs))

    def tau_log2(self, k: int) -> float:
        return self.taus_log2[k]

    def tau(self, k: int) -> float:
        lg = self.taus_log2[k]
        if lg > math.log2(TAU_OVERFLOW_LIMIT):
            return math.inf
        return 2.0**lg

    @property
    def taus(self) -> tuple:
        return tuple(self.tau(k) for k in range(self.k0 + 1))

    def closed_form_log2(self, k: int) -> float:
        """-log2(a q^2) + 2^k log2(a q^2 eps^2 n / 2); agrees with the
        recursion to floating-point accuracy."""
        base = math.log2(self.a) + 2.0 * math.log2(self.q)
        inner = base + 2.0 * math.log2(self.eps) + math.log2(self.n) - 1.0
        return -base + (1 << k) * inner


def tau_schedule(eps: float, n: int, q: int, k0: int) -> TauSchedule:
    return TauSchedule(eps=eps, n=n, q=q, k0=k0)


def default_k0(n: int) -> int:
    if n <= 2:
        return 0
    return max(0, math.ceil(math.log2(math.log2(n))))


def practical_q(n: int, eps: float, k0: int) -> int:
    comp = math.ceil(C_COMP_PRACTICAL / (eps * eps * math.sqrt(n)))
    expo = (1 << (k0 + 1)) / ((1 << (k0 + 2)) - 2)
    sound = math.ceil((C_SOUND_PRACTICAL / (eps * eps)) ** expo)
    return max(comp, sound, Q_MIN_PRACTICAL)


def paper_q(n: int, eps: float, k0: int) -> int:
    expo = (1 << (k0 + 1)) / ((1 << (k0 + 2)) - 2)
    return max(
        math.ceil(C_PAPER / (eps * eps * math.sqrt(n))),
        math.ceil(C_PAPER * (1.0 / (eps * eps)) ** expo),
        1,
    )


@dataclass(frozen=True)
class MeanTestConfig:
    eps: float
    preset: str = "practical"
    q: int | None = None  # None = derive from preset
    k0: int | None = None

    def __post_init__(self):
        if self.preset not in ("practical", "paper"):
            raise ValueError("preset must be 'practical' or 'paper'")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")

    def resolve(self, n: int) -> TauSchedule:
        k0 = default_k0(n) if self.k0 is None else int(self.k0)
        if self.q is not None:
            q = int(self.q)
        elif self.preset == "paper":
            q = paper_q(n, self.eps, k0)
        else:
            q = practical_q(n, self.eps, k0)
        return tau_schedule(self.eps, n, q, k0)


def mean_tester(oracle: ScondOracle, cfg: MeanTestConfig) -> TestVerdict:
    """Draw 2q samples once, then run the threshold test at every level."""
    start = oracle.queries
    sched = cfg.resolve(oracle.n)
    xs = oracle.sample(sched.q)
    ys = oracle.sample(sched.q)
    batch = SampleBatch(xs, ys)
    z_levels = []
    decision = Decision.ACCEPT
    for k in range(sched.k0 + 1):
        z_levels.append(z_statistic(batch, k))
        tau_k = sched.tau(k)
        if math.isinf(tau_k):
            rejected = _exceeds_log2(batch, k, sched.tau_log2(k))
        else:
            rejected = threshold_z_test(tau_k, batch, k) is Decision.REJECT
        if rejected:
            decision = Decision.REJECT
            break
    trace = {
        "q": sched.q,
        "k0": sched.k0,
        "z_levels": z_levels,
        "tau_levels": [sched.tau(k) for k in range(len(z_levels))],
        "tau_levels_log2": [sched.tau_log2(k) for k in range(len(z_levels))],
    }
    return TestVerdict(decision, oracle.queries - start, trace)


# ---------------------------------------------------------------------------
# Gaussian reduction


def erf_lower_bound_holds(x: np.ndarray) -> np.ndarray:
    """Pointwise check of Erf(x)^2 >= (2/3) min(x^2, 1)."""
    x = np.asarray(x, dtype=np.float64)
    erf = np.vectorize(math.erf)(x)
    return erf * erf >= (2.0 / 3.0) * np.minimum(x * x, 1.0) - 1e-12


def second_moment_screen(samples: np.ndarray) -> bool:
    """True when some coordinate's median-of-batch-means of x_i^2 lands
    above the screen threshold (evidence of variance larger than 1)."""
    need = SCREEN_BATCHES * SCREEN_BATCH_SIZE
    if samples.shape[0] < need:
        raise ValueError(f"screen needs at least {need} samples")
    sq = samples[:need] ** 2
    batches = sq.reshape(SCREEN_BATCHES, SCREEN_BATCH_SIZE, -1).mean(axis=1)
    medians = np.median(batches, axis=0)
    return bool((medians > SCREEN_THRESHOLD).any())


def gaussian_required_samples(n: int, eps: float) -> int:
    """Total real-vector samples the gaussian tester consumes."""
    per_rep = 2 * _gaussian_q(n, eps)
    return max(SCREEN_BATCHES * SCREEN_BATCH_SIZE, GAUSS_REPS * per_rep)


def _gaussian_q(n: int, eps: float) -> int:
    return math.ceil(GAUSS_Q_COEFF * math.sqrt(n) / (eps * eps))


def gaussian_mean_tester(samples: np.ndarray, eps: float) -> TestVerdict:
    """Accept when the source looks like N(0, I); reject when the mean norm
    exceeds eps (any covariance).

    Screens per-coordinate second moments first, then sign-maps the samples
    and majority-votes over disjoint sample chunks of the level-0 hypercube
    tester at the reduced parameter eps / (2 sqrt(3n)).
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = samples.shape[1]
    need = gaussian_required_samples(n, eps)
    if samples.shape[0] < need:
        raise ValueError(f"need at least {need} samples, got {samples.shape[0]}")

    if second_moment_screen(samples):
        return TestVerdict(
            Decision.REJECT, 0, {"stage": "screen", "reps": [], "q": 0}
        )

    eps_reduced = eps / (2.0 * math.sqrt(3.0 * n))
    q = _gaussian_q(n, eps)
    # the reduced eps lies far below a practical preset's domain, so the
    # schedule takes an explicit q and runs at level 0 only
    sched = tau_schedule(eps_reduced, n, q, 0)
    signs = np.where(samples >= 0.0, 1, -1).astype(np.int8)
    rejects = 0
    rep_z = []
    for r in range(GAUSS_REPS):
        lo = r * 2 * q
        batch = SampleBatch(signs[lo : lo + q], signs[lo + q : lo + 2 * q])
        rep_z.append(z_statistic(batch, 0))
        if threshold_z_test(sched.tau(0), batch, 0) is Decision.REJECT:
            rejects += 1
    decision = Decision.REJECT if 2 * rejects > GAUSS_REPS else Decision.ACCEPT
    trace = {
        "stage": "mean-test",
        "reps": rep_z,
        "tau": sched.tau(0),
        "q": q,
        "eps_reduced": eps_reduced,
    }
    return TestVerdict(decision, 0, trace)
