"""Named target distributions for experiments.

Every hypercube entry instantiates to either a DensePmf/ProductDistribution
(small n) or a generative family that supports subcube-conditional sampling
directly (any n). Entries serialize as {"kind": ..., <parameters>} JSON.

Kinds:
  uniform                          uniform on {-1,+1}^n
  two_point      x                 1/2 on x and 1/2 on -x  (TV to uniform 1 - 2^(1-n))
  planted_product eps              product with mu_i = eps (mean norm exactly eps*sqrt(n))
  heavy_atom     mass, x           mass on the atom x plus (1-mass) uniform
  junta_mix      k, inner          inner PMF on the first k coordinates, uniform elsewhere
  noisy_parity   S, delta          parity chi_S(x) = +1 with probability 1-delta, uniform within
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    DensePmf,
    ProductDistribution,
    Restriction,
    bit_powers,
    points_to_indices,
)

_KIND_DOCS = {
    "uniform": "uniform distribution; no parameters",
    "two_point": "half mass on x, half on -x; params: x (sign list, default all +1)",
    "planted_product": "product distribution with every mean eps; params: eps",
    "heavy_atom": "mass on one atom, rest uniform; params: mass, x (default all +1)",
    "junta_mix": "inner PMF on first k coordinates times uniform; params: k, inner (2^k masses)",
    "noisy_parity": "chi_S(x) = +1 w.p. 1-delta, uniform within parity classes; params: S, delta",
}


def _uniform_signs(rng: np.random.Generator, shape) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=shape) - 1).astype(np.int8)


class TwoPointDistribution:
    """Mass 1/2 on x and 1/2 on -x."""

    def __init__(self, x):
        x = np.asarray(x, dtype=np.int8)
        if not np.isin(x, (-1, 1)).all():
            raise ValueError("x must be a sign vector")
        self.x = x.copy()
        self.x.flags.writeable = False
        self.n = x.size

    def dense(self, **kw) -> DensePmf:
        mass = np.zeros(1 << self.n)
        mass[int(points_to_indices(self.x))] += 0.5
        mass[int(points_to_indices(-self.x))] += 0.5
        return DensePmf(self.n, mass, **kw)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        s = (2 * rng.integers(0, 2, size=size) - 1).astype(np.int8)
        return s[:, None] * self.x

    def _consistency(self, rho: Restriction):
        fixed = rho.fixed
        if fixed.size == 0:
            return True, True
        cx = bool((rho.cells[fixed] == self.x[fixed]).all())
        cmx = bool((rho.cells[fixed] == -self.x[fixed]).all())
        return cx, cmx

    def cond_sample(self, rng: np.random.Generator, rho: Restriction, size: int):
        stars = rho.stars
        cx, cmx = self._consistency(rho)
        if not cx and not cmx:
            return _uniform_signs(rng, (size, stars.size)), True
        if cx and cmx:
            s = (2 * rng.integers(0, 2, size=size) - 1).astype(np.int8)
        else:
            s = np.full(size, 1 if cx else -1, dtype=np.int8)
        return s[:, None] * self.x[stars], False

    def edge_bias(self, points: np.ndarray, coords: np.ndarray):
        points = np.atleast_2d(np.asarray(points, dtype=np.int8))
        coords = np.asarray(coords, dtype=np.int64)
        m = points.shape[0]
        rows = np.arange(m)
        mism_x = points != self.x
        mism_mx = ~mism_x
        cx = (mism_x.sum(axis=1) - mism_x[rows, coords]) == 0
        cmx = (mism_mx.sum(axis=1) - mism_mx[rows, coords]) == 0
        zero = ~cx & ~cmx
        xi = self.x[coords].astype(np.float64)
        bias = np.where(cx & cmx, 0.0, np.where(cx, xi, np.where(cmx, -xi, 0.0)))
        return bias, zero


class HeavyAtomDistribution:
    """mass * point_mass(x) + (1 - mass) * uniform."""

    def __init__(self, mass: float, x):
        if not 0.0 <= mass <= 1.0:
            raise ValueError("mass must lie in [0, 1]")
        x = np.asarray(x, dtype=np.int8)
        if not np.isin(x, (-1, 1)).all():
            raise ValueError("x must be a sign vector")
        self.atom_mass = float(mass)
        self.x = x.copy()
        self.x.flags.writeable = False
        self.n = x.size

    def dense(self, **kw) -> DensePmf:
        mass = np.full(1 << self.n, (1.0 - self.atom_mass) * 2.0 ** -self.n)
        mass[int(points_to_indices(self.x))] += self.atom_mass
        return DensePmf(self.n, mass, **kw)

    def _point_mass(self, points: np.ndarray) -> np.ndarray:
        is_atom = (points == self.x).all(axis=1)
        return self.atom_mass * is_atom + (1.0 - self.atom_mass) * 2.0 ** -self.n

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        take_atom = rng.random(size) < self.atom_mass
        draws = _uniform_signs(rng, (size, self.n))
        draws[take_atom] = self.x
        return draws

    def cond_sample(self, rng: np.random.Generator, rho: Restriction, size: int):
        stars = rho.stars
        fixed = rho.fixed
        consistent = bool((rho.cells[fixed] == self.x[fixed]).all()) if fixed.size else True
        w_atom = self.atom_mass if consistent else 0.0
        w_unif = (1.0 - self.atom_mass) * 2.0 ** -fixed.size
        total = w_atom + w_unif
        if total == 0.0:
            return _uniform_signs(rng, (size, stars.size)), True
        take_atom = rng.random(size) < (w_atom / total)
        draws = _uniform_signs(rng, (size, stars.size))
        draws[take_atom] = self.x[stars]
        return draws, False

    def edge_bias(self, points: np.ndarray, coords: np.ndarray):
        points = np.atleast_2d(np.asarray(points, dtype=np.int8))
        coords = np.asarray(coords, dtype=np.int64)
        rows = np.arange(points.shape[0])
        plus = points.copy()
        plus[rows, coords] = 1
        minus = points.copy()
        minus[rows, coords] = -1
        a_plus = self._point_mass(plus)
        a_minus = self._point_mass(minus)
        tot = a_plus + a_minus
        zero = tot == 0.0
        bias = np.zeros(points.shape[0])
        np.divide(a_plus - a_minus, tot, out=bias, where=~zero)
        return bias, zero


class JuntaMixDistribution:
    """Inner PMF on the first k coordinates, uniform on the remaining n - k."""

    def __init__(self, n: int, k: int, inner):
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        self.n = int(n)
        self.k = int(k)
        self.inner = DensePmf(k, inner)

    def dense(self, **kw) -> DensePmf:
        rest = np.full(1 << (self.n - self.k), 2.0 ** -(self.n - self.k))
        return DensePmf(self.n, np.kron(self.inner.mass, rest), **kw)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        head = self.inner.sample(rng, size)
        tail = _uniform_signs(rng, (size, self.n - self.k))
        return np.concatenate([head, tail], axis=1)

    def cond_sample(self, rng: np.random.Generator, rho: Restriction, size: int):
        stars = rho.stars
        inner_rho = Restriction(rho.cells[: self.k])
        head, zero = self.inner.cond_sample(rng, inner_rho, size)
        tail = _uniform_signs(rng, (size, int((stars >= self.k).sum())))
        draws = np.empty((size, stars.size), dtype=np.int8)
        draws[:, stars < self.k] = head
        draws[:, stars >= self.k] = tail
        return draws, zero

    def edge_bias(self, points: np.ndarray, coords: np.ndarray):
        points = np.atleast_2d(np.asarray(points, dtype=np.int8))
        coords = np.asarray(coords, dtype=np.int64)
        m = points.shape[0]
        bias = np.zeros(m)
        zero = np.zeros(m, dtype=bool)
        head_idx = points_to_indices(points[:, : self.k])
        junta_edge = coords < self.k
        if junta_edge.any():
            b, z = self.inner.edge_bias(points[junta_edge, : self.k], coords[junta_edge])
            bias[junta_edge] = b
            zero[junta_edge] = z
        outside = ~junta_edge
        if outside.any():
            zero[outside] = self.inner.mass[head_idx[outside]] == 0.0
        return bias, zero


class NoisyParityDistribution:
    """chi_S(x) = +1 with probability 1 - delta; uniform within each parity class."""

    def __init__(self, n: int, S, delta: float):
        S = tuple(sorted(int(i) for i in S))
        if len(S) == 0 or len(set(S)) != len(S):
            raise ValueError("S must be a nonempty set of coordinates")
        if any(i < 0 or i >= n for i in S):
            raise ValueError("S out of range")
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        self.n = int(n)
        self.S = S
        self.delta = float(delta)
        self._s_mask = np.zeros(n, dtype=bool)
        self._s_mask[list(S)] = True

    def _weight(self, parity: np.ndarray) -> np.ndarray:
        return np.where(parity > 0, 1.0 - self.delta, self.delta)

    def dense(self, **kw) -> DensePmf:
        idx = np.arange(1 << self.n, dtype=np.int64)
        pw = bit_powers(self.n)[list(self.S)]
        ones = np.zeros(1 << self.n, dtype=np.int64)
        for p in pw:
            ones += (idx & p) > 0
        # chi_S = prod x_i = (-1)^(# of -1 entries among S); a set bit means +1
        minus = len(self.S) - ones
        parity = 1 - 2 * (minus % 2)
        return DensePmf(self.n, 2.0 ** (1 - self.n) * self._weight(parity), **kw)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        draws = _uniform_signs(rng, (size, self.n))
        want = np.where(rng.random(size) < 1.0 - self.delta, 1, -1).astype(np.int8)
        have = draws[:, list(self.S)].prod(axis=1).astype(np.int8)
        flip = want != have
        draws[flip, self.S[0]] *= -1
        return draws

    def cond_sample(self, rng: np.random.Generator, rho: Restriction, size: int):
        stars = rho.stars
        s_stars = [i for i in self.S if rho.cells[i] == 0]
        fixed_s = [i for i in self.S if rho.cells[i] != 0]
        par_fixed = int(np.prod(rho.cells[fixed_s])) if fixed_s else 1
        if not s_stars:
            weight = (1.0 - self.delta) if par_fixed > 0 else self.delta
            if weight == 0.0:
                return _uniform_signs(rng, (size, stars.size)), True
            return _uniform_signs(rng, (size, stars.size)), False
        draws = _uniform_signs(rng, (size, stars.size))
        want_total = np.where(rng.random(size) < 1.0 - self.delta, 1, -1).astype(np.int8)
        want_free = want_total * par_fixed
        s_cols = np.searchsorted(stars, s_stars)
        have = draws[:, s_cols].prod(axis=1).astype(np.int8)
        flip = want_free != have
        draws[flip, s_cols[0]] *= -1
        return draws, False

    def edge_bias(self, points: np.ndarray, coords: np.ndarray):
        points = np.atleast_2d(np.asarray(points, dtype=np.int8))
        coords = np.asarray(coords, dtype=np.int64)
        m = points.shape[0]
        in_s = self._s_mask[coords]
        s_vals = points[:, list(self.S)].astype(np.float64)
        chi = s_vals.prod(axis=1)
        rows = np.arange(m)
        bias = np.zeros(m)
        zero = np.zeros(m, dtype=bool)
        if in_s.any():
            xi = points[rows, coords].astype(np.float64)
            par_other = chi[in_s] * xi[in_s]  # parity of S minus the edge coordinate
            bias[in_s] = par_other * (1.0 - 2.0 * self.delta)
        out = ~in_s
        if out.any():
            w = self._weight(chi[out])
            zero[out] = w == 0.0
        return bias, zero


class GaussianSource:
    """Generative source of real vectors N(mu, I); used only by the gaussian
    mean tester, not as a hypercube oracle target."""

    def __init__(self, n: int, mu=None):
        self.n = int(n)
        self.mu = np.zeros(self.n) if mu is None else np.asarray(mu, dtype=np.float64)
        if self.mu.shape != (self.n,):
            raise ValueError("mu must have length n")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal((size, self.n)) + self.mu


@dataclass
class ZooEntry:
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, doc: dict) -> "ZooEntry":
        if "kind" not in doc:
            raise ValueError("zoo entry needs a 'kind' field")
        params = {k: v for k, v in doc.items() if k != "kind"}
        return cls(doc["kind"], params)


def zoo_kinds() -> dict[str, str]:
    return dict(_KIND_DOCS)


def instantiate(entry: ZooEntry, n: int):
    """Build the target distribution described by a zoo entry at dimension n."""
    kind, p = entry.kind, entry.params
    if kind == "uniform":
        return ProductDistribution.uniform(n)
    if kind == "two_point":
        x = np.asarray(p.get("x", np.ones(n)), dtype=np.int8)
        if x.size != n:
            raise ValueError("two_point x must have length n")
        return TwoPointDistribution(x)
    if kind == "planted_product":
        eps = float(p["eps"])
        return ProductDistribution(np.full(n, eps))
    if kind == "heavy_atom":
        x = np.asarray(p.get("x", np.ones(n)), dtype=np.int8)
        if x.size != n:
            raise ValueError("heavy_atom x must have length n")
        return HeavyAtomDistribution(float(p["mass"]), x)
    if kind == "junta_mix":
        k = int(p["k"])
        inner = p.get("inner")
        if inner is None:
            inner = np.zeros(1 << k)
            inner[-1] = 1.0  # point mass on all +1 within the junta
        return JuntaMixDistribution(n, k, inner)
    if kind == "noisy_parity":
        return NoisyParityDistribution(n, p["S"], float(p["delta"]))
    raise ValueError(f"unknown zoo kind {kind!r}")


def save_entry(entry: ZooEntry, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(entry.to_dict(), fh)
        fh.write("\n")


def load_entry(path: str) -> ZooEntry:
    with open(path) as fh:
        return ZooEntry.from_dict(json.load(fh))


def parse_spec_string(text: str) -> ZooEntry:
    """Shorthand 'kind[:arg[:arg]]' used by the CLI.

    uniform | two_point | planted_product:EPS | heavy_atom:MASS |
    junta_mix:K | noisy_parity:M:DELTA  (S = first M coordinates)
    """
    parts = text.split(":")
    kind, args = parts[0], parts[1:]
    if kind == "uniform" and not args:
        return ZooEntry("uniform")
    if kind == "two_point" and not args:
        return ZooEntry("two_point")
    if kind == "planted_product" and len(args) == 1:
        return ZooEntry("planted_product", {"eps": float(args[0])})
    if kind == "heavy_atom" and len(args) == 1:
        return ZooEntry("heavy_atom", {"mass": float(args[0])})
    if kind == "junta_mix" and len(args) == 1:
        return ZooEntry("junta_mix", {"k": int(args[0])})
    if kind == "noisy_parity" and len(args) == 2:
        return ZooEntry("noisy_parity", {"S": list(range(int(args[0]))), "delta": float(args[1])})
    raise ValueError(f"cannot parse distribution spec {text!r}")
