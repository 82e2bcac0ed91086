"""Finite metric dynamical systems with exact rational metrics.

A compact metric space with a homeomorphism is modelled by a finite point set,
a symmetric rational distance matrix and a permutation. Every quantifier over
all times n in Z becomes finite: the pair sequence (f^n x, f^n y) is periodic
with period lcm(period(x), period(y)), which divides the order of the map.

On such a model every system is expansive for small enough constants, so the
interesting output is quantitative: which thresholds hold, and where the
boundaries between holding and failing sit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from .errors import MapError, MetricError, ParseError, SizeMismatch

_INT64_SAFE = 2**61


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, an int or a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                return Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"not a rational: {value!r}") from exc
        try:
            return Fraction(int(text))
        except ValueError as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    raise ParseError(f"not a rational: {value!r} (floats are not accepted)")


def fmt_rational(value) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def cycle_decomposition(perm: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = perm[x]
        cycles.append(tuple(cyc))
    return cycles


def perm_order(perm: Sequence[int]) -> int:
    return reduce(math.lcm, (len(c) for c in cycle_decomposition(perm)), 1)


def check_permutation(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(perm)
    if len(perm) != n:
        raise MapError(f"map has length {len(perm)}, expected {n}")
    for v in perm:
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n:
            raise MapError(f"map entry {v!r} is not an index in 0..{n - 1}")
    if len(set(perm)) != n:
        missing = sorted(set(range(n)) - set(perm))
        raise MapError(f"map is not a permutation: indices {missing} never hit")
    return perm


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """p after q."""
    return tuple(p[q[i]] for i in range(len(q)))


def perm_power(perm: Sequence[int], k: int) -> tuple[int, ...]:
    n = len(perm)
    if k < 0:
        inv = [0] * n
        for i, v in enumerate(perm):
            inv[v] = i
        perm, k = inv, -k
    result = tuple(range(n))
    base = tuple(perm)
    while k:
        if k & 1:
            result = compose(base, result)
        base = compose(base, base)
        k >>= 1
    return result


def scaled_integer_matrix(matrix) -> tuple[np.ndarray, int]:
    """Return ``(M, den)`` with ``matrix[i][j] == M[i, j] / den`` exactly."""
    den = 1
    for row in matrix:
        for v in row:
            den = math.lcm(den, v.denominator)
    ints = [[v.numerator * (den // v.denominator) for v in row] for row in matrix]
    biggest = max((abs(v) for row in ints for v in row), default=0)
    dtype = np.int64 if biggest < _INT64_SAFE else object
    return np.array(ints, dtype=dtype).reshape(len(ints), len(ints)), den


@dataclass(frozen=True)
class OrbitIndex:
    cycles: tuple[tuple[int, ...], ...]
    period_of: tuple[int, ...]
    order: int

    @classmethod
    def of(cls, perm: Sequence[int]) -> "OrbitIndex":
        cycles = cycle_decomposition(perm)
        period = [0] * len(perm)
        for c in cycles:
            for x in c:
                period[x] = len(c)
        order = reduce(math.lcm, (len(c) for c in cycles), 1)
        return cls(tuple(cycles), tuple(period), order)


@dataclass(frozen=True)
class FiniteMetricSystem:
    """Finite point set, exact metric, permutation. Immutable once built."""

    points: tuple[str, ...]
    metric: tuple[tuple[Fraction, ...], ...]
    map: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        points = tuple(str(p) for p in self.points)
        n = len(points)
        if n < 1:
            raise MetricError("a system needs at least one point")
        if len(set(points)) != n:
            raise ParseError("point identifiers must be distinct")
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise MetricError(f"metric must be a {n}x{n} matrix")
        metric = tuple(tuple(parse_rational(v) for v in row) for row in self.metric)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "map", check_permutation(self.map, n))
        self._check_metric()

    def _check_metric(self):
        m, pts = self.metric, self.points
        n = len(pts)
        for i in range(n):
            if m[i][i] != 0:
                raise MetricError(f"d({pts[i]},{pts[i]}) = {fmt_rational(m[i][i])} is not zero")
            for j in range(i + 1, n):
                if m[i][j] != m[j][i]:
                    raise MetricError(
                        f"asymmetric metric: d({pts[i]},{pts[j]}) = {fmt_rational(m[i][j])}"
                        f" but d({pts[j]},{pts[i]}) = {fmt_rational(m[j][i])}")
                if m[i][j] <= 0:
                    raise MetricError(
                        f"d({pts[i]},{pts[j]}) = {fmt_rational(m[i][j])} must be positive")
        M = self._scaled[0]
        for k in range(n):
            bad = M > (M[:, k][:, None] + M[k, :][None, :])
            if bad.any():
                i, j = (int(v) for v in np.argwhere(bad)[0])
                raise MetricError(
                    f"triangle inequality fails for triple ({pts[i]},{pts[k]},{pts[j]}): "
                    f"d({pts[i]},{pts[j]}) = {fmt_rational(m[i][j])} > "
                    f"{fmt_rational(m[i][k])} + {fmt_rational(m[k][j])}")

    # -- basic structure --------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, point) -> int:
        if isinstance(point, int) and not isinstance(point, bool):
            if not 0 <= point < self.n:
                raise ParseError(f"point index {point} out of range")
            return point
        try:
            return self._index_of[str(point)]
        except KeyError:
            raise ParseError(f"unknown point {point!r}") from None

    @cached_property
    def _index_of(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def _scaled(self) -> tuple[np.ndarray, int]:
        return scaled_integer_matrix(self.metric)

    def d(self, x: int, y: int) -> Fraction:
        return self.metric[x][y]

    @cached_property
    def orbits(self) -> OrbitIndex:
        return OrbitIndex.of(self.map)

    @property
    def cycles(self):
        return self.orbits.cycles

    @property
    def period_of(self):
        return self.orbits.period_of

    @property
    def order(self) -> int:
        return self.orbits.order

    @cached_property
    def diameter(self) -> Fraction:
        return max(max(row) for row in self.metric)

    def power(self, k: int) -> tuple[int, ...]:
        return perm_power(self.map, k)

    @cached_property
    def inverse_map(self) -> tuple[int, ...]:
        return perm_power(self.map, -1)

    def orbit(self, x: int, length: int) -> list[int]:
        out = []
        for _ in range(length):
            out.append(x)
            x = self.map[x]
        return out

    def pair_period(self, x: int, y: int) -> int:
        return math.lcm(self.period_of[x], self.period_of[y])

    # -- orbit sup distance ----------------------------------------------

    @cached_property
    def _orbit_sup_scaled(self) -> np.ndarray:
        M, _ = self._scaled
        D = M.copy()
        p = np.arange(self.n)
        f = np.array(self.map)
        for _ in range(self.order - 1):
            p = f[p]
            np.maximum(D, M[np.ix_(p, p)], out=D)
        return D

    @cached_property
    def orbit_sup_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        """D(x, y) = sup over n in Z of d(f^n x, f^n y), for every pair."""
        D, den = self._orbit_sup_scaled, self._scaled[1]
        return tuple(tuple(Fraction(int(v), den) for v in row) for row in D)

    def orbit_sup(self, x: int, y: int) -> Fraction:
        return self.orbit_sup_matrix[x][y]

    def pairs(self):
        """Unordered pairs of distinct points, lexicographic."""
        n = self.n
        for x in range(n):
            for y in range(x + 1, n):
                yield x, y

    # -- derived systems -------------------------------------------------

    def with_metric(self, metric, name: str = "") -> "FiniteMetricSystem":
        return FiniteMetricSystem(self.points, metric, self.map, name=name)

    def with_map(self, perm, name: str = "") -> "FiniteMetricSystem":
        return FiniteMetricSystem(self.points, self.metric, perm, name=name)

    def __repr__(self):
        label = self.name or "system"
        return f"<FiniteMetricSystem {label}: n={self.n}, order={self.order}, diam={fmt_rational(self.diameter)}>"


# -- file format ---------------------------------------------------------------

def load_system(source, name: str = "") -> FiniteMetricSystem:
    """Parse the JSON system format (text or already-decoded dict) and validate it."""
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        data = source
    if not isinstance(data, dict):
        raise ParseError("system file must be a JSON object")
    for key in ("points", "metric", "map"):
        if key not in data:
            raise ParseError(f"system file lacks {key!r}")
    points, metric, perm = data["points"], data["metric"], data["map"]
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise ParseError("'points' must be a list of strings")
    if not isinstance(metric, list) or not all(isinstance(r, list) for r in metric):
        raise ParseError("'metric' must be a list of lists")
    if not isinstance(perm, list):
        raise ParseError("'map' must be a list of indices")
    n = len(points)
    if len(metric) != n or any(len(r) != n for r in metric):
        raise ParseError(f"'metric' must be {n}x{n}")
    rows = tuple(tuple(parse_rational(v) for v in r) for r in metric)
    return FiniteMetricSystem(tuple(points), rows, tuple(perm), name=name or data.get("name", ""))


def dump_system(sys: FiniteMetricSystem) -> dict:
    out = {}
    if sys.name:
        out["name"] = sys.name
    out["points"] = list(sys.points)
    out["metric"] = [[fmt_rational(v) for v in row] for row in sys.metric]
    out["map"] = list(sys.map)
    return out


# -- operations ----------------------------------------------------------------

def orbit_sup_distance(sys: FiniteMetricSystem, x, y) -> Fraction:
    """max over 0 <= n < lcm(period x, period y) of d(f^n x, f^n y)."""
    return sys.orbit_sup(sys.index(x), sys.index(y))


def c0_distance(sys: FiniteMetricSystem, g: Sequence[int]) -> Fraction:
    """C0 distance max_x d(f x, g x) between the system map and a permutation g."""
    if len(g) != sys.n:
        raise SizeMismatch(f"permutation of size {len(g)} on a {sys.n}-point space")
    g = check_permutation(g, sys.n)
    return max(sys.d(sys.map[x], g[x]) for x in range(sys.n))


def product_system(sys1: FiniteMetricSystem, sys2: FiniteMetricSystem,
                   w1=1, w2=1) -> FiniteMetricSystem:
    """Cartesian product with metric w1*d1 + w2*d2 and the product map."""
    w1, w2 = parse_rational(w1), parse_rational(w2)
    if w1 <= 0 or w2 <= 0:
        raise MetricError("product weights must be positive")
    pairs = [(a, b) for a in range(sys1.n) for b in range(sys2.n)]
    points = tuple(f"({sys1.points[a]},{sys2.points[b]})" for a, b in pairs)
    metric = tuple(
        tuple(w1 * sys1.d(a, c) + w2 * sys2.d(b, e) for c, e in pairs)
        for a, b in pairs)
    pos = {p: i for i, p in enumerate(pairs)}
    perm = tuple(pos[(sys1.map[a], sys2.map[b])] for a, b in pairs)
    name = f"{sys1.name or 'M1'}x{sys2.name or 'M2'}"
    return FiniteMetricSystem(points, metric, perm, name=name)
