"""Fixture generators: cycles, lines, weighted products and random systems."""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import BadParameters
from .systems import FiniteMetricSystem, parse_rational, product_system


def cycle(n: int) -> FiniteMetricSystem:
    """n points pairwise at distance 1, map i -> i+1 mod n."""
    if n < 1:
        raise BadParameters("cycle needs n >= 1")
    metric = [[Fraction(int(i != j)) for j in range(n)] for i in range(n)]
    perm = [(i + 1) % n for i in range(n)]
    return FiniteMetricSystem(tuple(str(i) for i in range(n)), metric, perm, name=f"C{n}")


def line(n: int, perm=None) -> FiniteMetricSystem:
    """Points 0..n-1 with d(i, j) = |i - j|; identity map unless one is given."""
    if n < 1:
        raise BadParameters("line needs n >= 1")
    metric = [[Fraction(abs(i - j)) for j in range(n)] for i in range(n)]
    perm = list(range(n)) if perm is None else list(perm)
    name = f"L{n}-id" if perm == list(range(n)) else f"L{n}"
    return FiniteMetricSystem(tuple(str(i) for i in range(n)), metric, perm, name=name)


def two_point(distance=2, swap: bool = False) -> FiniteMetricSystem:
    distance = parse_rational(distance)
    if distance <= 0:
        raise BadParameters("distance must be positive")
    metric = [[Fraction(0), distance], [distance, Fraction(0)]]
    return FiniteMetricSystem(("a", "b"), metric, (1, 0) if swap else (0, 1), name="P2")


def point() -> FiniteMetricSystem:
    return FiniteMetricSystem(("*",), [[Fraction(0)]], (0,), name="pt")


def product(sys1, sys2, w1=1, w2=1) -> FiniteMetricSystem:
    return product_system(sys1, sys2, w1, w2)


def interval_product(sys: FiniteMetricSystem, k: int, alpha) -> FiniteMetricSystem:
    """sys x {0, 1/(k-1), ..., 1} with metric d(x,y) + (alpha/3)|s-t|, map (fx, s).

    A k-point discretisation of the interval factor, so it approximates the
    continuum product rather than reproducing it.
    """
    if k < 1:
        raise BadParameters("grid needs k >= 1")
    alpha = parse_rational(alpha)
    if alpha <= 0:
        raise BadParameters("alpha must be positive")
    ts = [Fraction(i, k - 1) if k > 1 else Fraction(0) for i in range(k)]
    grid = FiniteMetricSystem(
        tuple(str(t) for t in ts),
        [[abs(s - t) for t in ts] for s in ts],
        tuple(range(k)), name=f"I{k}")
    return product_system(sys, grid, 1, alpha / 3)


def random_system(n: int, seed: int = 0, max_weight: int = 4,
                  edge_prob: float = 0.6) -> FiniteMetricSystem:
    """Random integer edge weights completed by shortest paths, random permutation.

    Shortest-path completion of a connected weighted graph always yields a
    metric, so the result is valid by construction.
    """
    if n < 1 or max_weight < 1:
        raise BadParameters("need n >= 1 and max_weight >= 1")
    rng = random.Random(seed)
    inf = float("inf")
    dist = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    # spanning path keeps the graph connected
    order = list(range(n))
    rng.shuffle(order)
    for a, b in zip(order, order[1:]):
        w = rng.randint(1, max_weight)
        dist[a][b] = dist[b][a] = w
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] == inf and rng.random() < edge_prob:
                w = rng.randint(1, max_weight)
                dist[i][j] = dist[j][i] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dist[i][k] + dist[k][j] < dist[i][j]:
                    dist[i][j] = dist[i][k] + dist[k][j]
    perm = list(range(n))
    rng.shuffle(perm)
    metric = [[Fraction(int(dist[i][j])) for j in range(n)] for i in range(n)]
    return FiniteMetricSystem(tuple(str(i) for i in range(n)), metric, perm,
                              name=f"rand{n}-s{seed}")


def generate_fixture(kind: str, **params) -> FiniteMetricSystem:
    if kind == "cycle":
        return cycle(int(params.get("n", 3)))
    if kind == "line":
        return line(int(params.get("n", 4)), params.get("map"))
    if kind == "product":
        left = params.get("left") or two_point(2)
        right = params.get("right") or two_point(2)
        return product_system(left, right, params.get("w1", 2), params.get("w2", Fraction(1, 3)))
    if kind == "interval":
        base = params.get("base") or cycle(3)
        return interval_product(base, int(params.get("k", 3)), params.get("alpha", 1))
    if kind == "random":
        return random_system(int(params.get("n", 6)), int(params.get("seed", 0)),
                             int(params.get("max_weight", 4)))
    raise BadParameters(f"unknown fixture kind {kind!r}")
