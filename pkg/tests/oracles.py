"""Brute-force reference implementations, written straight from the definitions.

Nothing here reuses the library's shortcuts (pair periods, threshold algebra,
subset construction, bitmasks); they only share FiniteMetricSystem for
storage and the metric lookup.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def iterate(perm, x, n):
    for _ in range(n):
        x = perm[x]
    return x


def inverse(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def full_order(perm):
    # smallest k >= 1 with perm^k = id, by stepping
    k, cur = 1, list(perm)
    while cur != list(range(len(perm))):
        cur = [perm[c] for c in cur]
        k += 1
    return k


def orbit_sup(sys, x, y):
    """sup over n in [-order, order] of d(f^n x, f^n y)."""
    f, finv, N = sys.map, inverse(sys.map), full_order(sys.map)
    best = Fraction(0)
    a, b, c, e = x, y, x, y
    for _ in range(N + 1):
        best = max(best, sys.d(a, b), sys.d(c, e))
        a, b, c, e = f[a], f[b], finv[c], finv[e]
    return best


def window_sup(sys, x, y, N):
    f, finv = sys.map, inverse(sys.map)
    return max(max(sys.d(iterate(f, x, k), iterate(f, y, k)), sys.d(iterate(finv, x, k), iterate(finv, y, k)))
               for k in range(N + 1))


def eps_alpha_window(sys, eps, alpha, N=None):
    """[eps, alpha]-expansiveness in its window form with half-width N (default: order)."""
    N = full_order(sys.map) if N is None else N
    for x in range(sys.n):
        for y in range(sys.n):
            if window_sup(sys, x, y, N) <= alpha and not sys.d(x, y) < eps:
                return False
    return True


def minimal_window(sys, eps, alpha):
    N = 0
    while not eps_alpha_window(sys, eps, alpha, N):
        N += 1
    return N


def hausdorff(sys, A, B):
    return max(max(min(sys.d(a, b) for b in B) for a in A),
               max(min(sys.d(a, b) for a in A) for b in B))


def relation_classes(sys, alpha):
    """Classes of D <= alpha if it is an equivalence, else None."""
    n = sys.n
    rel = [[orbit_sup(sys, x, y) <= alpha for y in range(n)] for x in range(n)]
    for x, y, z in itertools.product(range(n), repeat=3):
        if rel[x][y] and rel[y][z] and not rel[x][z]:
            return None
    return sorted({tuple(y for y in range(n) if rel[x][y]) for x in range(n)})


def cover_related(sys, cover, x, y):
    N = full_order(sys.map)
    a, b = x, y
    for _ in range(N):
        if not any(a in s and b in s for s in cover):
            return False
        a, b = sys.map[a], sys.map[b]
    return True


def chain_unions(cover, k):
    out = set()
    for chain in itertools.product(cover, repeat=k):
        if all(set(chain[i]) & set(chain[i + 1]) for i in range(k - 1)):
            out.add(frozenset().union(*map(frozenset, chain)))
    return out


def shadowed(sys, seq, eps):
    """Is the periodic sequence seq eps-shadowed by some true orbit?"""
    for z in range(sys.n):
        L = math.lcm(len(seq), full_order(sys.map))
        if all(sys.d(iterate(sys.map, z, k), seq[k % len(seq)]) < eps for k in range(L)):
            return True
    return False


def periodic_pseudo_orbits(sys, delta, max_period):
    for P in range(1, max_period + 1):
        for seq in itertools.product(range(sys.n), repeat=P):
            if all(sys.d(sys.map[seq[k]], seq[(k + 1) % P]) < delta for k in range(P)):
                yield seq


def shadowing_by_periodic(sys, eps, delta, max_period):
    return all(shadowed(sys, s, eps) for s in periodic_pseudo_orbits(sys, delta, max_period))


def semiconjugacies_in_ball(q, g, radius):
    """All class maps h with f_R h = h g and d_R(h(x), q(x)) < radius, by full enumeration."""
    Q = q.quotient
    out = []
    for h in itertools.product(range(Q.n), repeat=q.base.n):
        if all(Q.map[h[x]] == h[g[x]] for x in range(q.base.n)) and \
                all(Q.d(h[x], q.projection[x]) < radius for x in range(q.base.n)):
            out.append(h)
    return out


def sigma_distance(base, xi, eta):
    """Weighted sum over k in [-K, K] of d(x_k, y_k) 2^-|k|, plus its exact tail bound."""
    P = len(xi)
    total = Fraction(0)
    K = 40 * P
    for k in range(-K, K + 1):
        total += base.d(xi[k % P], eta[k % P]) / Fraction(2) ** abs(k)
    tail = 2 * base.diameter / Fraction(2) ** K
    return total, tail
