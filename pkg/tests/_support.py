"""Shared builders for the test suite."""

import itertools

import numpy as np
from scipy.optimize import linprog

from shallowrelu.construct import OrderPlan, default_universal_globals
from shallowrelu.geometry import Hyperplane, StrictPartialOrder, build_arrangement
from shallowrelu.network import AffinePiece, ReluNetwork, ReluUnit, extract_pieces
from shallowrelu.spline1d import Spline1D

CANONICAL_KNOTS = (0.25, 0.5, 0.75)
CANONICAL_SLOPES = (1.0, -1.0, 2.0, 0.0)


def canonical_spline():
    return Spline1D.from_slopes(CANONICAL_KNOTS, CANONICAL_SLOPES, 0.0)


def random_spline(rng, zeta=None, max_pieces=8):
    zeta = int(rng.integers(1, max_pieces + 1)) if zeta is None else zeta
    while True:
        knots = np.sort(rng.uniform(0.02, 0.98, zeta - 1))
        if zeta == 1 or np.diff(np.concatenate([[0.0], knots, [1.0]])).min() > 0.01:
            break
    return Spline1D.from_slopes(knots, rng.uniform(-5, 5, zeta), float(rng.uniform(-1, 1)))


def dense_1d(count=10_000):
    return np.linspace(0.0, 1.0, count)


def random_network_on(hs, rng, extra=()):
    """Network with one unit per hyperplane (plus extras) and random output weights."""
    units = [ReluUnit(h.w, h.b, float(rng.normal())) for h in list(hs) + list(extra)]
    return ReluNetwork(len(units[0].w), units)


def three_chain_topology():
    """Three chains sharing a hub, the third starting from an uncovered cell.

    Diagonal bands x+y = 0.3, 0.6, 0.9, 1.6 form the first chain; two knots
    on y-x clip the upper-left corner of the second band; a last knot on
    y-x clips the corner of the fourth band. Three cells end up in no chain.
    """
    s = np.array([1.0, 1.0])
    d = np.array([-1.0, 1.0])
    hs = [Hyperplane(s, -c, i) for i, c in zip((5, 6, 7, 8), (0.3, 0.6, 0.9, 1.6))]
    hs += [Hyperplane(d, -0.5, 9), Hyperplane(d, -0.6, 10), Hyperplane(d, -0.95, 4)]
    a = build_arrangement(2, hs)

    def loc(x, y):
        return int(a.locate(np.array([[x, y]]))[0])

    hub = loc(0.1, 0.1)
    p1 = StrictPartialOrder([5, 6, 7, 8], [loc(.3, .15), loc(.4, .3), loc(.7, .5), loc(.9, .9)], hub)
    p2 = StrictPartialOrder([9, 10], [loc(.1, .65), loc(.05, .7)], loc(.3, .45))
    p3 = StrictPartialOrder([4], [loc(.01, .99)], loc(.2, .9))
    return a, OrderPlan([p1, p2, p3], default_universal_globals(2), hub)


def three_chain_target(seed=1):
    a, plan = three_chain_topology()
    rng = np.random.default_rng(seed)
    net = random_network_on(a.hyperplanes, rng, plan.universal_globals)
    return a, plan, net, extract_pieces(net)


def samples_in(a, regions, rng, per_region=200):
    """Uniform samples kept only where they fall in the given regions."""
    X = rng.uniform(size=(per_region * max(1, len(a.regions)) * 4, a.n))
    idx = a.locate(X)
    keep = np.isin(idx, list(regions))
    return X[keep]


def additive_boundary(grid, rng):
    """Boundary pieces of f = sum of random 1D continuous splines on the grid knots."""
    slopes = [rng.uniform(-3, 3, M) for M in grid.per_axis]

    def f_piece(v):
        w = np.array([slopes[k][v[k]] for k in range(grid.n)])
        b = 0.0
        for k in range(grid.n):
            M = grid.per_axis[k]
            for j in range(1, v[k] + 1):
                b += (slopes[k][j - 1] - slopes[k][j]) * j / M
        return AffinePiece(w, b)
    return f_piece


def brute_force_regions(n, hs, radius=1e-7):
    """All sign vectors whose open cell inside the box has an inscribed ball."""
    out = set()
    for signs in itertools.product((1, -1), repeat=len(hs)):
        A, c = [], []
        for s, h in zip(signs, hs):
            nrm = np.linalg.norm(h.w)
            A.append(np.append(-s * h.w, nrm))
            c.append(s * h.b)
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1
            A.append(np.append(-e, 1.0))
            c.append(0.0)
            A.append(np.append(e, 1.0))
            c.append(1.0)
        res = linprog(np.append(np.zeros(n), -1.0), A_ub=np.array(A), b_ub=np.array(c),
                      bounds=[(None, None)] * n + [(0, 1)], method="highs")
        if res.status == 0 and -res.fun > radius:
            out.add(signs)
    return out
