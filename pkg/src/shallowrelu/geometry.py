"""Hyperplane arrangements inside the unit box U = [0,1]^n.

Regions are built by incremental splitting: every existing cell is split
by a new hyperplane only when both halves keep a full-dimensional
interior, judged by a Chebyshev-center LP. The box faces enter only as LP
constraints and are never part of the arrangement.
"""

from dataclasses import dataclass, field
from enum import Enum
import itertools

import numpy as np

from .lp import chebyshev_center, maximize_free

SIDE_TOL = 1e-9
RADIUS_TOL = 1e-7
COINCIDE_TOL = 1e-9


class Side(Enum):
    POSITIVE = 1
    ZERO = 0
    NEGATIVE = -1


class Hyperplane:
    """Oriented affine functional w.x + b; (w, b) and (-w, -b) differ."""

    __slots__ = ("w", "b", "id")

    def __init__(self, w, b, id=0):
        w = np.atleast_1d(np.asarray(w, dtype=float)).copy()
        if w.ndim != 1:
            raise ValueError("w must be a vector")
        if not np.all(np.isfinite(w)) or not np.isfinite(b):
            raise ValueError("hyperplane coefficients must be finite")
        if np.linalg.norm(w) == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        w.setflags(write=False)
        self.w = w
        self.b = float(b)
        self.id = int(id)

    @property
    def n(self):
        return self.w.size

    @property
    def norm(self):
        return float(np.linalg.norm(self.w))

    def unit(self):
        s = self.norm
        return self.w / s, self.b / s

    def value(self, x):
        return np.asarray(x, float) @ self.w + self.b

    def negative(self, id=None):
        return Hyperplane(-self.w, -self.b, self.id if id is None else id)

    def with_id(self, id):
        return Hyperplane(self.w, self.b, id)

    def __repr__(self):
        return f"Hyperplane(w={self.w.tolist()}, b={self.b}, id={self.id})"

    def __eq__(self, other):
        return (isinstance(other, Hyperplane) and self.id == other.id and self.b == other.b
                and np.array_equal(self.w, other.w))

    def __hash__(self):
        return hash((self.id, self.b, self.w.tobytes()))


def side_of(h: Hyperplane, x) -> Side:
    x = np.atleast_1d(np.asarray(x, float))
    if x.shape != h.w.shape:
        raise ValueError(f"dimension mismatch: point has {x.size} coordinates, hyperplane {h.n}")
    u, beta = h.unit()
    v = float(u @ x + beta)
    if v > SIDE_TOL:
        return Side.POSITIVE
    if v < -SIDE_TOL:
        return Side.NEGATIVE
    return Side.ZERO


def same_geometric_plane(h1: Hyperplane, h2: Hyperplane, tol=COINCIDE_TOL):
    """Return +1 if h1, h2 coincide with the same orientation, -1 if opposite, 0 otherwise."""
    u1, b1 = h1.unit()
    u2, b2 = h2.unit()
    a = np.append(u1, b1)
    c = np.append(u2, b2)
    if np.abs(a - c).max() <= tol:
        return 1
    if np.abs(a + c).max() <= tol:
        return -1
    return 0


def box_constraints(n):
    A = np.vstack([-np.eye(n), np.eye(n)])
    c = np.concatenate([np.zeros(n), np.ones(n)])
    return A, c


@dataclass(frozen=True)
class Region:
    signs: tuple
    witness: np.ndarray
    radius: float


@dataclass(frozen=True)
class Facet:
    center: np.ndarray
    basis: np.ndarray  # n x (n-1), orthonormal directions inside the facet
    radius: float      # inscribed radius measured inside the facet

    def points(self):
        """Affinely spanning points of the facet, plus one extra when n >= 2."""
        k = self.basis.shape[1]
        if k == 0:
            return self.center[None, :]
        step = 0.5 * self.radius
        pts = [self.center]
        pts += [self.center + step * self.basis[:, j] for j in range(k)]
        pts.append(self.center - step * self.basis[:, 0])
        return np.array(pts)


def _null_space(E, tol=1e-10):
    n = E.shape[1]
    if E.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(E)
    rank = int((s > tol * max(1.0, s.max())).sum())
    return vt[rank:].T


def polytope_dimension(EA, eb, A, c, n):
    """Dimension of {x : EA x + eb = 0, A x <= c}.

    Returns (dim, point, basis, radius); dim is -1 for the empty set.
    Implicit equalities are detected by maximizing each slack.
    """
    EA = np.zeros((0, n)) if EA is None else np.atleast_2d(np.asarray(EA, float)).reshape(-1, n)
    eb = np.zeros(0) if eb is None else np.asarray(eb, float).ravel()
    A = np.asarray(A, float)
    c = np.asarray(c, float)
    while True:
        if EA.shape[0]:
            x0, *_ = np.linalg.lstsq(EA, -eb, rcond=None)
            if np.abs(EA @ x0 + eb).max() > 1e-9:
                return -1, None, None, -np.inf
        else:
            x0 = np.zeros(n)
        N = _null_space(EA)
        k = N.shape[1]
        if k == 0:
            if np.all(A @ x0 <= c + SIDE_TOL):
                return 0, x0, N, 0.0
            return -1, None, None, -np.inf
        At = A @ N
        ct = c - A @ x0
        t, r = chebyshev_center(At, ct)
        if t is None:
            return -1, None, None, -np.inf
        if r > RADIUS_TOL:
            return k, x0 + N @ t, N, r
        # nonempty but thin: promote the tightest constraint(s) to equalities
        norms = np.linalg.norm(At, axis=1)
        live = np.nonzero(norms > 1e-12)[0]
        slacks = []
        for i in live:
            res = maximize_free(-At[i], At, ct)
            smax = ct[i] + res.value if res.status == "optimal" else np.inf
            slacks.append(smax / norms[i])
        slacks = np.array(slacks)
        tight = live[slacks <= RADIUS_TOL]
        if tight.size == 0:
            tight = live[[int(np.argmin(slacks))]]
        EA = np.vstack([EA, A[tight]])
        eb = np.concatenate([eb, -c[tight]])


class Arrangement:
    """Immutable arrangement of oriented hyperplanes clipped to U."""

    def __init__(self, n, hyperplanes, regions, adjacency):
        self.n = int(n)
        self.hyperplanes = list(hyperplanes)
        self.regions = list(regions)
        self.adjacency = dict(adjacency)
        self._pos = {h.id: k for k, h in enumerate(self.hyperplanes)}
        if len(self._pos) != len(self.hyperplanes):
            raise ValueError("hyperplane ids must be unique")
        self._by_signs = {r.signs: i for i, r in enumerate(self.regions)}
        self._facets = {}
        self._classes = None
        U = [h.unit() for h in self.hyperplanes]
        self._W = np.array([u for u, _ in U]).reshape(len(U), self.n)
        self._B = np.array([b for _, b in U])

    # lookups
    def position(self, hid):
        return self._pos[hid]

    def hyperplane(self, hid):
        return self.hyperplanes[self._pos[hid]]

    def sign(self, region, hid):
        return self.regions[region].signs[self._pos[hid]]

    def region_by_signs(self, signs):
        return self._by_signs.get(tuple(signs))

    def neighbors(self, i):
        out = []
        for (a, b), hid in self.adjacency.items():
            if a == i:
                out.append((b, hid))
            elif b == i:
                out.append((a, hid))
        return sorted(out)

    def separating(self, i, j):
        return self.adjacency.get((min(i, j), max(i, j)))

    def coincidence_classes(self):
        """Groups of hyperplane positions lying on the same geometric plane."""
        if self._classes is None:
            classes = []
            for k, h in enumerate(self.hyperplanes):
                for cl in classes:
                    if same_geometric_plane(self.hyperplanes[cl[0]], h):
                        cl.append(k)
                        break
                else:
                    classes.append([k])
            self._classes = classes
        return self._classes

    def class_of(self, hid):
        k = self._pos[hid]
        for cl in self.coincidence_classes():
            if k in cl:
                return cl
        raise KeyError(hid)

    def polytope(self, i):
        """Halfspace description A x <= c of region i (box included)."""
        s = np.array(self.regions[i].signs, dtype=float)
        A0, c0 = box_constraints(self.n)
        if s.size == 0:
            return A0, c0
        A = -s[:, None] * self._W
        c = s * self._B
        return np.vstack([A, A0]), np.concatenate([c, c0])

    def signs_at(self, X):
        """Sign matrix of points (ties go to +)."""
        X = np.atleast_2d(np.asarray(X, float))
        if not self.hyperplanes:
            return np.zeros((X.shape[0], 0), dtype=int)
        V = X @ self._W.T + self._B
        return np.where(V >= 0, 1, -1)

    def locate(self, X):
        """Region index for every point; points on knots go to either side."""
        X = np.atleast_2d(np.asarray(X, float))
        if not self.hyperplanes:
            return np.zeros(X.shape[0], dtype=int)
        V = X @ self._W.T + self._B
        S = np.where(V >= 0, 1, -1)
        out = np.empty(X.shape[0], dtype=int)
        for p in range(X.shape[0]):
            idx = self._by_signs.get(tuple(S[p]))
            if idx is None:
                # point sits in a sliver thinner than the feasibility tolerance
                margins = [np.min(np.array(r.signs) * V[p]) for r in self.regions]
                idx = int(np.argmax(margins))
            out[p] = idx
        return out

    def facet(self, i, j):
        """Shared facet of two adjacent regions (cached)."""
        key = (min(i, j), max(i, j))
        if key not in self._facets:
            si = np.array(self.regions[i].signs)
            sj = np.array(self.regions[j].signs)
            diff = si != sj
            A, c = self.polytope(i)
            keep = np.concatenate([~diff, np.ones(2 * self.n, bool)])
            EA = self._W[diff][:1]
            eb = self._B[diff][:1]
            dim, x, N, r = polytope_dimension(EA, eb, A[keep], c[keep], self.n)
            self._facets[key] = (dim, Facet(x, N, r) if dim >= 0 else None)
        return self._facets[key]

    def reoriented(self, flip_ids):
        """Same cells with the given hyperplanes replaced by their negative forms."""
        flip = {self._pos[h] for h in flip_ids}
        hs = [h.negative() if k in flip else h for k, h in enumerate(self.hyperplanes)]
        regions = [Region(tuple(-s if k in flip else s for k, s in enumerate(r.signs)), r.witness, r.radius)
                   for r in self.regions]
        out = Arrangement(self.n, hs, regions, self.adjacency)
        out._facets = self._facets
        return out

    def to_dict(self):
        return {
            "n": self.n,
            "hyperplanes": [{"id": h.id, "w": h.w.tolist(), "b": h.b} for h in self.hyperplanes],
            "regions": [{"signs": "".join("+" if s > 0 else "-" for s in r.signs),
                         "witness": r.witness.tolist(), "radius": r.radius} for r in self.regions],
            "adjacency": [[i, j, hid] for (i, j), hid in sorted(self.adjacency.items())],
        }

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        hs = [Hyperplane(h["w"], h["b"], h["id"]) for h in d["hyperplanes"]]
        for h in hs:
            if h.n != n:
                raise ValueError("hyperplane dimension does not match n")
        regions = []
        for r in d["regions"]:
            signs = tuple(1 if ch == "+" else -1 for ch in r["signs"])
            if len(signs) != len(hs) or any(ch not in "+-" for ch in r["signs"]):
                raise ValueError("region sign vector does not match the hyperplanes")
            regions.append(Region(signs, np.asarray(r["witness"], float), float(r["radius"])))
        adj = {(min(i, j), max(i, j)): hid for i, j, hid in d["adjacency"]}
        return cls(n, hs, regions, adj)


def _cell(A, c):
    x, r = chebyshev_center(A, c)
    return x, r


def _compute_adjacency(a: Arrangement):
    adj = {}
    classes = a.coincidence_classes()
    for i, reg in enumerate(a.regions):
        for cl in classes:
            flipped = list(reg.signs)
            for k in cl:
                flipped[k] = -flipped[k]
            j = a.region_by_signs(tuple(flipped))
            if j is None or j <= i:
                continue
            dim, _ = a.facet(i, j)
            if dim == a.n - 1:
                adj[(i, j)] = a.hyperplanes[cl[0]].id
    return adj


def build_arrangement(n, hs) -> Arrangement:
    if n < 1:
        raise ValueError("n must be at least 1")
    hs = list(hs)
    for h in hs:
        if h.n != n:
            raise ValueError(f"hyperplane {h.id} has dimension {h.n}, expected {n}")
    A0, c0 = box_constraints(n)
    x, r = _cell(A0, c0)
    cells = [((), A0, c0, x, r)]
    for h in hs:
        u, beta = h.unit()
        out = []
        for signs, A, c, wit, rad in cells:
            d = float(u @ wit + beta)
            sides = {}
            for s in (1, -1):
                An = np.vstack([A, -s * u])
                cn = np.append(c, s * beta)
                if s * d > 0 and min(rad, abs(d)) > RADIUS_TOL:
                    sides[s] = (An, cn, None, None)  # known feasible
                else:
                    xs, rs = _cell(An, cn)
                    if rs > RADIUS_TOL:
                        sides[s] = (An, cn, xs, rs)
            if len(sides) == 2:
                for s in (1, -1):
                    An, cn, xs, rs = sides[s]
                    if xs is None:
                        xs, rs = _cell(An, cn)
                    out.append((signs + (s,), An, cn, xs, rs))
            else:
                # cell lies on one side; keep its witness
                s = next(iter(sides)) if sides else (1 if d >= 0 else -1)
                out.append((signs + (s,), np.vstack([A, -s * u]), np.append(c, s * beta), wit, rad))
        cells = out
    regions = [Region(tuple(s), np.asarray(x, float), float(r)) for s, _, _, x, r in cells]
    a = Arrangement(n, hs, regions, {})
    a.adjacency = _compute_adjacency(a)
    return a


def facet_dimension(a: Arrangement, r1: int, r2: int) -> int:
    if r1 == r2:
        raise ValueError("facet_dimension needs two distinct regions")
    s1 = np.array(a.regions[r1].signs)
    s2 = np.array(a.regions[r2].signs)
    diff = s1 != s2
    A, c = a.polytope(r1)
    keep = np.concatenate([~diff, np.ones(2 * a.n, bool)])
    dim, *_ = polytope_dimension(a._W[diff], a._B[diff], A[keep], c[keep], a.n)
    return dim


def grid_hyperplanes(per_axis):
    hs = []
    n = len(per_axis)
    for k, M in enumerate(per_axis):
        for j in range(1, M):
            w = np.zeros(n)
            w[k] = 1.0
            hs.append(Hyperplane(w, -j / M, len(hs)))
    return hs


def grid_arrangement(per_axis):
    """Axis grid x_k = j / M_k, built directly from cell index tuples.

    Regions are listed in lexicographic order of their index tuples.
    """
    per_axis = [int(M) for M in per_axis]
    if any(M < 1 for M in per_axis):
        raise ValueError("every axis needs at least one cell")
    n = len(per_axis)
    hs = grid_hyperplanes(per_axis)
    offs = np.cumsum([0] + [M - 1 for M in per_axis])
    radius = min(0.5 / M for M in per_axis)
    regions = []
    index = {}
    for t, idx in enumerate(itertools.product(*[range(M) for M in per_axis])):
        signs = []
        for k, M in enumerate(per_axis):
            signs += [1 if idx[k] >= j else -1 for j in range(1, M)]
        wit = np.array([(idx[k] + 0.5) / per_axis[k] for k in range(n)])
        regions.append(Region(tuple(signs), wit, radius))
        index[idx] = t
    adj = {}
    for idx, t in index.items():
        for k in range(n):
            if idx[k] + 1 < per_axis[k]:
                nb = list(idx)
                nb[k] += 1
                adj[(t, index[tuple(nb)])] = hs[offs[k] + idx[k]].id
    a = Arrangement(n, hs, regions, adj)
    a.grid_index = index
    return a


@dataclass
class StrictPartialOrder:
    chain: list
    ordered_regions: list
    initial_region: int | None = None

    def to_dict(self):
        return {"chain": list(self.chain), "regions": list(self.ordered_regions),
                "initial": self.initial_region}


@dataclass
class Verdict:
    holds: bool
    condition: str | None = None
    index: int | None = None

    def __bool__(self):
        return self.holds


def verify_order(a: Arrangement, o: StrictPartialOrder) -> Verdict:
    """Check the ordering conditions of a chain at region witnesses."""
    chain = list(o.chain)
    regs = list(o.ordered_regions)
    if not chain or len(chain) != len(regs):
        raise ValueError("chain and ordered regions must be non-empty and of equal length")
    for hid in chain:
        if hid not in a._pos:
            raise IndexError(f"unknown hyperplane id {hid}")
    for r in regs + ([o.initial_region] if o.initial_region is not None else []):
        if not 0 <= r < len(a.regions):
            raise IndexError(f"region index {r} out of range")
    if len(set(chain)) != len(chain):
        return Verdict(False, "distinct_hyperplanes", None)
    for nu in range(len(chain)):
        for mu in range(nu + 1):
            if a.sign(regs[nu], chain[mu]) < 0:
                return Verdict(False, "positive_sides", nu + 1)
        if nu == 0:
            continue
        for j in range(nu):
            if a.sign(regs[j], chain[nu]) > 0:
                return Verdict(False, "earlier_in_zero_side", nu + 1)
        if facet_dimension(a, regs[nu], regs[nu - 1]) != a.n - 1:
            return Verdict(False, "facet", nu + 1)
    if o.initial_region is not None:
        r0 = o.initial_region
        if a.sign(r0, chain[0]) > 0 or r0 in regs:
            return Verdict(False, "initial_region", 0)
        if facet_dimension(a, r0, regs[0]) != a.n - 1:
            return Verdict(False, "initial_region", 0)
        s0 = np.array(a.regions[r0].signs)
        s1 = np.array(a.regions[regs[0]].signs)
        cl = a.class_of(chain[0])
        if any(s0[k] != s1[k] for k in range(len(s0)) if k not in cl):
            return Verdict(False, "initial_region", 0)
    return Verdict(True)


def generate_translated_order(n, direction, offsets, orientation=1):
    """Parallel hyperplanes d.x = offset_i arranged as a chain over U.

    With orientation +1 the chain advances along d (increasing offsets);
    with -1 every hyperplane is in negative form and the chain runs back.
    """
    d = np.atleast_1d(np.asarray(direction, float))
    if d.size != n:
        raise ValueError("direction has the wrong dimension")
    d = d / np.linalg.norm(d)
    offsets = [float(t) for t in offsets]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise ValueError("offsets must be strictly increasing")
    lo, hi = float(np.minimum(d, 0).sum()), float(np.maximum(d, 0).sum())
    for t in offsets:
        if not lo < t < hi:
            raise ValueError(f"offset {t} outside ({lo}, {hi}), the range of d.x over U")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    seq = offsets if orientation == 1 else offsets[::-1]
    hs = [Hyperplane(orientation * d, -orientation * t, k) for k, t in enumerate(seq)]
    a = build_arrangement(n, hs)
    z = len(hs)
    regs = []
    for nu in range(1, z + 1):
        regs.append(a.region_by_signs(tuple([1] * nu + [-1] * (z - nu))))
    r0 = a.region_by_signs(tuple([-1] * z))
    o = StrictPartialOrder(list(range(z)), regs, r0)
    return a, o
