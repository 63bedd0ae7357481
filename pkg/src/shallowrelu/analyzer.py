"""Reading a trained or constructed network in terms of its building blocks.

Units are classified by how much of U their active side covers, grouped
when they share a hyperplane, and related to strict partial orders found
by a depth-first search over the network's own knots. Coverage reports
how many region pieces are explained by the orders plus continuity.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import (Arrangement, StrictPartialOrder, build_arrangement, same_geometric_plane,
                       verify_order)
from .network import PiecewiseLinear, ReluNetwork, check_continuity, pieces_on

TAU_GLOBAL = 0.02
TAU_DEAD = 0.001
ANGLE_TOL = 1e-6
MC_SAMPLES = 20000
MC_SEED = 0xA11CE
SEARCH_BUDGET = 50000

INACTIVATED = "Inactivated"
UNIVERSAL_GLOBAL = "UniversalGlobal"
GLOBAL_FOR_ORDER = "GlobalForOrder"
LOCAL_POSITIVE = "LocalPositive"
LOCAL_NEGATIVE = "LocalNegative"
DEGENERATE = "Degenerate"


@dataclass
class UnitLabel:
    unit: int
    cls: str
    equivalence_group: int | None = None
    redundant: bool = False
    bidirectional_partner: int | None = None
    active_fraction: float = 0.0

    def to_dict(self):
        return {"unit": self.unit, "class": self.cls, "equivalence_group": self.equivalence_group,
                "redundant": self.redundant, "bidirectional_partner": self.bidirectional_partner}


@dataclass
class OrderForest:
    arrangement: Arrangement
    orders: list
    trees: list
    uncovered: list
    hub: int | None = None


@dataclass
class CoverageReport:
    determined: list
    coverage: float
    trace: list = field(default_factory=list)  # (region, rule) in the order found


@dataclass
class AnalysisReport:
    labels: list
    forest: OrderForest
    coverage: float
    continuity: dict
    pieces: list

    @property
    def effective_units(self):
        return sum(1 for l in self.labels if l.cls not in (INACTIVATED, DEGENERATE))

    def count(self, cls):
        return sum(1 for l in self.labels if l.cls == cls)

    def to_dict(self):
        return {
            "labels": [l.to_dict() for l in self.labels],
            "orders": [o.to_dict() for o in self.forest.orders],
            "trees": [list(t) for t in self.forest.trees],
            "coverage": self.coverage,
            "continuity": dict(self.continuity),
            "pieces": [p.to_dict() for p in self.pieces],
        }


def _normalized(u):
    v = np.append(u.w, u.b)
    return v / np.linalg.norm(v)


def _basic_classes(net, samples=MC_SAMPLES, seed=MC_SEED):
    rng = np.random.Generator(np.random.Philox(seed))
    X = rng.uniform(size=(samples, net.n))
    out = []
    for u in net.units:
        if np.linalg.norm(u.w) <= 1e-12 * max(1.0, abs(u.b)):
            out.append((DEGENERATE, 1.0 if u.b > 0 else 0.0))
            continue
        frac = float(np.mean(X @ u.w + u.b > 0))
        if frac <= TAU_DEAD:
            out.append((INACTIVATED, frac))
        elif 1.0 - frac <= TAU_GLOBAL:
            out.append((UNIVERSAL_GLOBAL, frac))
        else:
            out.append((None, frac))
    return out


def _analysis_arrangement(net, local):
    """Arrangement of unit knots; in 1D every knot is oriented left to right."""
    hs = [u.hyperplane(i) for i, u in enumerate(net.units) if not u.degenerate]
    a = build_arrangement(net.n, hs)
    if net.n == 1:
        flips = [h.id for h in hs if h.w[0] < 0]
        return a, a.reoriented(flips)
    return a, a


def _search(a, elements, cls_of, nbr, used_regions, budget):
    """Longest chain over the given elements; returns (elems, regions, r0)."""
    best = [None]
    count = [0]

    sign = a.sign

    def extend(chain, regs, used_cls, r0):
        count[0] += 1
        if best[0] is None or len(chain) > len(best[0][0]):
            best[0] = (list(chain), list(regs), r0)
        if count[0] > budget:
            return
        last = regs[-1]
        for e in elements:
            c = cls_of[e]
            if c in used_cls:
                continue
            r2 = nbr[last].get(c)
            if r2 is None or r2 in used_regions or r2 in regs or r2 == r0:
                continue
            if sign(last, e) > 0 or sign(r2, e) < 0:
                continue
            if any(sign(r, e) > 0 for r in regs):
                continue
            if any(sign(r2, f) < 0 for f in chain):
                continue
            chain.append(e)
            regs.append(r2)
            used_cls.add(c)
            extend(chain, regs, used_cls, r0)
            chain.pop()
            regs.pop()
            used_cls.discard(c)
            if count[0] > budget:
                return

    for e in elements:
        c = cls_of[e]
        starts = []
        for r in range(len(a.regions)):
            r1 = nbr[r].get(c)
            if r1 is None or r1 in used_regions:
                continue
            if sign(r, e) < 0 and sign(r1, e) > 0:
                starts.append((r, r1))
        for r0, r1 in starts:
            extend([e], [r1], {c}, r0)
            if count[0] > budget:
                break
    return best[0]


def detect_orders(net: ReluNetwork, basic=None) -> OrderForest:
    basic = basic or _basic_classes(net)
    local = [i for i, (c, _) in enumerate(basic) if c is None]
    _, a = _analysis_arrangement(net, local)
    classes = a.coincidence_classes()
    cls_of = {}
    for ci, cl in enumerate(classes):
        for pos in cl:
            cls_of[a.hyperplanes[pos].id] = ci
    nbr = [dict() for _ in a.regions]
    for (i, j), hid in a.adjacency.items():
        c = cls_of[hid]
        nbr[i][c] = j
        nbr[j][c] = i
    # one element per (class, orientation) carried by a local unit
    elements = []
    taken = set()
    local_set = set(local)
    for hid in sorted(h.id for h in a.hyperplanes):
        if hid not in local_set:
            continue
        c = cls_of[hid]
        rep = a.hyperplanes[classes[c][0]]
        key = (c, 1 if net.n == 1 else same_geometric_plane(rep, a.hyperplane(hid)))
        if key not in taken:
            taken.add(key)
            elements.append(hid)
    orders = []
    used_cls = set()
    used_regions = set()
    while True:
        avail = [e for e in elements if cls_of[e] not in used_cls]
        if not avail:
            break
        found = _search(a, avail, cls_of, nbr, used_regions, SEARCH_BUDGET)
        if found is None:
            break
        chain, regs, r0 = found
        o = StrictPartialOrder(chain, regs, r0)
        if not verify_order(a, o):
            break
        orders.append(o)
        used_cls |= {cls_of[e] for e in chain}
        used_regions |= set(regs)
    trees = _trees(orders)
    ordered = set(r for o in orders for r in o.ordered_regions)
    uncovered = [r for r in range(len(a.regions)) if r not in ordered]
    return OrderForest(a, orders, trees, uncovered, _hub(net, a, local))


def _hub(net, a, local):
    """Region with the fewest active local knots (the hub of a construction)."""
    pos = {a.position(h): h for h in local if h in a._pos}
    best, best_n = 0, None
    for r, reg in enumerate(a.regions):
        k = 0
        for p, hid in pos.items():
            u = net.units[hid]
            if u.w @ reg.witness + u.b > 0:
                k += 1
        if best_n is None or k < best_n:
            best, best_n = r, k
    return best


def _trees(orders):
    parent = list(range(len(orders)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, o in enumerate(orders):
        for j, p in enumerate(orders):
            if i != j and (o.initial_region in p.ordered_regions or o.initial_region == p.initial_region):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(orders)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _intersect(h1, h2):
    w1, w2 = h1.w / np.linalg.norm(h1.w), h2.w / np.linalg.norm(h2.w)
    return abs(abs(w1 @ w2) - 1.0) > 1e-9


def coverage_by_continuity(net, forest: OrderForest, seeds=None) -> CoverageReport:
    """Fixpoint of the region pieces forced by orders and continuity."""
    a = forest.arrangement
    R = len(a.regions)
    if R == 0:
        return CoverageReport([], 1.0)
    classes = a.coincidence_classes()
    cls_of = {}
    for ci, cl in enumerate(classes):
        for pos in cl:
            cls_of[a.hyperplanes[pos].id] = ci
    nbr = [[] for _ in range(R)]
    for (i, j), hid in a.adjacency.items():
        nbr[i].append((j, hid))
        nbr[j].append((i, hid))
    det = set(seeds or [])
    trace = [(r, "seed") for r in sorted(det)]
    if seeds is None:
        hub = forest.hub if forest.hub is not None else 0
        for r in [hub] + [r for o in forest.orders for r in o.ordered_regions]:
            if r not in det:
                det.add(r)
                trace.append((r, "seed"))
    changed = True
    while changed:
        changed = False
        pinned = set()
        for (i, j), hid in a.adjacency.items():
            if i in det and j in det:
                pinned.add(cls_of[hid])
        for r in range(R):
            if r in det:
                continue
            dn = [(j, hid) for j, hid in nbr[r] if j in det]
            rule = None
            for x in range(len(dn)):
                for y in range(x + 1, len(dn)):
                    if cls_of[dn[x][1]] != cls_of[dn[y][1]] and _intersect(a.hyperplane(dn[x][1]), a.hyperplane(dn[y][1])):
                        rule = "four-region"
                        break
                if rule:
                    break
            if rule is None and any(cls_of[hid] in pinned for _, hid in dn):
                rule = "shared-knot"
            if rule:
                det.add(r)
                trace.append((r, rule))
                changed = True
                for j, hid in nbr[r]:
                    if j in det:
                        pinned.add(cls_of[hid])
    return CoverageReport(sorted(det), len(det) / R, trace)


def classify_units(net: ReluNetwork, forest: OrderForest = None, basic=None):
    basic = basic or _basic_classes(net)
    if forest is None:
        forest = detect_orders(net, basic)
    a = forest.arrangement
    labels = [UnitLabel(i, c, active_fraction=f) for i, (c, f) in enumerate(basic)]
    nd = [i for i, u in enumerate(net.units) if labels[i].cls != DEGENERATE]
    vecs = {i: _normalized(net.units[i]) for i in nd}
    # equivalence groups: same oriented hyperplane up to positive scale
    group = {}
    reps = []
    for i in nd:
        for g, r in enumerate(reps):
            if np.linalg.norm(vecs[i] - vecs[r]) <= ANGLE_TOL:
                group[i] = g
                break
        else:
            group[i] = len(reps)
            reps.append(i)
    sizes = {}
    for i, g in group.items():
        sizes[g] = sizes.get(g, 0) + 1
    gid = {}
    for i in nd:
        if sizes[group[i]] > 1:
            labels[i].equivalence_group = gid.setdefault(group[i], len(gid))
    # chain orientation for every local unit
    chain_elem = {}
    for o in forest.orders:
        for hid in o.chain:
            chain_elem[hid] = o
    elems = list(chain_elem)
    for i in nd:
        if labels[i].cls is not None:
            continue
        sign = None
        for e in elems:
            he = a.hyperplane(e)
            v = np.append(he.w, he.b)
            v = v / np.linalg.norm(v)
            d, d2 = np.linalg.norm(vecs[i] - v), np.linalg.norm(vecs[i] + v)
            if d <= ANGLE_TOL:
                sign = LOCAL_POSITIVE
            elif d2 <= ANGLE_TOL:
                sign = LOCAL_NEGATIVE
            if sign:
                break
        if sign is None:
            u = net.units[i]
            for o in forest.orders:
                if len(o.chain) >= 2 and all(u.w @ a.regions[r].witness + u.b > 0 for r in o.ordered_regions):
                    sign = GLOBAL_FOR_ORDER
                    break
        labels[i].cls = sign or LOCAL_POSITIVE
    # bidirectional partners among local units
    local = [i for i in nd if labels[i].cls in (LOCAL_POSITIVE, LOCAL_NEGATIVE, GLOBAL_FOR_ORDER)]
    for i in local:
        for j in local:
            if i != j and np.linalg.norm(vecs[i] + vecs[j]) <= ANGLE_TOL:
                labels[i].bidirectional_partner = j
                break
    # redundancy among universal globals: beyond a rank-(n+1) column basis
    cols = []
    for i in nd:
        if labels[i].cls != UNIVERSAL_GLOBAL:
            continue
        u = net.units[i]
        v = np.append(u.w, u.b)
        if len(cols) < net.n + 1 and np.linalg.matrix_rank(np.array(cols + [v])) > len(cols):
            cols.append(v)
        else:
            labels[i].redundant = True
    return labels


def bidirectional_knots(net, labels):
    """Knot positions (1D) or unit pairs carrying both orientations."""
    pairs = set()
    for l in labels:
        if l.bidirectional_partner is not None:
            pairs.add(tuple(sorted((l.unit, l.bidirectional_partner))))
    return sorted(pairs)


def analyze(net: ReluNetwork) -> AnalysisReport:
    basic = _basic_classes(net)
    forest = detect_orders(net, basic)
    labels = classify_units(net, forest, basic)
    cov = coverage_by_continuity(net, forest)
    a0 = forest.arrangement
    # pieces follow the units' own orientation
    signs_fix = a0
    if net.n == 1:
        flips = [h.id for h in a0.hyperplanes if net.units[h.id].w[0] < 0]
        signs_fix = a0.reoriented(flips)
    pieces = pieces_on(net, signs_fix)
    cont = check_continuity(PiecewiseLinear(signs_fix, pieces))
    return AnalysisReport(labels, forest, cov.coverage, {"max_jump": cont.max_jump}, pieces)
