"""Constructive realizations of piecewise linear targets by ReLU networks.

The building blocks are a linear-output solve (several units jointly
produce one affine piece), the adjacent-piece recurrence
s_next = s_prev + lambda * sigma(w.x + b) across a knot, and a driver that
walks strict partial orders starting from a hub region. Axis grids are
handled by boundary determination: pieces on the boundary regions force
every other piece through four-region completion.
"""

from dataclasses import dataclass, field, replace
import itertools

import numpy as np

from .geometry import (Arrangement, Hyperplane, StrictPartialOrder, box_constraints, grid_arrangement,
                       same_geometric_plane, verify_order)
from .lp import maximize_free
from .network import AffinePiece, PiecewiseLinear, ReluNetwork, ReluUnit
from .trainer import FitReport, lattice, relative_error

RESIDUAL_TOL = 1e-10
CONTINUITY_TOL = 1e-8
DEFAULT_EPS = 1e-6
PERTURB_RETRIES = 6


class RankDeficient(ValueError):
    pass


class PerturbationBreaksRegion(ValueError):
    pass


class NotContinuous(ValueError):
    pass


class PlanInvalid(ValueError):
    def __init__(self, condition, detail=""):
        super().__init__(f"plan violates condition {condition}: {detail}")
        self.condition = condition
        self.detail = detail


class FlipOutsideOrderTree(ValueError):
    pass


class InconsistentBoundary(ValueError):
    pass


class TargetNotRealizable(ValueError):
    pass


def _coef(h):
    return np.append(h.w, h.b)


# ---------------------------------------------------------------- linear output

@dataclass
class LinearOutputSystem:
    matrix: np.ndarray  # (n+1) x m, columns [w_i; b_i]
    region: object = None

    @classmethod
    def from_hyperplanes(cls, hs, region=None):
        return cls(np.array([_coef(h) for h in hs]).T, region)


def solve_linear_output(sys, target: AffinePiece, fixed=None):
    """Output weights making sum(lambda_i (w_i.x + b_i)) equal the target.

    `fixed` maps column index to a preset weight; the remaining columns are
    solved with minimum norm.
    """
    M = np.asarray(sys.matrix if isinstance(sys, LinearOutputSystem) else sys, float)
    fixed = dict(fixed or {})
    m = M.shape[1]
    rhs = target.coef().astype(float)
    for k, v in fixed.items():
        rhs = rhs - v * M[:, k]
    free = [k for k in range(m) if k not in fixed]
    Mf = M[:, free]
    if not free or np.linalg.matrix_rank(Mf) < M.shape[0]:
        raise RankDeficient(f"free columns have rank {np.linalg.matrix_rank(Mf) if free else 0} < {M.shape[0]}")
    lam_f, *_ = np.linalg.lstsq(Mf, rhs, rcond=None)
    scale = max(1.0, np.abs(rhs).max())
    if np.abs(Mf @ lam_f - rhs).max() > RESIDUAL_TOL * scale * 10:
        raise RankDeficient("linear-output system is inconsistent")
    lam = np.zeros(m)
    for k, v in fixed.items():
        lam[k] = v
    lam[free] = lam_f
    return lam


# ---------------------------------------------------------------- perturbation

def _polytopes(region):
    """Normalize a region argument to a list of (A, c) polytopes."""
    if region is None:
        return []
    if isinstance(region, tuple) and len(region) == 2 and isinstance(region[0], np.ndarray):
        return [region]
    if isinstance(region, list):
        out = []
        for r in region:
            out += _polytopes(r)
        return out
    return [region]  # a geometry.Region: checked through its inscribed ball


def _min_over(poly, w, b):
    if isinstance(poly, tuple):
        A, c = poly
        res = maximize_free(-w, A, c)
        return -res.value + b
    # inscribed ball around the witness
    return float(w @ poly.witness + b - poly.radius * np.linalg.norm(w))


def _positive_on(h, polys, tol=1e-12):
    return all(_min_over(p, h.w, h.b) >= -tol * max(1.0, np.linalg.norm(_coef(h))) for p in polys)


def perturb_to_nonsingular(hs, region, eps=DEFAULT_EPS):
    """Nudge dependent hyperplanes into general position.

    The first hyperplane is kept. Every later one that lies in the span of
    its predecessors (as a vector (w, b)) is moved by eps * |(w, b)| along a
    direction orthogonal to that span, oriented to grow on the region.
    """
    hs = list(hs)
    polys = _polytopes(region)
    if len(hs) == 0:
        return hs
    probe = None
    if polys:
        p = polys[0]
        if isinstance(p, tuple):
            from .lp import chebyshev_center
            probe, _ = chebyshev_center(*p)
        else:
            probe = p.witness
    rows = [_coef(hs[0])]
    out = [hs[0]]
    for h in hs[1:]:
        r = _coef(h)
        Q = np.array(rows).T
        U, s, _ = np.linalg.svd(Q, full_matrices=True)
        rank = int((s > 1e-10 * max(1.0, s.max())).sum())
        comp = U[:, rank:]
        dist = np.linalg.norm(comp.T @ r) if comp.shape[1] else 0.0
        if comp.shape[1] == 0 or dist > 1e-9 * np.linalg.norm(r):
            rows.append(r)
            out.append(h)
            continue
        N = comp[:, 0]
        if probe is not None and N @ np.append(probe, 1.0) < 0:
            N = -N
        r2 = r + eps * np.linalg.norm(r) * N
        h2 = Hyperplane(r2[:-1], r2[-1], h.id)
        if polys and not _positive_on(h2, polys):
            raise PerturbationBreaksRegion(f"eps={eps} pushes hyperplane {h.id} across the region")
        rows.append(r2)
        out.append(h2)
    return out


def _perturb_with_retries(hs, region, eps=DEFAULT_EPS):
    for k in range(PERTURB_RETRIES + 1):
        try:
            return perturb_to_nonsingular(hs, region, eps / 2 ** k)
        except PerturbationBreaksRegion:
            if k == PERTURB_RETRIES:
                raise


# ---------------------------------------------------------------- knot recurrence

def _knot_frame(knot: Hyperplane, anchor=None):
    w = knot.w
    ww = float(w @ w)
    x = np.full(knot.n, 0.5) if anchor is None else np.asarray(anchor, float)
    p0 = x - (w @ x + knot.b) / ww * w
    _, _, vt = np.linalg.svd(w[None, :])
    tang = vt[1:]  # orthonormal directions inside the knot
    return p0, tang, w / ww


def adjacent_lambda(s_prev: AffinePiece, s_next: AffinePiece, knot: Hyperplane, anchor=None):
    """Unique lambda with s_next = s_prev + lambda * (w.x + b)."""
    p0, tang, step = _knot_frame(knot, anchor)
    pts = np.vstack([p0[None, :], p0 + tang])
    gap = s_next(pts) - s_prev(pts)
    scale = max(1.0, np.abs(s_prev(pts)).max(), np.abs(s_next(pts)).max())
    if np.abs(gap).max() > CONTINUITY_TOL * scale:
        raise NotContinuous(f"pieces differ by {np.abs(gap).max():.3g} on the knot")
    probe = p0 + step
    lam = float((s_next(probe) - s_prev(probe)) / (knot.w @ probe + knot.b))
    res = np.abs(s_next.coef() - s_prev.coef() - lam * _coef(knot)).max()
    cscale = max(1.0, np.abs(s_next.coef()).max(), np.abs(s_prev.coef()).max())
    if res > CONTINUITY_TOL * cscale:
        raise NotContinuous(f"difference is not a multiple of the knot functional (residual {res:.3g})")
    return lam


# ---------------------------------------------------------------- order driver

def default_universal_globals(n, id_start=-1):
    """n+1 hyperplanes with U strictly on their positive side and full rank."""
    hs = []
    for k in range(n):
        w = np.zeros(n)
        w[k] = 1.0
        hs.append(Hyperplane(w, 0.1, id_start - k))
    hs.append(Hyperplane(np.full(n, 1.0 / n), 1.0, id_start - n))
    return hs


def default_order_globals(n, id_start=-1):
    """n hyperplanes positive on U, used next to l_1 for a single order."""
    return default_universal_globals(n, id_start)[:n]


def universally_positive(h: Hyperplane, margin=0.0):
    return h.b + np.minimum(h.w, 0.0).sum() > margin


@dataclass
class OrderPlan:
    orders: list
    universal_globals: list
    hub_region: int
    sequence: list = None
    uncovered: list = None

    def __post_init__(self):
        if self.sequence is None:
            self.sequence = list(range(len(self.orders)))


@dataclass
class Realization:
    """Everything needed to re-derive output weights after a transformation."""

    network: ReluNetwork
    arrangement: Arrangement
    target: list               # AffinePiece per region (None where unknown)
    hub_region: int
    hub_columns: list          # Hyperplanes solved jointly on the hub
    chains: list               # StrictPartialOrder per processed chain, in sequence
    cases: list                # "hub", "ordered" or "implied" per chain
    layout: dict               # hyperplane id -> "pos" | "neg" | "both"
    free_weights: dict
    uncovered: list
    hub_check: list            # polytopes the hub columns must stay positive on
    roles: list = field(default_factory=list)  # per unit: ("hub", k) | ("pos"|"neg", hid)


def _active(a, region, hid, kind):
    s = a.sign(region, hid)
    return s > 0 if kind == "pos" else s < 0


def _realize(a, target, hub, hub_columns, chains, cases, layout, free_weights, uncovered, hub_check):
    n = a.n
    jumps = {}
    for o, case in zip(chains, cases):
        regs = [o.initial_region] + list(o.ordered_regions)
        for j, hid in enumerate(o.chain):
            if j == 0 and case == "implied":
                continue
            jumps[hid] = adjacent_lambda(target[regs[j]], target[regs[j + 1]], a.hyperplane(hid),
                                         a.regions[regs[j + 1]].witness)

    # chain units, in sequence order
    chain_units = []  # (kind, hid)
    for o in chains:
        for hid in o.chain:
            kind = layout.get(hid, "pos")
            if kind == "both":
                chain_units += [("neg", hid), ("pos", hid)]
            else:
                chain_units.append((kind, hid))
    lam = {}

    def assign(hid):
        kind = layout.get(hid, "pos")
        if kind == "pos":
            lam[("pos", hid)] = jumps[hid]
        elif kind == "neg":
            lam[("neg", hid)] = jumps[hid]
        else:
            f = float(free_weights.get(hid, 1.0))
            lam[("neg", hid)] = f
            lam[("pos", hid)] = jumps[hid] - f

    for hid in jumps:
        assign(hid)

    # hub piece: columns jointly produce target minus every known unit active there
    rhs = target[hub].coef().copy()
    for key, v in lam.items():
        kind, hid = key
        if _active(a, hub, hid, kind):
            sgn = 1.0 if kind == "pos" else -1.0
            rhs -= v * sgn * _coef(a.hyperplane(hid))
    for kind, hid in chain_units:
        if (kind, hid) not in lam and _active(a, hub, hid, kind):
            raise FlipOutsideOrderTree(f"unit on hyperplane {hid} is active on the hub before its weight is known")
    cols = list(hub_columns)
    sysm = LinearOutputSystem.from_hyperplanes(cols)
    if np.linalg.matrix_rank(sysm.matrix) < n + 1:
        cols = _perturb_with_retries(cols, hub_check)
        sysm = LinearOutputSystem.from_hyperplanes(cols)
    hub_lam = solve_linear_output(sysm, AffinePiece.from_coef(rhs))

    units = [ReluUnit(h.w, h.b, v) for h, v in zip(cols, hub_lam)]
    roles = [("hub", k) for k in range(len(cols))]

    def piece_at(region):
        v = np.zeros(n + 1)
        for u in units:
            if u.w @ a.regions[region].witness + u.b > 0:
                v += u.lam * np.append(u.w, u.b)
        for (kind, hid), val in lam.items():
            if _active(a, region, hid, kind) and (kind, hid) in placed:
                sgn = 1.0 if kind == "pos" else -1.0
                v += val * sgn * _coef(a.hyperplane(hid))
        return AffinePiece.from_coef(v)

    # implied-initial chains: lambda_1 from the piece realized so far on R_0
    placed = set(lam)
    for o, case in zip(chains, cases):
        if case != "implied":
            continue
        hid = o.chain[0]
        s0 = piece_at(o.initial_region)
        try:
            jumps[hid] = adjacent_lambda(s0, target[o.ordered_regions[0]], a.hyperplane(hid),
                                         a.regions[o.ordered_regions[0]].witness)
        except NotContinuous as e:
            raise PlanInvalid("IV", f"initial piece of chain starting at {hid} is not continuous: {e}")
        assign(hid)
        placed = set(lam)

    for kind, hid in chain_units:
        h = a.hyperplane(hid)
        if kind == "neg":
            h = h.negative()
        units.append(ReluUnit(h.w, h.b, lam[(kind, hid)]))
        roles.append((kind, hid))
    net = ReluNetwork(n, units)
    return Realization(net, a, target, hub, cols, chains, cases, dict(layout), dict(free_weights),
                       list(uncovered), hub_check, roles)


def _target_list(a, target):
    if isinstance(target, PiecewiseLinear):
        if target.arrangement is a:
            return list(target.pieces)
        idx = target.arrangement.locate(np.array([r.witness for r in a.regions]))
        return [target.pieces[i] for i in idx]
    if isinstance(target, dict):
        return [target.get(i) for i in range(len(a.regions))]
    return list(target)


def realize_single_order_state(a, o, target, globals=None):
    if not verify_order(a, o):
        raise PlanInvalid("order", str(verify_order(a, o)))
    n = a.n
    pieces = _target_list(a, target)
    gl = list(default_order_globals(n) if globals is None else globals)
    polys = [a.polytope(r) for r in o.ordered_regions]
    for h in gl:
        if not _positive_on(h, polys, tol=1e-9):
            raise PlanInvalid("globals", f"hyperplane {h.id} is not positive on every ordered region")
    l1 = a.hyperplane(o.chain[0])
    hub = o.ordered_regions[0]
    tail = []
    if len(o.chain) > 1:
        tail = [StrictPartialOrder(list(o.chain[1:]), list(o.ordered_regions[1:]), hub)]
    return _realize(a, pieces, hub, [l1] + gl, tail, ["hub"] * len(tail), {}, {}, [], polys)


def realize_single_order(a, o, target, globals=None) -> ReluNetwork:
    """One chain: l_1 plus the globals produce s_1, every later knot adds one unit."""
    return realize_single_order_state(a, o, target, globals).network


def validate_plan(a: Arrangement, plan: OrderPlan):
    """Check the multi-order conditions; returns (cases, uncovered)."""
    n = a.n
    gl = plan.universal_globals
    if len(gl) < n + 1:
        raise PlanInvalid("globals", f"need at least {n + 1} universal globals, got {len(gl)}")
    for h in gl:
        if not universally_positive(h):
            raise PlanInvalid("globals", f"hyperplane {h.id} does not have U on its positive side")
    if sorted(plan.sequence) != list(range(len(plan.orders))):
        raise PlanInvalid("sequence", "sequence must be a permutation of the orders")
    seen_h = set()
    for k, o in enumerate(plan.orders):
        if o.initial_region is None:
            raise PlanInvalid("IV", f"order {k} has no initial region")
        v = verify_order(a, o)
        if not v:
            raise PlanInvalid("order", f"order {k}: {v.condition} at {v.index}")
        if seen_h & set(o.chain):
            raise PlanInvalid("I", "orders must use disjoint hyperplane sets")
        seen_h |= set(o.chain)
    # I: ordered regions disjoint and distinct from the hub
    seen_r = {plan.hub_region}
    for k, o in enumerate(plan.orders):
        if seen_r & set(o.ordered_regions):
            raise PlanInvalid("I", f"order {k} reuses an ordered region or the hub")
        seen_r |= set(o.ordered_regions)
    uncovered = [r for r in range(len(a.regions)) if r not in seen_r]
    # II: hub and earlier regions on the zero side of later hyperplanes
    for p, i in enumerate(plan.sequence):
        earlier = [plan.hub_region] + [r for q in plan.sequence[:p] for r in plan.orders[q].ordered_regions]
        for hid in plan.orders[i].chain:
            for r in earlier:
                if a.sign(r, hid) > 0:
                    raise PlanInvalid("II", f"hyperplane {hid} of order {i} has region {r} on its positive side")
    # III: hyperplanes active on R_0 stay active on every ordered region
    for k, o in enumerate(plan.orders):
        first = set(a.class_of(o.chain[0]))
        for pos, h in enumerate(a.hyperplanes):
            if pos in first:
                continue
            if a.sign(o.initial_region, h.id) > 0:
                for r in o.ordered_regions:
                    if a.sign(r, h.id) < 0:
                        raise PlanInvalid("III", f"hyperplane {h.id} is active on the initial region of order {k} but not on region {r}")
    # IV: provenance of every initial region
    cases = []
    done = {plan.hub_region}
    later_regions = {}
    for p, i in enumerate(plan.sequence):
        for q in plan.sequence[p + 1:]:
            for r in plan.orders[q].ordered_regions:
                later_regions.setdefault(i, set()).add(r)
    for p, i in enumerate(plan.sequence):
        r0 = plan.orders[i].initial_region
        if r0 == plan.hub_region:
            cases.append("hub")
        elif r0 in done:
            cases.append("ordered")
        elif r0 in later_regions.get(i, set()):
            raise PlanInvalid("IV", f"order {i} starts from a region that is only built later")
        else:
            cases.append("implied")
        done |= set(plan.orders[i].ordered_regions)
    return cases, uncovered


def realize_multi_order_state(a, plan: OrderPlan, target, layout=None, free_weights=None):
    cases, uncovered = validate_plan(a, plan)
    pieces = _target_list(a, target)
    chains = [plan.orders[i] for i in plan.sequence]
    box = box_constraints(a.n)
    state = _realize(a, pieces, plan.hub_region, list(plan.universal_globals), chains, cases,
                     dict(layout or {}), dict(free_weights or {}), uncovered, [box])
    plan.uncovered = uncovered
    return state


def realize_multi_order(a, plan: OrderPlan, target) -> ReluNetwork:
    """Hub piece from universal globals, then every chain in sequence."""
    return realize_multi_order_state(a, plan, target).network


def apply_negative_forms(state: Realization, flips, mode="substitute"):
    """Move units on the given knots to their negative form.

    mode "substitute" replaces the positive unit, "add" keeps it and adds a
    negative partner (the knot becomes bidirectional). Output weights are
    re-derived so the realized function is unchanged.
    """
    flips = list(flips)
    if not flips:
        return state
    if mode not in ("substitute", "add"):
        raise ValueError("mode must be 'substitute' or 'add'")
    eligible = set()
    for o, case in zip(state.chains, state.cases):
        if case in ("hub", "ordered"):
            eligible |= set(o.chain)
    layout = dict(state.layout)
    for hid in flips:
        if hid not in eligible:
            raise FlipOutsideOrderTree(f"hyperplane {hid} is not in an order tree rooted at the hub")
        cur = layout.get(hid, "pos")
        if mode == "add":
            layout[hid] = "both"
        else:
            layout[hid] = {"pos": "neg", "neg": "pos", "both": "neg"}[cur]
    return _realize(state.arrangement, state.target, state.hub_region, state.hub_columns, state.chains,
                    state.cases, layout, state.free_weights, state.uncovered, state.hub_check)


# ---------------------------------------------------------------- grids

@dataclass
class GridSpec:
    n: int
    per_axis: list

    def __post_init__(self):
        self.per_axis = [int(M) for M in self.per_axis]
        if len(self.per_axis) != self.n:
            raise ValueError("per_axis needs one entry per dimension")
        if any(M < 1 for M in self.per_axis):
            raise ValueError("every axis needs M >= 1")

    @classmethod
    def uniform(cls, n, M):
        return cls(n, [M] * n)

    def arrangement(self):
        if not hasattr(self, "_arr"):
            self._arr = grid_arrangement(self.per_axis)
        return self._arr

    def hyperplane(self, axis, j):
        """Hyperplane x_axis = j / M_axis (1 <= j < M_axis)."""
        off = sum(M - 1 for M in self.per_axis[:axis])
        return self.arrangement().hyperplanes[off + j - 1]


def boundary_set(grid: GridSpec):
    """Index tuples with at most one nonzero coordinate."""
    out = [tuple([0] * grid.n)]
    for k, M in enumerate(grid.per_axis):
        for j in range(1, M):
            v = [0] * grid.n
            v[k] = j
            out.append(tuple(v))
    return out


def complete_fourth(s_a: AffinePiece, h_a: Hyperplane, s_b: AffinePiece, h_b: Hyperplane):
    """The affine piece continuous with s_a across h_a and with s_b across h_b."""
    ca, cb = _coef(h_a), _coef(h_b)
    d = s_b.coef() - s_a.coef()
    M = np.stack([ca, -cb], axis=1)
    sol, *_ = np.linalg.lstsq(M, d, rcond=None)
    res = np.abs(M @ sol - d).max()
    if res > CONTINUITY_TOL * max(1.0, np.abs(d).max(), np.abs(s_a.coef()).max()):
        raise InconsistentBoundary(f"neighbors are not mutually continuous (residual {res:.3g})")
    return AffinePiece.from_coef(s_a.coef() + sol[0] * ca)


def _multiple_of(d, h, scale):
    c = _coef(h)
    t = (d @ c) / (c @ c)
    return np.abs(d - t * c).max() <= CONTINUITY_TOL * scale


def propagate_boundary(grid: GridSpec, boundary_pieces) -> PiecewiseLinear:
    """Fill every grid cell from the boundary cells by four-region completion."""
    a = grid.arrangement()
    index = a.grid_index
    B = boundary_set(grid)
    bp = {}
    for key, p in boundary_pieces.items():
        t = key if isinstance(key, tuple) else next(v for v, r in index.items() if r == key)
        bp[tuple(t)] = p
    if set(bp) != set(B):
        raise ValueError("boundary pieces must cover exactly the boundary set")
    filled = dict(bp)
    for v in B:
        for k in range(grid.n):
            if v[k] > 0:
                u = list(v)
                u[k] -= 1
                d = filled[v].coef() - filled[tuple(u)].coef()
                scale = max(1.0, np.abs(filled[v].coef()).max(), np.abs(filled[tuple(u)].coef()).max())
                if not _multiple_of(d, grid.hyperplane(k, v[k]), scale):
                    raise InconsistentBoundary(f"boundary cells {tuple(u)} and {v} disagree on their facet")
    order = sorted(index, key=lambda v: (sum(v), v))
    for v in order:
        if v in filled:
            continue
        nz = [k for k in range(grid.n) if v[k] > 0]
        p, q = nz[0], nz[1]
        vp = list(v)
        vp[p] -= 1
        vq = list(v)
        vq[q] -= 1
        filled[v] = complete_fourth(filled[tuple(vp)], grid.hyperplane(p, v[p]),
                                    filled[tuple(vq)], grid.hyperplane(q, v[q]))
    pieces = [None] * len(a.regions)
    for v, r in index.items():
        pieces[r] = filled[v]
    return PiecewiseLinear(a, pieces)


def grid_plan(grid: GridSpec, globals=None):
    a = grid.arrangement()
    index = a.grid_index
    hub = index[tuple([0] * grid.n)]
    orders = []
    for k, M in enumerate(grid.per_axis):
        if M < 2:
            continue
        chain, regs = [], []
        for j in range(1, M):
            v = [0] * grid.n
            v[k] = j
            chain.append(grid.hyperplane(k, j).id)
            regs.append(index[tuple(v)])
        orders.append(StrictPartialOrder(chain, regs, hub))
    gl = default_universal_globals(grid.n) if globals is None else globals
    return OrderPlan(orders, gl, hub)


def realize_grid_state(grid: GridSpec, target):
    a = grid.arrangement()
    pieces = _target_list(a, target)
    B = boundary_set(grid)
    try:
        fill = propagate_boundary(grid, {v: pieces[a.grid_index[v]] for v in B})
    except InconsistentBoundary as e:
        raise TargetNotRealizable(str(e))
    for p, q in zip(pieces, fill.pieces):
        scale = max(1.0, np.abs(p.coef()).max())
        if np.abs(p.coef() - q.coef()).max() > CONTINUITY_TOL * scale:
            raise TargetNotRealizable("an interior piece disagrees with the fill forced by the boundary")
    return realize_multi_order_state(a, grid_plan(grid), fill)


def realize_grid(grid: GridSpec, target) -> ReluNetwork:
    return realize_grid_state(grid, target).network


def _sample_points(n, per_axis=None):
    if per_axis is None:
        per_axis = {1: 1001, 2: 101}.get(n, 21)
    return lattice(n, 1.0 / (per_axis - 1))


def boundary_interpolation(f, grid: GridSpec):
    """Boundary pieces interpolating f at cell vertices, seeded at the origin cell."""
    n = grid.n
    h = np.array([1.0 / M for M in grid.per_axis])
    verts = np.vstack([np.zeros(n), np.diag(h)])
    fv = np.asarray(f(verts), float)
    seed = AffinePiece((fv[1:] - fv[0]) / h, fv[0])
    out = {tuple([0] * n): seed}
    for k, M in enumerate(grid.per_axis):
        prev = seed
        for j in range(1, M):
            x_new = np.zeros(n)
            x_new[k] = (j + 1) * h[k]
            val = float(np.asarray(f(x_new[None, :]), float)[0])
            alpha = (val - prev(x_new)) / h[k]
            knot = grid.hyperplane(k, j)
            piece = prev + AffinePiece(alpha * knot.w, alpha * knot.b)
            v = [0] * n
            v[k] = j
            out[tuple(v)] = piece
            prev = piece
    return out


def approximate_c1(f, grid: GridSpec, samples_per_axis=None):
    """Grid network interpolating f on the boundary cells; error measured densely."""
    fill = propagate_boundary(grid, boundary_interpolation(f, grid))
    net = realize_grid(grid, fill)
    X = _sample_points(grid.n, samples_per_axis)
    z = np.asarray(f(X), float)
    zh = net.eval(X)
    zmax, zmin = float(z.max()), float(z.min())
    if zmax > zmin:
        eps = relative_error(z, zh)
    else:
        eps = float(np.sqrt(np.mean((z - zh) ** 2)))
    return net, FitReport(eps, zmax, zmin, int(z.size))
