"""Univariate continuous linear splines compiled to and from ReLU networks.

A spline on [0,1] with knots x_1 < ... < x_{z-1} and pieces s_i = a_i x + b_i
is realized exactly. The one-sided basis uses sigma(x - x_k) at every knot
plus two anchor units whose knots sit at or left of 0. Two-sided bases also
use negative units sigma(-(x - x_k)), which are active left of their knot.
"""

from dataclasses import dataclass, field

import numpy as np

from .network import ReluNetwork, ReluUnit, extract_pieces

CONT_TOL = 1e-12
MERGE_TOL = 1e-9
DEFAULT_ANCHORS = (-1.0, -0.5)
DEFAULT_FREE_WEIGHT = 1.0


class PlanError(ValueError):
    """The basis plan cannot realize the spline (e.g. starved initial piece)."""


@dataclass
class Spline1D:
    knots: np.ndarray
    a: np.ndarray  # slopes, one per piece
    b: np.ndarray  # intercepts, one per piece

    def __post_init__(self):
        self.knots = np.asarray(self.knots, float).ravel()
        self.a = np.asarray(self.a, float).ravel()
        self.b = np.asarray(self.b, float).ravel()
        if self.a.size != self.knots.size + 1 or self.b.size != self.a.size:
            raise ValueError("a spline with k knots needs k+1 pieces")
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if self.knots.size and (self.knots[0] <= 0 or self.knots[-1] >= 1):
            raise ValueError("knots must lie inside (0, 1)")
        for k, x in enumerate(self.knots):
            left = self.a[k] * x + self.b[k]
            right = self.a[k + 1] * x + self.b[k + 1]
            if abs(left - right) > CONT_TOL * max(1.0, abs(left), abs(right)):
                raise ValueError(f"spline is discontinuous at knot {x}")

    @property
    def zeta(self):
        return self.a.size

    @classmethod
    def unchecked(cls, knots, a, b):
        obj = object.__new__(cls)
        obj.knots = np.asarray(knots, float).ravel()
        obj.a = np.asarray(a, float).ravel()
        obj.b = np.asarray(b, float).ravel()
        return obj

    @classmethod
    def from_slopes(cls, knots, slopes, b1=0.0):
        """Continuous spline from its slopes and the first intercept."""
        knots = np.asarray(knots, float)
        a = np.asarray(slopes, float)
        b = np.empty_like(a)
        b[0] = b1
        for k, x in enumerate(knots):
            b[k + 1] = b[k] + (a[k] - a[k + 1]) * x
        return cls(knots, a, b)

    def __call__(self, x):
        x = np.asarray(x, float)
        idx = np.searchsorted(self.knots, x, side="right")
        return self.a[idx] * x + self.b[idx]

    def to_dict(self):
        return {"knots": self.knots.tolist(),
                "pieces": [{"a": a, "b": b} for a, b in zip(self.a, self.b)]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["knots"], [p["a"] for p in d["pieces"]], [p["b"] for p in d["pieces"]])


ONE_SIDED = "one-sided"
ADDED = "added"
SUBSTITUTED = "substituted"
COMPOUND = "compound"


@dataclass
class BasisPlan:
    """Which knots carry negative units.

    Knot indices are 1-based: knot k sits between pieces k and k+1.
    `free_weights` maps a bidirectional knot to the output weight of its
    negative unit; unlisted ones default to DEFAULT_FREE_WEIGHT when both
    anchors are present and are solved on the first piece otherwise.
    """

    kind: str = ONE_SIDED
    anchors: tuple = DEFAULT_ANCHORS
    flipped: tuple = ()
    bidirectional: tuple = ()
    free_weights: dict = field(default_factory=dict)

    def validate(self, zeta):
        if self.kind not in (ONE_SIDED, ADDED, SUBSTITUTED, COMPOUND):
            raise PlanError(f"unknown basis kind {self.kind!r}")
        anchors = tuple(float(x) for x in self.anchors)
        if any(x > 0 for x in anchors) or any(q <= p for p, q in zip(anchors, anchors[1:])):
            raise PlanError("anchors must satisfy x_-1 < x_0 <= 0")
        fl, bi = set(self.flipped), set(self.bidirectional)
        for k in fl | bi:
            if not 1 <= k <= zeta - 1:
                raise PlanError(f"knot index {k} out of range 1..{zeta - 1}")
        if fl & bi:
            raise PlanError("a knot cannot be both flipped and bidirectional")
        if self.kind == ONE_SIDED and (fl or bi):
            raise PlanError("one-sided plans carry no negative units")
        if self.kind == ADDED and (fl or not bi):
            raise PlanError("added plans need bidirectional knots only")
        if self.kind == SUBSTITUTED and (bi or not fl):
            raise PlanError("substituted plans need flipped knots only")
        if self.kind == COMPOUND and not (fl and bi):
            raise PlanError("compound plans need both flipped and bidirectional knots")
        for k in self.free_weights:
            if k not in bi:
                raise PlanError(f"free weight given for non-bidirectional knot {k}")

    def to_dict(self):
        return {"kind": self.kind, "anchors": list(self.anchors), "flipped": list(self.flipped),
                "bidirectional": list(self.bidirectional),
                "free_weights": {str(k): v for k, v in self.free_weights.items()}}

    @classmethod
    def from_dict(cls, d):
        return cls(d.get("kind", ONE_SIDED), tuple(d.get("anchors", DEFAULT_ANCHORS)),
                   tuple(d.get("flipped", ())), tuple(d.get("bidirectional", ())),
                   {int(k): float(v) for k, v in d.get("free_weights", {}).items()})


def _check_anchors(anchors):
    x_m1, x_0 = anchors
    if not x_m1 < x_0 <= 0:
        raise PlanError("anchors must satisfy x_-1 < x_0 <= 0")


def compile_one_sided(s: Spline1D, anchors=DEFAULT_ANCHORS) -> ReluNetwork:
    """The unique one-sided realization with zeta + 1 units."""
    _check_anchors(anchors)
    x_m1, x_0 = (float(v) for v in anchors)
    a1, b1 = s.a[0], s.b[0]
    lam_m1 = (a1 * x_0 + b1) / (x_0 - x_m1)
    lam_0 = (a1 * x_m1 + b1) / (x_m1 - x_0)
    units = [ReluUnit([1.0], -x_m1, lam_m1), ReluUnit([1.0], -x_0, lam_0)]
    for k, x in enumerate(s.knots):
        units.append(ReluUnit([1.0], -x, s.a[k + 1] - s.a[k]))
    return ReluNetwork(1, units)


def minimal_added_plan(zeta):
    """Added plan with exactly zeta + 1 units."""
    if zeta >= 3:
        return BasisPlan(ADDED, anchors=(), bidirectional=(1, zeta - 1))
    if zeta == 2:
        return BasisPlan(ADDED, anchors=(DEFAULT_ANCHORS[1],), bidirectional=(1,))
    raise PlanError("an added plan needs at least one interior knot")


def compile_two_sided(s: Spline1D, plan: BasisPlan) -> ReluNetwork:
    """Realize a spline with negative units at flipped/bidirectional knots.

    Every knot's slope jump a_{k+1} - a_k is shared by the units on it.
    The first piece is then produced by the anchors plus every negative
    unit (all of them are active on the first interval), solving for the
    free output weights with minimum norm.
    """
    z = s.zeta
    plan.validate(z)
    jump = np.diff(s.a)
    fl, bi = set(plan.flipped), set(plan.bidirectional)
    anchors = [float(x) for x in plan.anchors]

    units = []
    free = []       # unit indices whose weights are solved on the first piece
    for x in anchors:
        free.append(len(units))
        units.append(ReluUnit([1.0], -x, 0.0))
    neg_of = {}
    for k in range(1, z):
        x = s.knots[k - 1]
        if k in fl:
            units.append(ReluUnit([-1.0], x, float(jump[k - 1])))
            neg_of[k] = len(units) - 1
        elif k in bi:
            units.append(ReluUnit([-1.0], x, 0.0))
            neg_of[k] = len(units) - 1
            if k in plan.free_weights:
                units[-1].lam = float(plan.free_weights[k])
            elif len(anchors) >= 2:
                units[-1].lam = DEFAULT_FREE_WEIGHT
            else:
                free.append(len(units) - 1)
            units.append(ReluUnit([1.0], -x, 0.0))
        else:
            units.append(ReluUnit([1.0], -x, float(jump[k - 1])))

    # first piece: s_1 = sum over units active on [0, x_1]
    target = np.array([s.a[0], s.b[0]])
    fixed = np.zeros(2)
    for i, u in enumerate(units):
        if i not in free and u.w[0] < 0:
            fixed += u.lam * np.array([u.w[0], u.b])
    M = np.array([[units[i].w[0], units[i].b] for i in free]).T.reshape(2, len(free))
    if len(free) == 0 or np.linalg.matrix_rank(M) < 2:
        raise PlanError("initial piece unsolvable: fewer than two independent free units on the first interval")
    lam, *_ = np.linalg.lstsq(M, target - fixed, rcond=None)
    for i, v in zip(free, lam):
        units[i].lam = float(v)

    # remaining weight at bidirectional knots goes to the positive unit
    for k in bi:
        neg = neg_of[k]
        units[neg + 1].lam = float(jump[k - 1] - units[neg].lam)
    return ReluNetwork(1, units)


def decompile(net: ReluNetwork) -> Spline1D:
    if net.n != 1:
        raise ValueError("decompile needs a one-dimensional network")
    # a unit with zero output weight does not bend the function
    xs = sorted(-u.b / u.w[0] for u in net.units
                if not u.degenerate and u.lam != 0 and 0 < -u.b / u.w[0] < 1)
    knots = []
    for x in xs:
        if not knots or x - knots[-1] > MERGE_TOL:
            knots.append(x)
    pl = extract_pieces(net)
    edges = np.concatenate([[0.0], knots, [1.0]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    idx = pl.arrangement.locate(mids[:, None])
    a = [pl.pieces[i].w[0] for i in idx]
    b = [pl.pieces[i].b for i in idx]
    # merged knots may leave jumps of order MERGE_TOL, so skip the strict check
    return Spline1D.unchecked(knots, a, b)
