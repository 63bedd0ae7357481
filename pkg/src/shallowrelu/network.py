"""Two-layer ReLU networks and the piecewise linear functions they realize."""

from dataclasses import dataclass, field

import numpy as np

from .geometry import Arrangement, Hyperplane, build_arrangement, same_geometric_plane

JUMP_TOL = 1e-6
REPR_TOL = 1e-8


@dataclass
class ReluUnit:
    w: np.ndarray
    b: float
    lam: float

    def __post_init__(self):
        self.w = np.atleast_1d(np.asarray(self.w, dtype=float))
        self.b = float(self.b)
        self.lam = float(self.lam)

    @property
    def degenerate(self):
        return not np.any(self.w)

    def hyperplane(self, id=0):
        return Hyperplane(self.w, self.b, id)


@dataclass
class ReluNetwork:
    n: int
    units: list = field(default_factory=list)
    output_bias: float = 0.0

    def __post_init__(self):
        for u in self.units:
            if u.w.size != self.n:
                raise ValueError(f"unit of dimension {u.w.size} in a network with n={self.n}")

    @property
    def theta(self):
        return len(self.units)

    def params(self):
        W = np.array([u.w for u in self.units]).reshape(len(self.units), self.n)
        b = np.array([u.b for u in self.units])
        lam = np.array([u.lam for u in self.units])
        return W, b, lam

    def __call__(self, X):
        return self.eval(X)

    def eval(self, X):
        """Network output at one point or at each row of X."""
        X = np.asarray(X, dtype=float)
        single = X.ndim <= 1
        X = X.reshape(1, -1) if single else X
        if self.n == 1 and X.shape[1] != 1 and single:
            X = X.reshape(-1, 1)
            single = False
        if X.shape[1] != self.n:
            raise ValueError(f"dimension mismatch: got {X.shape[1]} coordinates, network has n={self.n}")
        if self.units:
            W, b, lam = self.params()
            y = np.maximum(X @ W.T + b, 0.0) @ lam + self.output_bias
        else:
            y = np.full(X.shape[0], self.output_bias)
        return float(y[0]) if single else y

    def to_dict(self):
        return {"n": self.n, "output_bias": self.output_bias,
                "units": [{"w": u.w.tolist(), "b": u.b, "lambda": u.lam} for u in self.units]}

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        units = [ReluUnit(u["w"], u["b"], u["lambda"]) for u in d["units"]]
        return cls(n, units, float(d.get("output_bias", 0.0)))


@dataclass
class AffinePiece:
    w: np.ndarray
    b: float

    def __post_init__(self):
        self.w = np.atleast_1d(np.asarray(self.w, dtype=float))
        self.b = float(self.b)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros(n), 0.0)

    def __call__(self, X):
        return np.asarray(X, float) @ self.w + self.b

    def coef(self):
        return np.append(self.w, self.b)

    @classmethod
    def from_coef(cls, v):
        v = np.asarray(v, float)
        return cls(v[:-1], v[-1])

    def __add__(self, other):
        return AffinePiece(self.w + other.w, self.b + other.b)

    def __sub__(self, other):
        return AffinePiece(self.w - other.w, self.b - other.b)

    def scaled(self, c):
        return AffinePiece(c * self.w, c * self.b)

    def to_dict(self):
        return {"w": self.w.tolist(), "b": self.b}


class PiecewiseLinear:
    """An arrangement with one affine piece per region."""

    def __init__(self, arrangement: Arrangement, pieces):
        if len(pieces) != len(arrangement.regions):
            raise ValueError("need exactly one piece per region")
        self.arrangement = arrangement
        self.pieces = list(pieces)

    @property
    def n(self):
        return self.arrangement.n

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, float))
        if X.shape[1] != self.n:
            raise ValueError(f"dimension mismatch: got {X.shape[1]} coordinates, function has n={self.n}")
        idx = self.arrangement.locate(X)
        P = np.array([p.coef() for p in self.pieces])
        C = P[idx]
        return np.einsum("ij,ij->i", X, C[:, :-1]) + C[:, -1]

    def to_dict(self):
        return {"arrangement": self.arrangement.to_dict(),
                "pieces": [p.to_dict() for p in self.pieces]}

    @classmethod
    def from_dict(cls, d):
        a = Arrangement.from_dict(d["arrangement"])
        return cls(a, [AffinePiece(p["w"], p["b"]) for p in d["pieces"]])


def unit_arrangement(net: ReluNetwork):
    """Arrangement of the non-degenerate unit hyperplanes; ids are unit indices."""
    hs = [u.hyperplane(i) for i, u in enumerate(net.units) if not u.degenerate]
    return build_arrangement(net.n, hs)


def pieces_on(net: ReluNetwork, a: Arrangement):
    """Affine piece of the network on every region of an arrangement built from its units."""
    const = net.output_bias + sum(u.lam * max(0.0, u.b) for u in net.units if u.degenerate)
    pieces = []
    for r in a.regions:
        v = np.zeros(net.n + 1)
        v[-1] = const
        for h, s in zip(a.hyperplanes, r.signs):
            if s > 0:
                u = net.units[h.id]
                v[:-1] += u.lam * u.w
                v[-1] += u.lam * u.b
        pieces.append(AffinePiece.from_coef(v))
    return pieces


def extract_pieces(net: ReluNetwork) -> PiecewiseLinear:
    a = unit_arrangement(net)
    return PiecewiseLinear(a, pieces_on(net, a))


@dataclass
class ContinuityReport:
    max_jump: float
    violations: list  # (region i, region j, jump)
    pairs: int

    @property
    def ok(self):
        return not self.violations


def check_continuity(pl: PiecewiseLinear, tol=JUMP_TOL) -> ContinuityReport:
    a = pl.arrangement
    worst = 0.0
    bad = []
    for (i, j) in sorted(a.adjacency):
        dim, facet = a.facet(i, j)
        if facet is None:
            continue
        P = facet.points()
        jump = float(np.abs(pl.pieces[i](P) - pl.pieces[j](P)).max())
        worst = max(worst, jump)
        if jump > tol:
            bad.append((i, j, jump))
    return ContinuityReport(worst, bad, len(a.adjacency))


@dataclass
class RepresentationReport:
    checked: int
    failures: list  # (region_plus, region_zero, unit indices, residual)
    max_residual: float

    @property
    def ok(self):
        return not self.failures


def check_multiple_representations(net: ReluNetwork, pl: PiecewiseLinear, tol=REPR_TOL):
    """Across every knot, piece difference = sum of the co-located units' terms."""
    a = pl.arrangement
    active = [i for i, u in enumerate(net.units) if not u.degenerate]
    worst = 0.0
    fails = []
    for (i, j), hid in sorted(a.adjacency.items()):
        ref = a.hyperplane(hid)
        # orient the pair so that `plus` is on ref's positive side
        plus, zero = (i, j) if a.sign(i, hid) > 0 else (j, i)
        group = [k for k in active if same_geometric_plane(net.units[k].hyperplane(), ref)]
        expect = np.zeros(net.n + 1)
        for k in group:
            u = net.units[k]
            if same_geometric_plane(u.hyperplane(), ref) > 0:
                expect += u.lam * np.append(u.w, u.b)
            else:
                expect -= u.lam * np.append(u.w, u.b)
        got = pl.pieces[plus].coef() - pl.pieces[zero].coef()
        res = float(np.abs(got - expect).max())
        worst = max(worst, res)
        if res > tol:
            fails.append((plus, zero, group, res))
    return RepresentationReport(len(a.adjacency), fails, worst)
