import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import canonical_spline, dense_1d, random_spline
from shallowrelu.network import ReluNetwork, ReluUnit, check_multiple_representations, extract_pieces
from shallowrelu.spline1d import (ADDED, COMPOUND, ONE_SIDED, SUBSTITUTED, BasisPlan, PlanError, Spline1D,
                                  compile_one_sided, compile_two_sided, decompile, minimal_added_plan)

X = dense_1d()


def max_err(net, s):
    return float(np.abs(net.eval(X[:, None]) - s(X)).max())


# splines

def test_discontinuous_spline_rejected():
    with pytest.raises(ValueError):
        Spline1D([0.5], [1.0, 1.0], [0.0, 1.0])


def test_knots_must_be_interior_and_increasing():
    with pytest.raises(ValueError):
        Spline1D([0.6, 0.4], [0, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        Spline1D([1.0], [0, 0], [0, 0])


def test_spline_json_round_trip():
    s = canonical_spline()
    again = Spline1D.from_dict(s.to_dict())
    assert np.array_equal(again.a, s.a) and np.array_equal(again.b, s.b)


# one-sided

def test_zero_spline_gives_zero_weights():
    s = Spline1D([0.3, 0.7], [0, 0, 0], [0, 0, 0])
    net = compile_one_sided(s)
    assert all(u.lam == 0 for u in net.units)


def test_identity_piece_anchor_weights():
    net = compile_one_sided(Spline1D([], [1.0], [0.0]), (-1.0, -0.5))
    assert net.theta == 2
    assert [u.lam for u in net.units] == pytest.approx([-1.0, 2.0])
    assert max_err(net, lambda x: x) <= 1e-10


def test_four_piece_example_weights():
    s = canonical_spline()
    net = compile_one_sided(s)
    assert net.theta == 5
    assert [u.lam for u in net.units[2:]] == pytest.approx([-2.0, 3.0, -2.0])
    assert max_err(net, s) <= 1e-10


def test_anchors_must_be_ordered_and_nonpositive():
    with pytest.raises(PlanError):
        compile_one_sided(canonical_spline(), (-0.5, -1.0))
    with pytest.raises(PlanError):
        compile_one_sided(canonical_spline(), (-0.5, 0.2))


def test_one_sided_weights_are_bitwise_repeatable():
    s = random_spline(np.random.default_rng(11), 6)
    l1 = [u.lam for u in compile_one_sided(s).units]
    l2 = [u.lam for u in compile_one_sided(s).units]
    assert l1 == l2


# two-sided

def test_added_plan_without_anchors():
    s = canonical_spline()
    net = compile_two_sided(s, BasisPlan(ADDED, anchors=(), bidirectional=(1, 3)))
    assert max_err(net, s) <= 1e-10
    # three knots, two of them carrying a unit of each sign
    assert net.theta == s.zeta + 1
    assert sum(u.w[0] < 0 for u in net.units) == 2


def test_substituted_knot_weight_is_slope_jump():
    s = canonical_spline()
    net = compile_two_sided(s, BasisPlan(SUBSTITUTED, flipped=(2,)))
    assert max_err(net, s) <= 1e-10
    neg = [u for u in net.units if u.w[0] < 0]
    assert len(neg) == 1 and -neg[0].b / neg[0].w[0] == pytest.approx(0.5)
    assert neg[0].lam == pytest.approx(s.a[2] - s.a[1])
    assert check_multiple_representations(net, extract_pieces(net)).ok


def test_all_flipped_without_anchors_is_starved():
    with pytest.raises(PlanError):
        compile_two_sided(canonical_spline(), BasisPlan(SUBSTITUTED, anchors=(), flipped=(1, 2, 3)))


def test_all_flipped_with_anchors_works():
    s = canonical_spline()
    net = compile_two_sided(s, BasisPlan(SUBSTITUTED, flipped=(1, 2, 3)))
    assert max_err(net, s) <= 1e-10


def test_compound_plan():
    s = canonical_spline()
    net = compile_two_sided(s, BasisPlan(COMPOUND, flipped=(1,), bidirectional=(2, 3), free_weights={3: -0.7}))
    assert max_err(net, s) <= 1e-10
    at3 = [u for u in net.units if u.w[0] < 0 and -u.b / u.w[0] == pytest.approx(0.75)]
    assert at3[0].lam == -0.7


@pytest.mark.parametrize("plan", [
    BasisPlan(ONE_SIDED, flipped=(1,)),
    BasisPlan(ADDED, flipped=(1,), bidirectional=(2,)),
    BasisPlan(SUBSTITUTED, bidirectional=(2,)),
    BasisPlan(COMPOUND, flipped=(1,)),
    BasisPlan(ADDED, bidirectional=(4,)),
    BasisPlan(ADDED, bidirectional=(1,), free_weights={2: 1.0}),
    BasisPlan("weird"),
])
def test_inconsistent_plans_rejected(plan):
    with pytest.raises(PlanError):
        compile_two_sided(canonical_spline(), plan)


def test_plan_json_round_trip():
    p = BasisPlan(COMPOUND, anchors=(-2.0, -1.0), flipped=(1,), bidirectional=(3,), free_weights={3: 0.5})
    q = BasisPlan.from_dict(p.to_dict())
    assert q == p


@pytest.mark.parametrize("zeta", range(2, 9))
def test_minimal_added_plan_unit_count(zeta):
    s = random_spline(np.random.default_rng(zeta), zeta)
    net = compile_two_sided(s, minimal_added_plan(zeta))
    assert net.theta == zeta + 1
    assert max_err(net, s) <= 1e-9


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_every_basis_realizes_random_splines(seed, zeta):
    rng = np.random.default_rng(seed)
    s = random_spline(rng, zeta)
    nets = [compile_one_sided(s)]
    if zeta >= 2:
        k = int(rng.integers(1, zeta))
        nets.append(compile_two_sided(s, BasisPlan(ADDED, bidirectional=(k,))))
        nets.append(compile_two_sided(s, BasisPlan(SUBSTITUTED, flipped=(k,))))
        nets.append(compile_two_sided(s, minimal_added_plan(zeta)))
    if zeta >= 3:
        nets.append(compile_two_sided(s, BasisPlan(COMPOUND, flipped=(1,), bidirectional=(zeta - 1,))))
    assert nets[0].theta == zeta + 1
    for net in nets:
        assert net.theta >= zeta + 1
        assert max_err(net, s) <= 1e-9


# decompile

def test_round_trip_recovers_knots_and_pieces():
    s = canonical_spline()
    back = decompile(compile_one_sided(s))
    assert np.allclose(back.knots, s.knots, atol=1e-10)
    assert np.allclose(back.a, s.a, atol=1e-10) and np.allclose(back.b, s.b, atol=1e-10)


def test_constant_network_decompiles_to_one_piece():
    net = ReluNetwork(1, [ReluUnit([1.0], -0.5, 0.0), ReluUnit([1.0], 1.0, 0.0)])
    back = decompile(net)
    assert back.zeta == 1 and back.a[0] == 0


def test_equivalent_units_merge_into_one_knot():
    net = ReluNetwork(1, [ReluUnit([1.0], -0.5, 1.0), ReluUnit([2.0], -1.0, 0.5)])
    back = decompile(net)
    assert list(back.knots) == [0.5]
    assert back.a[1] - back.a[0] == pytest.approx(2.0)


def test_decompile_rejects_2d():
    with pytest.raises(ValueError):
        decompile(ReluNetwork(2, []))


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_compile_decompile_compile_preserves_eval(seed, zeta):
    s = random_spline(np.random.default_rng(seed), zeta)
    net = compile_one_sided(s)
    again = compile_one_sided(decompile(net))
    assert np.abs(net.eval(X[:, None]) - again.eval(X[:, None])).max() <= 1e-10 * max(1, np.abs(s(X)).max())
