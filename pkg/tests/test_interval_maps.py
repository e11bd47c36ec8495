from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabset import interval_maps as im
from stabset.errors import InputError

EX = im.discontinuous_example_map()
FIXED = im.continuous_example_map()
IDENT = im.PWLMap.build(["0", "1"], [("1", "0")])
HALF = im.PWLMap.build(["0", "1"], [("1/2", "0")])
FLIP = im.PWLMap.build(["0", "1"], [("-1", "1")])


def grid(q):
    return sorted({Fr(p, d) for d in range(1, q + 1) for p in range(d + 1)})


def brute_preimages(f, y, q):
    """Oracle: scan a rational grid, no interval code."""
    out = []
    for x in grid(q):
        if f(x) == y:
            out.append(x)
    return out


def U(*parts):
    return im.IntervalUnion(parts)


def I(lo, hi, lc=True, hc=True):
    return im.Interval(Fr(lo), Fr(hi), lc, hc)


# --- sets ---------------------------------------------------------------------------


def test_union_normalizes():
    u = U(I("1/2", 1), I(0, "1/2", True, False), I("1/4", "1/4"))
    assert u == im.IntervalUnion.unit()
    assert U(I(0, "1/3"), I("1/2", 1)).parts[1].lo == Fr(1, 2)
    assert U(I(1, 0)).empty


def test_image_examples():
    assert im.image(EX, im.IntervalUnion.unit()) == U(I(0, "3/4", False, True))
    assert im.image(IDENT, U(I("1/3", "2/3"))) == U(I("1/3", "2/3"))
    const = im.PWLMap.build(["0", "1"], [("0", "2/5")])
    assert im.image(const, im.IntervalUnion.unit()) == im.IntervalUnion.point("2/5")


@pytest.mark.parametrize("f", [EX, FIXED, HALF, FLIP])
def test_image_agrees_with_pointwise_sampling(f):
    # every sampled point lands in the image, every sampled image point has a preimage
    img = im.image(f, im.IntervalUnion.unit())
    for x in grid(12):
        assert img.contains(f(x))
    for y in img.rationals_with_denominator_at_most(8):
        assert im.preimage(f, im.IntervalUnion.point(y)).representative() is not None


def test_atrac_iterates_examples():
    its = im.atrac_iterates(EX, 1)
    assert its[0] == U(I(0, "3/4", False, True))
    assert all(u == im.IntervalUnion.unit() for u in im.atrac_iterates(IDENT, 4))
    its = im.atrac_iterates(HALF, 6)
    assert its == [U(I(0, Fr(1, 2 ** n))) for n in range(1, 7)]
    with pytest.raises(InputError):
        im.atrac_iterates(EX, 0)


@pytest.mark.parametrize("f", [EX, FIXED, HALF, FLIP])
def test_atrac_chain_decreases(f):
    its = im.atrac_iterates(f, 10)
    assert all(not u.empty for u in its)
    assert all(b.issubset(a) for a, b in zip(its, its[1:]))


def test_fixed_points_examples():
    assert im.fixed_points(EX) == im.IntervalUnion.point("1/2")
    assert im.fixed_points(IDENT) == im.IntervalUnion.unit()
    assert im.fixed_points(FLIP) == im.IntervalUnion.point("1/2")


@pytest.mark.parametrize("f", [EX, FIXED, HALF, FLIP])
def test_fixed_points_match_grid(f):
    fix = im.fixed_points(f)
    for x in grid(30):
        assert fix.contains(x) == (f(x) == x)


# --- chains ---------------------------------------------------------------------------


def test_chain_examples():
    chain = im.backward_chain_point(EX, "1/2", 50)
    assert chain is not None and len(chain) == 51
    # 3/4 comes only from 1, and nothing maps onto 1
    assert im.backward_chain_point(EX, "3/4", 1) == [Fr(3, 4), Fr(1)]
    assert im.backward_chain_point(EX, "3/4", 2) is None
    assert im.backward_chain_point(HALF, "3/4", 1) is None
    with pytest.raises(InputError):
        im.backward_chain_point(EX, "3/2", 1)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 24).flatmap(lambda d: st.tuples(st.integers(0, d), st.just(max(d, 1)))),
       st.sampled_from([EX, FIXED, FLIP]), st.integers(1, 6))
def test_one_step_preimages_match_brute_force(pq, f, depth):
    p, q = pq
    y = Fr(p, q)
    pre = im.preimage(f, im.IntervalUnion.point(y))
    for x in grid(24):
        assert pre.contains(x) == (f(x) == y)
    chain = im.backward_chain_point(f, y, depth)
    if chain is not None:
        assert all(f(chain[i + 1]) == chain[i] for i in range(depth))
    elif brute_preimages(f, y, 24):
        # a single step exists, so the chain failed deeper down
        assert depth > 1


def test_map_validation():
    with pytest.raises(InputError):
        im.PWLMap.build(["0", "1"], [("2", "0")])
    with pytest.raises(InputError):
        im.PWLMap.build(["0", "1/2"], [("0", "0")])
    with pytest.raises(InputError):
        im.PWLMap.from_json({"breakpoints": ["0", "1"]})
    doc = EX.to_json()
    assert im.PWLMap.from_json(doc) == EX


# --- orbits versus chains --------------------------------------------------------------


def test_example_as_written_keeps_every_image_point_periodic_or_dead():
    # points of (1/2, 3/4] leave the map's image after a few steps
    assert im.is_periodic(EX, "1/2")
    assert im.backward_chain_point(EX, "3/4", 12) is None
    assert im.stab_minus_orb_witness(EX, 12) is None


def test_continuous_variant_has_a_stab_point_off_every_cycle():
    w = im.stab_minus_orb_witness(FIXED, 12)
    assert w is not None
    x = Fr(w["x"])
    assert im.backward_chain_point(FIXED, x, 12) is not None
    assert not im.is_periodic(FIXED, x)
    assert im.atrac_iterates(FIXED, 12)[-1] == U(I("1/2", 1))


@pytest.mark.parametrize("f", [EX, FIXED, HALF, FLIP])
def test_sampled_chain_check(f):
    assert im.sampled_chain_check(f, 8, 32)["ok"]


def test_example_attracting_set_collapses_to_fixed_point():
    assert im.atrac_iterates(EX, 8)[-1] == im.IntervalUnion.point("1/2")
