import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabset import free_groups as fg
from stabset.errors import InputError

F2 = "xyXY"


def naive_reduce(w):
    """Oracle: delete the first cancelling pair until none is left."""
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] != w[i + 1] and w[i].lower() == w[i + 1].lower():
                w = w[:i] + w[i + 2:]
                changed = True
                break
    return w


def exponent_sums(w):
    return {g: w.count(g) - w.count(g.upper()) for g in "xy"}


def random_product(rng, gens, k):
    parts = []
    for _ in range(k):
        g = rng.choice(gens)
        parts.append(g if rng.random() < 0.5 else fg.inverse(g))
    return naive_reduce("".join(parts))


words = st.text(alphabet=F2, max_size=14)
endos = st.lists(st.text(alphabet=F2, max_size=4), min_size=2, max_size=2).map(fg.FreeEndo.from_images)


# --- words ---------------------------------------------------------------------------


def test_reduce_examples():
    assert fg.free_reduce("xX") == ""
    assert fg.free_reduce("xyYx") == "xx"
    with pytest.raises(InputError):
        fg.free_reduce("xq", 2)


@given(words)
def test_reduce_matches_naive(w):
    r = fg.free_reduce(w)
    assert r == naive_reduce(w)
    assert fg.free_reduce(r) == r and fg.is_reduced(r)
    assert fg.free_reduce(w + fg.inverse(w)) == ""


def test_endo_json_and_errors():
    phi = fg.FreeEndo.from_json({"rank": 2, "images": ["xY", "yyY"]})
    assert phi.images == ("xY", "y")
    assert fg.FreeEndo.from_json(phi.to_json()) == phi
    with pytest.raises(InputError):
        fg.FreeEndo.from_json({"rank": 2, "images": ["x"]})
    with pytest.raises(InputError):
        fg.FreeEndo.from_json({"rank": 1, "images": ["y"]})
    with pytest.raises(InputError):
        fg.FreeEndo.from_json("{not json")


@settings(max_examples=100, deadline=None)
@given(endos, words, words)
def test_apply_is_a_homomorphism(phi, u, v):
    assert phi.apply(u + v) == fg.free_reduce(phi.apply(u) + phi.apply(v))
    assert phi.apply(fg.inverse(u)) == fg.inverse(phi.apply(u))


# --- folded graphs ---------------------------------------------------------------------


def test_stallings_examples():
    assert fg.stallings_graph(["x"], rank=2).rank == 1
    g = fg.stallings_graph(["xx", "xxx"], rank=2)
    assert g.rank == 1 and g.vertex_count == 1 and g.contains("x")
    g = fg.stallings_graph(["x", "y"], rank=2)
    assert g.rank == 2 and g.vertex_count == 1


def test_membership_examples():
    assert fg.membership("x", fg.stallings_graph(["x"], rank=2))
    assert not fg.membership("x", fg.stallings_graph(["xx"], rank=2))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.text(alphabet=F2, min_size=1, max_size=5), min_size=1, max_size=3), st.integers(0, 2 ** 31))
def test_products_of_generators_are_members(gens, seed):
    gens = [fg.free_reduce(g) for g in gens if fg.free_reduce(g)]
    if not gens:
        return
    g = fg.stallings_graph(gens, rank=2)
    rng = random.Random(seed)
    for _ in range(10):
        assert g.contains(random_product(rng, gens, rng.randint(0, 6)))
    # rank never exceeds the number of generators
    assert g.rank <= len(gens)
    for b in g.basis():
        assert g.contains(b)


@settings(max_examples=80, deadline=None)
@given(words)
def test_even_exponent_subgroup(w):
    # <x^2, y, x y x^-1> is the kernel of the x-exponent parity
    g = fg.stallings_graph(["xx", "y", "xyX"], rank=2)
    assert g.contains(fg.free_reduce(w)) == (exponent_sums(w)["x"] % 2 == 0)


# --- preimages and chains --------------------------------------------------------------


def test_preimage_examples():
    sq = fg.FreeEndo.from_images(["xx", "y"])
    assert sq.apply(fg.preimage_solve(sq, "xxxx")) == "xxxx"
    assert fg.preimage_solve(sq, "xxxx") == "xx"
    assert fg.preimage_solve(sq, "xxx") is None
    ident = fg.FreeEndo.identity(2)
    assert fg.preimage_solve(ident, "xYyyX") == "xyX"


@settings(max_examples=100, deadline=None)
@given(endos, words)
def test_preimage_round_trip(phi, v):
    w = phi.apply(v)
    u = fg.preimage_solve(phi, w)
    assert u is not None and phi.apply(u) == w
    assert fg.membership(w, fg.image_graph(phi))


def test_rank_chain_examples():
    rep = fg.rank_chain(fg.FreeEndo.identity(2), 4)
    assert rep.ranks == [2] * 4 and rep.rank_stable_from == 1 and rep.set_stable_from == 1
    rep = fg.rank_chain(fg.FreeEndo.from_images(["xx", "yy"]), 4)
    assert rep.ranks == [2] * 4 and rep.set_stable_from is None
    rep = fg.rank_chain(fg.FreeEndo.from_images(["x", "x"]), 4)
    assert rep.ranks == [1] * 4 and rep.set_stable_from == 1
    with pytest.raises(InputError):
        fg.rank_chain(fg.FreeEndo.identity(2), 0)


@settings(max_examples=60, deadline=None)
@given(endos, words)
def test_rank_chain_non_increasing_and_powers_belong(phi, w):
    rep = fg.rank_chain(phi, 4)
    assert all(a >= b for a, b in zip(rep.ranks, rep.ranks[1:]))
    levels = fg.image_chain(phi, 3)
    for n in range(1, 4):
        assert levels[n].graph.contains(phi.apply_n(w, n))


def test_stab_atrac_examples():
    rep = fg.stab_atrac_report(fg.FreeEndo.from_images(["x", "x"]), "x", 5)
    assert rep.status == "exact" and rep.in_atrac and rep.in_stab
    assert rep.chain == ["x"] * 6
    rep = fg.stab_atrac_report(fg.FreeEndo.from_images(["xx", "y"]), "x", 3)
    assert rep.status == "refuted" and rep.refuted_at == 1 and rep.in_atrac is False
    with pytest.raises(InputError):
        fg.stab_atrac_report(fg.FreeEndo.identity(2), "x", 0)


@pytest.mark.parametrize("u", ["x", "xy", "yXX"])
def test_inner_automorphisms(u):
    phi = fg.FreeEndo.inner(2, u)
    assert fg.is_surjective(phi)
    rng = random.Random(len(u))
    for _ in range(10):
        w = random_product(rng, "xy", 5)
        rep = fg.stab_atrac_report(phi, w, 6)
        assert rep.in_stab and rep.status == "exact"
        assert all(phi.apply(rep.chain[i + 1]) == rep.chain[i] for i in range(len(rep.chain) - 1))
    # a generator not commuting with u has infinite orbit, yet lies in Stab
    assert fg.orbit_period(phi, "y" if u[0] in "xX" else "x", 30) is None


@settings(max_examples=40, deadline=None)
@given(endos, words)
def test_backward_chains_verify(phi, w):
    rep = fg.stab_atrac_report(phi, w, 4)
    for i in range(len(rep.chain) - 1):
        assert phi.apply(rep.chain[i + 1]) == rep.chain[i]
    if rep.status == "refuted":
        assert rep.in_atrac is False


def test_orbit_search_stops_on_expanding_maps():
    phi = fg.FreeEndo.from_images(["xy", "yx"])
    assert fg.orbit_period(phi, "x", limit=64) is None
    assert fg.orbit_period(fg.FreeEndo.from_images(["y", "x"]), "x") == 2
