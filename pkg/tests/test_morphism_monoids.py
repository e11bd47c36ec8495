import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabset import core_dynamics as cd
from stabset import morphism_monoids as mm
from stabset import properties
from stabset import word_substitutions as ws
from stabset.errors import InputError

AB = ("a", "b")


def kolakoski_oracle(n):
    """Classic generator for the sequence 1,2,2,1,1,...; drop the leading 1."""
    s = [1, 2, 2]
    i = 2
    while len(s) < n + 1:
        s.extend([3 - s[-1]] * s[i])
        i += 1
    return s[1:n + 1]


def brute_monoid_stab(size, maps):
    """x is in Stab iff it has a backward path of length size+1 in the union graph."""
    out = set()
    for x in range(size):
        frontier = {x}
        for _ in range(size + 1):
            frontier = {y for y in range(size) for f in maps if f[y] in frontier}
        if frontier:
            out.add(x)
    return out


systems = st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(st.integers(0, n - 1), min_size=n, max_size=n), min_size=1, max_size=3)))


# --- finite carriers --------------------------------------------------------------------------


def test_single_map_reduces_to_self_map():
    succ = [1, 2, 0, 2, 3, 4]
    sys_ = mm.FiniteMonoidSystem.from_maps(6, {"f": succ})
    sets = mm.finite_monoid_sets(sys_)
    q = cd.four_sets(cd.FiniteSelfMap.from_succ(succ))
    assert sets.stab == q.stab and sets.atrac == q.atrac


def test_const_and_swap():
    sys_ = mm.FiniteMonoidSystem.from_maps(2, {"c": [0, 0], "s": [1, 0]})
    sets = mm.finite_monoid_sets(sys_)
    assert sets.stab == sets.atrac == {0, 1}


def test_system_json_and_errors():
    doc = {"size": 3, "maps": {"f": [0, 0, 1], "g": [2, 2, 2]}}
    sys_ = mm.FiniteMonoidSystem.from_json(doc)
    assert mm.FiniteMonoidSystem.from_json(sys_.to_json()) == sys_
    with pytest.raises(InputError):
        mm.FiniteMonoidSystem.from_json({"size": 2, "maps": {"f": [0, 5]}})
    with pytest.raises(InputError):
        mm.FiniteMonoidSystem.from_json({"size": 2, "maps": {}})


@settings(max_examples=200, deadline=None)
@given(systems)
def test_monoid_sets_match_brute_force(data):
    n, maps = data
    sys_ = mm.FiniteMonoidSystem.from_maps(n, {f"f{i}": m for i, m in enumerate(maps)})
    sets = mm.finite_monoid_sets(sys_)
    assert sets.stab == sets.atrac == brute_monoid_stab(n, maps)
    assert mm.is_stabilized_by(sys_, sets.stab)


@settings(max_examples=60, deadline=None)
@given(systems)
def test_stab_contains_every_stabilized_subset(data):
    n, maps = data
    sys_ = mm.FiniteMonoidSystem.from_maps(n, {f"f{i}": m for i, m in enumerate(maps)})
    stab = mm.monoid_stab(sys_)
    brute = [set(y) for r in range(n + 1) for y in itertools.combinations(range(n), r)
             if sys_.union_image(y) == set(y)]
    assert all(y <= stab for y in brute)
    assert sorted(map(sorted, mm.stabilized_subsets(sys_))) == sorted(map(sorted, brute))


# --- episturmian ------------------------------------------------------------------------------------


def test_directive_parsing():
    assert mm.parse_directive("La Rb") == [("L", "a"), ("R", "b")]
    assert mm.format_directive([("L", "a"), ("R", "b")]) == "La Rb"
    for bad in ("", "Xa", "L", "Lab"):
        with pytest.raises(InputError):
            mm.parse_directive(bad)


def test_epi_generation_examples():
    assert mm.episturmian_generate([("L", "a")] * 6, 6, AB).prefix == "aaaaaa"
    assert mm.episturmian_generate([("L", "a")], 1, AB).prefix == "a"
    alt = [("L", "a"), ("L", "b")] * 6
    gen = mm.episturmian_generate(alt, 30, AB)
    assert gen.prefix.startswith("aba")
    # oracle: apply the composed map to long words starting with each letter
    g = mm.compose_directive(alt, AB)
    images = [ws.apply_star(g, a * 40) for a in AB] + [ws.apply_star(g, "ab" * 20), ws.apply_star(g, "ba" * 20)]
    common = mm._lcp(images)
    assert gen.prefix == common[: len(gen.prefix)]


def test_fibonacci_word_from_alternating_directive():
    # La Lb La Lb ... gives the Fibonacci word abaababaabaab...
    fib = ["b", "a"]
    while len(fib[-1]) < 60:
        fib.append(fib[-1] + fib[-2])
    gen = mm.episturmian_generate([("L", "a"), ("L", "b")] * 10, 40, AB)
    assert gen.prefix[:20] == fib[-1][:20]


def test_desubstitution_examples():
    rep = mm.desubstitute_branches("aaaa", 3, AB)
    assert rep.exists and rep.branch == [("L", "a")] * 3
    la = mm.epi_map(("L", "a"), AB)
    assert mm.prefix_preimages(la, "bab") == []
    assert mm.prefix_preimages(la, "abab") == ["bb"]
    # the last block may be cut short, so "aaa" also comes from "aab"
    assert mm.prefix_preimages(la, "aaa") == ["aaa", "aab"]


def test_prefix_preimages_are_consistent():
    rng = random.Random(2)
    for _ in range(200):
        tok = (rng.choice("LR"), rng.choice("abc"))
        sub = mm.epi_map(tok, ("a", "b", "c"))
        prefix = "".join(rng.choice("abc") for _ in range(rng.randint(1, 8)))
        for u in mm.prefix_preimages(sub, prefix):
            img = ws.apply_star(sub, u)
            k = min(len(img), len(prefix))
            assert img[:k] == prefix[:k] and len(img) >= len(prefix)


def test_roundtrip_random_directives():
    rng = random.Random(9)
    done = 0
    while done < 40:
        tokens, alphabet = properties.random_directive(rng)
        gen = mm.episturmian_generate(tokens, 50, alphabet)
        if not gen.prefix:
            continue
        done += 1
        rep = mm.desubstitute_branches(gen.prefix, len(tokens), alphabet)
        assert rep.exists
        assert mm.directives_compatible(rep.branch, tokens, 50, alphabet)


def test_atrac_depth_examples():
    la = {"La": mm.epi_map(("L", "a"), AB)}
    assert mm.monoid_atrac_depth(la, "bbbb", 1).status.startswith("refuted")
    assert mm.monoid_atrac_depth(la, "bbbb", 0).status == "witnessed"
    maps = {f"{k}{a}": mm.epi_map((k, a), AB) for k in "LR" for a in AB}
    gen = mm.episturmian_generate([("L", "a"), ("R", "b"), ("L", "b")], 20, AB)
    for n in range(4):
        assert mm.monoid_atrac_depth(maps, gen.prefix, n).status == "witnessed"


# --- run-length words ----------------------------------------------------------------------------------


def test_rle_examples():
    dec = mm.rle_decode([2, 2, 1, 1, 2, 1, 2, 2, 1, 1])
    # the final run may continue, so it stays pending
    assert dec.lengths == (2, 2, 1, 1, 2) and dec.pending == 2
    assert dec.shape == (2, 1, 2, 1, 2, 1)
    dec = mm.rle_decode("aaa")
    assert dec.shape == "a" and dec.lengths == () and dec.pending == 3
    with pytest.raises(InputError):
        mm.rle_decode("")


@given(st.lists(st.integers(1, 4), min_size=1, max_size=20))
def test_rle_round_trip(lengths):
    shape = [1 + i % 2 for i in range(len(lengths))]
    w = mm.psi_apply(shape, lengths)
    dec = mm.rle_decode(w)
    assert list(dec.lengths) + [dec.pending] == lengths


def test_psi_errors():
    with pytest.raises(InputError):
        mm.psi_apply("aa", [1, 1])
    with pytest.raises(InputError):
        mm.psi_apply("ab", [1, 0])


def test_kolakoski_against_classic_generator():
    assert "".join(map(str, mm.kolakoski(4))) == "2211"
    assert mm.kolakoski(2000) == kolakoski_oracle(2000)


def test_kolakoski_report_flags_reference_tenth_symbol():
    rep = mm.kolakoski_report(1000)
    assert rep["self_encoding_holds"]
    assert rep["prefix"][:10] == "2211212212"
    assert rep["reference_mismatch_position"] == 10


def test_smooth_examples():
    k = mm.kolakoski(500)
    assert mm.smooth_check(k, (1, 2), 5).ok
    rep = mm.smooth_check([1, 1, 1], (1, 2), 3)
    assert not rep.ok
    # a decoding image of a smooth word stays smooth one level less deep
    img = mm.psi_apply([1 + i % 2 for i in range(200)], k[:200])
    assert mm.smooth_check(img, (1, 2), 4).ok
