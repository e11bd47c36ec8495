import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabset import word_substitutions as ws
from stabset.errors import InputError

TM = ws.Substitution.from_dsl("a -> ab\nb -> ba")
ERASE_A = ws.Substitution.from_dict({"a": "", "b": "ab"})


def thue_morse_oracle(n):
    return "".join("a" if bin(i).count("1") % 2 == 0 else "b" for i in range(n))


def words_upto(alphabet, n):
    for k in range(n + 1):
        for t in itertools.product(alphabet, repeat=k):
            yield "".join(t)


def brute_preimages(sub, word):
    """Every preimage over letters with nonempty image, by exhaustive search."""
    keep = [a for a in sub.alphabet if sub(a)]
    return sorted(u for u in words_upto(keep, len(word)) if ws.apply_star(sub, u) == word)


def brute_in_image_of_power(sub, word, n):
    psi = ws.power(sub, n)
    keep = [a for a in sub.alphabet if psi(a)]
    return any(ws.apply_star(psi, u) == word for u in words_upto(keep, len(word)))


def brute_period(sub, word, steps=60):
    v = word
    for p in range(1, steps + 1):
        v = ws.apply_star(sub, v)
        if v == word:
            return p
        if len(v) > 40:
            return None
    return None


non_erasing = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.text(alphabet="abc"[:n], min_size=1, max_size=3), min_size=n, max_size=n).map(
        lambda imgs: ws.Substitution.from_dict(dict(zip("abc", imgs)))))
any_sub = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.text(alphabet="abc"[:n], min_size=0, max_size=3), min_size=n, max_size=n).map(
        lambda imgs: ws.Substitution.from_dict(dict(zip("abc", imgs)))))


# --- parsing and application ---------------------------------------------------------------


def test_dsl_round_trip_and_errors():
    s = ws.Substitution.from_dsl("# comment\na -> ab\nb -> .\n")
    assert s.mapping == {"a": "ab", "b": ""}
    assert ws.Substitution.from_dsl(s.to_dsl()) == s
    for bad in ("a -> ab\na -> b", "a = b", "a -> z", "ab -> a", ""):
        with pytest.raises(InputError):
            ws.Substitution.from_dsl(bad)


def test_apply_examples():
    assert ws.apply_star(TM, "ab") == "abba"
    assert ws.apply_star(TM, "") == ""
    assert ws.apply_star(ERASE_A, "aba") == "ab"
    with pytest.raises(InputError):
        ws.apply_star(TM, "ac")


@settings(max_examples=100, deadline=None)
@given(any_sub, st.integers(0, 4), st.integers(0, 4))
def test_power_composes(sub, r, s):
    w = "".join(sub.alphabet)
    assert ws.apply_star(ws.power(sub, r + s), w) == ws.apply_star_n(sub, w, r + s)
    assert ws.compose(ws.power(sub, r), ws.power(sub, s)) == ws.power(sub, r + s)


# --- mortality ----------------------------------------------------------------------------------


def test_mortality_examples():
    m = ws.mortality(TM)
    assert not m.mortal and m.exponent == 0
    m = ws.mortality(ERASE_A)
    assert m.mortal == {"a"} and m.exponent == 1
    m = ws.mortality(ws.Substitution.from_dict({"a": "b", "b": ""}))
    assert m.mortal == {"a", "b"} and m.exponent == 2


@settings(max_examples=200, deadline=None)
@given(any_sub)
def test_mortality_matches_iteration(sub):
    n = len(sub.alphabet)
    dead = {a for a in sub.alphabet if ws.apply_star_n(sub, a, n) == ""}
    rep = ws.mortality(sub)
    assert rep.mortal == dead
    assert rep.exponent <= len(dead) <= n
    assert all(ws.apply_star_n(sub, a, rep.exponent) == "" for a in dead)


@settings(max_examples=200, deadline=None)
@given(any_sub, st.text(alphabet="abc", max_size=6))
def test_immortal_count_never_decreases(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    assert ws.immortal_count(sub, ws.apply_star(sub, w)) >= ws.immortal_count(sub, w)


# --- fixed points ----------------------------------------------------------------------------------


def test_fixed_point_spec_examples():
    rep = ws.fixed_point_specs(TM)
    got = {(s.seed, s.power, s.v1, s.v2, s.case) for s in rep.specs}
    assert got == {("a", 1, "", "b", "infinite"), ("b", 1, "", "a", "infinite")}
    assert rep.m == 1
    spec = ws.spec_for_seed(ERASE_A, "b")
    assert (spec.power, spec.v1, spec.v2, spec.case) == (1, "a", "", "finite")
    assert ws.finite_fixed_word(ERASE_A, spec) == "ab"
    swap = ws.Substitution.from_dict({"a": "b", "b": "a"})
    rep = ws.fixed_point_specs(swap)
    assert all(s.power == 2 for s in rep.specs) and rep.m == 2


def test_thue_morse_expansion():
    spec = ws.spec_for_seed(TM, "a")
    assert ws.expand_fixed_point(TM, spec, 4) == "abba"
    assert ws.expand_fixed_point(TM, spec, 16) == "abbabaabbaababba"
    assert ws.expand_fixed_point(TM, spec, 1024) == thue_morse_oracle(1024)


def test_expansion_with_mortal_debris():
    sub = ws.Substitution.from_dict({"a": "", "b": "abb"})
    spec = ws.spec_for_seed(sub, "b")
    assert spec.v1 == "a" and spec.case == "infinite"
    p = ws.expand_fixed_point(sub, spec, 40)
    assert p.startswith("ab")
    assert ws.apply_star(sub, p)[:40] == p
    with pytest.raises(InputError):
        ws.expand_fixed_point(ERASE_A, ws.spec_for_seed(ERASE_A, "b"), 5)


@settings(max_examples=150, deadline=None)
@given(any_sub)
def test_fixed_point_specs_are_fixed(sub):
    for spec in ws.fixed_point_specs(sub).specs:
        psi = ws.power(sub, spec.power)
        if spec.case == "finite":
            w = ws.finite_fixed_word(sub, spec)
            assert ws.apply_star(psi, w) == w
        else:
            p = ws.expand_fixed_point(sub, spec, 30)
            assert ws.apply_star(psi, p)[:30] == p
            lengths = ws.length_growth(sub, spec.seed, spec.power, 30)
            assert all(lengths[n] >= n + 1 for n in range(31))
            assert lengths[5] == len(ws.apply_star_n(psi, spec.seed, 5))


# --- preimages and membership -------------------------------------------------------------------------


def test_canonical_preimage_examples():
    assert ws.canonical_preimages(TM, "abba") == ["ab"]
    assert ws.canonical_preimages(TM, "aa") == []
    assert ws.canonical_preimages(TM, "") == [""]


@settings(max_examples=150, deadline=None)
@given(any_sub, st.text(alphabet="abc", max_size=5))
def test_canonical_preimages_match_brute_force(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    assert ws.canonical_preimages(sub, w) == brute_preimages(sub, w)


@settings(max_examples=100, deadline=None)
@given(any_sub, st.text(alphabet="abc", max_size=4))
def test_preimage_depths_match_brute_force(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    depths = ws.preimage_depths(sub, w, 4)
    assert depths == [brute_in_image_of_power(sub, w, n) for n in range(1, 5)]


def test_membership_examples():
    rep = ws.membership_finite(TM, "ab")
    assert not (rep.in_orb or rep.in_stab or rep.in_atrac)
    rep = ws.membership_finite(ERASE_A, "ab")
    assert rep.in_orb and rep.in_stab and rep.in_atrac and rep.period == 1


@settings(max_examples=200, deadline=None)
@given(any_sub, st.text(alphabet="abc", max_size=5))
def test_orbit_period_matches_brute_force(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    assert ws.orbit_period(sub, w) == brute_period(sub, w)


@settings(max_examples=200, deadline=None)
@given(non_erasing, st.text(alphabet="abc", max_size=5))
def test_three_oracles_agree_non_erasing(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    rep = ws.membership_finite(sub, w)
    assert not rep.cross_check["contradiction"]


def test_letter_characterization_counterexample():
    # 'a' has a one-letter image but never comes back
    sub = ws.Substitution.from_dict({"a": "b", "b": "b"})
    assert ws.literal_letter_characterization(sub, "a")
    assert ws.orbit_period(sub, "a") is None
    assert not ws.corrected_letter_characterization(sub, "a")


@settings(max_examples=200, deadline=None)
@given(non_erasing, st.text(alphabet="abc", max_size=5))
def test_cyclic_letter_characterization(sub, w):
    w = "".join(c for c in w if c in sub.alphabet)
    assert ws.corrected_letter_characterization(sub, w) == (ws.orbit_period(sub, w) is not None)


# --- infinite words at a precision -----------------------------------------------------------------------


def test_prefix_membership_examples():
    assert ws.stab_membership_prefix(TM, "abba").status == "consistent"
    rep = ws.stab_membership_prefix(TM, "aaaa")
    assert rep.status == "inconsistent" and rep.mismatch_position == 2
    swap = ws.Substitution.from_dict({"a": "b", "b": "a"})
    rep = ws.stab_membership_prefix(swap, "abab")
    assert rep.status == "consistent" and rep.m == 2
    dead = ws.Substitution.from_dict({"a": "", "b": "b"})
    assert ws.stab_membership_prefix(dead, "aaa").status == "inconclusive"


def test_thue_morse_four_sets_at_precision():
    sets = ws.four_sets_prefix(TM, 64)
    both = sorted([thue_morse_oracle(64), thue_morse_oracle(64).translate(str.maketrans("ab", "ba"))])
    for name in ("fix", "orb", "stab", "atrac"):
        assert sets[name] == both


def test_atrac_prefixes_for_non_erasing_contain_stab():
    rng = random.Random(5)
    for _ in range(30):
        imgs = {a: "".join(rng.choice("ab") for _ in range(rng.randint(1, 3))) for a in "ab"}
        sub = ws.Substitution.from_dict(imgs)
        sets = ws.four_sets_prefix(sub, 8)
        assert set(sets["fix"]) <= set(sets["stab"]) <= set(sets["atrac"])


def test_erasure_extension():
    ext, t = ws.erasure_extension(ERASE_A)
    assert ext(t) == t and ext.is_non_erasing() is False
    rep = ws.extension_cross_check(ERASE_A, "ab")
    assert rep["agree"]
    rep = ws.extension_cross_check(ERASE_A, "")
    assert rep["agree"]
