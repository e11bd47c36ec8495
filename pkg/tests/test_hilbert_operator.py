import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabset import hilbert_operator as ho
from stabset.errors import InputError, VerificationError

W = ho.TruncationWindow(12, 12)


def diagonal_enumeration(count):
    """Oracle: walk the anti-diagonals k + n = s, k increasing, and number pairs."""
    out, idx, s = {}, 1, 2
    while idx <= count:
        for k in range(1, s):
            out[(k, s - k)] = idx
            idx += 1
        s += 1
    return out


def dense_t_hat(v, w):
    """Second evaluation of That, straight from its three defining clauses."""
    out = {}
    for k in range(1, w.k_max + 1):
        for n in range(1, w.n_max + 1):
            c = v.coeff(ho.alpha(k, n))
            if not c:
                continue
            if n == 1:
                out[0] = out.get(0, 0) + c / k ** 2
                for m in range(1, w.n_max + 1):
                    i = ho.alpha(k, m)
                    out[i] = out.get(i, 0) - c / math.prod(range(m + 1, m + k + 2))
            else:
                i = ho.alpha(k, n - 1)
                out[i] = out.get(i, 0) + c / n
    return ho.SparseVec(out)


# --- pairing ---------------------------------------------------------------------


@pytest.mark.parametrize("k,n,v", [(1, 1, 1), (2, 3, 8), (3, 4, 18), (1, 4, 7), (2, 2, 5), (2, 4, 12), (3, 3, 13)])
def test_pairing_table(k, n, v):
    assert ho.alpha(k, n) == v
    assert ho.alpha_inv(v) == (k, n)


def test_pairing_matches_diagonal_enumeration():
    table = diagonal_enumeration(5000)
    for (k, n), i in table.items():
        assert ho.alpha(k, n) == i


def test_pairing_bijection_report():
    rep = ho.check_pairing_bijection(10 ** 5)
    assert rep["inverse_on_grid"] and rep["inverse_on_indices"]


def test_pairing_rejects_bad_arguments():
    with pytest.raises(InputError):
        ho.alpha(0, 1)
    with pytest.raises(InputError):
        ho.alpha_inv(0)


@given(st.integers(1, 10 ** 12))
def test_pairing_inverse_large(i):
    k, n = ho.alpha_inv(i)
    assert ho.alpha(k, n) == i


# --- the one-parameter example --------------------------------------------------


def test_example_operator():
    assert ho.t_example_apply(ho.SparseVec.basis(0)) == ho.SparseVec()
    assert ho.t_example_apply(ho.SparseVec.basis(1)) == ho.SparseVec.basis(0)
    target = ho.SparseVec({0: 3, 4: Fraction(1, 2)})
    assert ho.t_example_apply(ho.t_example_preimage(target)) == target
    rep = ho.t_example_kernel()
    assert rep["formula_kernel_generator"] == [0] and rep["kernel_dimension"] == 1


# --- That ---------------------------------------------------------------------------


def test_t_hat_examples():
    assert ho.t_hat_apply(ho.SparseVec.basis(0), W) == ho.SparseVec()
    assert ho.t_hat_apply(ho.SparseVec.basis(2), W) == ho.SparseVec.basis(1, Fraction(1, 2))
    img = ho.t_hat_apply(ho.SparseVec.basis(3), W)
    assert img.coeff(0) == Fraction(1, 4)
    for n in range(1, W.n_max + 1):
        assert img.coeff(ho.alpha(2, n)) == -Fraction(1, (n + 1) * (n + 2) * (n + 3))


def test_t_hat_rejects_outside_window():
    with pytest.raises(InputError):
        ho.t_hat_apply(ho.SparseVec.basis(ho.alpha(13, 1)), W)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from(W.indices() + [0]), st.fractions(max_denominator=9), max_size=8))
def test_t_hat_matches_dense_oracle(coeffs):
    v = ho.SparseVec(coeffs)
    assert ho.t_hat_apply(v, W) == dense_t_hat(v, W)


@pytest.mark.parametrize("k,j", [(2, 2), (5, 3), (12, 12), (7, 2)])
def test_shift_relation(k, j):
    w = ho.TruncationWindow(40, 40) if (k, j) in ((2, 2), (5, 3)) else W
    rep = ho.verify_shift_relation(k, j, w)
    assert rep.ok and rep.checked > 0


def test_shift_relation_precondition():
    with pytest.raises(InputError):
        ho.verify_shift_relation(3, 1, W)


def test_shift_relation_by_hand():
    # T(f_{k,j}) at alpha(k,n) is a_{n+1}/(n+1); compare with f_{k,j-1} entrywise
    for k in range(2, 6):
        for j in range(2, k + 1):
            for n in range(j - 1, 10):
                lhs = ho.f_kj_coefficient(k, j, n + 1) / (n + 1)
                assert lhs == ho.f_kj_coefficient(k, j - 1, n)


def test_f_family_errors():
    with pytest.raises(InputError):
        ho.f_kj_vec(2, 3, W)
    with pytest.raises(InputError):
        ho.f_kj_vec(2, 1, W, normalization="other")


# --- kernel and e_0 preimages ----------------------------------------------------------


def test_kernel_witness_examples():
    _, rep = ho.kernel_witness({1: 1, 2: -4}, W)
    assert rep.ok
    g, rep = ho.kernel_witness({}, W, a0=1)
    assert rep.ok and g == ho.SparseVec.basis(0)
    with pytest.raises(InputError):
        ho.kernel_witness({1: 1}, W)


def test_closed_form_normalization_fails_kernel_witness():
    _, rep = ho.kernel_witness({1: 1, 2: -4}, W, normalization=ho.CLOSED_FORM)
    assert not rep.ok


def test_e0_witness():
    _, rep = ho.e0_witness({1: 1}, W)
    assert rep.ok
    _, rep = ho.e0_witness({2: 4, 3: 0}, W, a0=5)
    assert rep.ok


def test_kernel_solutions_are_spanned_by_f():
    rng = random.Random(1)
    for _ in range(20):
        coeffs = ho.random_family_coeffs(rng, W, 0)
        x, residual = ho.t_hat_solve(ho.SparseVec(), W, coeffs)
        assert residual == 0
        assert x == ho.combination(coeffs, W)
        assert not ho._diff_on(ho.t_hat_apply(x, W), ho.SparseVec(), W.internal(1))


def test_preimage_examples():
    h, rep = ho.e0_preimage_depth(2, {2: 4}, 0, W)
    assert rep.ok and rep.g_maps_to_e0
    assert h == ho.f_kj_vec(2, 2, W).scale(4)
    h, rep = ho.e0_preimage_depth(3, {3: 9}, 1, W)
    assert rep.ok and rep.g_maps_to_e0
    assert h == ho.f_kj_vec(3, 2, W).scale(9) + ho.f_kj_vec(3, 3, W).scale(9)
    with pytest.raises(InputError):
        ho.e0_preimage_depth(2, {2: 0, 1: 1}, 0, W)
    with pytest.raises(InputError):
        ho.e0_preimage_depth(2, {3: 9}, 0, W)


@pytest.mark.parametrize("m", range(2, 7))
def test_preimage_depth_up_to_six(m):
    w = ho.TruncationWindow(10, 14)
    h, rep = ho.e0_preimage_depth(m, {m: m * m}, 2, w)
    assert rep.ok and rep.g_maps_to_e0


# --- divergence -----------------------------------------------------------------------------


def test_nonsurjectivity_k1():
    ev = ho.nonsurjectivity_evidence(1, (100, 1000, 10000))
    assert ev["diverges"]
    for t in ev["trials"]:
        assert t["closed_form_matches"]
        top = t["partial_norms"][-1]
        assert top["partial_norm2"] >= 0.9 * top["n_max"]


def test_nonsurjectivity_cancelling_trial():
    ev = ho.nonsurjectivity_evidence(2, (100, 1000))
    cancel = [t for t in ev["trials"] if t["cancels_first_tail_term"]]
    assert len(cancel) == 1 and cancel[0]["monotone"]
    assert ev["closed_form_from_n"] == 4


def test_nonsurjectivity_zero_free_coordinate():
    # with x_alpha(2,1) = 0 the forced coordinates are 0, 0, 6, then exactly 1 from n = 4
    ev = ho.nonsurjectivity_evidence(2, (50,), grid=[0])
    t = ev["trials"][0]
    assert t["closed_form_matches"]
    assert t["top_norm2"] == 6 ** 2 + (50 - 3)


# --- norm bound --------------------------------------------------------------------------------


def test_norm_examples():
    w = ho.TruncationWindow(5, 6)
    assert ho.t_hat_apply(ho.SparseVec.basis(0), w).norm() == 0
    for k in range(1, 6):
        for n in range(1, 6):
            img = ho.t_hat_apply(ho.SparseVec.basis(ho.alpha(k, n + 1)), w)
            assert img.norm() == pytest.approx(1 / (n + 1))


def test_norm_bound_random_samples():
    w = ho.TruncationWindow(20, 20)
    vs = ho.random_window_vectors(random.Random(3), w, 1000)
    rep = ho.norm_bound_check(vs, w)
    assert rep["ok"] and rep["max_ratio_with_tail"] <= ho.NORM_BOUND


def test_norm_bound_violation_is_reported():
    w = ho.TruncationWindow(3, 3)
    with pytest.raises(VerificationError):
        ho.norm_bound_check([ho.SparseVec.basis(1)], w, tolerance=-10)


def test_image_contains_basis():
    assert ho.image_contains_basis(W)["ok"]


def test_verify_all_small_window():
    rep = ho.verify_all(ho.TruncationWindow(8, 10), seed=2, witnesses=10, samples=50, ladder=(100, 1000))
    assert rep["ok"]
