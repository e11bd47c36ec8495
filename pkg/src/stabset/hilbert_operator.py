"""Truncated, exact-coefficient model of the dense-range operator on l^2 whose
attracting set strictly contains its stable set.

Basis vectors are e_0, e_1, ...; the indices >= 1 are laid out on the grid
(k, n), k, n >= 1, through the diagonal pairing

    alpha(k, n) = k(k+1)/2 + (n-1)(2k+n-2)/2.

The operator That is defined on basis vectors by

    That(e_0)           = 0
    That(e_alpha(k,1))  = e_0 / k^2 - sum_{n>=1} e_alpha(k,n) / ((n+1)...(n+k+1))
    That(e_alpha(k,n+1)) = e_alpha(k,n) / (n+1).

Vectors live in a finite window k <= k_max, n <= n_max.  Applying That to a
window vector is exact on every index whose image does not depend on a
coordinate outside the window; such indices are called internal.  After r
applications the internal indices are e_0 and alpha(k, n) with
n <= n_max - r.  Identities are asserted only there; boundary indices are
reported, never silently compared.

The families f_{k,j} (1 <= j <= k) satisfy That(f_{k,j}) = f_{k,j-1} and
That(f_{k,1}) = e_0 / k^2.  With the closed-form coefficients
1/((n+1)...(n+k-j+1)) the second relation fails at n = 1, so by default the
first nonzero coefficient (n = j) is taken as j! -- the unique value
compatible with both relations.  ``normalization="closed-form"`` keeps the
closed form at n = j as well.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import factorial, isqrt
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ._util import fraction_str, parse_fraction, rising
from .errors import InputError, VerificationError

KERNEL = "kernel"
CLOSED_FORM = "closed-form"
NORM_BOUND = math.pi ** 2 / 6 + math.sqrt(6) * math.pi / 3


# --- pairing ---------------------------------------------------------------


def alpha(k: int, n: int) -> int:
    if k < 1 or n < 1:
        raise InputError(f"alpha needs k, n >= 1, got ({k}, {n})")
    return k * (k + 1) // 2 + (n - 1) * (2 * k + n - 2) // 2


def alpha_inv(index: int) -> Tuple[int, int]:
    """Inverse pairing.

    Index i lies on the anti-diagonal s = k + n - 1, which holds the indices
    s(s-1)/2 + 1 .. s(s+1)/2 ordered by k.
    """
    if index < 1:
        raise InputError(f"alpha_inv needs index >= 1, got {index}")
    s = (1 + isqrt(8 * index - 7)) // 2
    k = index - s * (s - 1) // 2
    return k, s - k + 1


def alpha_array(k: np.ndarray, n: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    return k * (k + 1) // 2 + (n - 1) * (2 * k + n - 2) // 2


def alpha_inv_array(index: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    i = np.asarray(index, dtype=np.int64)
    s = ((1 + np.sqrt(8 * i - 7)) // 2).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    s = np.where(s * (s - 1) // 2 >= i, s - 1, s)
    s = np.where(s * (s + 1) // 2 < i, s + 1, s)
    k = i - s * (s - 1) // 2
    return k, s - k + 1


def check_pairing_bijection(limit: int) -> Dict[str, object]:
    """Vectorised check that alpha and alpha_inv are mutually inverse on 1..limit."""
    idx = np.arange(1, limit + 1, dtype=np.int64)
    k, n = alpha_inv_array(idx)
    ok_range = bool(np.all(k >= 1) and np.all(n >= 1))
    roundtrip = bool(np.array_equal(alpha_array(k, n), idx))
    # and from the grid side: every (k, n) on the first diagonals maps inside and back
    s_max = int((1 + math.isqrt(8 * limit)) // 2)
    kk, nn = np.meshgrid(np.arange(1, s_max + 1), np.arange(1, s_max + 1), indexing="ij")
    mask = kk + nn - 1 <= s_max
    grid_idx = alpha_array(kk[mask], nn[mask])
    k2, n2 = alpha_inv_array(grid_idx)
    grid_ok = bool(np.array_equal(k2, kk[mask]) and np.array_equal(n2, nn[mask]))
    injective = len(np.unique(grid_idx)) == grid_idx.size
    return {
        "limit": limit,
        "inverse_on_indices": ok_range and roundtrip,
        "inverse_on_grid": grid_ok and injective,
    }


# --- sparse vectors --------------------------------------------------------


class SparseVec(Mapping[int, Fraction]):
    """Finitely supported vector sum c_i e_i with exact coefficients.

    Zero coefficients are never stored, so equality is plain dict equality.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Mapping[int, object]] = None):
        c: Dict[int, Fraction] = {}
        for i, x in (coeffs or {}).items():
            if i < 0:
                raise InputError(f"negative basis index {i}")
            x = x if isinstance(x, Fraction) else parse_fraction(x)
            if x:
                c[int(i)] = x
        self._c = c

    @classmethod
    def basis(cls, i: int, coeff=1) -> "SparseVec":
        return cls({i: Fraction(coeff)})

    def __getitem__(self, i: int) -> Fraction:
        return self._c[i]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._c))

    def __len__(self) -> int:
        return len(self._c)

    def coeff(self, i: int) -> Fraction:
        return self._c.get(i, Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, SparseVec):
            return self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __add__(self, other: "SparseVec") -> "SparseVec":
        out = dict(self._c)
        for i, x in other._c.items():
            out[i] = out.get(i, 0) + x
        return SparseVec(out)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + other.scale(-1)

    def scale(self, a) -> "SparseVec":
        a = Fraction(a)
        return SparseVec({i: a * x for i, x in self._c.items()})

    def restrict(self, indices: Iterable[int]) -> "SparseVec":
        keep = set(indices)
        return SparseVec({i: x for i, x in self._c.items() if i in keep})

    def norm2(self) -> Fraction:
        return sum((x * x for x in self._c.values()), Fraction(0))

    def norm(self) -> float:
        return math.sqrt(math.fsum(float(x) ** 2 for x in self._c.values()))

    def to_json(self) -> Dict[str, str]:
        return {str(i): fraction_str(self._c[i]) for i in sorted(self._c)}

    def __repr__(self):
        inner = ", ".join(f"{i}: {fraction_str(self._c[i])}" for i in sorted(self._c))
        return f"SparseVec({{{inner}}})"


def _accumulate(acc: Dict[int, Fraction], i: int, x: Fraction):
    acc[i] = acc.get(i, Fraction(0)) + x


# --- truncation window ----------------------------------------------------


@dataclass(frozen=True)
class TruncationWindow:
    k_max: int
    n_max: int

    def __post_init__(self):
        if self.k_max < 1 or self.n_max < 1:
            raise InputError("window sizes must be positive")

    def contains(self, index: int) -> bool:
        if index == 0:
            return True
        k, n = alpha_inv(index)
        return k <= self.k_max and n <= self.n_max

    def indices(self) -> List[int]:
        return list(_window_indices(self.k_max, self.n_max))

    def internal(self, steps: int = 1) -> List[int]:
        """Indices still exact after ``steps`` applications of That."""
        return list(_window_indices(self.k_max, max(self.n_max - steps, 0)))

    def boundary(self, steps: int = 1) -> List[int]:
        inner = set(self.internal(steps))
        return [i for i in self.indices() if i not in inner]


@lru_cache(maxsize=256)
def _window_indices(k_max: int, n_max: int) -> Tuple[int, ...]:
    out = [0] + [alpha(k, n) for k in range(1, k_max + 1) for n in range(1, n_max + 1)]
    return tuple(sorted(out))


# --- the operator from the simple example -----------------------------------


def t_example_apply(v: SparseVec) -> SparseVec:
    """T(sum l_k e_k) = sum l_{k+1}/(k+1) e_k, indices from 0."""
    return SparseVec({k - 1: x / k for k, x in v.items() if k >= 1})


def t_example_kernel() -> Dict[str, object]:
    """Index-convention note for the kernel of T.

    With the displayed formula and indices from 0, T(e_0) = 0 and
    T(e_1) = e_0, so the kernel is spanned by e_0.  The sentence naming
    e_1 as generator matches counting the basis from 1.  Both readings
    give a one-dimensional kernel.
    """
    zero_based = [i for i in range(4) if not t_example_apply(SparseVec.basis(i))]
    return {
        "formula_kernel_generator": zero_based,
        "text_kernel_generator": "e_1 (basis counted from 1)",
        "kernel_dimension": 1,
        "conventions_agree": zero_based == [0],
    }


def t_example_preimage(target: SparseVec) -> SparseVec:
    """The unique preimage with zero e_0 coefficient: x_{k+1} = (k+1) * target_k."""
    return SparseVec({k + 1: (k + 1) * x for k, x in target.items()})


# --- That -------------------------------------------------------------------


def tail_coefficient(k: int, n: int) -> Fraction:
    """1/((n+1)...(n+k+1)), the weight of e_alpha(k,n) in That(e_alpha(k,1))."""
    return Fraction(1, rising(n, k + 1))


def t_hat_apply(v: SparseVec, w: TruncationWindow) -> SparseVec:
    acc: Dict[int, Fraction] = {}
    for i, c in v.items():
        if i == 0:
            continue
        k, n = alpha_inv(i)
        if k > w.k_max or n > w.n_max:
            raise InputError(f"index {i} = alpha({k},{n}) lies outside the window")
        if n == 1:
            _accumulate(acc, 0, c / (k * k))
            for m in range(1, w.n_max + 1):
                _accumulate(acc, alpha(k, m), -c * tail_coefficient(k, m))
        else:
            _accumulate(acc, alpha(k, n - 1), c / n)
    return SparseVec(acc)


def t_hat_power(v: SparseVec, w: TruncationWindow, r: int) -> SparseVec:
    for _ in range(r):
        v = t_hat_apply(v, w)
    return v


def truncation_tail_bound(v: SparseVec, w: TruncationWindow) -> float:
    """Upper bound on the l^2 norm dropped when the infinite sums are cut at n_max.

    For each e_alpha(k,1) component with coefficient c the dropped part has
    squared norm sum_{n>N} ((n+1)...(n+k+1))^-2 <= (N+1)^-(2k+1) / (2k+1),
    comparing the decreasing sum with its integral.
    """
    total = 0.0
    N = w.n_max
    for i, c in v.items():
        if i == 0:
            continue
        k, n = alpha_inv(i)
        if n == 1:
            total += abs(float(c)) * math.sqrt((N + 1) ** (-(2 * k + 1)) / (2 * k + 1))
    return total


# --- f families --------------------------------------------------------------


def f_kj_coefficient(k: int, j: int, n: int, normalization: str = KERNEL) -> Fraction:
    if n < j:
        return Fraction(0)
    if n == j and normalization == KERNEL:
        return Fraction(factorial(j))
    return Fraction(1, rising(n, k - j + 1))


def f_kj_vec(k: int, j: int, w: TruncationWindow, normalization: str = KERNEL) -> SparseVec:
    if not 1 <= j <= k:
        raise InputError(f"f_(k,j) needs 1 <= j <= k, got k={k}, j={j}")
    if k > w.k_max:
        raise InputError(f"k={k} exceeds window k_max={w.k_max}")
    if normalization not in (KERNEL, CLOSED_FORM):
        raise InputError(f"unknown normalization {normalization!r}")
    return SparseVec(
        {alpha(k, n): f_kj_coefficient(k, j, n, normalization) for n in range(j, w.n_max + 1)}
    )


def f_vec(k: int, w: TruncationWindow, normalization: str = KERNEL) -> SparseVec:
    return f_kj_vec(k, 1, w, normalization)


def _diff_on(a: SparseVec, b: SparseVec, indices: Iterable[int]) -> List[int]:
    keep = set(indices)
    support = (set(a) | set(b)) & keep
    return sorted(i for i in support if a.coeff(i) != b.coeff(i))


@dataclass
class ShiftReport:
    k: int
    j: int
    checked: int
    boundary: List[int]
    ok: bool = True

    def to_json(self) -> dict:
        return {"k": self.k, "j": self.j, "checked": self.checked, "boundary": self.boundary, "ok": self.ok}


def verify_shift_relation(k: int, j: int, w: TruncationWindow, normalization: str = KERNEL) -> ShiftReport:
    """Check That(f_{k,j}) = f_{k,j-1} exactly on internal indices."""
    if not 2 <= j <= k:
        raise InputError(f"shift relation needs 2 <= j <= k, got k={k}, j={j}")
    lhs = t_hat_apply(f_kj_vec(k, j, w, normalization), w)
    rhs = f_kj_vec(k, j - 1, w, normalization)
    internal = w.internal(1)
    bad = _diff_on(lhs, rhs, internal)
    if bad:
        raise VerificationError(f"That(f_({k},{j})) != f_({k},{j - 1}) at indices {bad[:5]}")
    return ShiftReport(k, j, len(internal), w.boundary(1))


# --- kernel and e_0 preimages -----------------------------------------------


def _weighted_sum(coeffs: Mapping[int, Fraction]) -> Fraction:
    return sum((Fraction(lam) / (k * k) for k, lam in coeffs.items()), Fraction(0))


def combination(coeffs: Mapping[int, Fraction], w: TruncationWindow, a0=0, normalization: str = KERNEL) -> SparseVec:
    """a0 e_0 + sum_k lambda_k f_k."""
    g = SparseVec.basis(0, a0)
    for k in sorted(coeffs):
        g = g + f_vec(k, w, normalization).scale(coeffs[k])
    return g


@dataclass
class WitnessReport:
    kind: str
    weighted_sum: Fraction
    checked: int
    boundary: List[int]
    ok: bool
    mismatches: List[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "weighted_sum": fraction_str(self.weighted_sum),
            "checked": self.checked,
            "boundary": self.boundary,
            "ok": self.ok,
            "mismatches": self.mismatches,
        }


def _family_witness(coeffs, w, a0, target: int, normalization: str) -> Tuple[SparseVec, WitnessReport]:
    coeffs = {int(k): parse_fraction(v) if not isinstance(v, Fraction) else v for k, v in coeffs.items()}
    if any(k < 1 or k > w.k_max for k in coeffs):
        raise InputError("coefficient indices must satisfy 1 <= k <= k_max")
    s = _weighted_sum(coeffs)
    if s != target:
        raise InputError(f"precondition sum lambda_k/k^2 = {target} violated (got {fraction_str(s)})")
    g = combination(coeffs, w, a0, normalization)
    image = t_hat_apply(g, w)
    expected = SparseVec.basis(0, target)
    internal = w.internal(1)
    bad = _diff_on(image, expected, internal)
    kind = "kernel" if target == 0 else "e0-preimage"
    return g, WitnessReport(kind, s, len(internal), w.boundary(1), not bad, bad[:10])


def kernel_witness(coeffs: Mapping[int, object], w: TruncationWindow, a0=0,
                   normalization: str = KERNEL) -> Tuple[SparseVec, WitnessReport]:
    """g = a0 e_0 + sum lambda_k f_k with sum lambda_k/k^2 = 0; checks That(g) = 0."""
    return _family_witness(coeffs, w, a0, 0, normalization)


def e0_witness(coeffs: Mapping[int, object], w: TruncationWindow, a0=0,
               normalization: str = KERNEL) -> Tuple[SparseVec, WitnessReport]:
    """Same construction with sum lambda_k/k^2 = 1; checks That(g) = e_0."""
    return _family_witness(coeffs, w, a0, 1, normalization)


def t_hat_solve(target: SparseVec, w: TruncationWindow, first: Mapping[int, Fraction],
                a0=0) -> Tuple[SparseVec, Fraction]:
    """Solve That(x) = target inside the window.

    The coordinates x_alpha(k,1) and x_0 are free; every other coordinate is
    forced by x_alpha(k,n+1) = (n+1)(target_alpha(k,n) + x_alpha(k,1)/((n+1)...(n+k+1))).
    Returns x and the e_0 residual sum_k x_alpha(k,1)/k^2 - target_0, which
    must vanish for x to be a solution.
    """
    coeffs: Dict[int, Fraction] = {0: Fraction(a0)}
    for k in range(1, w.k_max + 1):
        a1 = Fraction(first.get(k, 0))
        coeffs[alpha(k, 1)] = a1
        for n in range(1, w.n_max):
            coeffs[alpha(k, n + 1)] = (n + 1) * (target.coeff(alpha(k, n)) + a1 * tail_coefficient(k, n))
    residual = sum((Fraction(first.get(k, 0)) / (k * k) for k in range(1, w.k_max + 1)), Fraction(0))
    return SparseVec(coeffs), residual - target.coeff(0)


@dataclass
class PreimageReport:
    m: int
    checked: int
    boundary: List[int]
    ok: bool
    g_maps_to_e0: bool
    h_terms: List[str]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "checked": self.checked,
            "boundary_count": len(self.boundary),
            "ok": self.ok,
            "g_maps_to_e0": self.g_maps_to_e0,
            "h_terms": self.h_terms,
        }


def e0_preimage_depth(m: int, coeffs: Mapping[int, object], a0, w: TruncationWindow,
                      normalization: str = KERNEL) -> Tuple[SparseVec, PreimageReport]:
    """Build h with That^(m-1)(h) = g = a0 e_0 + sum_{k>=m} lambda_k f_k.

    h = m^2 a0 f_{m,m-1} + sum_k lambda_k f_{k,m}: the shift relation carries
    f_{k,m} down to f_{k,1} = f_k, and f_{m,m-1} down to f_{m,1}, which That
    sends to e_0/m^2.
    """
    if m < 2:
        raise InputError("m must be at least 2")
    coeffs = {int(k): parse_fraction(v) if not isinstance(v, Fraction) else v for k, v in coeffs.items()}
    if any(k < m for k, v in coeffs.items() if v):
        raise InputError(f"coefficients must be supported on k >= m = {m}")
    if any(k > w.k_max for k in coeffs):
        raise InputError("coefficient index beyond window k_max")
    if m > w.k_max:
        raise InputError("m exceeds window k_max")
    if _weighted_sum(coeffs) != 1:
        raise InputError("precondition sum lambda_k/k^2 = 1 violated")
    if not coeffs.get(m):
        raise InputError("precondition lambda_m != 0 violated")
    a0 = Fraction(a0)

    h = SparseVec()
    terms = []
    if a0:
        h = h + f_kj_vec(m, m - 1, w, normalization).scale(m * m * a0)
        terms.append(f"{fraction_str(m * m * a0)}*f({m},{m - 1})")
    for k in sorted(coeffs):
        if coeffs[k]:
            h = h + f_kj_vec(k, m, w, normalization).scale(coeffs[k])
            terms.append(f"{fraction_str(coeffs[k])}*f({k},{m})")
    g = combination(coeffs, w, a0, normalization)
    image = t_hat_power(h, w, m - 1)
    internal = w.internal(m - 1)
    bad = _diff_on(image, g, internal)
    g_image = t_hat_apply(g, w)
    g_ok = not _diff_on(g_image, SparseVec.basis(0), w.internal(1))
    return h, PreimageReport(m, len(internal), w.boundary(m - 1), not bad, g_ok, terms)


# --- non-surjectivity ----------------------------------------------------------


def _first_closed_form_index(k: int, normalization: str) -> int:
    return k + 2 if normalization == KERNEL else k + 1


def nonsurjectivity_evidence(k: int, ladder: Sequence[int], grid: Optional[Sequence[object]] = None,
                             normalization: str = KERNEL) -> Dict[str, object]:
    """Forced preimage of f_{k,k} and its diverging partial norms.

    For each trial value a of the free coordinate x_alpha(k,1), the equation
    That(x) = f_{k,k} forces every x_alpha(k,n); from some index on they
    equal 1 + a/((n+1)...(n+k)), which tends to 1, so no choice of a gives
    an l^2 vector.  Partial squared norms are reported at each ladder rung.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    ladder = sorted(int(x) for x in ladder)
    if not ladder or ladder[0] < 1:
        raise InputError("ladder needs positive rungs")
    n0 = _first_closed_form_index(k, normalization)
    cancel = Fraction(-rising(n0, k))
    trials = [parse_fraction(a) for a in (grid if grid is not None else (-10, -1, 0, 1, 10))]
    if cancel not in trials:
        trials.append(cancel)

    top = ladder[-1]
    results = []
    for a in trials:
        # x_{n+1} = (n+1)(t_n + a p_n), target t = f_{k,k} on column k
        squares = []
        closed_form_ok = True
        first_zero = None
        for n in range(1, top + 1):
            if n == 1:
                x = a
            else:
                t = f_kj_coefficient(k, k, n - 1, normalization)
                x = n * (t + a * tail_coefficient(k, n - 1))
                if n >= n0 and n <= 200 and x != 1 + a / rising(n, k):
                    closed_form_ok = False
            if x == 0 and n >= n0 and first_zero is None:
                first_zero = n
            squares.append(float(x) ** 2)
        partial = []
        running = 0.0
        rung_iter = iter(ladder)
        rung = next(rung_iter)
        acc = []
        for n, sq in enumerate(squares, start=1):
            acc.append(sq)
            if n == rung:
                running = math.fsum(acc)
                partial.append({"n_max": rung, "partial_norm2": running})
                rung = next(rung_iter, None)
                if rung is None:
                    break
        norms = [p["partial_norm2"] for p in partial]
        monotone = all(b > a_ for a_, b in zip(norms, norms[1:]))
        results.append({
            "a": fraction_str(a),
            "cancels_first_tail_term": a == cancel,
            "closed_form_matches": closed_form_ok,
            "partial_norms": partial,
            "monotone": monotone,
            "top_norm2": norms[-1],
        })
    return {
        "k": k,
        "normalization": normalization,
        "closed_form_from_n": n0,
        "trials": results,
        "diverges": all(r["monotone"] for r in results),
    }


# --- norm bound ------------------------------------------------------------------


def random_window_vectors(rng: random.Random, w: TruncationWindow, count: int,
                          max_terms: int = 6) -> List[SparseVec]:
    indices = w.indices()
    out = []
    for _ in range(count):
        terms = rng.randint(1, max_terms)
        v = {}
        for i in rng.sample(indices, min(terms, len(indices))):
            c = rng.randint(-9, 9) or 1
            v[i] = Fraction(c)
        out.append(SparseVec(v))
    return out


def norm_bound_check(samples: Sequence[SparseVec], w: TruncationWindow,
                     tolerance: float = 0.0) -> Dict[str, object]:
    """||That v|| / ||v|| against pi^2/6 + sqrt(6) pi/3 for each sample.

    The truncated image has norm at most the true one; the true one is at
    most the truncated norm plus the tail bound.  Both must stay under the
    operator bound.
    """
    worst = 0.0
    worst_with_tail = 0.0
    for v in samples:
        nv = v.norm()
        if nv == 0:
            continue
        img = t_hat_apply(v, w)
        ratio = img.norm() / nv
        with_tail = ratio + truncation_tail_bound(v, w) / nv
        worst = max(worst, ratio)
        worst_with_tail = max(worst_with_tail, with_tail)
        if with_tail > NORM_BOUND + tolerance:
            raise VerificationError(f"norm bound violated: {with_tail} > {NORM_BOUND} for {v!r}")
    return {
        "bound": NORM_BOUND,
        "tolerance": tolerance,
        "samples": len(samples),
        "max_ratio": worst,
        "max_ratio_with_tail": worst_with_tail,
        "ok": True,
    }


def image_contains_basis(w: TruncationWindow) -> Dict[str, object]:
    """Constructive preimages of e_0 and of each e_alpha(k,n) with n < n_max.

    e_0 = That(f_1) and e_alpha(k,n) = That((n+1) e_alpha(k,n+1)).
    """
    witnessed, failures = 0, []
    img = t_hat_apply(f_vec(1, w), w)
    if _diff_on(img, SparseVec.basis(0), w.internal(1)):
        failures.append(0)
    else:
        witnessed += 1
    for k in range(1, w.k_max + 1):
        for n in range(1, w.n_max):
            i = alpha(k, n)
            pre = SparseVec.basis(alpha(k, n + 1), n + 1)
            if t_hat_apply(pre, w) != SparseVec.basis(i):
                failures.append(i)
            else:
                witnessed += 1
    return {
        "witnessed": witnessed,
        "excluded_boundary": [alpha(k, w.n_max) for k in range(1, w.k_max + 1)],
        "failures": failures,
        "ok": not failures,
    }


# --- bundled verification ---------------------------------------------------------


CHECKS = ("shift", "kernel", "preimage", "norm", "diverge", "image")


def random_family_coeffs(rng: random.Random, w: TruncationWindow, target: int,
                          min_k: int = 1, max_terms: int = 4) -> Dict[int, Fraction]:
    ks = sorted(rng.sample(range(min_k, w.k_max + 1), min(max_terms, w.k_max - min_k + 1)))
    ks = ks[: rng.randint(1, len(ks))]
    coeffs = {k: Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for k in ks[1:]}
    last = ks[0]
    rest = sum((c / (k * k) for k, c in coeffs.items()), Fraction(0))
    coeffs[last] = (target - rest) * last * last
    return coeffs


def verify_all(w: TruncationWindow, checks: Sequence[str] = CHECKS, seed: int = 0,
               witnesses: int = 50, samples: int = 1000, ladder: Sequence[int] = (100, 1000, 10000),
               max_m: int = 6, tolerance: float = 0.0) -> Dict[str, object]:
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise InputError(f"unknown checks {unknown}")
    rng = random.Random(seed)
    report: Dict[str, object] = {"window": {"k_max": w.k_max, "n_max": w.n_max}, "seed": seed}
    ok = True
    if "shift" in checks:
        count = 0
        for k in range(2, w.k_max + 1):
            for j in range(2, k + 1):
                verify_shift_relation(k, j, w)
                count += 1
        report["shift"] = {"pairs": count, "ok": True}
    if "kernel" in checks:
        results = []
        for i in range(witnesses):
            target = i % 2
            coeffs = random_family_coeffs(rng, w, target)
            a0 = Fraction(rng.randint(-3, 3))
            _, rep = _family_witness(coeffs, w, a0, target, KERNEL)
            results.append(rep.ok)
        report["kernel"] = {"witnesses": len(results), "ok": all(results)}
        ok &= all(results)
    if "preimage" in checks:
        results = []
        for m in range(2, min(max_m, w.k_max, w.n_max - 1) + 1):
            coeffs = random_family_coeffs(rng, w, 1, min_k=m)
            if not coeffs.get(m):
                coeffs = {m: Fraction(m * m)}
            _, rep = e0_preimage_depth(m, coeffs, rng.randint(-2, 2), w)
            results.append(rep.to_json())
        good = all(r["ok"] and r["g_maps_to_e0"] for r in results)
        report["preimage"] = {"cases": results, "ok": good}
        ok &= good
    if "norm" in checks:
        report["norm"] = norm_bound_check(random_window_vectors(rng, w, samples), w, tolerance)
    if "diverge" in checks:
        ev = [nonsurjectivity_evidence(k, ladder) for k in range(1, min(3, w.k_max) + 1)]
        good = all(e["diverges"] and all(t["top_norm2"] > 1e3 for t in e["trials"]) for e in ev) \
            if ladder[-1] >= 2000 else all(e["diverges"] for e in ev)
        report["diverge"] = {"evidence": ev, "ok": good}
        ok &= good
    if "image" in checks:
        rep = image_contains_basis(w)
        report["image"] = rep
        ok &= rep["ok"]
    report["ok"] = ok
    return report
