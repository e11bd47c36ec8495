"""Exact linear self-maps of Q^d: kernel and image chains.

Everything is over Fraction; no value is ever rounded.  The stabilisation
index of M is the least n with Ker(M^{n+1}) = Ker(M^n).  Beyond it M is
injective on Im(M^n), so the stable subspace and the eventual image agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from ._util import RationalLike, fraction_str, parse_fraction
from .errors import InputError

Vector = Tuple[Fraction, ...]


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: Tuple[Vector, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError("matrix dimensions must be positive")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise InputError("entries do not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]]) -> "RationalMatrix":
        if not rows:
            raise InputError("empty matrix")
        entries = tuple(tuple(parse_fraction(x) for x in row) for row in rows)
        return cls(len(entries), len(entries[0]), entries)

    @classmethod
    def identity(cls, d: int) -> "RationalMatrix":
        return cls.from_rows([[int(i == j) for j in range(d)] for i in range(d)])

    @classmethod
    def zero(cls, d: int) -> "RationalMatrix":
        return cls.from_rows([[0] * d for _ in range(d)])

    @classmethod
    def from_json(cls, doc: dict) -> "RationalMatrix":
        try:
            n = doc["n"]
            rows = doc["entries"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"matrix JSON needs 'n' and 'entries': {exc}") from exc
        m = cls.from_rows(rows)
        if m.rows != n or m.cols != n:
            raise InputError(f"declared n={n} but entries are {m.rows}x{m.cols}")
        return m

    def to_json(self) -> dict:
        return {"n": self.rows, "entries": [[fraction_str(x) for x in r] for r in self.entries]}

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise InputError("shape mismatch in product")
        cols = [other.column(j) for j in range(other.cols)]
        # products with a zero factor are skipped; random test matrices are sparse
        entries = tuple(
            tuple(sum((a * b for a, b in zip(row, col) if a and b), Fraction(0)) for col in cols)
            for row in self.entries
        )
        return RationalMatrix(self.rows, other.cols, entries)

    def apply(self, v: Sequence[Fraction]) -> Vector:
        return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in self.entries)

    def power(self, n: int) -> "RationalMatrix":
        self._require_square()
        out = RationalMatrix.identity(self.rows)
        for _ in range(n):
            out = out @ self
        return out

    def _require_square(self):
        if not self.is_square:
            raise InputError(f"self-map needs a square matrix, got {self.rows}x{self.cols}")


@dataclass(frozen=True)
class SubspaceBasis:
    """A subspace of Q^ambient given by independent basis vectors."""

    ambient: int
    vectors: Tuple[Vector, ...] = field(default_factory=tuple)

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return rank(list(self.vectors) + [tuple(v)]) == self.dimension

    def same_as(self, other: "SubspaceBasis") -> bool:
        if self.dimension != other.dimension:
            return False
        return rank(list(self.vectors) + list(other.vectors)) == self.dimension

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "basis": [[fraction_str(x) for x in v] for v in self.vectors],
        }


def rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form and pivot columns.

    Pivots are normalised to 1 and rows are scanned top to bottom, so the
    result is deterministic.
    """
    a = [list(r) for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [x - factor * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    if not vectors:
        return 0
    return len(rref(vectors)[1])


def kernel_basis(M: RationalMatrix) -> SubspaceBasis:
    """Basis of {v : Mv = 0}, one vector per free column of the RREF."""
    reduced, pivots = rref(M.entries)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return SubspaceBasis(M.cols, tuple(basis))


def image_basis(M: RationalMatrix) -> SubspaceBasis:
    """Column space of M, as the nonzero rows of the RREF of M^T."""
    transpose = [M.column(j) for j in range(M.cols)]
    reduced, _ = rref(transpose)
    return SubspaceBasis(M.rows, tuple(tuple(r) for r in reduced))


def span_image(M: RationalMatrix, W: SubspaceBasis) -> SubspaceBasis:
    """M(W), reduced to an independent basis."""
    images = [M.apply(v) for v in W.vectors]
    reduced, _ = rref(images) if images else ([], [])
    return SubspaceBasis(M.rows, tuple(tuple(r) for r in reduced))


@dataclass(frozen=True)
class ChainReport:
    ker_dims: Tuple[int, ...]
    im_dims: Tuple[int, ...]
    stab_index: int
    dimension: int

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "ker_dims": list(self.ker_dims),
            "im_dims": list(self.im_dims),
            "stab_index": self.stab_index,
        }


def chain_report(M: RationalMatrix) -> ChainReport:
    """Ker(M^n) and Im(M^n) dimensions for n = 0..d."""
    M._require_square()
    d = M.rows
    ker_dims, im_dims = [], []
    P = RationalMatrix.identity(d)
    for n in range(d + 1):
        ker_dims.append(kernel_basis(P).dimension)
        im_dims.append(image_basis(P).dimension)
        if n and ker_dims[n] == ker_dims[n - 1]:
            # once Ker(M^n) = Ker(M^(n-1)) both chains are constant
            ker_dims += [ker_dims[n]] * (d - n)
            im_dims += [im_dims[n]] * (d - n)
            break
        P = P @ M
    stab_index = next((n for n in range(d) if ker_dims[n + 1] == ker_dims[n]), d)
    return ChainReport(tuple(ker_dims), tuple(im_dims), stab_index, d)


def stable_subspace(M: RationalMatrix) -> SubspaceBasis:
    """Greatest W with M(W) = W, by iterating W <- M(W) from the whole space."""
    M._require_square()
    W = SubspaceBasis(M.rows, tuple(RationalMatrix.identity(M.rows).entries))
    while True:
        nxt = span_image(M, W)
        if nxt.dimension == W.dimension:
            return nxt
        W = nxt


def decomposition_check(M: RationalMatrix, report: Optional[ChainReport] = None) -> bool:
    """V = Ker(M^N) (+) Im(M^N) at N = stabilisation index."""
    report = report or chain_report(M)
    P = M.power(report.stab_index)
    K, I = kernel_basis(P), image_basis(P)
    if K.dimension + I.dimension != M.rows:
        return False
    return rank(list(K.vectors) + list(I.vectors)) == M.rows


def restriction_is_bijective(M: RationalMatrix, W: SubspaceBasis) -> bool:
    """M maps W onto itself; in finite dimension this is bijectivity on W."""
    img = span_image(M, W)
    return img.same_as(W)


def functional_graph_matrix(succ: Sequence[int]) -> RationalMatrix:
    """Linear extension of a finite self-map to the free vector space on its points.

    Column x is the basis vector e_{succ[x]}.
    """
    d = len(succ)
    rows = [[0] * d for _ in range(d)]
    for x, y in enumerate(succ):
        rows[y][x] = 1
    return RationalMatrix.from_rows(rows)
