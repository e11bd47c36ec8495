"""Exact piecewise-affine self-maps of [0, 1] with rational data.

Sets are finite unions of intervals whose endpoints may be open or closed;
single points are degenerate closed intervals.  No floating point is used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ._util import RationalLike, fraction_str, parse_fraction
from .errors import InputError

ZERO, ONE = Fraction(0), Fraction(1)


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lc, hc)

    def representative(self) -> Fraction:
        """A deterministic member: a closed endpoint if there is one, else the midpoint."""
        if self.lo_closed:
            return self.lo
        if self.hi_closed:
            return self.hi
        return (self.lo + self.hi) / 2

    def __str__(self) -> str:
        if self.lo == self.hi:
            return "{" + fraction_str(self.lo) + "}"
        return ("[" if self.lo_closed else "(") + f"{fraction_str(self.lo)}, {fraction_str(self.hi)}" + \
            ("]" if self.hi_closed else ")")


class IntervalUnion:
    """Sorted, disjoint, maximally merged union of intervals."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[Interval] = ()):
        self.parts: Tuple[Interval, ...] = _normalize(parts)

    @classmethod
    def unit(cls) -> "IntervalUnion":
        return cls([Interval(ZERO, ONE)])

    @classmethod
    def point(cls, x) -> "IntervalUnion":
        x = parse_fraction(x) if not isinstance(x, Fraction) else x
        return cls([Interval(x, x)])

    @property
    def empty(self) -> bool:
        return not self.parts

    def contains(self, x: Fraction) -> bool:
        return any(p.contains(x) for p in self.parts)

    def intersect_interval(self, iv: Interval) -> "IntervalUnion":
        return IntervalUnion(p.intersect(iv) for p in self.parts)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.parts + other.parts)

    def issubset(self, other: "IntervalUnion") -> bool:
        # each part must sit inside a single part of other (other is merged)
        for p in self.parts:
            if not any(p.intersect(q) == p for q in other.parts):
                return False
        return True

    def points(self) -> List[Fraction]:
        return [p.lo for p in self.parts if p.lo == p.hi]

    def rationals_with_denominator_at_most(self, q_max: int) -> List[Fraction]:
        out = set()
        for q in range(1, q_max + 1):
            for p in range(0, q + 1):
                x = Fraction(p, q)
                if self.contains(x):
                    out.add(x)
        return sorted(out)

    def representative(self) -> Fraction:
        if not self.parts:
            raise InputError("empty set has no representative")
        return self.parts[0].representative()

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalUnion) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __str__(self) -> str:
        return " u ".join(str(p) for p in self.parts) if self.parts else "{}"

    def __repr__(self):
        return f"IntervalUnion({self})"

    def to_json(self) -> List[dict]:
        return [
            {"lo": fraction_str(p.lo), "hi": fraction_str(p.hi), "lo_closed": p.lo_closed, "hi_closed": p.hi_closed}
            for p in self.parts
        ]


def _normalize(parts: Iterable[Interval]) -> Tuple[Interval, ...]:
    items = sorted((p for p in parts if not p.empty), key=lambda p: (p.lo, not p.lo_closed))
    out: List[Interval] = []
    for p in items:
        if out:
            last = out[-1]
            touches = p.lo < last.hi or (p.lo == last.hi and (last.hi_closed or p.lo_closed))
            if touches:
                if p.hi > last.hi:
                    hi, hc = p.hi, p.hi_closed
                elif p.hi < last.hi:
                    hi, hc = last.hi, last.hi_closed
                else:
                    hi, hc = last.hi, last.hi_closed or p.hi_closed
                lc = last.lo_closed or (p.lo == last.lo and p.lo_closed)
                out[-1] = Interval(last.lo, hi, lc, hc)
                continue
        out.append(p)
    return tuple(out)


# --- maps ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    domain: Interval
    slope: Fraction
    offset: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.offset

    def image(self, iv: Interval) -> Interval:
        k = iv.intersect(self.domain)
        if k.empty:
            return k
        if self.slope == 0:
            return Interval(self.offset, self.offset)
        a, b = self(k.lo), self(k.hi)
        if self.slope > 0:
            return Interval(a, b, k.lo_closed, k.hi_closed)
        return Interval(b, a, k.hi_closed, k.lo_closed)

    def preimage(self, iv: Interval) -> Interval:
        if self.slope == 0:
            return self.domain if iv.contains(self.offset) else Interval(ONE, ZERO)
        a = (iv.lo - self.offset) / self.slope
        b = (iv.hi - self.offset) / self.slope
        raw = Interval(a, b, iv.lo_closed, iv.hi_closed) if self.slope > 0 else \
            Interval(b, a, iv.hi_closed, iv.lo_closed)
        return raw.intersect(self.domain)


@dataclass(frozen=True)
class PWLMap:
    """Piecewise-affine map of [0,1].

    ``owners[i]`` says which neighbour owns the interior breakpoint b_{i+1}:
    "right" (default, pieces are [b_i, b_{i+1})) or "left".
    """

    breakpoints: Tuple[Fraction, ...]
    slopes: Tuple[Fraction, ...]
    offsets: Tuple[Fraction, ...]
    owners: Tuple[str, ...]

    def __post_init__(self):
        b = self.breakpoints
        if len(b) < 2 or b[0] != 0 or b[-1] != 1:
            raise InputError("breakpoints must run from 0 to 1")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise InputError("breakpoints must increase strictly")
        r = len(b) - 1
        if len(self.slopes) != r or len(self.offsets) != r:
            raise InputError(f"expected {r} pieces")
        if len(self.owners) != r - 1 or any(o not in ("left", "right") for o in self.owners):
            raise InputError("owners must give 'left' or 'right' for each interior breakpoint")
        for piece in self.pieces:
            d = piece.domain
            for v in (piece(d.lo), piece(d.hi)):
                if not ZERO <= v <= ONE:
                    raise InputError("a piece maps outside [0,1]")

    @classmethod
    def build(cls, breakpoints: Sequence[RationalLike], pieces: Sequence[Tuple[RationalLike, RationalLike]],
              owners: Optional[Sequence[str]] = None) -> "PWLMap":
        bps = tuple(parse_fraction(x) for x in breakpoints)
        slopes = tuple(parse_fraction(p) for p, _ in pieces)
        offsets = tuple(parse_fraction(q) for _, q in pieces)
        own = tuple(owners) if owners is not None else ("right",) * (len(bps) - 2)
        return cls(bps, slopes, offsets, own)

    @classmethod
    def from_json(cls, doc) -> "PWLMap":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON: {exc}") from exc
        try:
            pieces = [(p["p"], p["q"]) for p in doc["pieces"]]
            return cls.build(doc["breakpoints"], pieces, doc.get("owners"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"map JSON needs 'breakpoints' and 'pieces': {exc}") from exc

    def to_json(self) -> dict:
        return {
            "breakpoints": [fraction_str(x) for x in self.breakpoints],
            "pieces": [{"p": fraction_str(p), "q": fraction_str(q)} for p, q in zip(self.slopes, self.offsets)],
            "owners": list(self.owners),
        }

    @property
    def pieces(self) -> List[Piece]:
        b, r = self.breakpoints, len(self.breakpoints) - 1
        out = []
        for i in range(r):
            lo_closed = i == 0 or self.owners[i - 1] == "right"
            hi_closed = i == r - 1 or self.owners[i] == "left"
            out.append(Piece(Interval(b[i], b[i + 1], lo_closed, hi_closed), self.slopes[i], self.offsets[i]))
        return out

    def __call__(self, x) -> Fraction:
        x = x if isinstance(x, Fraction) else parse_fraction(x)
        for piece in self.pieces:
            if piece.domain.contains(x):
                return piece(x)
        raise InputError(f"{x} lies outside [0,1]")


def discontinuous_example_map() -> PWLMap:
    """1/2 on [0,1/2]; (3/2)(x - 1/2) on (1/2,1]."""
    return PWLMap.build(["0", "1/2", "1"], [("0", "1/2"), ("3/2", "-3/4")], owners=["left"])


def continuous_example_map() -> PWLMap:
    """Continuous variant: 1/2 on [0,1/2], (3/2)x - 1/4 on [1/2,5/6], 1 on [5/6,1].

    Its attracting set is [1/2, 1] while only 1/2 and 1 are periodic.
    """
    return PWLMap.build(["0", "1/2", "5/6", "1"], [("0", "1/2"), ("3/2", "-1/4"), ("0", "1")])


def image(f: PWLMap, u: IntervalUnion) -> IntervalUnion:
    return IntervalUnion(piece.image(iv) for piece in f.pieces for iv in u.parts)


def preimage(f: PWLMap, u: IntervalUnion) -> IntervalUnion:
    return IntervalUnion(piece.preimage(iv) for piece in f.pieces for iv in u.parts)


def atrac_iterates(f: PWLMap, n: int) -> List[IntervalUnion]:
    """f([0,1]) containing f^2([0,1]) containing ... f^n([0,1])."""
    if n < 1:
        raise InputError("n must be at least 1")
    out, cur = [], IntervalUnion.unit()
    for k in range(1, n + 1):
        nxt = image(f, cur)
        if nxt.empty:
            raise AssertionError(f"image {k} is empty")
        if not nxt.issubset(cur):
            raise AssertionError(f"image {k} is not inside image {k - 1}")
        out.append(nxt)
        cur = nxt
    return out


def fixed_points(f: PWLMap) -> IntervalUnion:
    parts = []
    for piece in f.pieces:
        if piece.slope == 1:
            if piece.offset == 0:
                parts.append(piece.domain)
            continue
        x = piece.offset / (1 - piece.slope)
        if piece.domain.contains(x):
            parts.append(Interval(x, x))
    return IntervalUnion(parts)


def backward_chain_point(f: PWLMap, x, depth: int) -> Optional[List[Fraction]]:
    """[x, x_1, ..., x_depth] with f(x_{k+1}) = x_k, or None if x has no depth-fold preimage.

    The exact preimage sets P_k of {x} under f^k are built first; a point of
    P_depth is then pushed forward, which lands on x by construction.
    """
    x = x if isinstance(x, Fraction) else parse_fraction(x)
    if not ZERO <= x <= ONE:
        raise InputError("x must lie in [0,1]")
    if depth < 0:
        raise InputError("depth must be non-negative")
    level = IntervalUnion.point(x)
    for _ in range(depth):
        level = preimage(f, level)
        if level.empty:
            return None
    y = level.representative()
    forward = [y]
    for _ in range(depth):
        forward.append(f(forward[-1]))
    if forward[-1] != x:
        raise AssertionError("forward image of the chosen preimage missed the target")
    return list(reversed(forward))


def forward_orbit(f: PWLMap, x, limit: int = 10_000) -> Dict[str, object]:
    """Iterate until a value repeats; report preperiod and cycle, or give up at limit."""
    x = x if isinstance(x, Fraction) else parse_fraction(x)
    seen: Dict[Fraction, int] = {}
    seq = []
    v = x
    while v not in seen and len(seq) < limit:
        seen[v] = len(seq)
        seq.append(v)
        v = f(v)
    if v not in seen:
        return {"resolved": False, "orbit": seq}
    start = seen[v]
    return {"resolved": True, "preperiod": start, "cycle": seq[start:], "orbit": seq}


def is_periodic(f: PWLMap, x, limit: int = 10_000) -> Optional[bool]:
    orb = forward_orbit(f, x, limit)
    if not orb["resolved"]:
        return None
    return orb["preperiod"] == 0


def stab_minus_orb_witness(f: PWLMap, depth: int, q_max: int = 64) -> Optional[Dict[str, object]]:
    """A rational x in f^depth([0,1]) with a depth-long backward chain whose
    forward orbit ends in a cycle avoiding x."""
    top = atrac_iterates(f, depth)[-1]
    candidates = sorted(top.rationals_with_denominator_at_most(q_max), key=lambda r: (r.denominator, r.numerator))
    for x in candidates:
        chain = backward_chain_point(f, x, depth)
        if chain is None:
            continue
        orb = forward_orbit(f, x)
        if orb["resolved"] and orb["preperiod"] > 0:
            return {
                "x": fraction_str(x),
                "chain": [fraction_str(c) for c in chain],
                "forward": [fraction_str(c) for c in orb["orbit"]],
                "cycle": [fraction_str(c) for c in orb["cycle"]],
            }
    return None


def sampled_chain_check(f: PWLMap, depth: int, q_max: int = 64) -> Dict[str, object]:
    """Every sampled rational of f^depth([0,1]) must admit a depth-long backward chain."""
    top = atrac_iterates(f, depth)[-1]
    pts = top.rationals_with_denominator_at_most(q_max)
    failures = [fraction_str(x) for x in pts if backward_chain_point(f, x, depth) is None]
    return {"depth": depth, "sampled": len(pts), "failures": failures, "ok": not failures}
