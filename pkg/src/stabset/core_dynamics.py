"""Self-maps of finite sets and the Z^2 example with empty stable set.

For a self-map phi of X the four sets are

* Fix   -- points with phi(x) = x,
* Orb   -- periodic points (fixed by some iterate),
* Stab  -- points admitting an infinite backward chain x = x0, x1, ... with
  phi(x_{n+1}) = x_n,
* Atrac -- the eventual image, the intersection of all phi^n(X).

They always satisfy Fix <= Orb <= Stab <= Atrac.  On a finite carrier the
last two coincide; here they are computed by two unrelated algorithms so that
the equality is an actual check.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import InputError

__all__ = [
    "FiniteSelfMap",
    "SetQuad",
    "Z2Point",
    "ClassifyReport",
    "four_sets",
    "fixed_set",
    "orbit_set",
    "attracting_set",
    "greatest_stabilized_subset",
    "backward_chain",
    "is_stabilized",
    "example21_apply",
    "example21_preimages",
    "example21_classify",
    "example21_backward_search",
    "example21_truncate",
]


@dataclass(frozen=True)
class FiniteSelfMap:
    """phi on {0, ..., size-1}, stored as the successor table succ[i] = phi(i)."""

    size: int
    succ: Tuple[int, ...]

    def __post_init__(self):
        succ = tuple(self.succ)
        object.__setattr__(self, "succ", succ)
        if not isinstance(self.size, int) or self.size < 1:
            raise InputError(f"size must be a positive integer, got {self.size!r}")
        if len(succ) != self.size:
            raise InputError(f"succ has {len(succ)} entries, expected {self.size}")
        for i, j in enumerate(succ):
            if not isinstance(j, int) or isinstance(j, bool) or not 0 <= j < self.size:
                raise InputError(f"succ[{i}] = {j!r} is not a point label")

    @classmethod
    def from_succ(cls, succ: Sequence[int]) -> "FiniteSelfMap":
        return cls(len(succ), tuple(succ))

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteSelfMap":
        try:
            return cls(doc["size"], tuple(doc["succ"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"functional graph needs 'size' and 'succ': {exc}") from exc

    def to_json(self) -> dict:
        return {"size": self.size, "succ": list(self.succ)}

    def __call__(self, x: int) -> int:
        return self.succ[x]

    def image(self, subset: Iterable[int]) -> FrozenSet[int]:
        return frozenset(self.succ[x] for x in subset)

    def power(self, n: int) -> "FiniteSelfMap":
        succ = list(range(self.size))
        for _ in range(n):
            succ = [self.succ[x] for x in succ]
        return FiniteSelfMap(self.size, tuple(succ))

    def preimages(self) -> List[List[int]]:
        """Preimage lists, each in ascending label order."""
        pre: List[List[int]] = [[] for _ in range(self.size)]
        for x, y in enumerate(self.succ):
            pre[y].append(x)
        return pre


@dataclass(frozen=True)
class SetQuad:
    """Fix, Orb, Stab and Atrac of one self-map."""

    fix: FrozenSet
    orb: FrozenSet
    stab: FrozenSet
    atrac: FrozenSet

    def chain_holds(self) -> bool:
        return self.fix <= self.orb <= self.stab <= self.atrac

    def to_json(self) -> dict:
        return {name: sorted(getattr(self, name)) for name in ("fix", "orb", "stab", "atrac")}


def fixed_set(f: FiniteSelfMap) -> FrozenSet[int]:
    return frozenset(i for i, j in enumerate(f.succ) if i == j)


def orbit_set(f: FiniteSelfMap) -> FrozenSet[int]:
    """Points lying on a cycle of the functional graph.

    Each walk is coloured by the id of the start it came from; a walk that
    runs into its own colour has closed a cycle, whose points are recorded.
    """
    colour = [-1] * f.size
    cyclic = set()
    for start in range(f.size):
        x = start
        while colour[x] == -1:
            colour[x] = start
            x = f.succ[x]
        if colour[x] == start:
            y = x
            while True:
                cyclic.add(y)
                y = f.succ[y]
                if y == x:
                    break
    return frozenset(cyclic)


def attracting_set(f: FiniteSelfMap) -> FrozenSet[int]:
    """Intersection of phi^n(X), by iterating the set image until it stops shrinking."""
    current = frozenset(range(f.size))
    for _ in range(f.size + 1):
        nxt = f.image(current)
        if nxt == current:
            return current
        current = nxt
    raise AssertionError("image iteration did not stabilise within size steps")


def greatest_stabilized_subset(f: FiniteSelfMap) -> FrozenSet[int]:
    """Largest Y with phi(Y) = Y.

    Greatest-fixpoint computation by peeling: a point with no preimage left in
    the candidate set cannot be in Y, so it is removed, which may strip the
    last preimage of its image, and so on.  What survives is closed under
    phi and every survivor has a surviving preimage.
    """
    indeg = [0] * f.size
    for y in f.succ:
        indeg[y] += 1
    alive = [True] * f.size
    queue = deque(x for x in range(f.size) if indeg[x] == 0)
    while queue:
        x = queue.popleft()
        if not alive[x]:
            continue
        alive[x] = False
        y = f.succ[x]
        indeg[y] -= 1
        if indeg[y] == 0 and alive[y]:
            queue.append(y)
    return frozenset(x for x in range(f.size) if alive[x])


def four_sets(f: FiniteSelfMap) -> SetQuad:
    return SetQuad(
        fix=fixed_set(f),
        orb=orbit_set(f),
        stab=greatest_stabilized_subset(f),
        atrac=attracting_set(f),
    )


def is_stabilized(f: FiniteSelfMap, subset: Iterable[int]) -> bool:
    s = frozenset(subset)
    return f.image(s) == s


def _backward_heights(f: FiniteSelfMap, pre: List[List[int]]) -> List[Optional[int]]:
    """Longest backward chain length per point; None means unbounded."""
    stab = greatest_stabilized_subset(f)
    height: List[Optional[int]] = [None] * f.size
    done = [x in stab for x in range(f.size)]
    # outside Stab the preimage relation is a finite forest
    for root in range(f.size):
        if done[root]:
            continue
        stack = [(root, False)]
        while stack:
            x, expanded = stack.pop()
            if done[x]:
                continue
            if expanded:
                best = 0
                for p in pre[x]:
                    best = max(best, height[p] + 1)
                height[x] = best
                done[x] = True
            else:
                stack.append((x, True))
                stack.extend((p, False) for p in pre[x] if not done[p])
    return height


def backward_chain(f: FiniteSelfMap, x: int, depth: int) -> Optional[List[int]]:
    """A chain x = x0, x1, ..., x_depth with phi(x_{i+1}) = x_i, or None.

    At every step the smallest-labelled preimage that still admits the
    remaining depth is taken, so witnesses are reproducible.
    """
    if not 0 <= x < f.size:
        raise InputError(f"point {x} outside 0..{f.size - 1}")
    if depth < 0:
        raise InputError("depth must be non-negative")
    pre = f.preimages()
    height = _backward_heights(f, pre)

    def reaches(y: int, need: int) -> bool:
        return height[y] is None or height[y] >= need

    if not reaches(x, depth):
        return None
    chain = [x]
    for remaining in range(depth - 1, -1, -1):
        cur = chain[-1]
        nxt = next(p for p in pre[cur] if reaches(p, remaining))
        chain.append(nxt)
    return chain


# --- the Z^2 example -------------------------------------------------------
#
# X = {(n, m) : 0 <= m <= max(n - 1, 0)},
# phi(n, m) = (n, m - 1) for m > 0 and phi(n, 0) = (min(n - 1, 0), 0).


@dataclass(frozen=True, order=True)
class Z2Point:
    n: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise InputError("Z2Point coordinates must be integers")
        if not 0 <= self.m <= max(self.n - 1, 0):
            raise InputError(f"({self.n},{self.m}) violates 0 <= m <= max(n-1, 0)")

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m}

    @classmethod
    def from_json(cls, doc: dict) -> "Z2Point":
        try:
            return cls(int(doc["n"]), int(doc["m"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"Z2 point needs integer 'n' and 'm': {exc}") from exc


UNBOUNDED_FINITE = "unbounded-finite-chains"
INFINITE_CHAIN = "infinite-chain"
BOUNDED = "bounded-chains"


@dataclass(frozen=True)
class ClassifyReport:
    in_atrac: bool
    in_stab: bool
    chain_behavior: str
    max_chain_length: Optional[int] = None

    def to_json(self) -> dict:
        out = {
            "in_atrac": self.in_atrac,
            "in_stab": self.in_stab,
            "chain_behavior": self.chain_behavior,
        }
        if self.max_chain_length is not None:
            out["max_chain_length"] = self.max_chain_length
        return out


def example21_apply(p: Z2Point) -> Z2Point:
    if p.m > 0:
        return Z2Point(p.n, p.m - 1)
    return Z2Point(min(p.n - 1, 0), 0)


def example21_preimages(p: Z2Point, k_limit: int) -> Iterator[Z2Point]:
    """Preimages of p in ascending (n, m) order.

    (0, 0) has the infinitely many preimages (k, 0), k >= 1; only
    k <= k_limit are produced.  Every other point has at most two.
    """
    out = []
    if p.m + 1 <= max(p.n - 1, 0):
        out.append(Z2Point(p.n, p.m + 1))
    if p.m == 0:
        if p.n < 0:
            out.append(Z2Point(p.n + 1, 0))
        elif p.n == 0:
            out.extend(Z2Point(k, 0) for k in range(1, k_limit + 1))
    return iter(sorted(out))


def example21_backward_search(p: Z2Point, depth: int) -> Optional[List[Z2Point]]:
    """Depth-limited backward search, independent of the closed-form classifier.

    Explores preimages in ascending order with memoised dead ends.  For the
    one infinitely-branching point (0, 0) the columns (k, 0) with
    k <= remaining depth are enough: any longer column already supplies a
    chain of the full remaining length, so nothing is lost.
    """
    if depth < 0:
        raise InputError("depth must be non-negative")
    dead: Dict[Z2Point, int] = {}  # point -> smallest remaining depth known to fail

    def search(x: Z2Point, remaining: int) -> Optional[List[Z2Point]]:
        if remaining == 0:
            return [x]
        if x in dead and dead[x] <= remaining:
            return None
        for y in example21_preimages(x, k_limit=remaining):
            tail = search(y, remaining - 1)
            if tail is not None:
                return [x] + tail
        dead[x] = min(dead.get(x, remaining), remaining)
        return None

    limit = sys.getrecursionlimit()
    if depth + 50 > limit:
        sys.setrecursionlimit(depth + 100)
    try:
        return search(p, depth)
    finally:
        sys.setrecursionlimit(limit)


def example21_classify(p: Z2Point) -> ClassifyReport:
    """Closed-form membership for the Z^2 example.

    Points (n, 0) with n <= 0 have backward chains of every finite length
    (walk to (0, 0), jump to a column (k, 0), climb to (k, k-1)) but every
    maximal chain ends, so they are in Atrac and not in Stab.  A point (n, m)
    with n >= 1 only has the column above it, of height n - 1 - m.
    """
    if p.m == 0 and p.n <= 0:
        return ClassifyReport(True, False, UNBOUNDED_FINITE)
    return ClassifyReport(False, False, BOUNDED, max_chain_length=p.n - 1 - p.m)


def example21_truncate(N: int) -> Tuple[FiniteSelfMap, List[Z2Point]]:
    """Restrict the example to -N <= n <= N, with (-N, 0) made a self-loop.

    Returns the induced map and the label -> point table (points sorted).
    """
    if N < 1:
        raise InputError("N must be at least 1")
    points = [Z2Point(n, m) for n in range(-N, N + 1) for m in range(max(n - 1, 0) + 1)]
    index = {pt: i for i, pt in enumerate(points)}
    succ = []
    for pt in points:
        img = pt if (pt.n == -N and pt.m == 0) else example21_apply(pt)
        succ.append(index[img])
    return FiniteSelfMap(len(points), tuple(succ)), points
