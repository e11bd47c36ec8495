"""Stable and attracting sets of a family of self-maps.

A point is stable for a family F when it has an infinite backward chain
x = f1(x1), x1 = f2(x2), ... with every f_i chosen freely from F.  On a
finite carrier this is the greatest Y with Y contained in the union of the
f(Y); such a Y is automatically closed under F.  The attracting set is the
intersection over n of the union of images of all length-n compositions.

Infinite words here are right-infinite and read left to right.  Answers
about them are stamped with the precision at which they were obtained.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import InputError
from .word_substitutions import Substitution, apply_star, compose

# --- finite carriers ---------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMonoidSystem:
    size: int
    maps: Tuple[Tuple[str, Tuple[int, ...]], ...]

    def __post_init__(self):
        if self.size < 1:
            raise InputError("carrier must be non-empty")
        if not self.maps:
            raise InputError("family of maps must be non-empty")
        for name, succ in self.maps:
            if len(succ) != self.size:
                raise InputError(f"map {name!r} has {len(succ)} values, expected {self.size}")
            if any(not 0 <= y < self.size for y in succ):
                raise InputError(f"map {name!r} leaves the carrier")

    @classmethod
    def from_maps(cls, size: int, maps: Dict[str, Sequence[int]]) -> "FiniteMonoidSystem":
        return cls(size, tuple((name, tuple(int(v) for v in maps[name])) for name in sorted(maps)))

    @classmethod
    def from_json(cls, doc) -> "FiniteMonoidSystem":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON: {exc}") from exc
        try:
            return cls.from_maps(int(doc["size"]), doc["maps"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"system JSON needs 'size' and 'maps': {exc}") from exc

    def to_json(self) -> dict:
        return {"size": self.size, "maps": {n: list(s) for n, s in self.maps}}

    def union_image(self, subset) -> FrozenSet[int]:
        return frozenset(succ[x] for _, succ in self.maps for x in subset)


@dataclass(frozen=True)
class MonoidSets:
    stab: FrozenSet[int]
    atrac: FrozenSet[int]

    @property
    def equal(self) -> bool:
        return self.stab == self.atrac

    def to_json(self) -> dict:
        return {"stab": sorted(self.stab), "atrac": sorted(self.atrac), "equal": self.equal}


def monoid_atrac(system: FiniteMonoidSystem) -> FrozenSet[int]:
    """Limit of A <- union of f(A), starting from the whole carrier."""
    current = frozenset(range(system.size))
    while True:
        nxt = system.union_image(current)
        if nxt == current:
            return current
        current = nxt


def monoid_stab(system: FiniteMonoidSystem) -> FrozenSet[int]:
    """Greatest Y with every point of Y hit from Y, by peeling unhit points."""
    hits = [0] * system.size
    for _, succ in system.maps:
        for y in succ:
            hits[y] += 1
    alive = [True] * system.size
    queue = [x for x in range(system.size) if hits[x] == 0]
    while queue:
        x = queue.pop()
        if not alive[x]:
            continue
        alive[x] = False
        for _, succ in system.maps:
            y = succ[x]
            hits[y] -= 1
            if hits[y] == 0 and alive[y]:
                queue.append(y)
    return frozenset(x for x in range(system.size) if alive[x])


def finite_monoid_sets(system: FiniteMonoidSystem) -> MonoidSets:
    return MonoidSets(monoid_stab(system), monoid_atrac(system))


def is_stabilized_by(system: FiniteMonoidSystem, subset) -> bool:
    return system.union_image(subset) == frozenset(subset)


def stabilized_subsets(system: FiniteMonoidSystem) -> List[FrozenSet[int]]:
    """Every subset Y with union of f(Y) equal to Y (exhaustive; small carriers only)."""
    if system.size > 16:
        raise InputError("exhaustive subset search limited to 16 points")
    out = []
    for mask in range(1 << system.size):
        y = frozenset(i for i in range(system.size) if mask >> i & 1)
        if is_stabilized_by(system, y):
            out.append(y)
    return out


# --- episturmian maps ---------------------------------------------------------------

Token = Tuple[str, str]  # ("L" | "R", letter)


def parse_directive(text: str) -> List[Token]:
    """``"La Rb La"`` -> [("L","a"), ("R","b"), ("L","a")]."""
    out = []
    for tok in text.replace(",", " ").split():
        if len(tok) != 2 or tok[0] not in "LR":
            raise InputError(f"bad directive token {tok!r}; expected like 'La' or 'Rb'")
        out.append((tok[0], tok[1]))
    if not out:
        raise InputError("empty directive")
    return out


def format_directive(tokens: Sequence[Token]) -> str:
    return " ".join(k + a for k, a in tokens)


@lru_cache(maxsize=1024)
def epi_map(token: Token, alphabet: Tuple[str, ...]) -> Substitution:
    kind, a = token
    if a not in alphabet:
        raise InputError(f"token letter {a!r} outside alphabet")
    if kind == "L":
        images = {b: b if b == a else a + b for b in alphabet}
    elif kind == "R":
        images = {b: b if b == a else b + a for b in alphabet}
    else:
        raise InputError(f"unknown token kind {kind!r}")
    return Substitution.from_dict(images)


def all_tokens(alphabet: Sequence[str]) -> List[Token]:
    """Deterministic order: every L before every R, letters alphabetical."""
    letters = sorted(alphabet)
    return [("L", a) for a in letters] + [("R", a) for a in letters]


def compose_directive(tokens: Sequence[Token], alphabet: Tuple[str, ...]) -> Substitution:
    """phi_{t1} o phi_{t2} o ... o phi_{tn}."""
    out = Substitution(alphabet, tuple((a, a) for a in alphabet))
    for t in reversed(tokens):
        out = compose(epi_map(t, alphabet), out)
    return out


def _lcp(words: Sequence[str]) -> str:
    if not words:
        return ""
    lo, hi = min(words), max(words)
    i = 0
    while i < len(lo) and lo[i] == hi[i]:
        i += 1
    return lo[:i]


def determined_prefix(sub: Substitution, cap: int) -> str:
    """Longest common prefix of sub(y) over all infinite words y, up to cap.

    Every sub(y) starts with c implies every sub(xy') starts with sub(x)c;
    iterating c <- lcp_x(sub(x) c) from the empty word climbs to that prefix.
    """
    m = sub.mapping
    c = ""
    while True:
        nxt = _lcp([m[x] + c for x in sub.alphabet])[:cap]
        if nxt == c:
            return c
        c = nxt


@dataclass
class EpiReport:
    prefix: str
    requested: int
    stable_lengths: List[int]

    @property
    def achieved(self) -> int:
        return len(self.prefix)

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix,
            "requested": self.requested,
            "achieved": self.achieved,
            "complete": self.achieved >= self.requested,
            "stable_lengths": self.stable_lengths,
        }


def episturmian_generate(tokens: Sequence[Token], length: int,
                         alphabet: Optional[Sequence[str]] = None) -> EpiReport:
    if not tokens:
        raise InputError("directive must be non-empty")
    if length < 0:
        raise InputError("length must be non-negative")
    alpha = tuple(sorted(set(alphabet) if alphabet else {a for _, a in tokens}))
    if len(alpha) < 2:
        alpha = tuple(sorted(set(alpha) | {"a", "b"}))
    stable, prefix = [], ""
    for n in range(1, len(tokens) + 1):
        prefix = determined_prefix(compose_directive(tokens[:n], alpha), length)
        stable.append(len(prefix))
    return EpiReport(prefix, length, stable)


# --- desubstitution ------------------------------------------------------------------


def prefix_preimages(sub: Substitution, prefix: str) -> List[str]:
    """Minimal words u with sub(u) consistent with prefix on their common length.

    The prefix is cut into full blocks sub(s); the last block may run past
    the end of the prefix.  Letters with empty image are skipped: they never
    change a prefix.
    """
    blocks = [(a, w) for a, w in sub.images if w]
    out: List[str] = []
    stack = [(0, "")]
    while stack:
        i, acc = stack.pop()
        rest = prefix[i:]
        for a, w in blocks:
            if rest.startswith(w):
                if len(w) == len(rest):
                    out.append(acc + a)
                else:
                    stack.append((i + len(w), acc + a))
            elif w.startswith(rest):
                out.append(acc + a)
    return sorted(set(out))


@dataclass
class DesubReport:
    prefix: str
    depth: int
    exists: bool
    branch: List[Token]
    words: List[str]
    nodes_explored: int

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix,
            "precision": {"length": len(self.prefix), "depth": self.depth},
            "exists": self.exists,
            "branch": format_directive(self.branch),
            "words": self.words,
            "nodes_explored": self.nodes_explored,
        }


def desubstitute_branches(prefix: str, depth: int, alphabet: Optional[Sequence[str]] = None,
                          prefer: Optional[Sequence[Token]] = None) -> DesubReport:
    """Depth-first search for a chain of episturmian prefix preimages.

    ``prefer`` lists a token to try first at each level; the others follow
    in the fixed order (L before R, letters alphabetical).
    """
    if not prefix:
        raise InputError("prefix must be non-empty")
    alpha = tuple(sorted(set(alphabet) if alphabet else set(prefix)))
    if len(alpha) < 2:
        alpha = tuple(sorted(set(alpha) | {"a", "b"}))
    if set(prefix) - set(alpha):
        raise InputError("prefix uses letters outside the alphabet")
    base = all_tokens(alpha)
    explored = [0]
    failed = set()

    def order(level: int) -> List[Token]:
        if prefer and level < len(prefer) and prefer[level] in base:
            first = prefer[level]
            return [first] + [t for t in base if t != first]
        return base

    def search(word: str, level: int) -> Optional[Tuple[List[Token], List[str]]]:
        if level == depth:
            return [], []
        key = (word, level)
        if key in failed:
            return None
        explored[0] += 1
        for t in order(level):
            for pre in prefix_preimages(epi_map(t, alpha), word):
                found = search(pre, level + 1)
                if found is not None:
                    return [t] + found[0], [pre] + found[1]
        failed.add(key)
        return None

    found = search(prefix, 0)
    if found is None:
        return DesubReport(prefix, depth, False, [], [], explored[0])
    return DesubReport(prefix, depth, True, found[0], found[1], explored[0])


def directives_compatible(first: Sequence[Token], second: Sequence[Token], length: int,
                          alphabet: Sequence[str]) -> bool:
    """Both directives determine prefixes that agree on their common length."""
    p = episturmian_generate(first, length, alphabet).prefix
    q = episturmian_generate(second, length, alphabet).prefix
    k = min(len(p), len(q))
    return p[:k] == q[:k]


@dataclass
class AtracDepthReport:
    prefix: str
    n: int
    status: str  # witnessed | refuted at this precision
    composition: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix,
            "n": self.n,
            "status": self.status,
            "composition": self.composition,
        }


def monoid_atrac_depth(maps: Dict[str, Substitution], prefix: str, n: int,
                       limit: int = 200_000) -> AtracDepthReport:
    """Is prefix consistent with the image of some length-n composition?

    Compositions are built forward (as substitutions), independent of the
    backward search in desubstitute_branches.
    """
    if n < 0:
        raise InputError("n must be non-negative")
    if n == 0:
        return AtracDepthReport(prefix, 0, "witnessed", [])
    names = sorted(maps)
    if len(names) ** n > limit:
        raise InputError("too many compositions at this depth")
    for combo in itertools.product(names, repeat=n):
        g = maps[combo[-1]]
        for name in reversed(combo[:-1]):
            g = compose(maps[name], g)
        if prefix_preimages(g, prefix):
            return AtracDepthReport(prefix, n, "witnessed", list(combo))
    return AtracDepthReport(prefix, n, "refuted at this precision")


# --- run-length encoding ------------------------------------------------------------


@dataclass(frozen=True)
class RunLengthPair:
    shape: Tuple[int, ...] | str
    lengths: Tuple[int, ...]
    pending: Optional[int]

    def to_json(self) -> dict:
        shape = self.shape if isinstance(self.shape, str) else list(self.shape)
        return {"shape": shape, "lengths": list(self.lengths), "pending_at_least": self.pending}


def rle_decode(word: Sequence) -> RunLengthPair:
    """Split a prefix into runs.

    The last run may continue past the prefix, so its length is only a lower
    bound and is kept apart from the determined lengths.
    """
    if len(word) == 0:
        raise InputError("cannot decode an empty prefix")
    letters, counts = [], []
    for key, grp in itertools.groupby(word):
        letters.append(key)
        counts.append(sum(1 for _ in grp))
    shape = "".join(letters) if isinstance(word, str) else tuple(letters)
    return RunLengthPair(shape, tuple(counts[:-1]), counts[-1])


def psi_apply(shape: Sequence, lengths: Sequence[int]):
    """Repeat shape[i] lengths[i] times; shape must have no equal neighbours."""
    if len(lengths) > len(shape):
        raise InputError("shape word shorter than the length sequence")
    if any(shape[i] == shape[i + 1] for i in range(len(shape) - 1)):
        raise InputError("shape word has two equal consecutive letters")
    if any(x < 1 for x in lengths):
        raise InputError("run lengths must be positive")
    out = []
    for a, x in zip(shape, lengths):
        out.extend([a] * x)
    return "".join(out) if isinstance(shape, str) else out


def kolakoski(length: int) -> List[int]:
    """Self-reading run-length word over {1, 2} starting with 2."""
    if length < 1:
        raise InputError("length must be positive")
    seq = [2, 2]
    letter, run = 1, 1
    while len(seq) < length:
        # run r has length seq[r]; the word always stays ahead of the reader
        seq.extend([letter] * seq[run])
        letter, run = 3 - letter, run + 1
    return seq[:length]


REFERENCE_KOLAKOSKI = "2211212211"


def kolakoski_report(length: int) -> Dict[str, object]:
    k = kolakoski(max(length, len(REFERENCE_KOLAKOSKI)))
    text = "".join(map(str, k))
    mismatch = next((i + 1 for i, (a, b) in enumerate(zip(text, REFERENCE_KOLAKOSKI)) if a != b), None)
    dec = rle_decode(k[:length])
    determined = len(dec.lengths)
    self_ok = list(dec.lengths) == k[:determined]
    return {
        "length": length,
        "prefix": text[:length],
        "self_encoding_holds": self_ok,
        "determined_positions": determined,
        "reference_prefix": REFERENCE_KOLAKOSKI,
        "reference_mismatch_position": mismatch,
    }


@dataclass
class SmoothReport:
    ok: bool
    depth_reached: int
    failure: Optional[Dict[str, object]] = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "depth_reached": self.depth_reached, "failure": self.failure}


def smooth_check(word: Sequence[int], alphabet: Sequence[int] = (1, 2), depth: int = 5) -> SmoothReport:
    """Repeatedly run-length decode and require every iterate to stay over the alphabet."""
    sigma = set(alphabet)
    if not sigma or any((not isinstance(a, int)) or a < 1 for a in sigma):
        raise InputError("alphabet must be positive integers")
    top = max(sigma)
    current = list(word)
    for d in range(depth + 1):
        for pos, a in enumerate(current, start=1):
            if a not in sigma:
                return SmoothReport(False, d, {"iterate": d, "position": pos, "value": a})
        if d == depth or not current:
            return SmoothReport(True, d)
        dec = rle_decode(current)
        if dec.pending is not None and dec.pending > top:
            run_start = len(current) - dec.pending + 1
            return SmoothReport(False, d, {"iterate": d, "position": run_start, "run_length_at_least": dec.pending})
        current = list(dec.lengths)
    return SmoothReport(True, depth)
