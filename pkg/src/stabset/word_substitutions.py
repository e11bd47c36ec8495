"""Substitutions on finite alphabets, erasing ones included.

Letters are single characters and words are plain strings; the empty word is
"".  Everything here is exact: infinite words are handled through prefixes
whose symbols are provably determined.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import InputError

EMPTY_MARK = "."


@dataclass(frozen=True)
class Substitution:
    alphabet: Tuple[str, ...]
    images: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        if not self.alphabet:
            raise InputError("empty alphabet")
        if any(len(a) != 1 for a in self.alphabet):
            raise InputError("letters must be single characters")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InputError("repeated letter in alphabet")
        keys = [k for k, _ in self.images]
        if sorted(keys) != sorted(self.alphabet):
            raise InputError("substitution must give exactly one image per letter")
        letters = set(self.alphabet)
        for k, v in self.images:
            bad = set(v) - letters
            if bad:
                raise InputError(f"image of {k!r} uses letters outside the alphabet: {sorted(bad)}")

    @classmethod
    def from_dict(cls, images: Dict[str, str]) -> "Substitution":
        alpha = tuple(sorted(images))
        return cls(alpha, tuple((a, images[a]) for a in alpha))

    @classmethod
    def from_dsl(cls, text: str) -> "Substitution":
        """Parse lines ``a -> ab``; ``.`` stands for the empty word, ``#`` starts a comment."""
        images: Dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" not in line:
                raise InputError(f"line {lineno}: expected 'letter -> image'")
            lhs, rhs = (p.strip() for p in line.split("->", 1))
            if len(lhs) != 1:
                raise InputError(f"line {lineno}: left side must be one letter")
            if lhs in images:
                raise InputError(f"line {lineno}: letter {lhs!r} defined twice")
            images[lhs] = "" if rhs == EMPTY_MARK else rhs.replace(" ", "")
        if not images:
            raise InputError("no rules found")
        return cls.from_dict(images)

    def to_dsl(self) -> str:
        return "".join(f"{a} -> {w or EMPTY_MARK}\n" for a, w in self.images)

    @property
    def mapping(self) -> Dict[str, str]:
        return dict(self.images)

    def __call__(self, letter: str) -> str:
        return self.mapping[letter]

    def is_non_erasing(self) -> bool:
        return not mortality(self).mortal

    def to_json(self) -> dict:
        return {"alphabet": list(self.alphabet), "images": dict(self.images)}


def check_word(sub: Substitution, word: str) -> None:
    bad = set(word) - set(sub.alphabet)
    if bad:
        raise InputError(f"word uses letters outside the alphabet: {sorted(bad)}")


def apply_star(sub: Substitution, word: str) -> str:
    check_word(sub, word)
    m = sub.mapping
    return "".join(m[c] for c in word)


def apply_star_n(sub: Substitution, word: str, n: int) -> str:
    if n < 0:
        raise InputError("power must be non-negative")
    for _ in range(n):
        word = apply_star(sub, word)
    return word


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """outer o inner: letter s goes to outer(inner(s))."""
    if outer.alphabet != inner.alphabet:
        raise InputError("composition needs a common alphabet")
    return Substitution(inner.alphabet, tuple((a, apply_star(outer, w)) for a, w in inner.images))


@lru_cache(maxsize=4096)
def power(sub: Substitution, r: int) -> Substitution:
    if r < 0:
        raise InputError("power must be non-negative")
    out = Substitution(sub.alphabet, tuple((a, a) for a in sub.alphabet))
    for _ in range(r):
        out = compose(sub, out)
    return out


# --- mortality -----------------------------------------------------------------


@dataclass(frozen=True)
class MortalityReport:
    mortal: FrozenSet[str]
    exponent: int
    death_time: Tuple[Tuple[str, int], ...]

    def to_json(self) -> dict:
        return {"mortal": sorted(self.mortal), "exponent": self.exponent, "death_time": dict(self.death_time)}


@lru_cache(maxsize=4096)
def mortality(sub: Substitution) -> MortalityReport:
    """Mortal letters and the mortality exponent.

    A letter dies at step 1 + (latest death among the letters of its image),
    so the exponent is the largest death time.
    """
    death: Dict[str, int] = {}
    changed = True
    while changed:
        changed = False
        for a, w in sub.images:
            if a not in death and all(c in death for c in w):
                death[a] = 1 + max((death[c] for c in w), default=0)
                changed = True
    return MortalityReport(frozenset(death), max(death.values(), default=0), tuple(sorted(death.items())))


def immortal_letters(sub: Substitution) -> Tuple[str, ...]:
    dead = mortality(sub).mortal
    return tuple(a for a in sub.alphabet if a not in dead)


def immortal_count(sub: Substitution, word: str, mortal: Optional[FrozenSet[str]] = None) -> int:
    """Number of immortal letters in the word (counted with multiplicity)."""
    dead = mortality(sub).mortal if mortal is None else mortal
    return sum(1 for c in word if c not in dead)


def first_immortal(sub: Substitution, word: str, mortal: Optional[FrozenSet[str]] = None) -> Optional[int]:
    dead = mortality(sub).mortal if mortal is None else mortal
    return next((i for i, c in enumerate(word) if c not in dead), None)


# --- fixed points --------------------------------------------------------------


@dataclass(frozen=True)
class FixedPointSpec:
    seed: str
    power: int
    v1: str
    v2: str
    case: str  # "finite" or "infinite"

    def to_json(self) -> dict:
        return {"seed": self.seed, "power": self.power, "v1": self.v1, "v2": self.v2, "case": self.case}


@dataclass(frozen=True)
class FixedPointReport:
    specs: Tuple[FixedPointSpec, ...]
    return_times: Tuple[Tuple[str, int], ...]
    m: Optional[int]

    def to_json(self) -> dict:
        return {
            "specs": [s.to_json() for s in self.specs],
            "return_times": dict(self.return_times),
            "m": self.m,
        }


def _lcm(values: Iterable[int]) -> Optional[int]:
    values = list(values)
    if not values:
        return None
    return reduce(lambda a, b: a * b // gcd(a, b), values)


def leading_letter_map(sub: Substitution) -> Dict[str, str]:
    """Immortal letter s -> first immortal letter of its image.

    Mortal letters only ever produce mortal letters, so the first immortal
    letter of sub^r(s) is this map iterated r times.
    """
    rep = mortality(sub)
    out = {}
    for a, w in sub.images:
        if a in rep.mortal:
            continue
        i = first_immortal(sub, w, rep.mortal)
        out[a] = w[i]
    return out


@lru_cache(maxsize=4096)
def fixed_point_specs(sub: Substitution) -> FixedPointReport:
    rep = mortality(sub)
    nxt = leading_letter_map(sub)
    k = len(nxt)
    specs, returns = [], []
    for s in sorted(nxt):
        t, r = nxt[s], 1
        while t != s and r < k:
            t, r = nxt[t], r + 1
        if t != s:
            continue
        returns.append((s, r))
        image = apply_star(power(sub, r), s)
        i = first_immortal(sub, image, rep.mortal)
        v1, v2 = image[:i], image[i + 1:]
        case = "finite" if immortal_count(sub, v2, rep.mortal) == 0 else "infinite"
        specs.append(FixedPointSpec(s, r, v1, v2, case))
    return FixedPointReport(tuple(specs), tuple(returns), _lcm(r for _, r in returns))


def spec_for_seed(sub: Substitution, seed: str) -> FixedPointSpec:
    for spec in fixed_point_specs(sub).specs:
        if spec.seed == seed:
            return spec
    raise InputError(f"letter {seed!r} never returns to the front of its own image")


def finite_fixed_word(sub: Substitution, spec: FixedPointSpec) -> str:
    """psi^q(seed) with psi = sub^r and q its mortality exponent; fixed by psi."""
    if spec.case != "finite":
        raise InputError("spec describes an infinite fixed point")
    psi = power(sub, spec.power)
    return apply_star_n(psi, spec.seed, max(mortality(psi).exponent, 1))


def expand_fixed_point(sub: Substitution, spec: FixedPointSpec, length: int) -> str:
    """Length-L prefix of the infinite word fixed by sub^r, grown from the seed.

    Once n reaches the mortality exponent q of psi = sub^r, psi^n(seed) is a
    prefix of the fixed word, and it grows by at least one symbol per step.
    """
    if spec.case != "infinite":
        raise InputError("spec describes a finite fixed word; use finite_fixed_word")
    if length < 0:
        raise InputError("length must be non-negative")
    psi = power(sub, spec.power)
    q = mortality(psi).exponent
    word, n = spec.seed, 0
    while n < q or len(word) < length:
        word = apply_star(psi, word)
        n += 1
    return word[:length]


def length_growth(sub: Substitution, seed: str, r: int, n_max: int) -> List[int]:
    """len(sub^(r n)(seed)) for n = 0..n_max via letter-count vectors."""
    psi = power(sub, r)
    idx = {a: i for i, a in enumerate(sub.alphabet)}
    rows = [[w.count(b) for b in sub.alphabet] for _, w in psi.images]
    counts = [0] * len(sub.alphabet)
    counts[idx[seed]] = 1
    out = [1]
    for _ in range(n_max):
        new = [0] * len(counts)
        for i, c in enumerate(counts):
            if c:
                for j, x in enumerate(rows[i]):
                    new[j] += c * x
        counts = new
        out.append(sum(counts))
    return out


# --- preimages and finite-word membership -------------------------------------


def _parse(blocks: Sequence[Tuple[str, str]], word: str) -> List[str]:
    """All letter sequences whose block concatenation equals word."""
    n = len(word)
    ways: List[List[str]] = [[] for _ in range(n + 1)]
    ways[n] = [""]
    for i in range(n - 1, -1, -1):
        for letter, block in blocks:
            if block and word.startswith(block, i):
                ways[i].extend(letter + rest for rest in ways[i + len(block)])
    return sorted(set(ways[0]))


def canonical_preimages(sub: Substitution, word: str) -> List[str]:
    """Preimages built only from letters with nonempty image, sorted."""
    check_word(sub, word)
    return _parse([(a, w) for a, w in sub.images if w], word)


def _parses(word: str, blocks: Iterable[str]) -> bool:
    cap = len(word)
    reach = [False] * (cap + 1)
    reach[0] = True
    for i in range(cap):
        if reach[i]:
            for b in blocks:
                if word.startswith(b, i):
                    reach[i + len(b)] = True
    return reach[cap]


def preimage_depths(sub: Substitution, word: str, depth: int) -> List[bool]:
    """Entry n-1 says whether word lies in the image of sub^n, for n = 1..depth.

    Letters erased by sub^n can be dropped from any preimage, so it suffices
    to parse word into the nonempty blocks sub^n(s).  Blocks longer than the
    word are never usable and are not materialised.
    """
    check_word(sub, word)
    cap = len(word)
    current: Dict[str, Optional[str]] = {a: a for a in sub.alphabet}
    base = sub.mapping
    out = []
    for _ in range(depth):
        nxt: Dict[str, Optional[str]] = {}
        for a in sub.alphabet:
            parts = [current[c] for c in base[a]]
            if any(p is None for p in parts):
                nxt[a] = None
                continue
            w = "".join(parts)
            nxt[a] = w if len(w) <= cap else None
        current = nxt
        out.append(not word or _parses(word, {w for w in current.values() if w}))
    return out


def has_preimage_at_depth(sub: Substitution, word: str, n: int) -> bool:
    """Is word in the image of sub^n?"""
    return True if n == 0 else preimage_depths(sub, word, n)[-1]


@dataclass
class MembershipReport:
    in_orb: bool
    in_stab: bool
    in_atrac: bool
    period: Optional[int]
    method: str
    cross_check: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "in_orb": self.in_orb,
            "in_stab": self.in_stab,
            "in_atrac": self.in_atrac,
            "period": self.period,
            "method": self.method,
            "cross_check": self.cross_check,
        }


def orbit_period(sub: Substitution, word: str) -> Optional[int]:
    """Least p >= 1 with sub^p(word) = word, or None.

    Forward iteration stops when the immortal-letter count exceeds that of
    the word (it never decreases again) or when a word repeats without the
    start being revisited.
    """
    check_word(sub, word)
    dead = mortality(sub).mortal
    target = immortal_count(sub, word, dead)
    seen = {word}
    v, step = word, 0
    while True:
        v = apply_star(sub, v)
        step += 1
        if v == word:
            return step
        if immortal_count(sub, v, dead) > target or v in seen:
            return None
        seen.add(v)


def backward_reachable(sub: Substitution, word: str) -> Dict[str, List[str]]:
    """Canonical-preimage graph reachable backwards from word: node -> preimages."""
    graph: Dict[str, List[str]] = {}
    stack = [word]
    while stack:
        v = stack.pop()
        if v in graph:
            continue
        graph[v] = canonical_preimages(sub, v)
        stack.extend(u for u in graph[v] if u not in graph)
    return graph


def stab_by_preimage_graph(sub: Substitution, word: str) -> bool:
    """Infinite backward chain exists iff word survives peeling of preimage-less nodes.

    Exact for non-erasing substitutions, where preimages are never longer than
    the word and every preimage is canonical.
    """
    graph = backward_reachable(sub, word)
    alive = set(graph)
    counts = {v: len(graph[v]) for v in graph}
    children: Dict[str, List[str]] = {v: [] for v in graph}
    for v, pre in graph.items():
        for u in pre:
            children[u].append(v)
    queue = [v for v in graph if counts[v] == 0]
    while queue:
        u = queue.pop()
        if u not in alive:
            continue
        alive.discard(u)
        for v in children[u]:
            if v in alive:
                counts[v] -= 1
                if counts[v] == 0:
                    queue.append(v)
    return word in alive


def atrac_by_level_sets(sub: Substitution, word: str) -> bool:
    """word lies in every sub^n(S*) iff the n-th backward level is nonempty for all n.

    For non-erasing maps the levels live in the finite backward graph; a
    nonempty level at depth |graph| forces a repeated node on a chain, hence
    nonempty levels forever.
    """
    graph = backward_reachable(sub, word)
    level = {word}
    for _ in range(len(graph) + 1):
        level = {u for v in level for u in graph[v]}
        if not level:
            return False
    return True


def membership_finite(sub: Substitution, word: str, depth: int = 50) -> MembershipReport:
    period = orbit_period(sub, word)
    in_orb = period is not None
    cross: Dict[str, object] = {}
    if mortality(sub).mortal:
        found = preimage_depths(sub, word, depth)
        failures = [n for n, ok in enumerate(found, start=1) if not ok]
        cross["depth"] = depth
        cross["deepest_preimage_found"] = depth if not failures else failures[0] - 1
        cross["contradiction"] = in_orb and bool(failures)
    else:
        stab = stab_by_preimage_graph(sub, word)
        atrac = atrac_by_level_sets(sub, word)
        cross["stab_graph"] = stab
        cross["atrac_levels"] = atrac
        cross["contradiction"] = not (stab == atrac == in_orb)
    return MembershipReport(in_orb, in_orb, in_orb, period, "exact", cross)


def single_letter_letters(sub: Substitution) -> FrozenSet[str]:
    """{s : sub(s) is a single letter}."""
    return frozenset(a for a, w in sub.images if len(w) == 1)


def cyclic_single_letters(sub: Substitution) -> FrozenSet[str]:
    """Letters lying on a cycle of s -> sub(s) inside the single-letter part."""
    m = sub.mapping
    c = single_letter_letters(sub)
    out = set()
    for s in c:
        t, steps = m[s], 1
        while t in c and t != s and steps <= len(c):
            t, steps = m[t], steps + 1
        if t == s:
            out.add(s)
    return frozenset(out)


def literal_letter_characterization(sub: Substitution, word: str) -> bool:
    """word uses only letters whose image is a single letter."""
    c = single_letter_letters(sub)
    return all(ch in c for ch in word)


def corrected_letter_characterization(sub: Substitution, word: str) -> bool:
    """word uses only letters on cycles of the single-letter part.

    For a non-erasing map a periodic word keeps its length, so every letter
    must map to one letter and eventually come back.
    """
    c = cyclic_single_letters(sub)
    return all(ch in c for ch in word)


# --- infinite words at finite precision -------------------------------------------


@dataclass
class PrefixReport:
    status: str  # consistent | inconsistent | inconclusive
    m: Optional[int]
    checked_positions: int
    mismatch_position: Optional[int] = None  # 1-based

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "m": self.m,
            "checked_positions": self.checked_positions,
            "mismatch_position": self.mismatch_position,
        }


def stable_power(sub: Substitution) -> int:
    m = fixed_point_specs(sub).m
    if m is None:
        raise InputError("substitution has no immortal letter")
    return m


def stab_membership_prefix(sub: Substitution, prefix: str) -> PrefixReport:
    """Can prefix begin a word fixed by sub^m, m the lcm of the return times?

    Only symbols of sub^m(prefix) that are determined by the prefix are
    compared; the first disagreement is reported with a 1-based position.
    """
    check_word(sub, prefix)
    if not immortal_letters(sub):
        raise InputError("substitution has no immortal letter")
    m = stable_power(sub)
    if first_immortal(sub, prefix) is None:
        return PrefixReport("inconclusive", m, 0)
    image = apply_star(power(sub, m), prefix)
    n = min(len(prefix), len(image))
    for i in range(n):
        if image[i] != prefix[i]:
            return PrefixReport("inconsistent", m, i + 1, i + 1)
    return PrefixReport("consistent", m, n)


def consistent_prefixes(sub: Substitution, length: int, psi: Optional[Substitution] = None,
                        limit: int = 100_000) -> List[str]:
    """All words P of the given length with psi(P) agreeing with P where both are defined.

    psi defaults to sub^m.  Every prefix of a psi-fixed word passes; the
    search prunes as soon as the agreement breaks.
    """
    psi = psi or power(sub, stable_power(sub))
    m = psi.mapping
    out: List[str] = []

    def agrees(p: str) -> bool:
        img = "".join(m[c] for c in p)
        k = min(len(img), len(p))
        return img[:k] == p[:k]

    stack = [""]
    while stack:
        p = stack.pop()
        if len(p) == length:
            out.append(p)
            if len(out) > limit:
                raise InputError("too many candidate prefixes")
            continue
        for a in reversed(sub.alphabet):
            q = p + a
            if agrees(q):
                stack.append(q)
    return sorted(out)


def atrac_prefixes(sub: Substitution, length: int, limit: int = 100_000) -> List[str]:
    """Length-L prefixes of words in every sub^n(S^omega), non-erasing maps only.

    P_n = prefixes of sub^n(S^omega) form a decreasing chain with
    P_{n+1} = {sub(p)[:L] : p in P_n}; it stops at the first repeat.
    """
    if not sub.is_non_erasing():
        raise InputError("prefix attracting set needs a non-erasing substitution")
    m = sub.mapping

    def step(ps: Set[str]) -> Set[str]:
        return {"".join(m[c] for c in p)[:length] for p in ps}

    # start where every letter image already covers the precision, if that happens soon
    start, n = None, 0
    images = {a: a for a in sub.alphabet}
    while n <= length:
        if all(len(w) >= length for w in images.values()):
            start = {w[:length] for w in images.values()}
            break
        images = {a: "".join(m[c] for c in w)[: length] for a, w in images.items()}
        n += 1
    if start is None:
        total = len(sub.alphabet) ** length
        if total > limit:
            raise InputError("precision too large for a map without uniform growth")
        start = {"".join(t) for t in itertools.product(sub.alphabet, repeat=length)}
    cur = start
    while True:
        nxt = step(cur)
        if nxt == cur:
            return sorted(cur)
        cur = nxt


def four_sets_prefix(sub: Substitution, length: int) -> Dict[str, List[str]]:
    """Fix, Orb, Stab and Atrac of the map on infinite words, seen at a precision.

    Orb and Stab both equal Fix(sub^m): any periodic word is fixed by sub^m
    and Stab equals that set.
    """
    m = stable_power(sub)
    fix = consistent_prefixes(sub, length, psi=sub)
    stab = consistent_prefixes(sub, length)
    out = {"fix": fix, "orb": stab, "stab": stab, "m": m}
    if sub.is_non_erasing():
        out["atrac"] = atrac_prefixes(sub, length)
    return out


# --- extension by an inert letter ---------------------------------------------------


def erasure_extension(sub: Substitution, extra: Optional[str] = None) -> Tuple[Substitution, str]:
    """Add a letter sent to itself; returns the extended map and the letter."""
    if extra is None:
        extra = next(c for c in "tuvwxyz#$%&0123456789" if c not in sub.alphabet)
    if len(extra) != 1 or extra in sub.alphabet:
        raise InputError("extra letter must be a new single character")
    images = dict(sub.images)
    images[extra] = extra
    return Substitution.from_dict(images), extra


def extension_cross_check(sub: Substitution, word: str) -> Dict[str, object]:
    """Compare finite-word membership with the padded infinite word word + ttt...

    The extended map fixes the tail, so the padded word is fixed by the
    extended m-th power iff sub^m(word) = word; precision |word| + |image| + 1
    separates the two padded words whenever they differ.
    """
    ext, t = erasure_extension(sub, None)
    finite_in_stab = orbit_period(sub, word) is not None
    m = stable_power(ext)
    image = apply_star(power(sub, m), word)
    precision = max(len(word), len(image)) + 1
    padded = word + t * (precision - len(word))
    rep = stab_membership_prefix(ext, padded)
    infinite = rep.status == "consistent"
    return {
        "word": word,
        "extra_letter": t,
        "precision": precision,
        "finite_in_stab": finite_in_stab,
        "padded_consistent": infinite,
        "agree": finite_in_stab == infinite,
    }
