"""Endomorphisms of free groups of finite rank.

Words are strings: lower-case letters are generators and the matching
upper-case letter is the inverse.  Generators are named x, y, z, then a, b,
c, ... so rank 2 uses "xy" and rank 3 uses "xyz".

Subgroups are handled as folded graphs.  Every edge also carries a word in
a second free group (the domain): a loop at the base vertex that reads w in
the target reads some v in the domain with phi(v) = w.  Tracing a word
therefore decides membership and, at the same time, returns a preimage.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InputError, VerificationError

GENERATORS = "xyz" + "".join(c for c in "abcdefghijklmnopqrstuvw" if c not in "xyz")


def generators(rank: int) -> str:
    if not 0 <= rank <= len(GENERATORS):
        raise InputError(f"rank must lie in 0..{len(GENERATORS)}")
    return GENERATORS[:rank]


def inv_letter(c: str) -> str:
    return c.lower() if c.isupper() else c.upper()


def check_letters(word: str, rank: Optional[int]) -> None:
    if rank is None:
        allowed = set(GENERATORS) | set(GENERATORS.upper())
    else:
        gens = generators(rank)
        allowed = set(gens) | set(gens.upper())
    bad = sorted(set(word) - allowed)
    if bad:
        raise InputError(f"unknown generator letters {bad}")


def free_reduce(word: str, rank: Optional[int] = None) -> str:
    check_letters(word, rank)
    out: List[str] = []
    for c in word:
        if out and out[-1] == inv_letter(c):
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def _red(word: str) -> str:
    # internal: letters already validated
    out: List[str] = []
    for c in word:
        if out and out[-1] == inv_letter(c):
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def inverse(word: str) -> str:
    return "".join(inv_letter(c) for c in reversed(word))


def is_reduced(word: str) -> bool:
    return all(word[i] != inv_letter(word[i + 1]) for i in range(len(word) - 1))


# --- endomorphisms -------------------------------------------------------------------


@dataclass(frozen=True)
class FreeEndo:
    rank: int
    images: Tuple[str, ...]

    def __post_init__(self):
        if self.rank < 1:
            raise InputError("rank must be positive")
        if len(self.images) != self.rank:
            raise InputError(f"expected {self.rank} images, got {len(self.images)}")
        for w in self.images:
            check_letters(w, self.rank)

    @classmethod
    def from_images(cls, images: Sequence[str]) -> "FreeEndo":
        rank = len(images)
        return cls(rank, tuple(free_reduce(w, rank) for w in images))

    @classmethod
    def from_json(cls, doc) -> "FreeEndo":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON: {exc}") from exc
        try:
            rank, images = int(doc["rank"]), list(doc["images"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"endomorphism JSON needs 'rank' and 'images': {exc}") from exc
        if len(images) != rank:
            raise InputError("number of images differs from rank")
        return cls(rank, tuple(free_reduce(w, rank) for w in images))

    @classmethod
    def identity(cls, rank: int) -> "FreeEndo":
        return cls(rank, tuple(generators(rank)))

    @classmethod
    def inner(cls, rank: int, conjugator: str) -> "FreeEndo":
        """g -> u g u^-1."""
        u = free_reduce(conjugator, rank)
        return cls(rank, tuple(_red(u + g + inverse(u)) for g in generators(rank)))

    def to_json(self) -> dict:
        return {"rank": self.rank, "images": list(self.images)}

    def apply(self, word: str) -> str:
        check_letters(word, self.rank)
        idx = {g: i for i, g in enumerate(generators(self.rank))}
        parts = []
        for c in word:
            if c.islower():
                parts.append(self.images[idx[c]])
            else:
                parts.append(inverse(self.images[idx[c.lower()]]))
        return _red("".join(parts))

    def apply_n(self, word: str, n: int) -> str:
        for _ in range(n):
            word = self.apply(word)
        return word

    def compose(self, inner: "FreeEndo") -> "FreeEndo":
        """self o inner."""
        return FreeEndo(self.rank, tuple(self.apply(w) for w in inner.images))


# --- folded graphs -------------------------------------------------------------------


class FoldedGraph:
    """Folded core graph of a subgroup, with domain labels on edges.

    ``adj[v][c] = (u, d)`` means an edge v -> u reading c in the target and
    d in the domain; the reverse traversal is stored as ``adj[u][C] = (v, d^-1)``.
    Vertex 0 is the base.
    """

    def __init__(self):
        self.adj: Dict[int, Dict[str, Tuple[int, str]]] = {0: {}}
        self._parent: Dict[int, int] = {}
        self._corr: Dict[int, str] = {}
        self._next = 1

    # union-find with label corrections: edges leaving a merged vertex pick
    # up corr on the left, edges entering it pick up corr^-1 on the right
    def _find(self, v: int) -> Tuple[int, str]:
        corr = ""
        while v in self._parent:
            corr = _red(self._corr[v] + corr)
            v = self._parent[v]
        return v, corr

    def _new_vertex(self) -> int:
        v = self._next
        self._next += 1
        self.adj[v] = {}
        return v

    def _merge(self, keep: int, gone: int, corr: str, stack: list) -> None:
        if gone == 0:
            keep, gone, corr = gone, keep, inverse(corr)
        self._parent[gone] = keep
        self._corr[gone] = corr
        entries = self.adj.pop(gone)
        for c, (w, e) in entries.items():
            if w != gone:
                back = self.adj[w].get(inv_letter(c))
                if back is not None and back[0] == gone:
                    del self.adj[w][inv_letter(c)]
            if c.islower():
                stack.append((gone, c, w, e))
            elif w != gone:
                # store upper-case traversals as the lower-case edge they came from
                stack.append((w, c.lower(), gone, inverse(e)))

    def add_edge(self, v: int, c: str, u: int, d: str) -> None:
        stack = [(v, c, u, d)]
        while stack:
            v, c, u, d = stack.pop()
            rv, cv = self._find(v)
            ru, cu = self._find(u)
            d = _red(cv + d + inverse(cu))
            if c.isupper():
                rv, ru, c, d = ru, rv, c.lower(), inverse(d)
            C = c.upper()
            existing = self.adj[rv].get(c)
            if existing is not None:
                u2, d2 = existing
                if u2 != ru:
                    self._merge(u2, ru, _red(inverse(d2) + d), stack)
                continue
            existing = self.adj[ru].get(C)
            if existing is not None:
                v2, e2 = existing
                if v2 != rv:
                    self._merge(v2, rv, _red(inverse(e2) + inverse(d)), stack)
                continue
            self.adj[rv][c] = (ru, d)
            self.adj[ru][C] = (rv, inverse(d))

    def add_petal(self, word: str, label: str) -> None:
        """A loop at the base spelling word; its first edge carries label."""
        if not word:
            return
        verts = [0] + [self._new_vertex() for _ in range(len(word) - 1)] + [0]
        for i, c in enumerate(word):
            self.add_edge(verts[i], c, verts[i + 1], label if i == 0 else "")

    def trim(self) -> None:
        """Drop hanging trees: non-base vertices of degree one."""
        queue = [v for v in self.adj if v != 0 and len(self.adj[v]) == 1]
        while queue:
            v = queue.pop()
            if v not in self.adj or v == 0 or len(self.adj[v]) != 1:
                continue
            (c, (w, _)), = self.adj.pop(v).items()
            del self.adj[w][inv_letter(c)]
            if w != 0 and len(self.adj[w]) == 1:
                queue.append(w)

    # queries
    @property
    def vertex_count(self) -> int:
        return len(self.adj)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj.values()) // 2

    @property
    def rank(self) -> int:
        return self.edge_count - self.vertex_count + 1

    def trace(self, word: str) -> Optional[str]:
        """Domain label of the base loop reading word, or None if there is none."""
        v, acc = 0, []
        for c in word:
            step = self.adj[v].get(c)
            if step is None:
                return None
            v = step[0]
            acc.append(step[1])
        if v != 0:
            return None
        return _red("".join(acc))

    def contains(self, word: str) -> bool:
        return self.trace(_red(word)) is not None

    def basis(self) -> List[str]:
        """Free basis read off a breadth-first spanning tree (deterministic)."""
        path = {0: ""}
        order = deque([0])
        tree = set()
        while order:
            v = order.popleft()
            for c in sorted(self.adj[v]):
                u, _ = self.adj[v][c]
                if u not in path:
                    path[u] = path[v] + c
                    tree.add((v, c))
                    tree.add((u, inv_letter(c)))
                    order.append(u)
        out = []
        for v in sorted(self.adj):
            for c in sorted(self.adj[v]):
                if not c.islower() or (v, c) in tree:
                    continue
                u, _ = self.adj[v][c]
                out.append(_red(path[v] + c + inverse(path[u])))
        return out

    def to_json(self) -> dict:
        renum = {v: i for i, v in enumerate(sorted(self.adj))}
        edges = []
        for v in sorted(self.adj):
            for c in sorted(self.adj[v]):
                if c.islower():
                    u, d = self.adj[v][c]
                    edges.append([renum[v], c, renum[u]])
        return {"vertices": len(renum), "edges": edges, "rank": self.rank}


def stallings_graph(gens: Sequence[str], labels: Optional[Sequence[str]] = None,
                    rank: Optional[int] = None) -> FoldedGraph:
    """Folded core graph of the subgroup generated by gens.

    labels[i] is the domain word attached to gens[i]; by default the i-th
    domain generator.
    """
    if labels is None:
        labels = [GENERATORS[i] for i in range(len(gens))]
    if len(labels) != len(gens):
        raise InputError("one label per generator")
    g = FoldedGraph()
    for w, lab in zip(gens, labels):
        g.add_petal(free_reduce(w, rank), lab)
    g.trim()
    return g


def membership(word: str, graph: FoldedGraph) -> bool:
    return graph.contains(word)


def image_graph(phi: FreeEndo) -> FoldedGraph:
    return stallings_graph(list(phi.images), list(generators(phi.rank)), phi.rank)


def preimage_solve(phi: FreeEndo, word: str) -> Optional[str]:
    """Some v with phi(v) = word, or None when word is not in the image."""
    w = free_reduce(word, phi.rank)
    v = image_graph(phi).trace(w)
    if v is None:
        return None
    if phi.apply(v) != w:
        raise VerificationError(f"traced preimage {v!r} maps to {phi.apply(v)!r}, not {w!r}")
    return v


def is_surjective(phi: FreeEndo) -> bool:
    g = image_graph(phi)
    return all(g.contains(x) for x in generators(phi.rank))


# --- image chains --------------------------------------------------------------------


@dataclass
class ChainLevel:
    n: int
    basis: List[str]
    graph: FoldedGraph
    # graph of phi(previous level), labelled by the previous basis
    labelled: Optional[FoldedGraph] = None

    @property
    def rank(self) -> int:
        return len(self.basis)


def image_chain(phi: FreeEndo, n_max: int, max_edges: int = 20000) -> List[ChainLevel]:
    """Levels H_0 = F, H_{n+1} = phi(H_n) for n < n_max."""
    gens = list(generators(phi.rank))
    levels = [ChainLevel(0, gens, stallings_graph(gens, gens, phi.rank))]
    for n in range(1, n_max + 1):
        prev = levels[-1].basis
        images = [phi.apply(b) for b in prev]
        g = stallings_graph(images, prev, phi.rank)
        if g.edge_count > max_edges:
            raise InputError(f"image subgroup graph exceeds {max_edges} edges at n={n}")
        levels.append(ChainLevel(n, g.basis(), g, g))
    return levels


@dataclass
class RankChainReport:
    ranks: List[int]
    rank_stable_from: int
    set_stable_from: Optional[int]
    set_equalities: List[bool] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ranks": self.ranks,
            "rank_stable_from": self.rank_stable_from,
            "set_stable_from": self.set_stable_from,
            "set_equalities": self.set_equalities,
        }


def rank_chain(phi: FreeEndo, n_max: int) -> RankChainReport:
    """Ranks of phi^n(F) for n = 1..n_max and where the chain settles.

    Since phi^(n+1)(F) lies inside phi^n(F), the two are equal exactly when
    every basis element of phi^n(F) belongs to phi^(n+1)(F).
    """
    if n_max < 1:
        raise InputError("n_max must be at least 1")
    levels = image_chain(phi, n_max + 1)
    ranks = [lv.rank for lv in levels[1: n_max + 1]]
    rank_stable = next(i + 1 for i in range(len(ranks)) if all(r == ranks[i] for r in ranks[i:]))
    equal = []
    for n in range(1, n_max + 1):
        nxt = levels[n + 1].graph
        equal.append(all(nxt.contains(b) for b in levels[n].basis))
    set_stable = next((n for n in range(1, n_max + 1) if equal[n - 1]), None)
    return RankChainReport(ranks, rank_stable, set_stable, equal)


@dataclass
class StabAtracReport:
    word: str
    depth: int
    status: str  # exact | refuted | depth-limited
    in_atrac: Optional[bool]
    in_stab: Optional[bool]
    chain: List[str]
    set_stable_from: Optional[int]
    refuted_at: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "word": self.word,
            "depth": self.depth,
            "status": self.status,
            "in_atrac": self.in_atrac,
            "in_stab": self.in_stab,
            "chain": self.chain,
            "set_stable_from": self.set_stable_from,
            "refuted_at": self.refuted_at,
        }


def _backward_chain(phi: FreeEndo, levels: List[ChainLevel], word: str, n: int, length: int,
                    stable: Optional[int]) -> List[str]:
    """x_0 = word in H_n, then x_{k+1} in H_{n-k-1} with phi(x_{k+1}) = x_k.

    Once the level index would drop below a set-stable index s, the stable
    level H_s = phi(H_s) is reused, so the chain can be as long as wanted.
    """
    chain = [word]
    level = n
    for _ in range(length):
        if stable is not None and level <= stable:
            level = stable
            lab = levels[stable + 1].labelled
        elif level >= 1:
            lab = levels[level].labelled
        else:
            break
        x = lab.trace(chain[-1])
        if x is None:
            raise VerificationError(f"no traced preimage for {chain[-1]!r} at level {level}")
        if phi.apply(x) != chain[-1]:
            raise VerificationError("traced preimage does not map back")
        chain.append(x)
        level -= 1
    return chain


def stab_atrac_report(phi: FreeEndo, word: str, depth: int) -> StabAtracReport:
    if depth < 1:
        raise InputError("depth must be at least 1")
    w = free_reduce(word, phi.rank)
    levels = image_chain(phi, depth + 1)
    stable = None
    for n in range(1, depth + 1):
        if all(levels[n + 1].graph.contains(b) for b in levels[n].basis):
            stable = n
            break
    for n in range(1, depth + 1):
        if not levels[n].graph.contains(w):
            return StabAtracReport(w, depth, "refuted", False, False, [w], stable, n)
        if stable is not None and n == stable:
            break
    if stable is not None:
        chain = _backward_chain(phi, levels, w, stable, depth, stable)
        return StabAtracReport(w, depth, "exact", True, True, chain, stable)
    chain = _backward_chain(phi, levels, w, depth, depth, None)
    return StabAtracReport(w, depth, "depth-limited", None, None, chain, None)


def orbit_period(phi: FreeEndo, word: str, limit: int = 64, max_length: int = 100_000) -> Optional[int]:
    """Least p <= limit with phi^p(word) = word, or None if not found within limit.

    The search also gives up once an iterate is longer than max_length, since
    expanding maps would otherwise build exponentially long words.
    """
    w = free_reduce(word, phi.rank)
    v = w
    for p in range(1, limit + 1):
        v = phi.apply(v)
        if v == w:
            return p
        if len(v) > max_length:
            return None
    return None
