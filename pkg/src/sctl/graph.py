"""Acyclic directed mixed graphs and their graphical criteria.

An :class:`Admg` carries directed edges ``a -> b`` and bidirected edges
``a <-> b``; a bidirected edge stands for an unobserved common cause.
Vertices are strings and every set-valued result iterates in lexicographic
order so that downstream algorithms break ties reproducibly.

Two independent routes to m-separation are provided:

- :func:`m_separated` separates in the augmented (moral-like) graph of the
  ancestral closure, which is fast and is what the algorithms use;
- :func:`m_connected_oracle` enumerates simple paths and checks the
  collider/non-collider conditions directly. It is exponential and exists to
  cross-check the first route on small graphs.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable, Optional

from .errors import CycleError, InvalidArgumentError, PreconditionError

__all__ = [
    "Admg",
    "ancestors",
    "district",
    "augmented_graph",
    "collider_connected",
    "m_separated",
    "m_connected_oracle",
    "graphical_markov_blanket",
    "induced_markov_blanket",
    "separating_subset_exists",
    "parse_graph",
    "format_graph",
    "read_graph",
    "write_graph",
]


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


class Admg:
    """Immutable acyclic directed mixed graph.

    Parameters
    ----------
    vertices : iterable of str
        Vertex identifiers. Endpoints of edges are added automatically.
    directed : iterable of (tail, head)
    bidirected : iterable of (a, b)
        Unordered; ``(a, b)`` and ``(b, a)`` denote the same edge.

    Raises
    ------
    CycleError
        On a self-loop or a directed cycle.
    """

    __slots__ = ("vertices", "directed", "bidirected", "_pa", "_ch", "_sib", "_order")

    def __init__(self, vertices: Iterable[str] = (), directed=(), bidirected=()):
        directed = frozenset((str(a), str(b)) for a, b in directed)
        bidirected = frozenset(_pair(str(a), str(b)) for a, b in bidirected)
        vs = set(str(v) for v in vertices)
        for a, b in itertools.chain(directed, bidirected):
            if a == b:
                raise CycleError(f"self-loop on {a!r}")
            vs.add(a)
            vs.add(b)
        self.vertices = tuple(sorted(vs))
        self.directed = directed
        self.bidirected = bidirected
        pa = {v: set() for v in self.vertices}
        ch = {v: set() for v in self.vertices}
        sib = {v: set() for v in self.vertices}
        for a, b in directed:
            pa[b].add(a)
            ch[a].add(b)
        for a, b in bidirected:
            sib[a].add(b)
            sib[b].add(a)
        self._pa = {v: frozenset(s) for v, s in pa.items()}
        self._ch = {v: frozenset(s) for v, s in ch.items()}
        self._sib = {v: frozenset(s) for v, s in sib.items()}
        self._order = self._topological_order()

    def _topological_order(self):
        # Kahn's algorithm; the heap-free variant below keeps lexicographic tie-break.
        indeg = {v: len(self._pa[v]) for v in self.vertices}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in sorted(self._ch[v]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
                    ready.sort()
        if len(order) != len(self.vertices):
            stuck = sorted(v for v, d in indeg.items() if d > 0)
            raise CycleError(f"directed cycle among {stuck}")
        return tuple(order)

    # -- basic accessors -------------------------------------------------
    def __contains__(self, v):
        return v in self._pa

    def __eq__(self, other):
        if not isinstance(other, Admg):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.directed == other.directed
            and self.bidirected == other.bidirected
        )

    def __hash__(self):
        return hash((self.vertices, self.directed, self.bidirected))

    def __repr__(self):
        return (
            f"Admg({len(self.vertices)} vertices, {len(self.directed)} directed, "
            f"{len(self.bidirected)} bidirected)"
        )

    def parents(self, v) -> frozenset:
        self.check(v)
        return self._pa[v]

    def children(self, v) -> frozenset:
        self.check(v)
        return self._ch[v]

    def siblings(self, v) -> frozenset:
        """Vertices joined to ``v`` by a bidirected edge."""
        self.check(v)
        return self._sib[v]

    def adjacent(self, a, b) -> bool:
        return b in self._pa[a] or b in self._ch[a] or b in self._sib[a]

    def topological_order(self) -> tuple:
        """A total order consistent with the graph, lexicographic among ties."""
        return self._order

    def check(self, *vs):
        for v in vs:
            if v not in self._pa:
                raise InvalidArgumentError(f"unknown vertex {v!r}")

    def _check_set(self, xs):
        xs = frozenset(xs)
        self.check(*sorted(xs))
        return xs

    def edges_at(self, v):
        """Edges incident to ``v`` as ``(other, arrow_at_v, arrow_at_other)``.

        A pair joined by both a directed and a bidirected edge yields two entries.
        """
        out = []
        for p in self._pa[v]:
            out.append((p, True, False))
        for c in self._ch[v]:
            out.append((c, False, True))
        for s in self._sib[v]:
            out.append((s, True, True))
        out.sort()
        return out

    def subgraph(self, keep) -> "Admg":
        """Induced subgraph on ``keep``."""
        keep = self._check_set(keep)
        return Admg(
            keep,
            [(a, b) for a, b in self.directed if a in keep and b in keep],
            [(a, b) for a, b in self.bidirected if a in keep and b in keep],
        )


# ---------------------------------------------------------------------------
# Ancestral relations and districts
# ---------------------------------------------------------------------------


def ancestors(g: Admg, xs) -> frozenset:
    """All vertices with a directed path into ``xs``, including ``xs`` itself."""
    xs = g._check_set(xs)
    seen = set(xs)
    todo = deque(xs)
    while todo:
        v = todo.popleft()
        for p in g._pa[v]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return frozenset(seen)


def district(g: Admg, x) -> frozenset:
    """Vertices reachable from ``x`` through bidirected edges only, plus ``x``."""
    g.check(x)
    seen = {x}
    todo = deque([x])
    while todo:
        v = todo.popleft()
        for s in g._sib[v]:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Collider connectivity and the augmented graph
# ---------------------------------------------------------------------------


def collider_connected(g: Admg, x) -> frozenset:
    """Vertices joined to ``x`` by a path whose interior vertices are all colliders.

    Reachability over (vertex, arrowhead-on-arrival) states suffices: a walk with
    only collider interiors can be shortcut at any repeated vertex without
    losing the collider property, so it contains such a path.
    """
    g.check(x)
    reached = set()
    seen = set()
    todo = deque()
    for w, _, at_w in g.edges_at(x):
        if w != x:
            reached.add(w)
            if at_w and (w, True) not in seen:
                seen.add((w, True))
                todo.append(w)
    while todo:
        v = todo.popleft()
        # v was entered with an arrowhead; it stays a collider only if the
        # next edge also points into v.
        for w, at_v, at_w in g.edges_at(v):
            if not at_v or w == x:
                continue
            reached.add(w)
            if at_w and (w, True) not in seen:
                seen.add((w, True))
                todo.append(w)
    reached.discard(x)
    return frozenset(reached)


def augmented_graph(g: Admg) -> dict:
    """Undirected augmented graph as an adjacency mapping ``vertex -> frozenset``."""
    return {v: collider_connected(g, v) for v in g.vertices}


def _separated_in(adj, xs, ys, zs):
    seen = set(xs)
    todo = deque(xs)
    while todo:
        v = todo.popleft()
        for w in adj[v]:
            if w in ys:
                return False
            if w in zs or w in seen:
                continue
            seen.add(w)
            todo.append(w)
    return True


def _check_triple(g, xs, ys, zs):
    xs, ys, zs = g._check_set(xs), g._check_set(ys), g._check_set(zs)
    if not xs or not ys:
        raise InvalidArgumentError("X and Y must be nonempty")
    if xs & ys or xs & zs or ys & zs:
        raise InvalidArgumentError("X, Y and Z must be pairwise disjoint")
    return xs, ys, zs


def m_separated(g: Admg, xs, ys, zs=()) -> bool:
    """True iff ``zs`` m-separates ``xs`` from ``ys``.

    Computed as ordinary separation in the augmented graph of the subgraph
    induced by the ancestors of ``xs | ys | zs``.
    """
    xs, ys, zs = _check_triple(g, xs, ys, zs)
    sub = g.subgraph(ancestors(g, xs | ys | zs))
    return _separated_in(augmented_graph(sub), xs, ys, zs)


def m_connected_oracle(g: Admg, x, y, zs=()) -> bool:
    """True iff some simple path from ``x`` to ``y`` is m-connecting given ``zs``.

    Every non-collider must lie outside ``zs`` and every collider inside
    ``an(zs)``. Exhaustive; intended for graphs of about ten vertices.
    """
    g.check(x, y)
    zs = g._check_set(zs)
    if x == y:
        raise InvalidArgumentError("x and y must differ")
    if x in zs or y in zs:
        raise InvalidArgumentError("x and y must not be in the conditioning set")
    an_z = ancestors(g, zs)

    on_path = {x}

    def extend(v, arrow_into_v):
        for w, at_v, at_w in g.edges_at(v):
            if w in on_path:
                continue
            if v != x:
                collider = arrow_into_v and at_v
                if collider and v not in an_z:
                    continue
                if not collider and v in zs:
                    continue
            if w == y:
                return True
            on_path.add(w)
            found = extend(w, at_w)
            on_path.discard(w)
            if found:
                return True
        return False

    return extend(x, False)


# ---------------------------------------------------------------------------
# Markov blankets
# ---------------------------------------------------------------------------


def graphical_markov_blanket(g: Admg, t) -> frozenset:
    """Markov blanket of ``t``.

    Parents, children, the districts of ``t`` and of each child, and the
    parents of those districts; equivalently every vertex collider-connected
    to ``t``.
    """
    g.check(t)
    ch = g._ch[t]
    dist = set(district(g, t))
    for c in ch:
        dist |= district(g, c)
    mb = set(g._pa[t]) | set(ch) | dist
    for d in dist:
        mb |= g._pa[d]
    mb.discard(t)
    return frozenset(mb)


def induced_markov_blanket(g: Admg, a, x) -> frozenset:
    """Markov blanket of ``x`` within the subgraph induced on the ancestral set ``a``.

    ``pa(dist(x)) | dist(x) - {x}`` with both operators taken in ``G_a``.
    """
    a = g._check_set(a)
    g.check(x)
    if ancestors(g, a) != a:
        raise PreconditionError("set is not ancestral")
    if x not in a:
        raise PreconditionError(f"{x!r} is not in the ancestral set")
    if g._ch[x] & a:
        raise PreconditionError(f"{x!r} has children inside the ancestral set")
    sub = g.subgraph(a)
    dist = district(sub, x)
    out = set(dist)
    for d in dist:
        out |= sub._pa[d]
    out.discard(x)
    return frozenset(out)


def separating_subset_exists(g: Admg, t, c) -> Optional[frozenset]:
    """A set m-separating ``t`` from ``c``, or ``None`` if no set does.

    Only ``an({t, c}) - {t, c}`` needs checking: some subset of a candidate pool
    separates iff its intersection with those ancestors does. The witness is
    then pruned greedily in lexicographic order to a minimal separator.
    """
    g.check(t, c)
    if t == c:
        raise InvalidArgumentError("t and c must differ")
    pool = ancestors(g, {t, c}) - {t, c}
    if not m_separated(g, {t}, {c}, pool):
        return None
    witness = set(pool)
    for v in sorted(pool):
        trial = witness - {v}
        if m_separated(g, {t}, {c}, trial):
            witness = trial
    return frozenset(witness)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def parse_graph(text: str) -> Admg:
    """Parse the line-oriented graph format.

    ``A -> B`` directed, ``A <-> B`` bidirected, ``node X`` declares a vertex,
    ``#`` starts a comment.
    """
    vertices, directed, bidirected = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 2 and parts[0] == "node":
            vertices.append(parts[1])
        elif len(parts) == 3 and parts[1] == "->":
            directed.append((parts[0], parts[2]))
        elif len(parts) == 3 and parts[1] == "<->":
            bidirected.append((parts[0], parts[2]))
        else:
            raise InvalidArgumentError(f"line {lineno}: cannot parse {raw!r}")
    return Admg(vertices, directed, bidirected)


def format_graph(g: Admg) -> str:
    """Canonical text form; ``parse_graph(format_graph(g)) == g``."""
    lines = [f"{a} -> {b}" for a, b in sorted(g.directed)]
    lines += [f"{a} <-> {b}" for a, b in sorted(g.bidirected)]
    lines += [
        f"node {v}"
        for v in g.vertices
        if not (g._pa[v] or g._ch[v] or g._sib[v])
    ]
    return "".join(line + "\n" for line in lines)


def read_graph(path) -> Admg:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: Admg, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))
