"""Labeled DAGs, Markov equivalence and covered-arc reversals.

Nodes are identified by index; names are carried along as metadata and only
matter for parsing and printing.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import ArcNotCovered, CycleDetected, ParseError, TooLarge, VariableMismatch

MAX_ENUMERATION_NODES = 5


class Arc(NamedTuple):
    source: int
    target: int


def default_names(n: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(n))


class DagStructure:
    """Immutable DAG given by a parent set per node.

    Parameters
    ----------
    names : sequence of str
        Distinct variable names; ``names[i]`` labels node ``i``.
    parents : sequence of iterables of int
        ``parents[i]`` holds the parent indices of node ``i``.

    Raises
    ------
    CycleDetected
        If the parent sets contain a directed cycle or a self-loop.
    """

    __slots__ = ("names", "parents", "_order", "_hash")

    def __init__(self, names: Sequence[str], parents: Sequence[Iterable[int]]):
        names = tuple(str(s) for s in names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if len(parents) != len(names):
            raise ValueError("need exactly one parent set per node")
        n = len(names)
        pa = []
        for i, ps in enumerate(parents):
            ps = list(ps)
            s = frozenset(int(p) for p in ps)
            if len(s) != len(ps):
                raise ValueError(f"duplicate parent for node {names[i]}")
            if i in s:
                raise CycleDetected(f"self-loop on {names[i]}")
            if any(p < 0 or p >= n for p in s):
                raise IndexError(f"parent index out of range for node {names[i]}")
            pa.append(s)
        self.names = names
        self.parents = tuple(pa)
        self._order = _kahn(self.parents)
        self._hash = hash((self.names, self.parents))

    @classmethod
    def from_arcs(cls, names_or_n, arcs: Iterable[tuple[int, int]]) -> "DagStructure":
        names = default_names(names_or_n) if isinstance(names_or_n, int) else tuple(names_or_n)
        parents: list[list[int]] = [[] for _ in names]
        for u, v in arcs:
            parents[v].append(u)
        return cls(names, parents)

    @classmethod
    def empty(cls, names_or_n) -> "DagStructure":
        return cls.from_arcs(names_or_n, ())

    @classmethod
    def complete(cls, names_or_n, order: Sequence[int] | None = None) -> "DagStructure":
        """Complete DAG in which every node is a parent of all later nodes in ``order``."""
        names = default_names(names_or_n) if isinstance(names_or_n, int) else tuple(names_or_n)
        order = list(range(len(names))) if order is None else list(order)
        arcs = [(order[i], order[j]) for j in range(len(order)) for i in range(j)]
        return cls.from_arcs(names, arcs)

    @property
    def n(self) -> int:
        return len(self.names)

    def arcs(self) -> list[Arc]:
        """Arcs sorted lexicographically by (source, target)."""
        return sorted(Arc(p, i) for i, ps in enumerate(self.parents) for p in ps)

    def has_arc(self, u: int, v: int) -> bool:
        return u in self.parents[v]

    def adjacent(self, u: int, v: int) -> bool:
        return u in self.parents[v] or v in self.parents[u]

    def children(self, u: int) -> list[int]:
        return [i for i, ps in enumerate(self.parents) if u in ps]

    def with_parents(self, node: int, parents: Iterable[int]) -> "DagStructure":
        pa = list(self.parents)
        pa[node] = frozenset(parents)
        return DagStructure(self.names, pa)

    def add_arc(self, u: int, v: int) -> "DagStructure":
        return self.with_parents(v, self.parents[v] | {u})

    def remove_arc(self, u: int, v: int) -> "DagStructure":
        return self.with_parents(v, self.parents[v] - {u})

    def reverse_arc(self, u: int, v: int) -> "DagStructure":
        pa = list(self.parents)
        pa[v] = pa[v] - {u}
        pa[u] = pa[u] | {v}
        return DagStructure(self.names, pa)

    def is_ancestor(self, u: int, v: int) -> bool:
        """True if a directed path leads from ``u`` to ``v`` (``u == v`` counts)."""
        stack, seen = [v], {v}
        while stack:
            w = stack.pop()
            if w == u:
                return True
            for p in self.parents[w]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return False

    def relabel(self, names: Sequence[str]) -> "DagStructure":
        """Same structure re-indexed to the variable order ``names``."""
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise VariableMismatch(f"variables {self.names} do not match {names}")
        pos = {name: i for i, name in enumerate(names)}
        parents: list[frozenset[int]] = [frozenset()] * len(names)
        for i, ps in enumerate(self.parents):
            parents[pos[self.names[i]]] = frozenset(pos[self.names[p]] for p in ps)
        return DagStructure(names, parents)

    def to_text(self) -> str:
        """Canonical DAG-file serialization: node lines, then arcs in (source, target) order."""
        lines = [f"node {name}" for name in self.names]
        lines += [f"{self.names[a.source]} -> {self.names[a.target]}" for a in self.arcs()]
        return "\n".join(lines) + "\n"

    def arc_string(self) -> str:
        arcs = self.arcs()
        if not arcs:
            return "(no arcs)"
        return ", ".join(f"{self.names[a.source]}->{self.names[a.target]}" for a in arcs)

    def __eq__(self, other):
        if not isinstance(other, DagStructure):
            return NotImplemented
        return self.names == other.names and self.parents == other.parents

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"DagStructure({self.arc_string()})"


def _kahn(parents: Sequence[frozenset[int]]) -> tuple[int, ...]:
    n = len(parents)
    indeg = [len(ps) for ps in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for i, ps in enumerate(parents):
        for p in ps:
            children[p].append(i)
    ready = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for c in children[u]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != n:
        raise CycleDetected("parent sets contain a directed cycle")
    return tuple(order)


def topological_order(g: DagStructure) -> tuple[int, ...]:
    """Parents-first order, lowest index first among ready nodes."""
    return g._order


def v_structures(g: DagStructure) -> frozenset[tuple[int, int, int]]:
    """Triples ``(i, j, k)`` with ``i -> j <- k``, ``i < k`` and ``i``, ``k`` non-adjacent."""
    out = set()
    for j, ps in enumerate(g.parents):
        for i, k in itertools.combinations(sorted(ps), 2):
            if not g.adjacent(i, k):
                out.add((i, j, k))
    return frozenset(out)


def skeleton(g: DagStructure) -> frozenset[frozenset[int]]:
    return frozenset(frozenset((p, i)) for i, ps in enumerate(g.parents) for p in ps)


def _check_same_variables(g1: DagStructure, g2: DagStructure) -> None:
    if g1.names != g2.names:
        raise VariableMismatch(f"variables differ: {g1.names} vs {g2.names}")


def equivalence_key(g: DagStructure) -> tuple[frozenset, frozenset]:
    return skeleton(g), v_structures(g)


def equivalent(g1: DagStructure, g2: DagStructure) -> bool:
    """Markov equivalence: same skeleton and same v-structures."""
    _check_same_variables(g1, g2)
    return equivalence_key(g1) == equivalence_key(g2)


def is_covered(g: DagStructure, arc: tuple[int, int]) -> bool:
    u, v = arc
    return g.has_arc(u, v) and g.parents[v] - {u} == g.parents[u]


def covered_arcs(g: DagStructure) -> list[Arc]:
    return [a for a in g.arcs() if g.parents[a.target] - {a.source} == g.parents[a.source]]


def reverse_covered_arc(g: DagStructure, arc: tuple[int, int]) -> DagStructure:
    if not is_covered(g, arc):
        raise ArcNotCovered(f"arc {g.names[arc[0]]}->{g.names[arc[1]]} is not covered")
    return g.reverse_arc(*arc)


def enumerate_dags(n: int, names: Sequence[str] | None = None) -> list[DagStructure]:
    """Every labeled DAG on ``n`` nodes exactly once, in a fixed order.

    Each unordered pair ``i < j`` (in lexicographic order) takes one of three
    states: no arc, ``i -> j`` or ``j -> i``; the product is filtered for
    acyclicity.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > MAX_ENUMERATION_NODES:
        raise TooLarge(f"enumeration is capped at {MAX_ENUMERATION_NODES} nodes")
    names = default_names(n) if names is None else tuple(names)
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        masks = [0] * n
        for (i, j), s in zip(pairs, states):
            if s == 1:
                masks[j] |= 1 << i
            elif s == 2:
                masks[i] |= 1 << j
        if _acyclic_masks(masks):
            parents = [[p for p in range(n) if m >> p & 1] for m in masks]
            out.append(DagStructure(names, parents))
    return out


def _acyclic_masks(masks: list[int]) -> bool:
    done = 0
    remaining = len(masks)
    while remaining:
        progressed = False
        for i, m in enumerate(masks):
            if not done >> i & 1 and m & ~done == 0:
                done |= 1 << i
                remaining -= 1
                progressed = True
        if not progressed:
            return False
    return True


def equivalence_classes(dags: Sequence[DagStructure]) -> list[list[DagStructure]]:
    """Partition by skeleton and v-structures, classes in order of first member."""
    if dags:
        for g in dags[1:]:
            _check_same_variables(dags[0], g)
    groups: dict[tuple, list[DagStructure]] = {}
    for g in dags:
        groups.setdefault(equivalence_key(g), []).append(g)
    return list(groups.values())


def covered_reversal_closure(g: DagStructure) -> set[DagStructure]:
    """All DAGs reachable from ``g`` by sequences of covered-arc reversals."""
    seen = {g}
    queue = deque([g])
    while queue:
        h = queue.popleft()
        for a in covered_arcs(h):
            r = h.reverse_arc(*a)
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


def covered_reversal_classes(dags: Sequence[DagStructure]) -> list[list[DagStructure]]:
    """Partition of ``dags`` by reachability under covered-arc reversals."""
    index = {g: i for i, g in enumerate(dags)}
    assigned: dict[DagStructure, int] = {}
    classes: list[list[DagStructure]] = []
    for g in dags:
        if g in assigned:
            continue
        cls = [h for h in covered_reversal_closure(g) if h in index]
        cls.sort(key=index.__getitem__)
        for h in cls:
            assigned[h] = len(classes)
        classes.append(cls)
    return classes


def parse_dag(text: str) -> DagStructure:
    """Parse the DAG text format (``node NAME`` and ``A -> B`` lines, ``#`` comments)."""
    names: list[str] = []
    pos: dict[str, int] = {}
    arcs: list[tuple[int, int]] = []
    seen_arcs: set[tuple[int, int]] = set()

    def ref(name: str, lineno: int) -> int:
        if not name or not (name[0].isalpha() or name[0] == "_") or not all(
            c.isalnum() or c == "_" for c in name
        ):
            raise ParseError(f"invalid node name {name!r}", lineno)
        if name not in pos:
            pos[name] = len(names)
            names.append(name)
        return pos[name]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            left, _, right = line.partition("->")
            u, v = ref(left.strip(), lineno), ref(right.strip(), lineno)
            if (u, v) in seen_arcs:
                raise ParseError(f"duplicate arc {left.strip()} -> {right.strip()}", lineno)
            seen_arcs.add((u, v))
            arcs.append((u, v))
        else:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "node":
                raise ParseError(f"expected 'node NAME' or 'A -> B', got {line!r}", lineno)
            ref(parts[1], lineno)
    if not names:
        raise ParseError("DAG file declares no nodes")
    return DagStructure.from_arcs(names, arcs)


def read_dag_file(path) -> DagStructure:
    return parse_dag(Path(path).read_text(encoding="utf-8"))
