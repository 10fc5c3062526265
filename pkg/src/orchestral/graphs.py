"""Finite labelled graphs over term states, and the walks the analyses need."""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field


class ResourceLimit(Exception):
    """A configured cap (graph nodes, subset states, family members) was exceeded."""


@dataclass(frozen=True)
class Lasso:
    """The infinite sequence ``prefix . cycle . cycle . ...``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("lasso cycle must be nonempty")

    def unroll(self, k: int) -> tuple:
        return self.prefix + self.cycle * k


@dataclass
class LabelledGraph:
    states: list
    succ: list
    root: int = 0
    index: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def edges(self):
        return [(s, lab, d) for s, out in enumerate(self.succ) for lab, d in out]

    @property
    def terminals(self):
        return {i for i, out in enumerate(self.succ) if not out}

    def node(self, st) -> int:
        return self.index[st]


def explore(root, step, cap=None) -> LabelledGraph:
    """Breadth-first closure of ``step`` from ``root``; states must be hashable."""
    states = [root]
    index = {root: 0}
    succ = []
    i = 0
    while i < len(states):
        out = []
        for label, nxt in step(states[i]):
            j = index.get(nxt)
            if j is None:
                j = len(states)
                if cap is not None and j >= cap:
                    raise ResourceLimit(f"state space exceeds node cap {cap}")
                index[nxt] = j
                states.append(nxt)
            out.append((label, j))
        succ.append(out)
        i += 1
    return LabelledGraph(states, succ, 0, index)


def sccs(n, adj):
    """Strongly connected components (iterative Tarjan); ``adj[i]`` lists successor ids."""
    index = [None] * n
    low = [0] * n
    on = [False] * n
    stack, comps = [], []
    counter = 0
    for s in range(n):
        if index[s] is not None:
            continue
        work = [(s, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            while k < len(adj[v]):
                w = adj[v][k]
                k += 1
                if index[w] is None:
                    work.append((v, k))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def component_ids(g: LabelledGraph, edge_ok):
    adj = [[d for lab, d in out if edge_ok(s, lab, d)] for s, out in enumerate(g.succ)]
    comp = [0] * len(g)
    for cid, members in enumerate(sccs(len(g), adj)):
        for v in members:
            comp[v] = cid
    return comp


def cyclic_edges(g: LabelledGraph, edge_ok):
    """Edges accepted by ``edge_ok`` that lie on some cycle made of accepted edges."""
    comp = component_ids(g, edge_ok)
    return [(s, lab, d) for s, lab, d in g.edges if edge_ok(s, lab, d) and comp[s] == comp[d]]


def shortest_path(g: LabelledGraph, src, targets, edge_ok=None):
    """Edges of a shortest path from ``src`` into ``targets``; ``[]`` if src is a target."""
    targets = set(targets)
    if src in targets:
        return []
    back = {src: None}
    todo = deque([src])
    while todo:
        v = todo.popleft()
        for lab, d in g.succ[v]:
            if d in back or (edge_ok is not None and not edge_ok(v, lab, d)):
                continue
            back[d] = (v, lab)
            if d in targets:
                path = []
                while back[d] is not None:
                    p, l = back[d]
                    path.append((p, l, d))
                    d = p
                return path[::-1]
            todo.append(d)
    return None


def cycle_through(g: LabelledGraph, edge, edge_ok=None):
    """A cycle starting with ``edge`` and returning to its source, or None."""
    s, lab, d = edge
    back = shortest_path(g, d, {s}, edge_ok)
    if back is None:
        return None
    return [edge] + back


def reaching(g: LabelledGraph, targets, edge_ok=None) -> set:
    """Nodes from which some node of ``targets`` is reachable."""
    pred = defaultdict(list)
    for s, lab, d in g.edges:
        if edge_ok is None or edge_ok(s, lab, d):
            pred[d].append(s)
    seen = set(targets)
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for p in pred[v]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


def simple_cycles(g: LabelledGraph):
    """Every simple cycle as a list of edges, each reported once (from its least node)."""
    found = []
    for start in range(len(g)):
        path = []
        on_path = {start}

        def dfs(v):
            for lab, d in g.succ[v]:
                if d == start:
                    found.append(path + [(v, lab, d)])
                elif d > start and d not in on_path:
                    on_path.add(d)
                    path.append((v, lab, d))
                    dfs(d)
                    path.pop()
                    on_path.discard(d)

        dfs(start)
    return found


def lassos(g: LabelledGraph, max_visits=2, project=None) -> set:
    """Finite maximal walks and lassos whose prefix visits no node more than ``max_visits`` times.

    ``project`` maps an edge label to the emitted symbol, or None to drop it.
    With ``max_visits=1`` prefixes are simple paths; two visits are needed to
    witness walks that go round a cycle once and then leave it.
    """
    project = project or (lambda lab: lab)
    cycles_at = defaultdict(list)
    for cyc in simple_cycles(g):
        for i in range(len(cyc)):
            rot = cyc[i:] + cyc[:i]
            word = tuple(p for p in (project(lab) for _, lab, _ in rot) if p is not None)
            if not word:
                raise ValueError("cycle with no visible action")
            cycles_at[rot[0][0]].append(word)
    terminals = g.terminals
    out = set()
    visits = defaultdict(int)
    prefix = []

    def dfs(v):
        if v in terminals:
            out.add(tuple(prefix))
        for word in cycles_at[v]:
            out.add(Lasso(tuple(prefix), word))
        for lab, d in g.succ[v]:
            if visits[d] >= max_visits:
                continue
            visits[d] += 1
            sym = project(lab)
            if sym is not None:
                prefix.append(sym)
            dfs(d)
            if sym is not None:
                prefix.pop()
            visits[d] -= 1

    visits[g.root] = 1
    dfs(g.root)
    return out


def labels_of(path, project=None):
    project = project or (lambda lab: lab)
    return tuple(p for p in (project(lab) for _, lab, _ in path) if p is not None)
