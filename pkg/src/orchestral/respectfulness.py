"""Respectfulness of orchestrators, on buffer-aware weighted trees and on plain graphs.

A weighted tree is the syntax tree of an orchestrator plus one back edge from
every variable leaf to its binder, so that its walks from the root spell
exactly the traces of the orchestrator. Edge weights record what an action
does to the buffer of one name (or of all names, for the star tree).

Labels are prefix sums along tree edges. Walking a back edge from a leaf
labelled ``k`` to a binder labelled ``h`` shifts every later value by
``k - h``, which is why the checks below are phrased with those two numbers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from . import orchestrators as O
from .buffers import delta
from .graphs import LabelledGraph, cycle_through, cyclic_edges, reaching, shortest_path
from .orchestrators import ActionKind
from .syntax import TAU, Rec, Var, join_path

__all__ = ["WeightedTree", "Labelling", "Evidence", "Check", "RespectVerdict",
           "buffer_aware_tree", "star_tree", "label", "check_sound", "check_client_respectful",
           "check_non_def_server_inputted", "is_respectful", "graph_verdict"]

LEFT, RIGHT = 0, 1
_SIDE = ("cs", "sc")


@dataclass
class WeightedTree:
    """Syntax tree with (lw, rw) edge weights; ``binder_of`` maps variable leaves to rec nodes."""

    terms: list
    paths: list
    children: list          # node -> [(action or None, child, (lw, rw))]
    binder_of: dict
    root: int = 0

    def __len__(self):
        return len(self.terms)

    def where(self, v):
        return join_path(self.paths[v])

    def graph(self) -> LabelledGraph:
        """Tree edges plus back edges, labelled with (action or None, weights)."""
        succ = [[((m, w), c) for m, c, w in out] for out in self.children]
        for x, b in self.binder_of.items():
            succ[x].append(((None, (0, 0)), b))
        return LabelledGraph(list(range(len(self))), succ, self.root)


@dataclass
class Labelling:
    left: list
    right: list

    def __getitem__(self, v):
        return (self.left[v], self.right[v])


@dataclass(frozen=True)
class Evidence:
    check: str
    name: str
    detail: str

    def __str__(self):
        who = f" [{self.name}]" if self.name else ""
        return f"{self.check}{who}: {self.detail}"


@dataclass
class Check:
    ok: bool
    evidence: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass
class RespectVerdict:
    respectful: bool
    per_name: dict
    server_inputted_ok: bool
    evidence: list = field(default_factory=list)

    def __bool__(self):
        return self.respectful

    def to_json(self):
        return {
            "respectful": self.respectful,
            "per_name": self.per_name,
            "server_inputted_ok": self.server_inputted_ok,
            "evidence": [{"check": e.check, "name": e.name, "detail": e.detail} for e in self.evidence],
        }


def _build(f, weight) -> WeightedTree:
    terms, paths, children, binder_of = [], [], [], {}

    def new(t, path):
        terms.append(t)
        paths.append(path)
        children.append([])
        return len(terms) - 1

    root = new(f, ())
    todo = [(root, {})]
    while todo:
        v, env = todo.pop()
        t, path = terms[v], paths[v]
        if isinstance(t, O.Prefix):
            c = new(t.cont, path + (str(t.action),))
            children[v].append((t.action, c, weight(t.action)))
            todo.append((c, env))
        elif isinstance(t, O.Choice):
            for i, b in enumerate(t.branches):
                c = new(b, path + (f"\\/{i}",))
                children[v].append((None, c, (0, 0)))
                todo.append((c, env))
        elif isinstance(t, Rec):
            c = new(t.body, path + (f"rec {t.var}",))
            children[v].append((None, c, (0, 0)))
            todo.append((c, {**env, t.var: v}))
        elif isinstance(t, Var) and t.name in env:
            binder_of[v] = env[t.name]
    return WeightedTree(terms, paths, children, binder_of, root)


def buffer_aware_tree(f, a) -> WeightedTree:
    return _tree_for(f, a)


def star_tree(f) -> WeightedTree:
    return _tree_for(f, None)


@lru_cache(maxsize=4096)
def _tree_for(f, a):
    if a is None:
        return _build(f, delta)
    return _build(f, lambda m: delta(m) if m.name == a else (0, 0))


def label(t: WeightedTree) -> Labelling:
    left = [0] * len(t)
    right = [0] * len(t)
    todo = [t.root]
    while todo:
        v = todo.pop()
        for _, c, (lw, rw) in t.children[v]:
            left[c] = left[v] + lw
            right[c] = right[v] + rw
            todo.append(c)
    return Labelling(left, right)


def _leaves(t: WeightedTree, kind):
    return [v for v, term in enumerate(t.terms) if isinstance(term, kind)]


def check_sound(f, a) -> Check:
    """No negative label, and no loop whose leaf label is below its binder's, on either side."""
    t = buffer_aware_tree(f, a)
    lab = label(t)
    ev = []
    for side in (LEFT, RIGHT):
        labels = (lab.left, lab.right)[side]
        for v in range(len(t)):
            if labels[v] < 0:
                ev.append(Evidence("sound", a, f"{_SIDE[side]}_{a} label {labels[v]} at {t.where(v)}"))
                break
        for x, b in sorted(t.binder_of.items()):
            k, h = labels[x], labels[b]
            if k - h < 0:
                ev.append(Evidence("sound", a, f"loop {t.where(x)} -> {t.where(b)} "
                                   f"drains {_SIDE[side]}_{a} by {h - k} per round"))
                break
    return Check(not ev, ev)


def _quiet_recurrent(g, side):
    # nodes lying on a cycle along which the given side never changes
    ok = lambda s, lab, d: lab[1][side] == 0
    return {s for s, _, _ in cyclic_edges(g, ok)}


def check_client_respectful(f, a) -> Check:
    """Left labels of every place a trace can come to rest must be 0, and no cycle may only fill ``cs``.

    A trace stops growing its left restriction either at a ``1`` leaf or by
    settling into a cycle with all left weights 0; those are the targets.
    Every target needs left label 0, and every loop whose binder can still
    reach a target must have ``k == h`` so going round it does not shift the
    value the target sees. Finally a cycle with a +1 left weight and no -1
    left weight would make the restriction definitely ``<a,_>``.
    """
    t = buffer_aware_tree(f, a)
    lab = label(t)
    g = t.graph()
    ev = []
    stops = set(_leaves(t, O.Stop))
    targets = stops | _quiet_recurrent(g, LEFT)
    for v in sorted(targets):
        if lab.left[v] != 0:
            what = "1" if v in stops else "quiet loop"
            ev.append(Evidence("client_respectful", a, f"{what} at {t.where(v)} leaves cs_{a}={lab.left[v]}"))
            break
    live = reaching(g, targets)
    for x, b in sorted(t.binder_of.items()):
        if b in live and lab.left[x] != lab.left[b]:
            ev.append(Evidence("client_respectful", a, f"loop {t.where(x)} -> {t.where(b)} shifts cs_{a} "
                               f"by {lab.left[x] - lab.left[b]} before reaching an end"))
            break
    filling = _filling_cycle(g, LEFT)
    if filling is not None:
        text = _cycle_text(g, filling, lambda s, lab, d: lab[1][LEFT] >= 0)
        ev.append(Evidence("client_respectful", a, f"cycle {text} at {t.where(filling[0])} takes "
                           f"<{a},_> but never <_,!{a}>"))
    return Check(not ev, ev)


def _filling_cycle(g, side):
    no_drain = lambda s, lab, d: lab[1][side] >= 0
    for e in cyclic_edges(g, no_drain):
        if e[1][1][side] > 0:
            return e
    return None


def check_non_def_server_inputted(f, strict=False) -> Check:
    """No cycle made only of ``<_,a>`` actions.

    ``strict=True`` applies the per-loop star-tree rule instead: a loop with a
    +1 right weight must also contain a -1 right weight. That rule is coarser
    and rejects loops mixing server inputs with synchronisations.
    """
    t = star_tree(f)
    if strict:
        ev = []
        for x, b in sorted(t.binder_of.items()):
            ws = _path_weights(t, b, x)
            if any(w[RIGHT] > 0 for w in ws) and not any(w[RIGHT] < 0 for w in ws):
                ev.append(Evidence("non_def_server_inputted", "",
                                   f"loop {t.where(x)} -> {t.where(b)} has +1 right weight and no -1"))
        return Check(not ev, ev)
    g = t.graph()
    ok = lambda s, lab, d: lab[0] is None or lab[0].kind is ActionKind.IN_S
    for s, lab, d in cyclic_edges(g, ok):
        if lab[0] is not None:
            return Check(False, [Evidence("non_def_server_inputted", "",
                                          f"cycle {_cycle_text(g, (s, lab, d), ok)} at {t.where(s)} "
                                          "only reads from the server")])
    return Check(True)


def _cycle_text(g, edge, ok):
    cyc = cycle_through(g, edge, ok)
    return ".".join(str(lab[0]) for _, lab, _ in cyc if lab[0] is not None)


def _path_weights(t, top, bottom):
    parent = {}
    for v, out in enumerate(t.children):
        for _, c, w in out:
            parent[c] = (v, w)
    ws = []
    v = bottom
    while v != top:
        v, w = parent[v]
        ws.append(w)
    return ws


def is_respectful(f, strict=False) -> RespectVerdict:
    per_name, ev = {}, []
    for a in sorted(O.names(f)):
        s = check_sound(f, a)
        c = check_client_respectful(f, a)
        per_name[a] = {"sound": s.ok, "client_respectful": c.ok}
        ev += s.evidence + c.evidence
    srv = check_non_def_server_inputted(f, strict)
    ev += srv.evidence
    ok = srv.ok and all(v["sound"] and v["client_respectful"] for v in per_name.values())
    return RespectVerdict(ok, per_name, srv.ok, ev)


# Generic analysis on a graph whose labels are orchestration actions or silent
# (None or tau). Used on product graphs, where traces are system traces.

def _silent(lab):
    return lab is None or lab is TAU


def _weight(lab, a, side):
    if _silent(lab) or lab.name != a:
        return 0
    return delta(lab)[side]


def _trace(g, path):
    return ".".join(str(lab) for _, lab, _ in path if not _silent(lab)) or "(empty)"


def _first_negative(g, a, side):
    """A walk from the root along which the counter goes below 0, as an edge list, or None."""
    n = len(g)
    dist = [None] * n
    pred = [None] * n
    dist[g.root] = 0
    todo = deque([g.root])
    queued = {g.root}
    while todo:
        v = todo.popleft()
        queued.discard(v)
        for lab, d in g.succ[v]:
            nd = dist[v] + _weight(lab, a, side)
            if dist[d] is None or nd < dist[d]:
                dist[d] = nd
                pred[d] = (v, lab)
                if nd < 0:
                    path, seen, u = [], set(), d
                    while u != g.root and u not in seen:
                        seen.add(u)
                        p, l = pred[u]
                        path.append((p, l, u))
                        u = p
                    return path[::-1]
                if d not in queued:
                    queued.add(d)
                    todo.append(d)
    return None


def _graph_client(g, a):
    ok_quiet = lambda s, lab, d: _weight(lab, a, LEFT) == 0
    targets = g.terminals | {s for s, _, _ in cyclic_edges(g, ok_quiet)}
    live = reaching(g, targets)
    if g.root in live:
        level = {g.root: 0}
        via = {g.root: None}
        todo = deque([g.root])
        while todo:
            v = todo.popleft()
            for lab, d in g.succ[v]:
                if d not in live:
                    continue
                lv = level[v] + _weight(lab, a, LEFT)
                if d not in level:
                    level[d] = lv
                    via[d] = (v, lab)
                    todo.append(d)
                elif level[d] != lv:
                    return (f"cs_{a} reaches {g.states[d]} at both {level[d]} and {lv}; "
                            f"one of them is frozen nonzero later")
        for v in sorted(targets & level.keys()):
            if level[v] != 0:
                path = shortest_path(g, g.root, {v})
                return f"trace {_trace(g, path)} comes to rest with cs_{a}={level[v]}"
    no_drain = lambda s, lab, d: _weight(lab, a, LEFT) >= 0
    for s, lab, d in cyclic_edges(g, no_drain):
        if _weight(lab, a, LEFT) > 0:
            return f"cycle through {g.states[s]} takes <{a},_> but never <_,!{a}>"
    return None


def graph_verdict(g: LabelledGraph) -> RespectVerdict:
    """Respectfulness of every maximal walk of ``g`` read as an action sequence."""
    names = sorted({lab.name for _, lab, _ in g.edges if not _silent(lab)})
    per_name, ev = {}, []
    for a in names:
        sound = True
        for side in (LEFT, RIGHT):
            bad = _first_negative(g, a, side)
            if bad is not None:
                sound = False
                ev.append(Evidence("sound", a, f"{_SIDE[side]}_{a} goes negative after {_trace(g, bad)}"))
                break
        why = _graph_client(g, a)
        if why is not None:
            ev.append(Evidence("client_respectful", a, why))
        per_name[a] = {"sound": sound, "client_respectful": why is None}
    srv_ok = True
    ok = lambda s, lab, d: _silent(lab) or lab.kind is ActionKind.IN_S
    assert not cyclic_edges(g, lambda s, lab, d: _silent(lab)), "cycle of silent steps"
    for s, lab, d in cyclic_edges(g, ok):
        if not _silent(lab):
            srv_ok = False
            ev.append(Evidence("non_def_server_inputted", "", f"server-input-only cycle through {g.states[s]}"))
            break
    ok_all = srv_ok and all(v["sound"] and v["client_respectful"] for v in per_name.values())
    return RespectVerdict(ok_all, per_name, srv_ok, ev)
