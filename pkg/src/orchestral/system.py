"""Orchestrated systems ``client ||f server``: steps, product graph, strictness, ds-compliance."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from . import contracts as C
from . import orchestrators as O
from .graphs import LabelledGraph, ResourceLimit, explore, shortest_path
from .orchestrators import ActionKind
from .parser import render
from .syntax import TAU

__all__ = ["SystemConfig", "ProductGraph", "system_step", "product_graph", "StrictResult",
           "is_strict", "DsVerdict", "check_ds", "to_dot", "to_json", "DEFAULT_NODE_CAP",
           "DEFAULT_SUBSET_CAP"]

DEFAULT_NODE_CAP = 1_000_000
DEFAULT_SUBSET_CAP = 1_000_000


@dataclass(frozen=True)
class SystemConfig:
    client: object
    orch: object
    server: object

    @classmethod
    def of(cls, client, orch, server):
        return cls(C.state(client), O.state(orch), C.state(server))

    def __str__(self):
        return f"<{render(self.client)} || {render(self.orch)} || {render(self.server)}>"


def _offers(t):
    """Visible contract offers keyed by (name, is_output), plus tau successors."""
    vis, taus = {}, []
    for lab, nxt in C.transitions(t):
        if lab is TAU:
            taus.append(nxt)
        else:
            vis[(lab.name, lab.output)] = nxt
    return vis, taus


def system_step(c: SystemConfig):
    cl, cl_tau = _offers(c.client)
    sv, sv_tau = _offers(c.server)
    out = [(TAU, SystemConfig(n, c.orch, c.server)) for n in cl_tau]
    out += [(TAU, SystemConfig(c.client, c.orch, n)) for n in sv_tau]
    for m, f2 in O.orch_transitions(c.orch):
        a, k = m.name, m.kind
        client, server = c.client, c.server
        if k is ActionKind.SYNC_L:
            if (a, True) not in cl or (a, False) not in sv:
                continue
            client, server = cl[(a, True)], sv[(a, False)]
        elif k is ActionKind.SYNC_R:
            if (a, False) not in cl or (a, True) not in sv:
                continue
            client, server = cl[(a, False)], sv[(a, True)]
        elif k is ActionKind.IN_C:
            if (a, True) not in cl:
                continue
            client = cl[(a, True)]
        elif k is ActionKind.OUT_C:
            if (a, False) not in cl:
                continue
            client = cl[(a, False)]
        elif k is ActionKind.IN_S:
            if (a, True) not in sv:
                continue
            server = sv[(a, True)]
        else:
            if (a, False) not in sv:
                continue
            server = sv[(a, False)]
        out.append((m, SystemConfig(client, f2, server)))
    return out


class ProductGraph(LabelledGraph):
    @property
    def stuck(self):
        return self.terminals


def product_graph(client, orch, server, node_cap=DEFAULT_NODE_CAP) -> ProductGraph:
    g = explore(SystemConfig.of(client, orch, server), system_step, node_cap)
    return ProductGraph(g.states, g.succ, g.root, g.index)


@dataclass(frozen=True)
class StrictResult:
    strict: bool
    counterexample: tuple = None

    def __bool__(self):
        return self.strict


def _tau_close(g, nodes):
    seen = set(nodes)
    todo = list(seen)
    while todo:
        v = todo.pop()
        for lab, d in g.succ[v]:
            if lab is TAU and d not in seen:
                seen.add(d)
                todo.append(d)
    return frozenset(seen)


def is_strict(client, orch, server, node_cap=DEFAULT_NODE_CAP, subset_cap=DEFAULT_SUBSET_CAP,
              graph=None) -> StrictResult:
    """Every finite trace of ``orch`` is a trace of the system; otherwise a shortest one that is not."""
    g = graph if graph is not None else product_graph(client, orch, server, node_cap)
    start = (frozenset((O.state(orch),)), _tau_close(g, {g.root}))
    seen = {start}
    todo = deque([(start, ())])
    while todo:
        (fs, ss), trace = todo.popleft()
        moves = {}
        for f in fs:
            for m, f2 in O.orch_transitions(f):
                moves.setdefault(m, set()).add(f2)
        for m in sorted(moves, key=O.OrchAction.sort_key):
            succ = {d for v in ss for lab, d in g.succ[v] if lab == m}
            if not succ:
                return StrictResult(False, trace + (m,))
            nxt = (frozenset(moves[m]), _tau_close(g, succ))
            if nxt not in seen:
                if len(seen) >= subset_cap:
                    raise ResourceLimit(f"strictness check exceeds subset cap {subset_cap}")
                seen.add(nxt)
                todo.append((nxt, trace + (m,)))
    return StrictResult(True)


@dataclass(frozen=True)
class DsVerdict:
    holds: bool
    reason: str = ""
    trace: tuple = ()

    def __bool__(self):
        return self.holds


def check_ds(client, orch, server, node_cap=DEFAULT_NODE_CAP, subset_cap=DEFAULT_SUBSET_CAP,
             graph=None) -> DsVerdict:
    g = graph if graph is not None else product_graph(client, orch, server, node_cap)
    strict = is_strict(client, orch, server, subset_cap=subset_cap, graph=g)
    if not strict:
        shown = ".".join(map(str, strict.counterexample))
        return DsVerdict(False, f"not strict: orchestrator trace {shown} is not realised",
                         strict.counterexample)
    bad = {i for i in g.stuck if g.states[i].client != C.SUCCESS}
    if bad:
        path = shortest_path(g, g.root, bad)
        end = g.states[path[-1][2] if path else g.root]
        labels = tuple(lab for _, lab, _ in path)
        return DsVerdict(False, f"stuck at {end} with unfinished client", labels)
    return DsVerdict(True)


def to_json(g: LabelledGraph) -> dict:
    def node(st):
        if isinstance(st, SystemConfig):
            return {"client": render(st.client), "orch": render(st.orch), "server": render(st.server)}
        return {"term": render(st)}

    return {
        "root": g.root,
        "nodes": [node(s) for s in g.states],
        "edges": [[s, str(lab), d] for s, lab, d in g.edges],
        "stuck": sorted(g.terminals),
    }


def to_dot(g: LabelledGraph) -> str:
    lines = ["digraph product {", "  node [shape=box, fontname=monospace];"]
    for i, st in enumerate(g.states):
        shape = ", peripheries=2" if not g.succ[i] else ""
        lines.append(f"  n{i} [label={json.dumps(str(st))}{shape}];")
    for s, lab, d in g.edges:
        style = ", style=dashed" if lab is TAU else ""
        lines.append(f"  n{s} -> n{d} [label={json.dumps(str(lab))}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
