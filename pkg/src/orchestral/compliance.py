"""Top-level decisions: compliance of a triple, and existence of a mediator for a pair."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import contracts as C
from . import orchestrators as O
from .graphs import ResourceLimit, shortest_path
from .parser import render
from .respectfulness import graph_verdict, is_respectful
from .synthesis import DEFAULT_ENUM_CAP, Env, find_witness, synth
from .system import DEFAULT_NODE_CAP, check_ds, is_strict, product_graph

__all__ = ["ComplianceReport", "check_full", "check_triple_ds", "decide_pair", "Prop1Report",
           "cross_check_prop1", "HOLDS", "FAILS", "INCONCLUSIVE"]

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive_by_cap"


@dataclass
class ComplianceReport:
    mode: str
    verdict: str
    witness: object = None
    evidence: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def __bool__(self):
        return self.holds

    def exit_code(self):
        return {HOLDS: 0, FAILS: 1}.get(self.verdict, 2)

    def to_json(self):
        out = {"mode": self.mode, "verdict": self.verdict, "stats": self.stats}
        if self.witness is not None:
            out["witness"] = render(self.witness)
        if self.evidence:
            out["evidence"] = [str(e) for e in self.evidence]
        return out


def _timed(stats, start):
    stats["seconds"] = round(time.perf_counter() - start, 6)
    return stats


def check_full(client, orch, server, node_cap=DEFAULT_NODE_CAP) -> ComplianceReport:
    """Stuck states leave the client done, and every system trace is respectful.

    The analysis runs on the product graph, so branches of ``orch`` that the
    partners never enable do not count against it.
    """
    t0 = time.perf_counter()
    g = product_graph(client, orch, server, node_cap)
    stats = {"product_nodes": len(g), "product_edges": len(g.edges)}
    evidence = []
    bad = sorted(i for i in g.stuck if g.states[i].client != C.SUCCESS)
    if bad:
        path = shortest_path(g, g.root, set(bad))
        labels = ".".join(str(lab) for _, lab, _ in path if str(lab) != "tau") or "(empty)"
        end = g.states[path[-1][2]] if path else g.states[g.root]
        evidence.append(f"stuck after {labels} at {end} with unfinished client")
    verdict = graph_verdict(g)
    evidence += [str(e) for e in verdict.evidence]
    return ComplianceReport("full", FAILS if evidence else HOLDS, None, evidence, _timed(stats, t0))


def check_triple_ds(client, orch, server, node_cap=DEFAULT_NODE_CAP) -> ComplianceReport:
    t0 = time.perf_counter()
    g = product_graph(client, orch, server, node_cap)
    v = check_ds(client, orch, server, graph=g)
    stats = {"product_nodes": len(g), "product_edges": len(g.edges)}
    return ComplianceReport("ds", HOLDS if v.holds else FAILS, None,
                            [] if v.holds else [v.reason], _timed(stats, t0))


def decide_pair(client, server, mode="full", enum_cap=DEFAULT_ENUM_CAP,
                node_cap=DEFAULT_NODE_CAP) -> ComplianceReport:
    """Is there an orchestrator making ``client`` comply with ``server``? Witness included when there is."""
    t0 = time.perf_counter()
    if mode == "ds":
        fam = synth(Env(), client, server)
        first = next(iter(fam.members()), None)
        if first is None:
            return ComplianceReport("ds", FAILS, None, ["synthesis produced no orchestrator"],
                                    _timed({}, t0))
        return ComplianceReport("ds", HOLDS, O.canon(first), [], _timed({}, t0))
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    try:
        search = find_witness(client, server, enum_cap=enum_cap, node_cap=node_cap)
    except ResourceLimit as e:
        return ComplianceReport("full", INCONCLUSIVE, None, [str(e)], _timed({"examined": enum_cap}, t0))
    stats = {"examined": search.examined}
    if search.witness is None:
        return ComplianceReport("full", FAILS, None,
                                [f"none of the {search.examined} synthesised orchestrators "
                                 "is strict and respectful"], _timed(stats, t0))
    return ComplianceReport("full", HOLDS, O.canon(search.witness), [], _timed(stats, t0))


@dataclass
class Prop1Report:
    strict: bool
    full: bool
    ds: bool
    respectful: bool

    @property
    def applicable(self):
        return self.strict

    @property
    def left(self):
        return self.full and self.strict

    @property
    def right(self):
        return self.ds and self.respectful

    @property
    def agree(self):
        """Both sides coincide, or the equivalence does not apply because ``orch`` is not strict."""
        return not self.applicable or self.left == self.right

    def to_json(self):
        return {"strict": self.strict, "full": self.full, "ds": self.ds, "respectful": self.respectful,
                "applicable": self.applicable, "left": self.left, "right": self.right,
                "agree": self.agree}


def cross_check_prop1(client, orch, server, node_cap=DEFAULT_NODE_CAP) -> Prop1Report:
    """For strict orchestrators full compliance must equal ds-compliance plus respectfulness."""
    g = product_graph(client, orch, server, node_cap)
    strict = is_strict(client, orch, server, graph=g).strict
    full = check_full(client, orch, server, node_cap).holds
    ds = check_ds(client, orch, server, graph=g).holds
    return Prop1Report(strict, full, ds, is_respectful(orch).respectful)
