"""Orchestrated compliance for session contracts.

Clients and servers are session contracts. An orchestrator sits between them,
forwarding or buffering messages, and the library decides whether it makes the
client comply with the server, synthesises such orchestrators, and checks that
they never strand client messages in their buffer.
"""
from .buffers import Buffer, classify
from .compliance import ComplianceReport, check_full, check_triple_ds, cross_check_prop1, decide_pair
from .graphs import ResourceLimit
from .parser import ParseError, WellFormednessError, load, parse_contract, parse_orchestrator, render
from .respectfulness import is_respectful
from .synthesis import Env, enumerate_family, find_witness, synth, verify_judgment
from .system import check_ds, is_strict, product_graph

__version__ = "0.1.0"

__all__ = [
    "Buffer", "classify", "ComplianceReport", "check_full", "check_triple_ds", "cross_check_prop1",
    "decide_pair", "ResourceLimit", "ParseError", "WellFormednessError", "load", "parse_contract",
    "parse_orchestrator", "render", "is_respectful", "Env", "enumerate_family", "find_witness",
    "synth", "verify_judgment", "check_ds", "is_strict", "product_graph",
]
