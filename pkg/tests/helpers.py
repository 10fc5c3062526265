"""Shared test tooling: term generators, an exhaustive enumerator and the lasso oracle."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from orchestral import contracts as C
from orchestral import orchestrators as O
from orchestral.buffers import classify
from orchestral.graphs import lassos
from orchestral.parser import parse_contract, parse_orchestrator
from orchestral.syntax import Rec, Var, binder_name

KINDS = list(O.ActionKind)
LEFT_HEADS = [k for k in KINDS if k.category is O.Category.IOTA_L]
RIGHT_HEADS = [k for k in KINDS if k.category is O.Category.IOTA_R]


def S(src):
    return parse_contract(src)


def F(src, check=True):
    return parse_orchestrator(src, check=check)


def oracle_respectful(f, max_visits=2):
    """Respectful iff every lasso / finite maximal trace of the term graph classifies respectful."""
    seqs = lassos(O.term_graph(f), max_visits)
    bad = [s for s in seqs if not classify(s).respectful]
    return not bad, bad


# Generators take a ``pick(lo, hi)`` callback so that the same code serves a
# seeded ``random.Random`` and a hypothesis ``draw``.

def _rng_pick(rng):
    return lambda lo, hi: rng.randint(lo, hi)


def _draw_pick(draw):
    return lambda lo, hi: draw(st.integers(lo, hi))


def _weighted(pick, options):
    # leaves are drawn less often so that generated terms are not mostly trivial
    weights = {"leaf": 1, "prefix": 3, "choice": 3, "rec": 2}
    table = [o for o in options for _ in range(weights[o])]
    return table[pick(0, len(table) - 1)]


def gen_contract(pick, budget, names=("a", "b", "c"), bound=(), under_rec=False):
    """A closed well-formed contract of size at most ``budget`` (``contracts.size``)."""
    options = ["leaf"]
    if budget >= 2:
        options.append("choice")
    if budget >= 3 and not under_rec:
        options.append("rec")
    kind = _weighted(pick, options)
    if under_rec:
        kind = "choice"
    if kind == "leaf":
        if bound and pick(0, 1):
            return Var(bound[pick(0, len(bound) - 1)])
        return C.SUCCESS
    if kind == "rec":
        v = binder_name(len(bound))
        return Rec(v, gen_contract(pick, budget - 1, names, bound + (v,), True))
    k = pick(1, max(1, min(len(names), budget // 2)))
    pool = list(names)
    chosen = []
    for _ in range(k):
        chosen.append(pool.pop(pick(0, len(pool) - 1)))
    left = budget
    branches = []
    for i, a in enumerate(chosen):
        rest = k - i - 1
        share = pick(1, max(1, left - 1 - 2 * rest))
        branches.append((a, gen_contract(pick, share, names, bound)))
        left -= 1 + share
    cls = C.InternalChoice if pick(0, 1) else C.ExternalChoice
    return cls(tuple(branches))


def gen_orchestrator(pick, budget, names=("a", "b"), bound=(), under_rec=False):
    """A closed well-formed orchestrator of size at most ``budget`` (``orchestrators.size``)."""
    options = []
    if not under_rec:
        options.append("leaf")
    if budget >= 2:
        options.append("prefix")
    if budget >= 4:
        options.append("choice")
    if budget >= 3 and not under_rec:
        options.append("rec")
    if not options:
        options = ["prefix"]
        budget = max(budget, 2)
    kind = _weighted(pick, options)
    if kind == "leaf":
        if bound and pick(0, 1):
            return Var(bound[pick(0, len(bound) - 1)])
        return O.STOP
    if kind == "rec":
        v = binder_name(len(bound))
        return Rec(v, gen_orchestrator(pick, budget - 1, names, bound + (v,), True))
    if kind == "prefix":
        m = O.OrchAction(KINDS[pick(0, 5)], names[pick(0, len(names) - 1)])
        return O.Prefix(m, gen_orchestrator(pick, budget - 1, names, bound))
    heads = LEFT_HEADS if pick(0, 1) else RIGHT_HEADS
    k = pick(2, max(2, budget // 2))
    left = budget
    branches = []
    for i in range(k):
        rest = k - i - 1
        share = pick(2, max(2, left - 2 * rest))
        m = O.OrchAction(heads[pick(0, 1)], names[pick(0, len(names) - 1)])
        branches.append(O.Prefix(m, gen_orchestrator(pick, share - 1, names, bound)))
        left -= share
    return O.Choice(tuple(branches))


def random_contract(rng, budget=8, names=("a", "b", "c")):
    return gen_contract(_rng_pick(rng), budget, names)


def random_orchestrator(rng, budget=12, names=("a", "b")):
    return gen_orchestrator(_rng_pick(rng), budget, names)


@st.composite
def contracts(draw, budget=8, names=("a", "b", "c")):
    return gen_contract(_draw_pick(draw), budget, names)


@st.composite
def orchestrators(draw, budget=10, names=("a", "b")):
    return gen_orchestrator(_draw_pick(draw), budget, names)


def random_pairs(n, seed=0, budget=8):
    rng = random.Random(seed)
    return [(random_contract(rng, budget), random_contract(rng, budget)) for _ in range(n)]


def enumerate_orchestrators(size, names=("a",)):
    """Every closed well-formed orchestrator of exactly ``size`` nodes, up to canonical form."""
    actions = [O.OrchAction(k, a) for k in KINDS for a in names]
    by_head = {cat: [m for m in actions if m.category is cat]
               for cat in (O.Category.IOTA_L, O.Category.IOTA_R)}

    def terms(n, bound, under_rec):
        if n == 1 and not under_rec:
            yield O.STOP
            for v in bound:
                yield Var(v)
        if n >= 2:
            for m in actions:
                for c in terms(n - 1, bound, False):
                    yield O.Prefix(m, c)
        if n >= 3 and not under_rec:
            v = binder_name(len(bound))
            for body in terms(n - 1, bound + (v,), True):
                yield Rec(v, body)
        if n >= 4:
            for heads in by_head.values():
                yield from choices(n, bound, heads, 2)

    def branches(n, bound, heads):
        for m in heads:
            for c in terms(n - 1, bound, False):
                yield O.Prefix(m, c)

    def choices(n, bound, heads, need):
        # ordered splits of n into at least ``need`` branch sizes, each >= 2
        for first in range(2, n - 2 * (need - 1) + 1 if need > 1 else n + 1):
            rest = n - first
            for b in branches(first, bound, heads):
                if rest == 0:
                    if need <= 1:
                        yield b
                    continue
                for tail in choices(rest, bound, heads, max(need - 1, 1)):
                    tail_branches = tail.branches if isinstance(tail, O.Choice) else (tail,)
                    yield O.Choice((b,) + tail_branches)

    seen = set()
    for t in terms(size, (), False):
        c = O.canon(t)
        if c not in seen and O.size(c) == size and not O.well_formed_orch(c):
            seen.add(c)
            yield c
