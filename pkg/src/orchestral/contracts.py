"""Session contracts: terms, well-formedness and their labelled transition system.

Terms are immutable. Recursion is equi-recursive: ``rec X . t`` and its
one-step unfolding denote the same state, so every state-space walk goes
through :func:`state`, which head-unfolds and canonicalises.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .syntax import TAU, Rec, Var, Violation, binder_name, cached_hash, join_path

__all__ = [
    "Success", "ExternalChoice", "InternalChoice", "Var", "Rec", "SUCCESS",
    "ContractAction", "TAU", "inp", "out", "ext", "intc",
    "free_vars", "substitute", "unfold", "canon", "state", "transitions",
    "reachable_subterms", "well_formed", "size", "names", "is_closed",
]


@dataclass(frozen=True)
class Success:
    __hash__ = cached_hash

    def __str__(self):
        return "1"


@dataclass(frozen=True)
class ExternalChoice:
    """``a1.s1 + ... + an.sn``; ``branches`` is a tuple of (name, continuation)."""

    branches: tuple

    __hash__ = cached_hash

    def __str__(self):
        from .parser import render
        return render(self)


@dataclass(frozen=True)
class InternalChoice:
    """``!a1.s1 (+) ... (+) !an.sn``; a single branch is an output prefix."""

    branches: tuple

    __hash__ = cached_hash

    def __str__(self):
        from .parser import render
        return render(self)


SUCCESS = Success()


@dataclass(frozen=True)
class ContractAction:
    name: str
    output: bool = False

    __hash__ = cached_hash

    def __str__(self):
        return ("!" if self.output else "") + self.name


def inp(name, cont=SUCCESS):
    return ExternalChoice(((name, cont),))


def out(name, cont=SUCCESS):
    return InternalChoice(((name, cont),))


def ext(*pairs):
    return ExternalChoice(tuple(pairs))


def intc(*pairs):
    return InternalChoice(tuple(pairs))


_CHOICES = (ExternalChoice, InternalChoice)


@lru_cache(maxsize=None)
def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Rec):
        return free_vars(t.body) - {t.var}
    if isinstance(t, _CHOICES):
        acc = frozenset()
        for _, c in t.branches:
            acc |= free_vars(c)
        return acc
    return frozenset()


def is_closed(t) -> bool:
    return not free_vars(t)


def substitute(t, var, repl):
    """Replace free occurrences of ``var`` by the closed term ``repl``."""
    if var not in free_vars(t):
        return t
    if isinstance(t, Var):
        return repl
    if isinstance(t, Rec):
        return Rec(t.var, substitute(t.body, var, repl))
    return type(t)(tuple((a, substitute(c, var, repl)) for a, c in t.branches))


def unfold(t):
    while isinstance(t, Rec):
        t = substitute(t.body, t.var, t)
    return t


@lru_cache(maxsize=None)
def canon(t):
    """Canonical representative: sorted branches, depth-named binders, no unused binders."""
    return _canon(t, {}, 0)


def _canon(t, env, depth):
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, Rec):
        if t.var not in free_vars(t.body):
            return _canon(t.body, env, depth)
        new = binder_name(depth)
        return Rec(new, _canon(t.body, {**env, t.var: new}, depth + 1))
    if isinstance(t, _CHOICES):
        branches = sorted(((a, _canon(c, env, depth)) for a, c in t.branches), key=lambda b: b[0])
        return type(t)(tuple(branches))
    return t


@lru_cache(maxsize=None)
def state(t):
    """The LTS state denoted by ``t``: head-unfolded and canonical."""
    return canon(unfold(t))


def transitions(t):
    """Outgoing (label, next state) pairs; labels are ``TAU`` or :class:`ContractAction`."""
    s = state(t)
    if isinstance(s, ExternalChoice):
        return [(ContractAction(a), state(c)) for a, c in s.branches]
    if isinstance(s, InternalChoice):
        if len(s.branches) == 1:
            a, c = s.branches[0]
            return [(ContractAction(a, True), state(c))]
        return [(TAU, state(InternalChoice((b,)))) for b in s.branches]
    return []


def reachable_subterms(t) -> set:
    start = state(t)
    seen = {start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        for _, nxt in transitions(s):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def well_formed(term) -> list:
    """Violations of closedness, distinct branch names and contractive recursion."""
    found = []

    def walk(t, bound, path):
        if isinstance(t, Var):
            if t.name not in bound:
                found.append(Violation("FreeVariable", t.name, join_path(path)))
        elif isinstance(t, Rec):
            if isinstance(t.body, Var):
                found.append(Violation("UnguardedRecursion", t.var, join_path(path)))
            elif isinstance(t.body, Rec):
                found.append(Violation("ConsecutiveRec", t.var, join_path(path)))
            walk(t.body, bound | {t.var}, path + (f"rec {t.var}",))
        elif isinstance(t, _CHOICES):
            mark = "!" if isinstance(t, InternalChoice) else ""
            if not t.branches:
                found.append(Violation("EmptyChoice", "", join_path(path)))
            seen = set()
            for a, c in t.branches:
                if a in seen:
                    found.append(Violation("DuplicateBranchName", a, join_path(path)))
                seen.add(a)
                walk(c, bound, path + (mark + a,))

    walk(term, frozenset(), ())
    return found


def size(t) -> int:
    if isinstance(t, Rec):
        return 1 + size(t.body)
    if isinstance(t, _CHOICES):
        return sum(1 + size(c) for _, c in t.branches)
    return 1


def names(t) -> set:
    if isinstance(t, Rec):
        return names(t.body)
    if isinstance(t, _CHOICES):
        acc = set()
        for a, c in t.branches:
            acc.add(a)
            acc |= names(c)
        return acc
    return set()
