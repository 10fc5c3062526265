"""Session orchestrators: the six mediation actions, terms, LTS and traces."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .graphs import Lasso, LabelledGraph, explore, lassos
from .syntax import Rec, Var, Violation, binder_name, cached_hash, join_path

__all__ = [
    "ActionKind", "Category", "OrchAction", "Stop", "Prefix", "Choice", "Var", "Rec",
    "STOP", "Lasso", "sync_l", "sync_r", "in_c", "in_s", "out_c", "out_s",
    "prefix", "choice", "free_vars", "substitute", "unfold", "canon", "state",
    "orch_transitions", "term_graph", "traces_bounded", "maximal_lassos",
    "well_formed_orch", "size", "names", "actions",
]


class Category(enum.Enum):
    IOTA_L = "iota_L"
    IOTA_R = "iota_R"
    OUT = "o"


class ActionKind(enum.Enum):
    SYNC_L = "sync_l"   # <a,!a>
    SYNC_R = "sync_r"   # <!a,a>
    IN_C = "in_c"       # <a,_>
    IN_S = "in_s"       # <_,a>
    OUT_C = "out_c"     # <!a,_>
    OUT_S = "out_s"     # <_,!a>

    @property
    def category(self):
        return _CATEGORY[self]


_CATEGORY = {
    ActionKind.SYNC_L: Category.IOTA_L,
    ActionKind.IN_C: Category.IOTA_L,
    ActionKind.SYNC_R: Category.IOTA_R,
    ActionKind.IN_S: Category.IOTA_R,
    ActionKind.OUT_C: Category.OUT,
    ActionKind.OUT_S: Category.OUT,
}

_SHAPE = {
    ActionKind.SYNC_L: ("{}", "!{}"),
    ActionKind.SYNC_R: ("!{}", "{}"),
    ActionKind.IN_C: ("{}", "_"),
    ActionKind.IN_S: ("_", "{}"),
    ActionKind.OUT_C: ("!{}", "_"),
    ActionKind.OUT_S: ("_", "!{}"),
}


@dataclass(frozen=True)
class OrchAction:
    kind: ActionKind
    name: str

    __hash__ = cached_hash

    @property
    def category(self):
        return self.kind.category

    def __str__(self):
        left, right = _SHAPE[self.kind]
        return f"<{left.format(self.name)},{right.format(self.name)}>"

    def __repr__(self):
        return f"OrchAction({self})"

    def sort_key(self):
        return (self.name, self.kind.value)


def sync_l(a):
    return OrchAction(ActionKind.SYNC_L, a)


def sync_r(a):
    return OrchAction(ActionKind.SYNC_R, a)


def in_c(a):
    return OrchAction(ActionKind.IN_C, a)


def in_s(a):
    return OrchAction(ActionKind.IN_S, a)


def out_c(a):
    return OrchAction(ActionKind.OUT_C, a)


def out_s(a):
    return OrchAction(ActionKind.OUT_S, a)


@dataclass(frozen=True)
class Stop:
    __hash__ = cached_hash

    def __str__(self):
        return "1"


@dataclass(frozen=True)
class Prefix:
    action: OrchAction
    cont: object

    __hash__ = cached_hash

    def __str__(self):
        from .parser import render
        return render(self)


@dataclass(frozen=True)
class Choice:
    branches: tuple

    __hash__ = cached_hash

    def __str__(self):
        from .parser import render
        return render(self)


STOP = Stop()


def prefix(*actions, cont=STOP):
    """``prefix(m1, m2, cont=f)`` is ``m1.m2.f``."""
    t = cont
    for m in reversed(actions):
        t = Prefix(m, t)
    return t


def choice(*branches):
    return branches[0] if len(branches) == 1 else Choice(tuple(branches))


@lru_cache(maxsize=None)
def free_vars(f) -> frozenset:
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, Rec):
        return free_vars(f.body) - {f.var}
    if isinstance(f, Prefix):
        return free_vars(f.cont)
    if isinstance(f, Choice):
        acc = frozenset()
        for b in f.branches:
            acc |= free_vars(b)
        return acc
    return frozenset()


def substitute(f, var, repl):
    if var not in free_vars(f):
        return f
    if isinstance(f, Var):
        return repl
    if isinstance(f, Rec):
        return Rec(f.var, substitute(f.body, var, repl))
    if isinstance(f, Prefix):
        return Prefix(f.action, substitute(f.cont, var, repl))
    return Choice(tuple(substitute(b, var, repl) for b in f.branches))


def unfold(f):
    while isinstance(f, Rec):
        f = substitute(f.body, f.var, f)
    return f


@lru_cache(maxsize=None)
def canon(f):
    return _canon(f, {}, 0)


def _canon(f, env, depth):
    if isinstance(f, Var):
        return Var(env.get(f.name, f.name))
    if isinstance(f, Rec):
        if f.var not in free_vars(f.body):
            return _canon(f.body, env, depth)
        new = binder_name(depth)
        return Rec(new, _canon(f.body, {**env, f.var: new}, depth + 1))
    if isinstance(f, Prefix):
        return Prefix(f.action, _canon(f.cont, env, depth))
    if isinstance(f, Choice):
        from .parser import render
        flat = []
        for b in f.branches:
            b = _canon(b, env, depth)
            flat.extend(b.branches if isinstance(b, Choice) else (b,))
        uniq = {render(b): b for b in flat}
        ordered = [uniq[k] for k in sorted(uniq)]
        return ordered[0] if len(ordered) == 1 else Choice(tuple(ordered))
    return f


@lru_cache(maxsize=None)
def state(f):
    return canon(unfold(f))


def _offers(f):
    f = unfold(f)
    if isinstance(f, Prefix):
        return [(f.action, state(f.cont))]
    if isinstance(f, Choice):
        return [t for b in f.branches for t in _offers(b)]
    return []


def orch_transitions(f):
    """Outgoing (action, next state) pairs of the orchestrator LTS."""
    return _offers(state(f))


def term_graph(f, cap=None) -> LabelledGraph:
    """Finite reachable-state graph of ``f``; root is node 0 and terminals are Stop states."""
    return explore(state(f), orch_transitions, cap)


def traces_bounded(f, depth: int) -> set:
    frontier = {((), state(f))}
    result = {()}
    for _ in range(depth):
        nxt = set()
        for tr, s in frontier:
            for m, s2 in orch_transitions(s):
                nxt.add((tr + (m,), s2))
        result |= {tr for tr, _ in nxt}
        frontier = nxt
    return result


def maximal_lassos(f, max_visits=2) -> set:
    """Finite maximal traces and lassos of ``f`` (see :func:`graphs.lassos`)."""
    return lassos(term_graph(f), max_visits)


def well_formed_orch(f) -> list:
    found = []

    def walk(t, bound, path):
        if isinstance(t, Var):
            if t.name not in bound:
                found.append(Violation("FreeVariable", t.name, join_path(path)))
        elif isinstance(t, Rec):
            body = t.body
            while isinstance(body, Rec):
                body = body.body
            if body == Var(t.var):
                found.append(Violation("UnguardedRecursion", t.var, join_path(path)))
            walk(t.body, bound | {t.var}, path + (f"rec {t.var}",))
        elif isinstance(t, Prefix):
            walk(t.cont, bound, path + (str(t.action),))
        elif isinstance(t, Choice):
            heads = []
            for i, b in enumerate(t.branches):
                if isinstance(b, Choice):
                    heads.extend(x.action for x in b.branches if isinstance(x, Prefix))
                elif isinstance(b, Prefix):
                    heads.append(b.action)
                else:
                    found.append(Violation("ChoiceBranchNotPrefix", str(b), join_path(path + (f"\\/{i}",))))
                walk(b, bound, path + (f"\\/{i}",))
            cats = {m.category for m in heads}
            if Category.OUT in cats:
                bad = ", ".join(str(m) for m in heads if m.category is Category.OUT)
                found.append(Violation("ChoiceHeadedByOAction", bad, join_path(path)))
            elif len(cats) > 1:
                found.append(Violation("MixedDirections", " \\/ ".join(map(str, heads)), join_path(path)))

    walk(f, frozenset(), ())
    return found


def size(f) -> int:
    if isinstance(f, Rec):
        return 1 + size(f.body)
    if isinstance(f, Prefix):
        return 1 + size(f.cont)
    if isinstance(f, Choice):
        return sum(size(b) for b in f.branches)
    return 1


def actions(f) -> set:
    if isinstance(f, Rec):
        return actions(f.body)
    if isinstance(f, Prefix):
        return {f.action} | actions(f.cont)
    if isinstance(f, Choice):
        return set().union(*(actions(b) for b in f.branches))
    return set()


def names(f) -> set:
    return {m.name for m in actions(f)}
