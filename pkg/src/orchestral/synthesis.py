"""The orchestrator inference system and the synthesis algorithm built on it.

Synthesis returns an :class:`OrchFamily`, a DAG whose nodes mirror the cases
of the algorithm (unions of alternatives, products over the branches of a
choice, recursion wrappers). Members are addressed by index, so the family
can be counted exactly and enumerated lazily even when it is huge.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import combinations

from . import contracts as C
from . import orchestrators as O
from .graphs import ResourceLimit
from .orchestrators import ActionKind, Prefix
from .parser import render
from .syntax import Rec, Var

__all__ = ["Env", "Judgment", "IllFormedJudgment", "Derivation", "verify_judgment",
           "OrchFamily", "Leaf", "Empty", "RecWrap", "Union", "Product", "PartitionChoice",
           "SynthStats", "synth", "enumerate_family", "find_witness", "DEFAULT_ENUM_CAP"]

DEFAULT_ENUM_CAP = 100_000


class IllFormedJudgment(ValueError):
    pass


@dataclass(frozen=True)
class Env:
    """Ordered assumptions ``x : client -| server``."""

    bindings: tuple = ()

    def __post_init__(self):
        vs = [x for x, _ in self.bindings]
        pairs = [p for _, p in self.bindings]
        if len(set(vs)) != len(vs) or len(set(pairs)) != len(pairs):
            raise IllFormedJudgment("environment is not injective")

    @classmethod
    def of(cls, *bindings):
        return cls(tuple((x, (C.state(r), C.state(s))) for x, (r, s) in bindings))

    def lookup(self, x):
        for y, p in self.bindings:
            if y == x:
                return p
        return None

    def var_for(self, pair):
        for x, p in self.bindings:
            if p == pair:
                return x
        return None

    def extend(self, x, pair):
        return Env(self.bindings + ((x, pair),))

    def __len__(self):
        return len(self.bindings)


@dataclass(frozen=True)
class Judgment:
    env: Env
    orch: object
    client: object
    server: object


@dataclass
class Derivation:
    ok: bool
    rules: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.ok


def _fresh(env, avoid):
    taken = {x for x, _ in env.bindings} | set(avoid)
    i = len(env) + 1
    while f"X{i}" in taken:
        i += 1
    return f"X{i}"


def _all_vars(f):
    # bound and free, so a renamed variable cannot be captured by an inner binder
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, Rec):
        return {f.var} | _all_vars(f.body)
    if isinstance(f, Prefix):
        return _all_vars(f.cont)
    if isinstance(f, O.Choice):
        return set().union(*map(_all_vars, f.branches))
    return set()


def _branches_by_name(t):
    return dict(t.branches)


def verify_judgment(j: Judgment) -> Derivation:
    """Decide derivability by syntax-directed rule search; ``rules`` lists applied rules in pre-order."""
    env = j.env
    if not isinstance(env, Env):
        env = Env(tuple(env))
    free = O.free_vars(j.orch)
    missing = free - {x for x, _ in env.bindings}
    if missing:
        raise IllFormedJudgment(f"free variables outside the environment: {', '.join(sorted(missing))}")
    rules = []
    why = []
    ok = _derive(env, j.orch, C.state(j.client), C.state(j.server), rules, why)
    return Derivation(ok, rules if ok else [], why[0] if why and not ok else "")


def _fail(why, msg):
    why.append(msg)
    return False


def _derive(env, f, rho, sigma, rules, why):
    rho, sigma = C.state(rho), C.state(sigma)
    pair = (rho, sigma)
    if isinstance(f, Var):
        if env.lookup(f.name) == pair:
            rules.append("Hyp")
            return True
        return _fail(why, f"Hyp: {f.name} is not assumed for {render(rho)} -| {render(sigma)}")
    if isinstance(f, O.Stop):
        if rho == C.SUCCESS:
            rules.append("Ax")
            return True
        return _fail(why, f"Ax: client {render(rho)} is not 1")
    if env.var_for(pair) is not None:
        # any other rule would bind the same pair twice
        return _fail(why, f"{render(rho)} -| {render(sigma)} is already assumed; only Hyp or Ax apply")
    if isinstance(f, Rec):
        x, body = f.var, f.body
        if env.lookup(x) is not None:
            new = _fresh(env, _all_vars(body))
            body, x = O.substitute(body, x, Var(new)), new
    else:
        x, body = _fresh(env, _all_vars(f)), f
    inner = env.extend(x, pair)
    branches = body.branches if isinstance(body, O.Choice) else (body,)
    if not all(isinstance(b, Prefix) for b in branches):
        return _fail(why, f"no rule for {render(f)}")
    kinds = {b.action.kind for b in branches}
    cl, sv = type(rho), type(sigma)
    ext, intl = C.ExternalChoice, C.InternalChoice

    if len(branches) == 1 and kinds <= {ActionKind.OUT_C, ActionKind.OUT_S}:
        m, cont = branches[0].action, branches[0].cont
        if m.kind is ActionKind.OUT_C:
            if cl is not ext or m.name not in _branches_by_name(rho):
                return _fail(why, f"SumL: client {render(rho)} does not accept {m.name}")
            rules.append("SumL")
            return _derive(inner, cont, _branches_by_name(rho)[m.name], sigma, rules, why)
        if sv is not ext or m.name not in _branches_by_name(sigma):
            return _fail(why, f"SumR: server {render(sigma)} does not accept {m.name}")
        rules.append("SumR")
        return _derive(inner, cont, rho, _branches_by_name(sigma)[m.name], rules, why)

    heads = [(b.action.kind, b.action.name) for b in branches]
    if len(set(heads)) != len(heads):
        return _fail(why, "repeated branch action")

    if kinds <= {ActionKind.IN_C, ActionKind.SYNC_L} and cl is intl:
        out_names = _branches_by_name(rho)
        hs = {a for k, a in heads if k is ActionKind.IN_C}
        ks = {a for k, a in heads if k is ActionKind.SYNC_L}
        if hs | ks != set(out_names):
            return _fail(why, "client outputs are not covered exactly")
        if sv is intl and not ks:
            rule = "OplusOplus-B"
        elif sv is ext and ks <= set(_branches_by_name(sigma)):
            rule = "OplusSum"
        else:
            return _fail(why, f"no rule for {render(f)} against {render(rho)} -| {render(sigma)}")
        rules.append(rule)
        for b in branches:
            a = b.action.name
            if b.action.kind is ActionKind.IN_C:
                ok = _derive(inner, b.cont, out_names[a], sigma, rules, why)
            else:
                ok = _derive(inner, b.cont, out_names[a], _branches_by_name(sigma)[a], rules, why)
            if not ok:
                return False
        return True

    if kinds <= {ActionKind.IN_S, ActionKind.SYNC_R} and sv is intl:
        out_names = _branches_by_name(sigma)
        hs = {a for k, a in heads if k is ActionKind.IN_S}
        ks = {a for k, a in heads if k is ActionKind.SYNC_R}
        if hs | ks != set(out_names):
            return _fail(why, "server outputs are not covered exactly")
        if cl is intl and not ks:
            rule = "OplusOplus-A"
        elif cl is ext and ks <= set(_branches_by_name(rho)):
            rule = "SumOplus"
        else:
            return _fail(why, f"no rule for {render(f)} against {render(rho)} -| {render(sigma)}")
        rules.append(rule)
        for b in branches:
            a = b.action.name
            if b.action.kind is ActionKind.IN_S:
                ok = _derive(inner, b.cont, rho, out_names[a], rules, why)
            else:
                ok = _derive(inner, b.cont, _branches_by_name(rho)[a], out_names[a], rules, why)
            if not ok:
                return False
        return True

    return _fail(why, f"no rule for {render(f)} against {render(rho)} -| {render(sigma)}")


# families


class OrchFamily:
    """A finite set of orchestrators.

    ``members()`` is lazy and never looks at more of the DAG than it yields;
    ``count()`` and ``member(i)`` expand the whole family below this node.
    Both orders agree: ``member(i)`` is the i-th item ``members()`` yields.
    """

    _count = None
    _nonempty = None

    def count(self) -> int:
        if self._count is None:
            self._count = self._compute_count()
        return self._count

    def nonempty(self) -> bool:
        if self._nonempty is None:
            self._nonempty = self._compute_nonempty()
        return self._nonempty

    def __len__(self):
        return self.count()

    def __iter__(self):
        return self.members()


class Empty(OrchFamily):
    def _compute_count(self):
        return 0

    def _compute_nonempty(self):
        return False

    def member(self, i):
        raise IndexError(i)

    def members(self):
        return iter(())


class Leaf(OrchFamily):
    def __init__(self, term):
        self.term = term

    def _compute_count(self):
        return 1

    def _compute_nonempty(self):
        return True

    def member(self, i):
        if i != 0:
            raise IndexError(i)
        return self.term

    def members(self):
        yield self.term


class RecWrap(OrchFamily):
    """``rec var . m`` for each member ``m``; the binder is dropped when ``var`` is unused."""

    def __init__(self, var, child):
        self.var = var
        self.child = child

    def _wrap(self, body):
        return Rec(self.var, body) if self.var in O.free_vars(body) else body

    def _compute_count(self):
        return self.child.count()

    def _compute_nonempty(self):
        return self.child.nonempty()

    def member(self, i):
        return self._wrap(self.child.member(i))

    def members(self):
        for body in self.child.members():
            yield self._wrap(body)


class Union(OrchFamily):
    def __init__(self, children):
        self.children = list(children)

    def _compute_count(self):
        return sum(c.count() for c in self.children)

    def _compute_nonempty(self):
        return any(c.nonempty() for c in self.children)

    def member(self, i):
        for c in self.children:
            n = c.count()
            if i < n:
                return c.member(i)
            i -= n
        raise IndexError(i)

    def members(self):
        for c in self.children:
            if c.nonempty():
                yield from c.members()


class Product(OrchFamily):
    """Choice of ``action.m_k`` over all branches, one member per branch family."""

    def __init__(self, parts):
        self.parts = list(parts)

    def _compute_count(self):
        n = 1
        for _, fam in self.parts:
            n *= fam.count()
        return n

    def _compute_nonempty(self):
        return all(fam.nonempty() for _, fam in self.parts)

    def member(self, i):
        if not 0 <= i < self.count():
            raise IndexError(i)
        picks = []
        for m, fam in reversed(self.parts):
            i, r = divmod(i, fam.count())
            picks.append(Prefix(m, fam.member(r)))
        picks.reverse()
        return O.choice(*picks)

    def members(self):
        if not self.nonempty():
            return

        def rest(k):
            if k == len(self.parts):
                yield ()
                return
            m, fam = self.parts[k]
            for sub in fam.members():
                for tail in rest(k + 1):
                    yield (Prefix(m, sub),) + tail

        for picks in rest(0):
            yield O.choice(*picks)


class PartitionChoice(Union):
    """Alternatives indexed by a split of the branch names into buffered (H) and synchronised (K)."""

    def __init__(self, splits):
        self.splits = [(h, k) for h, k, _ in splits]
        super().__init__([p for _, _, p in splits])


class _Lazy(OrchFamily):
    """A synthesis call whose alternatives are only built when first needed."""

    def __init__(self, build):
        self._build = build
        self._fam = None

    @property
    def fam(self):
        if self._fam is None:
            self._fam = self._build()
            self._build = None
        return self._fam

    def _compute_count(self):
        return self.fam.count()

    def _compute_nonempty(self):
        return self.fam.nonempty()

    def member(self, i):
        return self.fam.member(i)

    def members(self):
        return self.fam.members()


@dataclass
class SynthStats:
    """``pairs`` are the (client, server) states synthesis was called on; ``bound`` caps them."""

    calls: int = 0
    pairs: set = field(default_factory=set)
    max_env: int = 0
    bound: int = 0


class _Run:
    # Pairs of states are interned to small integers and assumption sets are
    # bitmasks over them. The family for (assumptions, pair) only depends on
    # the assumed pairs that the pair can still reach, and each pair keeps one
    # variable name for the whole run, so calls are memoised on
    # (assumptions & reach(pair), pair).

    def __init__(self, env, stats):
        self.stats = stats
        self.ids = {}
        self.pairs = []
        self.plans = []
        self.names = {}
        self.reach = {}
        self.memo = {}
        for x, p in env.bindings:
            self.names[self.pid(p)] = x

    def pid(self, pair):
        i = self.ids.get(pair)
        if i is None:
            i = self.ids[pair] = len(self.pairs)
            self.pairs.append(pair)
            self.plans.append(None)
        return i

    def var(self, i):
        x = self.names.get(i)
        if x is None:
            taken = set(self.names.values())
            n = len(self.names) + 1
            while f"X{n}" in taken:
                n += 1
            x = self.names[i] = f"X{n}"
        return x

    def plan(self, i):
        """``(splits, alternatives)``: each alternative is a list of (action, pair id)."""
        p = self.plans[i]
        if p is None:
            p = self.plans[i] = self._plan(*self.pairs[i])
        return p

    def _plan(self, rho, sigma):
        ext, intl = C.ExternalChoice, C.InternalChoice
        pid = lambda r, s: self.pid((C.state(r), C.state(s)))
        left = [[(O.out_c(a), pid(r, sigma))] for a, r in getattr(rho, "branches", ())]
        right = [[(O.out_s(a), pid(rho, s))] for a, s in getattr(sigma, "branches", ())]
        if isinstance(rho, ext) and isinstance(sigma, ext):
            return None, left + right
        if isinstance(rho, intl) and isinstance(sigma, intl):
            # absorbing server outputs first: unread server messages may stay
            # buffered, unread client messages may not
            fan_s = [(O.in_s(a), pid(rho, s)) for a, s in sigma.branches]
            fan_c = [(O.in_c(a), pid(r, sigma)) for a, r in rho.branches]
            return None, [fan_s, fan_c]
        if isinstance(rho, intl) and isinstance(sigma, ext):
            srv = dict(sigma.branches)
            splits = []
            for ks in _splits([a for a, _ in rho.branches], srv):
                parts = [(O.sync_l(a), pid(r, srv[a])) if a in ks else (O.in_c(a), pid(r, sigma))
                         for a, r in rho.branches]
                splits.append((frozenset(a for a, _ in rho.branches) - ks, ks, parts))
            return splits, right
        if isinstance(rho, ext) and isinstance(sigma, intl):
            cli = dict(rho.branches)
            splits = []
            for ks in _splits([a for a, _ in sigma.branches], cli):
                parts = [(O.sync_r(a), pid(cli[a], s)) if a in ks else (O.in_s(a), pid(rho, s))
                         for a, s in sigma.branches]
                splits.append((frozenset(a for a, _ in sigma.branches) - ks, ks, parts))
            return splits, left
        return None, []

    def reachable(self, i):
        r = self.reach.get(i)
        if r is None:
            seen = {i}
            todo = [i]
            while todo:
                v = todo.pop()
                if self.pairs[v][0] == C.SUCCESS:
                    continue
                splits, alts = self.plan(v)
                for parts in [p for _, _, p in splits or ()] + alts:
                    for _, j in parts:
                        if j not in seen:
                            seen.add(j)
                            todo.append(j)
            mask = 0
            for j in seen:
                mask |= 1 << j
            r = self.reach[i] = mask
        return r


def synth(env, client, server, stats: SynthStats | None = None) -> OrchFamily:
    """All orchestrators the algorithm produces for ``client -| server`` under ``env``."""
    if not isinstance(env, Env):
        env = Env(tuple(env))
    rho, sigma = C.state(client), C.state(server)
    stats = stats if stats is not None else SynthStats()
    stats.bound = len(C.reachable_subterms(rho)) * len(C.reachable_subterms(sigma)) + len(env)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    run = _Run(env, stats)
    gamma = 0
    for _, p in env.bindings:
        gamma |= 1 << run.pid(p)
    return _synth(run, gamma, run.pid((rho, sigma)))


def _synth(run, gamma, i):
    if gamma >> i & 1:
        return Leaf(Var(run.var(i)))
    if run.pairs[i][0] == C.SUCCESS:
        return Leaf(O.STOP)
    key = (gamma & run.reachable(i), i)
    hit = run.memo.get(key)
    if hit is None:
        hit = run.memo[key] = _Lazy(lambda: _synth_step(run, key[0], i))
    return hit


def _synth_step(run, gamma, i):
    st = run.stats
    st.calls += 1
    st.pairs.add(run.pairs[i])
    inner = gamma | 1 << i
    size = bin(inner).count("1")
    st.max_env = max(st.max_env, size)
    assert size <= st.bound, "assumption set outgrew the reachable pairs"
    x = run.var(i)
    product = lambda parts: RecWrap(x, Product([(m, _synth(run, inner, j)) for m, j in parts]))
    splits, alts = run.plan(i)
    fams = [product(parts) for parts in alts]
    if splits is not None:
        fams.insert(0, PartitionChoice([(h, k, product(parts)) for h, k, parts in splits]))
    if not fams:
        return Empty()
    return fams[0] if len(fams) == 1 else Union(fams)


def _splits(names, other):
    # K ranges over subsets of the names the other side accepts, largest first
    common = [a for a in names if a in other]
    for n in range(len(common), -1, -1):
        for ks in combinations(common, n):
            yield frozenset(ks)


def enumerate_family(fam: OrchFamily, max_members=None, enum_cap=DEFAULT_ENUM_CAP) -> list:
    """Distinct members, smallest first (size, then rendering), among the first ``enum_cap``."""
    seen = {}
    for i, f in enumerate(fam.members()):
        if i >= enum_cap:
            break
        seen.setdefault(O.canon(f), None)
    out = sorted(seen, key=lambda f: (O.size(f), render(f)))
    return out if max_members is None else out[:max_members]


@dataclass
class WitnessSearch:
    witness: object
    examined: int
    family_size: int | None     # known only when the family was exhausted


def find_witness(client, server, enum_cap=DEFAULT_ENUM_CAP, node_cap=None) -> WitnessSearch:
    """First synthesised orchestrator that is strict and respectful; ``witness`` is None if none is.

    Raises :class:`ResourceLimit` when the family is larger than ``enum_cap``
    and no witness was found among the members examined.
    """
    from .respectfulness import is_respectful
    from .system import DEFAULT_NODE_CAP, is_strict

    fam = synth(Env(), client, server)
    cap = node_cap or DEFAULT_NODE_CAP
    examined = 0
    for f in fam.members():
        if examined >= enum_cap:
            raise ResourceLimit(f"no qualifying orchestrator among the first {enum_cap} members")
        examined += 1
        if is_respectful(f).respectful and is_strict(client, f, server, node_cap=cap).strict:
            return WitnessSearch(f, examined, None)
    return WitnessSearch(None, examined, examined)
