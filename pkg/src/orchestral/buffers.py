"""Per-name bidirectional buffers and the classification of action sequences.

``cs`` counts messages a client sent that still wait for the server, ``sc``
the converse. Counters are signed so that an unsound delivery from an empty
buffer shows up as a negative value instead of being impossible to express.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import Lasso
from .orchestrators import ActionKind, OrchAction

__all__ = ["Buffer", "EMPTY", "delta", "apply_action", "run_sequence", "left_restrict",
           "Witness", "SequenceVerdict", "classify"]

_DELTA = {
    ActionKind.IN_C: (1, 0),
    ActionKind.OUT_S: (-1, 0),
    ActionKind.IN_S: (0, 1),
    ActionKind.OUT_C: (0, -1),
    ActionKind.SYNC_L: (0, 0),
    ActionKind.SYNC_R: (0, 0),
}


def delta(m: OrchAction):
    """``(dcs, dsc)`` for ``m`` on its own name."""
    return _DELTA[m.kind]


@dataclass(frozen=True)
class Buffer:
    """Immutable map name -> (cs, sc); only nonzero entries are stored."""

    entries: tuple = ()

    @classmethod
    def of(cls, mapping):
        return cls(tuple(sorted((a, tuple(v)) for a, v in dict(mapping).items() if tuple(v) != (0, 0))))

    def __getitem__(self, a):
        for name, v in self.entries:
            if name == a:
                return v
        return (0, 0)

    def cs(self, a):
        return self[a][0]

    def sc(self, a):
        return self[a][1]

    def names(self):
        return [a for a, _ in self.entries]

    def is_empty(self):
        return not self.entries

    def to_json(self):
        return {a: {"cs": cs, "sc": sc} for a, (cs, sc) in self.entries}

    @classmethod
    def from_json(cls, obj):
        return cls.of({a: (v.get("cs", 0), v.get("sc", 0)) for a, v in obj.items()})

    def __str__(self):
        if not self.entries:
            return "{}"
        parts = []
        for a, (cs, sc) in self.entries:
            if cs:
                parts.append(f"cs_{a}={cs}")
            if sc:
                parts.append(f"sc_{a}={sc}")
        return "{" + ", ".join(parts) + "}"


EMPTY = Buffer()


def apply_action(b: Buffer, m: OrchAction) -> Buffer:
    dcs, dsc = delta(m)
    if not (dcs or dsc):
        return b
    cs, sc = b[m.name]
    counts = dict(b.entries)
    counts[m.name] = (cs + dcs, sc + dsc)
    return Buffer.of(counts)


def run_sequence(b: Buffer, seq):
    """Fold ``apply_action``; also return the least value every counter reaches."""
    minima = {a: v for a, v in b.entries}
    for m in seq:
        b = apply_action(b, m)
        lo = minima.get(m.name, (0, 0))
        now = b[m.name]
        minima[m.name] = (min(lo[0], now[0]), min(lo[1], now[1]))
    return b, minima


def _keeps(m, a):
    return m.name == a and m.kind in (ActionKind.IN_C, ActionKind.OUT_S)


def left_restrict(seq, a):
    """Keep only ``<a,_>`` and ``<_,!a>``; a lasso whose cycle vanishes becomes finite."""
    if isinstance(seq, Lasso):
        pre = tuple(m for m in seq.prefix if _keeps(m, a))
        cyc = tuple(m for m in seq.cycle if _keeps(m, a))
        return Lasso(pre, cyc) if cyc else pre
    return tuple(m for m in seq if _keeps(m, a))


@dataclass(frozen=True)
class Witness:
    """Why a flag failed: the offending name (if any) and where."""

    name: str
    detail: str

    def __str__(self):
        return f"{self.name}: {self.detail}" if self.name else self.detail


@dataclass(frozen=True)
class SequenceVerdict:
    sound: bool
    client_respectful: bool
    non_def_server_inputted: bool
    witnesses: dict = field(default_factory=dict, compare=False)

    @property
    def respectful(self):
        return self.sound and self.client_respectful and self.non_def_server_inputted


def _first_negative(seq):
    b = EMPTY
    for i, m in enumerate(seq):
        b = apply_action(b, m)
        cs, sc = b[m.name]
        if cs < 0:
            return Witness(m.name, f"cs goes to {cs} at position {i}")
        if sc < 0:
            return Witness(m.name, f"sc goes to {sc} at position {i}")
    return None


def _net(seq):
    total = {}
    for m in seq:
        dcs, dsc = delta(m)
        cs, sc = total.get(m.name, (0, 0))
        total[m.name] = (cs + dcs, sc + dsc)
    return total


def classify(seq) -> SequenceVerdict:
    witnesses = {}
    if isinstance(seq, Lasso):
        once = seq.prefix + seq.cycle
        head, cycle = seq.prefix, seq.cycle
    else:
        once = tuple(seq)
        head, cycle = once, ()

    # soundness: with a nonnegative net cycle weight the first pass round the
    # cycle is the lowest, so one unrolling decides every prefix
    neg = _first_negative(once)
    if neg is None:
        for a, (cs, sc) in sorted(_net(cycle).items()):
            if cs < 0 or sc < 0:
                side = "cs" if cs < 0 else "sc"
                neg = Witness(a, f"cycle drains {side} by {-min(cs, sc)} per round")
                break
    if neg is not None:
        witnesses["sound"] = neg

    final, _ = run_sequence(EMPTY, head)
    for a in sorted({m.name for m in once}):
        in_cycle = [m.kind for m in cycle if _keeps(m, a)]
        if in_cycle:
            if ActionKind.OUT_S not in in_cycle:
                witnesses["client_respectful"] = Witness(a, f"eventually only <{a},_> on the left")
                break
        elif final.cs(a) != 0:
            witnesses["client_respectful"] = Witness(a, f"cs ends at {final.cs(a)}")
            break

    if cycle and all(m.kind is ActionKind.IN_S for m in cycle):
        witnesses["non_def_server_inputted"] = Witness("", "cycle of server inputs only: "
                                                       + ".".join(map(str, cycle)))
    return SequenceVerdict("sound" not in witnesses, "client_respectful" not in witnesses,
                           "non_def_server_inputted" not in witnesses, witnesses)
