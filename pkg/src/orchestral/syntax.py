"""Pieces shared by contract and orchestrator terms: variables, binders, tau."""
from __future__ import annotations

from dataclasses import dataclass, fields

_VAR_LETTERS = "XYZWVUTS"


def cached_hash(self):
    # Terms are immutable and deeply nested; hashing them repeatedly is the
    # dominant cost of every state-space exploration, so the hash is memoised.
    try:
        return self.__dict__["_hash"]
    except KeyError:
        h = hash((type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self)))
        object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Var:
    name: str

    __hash__ = cached_hash

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Rec:
    var: str
    body: object

    __hash__ = cached_hash

    def __str__(self):
        from .parser import render
        return render(self)


class _Tau:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "tau"

    __str__ = __repr__

    def __reduce__(self):
        return (_Tau, ())


TAU = _Tau()


@dataclass(frozen=True)
class Violation:
    """A well-formedness failure: which clause, on what, and where."""

    kind: str
    subject: str
    path: str = ""

    def __str__(self):
        where = f" at {self.path}" if self.path else ""
        return f"{self.kind} {self.subject}{where}"


def binder_name(depth: int) -> str:
    if depth < len(_VAR_LETTERS):
        return _VAR_LETTERS[depth]
    return f"X{depth}"


def join_path(path) -> str:
    return "/".join(path) if path else "root"
