"""Finite coalgebras for the five behaviour types.

A system is a finite indexed state set together with one observation per
state.  The observation shape depends on the behaviour kind:

* ``stream``: one rational output and one successor,
* ``dfa``: an accept bit and one successor per letter,
* ``lts``: a finite set of labelled edges,
* ``nda``: an accept bit and a finite successor set per letter,
* ``wts``: per letter, a finite-support map from successors to non-unit
  monoid weights.

States are dense integer ids; names exist only for I/O.  All values are
immutable after construction.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import InputError
from .values import INF, MonoidSpec, Weight, get_monoid, parse_scalar, show_scalar, show_weight

STREAM = "stream"
DFA = "dfa"
LTS = "lts"
NDA = "nda"
WTS = "wts"

KINDS = (STREAM, DFA, LTS, NDA, WTS)
LABELLED_KINDS = (DFA, LTS, NDA, WTS)


@dataclass(frozen=True)
class Kind:
    """Behaviour functor: kind tag plus alphabet and, for wts, the weight monoid."""

    functor: str
    alphabet: tuple[str, ...] = ()
    monoid: Optional[MonoidSpec] = None

    def __post_init__(self):
        if self.functor not in KINDS:
            raise InputError(f"unknown behaviour kind {self.functor!r}")
        if self.functor in LABELLED_KINDS:
            if not self.alphabet:
                raise InputError(f"{self.functor} needs a nonempty alphabet")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise InputError("alphabet has duplicate labels")
        elif self.alphabet:
            raise InputError("stream systems have no alphabet")
        if (self.monoid is not None) != (self.functor == WTS):
            raise InputError("a monoid is required exactly for wts systems")


def stream_kind() -> Kind:
    return Kind(STREAM)


def dfa_kind(alphabet: Sequence[str]) -> Kind:
    return Kind(DFA, tuple(alphabet))


def lts_kind(alphabet: Sequence[str]) -> Kind:
    return Kind(LTS, tuple(alphabet))


def nda_kind(alphabet: Sequence[str]) -> Kind:
    return Kind(NDA, tuple(alphabet))


def wts_kind(alphabet: Sequence[str], monoid: MonoidSpec) -> Kind:
    return Kind(WTS, tuple(alphabet), monoid)


@dataclass(frozen=True)
class StreamObs:
    out: Fraction
    next: object  # StateId, or a FlatState during synthesis


@dataclass(frozen=True)
class DfaObs:
    accept: bool
    next: Mapping[str, object]


@dataclass(frozen=True)
class LtsObs:
    edges: frozenset  # of (label, state)


@dataclass(frozen=True)
class NdaObs:
    accept: bool
    succ: Mapping[str, frozenset]


@dataclass(frozen=True)
class WtsObs:
    succ: Mapping[str, Mapping[object, Weight]]  # unit weights never stored


Observation = object

_OBS_TYPES = {STREAM: StreamObs, DFA: DfaObs, LTS: LtsObs, NDA: NdaObs, WTS: WtsObs}


@dataclass(frozen=True)
class FiniteCoalgebra:
    kind: Kind
    states: tuple[str, ...]
    obs: tuple[Observation, ...]

    def __len__(self):
        return len(self.states)

    def name_of(self, s: int) -> str:
        return self.states[s]


@dataclass(frozen=True)
class PointedCoalgebra:
    """A finite system with a chosen root state."""

    system: FiniteCoalgebra
    root: int

    def __post_init__(self):
        if not 0 <= self.root < len(self.system):
            raise InputError(f"root {self.root} out of range")


@dataclass(frozen=True)
class Violation:
    state: Optional[int]
    location: str
    message: str

    def __str__(self):
        where = f"state {self.state}, {self.location}" if self.state is not None else self.location
        return f"{where}: {self.message}"


def validate(c: FiniteCoalgebra) -> list[Violation]:
    """Return every invariant violation of ``c``; empty list means valid."""
    out: list[Violation] = []
    n = len(c.states)
    if len(set(c.states)) != n:
        out.append(Violation(None, "states", "duplicate state names"))
    if len(c.obs) != n:
        out.append(Violation(None, "obs", f"{len(c.obs)} observations for {n} states"))
        return out
    kind = c.kind
    want = _OBS_TYPES[kind.functor]

    def check_id(s, loc, t):
        if not (isinstance(t, int) and 0 <= t < n):
            out.append(Violation(s, loc, f"dangling state id {t!r}"))

    for s, ob in enumerate(c.obs):
        if not isinstance(ob, want):
            out.append(Violation(s, "obs", f"expected {want.__name__}, got {type(ob).__name__}"))
            continue
        if kind.functor == STREAM:
            if not isinstance(ob.out, Fraction):
                out.append(Violation(s, "out", f"output {ob.out!r} is not a rational"))
            check_id(s, "next", ob.next)
        elif kind.functor == DFA:
            for a in kind.alphabet:
                if a not in ob.next:
                    out.append(Violation(s, f"next({a})", "partial successor function"))
                else:
                    check_id(s, f"next({a})", ob.next[a])
            for a in ob.next:
                if a not in kind.alphabet:
                    out.append(Violation(s, f"next({a})", f"label {a!r} not in alphabet"))
        elif kind.functor == LTS:
            for a, t in ob.edges:
                if a not in kind.alphabet:
                    out.append(Violation(s, "edges", f"label {a!r} not in alphabet"))
                check_id(s, f"edge {a}", t)
        elif kind.functor == NDA:
            for a, ts in ob.succ.items():
                if a not in kind.alphabet:
                    out.append(Violation(s, f"succ({a})", f"label {a!r} not in alphabet"))
                for t in ts:
                    check_id(s, f"succ({a})", t)
        elif kind.functor == WTS:
            m = kind.monoid
            for a, wmap in ob.succ.items():
                if a not in kind.alphabet:
                    out.append(Violation(s, f"succ({a})", f"label {a!r} not in alphabet"))
                for t, w in wmap.items():
                    check_id(s, f"succ({a})", t)
                    if not m.member(w):
                        out.append(Violation(s, f"succ({a})", f"weight {show_weight(w)} not in monoid {m.name}"))
                    elif w == m.unit:
                        out.append(Violation(s, f"succ({a})", "unit weight stored"))
    return out


def successors(c: FiniteCoalgebra, s: int) -> list[int]:
    """Successor ids of state ``s`` in a fixed deterministic order."""
    return obs_successors(c.kind, c.obs[s])


def obs_successors(kind: Kind, ob: Observation, key=None) -> list:
    """Successor targets of one observation, deterministically ordered.

    ``key`` orders targets that are not plain integers (synthesis passes flat
    states through here).
    """
    key = key if key is not None else (lambda t: t)
    if kind.functor == STREAM:
        return [ob.next]
    if kind.functor == DFA:
        return [ob.next[a] for a in kind.alphabet]
    if kind.functor == LTS:
        return [t for a, t in sorted(ob.edges, key=lambda e: (e[0], key(e[1])))]
    if kind.functor == NDA:
        out = []
        for a in kind.alphabet:
            out.extend(sorted(ob.succ.get(a, frozenset()), key=key))
        return out
    out = []
    for a in kind.alphabet:
        out.extend(sorted(ob.succ.get(a, {}), key=key))
    return out


def map_obs(kind: Kind, ob: Observation, f) -> Observation:
    """Re-target every successor of one observation through ``f``."""
    if kind.functor == STREAM:
        return StreamObs(ob.out, f(ob.next))
    if kind.functor == DFA:
        return DfaObs(ob.accept, {a: f(t) for a, t in ob.next.items()})
    if kind.functor == LTS:
        return LtsObs(frozenset((a, f(t)) for a, t in ob.edges))
    if kind.functor == NDA:
        return NdaObs(ob.accept, {a: frozenset(f(t) for t in ts) for a, ts in ob.succ.items()})
    # wts: merging targets aggregates weights; unit results are dropped
    m = kind.monoid
    succ = {}
    for a, wmap in ob.succ.items():
        agg: dict = {}
        for t, w in wmap.items():
            ft = f(t)
            agg[ft] = m.combine(agg[ft], w) if ft in agg else w
        agg = {t: w for t, w in agg.items() if w != m.unit}
        if agg:
            succ[a] = agg
    return WtsObs(succ)


def reachable(c: FiniteCoalgebra, s: int) -> PointedCoalgebra:
    """Restrict ``c`` to the part reachable from ``s``, in BFS discovery order."""
    if not 0 <= s < len(c):
        raise InputError(f"state {s} out of range")
    order = [s]
    index = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for t in successors(c, u):
            if t not in index:
                index[t] = len(order)
                order.append(t)
                queue.append(t)
    states = tuple(c.states[u] for u in order)
    obs = tuple(map_obs(c.kind, c.obs[u], index.__getitem__) for u in order)
    return PointedCoalgebra(FiniteCoalgebra(c.kind, states, obs), 0)


def disjoint_union(
    cs: Sequence[FiniteCoalgebra], kind: Optional[Kind] = None
) -> tuple[FiniteCoalgebra, list[int]]:
    """Concatenate systems of one kind; returns the union and the id offsets.

    ``kind`` is only needed for the empty union.  Clashing state names are
    uniquified (names are I/O only).
    """
    if not cs:
        if kind is None:
            raise InputError("empty union needs an explicit kind")
        return FiniteCoalgebra(kind, (), ()), []
    kind = cs[0].kind
    for c in cs[1:]:
        if c.kind != kind:
            raise InputError(f"kind mismatch in union: {c.kind} vs {kind}")
    offsets = []
    states: list[str] = []
    obs: list[Observation] = []
    used = set()
    for c in cs:
        off = len(states)
        offsets.append(off)
        for name in c.states:
            fresh = name
            k = 1
            while fresh in used:
                fresh = f"{name}_{k}"
                k += 1
            used.add(fresh)
            states.append(fresh)
        obs.extend(map_obs(kind, ob, lambda t: t + off) for ob in c.obs)
    return FiniteCoalgebra(kind, tuple(states), tuple(obs)), offsets


# ---------------------------------------------------------------------------
# JSON system format


def system_to_json(c: FiniteCoalgebra, root: Optional[int] = None) -> dict:
    doc: dict = {"kind": c.kind.functor}
    if c.kind.functor in LABELLED_KINDS:
        doc["alphabet"] = list(c.kind.alphabet)
    if c.kind.functor == WTS:
        doc["monoid"] = c.kind.monoid.name
    doc["states"] = list(c.states)
    entries = []
    name = c.name_of
    for ob in c.obs:
        if c.kind.functor == STREAM:
            entries.append({"out": show_scalar(ob.out), "next": name(ob.next)})
        elif c.kind.functor == DFA:
            entries.append({"accept": ob.accept, "next": {a: name(t) for a, t in sorted(ob.next.items())}})
        elif c.kind.functor == LTS:
            entries.append(sorted([a, name(t)] for a, t in ob.edges))
        elif c.kind.functor == NDA:
            entries.append(
                {"accept": ob.accept, "succ": {a: sorted(name(t) for t in ts) for a, ts in sorted(ob.succ.items()) if ts}}
            )
        else:
            entries.append(
                {a: {name(t): show_weight(w) for t, w in sorted(wmap.items())} for a, wmap in sorted(ob.succ.items()) if wmap}
            )
    doc["obs"] = entries
    if root is not None:
        doc["root"] = c.name_of(root)
    return doc


def system_from_json(doc: dict) -> tuple[FiniteCoalgebra, Optional[int]]:
    if not isinstance(doc, dict):
        raise InputError("system document must be a JSON object")
    functor = doc.get("kind")
    if functor not in KINDS:
        raise InputError(f"unknown or missing kind {functor!r}")
    if functor in LABELLED_KINDS:
        alphabet = doc.get("alphabet")
        if not isinstance(alphabet, list) or not all(isinstance(a, str) for a in alphabet):
            raise InputError("missing or malformed alphabet")
    else:
        alphabet = []
    monoid = get_monoid(doc["monoid"]) if functor == WTS else None
    if functor == WTS and "monoid" not in doc:
        raise InputError("wts system needs a monoid")
    kind = Kind(functor, tuple(alphabet), monoid)

    states = doc.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise InputError("missing or malformed state list")
    index = {nm: i for i, nm in enumerate(states)}
    if len(index) != len(states):
        raise InputError("duplicate state names")

    def resolve(nm):
        if nm not in index:
            raise InputError(f"unknown state name {nm!r}")
        return index[nm]

    entries = doc.get("obs")
    if not isinstance(entries, list) or len(entries) != len(states):
        raise InputError("obs must list one entry per state")
    obs = []
    for entry in entries:
        try:
            if functor == STREAM:
                obs.append(StreamObs(parse_scalar(entry["out"]), resolve(entry["next"])))
            elif functor == DFA:
                obs.append(DfaObs(bool(entry["accept"]), {a: resolve(t) for a, t in entry["next"].items()}))
            elif functor == LTS:
                obs.append(LtsObs(frozenset((a, resolve(t)) for a, t in entry)))
            elif functor == NDA:
                obs.append(
                    NdaObs(bool(entry["accept"]), {a: frozenset(resolve(t) for t in ts) for a, ts in entry.get("succ", {}).items()})
                )
            else:
                obs.append(WtsObs({a: {resolve(t): monoid.parse(w) for t, w in wmap.items()} for a, wmap in entry.items()}))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed observation entry {entry!r}: {exc}") from exc
    system = FiniteCoalgebra(kind, tuple(states), tuple(obs))
    problems = validate(system)
    if problems:
        raise InputError("; ".join(str(p) for p in problems))
    root = resolve(doc["root"]) if "root" in doc else None
    return system, root


# ---------------------------------------------------------------------------
# DOT export


def to_dot(c: FiniteCoalgebra, root: Optional[int] = None) -> str:
    lines = ["digraph system {"]
    for s, name in enumerate(c.states):
        ob = c.obs[s]
        attrs = []
        if c.kind.functor == STREAM:
            attrs.append(f'label="{name}:{show_scalar(ob.out)}"')
        elif c.kind.functor in (DFA, NDA):
            attrs.append(f'label="{name}"')
            if ob.accept:
                attrs.append("shape=doublecircle")
        else:
            attrs.append(f'label="{name}"')
        if root == s:
            attrs.append("penwidth=2")
        lines.append(f'  n{s} [{", ".join(attrs)}];')
    for s, ob in enumerate(c.obs):
        if c.kind.functor == STREAM:
            lines.append(f"  n{s} -> n{ob.next};")
        elif c.kind.functor == DFA:
            for a in c.kind.alphabet:
                lines.append(f'  n{s} -> n{ob.next[a]} [label="{a}"];')
        elif c.kind.functor == LTS:
            for a, t in sorted(ob.edges):
                lines.append(f'  n{s} -> n{t} [label="{a}"];')
        elif c.kind.functor == NDA:
            for a, ts in sorted(ob.succ.items()):
                for t in sorted(ts):
                    lines.append(f'  n{s} -> n{t} [label="{a}"];')
        else:
            for a, wmap in sorted(ob.succ.items()):
                for t, w in sorted(wmap.items()):
                    lines.append(f'  n{s} -> n{t} [label="{a},{show_weight(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
