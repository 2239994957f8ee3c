"""Coarsest bisimulation by signature refinement, for all five behaviour kinds.

Two states stay in one block iff their block-abstracted one-step
observations agree; weighted signatures aggregate weights per target block
with the exact monoid operation, so weighted bisimilarity needs no
tolerance.  Kanellakis-Smolka style refinement is quadratic but generic,
which is the right trade at desk scale.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import behaviors
from .behaviors import FiniteCoalgebra, PointedCoalgebra, disjoint_union, map_obs, reachable
from .errors import InputError


@dataclass(frozen=True)
class Partition:
    """Blocks of the coarsest bisimulation; block ids dense, numbered by least member."""

    block_of: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def same(self, s: int, t: int) -> bool:
        return self.block_of[s] == self.block_of[t]


def _canonical(block_of: list[int], n: int) -> Partition:
    first_member: dict[int, int] = {}
    for s in range(n):
        first_member.setdefault(block_of[s], s)
    old_ids = sorted(first_member, key=first_member.__getitem__)
    renumber = {old: new for new, old in enumerate(old_ids)}
    assign = tuple(renumber[b] for b in block_of)
    members: list[list[int]] = [[] for _ in old_ids]
    for s, b in enumerate(assign):
        members[b].append(s)
    return Partition(assign, tuple(tuple(m) for m in members))


def _signature(c: FiniteCoalgebra, s: int, block_of):
    kind = c.kind
    ob = c.obs[s]
    if kind.functor == behaviors.STREAM:
        return (ob.out, block_of[ob.next])
    if kind.functor == behaviors.DFA:
        return (ob.accept, tuple(block_of[ob.next[a]] for a in kind.alphabet))
    if kind.functor == behaviors.LTS:
        return frozenset((a, block_of[t]) for a, t in ob.edges)
    if kind.functor == behaviors.NDA:
        return (
            ob.accept,
            tuple(frozenset(block_of[t] for t in ob.succ.get(a, frozenset())) for a in kind.alphabet),
        )
    monoid = kind.monoid
    sig = []
    for a in kind.alphabet:
        agg: dict[int, object] = {}
        for t, w in ob.succ.get(a, {}).items():
            b = block_of[t]
            agg[b] = monoid.combine(agg[b], w) if b in agg else w
        sig.append(tuple(sorted((b, w) for b, w in agg.items() if w != monoid.unit)))
    return tuple(sig)


def coarsest_bisimulation(c: FiniteCoalgebra) -> Partition:
    """Greatest-fixpoint refinement; terminates in at most ``|S|`` rounds."""
    n = len(c)
    if n == 0:
        return Partition((), ())
    block_of = [0] * n
    while True:
        sigs = [(block_of[s], _signature(c, s, block_of)) for s in range(n)]
        ids: dict = {}
        new = [0] * n
        for s in range(n):
            new[s] = ids.setdefault(sigs[s], len(ids))
        if len(ids) == len(set(block_of)):
            return _canonical(new, n)
        block_of = new


def bisimilar(p: PointedCoalgebra, q: PointedCoalgebra) -> bool:
    if p.system.kind != q.system.kind:
        raise InputError(f"kind mismatch: {p.system.kind.functor} vs {q.system.kind.functor}")
    union, offsets = disjoint_union([p.system, q.system])
    part = coarsest_bisimulation(union)
    return part.same(p.root + offsets[0], q.root + offsets[1])


def minimize(p: PointedCoalgebra) -> PointedCoalgebra:
    """Reachable restriction followed by the quotient under the coarsest bisimulation."""
    p = reachable(p.system, p.root)
    c = p.system
    part = coarsest_bisimulation(c)
    names = tuple(c.states[block[0]] for block in part.blocks)
    obs = tuple(
        map_obs(c.kind, c.obs[block[0]], lambda t: part.block_of[t]) for block in part.blocks
    )
    return PointedCoalgebra(FiniteCoalgebra(c.kind, names, obs), part.block_of[p.root])
