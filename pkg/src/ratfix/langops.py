"""Language-level algebra: determinization, language equivalence, word oracles.

Nondeterministic behaviours are sent to formal languages by the subset
construction; on deterministic automata bisimilarity coincides with language
equality, which makes :func:`language_equiv` a one-liner over the
bisimulation engine.  The brute-force enumerators exist as independent
oracles for the closure demos.
"""
from __future__ import annotations

from collections import deque
from functools import lru_cache

from . import behaviors, bisim
from .behaviors import DfaObs, FiniteCoalgebra, PointedCoalgebra, dfa_kind
from .errors import InputError


def nda_to_dfa(p: PointedCoalgebra) -> PointedCoalgebra:
    """Subset construction from the root; subsets numbered by discovery order."""
    if p.system.kind.functor != behaviors.NDA:
        raise InputError("nda_to_dfa needs an nda system")
    c = p.system
    alphabet = c.kind.alphabet
    start = frozenset([p.root])
    index = {start: 0}
    order = [start]
    obs: list[DfaObs] = []
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        nxt = {}
        for a in alphabet:
            target = frozenset(t for s in subset for t in c.obs[s].succ.get(a, frozenset()))
            if target not in index:
                index[target] = len(order)
                order.append(target)
                queue.append(target)
            nxt[a] = index[target]
        obs.append(DfaObs(any(c.obs[s].accept for s in subset), nxt))
    # the empty subset, when reached, is the rejecting sink that keeps next total
    names = tuple(
        "{" + ",".join(c.name_of(s) for s in sorted(subset)) + "}" for subset in order
    )
    return PointedCoalgebra(FiniteCoalgebra(dfa_kind(alphabet), names, tuple(obs)), 0)


def language_equiv(p: PointedCoalgebra, q: PointedCoalgebra) -> bool:
    """Language equality of two pointed dfas, decided via bisimilarity."""
    for x in (p, q):
        if x.system.kind.functor != behaviors.DFA:
            raise InputError("language_equiv compares dfa systems")
    if p.system.kind.alphabet != q.system.kind.alphabet:
        raise InputError("alphabet mismatch")
    return bisim.bisimilar(p, q)


def enumerate_words(p: PointedCoalgebra, max_len: int) -> list[str]:
    """All accepted words of length at most ``max_len``, in length-lex order."""
    if p.system.kind.functor != behaviors.DFA:
        raise InputError("enumerate_words needs a dfa system")
    c = p.system
    alphabet = c.kind.alphabet
    accepted = []
    layer = [("", p.root)]
    for _ in range(max_len + 1):
        accepted.extend(w for w, s in layer if c.obs[s].accept)
        layer = [(w + a, c.obs[s].next[a]) for w, s in layer for a in alphabet]
    return sorted(accepted, key=lambda w: (len(w), w))


def dfa_as_nda(p: PointedCoalgebra) -> PointedCoalgebra:
    """Embed a dfa as the nda with one successor per letter (the inclusion)."""
    if p.system.kind.functor != behaviors.DFA:
        raise InputError("dfa_as_nda needs a dfa system")
    c = p.system
    obs = tuple(
        behaviors.NdaObs(ob.accept, {a: frozenset([t]) for a, t in ob.next.items()})
        for ob in c.obs
    )
    kind = behaviors.nda_kind(c.kind.alphabet)
    return PointedCoalgebra(FiniteCoalgebra(kind, c.states, obs), p.root)


def word_shuffle(w: str, v: str) -> list[str]:
    """All interleavings of ``w`` and ``v`` preserving both letter orders."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> frozenset:
        if i == len(w) and j == len(v):
            return frozenset([""])
        out = set()
        if i < len(w):
            out.update(w[i] + rest for rest in go(i + 1, j))
        if j < len(v):
            out.update(v[j] + rest for rest in go(i, j + 1))
        return frozenset(out)

    return sorted(go(0, 0), key=lambda x: (len(x), x))


def set_shuffle(l1, l2, max_len: int) -> list[str]:
    """Pointwise extension of word_shuffle, truncated at ``max_len``."""
    out = set()
    for w in l1:
        for v in l2:
            if len(w) + len(v) <= max_len:
                out.update(word_shuffle(w, v))
    return sorted(out, key=lambda x: (len(x), x))
