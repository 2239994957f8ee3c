"""Random system/spec generators and independent oracles for the test suite.

The generators build concrete DSL text (exercising the parser on every
trial) and plain finite systems.  The oracles deliberately avoid the
library's own machinery where the point is cross-checking: reachability by
naive transitive closure, language membership by direct word-walking, and
shuffles by brute-force interleaving.
"""
from __future__ import annotations

import random
from fractions import Fraction

from ratfix.behaviors import (
    DfaObs,
    FiniteCoalgebra,
    LtsObs,
    NdaObs,
    PointedCoalgebra,
    StreamObs,
    WtsObs,
    dfa_kind,
    lts_kind,
    nda_kind,
    stream_kind,
    wts_kind,
)
from ratfix.values import MIN_INF, NAT_PLUS

ALPHABET = ("a", "b")


# ---------------------------------------------------------------------------
# Random systems


def rand_stream_system(rng: random.Random, n: int) -> PointedCoalgebra:
    obs = tuple(
        StreamObs(Fraction(rng.randint(-3, 3)), rng.randrange(n)) for _ in range(n)
    )
    names = tuple(f"s{i}" for i in range(n))
    return PointedCoalgebra(FiniteCoalgebra(stream_kind(), names, obs), rng.randrange(n))


def rand_dfa_system(rng: random.Random, n: int, alphabet=ALPHABET) -> PointedCoalgebra:
    obs = tuple(
        DfaObs(rng.random() < 0.4, {a: rng.randrange(n) for a in alphabet})
        for _ in range(n)
    )
    names = tuple(f"s{i}" for i in range(n))
    return PointedCoalgebra(FiniteCoalgebra(dfa_kind(alphabet), names, obs), rng.randrange(n))


def rand_lts_system(rng: random.Random, n: int, alphabet=ALPHABET) -> PointedCoalgebra:
    obs = tuple(
        LtsObs(
            frozenset(
                (a, t) for a in alphabet for t in range(n) if rng.random() < 0.35
            )
        )
        for _ in range(n)
    )
    names = tuple(f"s{i}" for i in range(n))
    return PointedCoalgebra(FiniteCoalgebra(lts_kind(alphabet), names, obs), rng.randrange(n))


def rand_nda_system(rng: random.Random, n: int, alphabet=ALPHABET) -> PointedCoalgebra:
    obs = []
    for _ in range(n):
        succ = {}
        for a in alphabet:
            targets = frozenset(t for t in range(n) if rng.random() < 0.35)
            if targets:
                succ[a] = targets
        obs.append(NdaObs(rng.random() < 0.4, succ))
    names = tuple(f"s{i}" for i in range(n))
    return PointedCoalgebra(FiniteCoalgebra(nda_kind(alphabet), names, tuple(obs)), rng.randrange(n))


def rand_wts_system(rng: random.Random, n: int, alphabet=ALPHABET, monoid=NAT_PLUS) -> PointedCoalgebra:
    def weight():
        return Fraction(rng.randint(1, 4))

    obs = []
    for _ in range(n):
        succ = {}
        for a in alphabet:
            targets = {t: weight() for t in range(n) if rng.random() < 0.3}
            if targets:
                succ[a] = targets
        obs.append(WtsObs(succ))
    names = tuple(f"s{i}" for i in range(n))
    return PointedCoalgebra(
        FiniteCoalgebra(wts_kind(alphabet, monoid), names, tuple(obs)), rng.randrange(n)
    )


SYSTEM_GENERATORS = {
    "stream": rand_stream_system,
    "dfa": rand_dfa_system,
    "lts": rand_lts_system,
    "nda": rand_nda_system,
    "wts": rand_wts_system,
}


# ---------------------------------------------------------------------------
# Random bipointed specs (as DSL text)


def _sig(rng: random.Random) -> list[tuple[str, int]]:
    k = rng.randint(1, 2)
    return [(f"f{i}", rng.randint(1, 2)) for i in range(k)]


def _flat_target(rng: random.Random, ops, pool) -> str:
    if rng.random() < 0.5:
        return rng.choice(pool)
    g, arity = rng.choice(ops)
    return f"{g}({', '.join(rng.choice(pool) for _ in range(arity))})"


def rand_stream_spec(rng: random.Random) -> str:
    ops = _sig(rng)
    lines = ["behavior stream"]
    lines += [f"op {name}/{arity}" for name, arity in ops]
    for name, arity in ops:
        heads = [f"x{i+1}" for i in range(arity)]
        vals = [f"r{i+1}" for i in range(arity)]
        tails = [f"y{i+1}" for i in range(arity)]
        pool = heads + tails
        n_rules = rng.randint(1, 2)
        for j in range(n_rules):
            lines.append("")
            for x, r, y in zip(heads, vals, tails):
                lines.append(f"{x} = {r} -> {y}")
            if j < n_rules - 1:
                lines.append(f"when r1 {rng.choice(['<=', '<', '='])} {rng.randint(-1, 2)}")
            elif n_rules > 1:
                lines.append("otherwise")
            lines.append("---")
            out = rng.choice(
                [f"{vals[0]} + {rng.randint(0, 3)}", f"{rng.randint(1, 3)} * {vals[-1]}", vals[0]]
            )
            lines.append(f"{name}({', '.join(heads)}) = {out} -> {_flat_target(rng, ops, pool)}")
    return "\n".join(lines) + "\n"


def _rand_lts_rules(rng: random.Random, ops, alphabet) -> list[str]:
    lines = []
    for name, arity in ops:
        heads = [f"x{i+1}" for i in range(arity)]
        for _ in range(rng.randint(1, 3)):
            lines.append("")
            pool = list(heads)
            fresh = 0
            premise_lines = []
            for i, x in enumerate(heads):
                if rng.random() < 0.7:
                    fresh += 1
                    y = f"y{fresh}"
                    premise_lines.append(f"{x} - {rng.choice(alphabet)} -> {y}")
                    pool.append(y)
                elif rng.random() < 0.3:
                    premise_lines.append(f"{x} - {rng.choice(alphabet)} -/->")
            lines += premise_lines
            lines.append("---")
            lines.append(
                f"{name}({', '.join(heads)}) - {rng.choice(alphabet)} -> {_flat_target(rng, ops, pool)}"
            )
    return lines


def rand_lts_spec(rng: random.Random, alphabet=ALPHABET) -> str:
    ops = _sig(rng)
    lines = [f"behavior lts labels {{ {', '.join(alphabet)} }}"]
    lines += [f"op {name}/{arity}" for name, arity in ops]
    lines += _rand_lts_rules(rng, ops, alphabet)
    return "\n".join(lines) + "\n"


def rand_nda_spec(rng: random.Random, alphabet=ALPHABET) -> str:
    ops = _sig(rng)
    lines = [f"behavior nda labels {{ {', '.join(alphabet)} }}"]
    lines += [f"op {name}/{arity}" for name, arity in ops]
    lines += _rand_lts_rules(rng, ops, alphabet)
    for name, arity in ops:
        heads = [f"x{i+1}" for i in range(arity)]
        subsets = list(range(1 << arity))
        rng.shuffle(subsets)
        for mask in subsets[: rng.randint(0, min(2, len(subsets)))]:
            refs = [str(i + 1) for i in range(arity) if mask & (1 << i)]
            lines.append("")
            lines.append(
                f"output {name}({', '.join(heads)}) final when final {{{', '.join(refs)}}}"
            )
    return "\n".join(lines) + "\n"


def rand_dfa_spec(rng: random.Random, alphabet=ALPHABET) -> str:
    ops = _sig(rng)
    lines = [f"behavior dfa labels {{ {', '.join(alphabet)} }}"]
    lines += [f"op {name}/{arity}" for name, arity in ops]
    for name, arity in ops:
        heads = [f"x{i+1}" for i in range(arity)]
        for a in alphabet:
            tails = [f"y{i+1}" for i in range(arity)]
            lines.append("")
            for x, y in zip(heads, tails):
                lines.append(f"{x} - {a} -> {y}")
            lines.append("---")
            lines.append(
                f"{name}({', '.join(heads)}) - {a} -> {_flat_target(rng, ops, heads + tails)}"
            )
        subsets = list(range(1 << arity))
        rng.shuffle(subsets)
        for mask in subsets[: rng.randint(0, min(2, len(subsets)))]:
            refs = [str(i + 1) for i in range(arity) if mask & (1 << i)]
            lines.append("")
            lines.append(
                f"output {name}({', '.join(heads)}) final when final {{{', '.join(refs)}}}"
            )
    return "\n".join(lines) + "\n"


def rand_wts_spec(rng: random.Random, alphabet=ALPHABET) -> str:
    ops = _sig(rng)
    lines = [f"behavior wts labels {{ {', '.join(alphabet)} }} monoid nat-plus"]
    lines += [f"op {name}/{arity}" for name, arity in ops]
    for name, arity in ops:
        heads = [f"x{i+1}" for i in range(arity)]
        for _ in range(rng.randint(1, 2)):
            lines.append("")
            pool = list(heads)
            wvars = []
            fresh = 0
            for x in heads:
                if rng.random() < 0.8:
                    fresh += 1
                    u, y = f"u{fresh}", f"y{fresh}"
                    lines.append(f"{x} - {rng.choice(alphabet)}, {u} -> {y}")
                    pool.append(y)
                    wvars.append(u)
            wexpr = " + ".join(wvars) if wvars else str(rng.randint(1, 3))
            lines.append("---")
            lines.append(
                f"{name}({', '.join(heads)}) - {rng.choice(alphabet)}, {wexpr} -> {_flat_target(rng, ops, pool)}"
            )
    return "\n".join(lines) + "\n"


SPEC_GENERATORS = {
    "stream": rand_stream_spec,
    "dfa": rand_dfa_spec,
    "lts": rand_lts_spec,
    "nda": rand_nda_spec,
    "wts": rand_wts_spec,
}


def rand_lasso(rng: random.Random, max_len: int = 4):
    from ratfix.streams import Lasso

    prefix = tuple(Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(0, max_len)))
    cycle = tuple(Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(1, max_len)))
    return Lasso(prefix, cycle)


# ---------------------------------------------------------------------------
# Independent oracles


def naive_reachable_count(p: PointedCoalgebra) -> int:
    """Reachable-state count by naive fixpoint over raw observations."""
    kind = p.system.kind.functor
    succ = []
    for ob in p.system.obs:
        if kind == "stream":
            succ.append({ob.next})
        elif kind == "dfa":
            succ.append(set(ob.next.values()))
        elif kind == "lts":
            succ.append({t for _, t in ob.edges})
        elif kind == "nda":
            succ.append({t for ts in ob.succ.values() for t in ts})
        else:
            succ.append({t for m in ob.succ.values() for t in m})
    seen = {p.root}
    while True:
        grown = set(seen)
        for s in seen:
            grown |= succ[s]
        if grown == seen:
            return len(seen)
        seen = grown


def stream_unfold(p: PointedCoalgebra, n: int) -> list[Fraction]:
    """First n outputs of a stream system, by direct walking."""
    out = []
    s = p.root
    for _ in range(n):
        ob = p.system.obs[s]
        out.append(ob.out)
        s = ob.next
    return out


def pointwise_zip(xs, ys, n):
    out = []
    for i in range(n):
        out.append(xs[i // 2] if i % 2 == 0 else ys[i // 2])
    return out


def nda_accepts(p: PointedCoalgebra, word: str) -> bool:
    """Direct nondeterministic search, no subset construction."""
    current = {p.root}
    for ch in word:
        current = {t for s in current for t in p.system.obs[s].succ.get(ch, frozenset())}
        if not current:
            return False
    return any(p.system.obs[s].accept for s in current)


def dfa_accepts(p: PointedCoalgebra, word: str) -> bool:
    s = p.root
    for ch in word:
        s = p.system.obs[s].next[ch]
    return p.system.obs[s].accept


def all_words(alphabet, max_len: int):
    layer = [""]
    for _ in range(max_len + 1):
        yield from layer
        layer = [w + a for w in layer for a in alphabet]


def dfa_words(p: PointedCoalgebra, max_len: int) -> list[str]:
    """Accepted words by brute-force membership, length-lex order."""
    return [w for w in all_words(p.system.kind.alphabet, max_len) if dfa_accepts(p, w)]


def duplicated(p: PointedCoalgebra) -> PointedCoalgebra:
    """A distinct but bisimilar pointed system: the double of ``p``, rooted in the copy."""
    from ratfix.behaviors import disjoint_union

    union, offsets = disjoint_union([p.system, p.system])
    return PointedCoalgebra(union, p.root + offsets[1])
