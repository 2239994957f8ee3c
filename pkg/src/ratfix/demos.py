"""Self-contained, self-verifying demo scenarios for every behaviour kind.

Each demo builds its specification and input systems from embedded text,
runs the construction, checks a named property against an independent
oracle, and returns a printable report ending in PASS or FAIL.  The demos
double as executable documentation: the CLI exposes them via ``ratfix demo
NAME`` and the acceptance tests call them directly.
"""
from __future__ import annotations

from fractions import Fraction

from . import behaviors, bisim, langops, streams
from .behaviors import (
    FiniteCoalgebra,
    LtsObs,
    NdaObs,
    PointedCoalgebra,
    WtsObs,
    lts_kind,
    nda_kind,
    wts_kind,
)
from .sosdsl import parse_spec
from .streams import Lasso, detect_lasso, gsos_unfold, lasso_of, lasso_to_system, parse_gsos_spec
from .synthesis import eval_term
from .values import MIN_INF

# ---------------------------------------------------------------------------
# Embedded specifications

ZIP_SPEC = """\
behavior stream
op zip/2

x = a -> x'
y = b -> y'
---
zip(x, y) = a -> zip(y, x')
"""

CCS_LABELS = ("a", "abar", "b", "tau")

_CCS_PAR_RULES = "\n".join(
    f"""\
x - {l} -> x'
---
par(x, y) - {l} -> par(x', y)

y - {l} -> y'
---
par(x, y) - {l} -> par(x, y')
"""
    for l in CCS_LABELS
)

_CCS_PLUS_RULES = "\n".join(
    f"""\
x - {l} -> x'
---
plus(x, y) - {l} -> x'

y - {l} -> y'
---
plus(x, y) - {l} -> y'
"""
    for l in CCS_LABELS
)

# restriction by the set {a, abar}: only labels outside it survive
_CCS_RESTRICT_RULES = "\n".join(
    f"""\
x - {l} -> x'
---
restrict(x) - {l} -> restrict(x')
"""
    for l in ("b", "tau")
)

CCS_SPEC = f"""\
behavior lts labels {{ a, abar, b, tau }}
op par/2
op plus/2
op restrict/1

{_CCS_PAR_RULES}
x - a -> x'
y - abar -> y'
---
par(x, y) - tau -> par(x', y')

x - abar -> x'
y - a -> y'
---
par(x, y) - tau -> par(x', y')

{_CCS_PLUS_RULES}
{_CCS_RESTRICT_RULES}"""

SHUFFLE_SPEC = """\
behavior nda labels { a, b, c }
op sh/2

x - a -> x'
---
sh(x, y) - a -> sh(x', y)

x - b -> x'
---
sh(x, y) - b -> sh(x', y)

x - c -> x'
---
sh(x, y) - c -> sh(x', y)

y - a -> y'
---
sh(x, y) - a -> sh(x, y')

y - b -> y'
---
sh(x, y) - b -> sh(x, y')

y - c -> y'
---
sh(x, y) - c -> sh(x, y')

output sh(x, y) final when final {1, 2}
"""

PRIORITY_SPEC = """\
behavior wts labels { a, b } monoid min-inf
op prio/1

x = a => w
x = b => v
x - a, u -> x'
when w <= v
---
prio(x) - a, u -> prio(x')

x = a => v
x = b => w
x - b, u -> x'
when w <= v
---
prio(x) - b, u -> prio(x')
"""

P_SPEC = """\
behavior stream
op p/1

x = r -> x'
---
p(x) = r + 1 -> p(p(x'))
"""

UN_SPEC = """\
behavior stream
opfam u/1

x = r -> x'
---
u[n](x) = n -> u[n + 1](x')
"""


# ---------------------------------------------------------------------------
# Embedded input systems


def word_nda(word: str, alphabet) -> PointedCoalgebra:
    """The straight-line automaton accepting exactly ``word``."""
    n = len(word)
    obs = []
    for i in range(n + 1):
        succ = {word[i]: frozenset([i + 1])} if i < n else {}
        obs.append(NdaObs(i == n, succ))
    names = tuple(f"w{i}" for i in range(n + 1))
    return PointedCoalgebra(FiniteCoalgebra(nda_kind(alphabet), names, tuple(obs)), 0)


def _ccs_p() -> PointedCoalgebra:
    # P = a.0 + b.0
    kind = lts_kind(CCS_LABELS)
    obs = (LtsObs(frozenset([("a", 1), ("b", 1)])), LtsObs(frozenset()))
    return PointedCoalgebra(FiniteCoalgebra(kind, ("P", "nilP"), obs), 0)


def _ccs_q() -> PointedCoalgebra:
    # Q = abar.0
    kind = lts_kind(CCS_LABELS)
    obs = (LtsObs(frozenset([("abar", 1)])), LtsObs(frozenset()))
    return PointedCoalgebra(FiniteCoalgebra(kind, ("Q", "nilQ"), obs), 0)


def _priority_base() -> PointedCoalgebra:
    # 3 states; at the root the cheapest a-transition (2) beats the cheapest
    # b-transition (7), so prio must keep both a-moves and drop the b-move.
    kind = wts_kind(("a", "b"), MIN_INF)
    obs = (
        WtsObs({"a": {1: Fraction(2), 2: Fraction(5)}, "b": {1: Fraction(7)}}),
        WtsObs({"b": {2: Fraction(1)}}),
        WtsObs({}),
    )
    return PointedCoalgebra(FiniteCoalgebra(kind, ("r", "s", "t"), obs), 0)


# ---------------------------------------------------------------------------
# Demo runners


def _verdict(lines: list[str], ok: bool, prop: str) -> tuple[list[str], bool]:
    lines.append(f"{'PASS' if ok else 'FAIL'}: {prop}")
    return lines, ok


def demo_zip() -> tuple[list[str], bool]:
    spec = parse_spec(ZIP_SPEC)
    sigma = lasso_to_system(streams.parse_lasso("| 1,2"))
    tau = lasso_to_system(streams.parse_lasso("| 3"))
    result = eval_term(spec, {"s": sigma, "t": tau}, "zip(s, t)")
    got = lasso_of(result)
    expected = Lasso((), (Fraction(1), Fraction(3), Fraction(2), Fraction(3)))
    # independent oracle: pointwise unfold plus exhaustive prefix/cycle search
    sample = gsos_unfold(spec, {"s": streams.parse_lasso("| 1,2"), "t": streams.parse_lasso("| 3")}, "zip(s, t)", 2 * len(result.system) + 2)
    detected = detect_lasso(sample)
    certified = bisim.bisimilar(result, lasso_to_system(got))
    lines = [
        f"zip((1,2)^w, (3)^w) synthesized: {len(result.system)} states",
        f"canonical lasso: {got}",
        f"pointwise-unfold detection: {detected}",
    ]
    ok = got == expected and detected == expected and certified
    return _verdict(lines, ok, "zip of eventually periodic streams is the eventually periodic stream (1 3 2 3)^w")


def demo_ccs() -> tuple[list[str], bool]:
    spec = parse_spec(CCS_SPEC)
    P, Q = _ccs_p(), _ccs_q()
    env = {"P": P, "Q": Q}
    pq = eval_term(spec, env, "par(P, Q)")
    qp = eval_term(spec, env, "par(Q, P)")
    # tau-step to par(0,0): the tau-successor of the root must be bisimilar
    # to the deadlocked process.
    nil = PointedCoalgebra(
        FiniteCoalgebra(lts_kind(CCS_LABELS), ("nil",), (LtsObs(frozenset()),)), 0
    )
    tau_targets = [t for lbl, t in pq.system.obs[pq.root].edges if lbl == "tau"]
    has_tau_to_nil = any(
        bisim.bisimilar(PointedCoalgebra(pq.system, t), nil) for t in tau_targets
    )
    commutes = bisim.bisimilar(pq, qp)
    restricted = eval_term(spec, env, "restrict(par(P, Q))")
    reach = behaviors.reachable(restricted.system, restricted.root)
    leftover = sorted(
        {lbl for ob in reach.system.obs for lbl, _ in ob.edges} & {"a", "abar"}
    )
    lines = [
        f"par(P, Q): {len(pq.system)} states, tau-successors at root: {len(tau_targets)}",
        f"par(P, Q) ~ par(Q, P): {commutes}",
        f"restrict(par(P, Q)): {len(reach.system)} reachable states, a/abar labels left: {leftover or 'none'}",
    ]
    ok = has_tau_to_nil and commutes and not leftover
    return _verdict(lines, ok, "CCS synchronisation, commutativity of par, and restriction")


def demo_shuffle() -> tuple[list[str], bool]:
    spec = parse_spec(SHUFFLE_SPEC)
    alphabet = ("a", "b", "c")
    left = word_nda("ab", alphabet)
    right = word_nda("c", alphabet)
    result = eval_term(spec, {"x": left, "y": right}, "sh(x, y)")
    dfa = langops.nda_to_dfa(result)
    words = langops.enumerate_words(dfa, 3)
    expected = sorted(langops.word_shuffle("ab", "c"), key=lambda w: (len(w), w))
    lines = [
        f"synthesized NDA: {len(result.system)} states",
        f"derived DFA: {len(dfa.system)} states",
        f"words of length <= 3: {words}",
    ]
    return _verdict(lines, words == expected == ["abc", "acb", "cab"], "shuffle of {ab} and {c} is {abc, acb, cab}")


def demo_priority() -> tuple[list[str], bool]:
    spec = parse_spec(PRIORITY_SPEC)
    base = _priority_base()
    result = eval_term(spec, {"x": base}, "prio(x)")
    root_ob = result.system.obs[result.root]
    a_weights = sorted(root_ob.succ.get("a", {}).values())
    b_edges = root_ob.succ.get("b", {})
    source_a = sorted(base.system.obs[base.root].succ["a"].values())
    m1 = bisim.minimize(result)
    m2 = bisim.minimize(m1)
    idem = bisim.bisimilar(m1, m2) and len(m1.system) == len(m2.system)
    lines = [
        f"prio over (Q+ u {{inf}}, min, inf) on a 3-state system: {len(result.system)} states",
        f"a-weights at root: {[str(w) for w in a_weights]} (source: {[str(w) for w in source_a]})",
        f"b-transitions at root: {len(b_edges)}",
        f"minimize idempotent: {idem}",
    ]
    ok = a_weights == source_a and not b_edges and idem
    return _verdict(lines, ok, "priority keeps exactly the a-transitions when min-a <= min-b, and the result is finite")


def demo_p_counterexample() -> tuple[list[str], bool]:
    spec = parse_gsos_spec(P_SPEC)
    zeros = {"z": streams.parse_lasso("| 0")}
    n = 16
    values = gsos_unfold(spec, zeros, "p(z)", n, budget=10**6)
    expected = [Fraction(2) ** k for k in range(n)]
    # the known continuation of the output stream stays aperiodic
    detected = detect_lasso([Fraction(2) ** k for k in range(64)])
    try:
        gsos_unfold(spec, zeros, "p(z)", 64, budget=10**6)
        budget_hit = None
    except streams.BudgetError as exc:
        budget_hit = exc.step
    lines = [
        f"p on 0^w, first {n} values: {' '.join(str(v) for v in values)}",
        f"lasso detected in 64 values: {detected}",
        f"configuration budget of 10^6 nodes exceeded at step: {budget_hit}",
    ]
    ok = values == expected and detected is None and budget_hit is not None
    return _verdict(lines, ok, "p is a GSOS operation whose output 1 2 4 8 ... leaves the eventually periodic streams")


def demo_un_counterexample() -> tuple[list[str], bool]:
    spec = parse_gsos_spec(UN_SPEC)
    zeros = {"z": streams.parse_lasso("| 0")}
    values = gsos_unfold(spec, zeros, "u[5](z)", 16)
    expected = [Fraction(5 + k) for k in range(16)]
    detected = detect_lasso(values)
    lines = [
        f"u[5] on 0^w, first 16 values: {' '.join(str(v) for v in values)}",
        f"lasso detected: {detected}",
    ]
    ok = values == expected and detected is None
    return _verdict(lines, ok, "the indexed family u_n outputs n n+1 n+2 ..., which is not eventually periodic")


DEMOS = {
    "zip": demo_zip,
    "ccs": demo_ccs,
    "shuffle": demo_shuffle,
    "priority": demo_priority,
    "p-counterexample": demo_p_counterexample,
    "un-counterexample": demo_un_counterexample,
}


def run_demo(name: str) -> tuple[list[str], bool]:
    if name not in DEMOS:
        known = ", ".join(sorted(DEMOS))
        raise behaviors.InputError(f"unknown demo {name!r}; known demos: {known}")
    return DEMOS[name]()
