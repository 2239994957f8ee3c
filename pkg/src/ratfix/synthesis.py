"""Applying a validated rule spec to a finite carrier.

A flat state is either a plain state of the argument system or one operation
symbol applied to plain states.  ``lambda_step`` computes the one-step
behaviour of a flat state by firing the spec's rules on the base
observations; ``synthesize`` closes a root flat state under ``lambda_step``
by BFS.  The reachable result is always finite, bounded by
``sum(|S|**arity(g) for g) + |S|``, which is the state-count content of the
closure property and is asserted on every run.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from . import behaviors, sosdsl
from .behaviors import (
    DfaObs,
    FiniteCoalgebra,
    Kind,
    LtsObs,
    NdaObs,
    PointedCoalgebra,
    StreamObs,
    WtsObs,
    map_obs,
    obs_successors,
)
from .errors import InputError, RatfixError
from .sosdsl import App, DfaRule, LtsRule, SpecDoc, StreamRule, Var, WtsRule, eval_value, stream_rule_select
from .values import show_weight


@dataclass(frozen=True)
class Plain:
    state: int

    def key(self):
        return (0, self.state)


@dataclass(frozen=True)
class OpApp:
    op: str
    args: tuple[int, ...]

    def key(self):
        return (1, self.op, self.args)


FlatState = Union[Plain, OpApp]


def _flat_key(s: FlatState):
    return s.key()


def check_compatible(spec: SpecDoc, base: FiniteCoalgebra):
    if spec.kind != base.kind:
        raise InputError(f"spec kind {spec.kind} does not match system kind {base.kind}")


def check_flat_state(spec: SpecDoc, base: FiniteCoalgebra, s: FlatState):
    if isinstance(s, Plain):
        if not 0 <= s.state < len(base):
            raise InputError(f"flat state references unknown base state {s.state}")
        return
    if s.op not in spec.signature:
        raise InputError(f"unknown operation symbol {s.op!r}")
    if spec.signature.arity(s.op) != len(s.args):
        raise InputError(f"{s.op} has arity {spec.signature.arity(s.op)}, got {len(s.args)} arguments")
    for t in s.args:
        if not 0 <= t < len(base):
            raise InputError(f"flat state references unknown base state {t}")


def _instantiate(term, binding: Mapping[str, FlatState]) -> FlatState:
    """Map a flat rule target to a flat state.

    Variables resolve through ``binding`` to plain base states; an operator
    target applies the symbol to those states' ids.
    """
    if isinstance(term, Var):
        return binding[term.name]
    args = []
    for v in term.args:
        bound = binding[v]
        assert isinstance(bound, Plain)
        args.append(bound.state)
    return OpApp(term.op, tuple(args))


def lambda_step(spec: SpecDoc, base: FiniteCoalgebra, s: FlatState):
    """One-step observation of a flat state, with flat-state successors."""
    check_compatible(spec, base)
    check_flat_state(spec, base, s)
    if isinstance(s, Plain):
        return map_obs(base.kind, base.obs[s.state], Plain)
    kind = base.kind.functor
    if kind == behaviors.STREAM:
        return _stream_step(spec, base, s)
    if kind == behaviors.LTS:
        return LtsObs(frozenset(_lts_transitions(spec, base, s)))
    if kind == behaviors.NDA:
        succ: dict[str, set] = {}
        for a, t in _lts_transitions(spec, base, s):
            succ.setdefault(a, set()).add(t)
        accept = _output_accept(spec, [base.obs[i].accept for i in s.args], s.op)
        return NdaObs(accept, {a: frozenset(ts) for a, ts in succ.items()})
    if kind == behaviors.DFA:
        return _dfa_step(spec, base, s)
    return _wts_step(spec, base, s)


def _stream_step(spec: SpecDoc, base: FiniteCoalgebra, s: OpApp) -> StreamObs:
    outs = [base.obs[i].out for i in s.args]
    rule, env = stream_rule_select(spec, s.op, outs)
    binding: dict[str, FlatState] = {}
    for x, xp, i in zip(rule.head_vars, rule.tail_vars, s.args):
        binding[x] = Plain(i)
        binding[xp] = Plain(base.obs[i].next)
    return StreamObs(eval_value(rule.out_expr, env), _instantiate(rule.target, binding))


def _lts_edges(base: FiniteCoalgebra, i: int, a: str) -> list[int]:
    ob = base.obs[i]
    if base.kind.functor == behaviors.LTS:
        return sorted(t for lbl, t in ob.edges if lbl == a)
    return sorted(ob.succ.get(a, frozenset()))


def _lts_transitions(spec: SpecDoc, base: FiniteCoalgebra, s: OpApp):
    """All (label, flat successor) pairs derivable for an operator state."""
    out = []
    for rule in spec.rules_for(s.op):
        assert isinstance(rule, LtsRule)
        if any(_lts_edges(base, s.args[idx], b) for _, idx, b in rule.negatives):
            continue
        choices = [_lts_edges(base, s.args[idx], a) for _, idx, a, _ in rule.positives]
        if any(not c for c in choices):
            continue
        for picks in itertools.product(*choices):
            binding: dict[str, FlatState] = {x: Plain(i) for x, i in zip(rule.head_vars, s.args)}
            for (_, _, _, y), t in zip(rule.positives, picks):
                binding[y] = Plain(t)
            out.append((rule.label, _instantiate(rule.target, binding)))
    return out


def _output_accept(spec: SpecDoc, bits: Sequence[bool], op: str) -> bool:
    final = frozenset(i for i, b in enumerate(bits) if b)
    for rule in spec.outputs_for(op):
        mentioned = frozenset(rule.final_args)
        if spec.output_semantics == "exact":
            if mentioned == final:
                return True
        elif mentioned <= final:
            return True
    return False


def _dfa_step(spec: SpecDoc, base: FiniteCoalgebra, s: OpApp) -> DfaObs:
    nxt = {}
    for a in base.kind.alphabet:
        rule = next(
            (r for r in spec.rules_for(s.op) if isinstance(r, DfaRule) and r.label == a), None
        )
        if rule is None:
            raise RatfixError(f"internal: dfa spec partial for {s.op} on {a!r}")
        binding: dict[str, FlatState] = {x: Plain(i) for x, i in zip(rule.head_vars, s.args)}
        for _, idx, y in rule.premises:
            binding[y] = Plain(base.obs[s.args[idx]].next[a])
        nxt[a] = _instantiate(rule.target, binding)
    accept = _output_accept(spec, [base.obs[i].accept for i in s.args], s.op)
    return DfaObs(accept, nxt)


def _wts_step(spec: SpecDoc, base: FiniteCoalgebra, s: OpApp) -> WtsObs:
    monoid = base.kind.monoid
    agg: dict[tuple[str, FlatState], object] = {}
    for rule in spec.rules_for(s.op):
        assert isinstance(rule, WtsRule)
        env: dict[str, object] = {}
        ok = True
        for _, idx, a, pat in rule.totals:
            total = monoid.sum(base.obs[s.args[idx]].succ.get(a, {}).values())
            if isinstance(pat, sosdsl.Ref):
                env[pat.name] = total
            elif pat.value != total:
                ok = False
                break
        if not ok:
            continue
        choices = []
        for _, idx, a, _, _ in rule.weighted:
            wmap = base.obs[s.args[idx]].succ.get(a, {})
            choices.append(sorted(wmap.items()))
        if any(not c for c in choices):
            continue
        for picks in itertools.product(*choices):
            inst_env = dict(env)
            binding: dict[str, FlatState] = {x: Plain(i) for x, i in zip(rule.head_vars, s.args)}
            for (_, _, _, u, y), (t, w) in zip(rule.weighted, picks):
                inst_env[u] = w
                binding[y] = Plain(t)
            if not rule.guard.holds(inst_env):
                continue
            weight = monoid.sum(
                inst_env[atom.name] if isinstance(atom, sosdsl.Ref) else atom.value
                for atom in rule.weight_expr
            )
            key = (rule.label, _instantiate(rule.target, binding))
            agg[key] = monoid.combine(agg[key], weight) if key in agg else weight
    succ: dict[str, dict] = {}
    for (a, t), w in agg.items():
        if w != monoid.unit:
            succ.setdefault(a, {})[t] = w
    return WtsObs(succ)


def state_bound(spec: SpecDoc, base: FiniteCoalgebra) -> int:
    """Size of the full carrier ``sigma(S) + S`` for this signature and base."""
    n = len(base)
    return sum(n ** arity for _, arity in spec.signature.ops) + n


@dataclass(frozen=True)
class SynthesizedSystem:
    spec: SpecDoc = field(compare=False)
    base: FiniteCoalgebra
    flat_states: tuple[FlatState, ...]
    obs: tuple[object, ...]  # observations over flat-state indices
    root: int = 0

    def __len__(self):
        return len(self.flat_states)

    def state_name(self, i: int) -> str:
        return render_flat(self.base, self.flat_states[i])

    def to_coalgebra(self) -> PointedCoalgebra:
        names = tuple(self.state_name(i) for i in range(len(self.flat_states)))
        return PointedCoalgebra(FiniteCoalgebra(self.base.kind, names, self.obs), self.root)


def render_flat(base: FiniteCoalgebra, s: FlatState) -> str:
    if isinstance(s, Plain):
        return base.name_of(s.state)
    return f"{s.op}({','.join(base.name_of(i) for i in s.args)})"


def synthesize(spec: SpecDoc, base: FiniteCoalgebra, root: FlatState) -> SynthesizedSystem:
    """BFS closure of ``root`` under ``lambda_step``, numbered by discovery."""
    check_compatible(spec, base)
    check_flat_state(spec, base, root)
    index: dict[FlatState, int] = {root: 0}
    order: list[FlatState] = [root]
    raw_obs: list[object] = []
    frontier = 0
    while frontier < len(order):
        s = order[frontier]
        frontier += 1
        ob = lambda_step(spec, base, s)
        for t in obs_successors(base.kind, ob, key=_flat_key):
            if t not in index:
                index[t] = len(order)
                order.append(t)
        raw_obs.append(ob)
    bound = state_bound(spec, base)
    if len(order) > bound:
        raise RatfixError(f"internal: synthesis produced {len(order)} states, bound is {bound}")
    obs = tuple(map_obs(base.kind, ob, index.__getitem__) for ob in raw_obs)
    return SynthesizedSystem(spec, base, tuple(order), obs, 0)


# ---------------------------------------------------------------------------
# Terms over the signature, evaluated inside-out


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TApp:
    op: str
    args: tuple["Term", ...]
    index: Optional[int] = None  # only used by the GSOS stream dialect


Term = Union[TVar, TApp]


def parse_term(text: str) -> Term:
    """Parse ``f(g(x), y)`` style terms; indexed symbols ``u[3](x)`` allowed."""
    tokens = sosdsl.tokenize(text)
    p = sosdsl._Parser(tokens)

    def term() -> Term:
        name = p.expect_ident().text
        index = None
        if p.at_sym("["):
            p.advance()
            index = int(p.expect_number().text)
            p.expect_sym("]")
        if p.at_sym("("):
            p.advance()
            args = []
            if not p.at_sym(")"):
                args.append(term())
                while p.at_sym(","):
                    p.advance()
                    args.append(term())
            p.expect_sym(")")
            return TApp(name, tuple(args), index)
        if index is not None:
            return TApp(name, (), index)
        return TVar(name)

    result = term()
    if p.cur.kind != "eof":
        p.fail("end of term")
    return result


def eval_term(
    spec: SpecDoc,
    env: Mapping[str, PointedCoalgebra],
    term: Union[Term, str],
    minimize_levels: bool = False,
) -> PointedCoalgebra:
    """Evaluate a nested term over the signature to a pointed finite system.

    Each operator level synthesizes on the disjoint union of its argument
    systems and flattens the result back into the plain data model, so
    nesting is ordinary repeated application.  ``minimize_levels`` quotients
    by bisimilarity between levels to curb growth.
    """
    if isinstance(term, str):
        term = parse_term(term)
    if isinstance(term, TVar):
        if term.name not in env:
            raise InputError(f"unbound variable {term.name!r} in term")
        p = env[term.name]
        if p.system.kind != spec.kind:
            raise InputError(f"system bound to {term.name!r} has kind {p.system.kind.functor}, spec wants {spec.kind.functor}")
        return p
    if term.index is not None:
        raise InputError(f"indexed operator {term.op}[{term.index}] is only valid in the GSOS stream dialect")
    if term.op not in spec.signature:
        raise InputError(f"unknown operation symbol {term.op!r}")
    if spec.signature.arity(term.op) != len(term.args):
        raise InputError(f"{term.op} has arity {spec.signature.arity(term.op)}, got {len(term.args)} arguments")
    args = [eval_term(spec, env, sub, minimize_levels) for sub in term.args]
    union, offsets = behaviors.disjoint_union([a.system for a in args], kind=spec.kind)
    roots = tuple(a.root + off for a, off in zip(args, offsets))
    result = synthesize(spec, union, OpApp(term.op, roots)).to_coalgebra()
    if minimize_levels:
        from . import bisim

        result = bisim.minimize(result)
    return result
