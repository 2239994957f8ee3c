"""Eventually periodic streams as lassos, and the general GSOS stream unfolder.

The lasso algebra gives exact finite representations of eventually periodic
streams (canonical prefix + primitive cycle).  The GSOS unfolder runs the
more permissive dialect in which rule targets are arbitrary terms and
operator families may carry an integer index; it exists to make the
non-closure counterexamples executable, and it doubles as an independent
oracle for synthesized stream systems.
"""
from __future__ import annotations

import gc
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from . import behaviors, sosdsl
from .behaviors import FiniteCoalgebra, PointedCoalgebra, StreamObs, stream_kind
from .errors import BudgetError, InputError, RatfixError
from .sosdsl import (
    Diagnostic,
    Guard,
    SpecDoc,
    SpecParseError,
    StreamRule,
    UNCONDITIONAL,
    ValueExpr,
)
from .values import parse_scalar, show_scalar


# ---------------------------------------------------------------------------
# Lassos


def _primitive(cycle: tuple) -> tuple:
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            return cycle[:d]
    return cycle


@dataclass(frozen=True)
class Lasso:
    """Canonical prefix + nonempty primitive cycle of rationals.

    Construction canonicalizes, so two lassos are equal iff they denote the
    same stream.
    """

    prefix: tuple[Fraction, ...]
    cycle: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.cycle:
            raise InputError("lasso cycle must be nonempty")
        cycle = _primitive(tuple(self.cycle))
        prefix = tuple(self.prefix)
        while prefix and prefix[-1] == cycle[-1]:
            cycle = (cycle[-1],) + cycle[:-1]
            prefix = prefix[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)

    def value_at(self, i: int) -> Fraction:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def values(self, n: int) -> list[Fraction]:
        return [self.value_at(i) for i in range(n)]

    def __str__(self):
        pre = ",".join(show_scalar(v) for v in self.prefix)
        cyc = ",".join(show_scalar(v) for v in self.cycle)
        return f"{pre} | {cyc}" if pre else f"| {cyc}"


def parse_lasso(text: str) -> Lasso:
    """Parse the ``v1,v2 | w1,w2`` text form (prefix may be empty)."""
    if "|" not in text:
        raise InputError("lasso text needs a '|' between prefix and cycle")
    pre_text, cyc_text = text.split("|", 1)
    prefix = tuple(parse_scalar(v) for v in pre_text.split(",") if v.strip())
    cycle = tuple(parse_scalar(v) for v in cyc_text.split(",") if v.strip())
    return Lasso(prefix, cycle)


def lasso_of(p: PointedCoalgebra) -> Lasso:
    """Read off the eventually periodic stream of a pointed stream system."""
    if p.system.kind.functor != behaviors.STREAM:
        raise InputError("lasso_of needs a stream system")
    seen: dict[int, int] = {}
    outputs: list[Fraction] = []
    s = p.root
    while s not in seen:
        seen[s] = len(outputs)
        outputs.append(p.system.obs[s].out)
        s = p.system.obs[s].next
    j = seen[s]
    return Lasso(tuple(outputs[:j]), tuple(outputs[j:]))


def lasso_to_system(l: Lasso) -> PointedCoalgebra:
    """A rho-shaped stream system denoting exactly the lasso's stream."""
    values = list(l.prefix) + list(l.cycle)
    n = len(values)
    obs = []
    for i, v in enumerate(values):
        nxt = i + 1 if i + 1 < n else len(l.prefix)
        obs.append(StreamObs(v, nxt))
    names = tuple(f"q{i}" for i in range(n))
    return PointedCoalgebra(FiniteCoalgebra(stream_kind(), names, tuple(obs)), 0)


def detect_lasso(values: Sequence[Fraction]) -> Optional[Lasso]:
    """Least (prefix, period) consistent with the sample, or None.

    A returned lasso is only sample-consistent; certainty comes from a
    system-level bound checked by the caller, never from the sample.
    """
    n = len(values)
    for p in range(n + 1):
        for c in range(1, n + 1):
            if p + 2 * c > n:
                break
            if all(values[i] == values[i + c] for i in range(p, n - c)):
                return Lasso(tuple(values[:p]), tuple(values[p : p + c]))
    return None


# ---------------------------------------------------------------------------
# GSOS stream dialect


@dataclass(frozen=True)
class GVar:
    name: str


@dataclass(frozen=True)
class GApp:
    op: str
    args: tuple["GTerm", ...]
    index: Optional[ValueExpr] = None


GTerm = Union[GVar, GApp]


@dataclass(frozen=True)
class GsosRule:
    op: str
    index_var: Optional[str]  # bound by an indexed head like u[n](x)
    head_vars: tuple[str, ...]
    value_vars: tuple[str, ...]
    tail_vars: tuple[str, ...]
    guard: Guard
    out_expr: ValueExpr
    target: GTerm
    span: sosdsl.Span = field(default_factory=sosdsl.Span)


@dataclass(frozen=True)
class GsosStreamSpec:
    """A stream spec whose targets are arbitrary terms; never bipointed."""

    ops: tuple[tuple[str, int, bool], ...]  # (name, arity, indexed family?)
    rules: tuple[GsosRule, ...]

    def arity(self, name: str) -> int:
        for nm, ar, _ in self.ops:
            if nm == name:
                return ar
        raise InputError(f"unknown operation symbol {name!r}")

    def indexed(self, name: str) -> bool:
        for nm, _, ix in self.ops:
            if nm == name:
                return ix
        raise InputError(f"unknown operation symbol {name!r}")

    def rules_for(self, op: str) -> list[GsosRule]:
        return [r for r in self.rules if r.op == op]

    @classmethod
    def from_spec_doc(cls, doc: SpecDoc) -> "GsosStreamSpec":
        """Embed a bipointed stream SpecDoc (flat targets are terms too)."""
        if doc.kind.functor != behaviors.STREAM:
            raise InputError("only stream specs embed into the GSOS dialect")
        rules = []
        for rule in doc.rules:
            assert isinstance(rule, StreamRule)
            target = rule.target
            if isinstance(target, sosdsl.Var):
                gt: GTerm = GVar(target.name)
            else:
                gt = GApp(target.op, tuple(GVar(v) for v in target.args))
            rules.append(
                GsosRule(
                    rule.op,
                    None,
                    rule.head_vars,
                    rule.value_vars,
                    rule.tail_vars,
                    rule.guard,
                    rule.out_expr,
                    gt,
                    rule.span,
                )
            )
        ops = tuple((name, arity, False) for name, arity in doc.signature.ops)
        return cls(ops, tuple(rules))


def parse_gsos_spec(text: str) -> GsosStreamSpec:
    """Parse the counterexample dialect: ``opfam`` families, nested targets."""
    p = sosdsl._Parser(sosdsl.tokenize(text))
    kind, _ = p.parse_header()
    if kind.functor != behaviors.STREAM:
        raise SpecParseError([Diagnostic(1, 1, "the GSOS dialect covers stream behaviour only")])
    ops = []
    while p.at_ident("op") or p.at_ident("opfam"):
        fam = p.advance().text == "opfam"
        name = p.expect_ident().text
        p.expect_sym("/")
        arity = int(p.expect_number().text)
        ops.append((name, arity, fam))
    if not ops:
        p.fail("at least one 'op' or 'opfam' declaration")
    spec_ops = {name: (arity, fam) for name, arity, fam in ops}

    def parse_gterm() -> GTerm:
        name = p.expect_ident().text
        index = None
        if p.at_sym("["):
            p.advance()
            index = p.parse_value_expr()
            p.expect_sym("]")
        if p.at_sym("("):
            p.advance()
            args = []
            if not p.at_sym(")"):
                args.append(parse_gterm())
                while p.at_sym(","):
                    p.advance()
                    args.append(parse_gterm())
            p.expect_sym(")")
            return GApp(name, tuple(args), index)
        if index is not None:
            return GApp(name, (), index)
        return GVar(name)

    rules = []
    while p.cur.kind != "eof":
        span = p.span()
        premises = []
        guard = UNCONDITIONAL
        while not p.at_sym("---"):
            if p.at_ident("when") or p.at_ident("otherwise"):
                guard = p.parse_guard()
                break
            x = p.expect_ident().text
            p.expect_sym("=")
            r = p.expect_ident().text
            p.expect_sym("->")
            xp = p.expect_ident().text
            premises.append((x, r, xp))
        p.expect_sym("---")
        op_tok = p.cur
        op = p.expect_ident().text
        index_var = None
        if p.at_sym("["):
            p.advance()
            index_var = p.expect_ident().text
            p.expect_sym("]")
        p.expect_sym("(")
        head = []
        if not p.at_sym(")"):
            head.append(p.expect_ident().text)
            while p.at_sym(","):
                p.advance()
                head.append(p.expect_ident().text)
        p.expect_sym(")")
        p.expect_sym("=")
        out_expr = p.parse_value_expr()
        p.expect_sym("->")
        target = parse_gterm()
        if op not in spec_ops:
            raise SpecParseError([Diagnostic(op_tok.line, op_tok.col, f"undeclared operation {op!r}")])
        arity, fam = spec_ops[op]
        if fam != (index_var is not None):
            raise SpecParseError(
                [Diagnostic(op_tok.line, op_tok.col, f"{op} is {'an indexed family' if fam else 'not indexed'}")]
            )
        if len(head) != arity or len(premises) != arity:
            raise SpecParseError([Diagnostic(op_tok.line, op_tok.col, f"{op} has arity {arity}")])
        rules.append(
            GsosRule(
                op,
                index_var,
                tuple(head),
                tuple(r for _, r, _ in premises),
                tuple(xp for _, _, xp in premises),
                guard,
                out_expr,
                target,
                span,
            )
        )
    spec = GsosStreamSpec(tuple(ops), tuple(rules))
    _check_total(spec)
    return spec


def _check_total(spec: GsosStreamSpec):
    for name, _, _ in spec.ops:
        rules = spec.rules_for(name)
        if not rules:
            raise SpecParseError([Diagnostic(0, 0, f"no rules for {name}")])
        last = rules[-1]
        if last.guard.comparisons and not last.guard.otherwise:
            raise SpecParseError(
                [Diagnostic(last.span.line, last.span.col, f"final rule for {name} must be 'otherwise' or guard-free")]
            )


# ---------------------------------------------------------------------------
# Operational unfolding

_CUR = "cur"
_APP = "app"


def _config_of_term(term, env: Mapping[str, Lasso]):
    from .synthesis import TApp, TVar

    if isinstance(term, str):
        from .synthesis import parse_term

        term = parse_term(term)
    if isinstance(term, TVar):
        if term.name not in env:
            raise InputError(f"unbound variable {term.name!r} in term")
        return (_CUR, env[term.name], 0)
    return (_APP, term.op, term.index, tuple(_config_of_term(a, env) for a in term.args))


# Rules are compiled once per unfold into real Python lambdas over the
# per-node data: `rs` (the list of child results), `c` (the child
# configurations) and `idx` (the family index, if any).  Integral scalars
# travel as plain ints inside the unfolder -- configurations for non-regular
# operators genuinely reach millions of nodes, and exact integer arithmetic
# is an order of magnitude cheaper than Fraction arithmetic; results are
# converted back at the output boundary.  Each node result is a 4-tuple
# (head value, successor config, own logical size, successor logical size),
# so the budget check is O(1) per step: logical sizes count shared
# subconfigurations with multiplicity, exactly as if configs were trees.


def _fast_scalar(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _as_index(v) -> int:
    if isinstance(v, int):
        return v
    if v.denominator != 1:
        raise InputError(f"index expression is not an integer: {v}")
    return int(v)


class _Codegen:
    """Collects hoisted constants for the generated rule lambdas."""

    def __init__(self):
        self.globals = {"_APP": _APP, "_as_index": _as_index}
        self._n = 0

    def const(self, value) -> str:
        fast = _fast_scalar(value)
        if isinstance(fast, int):
            return repr(fast)
        name = f"K{self._n}"
        self._n += 1
        self.globals[name] = fast
        return name


def _expr_src(expr: ValueExpr, slots: dict, cg: _Codegen) -> str:
    if isinstance(expr, sosdsl.Const):
        return cg.const(expr.value)
    if isinstance(expr, sosdsl.Ref):
        if expr.name not in slots:
            raise RatfixError(f"internal: unbound value variable {expr.name!r}")
        return slots[expr.name]
    if isinstance(expr, sosdsl.Neg):
        return f"(-{_expr_src(expr.arg, slots, cg)})"
    left = _expr_src(expr.left, slots, cg)
    right = _expr_src(expr.right, slots, cg)
    return f"({left} {expr.op} {right})"


_CMP_SRC = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _guard_src(guard: Guard, slots: dict, cg: _Codegen) -> Optional[str]:
    if guard.otherwise or not guard.comparisons:
        return None
    return " and ".join(
        f"({_expr_src(c.left, slots, cg)} {_CMP_SRC[c.op]} {_expr_src(c.right, slots, cg)})"
        for c in guard.comparisons
    )


def _target_src(spec: GsosStreamSpec, t: GTerm, rule: GsosRule, slots: dict, cg: _Codegen) -> str:
    if isinstance(t, GVar):
        if t.name in rule.head_vars:
            return f"c[{rule.head_vars.index(t.name)}]"
        if t.name in rule.tail_vars:
            return f"rs[{rule.tail_vars.index(t.name)}][1]"
        raise RatfixError(f"internal: unbound target variable {t.name!r}")
    if t.index is not None:
        idx = f"_as_index({_expr_src(t.index, slots, cg)})"
    elif spec.indexed(t.op):
        raise InputError(f"indexed family {t.op} used without an index")
    else:
        idx = "None"
    args = ", ".join(_target_src(spec, a, rule, slots, cg) for a in t.args)
    inner = f"({args},)" if args else "()"
    return f"(_APP, {t.op!r}, {idx}, {inner})"


def _target_size_src(t: GTerm, rule: GsosRule) -> str:
    """Source computing the logical (tree) size of an instantiated target."""

    def terms(t: GTerm) -> tuple[int, list[str]]:
        if isinstance(t, GVar):
            if t.name in rule.head_vars:
                return 0, [f"rs[{rule.head_vars.index(t.name)}][2]"]
            return 0, [f"rs[{rule.tail_vars.index(t.name)}][3]"]
        count, parts = 1, []
        for a in t.args:
            c, ps = terms(a)
            count += c
            parts.extend(ps)
        return count, parts

    count, parts = terms(t)
    return " + ".join([str(count)] + parts)


def _compile_spec(spec: GsosStreamSpec) -> dict:
    table: dict[str, tuple] = {}
    for name, arity, _ in spec.ops:
        own_size = " + ".join(["1"] + [f"rs[{i}][2]" for i in range(arity)])
        compiled = []
        for rule in spec.rules_for(name):
            cg = _Codegen()
            slots = {r: f"rs[{i}][0]" for i, r in enumerate(rule.value_vars)}
            if rule.index_var is not None:
                slots[rule.index_var] = "idx"
            guard = _guard_src(rule.guard, slots, cg)
            guard_fn = eval(f"lambda rs, idx: {guard}", cg.globals) if guard else None
            out = _expr_src(rule.out_expr, slots, cg)
            target = _target_src(spec, rule.target, rule, slots, cg)
            size = _target_size_src(rule.target, rule)
            rule_fn = eval(f"lambda rs, c, idx: ({out}, {target}, {own_size}, {size})", cg.globals)
            compiled.append((guard_fn, rule_fn))
        fast = compiled[0][1] if len(compiled) == 1 and compiled[0][0] is None else None
        table[name] = (fast, compiled)
    return table


def _step(table: dict, root):
    """One output value and the successor configuration.

    Iterative post-order with id-memoization: deep configurations exceed the
    recursion limit, and shared subconfigurations are stepped once.
    """
    results: dict[int, tuple] = {}
    get = results.get
    stack = [root]
    push = stack.append
    pop = stack.pop
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid in results:
            pop()
            continue
        if node[0] == _CUR:
            _, lasso, pos = node
            results[nid] = (_fast_scalar(lasso.value_at(pos)), (_CUR, lasso, pos + 1), 1, 1)
            pop()
            continue
        children = node[3]
        rs = []
        for ch in children:
            cr = get(id(ch))
            if cr is None:
                push(ch)
            else:
                rs.append(cr)
        if len(rs) != len(children):
            continue
        idx = node[2]
        fast, rules = table[node[1]]
        if fast is not None:
            results[nid] = fast(rs, children, idx)
            pop()
            continue
        chosen = None
        for guard_fn, rule_fn in rules:
            if guard_fn is None or guard_fn(rs, idx):
                chosen = rule_fn(rs, children, idx)
                break
        if chosen is None:
            raise RatfixError(f"internal: no rule matched for {node[1]} on {[r[0] for r in rs]}")
        results[nid] = chosen
        pop()
    return results[id(root)]


DEFAULT_BUDGET = 10**6


def gsos_unfold(
    spec: Union[GsosStreamSpec, SpecDoc],
    env: Mapping[str, Lasso],
    term,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> list[Fraction]:
    """First ``n`` output values of ``term`` under operational term rewriting.

    Configurations may grow without bound for genuinely non-regular
    operators; ``budget`` caps the configuration node count and raises
    :class:`BudgetError` naming the step reached.
    """
    if isinstance(spec, SpecDoc):
        spec = GsosStreamSpec.from_spec_doc(spec)
    table = _compile_spec(spec)
    config = _config_of_term(term, env)
    values: list[Fraction] = []
    # Configurations are acyclic tuples, so reference counting reclaims them
    # fully; pausing the cycle collector avoids repeated generational scans
    # over millions of live nodes.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for step in range(n):
            head, config, _, size = _step(table, config)
            values.append(head if isinstance(head, Fraction) else Fraction(head))
            if size > budget:
                raise BudgetError(f"configuration exceeded {budget} nodes at step {step + 1}", step=step + 1)
    finally:
        if was_enabled:
            gc.enable()
    return values
