"""Parser and format validator for bipointed SOS rule specifications.

The concrete syntax covers one rule format per behaviour kind:

* stream rules ``x1 =r1-> x1'  ...  ---  f(x1,...) = expr -> target`` with an
  ordered, first-match guard list per operator (``when`` / ``otherwise``),
* lts/nda rules with positive premises ``x1 -a-> y1`` and negative premises
  ``x1 -a-/->``, plus nda output rules,
* wts rules with weighted premises ``x1 -a,u-> y1`` and total-weight premises
  ``x1 =a=> w``, conclusions carrying a monoid-sum weight expression,
* a deterministic dfa dialect (lts-shaped rules, one per operator and letter,
  with output rules).

``parse_spec`` is purely syntactic; ``validate_spec`` reports every format
violation with its source span.  A spec with no error-severity violations is
bipointed: synthesis is then total on finite carriers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import behaviors
from .behaviors import Kind
from .errors import RatfixError
from .values import INF, Weight, get_monoid, show_weight

# ---------------------------------------------------------------------------
# Tokens


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'number' | 'sym' | 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>-/->|---|->|=>|<=|>=|!=|[=<>\-+*,(){}\[\]/|])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SpecParseError([Diagnostic(line, col, f"unexpected character {text[pos]!r}")])
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class SpecParseError(RatfixError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Span:
    line: int = field(default=0)
    col: int = field(default=0)

    def __eq__(self, other):  # spans never affect SpecDoc equality
        return isinstance(other, Span)

    def __hash__(self):
        return 0


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]  # (name, arity) in declaration order

    def arity(self, name: str) -> int:
        for nm, ar in self.ops:
            if nm == name:
                return ar
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(nm == name for nm, _ in self.ops)

    def names(self) -> list[str]:
        return [nm for nm, _ in self.ops]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    op: str
    args: tuple[str, ...]  # variable names only: targets are flat


FlatTerm = Union[Var, App]


# value expressions (stream outputs, guards)
@dataclass(frozen=True)
class Const:
    value: Weight


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "ValueExpr"
    right: "ValueExpr"


@dataclass(frozen=True)
class Neg:
    arg: "ValueExpr"


ValueExpr = Union[Const, Ref, BinOp, Neg]


def eval_value(expr: ValueExpr, env: dict) -> Fraction:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Ref):
        return env[expr.name]
    if isinstance(expr, Neg):
        return -eval_value(expr.arg, env)
    a, b = eval_value(expr.left, env), eval_value(expr.right, env)
    if expr.op == "+":
        return a + b
    if expr.op == "-":
        return a - b
    return a * b


def value_vars(expr: ValueExpr) -> set[str]:
    if isinstance(expr, Ref):
        return {expr.name}
    if isinstance(expr, Neg):
        return value_vars(expr.arg)
    if isinstance(expr, BinOp):
        return value_vars(expr.left) | value_vars(expr.right)
    return set()


@dataclass(frozen=True)
class Cmp:
    op: str  # '=', '!=', '<', '<=', '>', '>='
    left: ValueExpr
    right: ValueExpr

    def holds(self, env: dict) -> bool:
        a, b = eval_value(self.left, env), eval_value(self.right, env)
        return {
            "=": a == b,
            "!=": a != b,
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[self.op]


@dataclass(frozen=True)
class Guard:
    comparisons: tuple[Cmp, ...] = ()
    otherwise: bool = False

    def holds(self, env: dict) -> bool:
        return all(c.holds(env) for c in self.comparisons)


UNCONDITIONAL = Guard()


@dataclass(frozen=True)
class StreamRule:
    op: str
    head_vars: tuple[str, ...]
    value_vars: tuple[str, ...]
    tail_vars: tuple[str, ...]
    guard: Guard
    out_expr: ValueExpr
    target: FlatTerm
    # premise sources, when written differently from the conclusion arguments
    premise_heads: Optional[tuple[str, ...]] = None
    span: Span = field(default_factory=Span)


@dataclass(frozen=True)
class LtsRule:
    op: str
    head_vars: tuple[str, ...]
    # (source var, resolved arg index or None, label, bound var)
    positives: tuple[tuple[str, Optional[int], str, str], ...]
    negatives: tuple[tuple[str, Optional[int], str], ...]
    label: str
    target: FlatTerm
    span: Span = field(default_factory=Span)


@dataclass(frozen=True)
class OutputRule:
    op: str
    head_vars: tuple[str, ...]
    final_args: tuple[int, ...]  # sorted 0-based argument indices
    span: Span = field(default_factory=Span)


# weight expressions: monoid-sums of weight variables and constants
WeightAtom = Union[Ref, Const]


@dataclass(frozen=True)
class WtsRule:
    op: str
    head_vars: tuple[str, ...]
    # (source var, arg index or None, label, weight var, successor var)
    weighted: tuple[tuple[str, Optional[int], str, str, str], ...]
    # (source var, arg index or None, label, pattern atom)
    totals: tuple[tuple[str, Optional[int], str, WeightAtom], ...]
    guard: Guard
    label: str
    weight_expr: tuple[WeightAtom, ...]
    target: FlatTerm
    span: Span = field(default_factory=Span)


@dataclass(frozen=True)
class DfaRule:
    op: str
    head_vars: tuple[str, ...]
    # (source var, arg index or None, bound var); premise label = conclusion label
    premises: tuple[tuple[str, Optional[int], str], ...]
    label: str
    target: FlatTerm
    span: Span = field(default_factory=Span)


TransitionRule = Union[StreamRule, LtsRule, WtsRule, DfaRule]


@dataclass(frozen=True)
class SpecDoc:
    kind: Kind
    signature: Signature
    rules: tuple[TransitionRule, ...]
    outputs: tuple[OutputRule, ...] = ()
    output_semantics: str = "exact"  # or "mentioned-only"

    def rules_for(self, op: str) -> list[TransitionRule]:
        return [r for r in self.rules if r.op == op]

    def outputs_for(self, op: str) -> list[OutputRule]:
        return [r for r in self.outputs if r.op == op]


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def at_sym(self, text: str) -> bool:
        return self.cur.kind == "sym" and self.cur.text == text

    def at_ident(self, text: Optional[str] = None) -> bool:
        return self.cur.kind == "ident" and (text is None or self.cur.text == text)

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected: str):
        tok = self.cur
        got = repr(tok.text) if tok.kind != "eof" else "end of input"
        raise SpecParseError([Diagnostic(tok.line, tok.col, f"expected {expected}, got {got}")])

    def expect_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            self.fail(f"'{text}'")
        return self.advance()

    def expect_ident(self, text: Optional[str] = None) -> Token:
        if not self.at_ident(text):
            self.fail(f"'{text}'" if text else "an identifier")
        return self.advance()

    def expect_number(self) -> Token:
        if self.cur.kind != "number":
            self.fail("a number")
        return self.advance()

    def span(self) -> Span:
        return Span(self.cur.line, self.cur.col)

    # -- header -----------------------------------------------------------

    def parse_header(self) -> tuple[Kind, str]:
        if self.cur.kind == "eof":
            raise SpecParseError([Diagnostic(self.cur.line, self.cur.col, "missing 'behavior' header")])
        self.expect_ident("behavior")
        kind_tok = self.expect_ident()
        functor = kind_tok.text
        if functor not in behaviors.KINDS:
            raise SpecParseError(
                [Diagnostic(kind_tok.line, kind_tok.col, f"unknown behaviour kind {functor!r}")]
            )
        alphabet: tuple[str, ...] = ()
        monoid = None
        if functor in behaviors.LABELLED_KINDS:
            self.expect_ident("labels")
            self.expect_sym("{")
            labels = [self.expect_ident().text]
            while self.at_sym(","):
                self.advance()
                labels.append(self.expect_ident().text)
            self.expect_sym("}")
            alphabet = tuple(labels)
        if functor == behaviors.WTS:
            self.expect_ident("monoid")
            nm = self.expect_ident()
            name = nm.text
            if self.at_sym("-"):  # monoid names like min-inf / nat-plus
                self.advance()
                name += "-" + self.expect_ident().text
            try:
                monoid = get_monoid(name)
            except RatfixError as exc:
                raise SpecParseError([Diagnostic(nm.line, nm.col, str(exc))]) from None
        semantics = "exact"
        if self.at_ident("output_semantics"):
            self.advance()
            tok = self.expect_ident()
            name = tok.text
            if self.at_sym("-"):
                self.advance()
                name += "-" + self.expect_ident().text
            if name not in ("exact", "mentioned-only"):
                raise SpecParseError(
                    [Diagnostic(tok.line, tok.col, "output_semantics must be 'exact' or 'mentioned-only'")]
                )
            semantics = name
        try:
            kind = Kind(functor, alphabet, monoid)
        except RatfixError as exc:
            raise SpecParseError([Diagnostic(kind_tok.line, kind_tok.col, str(exc))]) from None
        return kind, semantics

    def parse_signature(self) -> Signature:
        ops = []
        if not self.at_ident("op"):
            self.fail("at least one 'op' declaration")
        while self.at_ident("op"):
            self.advance()
            name = self.expect_ident().text
            self.expect_sym("/")
            arity = int(self.expect_number().text)
            ops.append((name, arity))
        return Signature(tuple(ops))

    # -- shared pieces ----------------------------------------------------

    def parse_flat_term(self) -> FlatTerm:
        name = self.expect_ident().text
        if self.at_sym("("):
            self.advance()
            args = []
            if not self.at_sym(")"):
                args.append(self.expect_ident().text)
                while self.at_sym(","):
                    self.advance()
                    args.append(self.expect_ident().text)
            self.expect_sym(")")
            return App(name, tuple(args))
        return Var(name)

    def parse_head(self) -> tuple[str, tuple[str, ...]]:
        op = self.expect_ident().text
        self.expect_sym("(")
        args = []
        if not self.at_sym(")"):
            args.append(self.expect_ident().text)
            while self.at_sym(","):
                self.advance()
                args.append(self.expect_ident().text)
        self.expect_sym(")")
        return op, tuple(args)

    def parse_value_expr(self) -> ValueExpr:
        expr = self.parse_value_term()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            expr = BinOp(op, expr, self.parse_value_term())
        return expr

    def parse_value_term(self) -> ValueExpr:
        expr = self.parse_value_factor()
        while self.at_sym("*"):
            self.advance()
            expr = BinOp("*", expr, self.parse_value_factor())
        return expr

    def parse_value_factor(self) -> ValueExpr:
        if self.at_sym("-"):
            self.advance()
            return Neg(self.parse_value_factor())
        if self.cur.kind == "number":
            return Const(Fraction(self.advance().text))
        if self.at_sym("("):
            self.advance()
            expr = self.parse_value_expr()
            self.expect_sym(")")
            return expr
        if self.cur.kind == "ident":
            name = self.advance().text
            return Const(INF) if name == "inf" else Ref(name)
        self.fail("a value expression")

    def parse_guard(self) -> Guard:
        if self.at_ident("otherwise"):
            self.advance()
            return Guard(otherwise=True)
        self.expect_ident("when")
        cmps = [self.parse_cmp()]
        while self.at_sym(","):
            self.advance()
            cmps.append(self.parse_cmp())
        return Guard(tuple(cmps))

    def parse_cmp(self) -> Cmp:
        left = self.parse_value_expr()
        for op in ("<=", ">=", "!=", "=", "<", ">"):
            if self.at_sym(op):
                self.advance()
                return Cmp(op, left, self.parse_value_expr())
        self.fail("a comparison operator")

    def parse_weight_atom(self) -> WeightAtom:
        if self.cur.kind == "number":
            return Const(Fraction(self.advance().text))
        name = self.expect_ident().text
        return Const(INF) if name == "inf" else Ref(name)

    def parse_weight_expr(self) -> tuple[WeightAtom, ...]:
        atoms = [self.parse_weight_atom()]
        while self.at_sym("+"):
            self.advance()
            atoms.append(self.parse_weight_atom())
        return tuple(atoms)


def _resolve(head_vars: tuple[str, ...], name: str) -> Optional[int]:
    try:
        return head_vars.index(name)
    except ValueError:
        return None


def parse_spec(text: str) -> SpecDoc:
    """Parse concrete rule syntax into a SpecDoc.

    Raises :class:`SpecParseError` on syntax errors; format checks (arity,
    variable discipline, totality) are deferred to :func:`validate_spec`.
    """
    p = _Parser(tokenize(text))
    kind, semantics = p.parse_header()
    signature = p.parse_signature()
    rules: list[TransitionRule] = []
    outputs: list[OutputRule] = []
    while p.cur.kind != "eof":
        if p.at_ident("output"):
            outputs.append(_parse_output_rule(p))
        elif kind.functor == behaviors.STREAM:
            rules.append(_parse_stream_rule(p))
        elif kind.functor in (behaviors.LTS, behaviors.NDA, behaviors.DFA):
            rules.append(_parse_lts_like_rule(p, kind))
        else:
            rules.append(_parse_wts_rule(p))
    return SpecDoc(kind, signature, tuple(rules), tuple(outputs), semantics)


def _parse_stream_rule(p: _Parser) -> StreamRule:
    span = p.span()
    premises = []  # (head var, value var, tail var)
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
    op, head = p.parse_head()
    p.expect_sym("=")
    out_expr = p.parse_value_expr()
    p.expect_sym("->")
    target = p.parse_flat_term()
    sources = tuple(x for x, _, _ in premises)
    return StreamRule(
        op,
        head,
        tuple(r for _, r, _ in premises),
        tuple(xp for _, _, xp in premises),
        guard,
        out_expr,
        target,
        sources if sources != head else None,
        span,
    )


def _parse_lts_like_rule(p: _Parser, kind: Kind):
    span = p.span()
    positives = []  # (src, label, var)
    negatives = []  # (src, label)
    while not p.at_sym("---"):
        x = p.expect_ident().text
        p.expect_sym("-")
        a = p.expect_ident().text
        if p.at_sym("-/->"):
            p.advance()
            negatives.append((x, a))
        else:
            p.expect_sym("->")
            y = p.expect_ident().text
            positives.append((x, a, y))
    p.expect_sym("---")
    op, head = p.parse_head()
    p.expect_sym("-")
    label = p.expect_ident().text
    p.expect_sym("->")
    target = p.parse_flat_term()
    if kind.functor == behaviors.DFA:
        return DfaRule(
            op,
            head,
            tuple((x, _resolve(head, x), y) for x, a, y in positives),
            label,
            target,
            span,
        )
    return LtsRule(
        op,
        head,
        tuple((x, _resolve(head, x), a, y) for x, a, y in positives),
        tuple((x, _resolve(head, x), a) for x, a in negatives),
        label,
        target,
        span,
    )


def _parse_wts_rule(p: _Parser) -> WtsRule:
    span = p.span()
    weighted = []  # (src, label, weight var, succ var)
    totals = []  # (src, label, pattern)
    guard = UNCONDITIONAL
    while not p.at_sym("---"):
        if p.at_ident("when") or p.at_ident("otherwise"):
            guard = p.parse_guard()
            break
        x = p.expect_ident().text
        if p.at_sym("="):
            p.advance()
            a = p.expect_ident().text
            p.expect_sym("=>")
            pat = p.parse_weight_atom()
            totals.append((x, a, pat))
        else:
            p.expect_sym("-")
            a = p.expect_ident().text
            p.expect_sym(",")
            u = p.expect_ident().text
            p.expect_sym("->")
            y = p.expect_ident().text
            weighted.append((x, a, u, y))
    p.expect_sym("---")
    op, head = p.parse_head()
    p.expect_sym("-")
    label = p.expect_ident().text
    p.expect_sym(",")
    wexpr = p.parse_weight_expr()
    p.expect_sym("->")
    target = p.parse_flat_term()
    return WtsRule(
        op,
        head,
        tuple((x, _resolve(head, x), a, u, y) for x, a, u, y in weighted),
        tuple((x, _resolve(head, x), a, pat) for x, a, pat in totals),
        guard,
        label,
        wexpr,
        target,
        span,
    )


def _parse_output_rule(p: _Parser) -> OutputRule:
    span = p.span()
    p.expect_ident("output")
    op, head = p.parse_head()
    p.expect_ident("final")
    p.expect_ident("when")
    p.expect_ident("final")
    p.expect_sym("{")
    refs: list[int] = []
    while not p.at_sym("}"):
        if refs:
            p.expect_sym(",")
        if p.cur.kind == "number":
            refs.append(int(p.advance().text) - 1)  # 1-based positions
        else:
            name = p.expect_ident().text
            idx = _resolve(head, name)
            refs.append(idx if idx is not None else -1)
    p.expect_sym("}")
    return OutputRule(op, head, tuple(sorted(refs)), span)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class SpecViolation:
    severity: str  # 'error' | 'warning'
    span: Span
    message: str

    def __str__(self):
        return f"{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


def is_bipointed(violations: Sequence[SpecViolation]) -> bool:
    return all(v.severity != "error" for v in violations)


def validate_spec(doc: SpecDoc) -> list[SpecViolation]:
    """Check the per-format side conditions; empty error list means bipointed."""
    out: list[SpecViolation] = []

    def err(span, msg):
        out.append(SpecViolation("error", span, msg))

    def warn(span, msg):
        out.append(SpecViolation("warning", span, msg))

    seen = set()
    for name, arity in doc.signature.ops:
        if name in seen:
            err(Span(), f"operation symbol {name!r} declared twice")
        seen.add(name)
        if arity < 0:
            err(Span(), f"negative arity for {name!r}")

    for rule in doc.rules + doc.outputs:
        if rule.op not in doc.signature:
            err(rule.span, f"undeclared operation symbol {rule.op!r}")
            continue
        arity = doc.signature.arity(rule.op)
        if len(rule.head_vars) != arity:
            err(rule.span, f"{rule.op} has arity {arity}, conclusion names {len(rule.head_vars)} arguments")
        if len(set(rule.head_vars)) != len(rule.head_vars):
            err(rule.span, f"repeated argument variable in conclusion of {rule.op}")

    if doc.kind.functor == behaviors.STREAM:
        _validate_stream(doc, err, warn)
    elif doc.kind.functor in (behaviors.LTS, behaviors.NDA):
        _validate_lts_nda(doc, err, warn)
    elif doc.kind.functor == behaviors.DFA:
        _validate_dfa(doc, err, warn)
    else:
        _validate_wts(doc, err, warn)

    if doc.kind.functor in (behaviors.NDA, behaviors.DFA):
        _validate_outputs(doc, err, warn)
    elif doc.outputs:
        err(doc.outputs[0].span, f"output rules are not part of the {doc.kind.functor} format")
    return out


def _check_flat_target(doc, rule, bound: set[str], err):
    target = rule.target
    if isinstance(target, Var):
        if target.name not in bound:
            err(rule.span, f"target variable {target.name!r} is not bound by the rule")
        return
    if target.op not in doc.signature:
        err(rule.span, f"target uses undeclared operation {target.op!r}")
    elif doc.signature.arity(target.op) != len(target.args):
        err(rule.span, f"target {target.op} applied to {len(target.args)} arguments")
    for v in target.args:
        if v not in bound:
            err(rule.span, f"target variable {v!r} is not bound by the rule")


def _validate_stream(doc: SpecDoc, err, warn):
    per_op: dict[str, list[StreamRule]] = {nm: [] for nm in doc.signature.names()}
    for rule in doc.rules:
        if not isinstance(rule, StreamRule):
            err(rule.span, "non-stream rule in a stream spec")
            continue
        if rule.op in per_op:
            per_op[rule.op].append(rule)
        arity = doc.signature.arity(rule.op) if rule.op in doc.signature else len(rule.head_vars)
        if len(rule.value_vars) != arity:
            err(rule.span, f"{rule.op} needs {arity} premises, found {len(rule.value_vars)}")
        if rule.premise_heads is not None and rule.premise_heads != rule.head_vars:
            err(rule.span, "premise sources must match the conclusion arguments in order")
        allvars = rule.head_vars + rule.tail_vars
        if len(set(allvars)) != len(allvars):
            err(rule.span, "head and tail variables must be pairwise distinct")
        if len(set(rule.value_vars)) != len(rule.value_vars):
            err(rule.span, "value variables must be pairwise distinct")
        declared = set(rule.value_vars)
        for expr in [rule.out_expr] + [c for cmp in rule.guard.comparisons for c in (cmp.left, cmp.right)]:
            for v in value_vars(expr):
                if v not in declared:
                    err(rule.span, f"undeclared value variable {v!r}")
        _check_flat_target(doc, rule, set(allvars), err)
    for op, rules in per_op.items():
        if not rules:
            err(Span(), f"non-exhaustive trigger: no rules for {op}")
            continue
        for i, rule in enumerate(rules):
            unconditional = rule.guard.otherwise or not rule.guard.comparisons
            if unconditional and i < len(rules) - 1:
                err(rules[i + 1].span, f"unreachable rule for {op}: earlier rule is unconditional")
        last = rules[-1]
        if last.guard.comparisons and not last.guard.otherwise:
            err(last.span, f"non-exhaustive trigger for {op}: final rule must be 'otherwise' or guard-free")


def _validate_lts_nda(doc: SpecDoc, err, warn):
    for rule in doc.rules:
        if not isinstance(rule, LtsRule):
            err(rule.span, f"unexpected rule shape in a {doc.kind.functor} spec")
            continue
        bound = set(rule.head_vars)
        for x, idx, a, y in rule.positives:
            if idx is None:
                err(rule.span, f"premise source {x!r} is not an argument of {rule.op}")
            if a not in doc.kind.alphabet:
                err(rule.span, f"premise label {a!r} not in alphabet")
            if y in bound:
                err(rule.span, f"premise variable {y!r} is not fresh")
            bound.add(y)
        for x, idx, a in rule.negatives:
            if idx is None:
                err(rule.span, f"premise source {x!r} is not an argument of {rule.op}")
            if a not in doc.kind.alphabet:
                err(rule.span, f"premise label {a!r} not in alphabet")
        if rule.label not in doc.kind.alphabet:
            err(rule.span, f"conclusion label {rule.label!r} not in alphabet")
        pos = {(idx, a) for _, idx, a, _ in rule.positives}
        neg = {(idx, a) for _, idx, a in rule.negatives}
        if pos & neg:
            warn(rule.span, "vacuous (never triggered): positive and negative premise on the same argument and label")
        _check_flat_target(doc, rule, bound, err)


def _validate_dfa(doc: SpecDoc, err, warn):
    per_key: dict[tuple[str, str], list[DfaRule]] = {}
    for rule in doc.rules:
        if not isinstance(rule, DfaRule):
            err(rule.span, "unexpected rule shape in a dfa spec")
            continue
        bound = set(rule.head_vars)
        used_args = set()
        for x, idx, y in rule.premises:
            if idx is None:
                err(rule.span, f"premise source {x!r} is not an argument of {rule.op}")
            elif idx in used_args:
                err(rule.span, f"argument {x!r} read twice in one dfa rule")
            used_args.add(idx)
            if y in bound:
                err(rule.span, f"premise variable {y!r} is not fresh")
            bound.add(y)
        if rule.label not in doc.kind.alphabet:
            err(rule.span, f"conclusion label {rule.label!r} not in alphabet")
        per_key.setdefault((rule.op, rule.label), []).append(rule)
        _check_flat_target(doc, rule, bound, err)
    for op in doc.signature.names():
        for a in doc.kind.alphabet:
            rules = per_key.get((op, a), [])
            if not rules:
                err(Span(), f"dfa spec is partial: no rule for {op} on letter {a!r}")
            for extra in rules[1:]:
                err(extra.span, f"dfa spec is nondeterministic: second rule for {op} on letter {a!r}")


def _validate_wts(doc: SpecDoc, err, warn):
    monoid = doc.kind.monoid
    for rule in doc.rules:
        if not isinstance(rule, WtsRule):
            err(rule.span, "unexpected rule shape in a wts spec")
            continue
        bound_states = set(rule.head_vars)
        weight_vars = set()
        for x, idx, a, u, y in rule.weighted:
            if idx is None:
                err(rule.span, f"premise source {x!r} is not an argument of {rule.op}")
            if a not in doc.kind.alphabet:
                err(rule.span, f"premise label {a!r} not in alphabet")
            if y in bound_states:
                err(rule.span, f"premise variable {y!r} is not fresh")
            bound_states.add(y)
            if u in weight_vars:
                err(rule.span, f"weight variable {u!r} bound twice")
            weight_vars.add(u)
        total_keys = set()
        for x, idx, a, pat in rule.totals:
            if idx is None:
                err(rule.span, f"premise source {x!r} is not an argument of {rule.op}")
            if a not in doc.kind.alphabet:
                err(rule.span, f"premise label {a!r} not in alphabet")
            if (idx, a) in total_keys:
                err(rule.span, f"two total-weight premises for the same argument and label {a!r}")
            total_keys.add((idx, a))
            if isinstance(pat, Ref):
                if pat.name in weight_vars:
                    err(rule.span, f"weight variable {pat.name!r} bound twice")
                weight_vars.add(pat.name)
            elif not monoid.member(pat.value):
                err(rule.span, f"constant {show_weight(pat.value)} is not in monoid {monoid.name}")
        if rule.label not in doc.kind.alphabet:
            err(rule.span, f"conclusion label {rule.label!r} not in alphabet")
        for atom in rule.weight_expr:
            if isinstance(atom, Ref):
                if atom.name not in weight_vars:
                    err(rule.span, f"weight expression uses unbound variable {atom.name!r}")
            elif not monoid.member(atom.value):
                err(rule.span, f"constant {show_weight(atom.value)} is not in monoid {monoid.name}")
        if rule.guard.otherwise:
            err(rule.span, "'otherwise' is a stream-format keyword")
        for cmp in rule.guard.comparisons:
            if cmp.op not in ("=", "!=") and not monoid.ordered:
                err(rule.span, f"order guard over unordered monoid {monoid.name}")
            for side in (cmp.left, cmp.right):
                if isinstance(side, (BinOp, Neg)):
                    err(rule.span, "wts guards compare weight variables and constants only")
                elif isinstance(side, Ref) and side.name not in weight_vars:
                    err(rule.span, f"guard uses unbound weight variable {side.name!r}")
                elif isinstance(side, Const) and not monoid.member(side.value):
                    err(rule.span, f"constant {show_weight(side.value)} is not in monoid {monoid.name}")
        _check_flat_target(doc, rule, bound_states, err)


def _validate_outputs(doc: SpecDoc, err, warn):
    per_op: dict[str, list[OutputRule]] = {}
    for rule in doc.outputs:
        if rule.op not in doc.signature:
            continue
        arity = doc.signature.arity(rule.op)
        if len(set(rule.final_args)) != len(rule.final_args):
            err(rule.span, "duplicate argument reference in output rule")
        for i in rule.final_args:
            if not 0 <= i < arity:
                err(rule.span, f"output rule references argument {i + 1}, arity is {arity}")
        per_op.setdefault(rule.op, []).append(rule)
    for op, rules in per_op.items():
        sets = [frozenset(r.final_args) for r in rules]
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                if sets[i] == sets[j]:
                    err(rules[j].span, f"two output rules for {op} with the same argument set")
                elif doc.output_semantics == "mentioned-only" and (sets[i] <= sets[j] or sets[j] <= sets[i]):
                    err(rules[j].span, f"overlapping output rules for {op} under mentioned-only semantics")


# ---------------------------------------------------------------------------
# Rule selection (stream format)


def stream_rule_select(doc: SpecDoc, op: str, values: Sequence[Fraction]) -> tuple[StreamRule, dict]:
    """First-match rule lookup for ``op`` on a tuple of output values.

    Totality is guaranteed by validation: the final rule per operator is
    unconditional.
    """
    rules = [r for r in doc.rules if isinstance(r, StreamRule) and r.op == op]
    if not rules:
        raise RatfixError(f"internal: no stream rules for {op}")
    if len(values) != doc.signature.arity(op):
        raise RatfixError(f"internal: {op} expects {doc.signature.arity(op)} values")
    for rule in rules:
        env = dict(zip(rule.value_vars, values))
        if rule.guard.otherwise or rule.guard.holds(env):
            return rule, env
    raise RatfixError(f"internal: non-exhaustive rules for {op} on {values}")


# ---------------------------------------------------------------------------
# Pretty printing (parse_spec . pretty_print == id on SpecDocs)


def _show_value(expr: ValueExpr, prec: int = 0) -> str:
    if isinstance(expr, Const):
        return show_weight(expr.value)
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Neg):
        inner = f"-{_show_value(expr.arg, 3)}"
        return f"({inner})" if prec >= 3 else inner
    level = {"+": 1, "-": 1, "*": 2}[expr.op]
    text = f"{_show_value(expr.left, level)} {expr.op} {_show_value(expr.right, level + 1)}"
    return f"({text})" if prec > level else text


def _show_flat(term: FlatTerm) -> str:
    if isinstance(term, Var):
        return term.name
    return f"{term.op}({', '.join(term.args)})"


def _show_guard(guard: Guard) -> list[str]:
    if guard.otherwise:
        return ["otherwise"]
    if not guard.comparisons:
        return []
    cmps = ", ".join(f"{_show_value(c.left)} {c.op} {_show_value(c.right)}" for c in guard.comparisons)
    return [f"when {cmps}"]


def pretty_print(doc: SpecDoc) -> str:
    lines = []
    head = f"behavior {doc.kind.functor}"
    if doc.kind.functor in behaviors.LABELLED_KINDS:
        head += " labels {" + ", ".join(doc.kind.alphabet) + "}"
    if doc.kind.functor == behaviors.WTS:
        head += f" monoid {doc.kind.monoid.name}"
    lines.append(head)
    if doc.output_semantics != "exact":
        lines.append(f"output_semantics {doc.output_semantics}")
    for name, arity in doc.signature.ops:
        lines.append(f"op {name}/{arity}")
    for rule in doc.rules:
        lines.append("")
        if isinstance(rule, StreamRule):
            srcs = rule.premise_heads if rule.premise_heads is not None else rule.head_vars
            for x, r, xp in zip(srcs, rule.value_vars, rule.tail_vars):
                lines.append(f"{x} ={r}-> {xp}")
            lines.extend(_show_guard(rule.guard))
            lines.append("---")
            lines.append(
                f"{rule.op}({', '.join(rule.head_vars)}) = {_show_value(rule.out_expr)} -> {_show_flat(rule.target)}"
            )
        elif isinstance(rule, LtsRule):
            for x, _, a, y in rule.positives:
                lines.append(f"{x} -{a}-> {y}")
            for x, _, a in rule.negatives:
                lines.append(f"{x} -{a}-/->")
            lines.append("---")
            lines.append(f"{rule.op}({', '.join(rule.head_vars)}) -{rule.label}-> {_show_flat(rule.target)}")
        elif isinstance(rule, DfaRule):
            for x, _, y in rule.premises:
                lines.append(f"{x} -{rule.label}-> {y}")
            lines.append("---")
            lines.append(f"{rule.op}({', '.join(rule.head_vars)}) -{rule.label}-> {_show_flat(rule.target)}")
        else:
            for x, _, a, u, y in rule.weighted:
                lines.append(f"{x} -{a},{u}-> {y}")
            for x, _, a, pat in rule.totals:
                lines.append(f"{x} ={a}=> {_show_value(pat)}")
            lines.extend(_show_guard(rule.guard))
            lines.append("---")
            wexpr = " + ".join(_show_value(atom) for atom in rule.weight_expr)
            lines.append(f"{rule.op}({', '.join(rule.head_vars)}) -{rule.label}, {wexpr}-> {_show_flat(rule.target)}")
    for rule in doc.outputs:
        lines.append("")
        refs = ", ".join(str(i + 1) for i in rule.final_args)
        lines.append(f"output {rule.op}({', '.join(rule.head_vars)}) final when final {{{refs}}}")
    return "\n".join(lines) + "\n"
