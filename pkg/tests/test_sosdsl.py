import random
from fractions import Fraction

import pytest

from ratfix.sosdsl import (
    SpecParseError,
    is_bipointed,
    parse_spec,
    pretty_print,
    stream_rule_select,
    validate_spec,
)

from helpers import SPEC_GENERATORS

ZIP = """\
behavior stream
op zip/2

x = a -> x'
y = b -> y'
---
zip(x, y) = a -> zip(y, x')
"""


def assert_bipointed(text: str):
    doc = parse_spec(text)
    violations = validate_spec(doc)
    assert is_bipointed(violations), [str(v) for v in violations]
    return doc


def assert_error(text: str, fragment: str):
    doc = parse_spec(text)
    violations = validate_spec(doc)
    errors = [v for v in violations if v.severity == "error"]
    assert any(fragment in v.message for v in errors), [str(v) for v in violations]


def test_missing_header_diagnostic():
    with pytest.raises(SpecParseError) as exc:
        parse_spec("")
    assert "missing 'behavior' header" in str(exc.value)


def test_zip_parses_and_is_bipointed():
    doc = assert_bipointed(ZIP)
    assert doc.signature.ops == (("zip", 2),)
    rule = doc.rules[0]
    assert rule.head_vars == ("x", "y")
    assert rule.tail_vars == ("x'", "y'")


def test_round_trip_zip():
    doc = parse_spec(ZIP)
    assert parse_spec(pretty_print(doc)) == doc


def test_round_trip_random_specs():
    rng = random.Random(42)
    for fmt, gen in SPEC_GENERATORS.items():
        for _ in range(40):
            text = gen(rng)
            doc = parse_spec(text)
            assert is_bipointed(validate_spec(doc)), (fmt, text)
            assert parse_spec(pretty_print(doc)) == doc, (fmt, text)


def test_stream_premise_sources_must_match_arguments():
    bad = """\
behavior stream
op f/2

y = b -> y'
x = a -> x'
---
f(x, y) = a -> x
"""
    assert_error(bad, "premise sources")


def test_stream_requires_final_fallback():
    bad = """\
behavior stream
op f/1

x = a -> x'
when a = 0
---
f(x) = a -> x
"""
    assert_error(bad, "non-exhaustive trigger")


def test_stream_unreachable_rule():
    bad = """\
behavior stream
op f/1

x = a -> x'
---
f(x) = a -> x

x = a -> x'
---
f(x) = a + 1 -> x
"""
    assert_error(bad, "unreachable rule")


def test_stream_undeclared_value_variable():
    bad = """\
behavior stream
op f/1

x = a -> x'
---
f(x) = b -> x
"""
    assert_error(bad, "undeclared value variable")


def test_target_must_be_flat_and_bound():
    bad = """\
behavior stream
op f/1

x = a -> x'
---
f(x) = a -> g(x)
"""
    assert_error(bad, "undeclared operation")
    bad2 = """\
behavior stream
op f/1

x = a -> x'
---
f(x) = a -> f(z)
"""
    assert_error(bad2, "not bound")


def test_lts_label_and_freshness_checks():
    assert_error(
        """\
behavior lts labels { a }
op f/1

x - c -> y
---
f(x) - a -> y
""",
        "not in alphabet",
    )
    assert_error(
        """\
behavior lts labels { a }
op f/1

x - a -> x
---
f(x) - a -> f(x)
""",
        "not fresh",
    )


def test_lts_vacuous_rule_warns_but_stays_bipointed():
    text = """\
behavior lts labels { a }
op f/1

x - a -> y
x - a -/->
---
f(x) - a -> f(y)
"""
    doc = parse_spec(text)
    violations = validate_spec(doc)
    assert is_bipointed(violations)
    assert any(v.severity == "warning" for v in violations)


def test_dfa_totality_and_determinism():
    assert_error(
        """\
behavior dfa labels { a, b }
op f/1

x - a -> y
---
f(x) - a -> f(y)
""",
        "partial",
    )
    assert_error(
        """\
behavior dfa labels { a }
op f/1

x - a -> y
---
f(x) - a -> f(y)

x - a -> y
---
f(x) - a -> y
""",
        "nondeterministic",
    )


def test_wts_order_guard_needs_ordered_monoid():
    assert_error(
        """\
behavior wts labels { a } monoid nat-plus
op f/1

x = a => w
x - a, u -> y
when w <= 2
---
f(x) - a, u -> f(y)
""",
        "order guard",
    )


def test_wts_weight_expression_binding():
    assert_error(
        """\
behavior wts labels { a } monoid nat-plus
op f/1

x - a, u -> y
---
f(x) - a, v -> f(y)
""",
        "unbound",
    )


def test_output_rules_checked():
    assert_error(
        """\
behavior nda labels { a }
op f/1

x - a -> y
---
f(x) - a -> f(y)

output f(x) final when final {1}

output f(x) final when final {1}
""",
        "same argument set",
    )
    assert_error(
        """\
behavior stream
op f/1

x = a -> x'
---
f(x) = a -> x

output f(x) final when final {1}
""",
        "not part of the stream format",
    )


def test_output_semantics_directive():
    text = """\
behavior nda labels { a }
output_semantics mentioned-only
op f/2

x - a -> y
---
f(x, z) - a -> f(y, z)

output f(x, z) final when final {1}

output f(x, z) final when final {1, 2}
"""
    doc = parse_spec(text)
    assert doc.output_semantics == "mentioned-only"
    # {1} is a subset of {1,2}: overlapping under mentioned-only semantics
    violations = validate_spec(doc)
    assert any("overlapping" in v.message for v in violations)


def test_stream_rule_select_first_match():
    text = """\
behavior stream
op f/1

x = a -> x'
when a <= 0
---
f(x) = 0 -> f(x')

x = a -> x'
otherwise
---
f(x) = 1 -> f(x')
"""
    doc = assert_bipointed(text)
    rule, env = stream_rule_select(doc, "f", [Fraction(-1)])
    assert rule is doc.rules[0] and env["a"] == Fraction(-1)
    rule, _ = stream_rule_select(doc, "f", [Fraction(2)])
    assert rule is doc.rules[1]


def test_arity_mismatch():
    assert_error(
        """\
behavior stream
op f/2

x = a -> x'
---
f(x) = a -> x
""",
        "arity",
    )
