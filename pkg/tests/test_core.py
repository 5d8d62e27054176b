import pytest
from hypothesis import given, settings, strategies as st

from nal.core import (
    AbaFramework,
    Atom,
    ParseError,
    Rule,
    ValidationError,
    ground,
    parse_atom,
    parse_framework,
    serialize_framework,
)
from conftest import TWO_IMAGE_SOURCE, atom


class TestParse:
    def test_two_image_fixture(self, two_image_framework):
        fw = two_image_framework
        assert len(fw.rules) == 5
        assert len(fw.assumptions) == 1
        # equality facts are normalized to ground facts
        assert fw.rules[0] == Rule(id="r1", head=atom("circle(img_1)"))
        assert fw.rules[1] == Rule(id="r2", head=atom("circle(img_2)"))
        assert fw.rules[2] == Rule(id="r3", head=atom("square(img_2)"))
        assert fw.rules[3].body == (atom("circle(A)"), atom("alpha(A)"))
        assert fw.contraries[atom("alpha(A)")] == atom("c_alpha(A)")

    def test_empty_text(self):
        fw = parse_framework("")
        assert fw.rules == () and fw.assumptions == ()

    def test_comments_and_whitespace(self):
        fw = parse_framework("% header\n p( a ,b ).  % trailing\nq :- p(a, b).\n")
        assert [str(r.head) for r in fw.rules] == ["p(a,b)", "q"]

    def test_rule_labels_round_trip(self):
        fw = parse_framework("mine: p(a).\nq(a) :- p(a).")
        assert fw.rules[0].id == "mine"
        assert fw.rules[1].id == "r2"
        assert parse_framework(serialize_framework(fw)) == fw

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as err:
            parse_framework("p(a)\nq(b).")
        assert err.value.line == 2

    def test_arity_clash(self):
        with pytest.raises(ValidationError, match="arity"):
            parse_framework("p(a). p(a,b).")

    def test_head_unifying_with_assumption_is_ok_until_a_rule_heads_it(self):
        base = "p(A) :- q(A). assumption(q(A)). contrary(q(A), p(A))."
        parse_framework(base)  # head p does not unify with assumption q
        with pytest.raises(ValidationError, match="not flat"):
            parse_framework(base + " q(A) :- r(A).")

    def test_assumption_without_contrary(self):
        with pytest.raises(ValidationError, match="no contrary"):
            parse_framework("assumption(alpha(A)).")

    def test_duplicate_contrary(self):
        with pytest.raises(ParseError, match="duplicate contrary"):
            parse_framework(
                "assumption(a). contrary(a, p). contrary(a, q)."
            )

    def test_contrary_for_undeclared_assumption(self):
        with pytest.raises(ValidationError, match="undeclared"):
            parse_framework("contrary(a, p).")

    def test_unsafe_head_variable(self):
        with pytest.raises(ValidationError, match="unsafe"):
            parse_framework("p(A, B) :- q(A).")

    def test_bare_variable_fact_is_unsafe(self):
        with pytest.raises(ValidationError, match="unsafe"):
            parse_framework("p(A).")

    def test_equality_only_in_fact_rules(self):
        with pytest.raises(ParseError, match="equalities"):
            parse_framework("p(A) :- q(A), A=c.")

    def test_equality_fact_must_bind_head_variables(self):
        with pytest.raises(ParseError, match="exactly the head variables"):
            parse_framework("p(A) :- B=c.")

    def test_contrary_variables_subset_of_assumption(self):
        with pytest.raises(ValidationError, match="not bound"):
            parse_framework("assumption(a(X)). contrary(a(X), c(X, Y)).")

    def test_parse_atom(self):
        assert parse_atom("s_1(img_7)") == Atom("s_1", ("img_7",))
        assert parse_atom("flag") == Atom("flag")
        with pytest.raises(ParseError):
            parse_atom("s_1(img_7) extra")


class TestSerialize:
    def test_round_trip_two_images(self, two_image_framework):
        text = serialize_framework(two_image_framework)
        assert parse_framework(text) == two_image_framework

    def test_empty_framework_serializes_to_header_only(self):
        text = serialize_framework(AbaFramework())
        assert text.startswith("%")
        assert parse_framework(text) == AbaFramework()

    def test_learned_style_framework_text(self):
        fw = parse_framework(
            "s_1(A) :- in(A,B), square(B), alpha_2(B,A)."
            "c_alpha_2(X,A) :- red(X), image(A)."
            "c_alpha_2(X,A) :- green(X), image(A)."
            "assumption(alpha_2(X,Y)). contrary(alpha_2(X,Y), c_alpha_2(X,Y))."
        )
        text = serialize_framework(fw)
        assert "s_1(A) :- in(A,B), square(B), alpha_2(B,A)." in text
        assert "contrary(alpha_2(X,Y), c_alpha_2(X,Y))." in text
        assert parse_framework(text) == fw


# Strategy for small valid flat frameworks: non-assumption predicates p0..p2,
# assumption predicates a0..a1 with contraries among the former.
_CONSTS = ("c1", "c2")
_VARS = ("X", "Y")


@st.composite
def frameworks(draw):
    n_assumptions = draw(st.integers(0, 2))
    assumptions, contraries = [], {}
    for i in range(n_assumptions):
        schema = Atom(f"a{i}", ("X",))
        assumptions.append(schema)
        contraries[schema] = Atom(f"ca{i}", ("X",))
    rules = []
    n_rules = draw(st.integers(0, 5))
    for i in range(n_rules):
        head_pred = draw(st.sampled_from(["p0", "p1", "p2"]))
        head_var = draw(st.sampled_from(_VARS + _CONSTS))
        body = []
        for _ in range(draw(st.integers(0, 3))):
            pred = draw(st.sampled_from(["p0", "p1", "p2", "a0", "a1", "ca0"]))
            if pred in ("a0", "a1") and not any(
                s.predicate == pred for s in assumptions
            ):
                pred = "p0"
            body.append(Atom(pred, (draw(st.sampled_from(_VARS + _CONSTS)),)))
        if head_var in _VARS and not any(head_var in a.args for a in body):
            body.append(Atom("p0", (head_var,)))
        rules.append(Rule(id=f"r{i + 1}", head=Atom(head_pred, (head_var,)), body=tuple(body)))
    return AbaFramework(
        rules=tuple(rules), assumptions=tuple(assumptions), contraries=contraries
    ).validated()


@given(frameworks())
@settings(max_examples=150, deadline=None)
def test_round_trip_property(fw):
    assert parse_framework(serialize_framework(fw)) == fw


class TestGround:
    def test_two_image_grounding(self, two_image_framework):
        gfw = ground(two_image_framework)
        bodies = {
            (str(r.head), tuple(map(str, r.body))) for r in gfw.rules
        }
        assert ("c_1(img_1)", ("circle(img_1)", "alpha(img_1)")) in bodies
        assert ("c_alpha(img_2)", ("square(img_2)",)) in bodies
        assert gfw.assumptions == {atom("alpha(img_1)"), atom("alpha(img_2)")}
        assert gfw.contraries[atom("alpha(img_1)")] == atom("c_alpha(img_1)")

    def test_ground_framework_is_identity_on_ground_input(self):
        fw = parse_framework("p(a). q(b) :- p(a).")
        gfw = ground(fw)
        assert [(r.head, r.body) for r in gfw.rules] == [
            (r.head, r.body) for r in fw.rules
        ]

    def test_grounding_size_is_constants_to_the_variables(self):
        fw = parse_framework("p(A, B) :- q(A), r(B). q(a). r(b). s(c).")
        gfw = ground(fw)
        instances = [r for r in gfw.rules if r.schema_id == "r1"]
        assert len(instances) == 3 ** 2

    def test_binary_assumption_instances_over_all_constants(self):
        # untyped grounding: a two-place assumption schema over k constants
        # yields k^2 instances (rule bodies do the type filtering at solve time)
        fw = parse_framework(
            "s_1(A) :- in(A,B), square(B), alpha_2(B,A)."
            "image(img_0). in(img_0, obj_0). in(img_0, obj_1)."
            "square(obj_0). blue(obj_0). circle(obj_1). red(obj_1)."
            "assumption(alpha_2(X,Y)). contrary(alpha_2(X,Y), c_alpha_2(X,Y))."
        )
        gfw = ground(fw)
        n_constants = len(gfw.constants)
        assert len(gfw.assumptions) == n_constants ** 2

    def test_extra_constants_extend_the_domain(self, two_image_framework):
        gfw = ground(two_image_framework, extra_constants={"img_3"})
        assert atom("alpha(img_3)") in gfw.assumptions

    def test_empty_constant_set_with_variables_is_an_error(self):
        fw = parse_framework("p(A) :- q(A).")
        with pytest.raises(ValidationError, match="empty constant set"):
            ground(fw)

    def test_flatness_preserved_by_grounding(self, two_image_framework):
        ground(two_image_framework).as_framework().validated()


@given(frameworks())
@settings(max_examples=60, deadline=None)
def test_grounding_soundness_property(fw):
    gfw = ground(fw, extra_constants={"c1"})
    by_id = {r.id: r for r in fw.rules}
    for grule in gfw.rules:
        schema = by_id[grule.schema_id]
        assert schema.head.predicate == grule.head.predicate
        assert len(schema.body) == len(grule.body)
    # grounding is idempotent on the ground view
    again = ground(gfw.as_framework())
    assert {(r.head, r.body) for r in again.rules} == {
        (r.head, r.body) for r in gfw.rules
    }
    assert again.assumptions == gfw.assumptions
