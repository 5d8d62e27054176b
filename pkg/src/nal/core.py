"""Flat assumption-based argumentation frameworks: data model, text format, grounding.

A framework is a set of rules plus a set of assumption schemas, each mapped to a
contrary atom.  Terms are plain identifier strings: a lowercase leading letter
makes a constant, an uppercase one a variable (``img_1`` vs ``A``).  Frameworks
are immutable after validation and safe to share between workers; parsing,
serialization and grounding are pure functions.

The ``.aba`` text format is line-oriented with ``%`` comments and statements
terminated by ``.``::

    circle(img_1).                      % ground fact
    circle(A) :- A=img_1.               % equality fact, normalized to the above
    c_1(A) :- circle(A), alpha(A).      % rule
    assumption(alpha(A)).
    contrary(alpha(A), c_alpha(A)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

__all__ = [
    "AbaError",
    "ParseError",
    "ValidationError",
    "Atom",
    "Rule",
    "AbaFramework",
    "GroundRule",
    "GroundFramework",
    "is_variable",
    "is_constant",
    "parse_framework",
    "parse_atom",
    "serialize_framework",
    "ground",
]

_CONSTANT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_VARIABLE_RE = re.compile(r"[A-Z][a-zA-Z0-9_]*\Z")


class AbaError(Exception):
    """Base class for framework errors."""


class ParseError(AbaError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(AbaError):
    pass


def is_variable(term: str) -> bool:
    return term[:1].isupper()


def is_constant(term: str) -> bool:
    return bool(term) and not term[:1].isupper()


@dataclass(frozen=True, slots=True)
class Atom:
    """A predicate applied to a tuple of terms (arity may be zero)."""

    predicate: str
    args: tuple[str, ...] = ()

    def is_ground(self) -> bool:
        return not any(is_variable(t) for t in self.args)

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in self.args:
            if is_variable(t):
                seen.setdefault(t)
        return tuple(seen)

    def substitute(self, binding: dict[str, str]) -> "Atom":
        if not self.args:
            return self
        return Atom(self.predicate, tuple(binding.get(t, t) for t in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"


@dataclass(frozen=True, slots=True)
class Rule:
    """``head :- body`` with a stable id used for provenance and explanations."""

    id: str
    head: Atom
    body: tuple[Atom, ...] = ()

    def is_fact(self) -> bool:
        return not self.body

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in (self.head, *self.body):
            for v in atom.variables():
                seen.setdefault(v)
        return tuple(seen)

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


def _match(pattern: Atom, atom: Atom) -> dict[str, str] | None:
    """One-way match: bind pattern variables so that pattern == atom."""
    if pattern.predicate != atom.predicate or len(pattern.args) != len(atom.args):
        return None
    binding: dict[str, str] = {}
    for p, a in zip(pattern.args, atom.args):
        if is_variable(p):
            bound = binding.setdefault(p, a)
            if bound != a:
                return None
        elif p != a:
            return None
    return binding


def _unifiable(a: Atom, b: Atom) -> bool:
    """Can a and b be made equal by substituting variables on both sides?

    Variables are standardized apart; terms are function-free, so union-find
    over term occurrences suffices (a class may contain at most one constant).
    """
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return False
    # tag variables by side so same-named variables stay distinct
    Term = tuple  # ("var", side, name) | ("const", name)
    parent: dict[Term, Term] = {}

    def find(x: Term) -> Term:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    def term(side: str, t: str) -> Term:
        return ("var", side, t) if is_variable(t) else ("const", t)

    for ta, tb in zip(a.args, b.args):
        ra, rb = find(term("l", ta)), find(term("r", tb))
        if ra == rb:
            continue
        if ra[0] == "const" and rb[0] == "const":
            return False
        if ra[0] == "const":
            parent[rb] = ra
        else:
            parent[ra] = rb
    return True


@dataclass(frozen=True)
class AbaFramework:
    """Rules plus assumption schemas and their contraries (a flat framework).

    ``assumptions`` keeps declaration order; ``contraries`` maps each assumption
    schema to its contrary schema over the same variables.
    """

    rules: tuple[Rule, ...] = ()
    assumptions: tuple[Atom, ...] = ()
    contraries: dict[Atom, Atom] = field(default_factory=dict)

    def constants(self) -> set[str]:
        out: set[str] = set()
        for rule in self.rules:
            for atom in (rule.head, *rule.body):
                out.update(t for t in atom.args if is_constant(t))
        for schema in self.assumptions:
            out.update(t for t in schema.args if is_constant(t))
            out.update(t for t in self.contraries[schema].args if is_constant(t))
        return out

    def has_variables(self) -> bool:
        return any(r.variables() for r in self.rules) or any(
            s.variables() for s in self.assumptions
        )

    def assumption_schema_for(self, atom: Atom) -> Atom | None:
        """The (unique) assumption schema this atom instantiates, if any."""
        for schema in self.assumptions:
            if _match(schema, atom) is not None:
                return schema
        return None

    def contrary_of(self, atom: Atom) -> Atom:
        schema = self.assumption_schema_for(atom)
        if schema is None:
            raise ValidationError(f"{atom} is not an instance of any assumption")
        binding = _match(schema, atom)
        assert binding is not None
        return self.contraries[schema].substitute(binding)

    def validated(self) -> "AbaFramework":
        """Check all framework invariants, returning self on success."""
        arities: dict[str, int] = {}

        def check_arity(atom: Atom, where: str) -> None:
            known = arities.setdefault(atom.predicate, len(atom.args))
            if known != len(atom.args):
                raise ValidationError(
                    f"arity clash for '{atom.predicate}' in {where}: "
                    f"{len(atom.args)} vs {known}"
                )

        for rule in self.rules:
            check_arity(rule.head, f"rule {rule.id}")
            for atom in rule.body:
                check_arity(atom, f"rule {rule.id}")
            unsafe = set(rule.head.variables()) - {
                v for atom in rule.body for v in atom.variables()
            }
            if unsafe:
                raise ValidationError(
                    f"unsafe head variable(s) {sorted(unsafe)} in rule {rule.id}"
                )

        for i, schema in enumerate(self.assumptions):
            check_arity(schema, "assumption declaration")
            for other in self.assumptions[:i]:
                if _unifiable(schema, other):
                    raise ValidationError(
                        f"assumption schemas {other} and {schema} overlap; "
                        f"their instances would have ambiguous contraries"
                    )
            contrary = self.contraries.get(schema)
            if contrary is None:
                raise ValidationError(f"assumption {schema} has no contrary")
            check_arity(contrary, "contrary declaration")
            extra = set(contrary.variables()) - set(schema.variables())
            if extra:
                raise ValidationError(
                    f"contrary {contrary} uses variable(s) {sorted(extra)} "
                    f"not bound by assumption {schema}"
                )
        for schema in self.contraries:
            if schema not in self.assumptions:
                raise ValidationError(
                    f"contrary declared for undeclared assumption {schema}"
                )

        for rule in self.rules:
            for schema in self.assumptions:
                if _unifiable(rule.head, schema):
                    raise ValidationError(
                        f"framework is not flat: head of rule {rule.id} "
                        f"({rule.head}) unifies with assumption {schema}"
                    )
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbaFramework):
            return NotImplemented
        return (
            self.rules == other.rules
            and self.assumptions == other.assumptions
            and self.contraries == other.contraries
        )


@dataclass(frozen=True, slots=True)
class GroundRule:
    """A variable-free rule instance; schema_id names the rule it instantiates."""

    head: Atom
    body: tuple[Atom, ...]
    schema_id: str


@dataclass(frozen=True)
class GroundFramework:
    rules: tuple[GroundRule, ...]
    assumptions: frozenset[Atom]
    contraries: dict[Atom, Atom]
    constants: frozenset[str]

    def as_framework(self) -> AbaFramework:
        """View this ground framework as an (already ground) schema framework."""
        schemas = tuple(sorted(self.assumptions, key=str))
        return AbaFramework(
            rules=tuple(
                Rule(id=f"{r.schema_id}", head=r.head, body=r.body) for r in self.rules
            ),
            assumptions=schemas,
            contraries={a: self.contraries[a] for a in schemas},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroundFramework):
            return NotImplemented
        return (
            self.rules == other.rules
            and self.assumptions == other.assumptions
            and self.contraries == other.contraries
            and self.constants == other.constants
        )


# --------------------------------------------------------------------------
# Parsing


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<arrow>:-)
      | (?P<ident>[a-zA-Z][a-zA-Z0-9_]*)
      | (?P<punct>[().,:=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # ident | punct | arrow | end
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, raw, line, col))  # type: ignore[arg-type]
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return tok

    def parse_term(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return tok.text

    def parse_atom(self) -> Atom:
        tok = self.next()
        if tok.kind != "ident" or is_variable(tok.text):
            raise ParseError(
                f"expected a predicate, found {tok.text or 'end of input'!r}",
                tok.line, tok.column)
        if self.peek().text != "(":
            return Atom(tok.text)
        self.next()
        args = [self.parse_term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        return Atom(tok.text, tuple(args))

    def parse_body_item(self) -> Atom | tuple[str, str]:
        tok = self.peek()
        if tok.kind == "ident" and is_variable(tok.text):
            self.next()
            self.expect("=")
            rhs = self.parse_term()
            if is_variable(rhs):
                raise ParseError("equality must bind a variable to a constant",
                                 tok.line, tok.column)
            return (tok.text, rhs)
        return self.parse_atom()


def _normalize_fact(head: Atom, equalities: list[tuple[str, str]],
                    line: int, col: int) -> Atom:
    binding: dict[str, str] = {}
    for var, const in equalities:
        if var in binding:
            raise ParseError(f"variable {var} bound by two equalities", line, col)
        binding[var] = const
    head_vars = set(head.variables())
    if head_vars != set(binding):
        raise ParseError(
            "equality fact must bind exactly the head variables", line, col)
    return head.substitute(binding)


def parse_framework(text: str) -> AbaFramework:
    """Parse ``.aba`` source into a validated flat framework.

    Equality facts ``p(A) :- A=c.`` are normalized to ground facts ``p(c).``.
    Unlabelled rules get ids ``r1, r2, ...`` in source order.
    """
    parser = _Parser(text)
    rules: list[Rule] = []
    assumptions: list[Atom] = []
    contraries: dict[Atom, Atom] = {}
    auto = 0

    while parser.peek().kind != "end":
        start = parser.peek()
        label: str | None = None
        if (start.kind == "ident" and not is_variable(start.text)
                and parser.tokens[parser.pos + 1].text == ":"):
            label = parser.next().text
            parser.next()
            start = parser.peek()

        if label is None and start.text in ("assumption", "contrary"):
            # declarations: assumption(atom).  /  contrary(atom, atom).
            keyword = parser.next().text
            parser.expect("(")
            schema = parser.parse_atom()
            if keyword == "assumption":
                parser.expect(")")
                parser.expect(".")
                assumptions.append(schema)
            else:
                parser.expect(",")
                contrary = parser.parse_atom()
                parser.expect(")")
                parser.expect(".")
                if schema in contraries:
                    raise ParseError(f"duplicate contrary for {schema}",
                                     start.line, start.column)
                contraries[schema] = contrary
            continue

        head = parser.parse_atom()
        tok = parser.next()
        if tok.text == ".":
            body_items: list[Atom | tuple[str, str]] = []
        elif tok.kind == "arrow":
            body_items = [parser.parse_body_item()]
            while parser.peek().text == ",":
                parser.next()
                body_items.append(parser.parse_body_item())
            parser.expect(".")
        else:
            raise ParseError(f"expected ':-' or '.', found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)

        equalities = [i for i in body_items if isinstance(i, tuple)]
        atoms = [i for i in body_items if isinstance(i, Atom)]
        if equalities and atoms:
            raise ParseError("equalities are only allowed in fact rules",
                             start.line, start.column)
        if equalities:
            head = _normalize_fact(head, equalities, start.line, start.column)
            atoms = []
        auto += 1
        rules.append(Rule(id=label or f"r{auto}", head=head, body=tuple(atoms)))

    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate rule ids")

    fw = AbaFramework(
        rules=tuple(rules),
        assumptions=tuple(assumptions),
        contraries=contraries,
    )
    return fw.validated()


def parse_atom(text: str) -> Atom:
    """Parse a single atom such as ``s_1(img_7)``."""
    parser = _Parser(text)
    atom = parser.parse_atom()
    tok = parser.peek()
    if tok.text == ".":
        parser.next()
        tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return atom


def serialize_framework(fw: AbaFramework, header: str | None = None) -> str:
    """Render a framework as ``.aba`` text; parse(serialize(fw)) == fw."""
    lines: list[str] = []
    if header:
        lines.extend(f"% {line}" for line in header.splitlines())
    lines.append(f"% {len(fw.rules)} rules, {len(fw.assumptions)} assumptions.")
    for i, rule in enumerate(fw.rules):
        prefix = "" if rule.id == f"r{i + 1}" else f"{rule.id}: "
        lines.append(f"{prefix}{rule}")
    if fw.assumptions:
        lines.append("")
    for schema in fw.assumptions:
        lines.append(f"assumption({schema}).")
        lines.append(f"contrary({schema}, {fw.contraries[schema]}).")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Grounding


def _instances(atom_vars: tuple[str, ...], constants: tuple[str, ...]) -> Iterator[dict[str, str]]:
    if not atom_vars:
        yield {}
        return
    for combo in product(constants, repeat=len(atom_vars)):
        yield dict(zip(atom_vars, combo))


def ground(fw: AbaFramework, extra_constants: Iterable[str] = ()) -> GroundFramework:
    """Instantiate every rule and assumption schema over the Herbrand constants.

    Variables range over all constants (rule bodies act as the type guards);
    unsatisfiable instances are kept, pruning them is the solver's job.
    """
    constants = tuple(sorted(fw.constants() | set(extra_constants)))
    for c in extra_constants:
        if not is_constant(c):
            raise ValidationError(f"extra constant {c!r} is not a constant")
    if not constants and fw.has_variables():
        raise ValidationError(
            "cannot ground a framework with variables over an empty constant set"
        )

    rules: list[GroundRule] = []
    for rule in fw.rules:
        rvars = rule.variables()
        if not rvars:
            rules.append(GroundRule(rule.head, rule.body, rule.id))
            continue
        for binding in _instances(rvars, constants):
            rules.append(
                GroundRule(
                    rule.head.substitute(binding),
                    tuple(a.substitute(binding) for a in rule.body),
                    rule.id,
                )
            )

    assumptions: set[Atom] = set()
    contraries: dict[Atom, Atom] = {}
    for schema in fw.assumptions:
        contrary = fw.contraries[schema]
        for binding in _instances(schema.variables(), constants):
            inst = schema.substitute(binding)
            assumptions.add(inst)
            contraries[inst] = contrary.substitute(binding)

    return GroundFramework(
        rules=tuple(rules),
        assumptions=frozenset(assumptions),
        contraries=contraries,
        constants=frozenset(constants),
    )
