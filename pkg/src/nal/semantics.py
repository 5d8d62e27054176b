"""Stable-extension semantics for ground flat frameworks.

Extensions are computed at the assumption level: a set of ground assumptions
Δ is stable iff (a) the closure of the rules plus Δ contains no contrary of a
member of Δ, and (b) it contains the contrary of every non-member.  Arguments
are only materialized on demand (for explanations) since argument sets can be
exponential even when assumption sets are tiny.

The module also carries the translation of a flat framework into a normal
logic program (each body assumption becomes negation-as-failure of its
contrary) together with a brute-force stable-model enumerator, used as an
independent oracle for the extension computation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from nal.core import (
    AbaFramework,
    Atom,
    GroundFramework,
    Rule,
    ValidationError,
    _instances,
    is_constant,
)

__all__ = [
    "NoStableExtensionError",
    "ResourceLimitError",
    "Extension",
    "Argument",
    "Attack",
    "LogicProgram",
    "LpRule",
    "derive_closure",
    "stable_extensions",
    "is_cautious",
    "cautious_atoms",
    "construct_arguments",
    "compute_attacks",
    "to_logic_program",
    "brute_force_stable_models",
]

TRUE = Atom("true")  # leaf marker for fact derivations


class NoStableExtensionError(Exception):
    """The framework admits no stable extension (degenerate fact sets do this)."""


class ResourceLimitError(Exception):
    pass


@dataclass(frozen=True)
class Extension:
    """A stable assumption set together with its derived-atom closure."""

    assumptions_in: frozenset[Atom]
    closure: frozenset[Atom]


@dataclass(frozen=True)
class ArgumentNode:
    atom: Atom
    rule_id: str | None  # None on leaves (assumptions and the true marker)
    children: tuple["ArgumentNode", ...] = ()

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        tag = f" [{self.rule_id}]" if self.rule_id else ""
        lines = [f"{pad}{self.atom}{tag}"]
        for child in self.children:
            lines.append(child.render(indent + 1))
        return "\n".join(lines)


@dataclass(frozen=True)
class Argument:
    """A finite derivation tree: claim at the root, assumptions or true at leaves."""

    claim: Atom
    support_assumptions: frozenset[Atom]
    support_rules: frozenset[str]
    tree: ArgumentNode

    def __str__(self) -> str:
        support = ",".join(sorted(map(str, self.support_assumptions)))
        rules = ",".join(sorted(self.support_rules))
        return f"{{{support}}} |-{{{rules}}} {self.claim}"


@dataclass(frozen=True)
class Attack:
    attacker: Argument
    target: Argument
    undercut_assumption: Atom


class _RuleIndex:
    """Integer-indexed ground rules for linear-time closure computation."""

    def __init__(self, gfw: GroundFramework):
        self.atom_ids: dict[Atom, int] = {}
        self.atoms: list[Atom] = []

        def intern(atom: Atom) -> int:
            idx = self.atom_ids.get(atom)
            if idx is None:
                idx = len(self.atoms)
                self.atom_ids[atom] = idx
                self.atoms.append(atom)
            return idx

        self.heads: list[int] = []
        self.body_sizes: list[int] = []
        self.watchers: dict[int, list[int]] = {}
        self.facts: list[int] = []
        for rule in gfw.rules:
            rid = len(self.heads)
            self.heads.append(intern(rule.head))
            body = {intern(a) for a in rule.body}
            self.body_sizes.append(len(body))
            if not body:
                self.facts.append(rid)
            for aid in body:
                self.watchers.setdefault(aid, []).append(rid)
        for a in gfw.assumptions:
            intern(a)
            intern(gfw.contraries[a])

    def closure_ids(self, delta_ids: Iterable[int]) -> set[int]:
        derived: set[int] = set()
        remaining = self.body_sizes.copy()
        queue: deque[int] = deque()

        def add(aid: int) -> None:
            if aid not in derived:
                derived.add(aid)
                queue.append(aid)

        for rid in self.facts:
            add(self.heads[rid])
        for aid in delta_ids:
            add(aid)
        while queue:
            aid = queue.popleft()
            for rid in self.watchers.get(aid, ()):
                remaining[rid] -= 1
                if remaining[rid] == 0:
                    add(self.heads[rid])
        return derived

    def closure(self, delta: Iterable[Atom]) -> set[Atom]:
        ids = self.closure_ids(self.atom_ids[a] for a in delta)
        return {self.atoms[i] for i in ids}


def derive_closure(gfw: GroundFramework, delta: Iterable[Atom] = ()) -> frozenset[Atom]:
    """Least forward-chaining fixpoint of the ground rules with Δ as extra facts.

    Monotone in Δ and always includes Δ itself.
    """
    delta = frozenset(delta)
    unknown = delta - gfw.assumptions
    if unknown:
        raise ValidationError(
            f"delta contains non-assumptions: {sorted(map(str, unknown))}"
        )
    return frozenset(_RuleIndex(gfw).closure(delta))


def _sort_key(atom: Atom) -> tuple:
    return (atom.predicate, atom.args)


def _stable_sets(
    gfw: GroundFramework, index: _RuleIndex, max_enumerated: int
) -> list[tuple[frozenset[Atom], frozenset[Atom]]]:
    assumptions = sorted(gfw.assumptions, key=_sort_key)
    aid = {a: index.atom_ids[a] for a in assumptions}
    cid = {a: index.atom_ids[gfw.contraries[a]] for a in assumptions}

    # Alternating bound analysis: assumptions whose contrary is derivable from
    # the rules plus the forced-in set can never be in a stable set; assumptions
    # whose contrary is underivable even with every remaining assumption granted
    # must be in all of them.  Iterate both bounds to a fixpoint, then enumerate
    # only the genuinely contested assumptions.
    forced_in: set[Atom] = set()
    excluded: set[Atom] = set()
    while True:
        lo = index.closure_ids(aid[a] for a in forced_in)
        hi = index.closure_ids(aid[a] for a in assumptions if a not in excluded)
        new_out = {a for a in assumptions if a not in excluded and cid[a] in lo}
        new_in = {a for a in assumptions if a not in forced_in and cid[a] not in hi}
        if new_in & new_out:
            return []  # an assumption both required and forbidden: no stable set
        if not new_in and not new_out:
            break
        forced_in |= new_in
        excluded |= new_out

    contested = [a for a in assumptions if a not in forced_in and a not in excluded]
    if len(contested) > max_enumerated:
        raise ResourceLimitError(
            f"{len(contested)} undecided ground assumptions exceed the "
            f"enumeration bound of {max_enumerated}"
        )

    base = [aid[a] for a in forced_in]
    results = []
    for bits in range(1 << len(contested)):
        chosen = [contested[i] for i in range(len(contested)) if bits >> i & 1]
        delta = forced_in | set(chosen)
        cl = index.closure_ids(base + [aid[a] for a in chosen])
        if any(cid[a] in cl for a in delta):
            continue
        if any(cid[a] not in cl for a in assumptions if a not in delta):
            continue
        closure = frozenset(index.atoms[i] for i in cl)
        results.append((frozenset(delta), closure))

    results.sort(key=lambda pair: tuple(map(_sort_key, sorted(pair[0], key=_sort_key))))
    return results


def stable_extensions(gfw: GroundFramework, max_enumerated: int = 24) -> list[Extension]:
    """All stable extensions, ordered lexicographically on their assumption sets.

    Raises ResourceLimitError when the contested-assumption count (after the
    bound analysis) exceeds ``max_enumerated``; returns [] when no stable
    extension exists.
    """
    index = _RuleIndex(gfw)
    return [
        Extension(assumptions_in=delta, closure=closure)
        for delta, closure in _stable_sets(gfw, index, max_enumerated)
    ]


def is_cautious(gfw: GroundFramework, atom: Atom, max_enumerated: int = 24) -> bool:
    """True iff atom belongs to the closure of every stable extension."""
    exts = stable_extensions(gfw, max_enumerated)
    if not exts:
        raise NoStableExtensionError("framework admits no stable extension")
    return all(atom in e.closure for e in exts)


def cautious_atoms(gfw: GroundFramework, max_enumerated: int = 24) -> frozenset[Atom]:
    """Intersection of all stable-extension closures."""
    exts = stable_extensions(gfw, max_enumerated)
    if not exts:
        raise NoStableExtensionError("framework admits no stable extension")
    out = set(exts[0].closure)
    for e in exts[1:]:
        out &= e.closure
    return frozenset(out)


# --------------------------------------------------------------------------
# Arguments and attacks


def construct_arguments(
    gfw: GroundFramework, claim: Atom, limit: int = 64
) -> list[Argument]:
    """Enumerate distinct arguments for ``claim`` by backward chaining.

    A branch never repeats an atom, which forbids infinite trees without losing
    any finite argument.  At most ``limit`` arguments are returned.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    by_head: dict[Atom, list] = {}
    for rule in gfw.rules:
        by_head.setdefault(rule.head, []).append(rule)

    def prove(atom: Atom, path: frozenset[Atom]) -> Iterator[ArgumentNode]:
        if atom in gfw.assumptions:
            yield ArgumentNode(atom, None)
        new_path = path | {atom}
        for rule in by_head.get(atom, ()):
            if not rule.body:
                yield ArgumentNode(atom, rule.schema_id, (ArgumentNode(TRUE, None),))
                continue
            if any(b in new_path for b in rule.body):
                continue
            for children in product(*(list(prove(b, new_path)) for b in rule.body)):
                yield ArgumentNode(atom, rule.schema_id, tuple(children))

    def collect(node: ArgumentNode, assumptions: set[Atom], rules: set[str]) -> None:
        if node.rule_id is not None:
            rules.add(node.rule_id)
        elif node.atom in gfw.assumptions:
            assumptions.add(node.atom)
        for child in node.children:
            collect(child, assumptions, rules)

    out: list[Argument] = []
    seen: set[ArgumentNode] = set()
    for tree in prove(claim, frozenset()):
        if tree in seen:
            continue
        seen.add(tree)
        assumptions: set[Atom] = set()
        rules: set[str] = set()
        collect(tree, assumptions, rules)
        out.append(Argument(claim, frozenset(assumptions), frozenset(rules), tree))
        if len(out) >= limit:
            break
    return out


def compute_attacks(args: Iterable[Argument], gfw: GroundFramework) -> list[Attack]:
    """All pairwise attacks: attacker's claim is the contrary of a supporting assumption."""
    args = list(args)
    attacks = []
    for attacker in args:
        for target in args:
            for assumption in sorted(target.support_assumptions, key=_sort_key):
                if gfw.contraries.get(assumption) == attacker.claim:
                    attacks.append(Attack(attacker, target, assumption))
    return attacks


# --------------------------------------------------------------------------
# Logic-program translation and the brute-force stable-model oracle


@dataclass(frozen=True)
class LpRule:
    head: Atom
    positive: tuple[Atom, ...] = ()
    negative: tuple[Atom, ...] = ()  # atoms under negation-as-failure

    def __str__(self) -> str:
        items = [str(a) for a in self.positive] + [f"not {a}" for a in self.negative]
        if not items:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(items)}."


@dataclass(frozen=True)
class LogicProgram:
    rules: tuple[LpRule, ...]

    def to_text(self) -> str:
        return "\n".join(str(r) for r in self.rules) + "\n"


def to_logic_program(fw: AbaFramework | GroundFramework) -> LogicProgram:
    """Replace each body assumption with negation-as-failure of its contrary.

    Rule count is preserved and assumption/contrary declarations are dropped.
    The stable models of the result coincide with the stable-extension closures
    whenever no contrary is itself an assumption.
    """
    if isinstance(fw, GroundFramework):
        fw = fw.as_framework()
    out: list[LpRule] = []
    for rule in fw.rules:
        positive: list[Atom] = []
        negative: list[Atom] = []
        for atom in rule.body:
            schema = fw.assumption_schema_for(atom)
            if schema is None:
                positive.append(atom)
            else:
                binding = {}
                for p, a in zip(schema.args, atom.args):
                    if p != a:
                        binding[p] = a
                negative.append(fw.contraries[schema].substitute(binding))
        out.append(LpRule(rule.head, tuple(positive), tuple(negative)))
    return LogicProgram(tuple(out))


def _ground_program(lp: LogicProgram, constants: Iterable[str]) -> list[LpRule]:
    constants = tuple(sorted(set(constants)))
    grounded: list[LpRule] = []
    for rule in lp.rules:
        seen: dict[str, None] = {}
        for atom in (rule.head, *rule.positive, *rule.negative):
            for v in atom.variables():
                seen.setdefault(v)
        rvars = tuple(seen)
        if not rvars:
            grounded.append(rule)
            continue
        if not constants:
            raise ValidationError("cannot ground program variables: no constants")
        for binding in _instances(rvars, constants):
            grounded.append(
                LpRule(
                    rule.head.substitute(binding),
                    tuple(a.substitute(binding) for a in rule.positive),
                    tuple(a.substitute(binding) for a in rule.negative),
                )
            )
    return grounded


def brute_force_stable_models(
    lp: LogicProgram, constants: Iterable[str] = (), max_choice_atoms: int = 20
) -> list[frozenset[Atom]]:
    """All stable models in the Gelfond-Lifschitz sense, by exhaustive search.

    Candidate interpretations range over truth assignments to the atoms that
    appear negated in the ground program; each assignment's reduct is solved to
    its least model and kept when it reproduces the assignment.
    """
    grounded = _ground_program(lp, constants)
    choice = sorted({a for r in grounded for a in r.negative}, key=_sort_key)
    if len(choice) > max_choice_atoms:
        raise ResourceLimitError(
            f"{len(choice)} negated atoms exceed the bound of {max_choice_atoms}"
        )

    models: list[frozenset[Atom]] = []
    for bits in range(1 << len(choice)):
        assumed_true = {choice[i] for i in range(len(choice)) if bits >> i & 1}
        # Gelfond-Lifschitz reduct w.r.t. the assignment
        reduct = [
            (r.head, r.positive)
            for r in grounded
            if not any(n in assumed_true for n in r.negative)
        ]
        least = _least_model(reduct)
        if {a for a in choice if a in least} == assumed_true:
            model = frozenset(least)
            if model not in models:
                models.append(model)
    models.sort(key=lambda m: tuple(sorted(map(_sort_key, m))))
    return models


def _least_model(rules: list[tuple[Atom, tuple[Atom, ...]]]) -> set[Atom]:
    derived: set[Atom] = set()
    remaining = [len(set(body)) for _, body in rules]
    watchers: dict[Atom, list[int]] = {}
    queue: deque[Atom] = deque()

    def add(atom: Atom) -> None:
        if atom not in derived:
            derived.add(atom)
            queue.append(atom)

    for i, (head, body) in enumerate(rules):
        if not body:
            add(head)
        for b in set(body):
            watchers.setdefault(b, []).append(i)
    while queue:
        atom = queue.popleft()
        for i in watchers.get(atom, ()):
            remaining[i] -= 1
            if remaining[i] == 0:
                add(rules[i][0])
    return derived
