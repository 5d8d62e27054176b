"""Learning argumentation frameworks from labeled fact sets.

The learner runs a two-phase default-with-exceptions search.  Phase 1
enumerates candidate top rules of the shape::

    target(A) :- image(A), alpha_1(A)                          (object-free)
    target(A) :- in(A,B), props(B), alpha_1(B,A)               (one object)
    target(A) :- in(A,B), props(B), in(A,C), props(C)[, rel], alpha_1(B,A)

in increasing body length, keeping a candidate when it derives the target for
every positive example.  Phase 2 greedily adds exception rules on the
assumption's contrary (``c_alpha_1(X,A) :- prop(X), image(A)``) that defeat
the witness bindings of covered negatives while every positive keeps at least
one witness.  When negatives stay covered the search backtracks to the next
candidate.  Tie-breaking is deterministic: shorter bodies first, then
lexicographic rule text.

Coverage inside the search is evaluated on per-image witness tables, which for
this hypothesis space coincide with cautious acceptance; the returned
framework is always re-verified with the full semantics engine before it is
handed back (see verify_solution).
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from nal.core import AbaFramework, Atom, Rule, ValidationError, ground, parse_framework
from nal.semantics import NoStableExtensionError, is_cautious

__all__ = [
    "ExampleSet",
    "LearnerConfig",
    "LearntFramework",
    "SolutionReport",
    "InsufficientExamplesError",
    "SearchFailureError",
    "SearchTimeoutError",
    "select_examples",
    "learn",
    "verify_solution",
    "learn_cascade",
    "target_predicate",
    "parse_learn_manifest",
    "facts_by_image",
]

_MAX_EXCEPTION_RULES = 12
_KMEANS_ITERATIONS = 50
_SLOT_CAPACITY = 10


class InsufficientExamplesError(Exception):
    def __init__(self, label: str, have: int, want: int):
        super().__init__(f"label {label!r}: have {have} usable images, want {want}")
        self.label = label
        self.have = have
        self.want = want


class SearchFailureError(Exception):
    """No hypothesis within the configured bounds separates the examples."""


class SearchTimeoutError(Exception):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    max_body_literals: int = 4
    max_object_vars: int = 2
    allow_relations: bool = True
    max_exception_literals: int = 2
    seed: int = 0
    timeout: float | None = None

    def __post_init__(self) -> None:
        for name in ("max_body_literals", "max_object_vars", "max_exception_literals"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class ExampleSet:
    positives: tuple[Atom, ...]
    negatives: tuple[Atom, ...]
    background: AbaFramework  # fact-only framework describing the example images

    def validated(self) -> "ExampleSet":
        overlap = set(self.positives) & set(self.negatives)
        if overlap:
            raise ValidationError(
                f"examples listed as both positive and negative: {sorted(map(str, overlap))}"
            )
        known = set(facts_by_image([r.head for r in self.background.rules]))
        for atom in (*self.positives, *self.negatives):
            if len(atom.args) != 1:
                raise ValidationError(f"example atom {atom} must have a single image argument")
            if atom.args[0] not in known:
                raise ValidationError(f"example image {atom.args[0]} has no background facts")
        return self


@dataclass(frozen=True)
class LearntFramework:
    """Learned rules merged with their training background, plus bookkeeping."""

    framework: AbaFramework
    learned_rule_ids: tuple[str, ...]
    assumption_names: tuple[str, ...]
    target: str

    def rules_only(self) -> AbaFramework:
        """The learned rules with their assumption/contrary declarations, no facts."""
        ids = set(self.learned_rule_ids)
        return AbaFramework(
            rules=tuple(r for r in self.framework.rules if r.id in ids),
            assumptions=self.framework.assumptions,
            contraries=dict(self.framework.contraries),
        )


# --------------------------------------------------------------------------
# Fact views


def facts_by_image(facts: list[Atom]) -> dict[str, list[Atom]]:
    """Group a flat fact list by the image constant each fact describes."""
    owner: dict[str, str] = {}
    for atom in facts:
        if atom.predicate == "image" and len(atom.args) == 1:
            owner[atom.args[0]] = atom.args[0]
    for atom in facts:
        if atom.predicate == "in" and len(atom.args) == 2 and atom.args[0] in owner:
            owner[atom.args[1]] = atom.args[0]
    grouped: dict[str, list[Atom]] = {img: [] for img in set(owner.values())}
    for atom in facts:
        images = {owner[t] for t in atom.args if t in owner}
        for img in images:
            grouped[img].append(atom)
    return grouped


@dataclass(frozen=True)
class _ImageView:
    image: str
    objects: tuple[str, ...]
    props: dict[str, frozenset[str]]
    relations: frozenset[tuple[str, str, str]]  # (relation, from, to)


def _build_view(image: str, facts: list[Atom]) -> _ImageView:
    objects = tuple(a.args[1] for a in facts if a.predicate == "in" and a.args[0] == image)
    obj_set = set(objects)
    props: dict[str, set[str]] = {o: set() for o in objects}
    relations = set()
    for atom in facts:
        if len(atom.args) == 1 and atom.args[0] in obj_set:
            props[atom.args[0]].add(atom.predicate)
        elif (len(atom.args) == 2 and atom.predicate != "in"
              and atom.args[0] in obj_set and atom.args[1] in obj_set):
            relations.add((atom.predicate, atom.args[0], atom.args[1]))
    return _ImageView(
        image=image,
        objects=objects,
        props={o: frozenset(ps) for o, ps in props.items()},
        relations=frozenset(relations),
    )


# --------------------------------------------------------------------------
# Candidate hypotheses


@dataclass(frozen=True)
class _Candidate:
    object_free: bool
    props_b: tuple[str, ...] = ()
    props_c: tuple[str, ...] | None = None  # None: single-object rule
    relation: tuple[str, str, str] | None = None  # (name, fromvar, tovar)

    def literal_count(self) -> int:
        n = 1 if self.object_free else 1 + len(self.props_b)
        if self.props_c is not None:
            n += 1 + len(self.props_c) + (1 if self.relation else 0)
        return n

    def top_rule(self, target: str, assumption: str) -> Rule:
        if self.object_free:
            body = [Atom("image", ("A",)), Atom(assumption, ("A",))]
        else:
            body = [Atom("in", ("A", "B"))]
            body += [Atom(p, ("B",)) for p in self.props_b]
            if self.props_c is not None:
                body.append(Atom("in", ("A", "C")))
                body += [Atom(p, ("C",)) for p in self.props_c]
                if self.relation:
                    name, src, dst = self.relation
                    body.append(Atom(name, (src, dst)))
            body.append(Atom(assumption, ("B", "A")))
        return Rule(id="r1", head=Atom(target, ("A",)), body=tuple(body))


def _candidates(config: LearnerConfig, props: list[str],
                relations: list[str]) -> list[_Candidate]:
    out = [_Candidate(object_free=True)]
    max_b = config.max_body_literals
    for k in range(0, min(len(props), max_b - 1) + 1):
        for combo in combinations(props, k):
            out.append(_Candidate(object_free=False, props_b=combo))
    if config.max_object_vars >= 2:
        rel_options: list[tuple[str, str, str] | None] = [None]
        if config.allow_relations:
            for name in relations:
                rel_options += [(name, "B", "C"), (name, "C", "B")]
        for rel in rel_options:
            budget = max_b - 2 - (1 if rel else 0)
            if budget < 0:
                continue
            for nb in range(0, budget + 1):
                for nc in range(0, budget - nb + 1):
                    if rel is None and nc == 0:
                        continue  # equivalent to a single-object rule
                    for pb in combinations(props, nb):
                        for pc in combinations(props, nc):
                            out.append(_Candidate(
                                object_free=False, props_b=pb,
                                props_c=pc, relation=rel,
                            ))
    keyed = [(c.literal_count(), str(c.top_rule("t", "alpha_1")), c) for c in out]
    keyed.sort(key=lambda kv: (kv[0], kv[1]))
    return [c for _, _, c in keyed]


@dataclass(frozen=True)
class _Exception:
    props: tuple[str, ...]

    def rule(self, index: int, contrary: str, object_free: bool) -> Rule:
        if object_free:
            body = [Atom("image", ("A",)), Atom("in", ("A", "B"))]
            body += [Atom(p, ("B",)) for p in self.props]
            return Rule(id=f"r{index}", head=Atom(contrary, ("A",)), body=tuple(body))
        body = [Atom(p, ("X",)) for p in self.props]
        body.append(Atom("image", ("A",)))
        return Rule(id=f"r{index}", head=Atom(contrary, ("X", "A")), body=tuple(body))


def _exception_pool(config: LearnerConfig, props: list[str]) -> list[_Exception]:
    out = []
    for k in range(1, config.max_exception_literals + 1):
        for combo in combinations(props, k):
            out.append(_Exception(props=combo))
    return out


# --------------------------------------------------------------------------
# The search


_MAX_EXCEPTION_COST = 10  # total property literals across exception rules


def _universal_patterns(pos_views: list[_ImageView]) -> list[frozenset[str]]:
    """Maximal property sets carried by at least one object in EVERY positive.

    These are the only object patterns supported by all the positive evidence;
    learned rules quantify over them.  Computed by intersecting object
    signatures across images and keeping the maximal survivors.
    """
    if not pos_views or any(not v.objects for v in pos_views):
        return []
    patterns = {frozenset(sig) for sig in pos_views[0].props.values()}
    for view in pos_views[1:]:
        sigs = set(view.props.values())
        patterns = {p & s for p in patterns for s in sigs}
        patterns.discard(frozenset())
        if not patterns:
            return []
    maximal = [
        p for p in patterns if not any(p < q for q in patterns)
    ]
    return sorted(maximal, key=lambda p: (-len(p), tuple(sorted(p))))


def _pattern_space(maximals: list[frozenset[str]]) -> list[frozenset[str]]:
    out = {
        frozenset(sub)
        for m in maximals
        for k in range(1, len(m) + 1)
        for sub in combinations(sorted(m), k)
    }
    return sorted(out, key=lambda p: (len(p), tuple(sorted(p))))


def _extend_pattern(pattern: frozenset[str],
                    maximals: list[frozenset[str]]) -> frozenset[str]:
    """The most specific universal pattern refining ``pattern`` (largest
    maximal superset; maximals are pre-sorted for deterministic ties)."""
    for m in maximals:
        if pattern <= m:
            return m
    return pattern


def _complement_kills(pattern: frozenset[str],
                      observed_sigs: set[frozenset[str]]) -> list[str] | None:
    """Exception properties whose defeat leaves exactly the pattern's objects.

    A property is a safe kill when it never co-occurs with the full pattern;
    killing all safe properties seen outside the pattern defeats every observed
    non-matching object (a non-match lacks some pattern attribute and carries a
    same-family alternative, which by exclusivity never co-occurs with it).
    """
    with_pattern: set[str] = set()
    for sig in observed_sigs:
        if pattern <= sig:
            with_pattern |= sig
    kills = sorted({
        v for sig in observed_sigs if not pattern <= sig for v in sig
    } - with_pattern)
    if len(kills) > _MAX_EXCEPTION_RULES:
        return None
    return kills


def _pattern_accepts(view: _ImageView, pattern: frozenset[str],
                     candidate: _Candidate) -> bool:
    """Does the rule <exists B matching pattern [and C matching the body's
    C-side]> fire on this image?"""
    matches_b = [o for o in view.objects if pattern <= view.props[o]]
    if not matches_b:
        return False
    if candidate.props_c is None:
        return True
    need_c = set(candidate.props_c)
    matches_c = [o for o in view.objects if need_c <= view.props[o]]
    if not matches_c:
        return False
    if candidate.relation is None:
        return True
    name, src, _ = candidate.relation
    for b in matches_b:
        for c in matches_c:
            pair = (name, b, c) if src == "B" else (name, c, b)
            if pair in view.relations:
                return True
    return False


def _phase2_object_free(candidate: _Candidate, pos_views: list[_ImageView],
                        neg_views: list[_ImageView], pool: list[_Exception],
                        deadline: float | None) -> list[_Exception] | None:
    """Object-free top rule: an exception defeats a whole image when any of its
    objects matches, so the state is just the set of still-covered negatives.

    The chosen exception patterns must share a property: a default class is
    "everything except one family of forbidden patterns", not an arbitrary
    grab-bag of per-image excuses.
    """
    def kill_map(views: list[_ImageView]) -> list[frozenset[int]]:
        out = []
        for exc in pool:
            out.append(frozenset(
                i for i, v in enumerate(views)
                if any(set(exc.props) <= v.props[o] for o in v.objects)
            ))
        return out

    pos_killed = kill_map(pos_views)
    neg_killed = kill_map(neg_views)
    usable = [i for i, exc in enumerate(pool) if not pos_killed[i]]
    reachable = frozenset().union(*(neg_killed[i] for i in usable)) if usable else frozenset()
    if not reachable >= frozenset(range(len(neg_views))):
        return None

    chosen: list[int] = []
    covered = set(range(len(neg_views)))
    cost = 0
    while covered and len(chosen) < _MAX_EXCEPTION_RULES:
        best = None
        for i in usable:
            if i in chosen:
                continue
            if chosen and not (set(pool[i].props)
                               & set.intersection(*(set(pool[j].props) for j in chosen))):
                continue
            if cost + len(pool[i].props) > _MAX_EXCEPTION_COST:
                continue
            gain = len(covered & neg_killed[i])
            if gain == 0:
                continue
            key = (-gain, len(pool[i].props), pool[i].props)
            if best is None or key < best[0]:
                best = (key, i)
        if best is None:
            return None
        chosen.append(best[1])
        cost += len(pool[best[1]].props)
        covered -= neg_killed[best[1]]
    if covered:
        return None
    return [pool[i] for i in chosen]


def _assemble(candidate: _Candidate, kills: list[_Exception], target: str,
              background: AbaFramework) -> tuple[AbaFramework, tuple[str, ...]]:
    assumption = "alpha_1"
    contrary = "c_alpha_1"
    schema_args = ("X",) if candidate.object_free else ("X", "Y")
    top = candidate.top_rule(target, assumption)
    rules = [top]
    for i, exc in enumerate(kills, start=2):
        rules.append(exc.rule(i, contrary, candidate.object_free))
    learned_ids = tuple(r.id for r in rules)

    offset = len(rules)
    facts = tuple(
        replace(rule, id=f"r{offset + i + 1}")
        for i, rule in enumerate(background.rules)
    )
    fw = AbaFramework(
        rules=tuple(rules) + facts,
        assumptions=(Atom(assumption, schema_args),),
        contraries={Atom(assumption, schema_args): Atom(contrary, schema_args)},
    )
    return fw.validated(), learned_ids


def learn(examples: ExampleSet, target: str, config: LearnerConfig = LearnerConfig()) -> LearntFramework:
    """Search for a framework accepting every positive and no negative example.

    Deterministic given the config; raises SearchFailureError when the bounded
    hypothesis space holds no solution and SearchTimeoutError past the timeout.
    """
    examples = examples.validated()
    if not examples.positives or not examples.negatives:
        raise InsufficientExamplesError(
            target,
            have=min(len(examples.positives), len(examples.negatives)),
            want=1,
        )
    deadline = None if config.timeout is None else time.monotonic() + config.timeout

    grouped = facts_by_image([r.head for r in examples.background.rules])
    views = {img: _build_view(img, facts) for img, facts in grouped.items()}
    pos_views = [views[a.args[0]] for a in examples.positives]
    neg_views = [views[a.args[0]] for a in examples.negatives]

    object_props = sorted({
        p for v in views.values() for ps in v.props.values() for p in ps
    })
    relations = sorted({r for v in views.values() for r, _, _ in v.relations})
    observed_sigs = {sig for v in views.values() for sig in v.props.values()}

    maximals = _universal_patterns(pos_views)
    p_space = _pattern_space(maximals)
    pool = _exception_pool(config, object_props)
    tried: set[tuple] = set()

    def finish(candidate: _Candidate, kills: list[_Exception]) -> LearntFramework | None:
        fw, learned_ids = _assemble(candidate, kills, target, examples.background)
        result = LearntFramework(
            framework=fw,
            learned_rule_ids=learned_ids,
            assumption_names=("alpha_1",),
            target=target,
        )
        return result if verify_solution(result, examples).passed else None

    for candidate in _candidates(config, object_props, relations):
        if deadline is not None and time.monotonic() > deadline:
            raise SearchTimeoutError("learning timed out")
        if candidate.object_free:
            kills = _phase2_object_free(candidate, pos_views, neg_views, pool, deadline)
            if kills is not None:
                result = finish(candidate, kills)
                if result is not None:
                    return result
            continue
        for pattern in p_space:
            if not set(candidate.props_b) <= pattern:
                continue
            key = (pattern, candidate.props_c, candidate.relation)
            if key in tried:
                continue
            tried.add(key)
            if not all(_pattern_accepts(v, pattern, candidate) for v in pos_views):
                continue
            if any(_pattern_accepts(v, pattern, candidate) for v in neg_views):
                continue
            final_pattern, final_candidate = _specialize(
                pattern, candidate, maximals, pos_views, neg_views, config)
            kill_props = _complement_kills(final_pattern, observed_sigs)
            if kill_props is None:
                continue
            kills = [_Exception(props=(v,)) for v in kill_props]
            result = finish(final_candidate, kills)
            if result is not None:
                return result
    raise SearchFailureError(
        f"no hypothesis within bounds separates the examples for {target!r}"
    )


def _specialize(pattern: frozenset[str], candidate: _Candidate,
                maximals: list[frozenset[str]], pos_views: list[_ImageView],
                neg_views: list[_ImageView],
                config: LearnerConfig) -> tuple[frozenset[str], _Candidate]:
    """Refine a winning hypothesis to a more specific universal form.

    The surviving pattern and the second object's body properties are raised
    to maximal universal patterns (within the body-literal budget), and a
    bare single-object rule gains a second existential conjunct when the
    positives all share another object pattern that is actual evidence of a
    second object: at least two properties, no attribute in common with the
    first pattern, and rare among the negatives (patterns most negatives
    carry too are universal by chance, not by concept).  Refinements only
    shrink the accepted set, so negatives stay rejected; one that no longer
    fires on every positive (possible when a relation couples the objects)
    is rolled back.
    """
    extended = _extend_pattern(pattern, maximals)
    best_candidate = candidate
    if candidate.props_c is not None:
        budget = config.max_body_literals - 2 - (1 if candidate.relation else 0)
        need = set(candidate.props_c)
        options = sorted(
            (m for m in maximals if need <= m and len(m) <= budget),
            key=lambda m: (-len(m), tuple(sorted(m))),
        )
        if options and set(options[0]) != need:
            best_candidate = _Candidate(
                object_free=False,
                props_b=candidate.props_b,
                props_c=tuple(sorted(options[0])),
                relation=candidate.relation,
            )
    else:
        def negative_rate(m: frozenset[str]) -> int:
            return sum(
                1 for v in neg_views
                if any(m <= v.props[o] for o in v.objects)
            )

        budget = config.max_body_literals - 2
        second = sorted(
            (m for m in maximals
             if len(m) >= 2 and len(m) <= budget and not m & extended
             and 3 * negative_rate(m) <= len(neg_views)),
            key=lambda m: (-len(m), tuple(sorted(m))),
        )
        if second and config.max_object_vars >= 2:
            best_candidate = _Candidate(
                object_free=False,
                props_b=candidate.props_b,
                props_c=tuple(sorted(second[0])),
                relation=None,
            )
    for pat, cand in ((extended, best_candidate), (extended, candidate),
                      (pattern, best_candidate), (pattern, candidate)):
        if all(_pattern_accepts(v, pat, cand) for v in pos_views):
            return pat, cand
    return pattern, candidate


# --------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class ExampleOutcome:
    atom: Atom
    expected: bool
    accepted: bool | None  # None: no stable extension for this image
    correct: bool


@dataclass(frozen=True)
class SolutionReport:
    outcomes: tuple[ExampleOutcome, ...]
    passed: bool

    @property
    def n_correct(self) -> int:
        return sum(o.correct for o in self.outcomes)


def verify_solution(fw: AbaFramework | LearntFramework, examples: ExampleSet) -> SolutionReport:
    """Ground the framework per example image and check cautious acceptance.

    Passes iff every positive example atom is accepted and no negative one is;
    an image without stable extensions counts as a failure for its example.
    """
    background = [r.head for r in examples.background.rules]
    if isinstance(fw, LearntFramework):
        rule_part = fw.rules_only()
    else:
        # split a plain framework into its rule part and its own ground facts
        rule_part = AbaFramework(
            rules=tuple(r for r in fw.rules if r.body),
            assumptions=fw.assumptions,
            contraries=dict(fw.contraries),
        )
        known = set(background)
        background += [
            r.head for r in fw.rules if not r.body and r.head not in known
        ]
    grouped = facts_by_image(background)

    outcomes = []
    for atom, expected in [(a, True) for a in examples.positives] + [
        (a, False) for a in examples.negatives
    ]:
        image = atom.args[0]
        facts = grouped.get(image, [])
        accepted = classify_atom(rule_part, facts, atom)
        correct = accepted is not None and accepted == expected
        outcomes.append(ExampleOutcome(atom, expected, accepted, correct))
    return SolutionReport(
        outcomes=tuple(outcomes), passed=all(o.correct for o in outcomes)
    )


def classify_atom(rule_part: AbaFramework, facts: list[Atom], atom: Atom) -> bool | None:
    """Cautious acceptance of ``atom`` under rules + facts; None when no
    stable extension exists."""
    offset = len(rule_part.rules)
    fact_rules = tuple(
        Rule(id=f"f{i + 1 + offset}", head=f) for i, f in enumerate(facts)
    )
    fw = AbaFramework(
        rules=rule_part.rules + fact_rules,
        assumptions=rule_part.assumptions,
        contraries=dict(rule_part.contraries),
    )
    gfw = ground(fw)
    try:
        return is_cautious(gfw, atom)
    except NoStableExtensionError:
        return None


# --------------------------------------------------------------------------
# Example selection


def _encode_images(
    images: list[str], facts_per_image: dict[str, list[Atom]]
) -> np.ndarray:
    """Fixed-length vectors: per-slot one-hot attribute encodings, objects in a
    canonical order (attribute values, then object id)."""
    all_props = sorted({
        a.predicate
        for img in images
        for a in facts_per_image[img]
        if len(a.args) == 1 and a.predicate != "image"
    })
    prop_index = {p: i for i, p in enumerate(all_props)}
    width = len(all_props) + 1
    vectors = np.zeros((len(images), _SLOT_CAPACITY * width))
    for row, img in enumerate(images):
        view = _build_view(img, facts_per_image[img])
        ranked = sorted(
            view.objects,
            key=lambda o: (tuple(sorted(view.props[o])), o),
        )[:_SLOT_CAPACITY]
        for slot, obj in enumerate(ranked):
            base = slot * width
            vectors[row, base] = 1.0  # presence
            for p in view.props[obj]:
                vectors[row, base + 1 + prop_index[p]] = 1.0
    return vectors


def _kmeans_representatives(
    images: list[str], vectors: np.ndarray, k: int, rng: np.random.Generator
) -> list[str]:
    """Lloyd's algorithm with k-means++ seeding; one representative per cluster
    (nearest to the centroid, ties and degenerate clusters resolved by id)."""
    n = len(images)
    order = np.argsort(np.array(images))
    vectors = vectors[order]
    images = [images[i] for i in order]

    centroids = np.empty((k, vectors.shape[1]))
    centroids[0] = vectors[rng.integers(n)]
    dist = np.sum((vectors - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = dist.sum()
        if total <= 0:
            centroids[j] = vectors[rng.integers(n)]
        else:
            centroids[j] = vectors[rng.choice(n, p=dist / total)]
        dist = np.minimum(dist, np.sum((vectors - centroids[j]) ** 2, axis=1))

    for _ in range(_KMEANS_ITERATIONS):
        d2 = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        moved = False
        for j in range(k):
            members = vectors[assign == j]
            if len(members):
                new = members.mean(axis=0)
                if not np.allclose(new, centroids[j]):
                    centroids[j] = new
                    moved = True
        if not moved:
            break

    d2 = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    chosen: list[str] = []
    taken: set[str] = set()
    for j in range(k):
        members = [
            (d2[i, j], images[i]) for i in range(n)
            if assign[i] == j and images[i] not in taken
        ]
        if not members:
            continue
        members.sort()
        chosen.append(members[0][1])
        taken.add(members[0][1])
    remaining = [img for img in images if img not in taken]
    while len(chosen) < k and remaining:
        chosen.append(remaining.pop(0))
    return chosen


def select_examples(
    facts_per_image: dict[str, list[Atom]],
    labels: dict[str, str],
    confidences: dict[str, float],
    n_pos: int,
    n_neg: int,
    threshold: float,
    seed: int,
    target: str,
    positive_label: str | None = None,
) -> ExampleSet:
    """Pick diverse training examples: prune low-confidence images, cluster the
    rest of each polarity with K-means, take one representative per cluster."""
    positive_label = positive_label if positive_label is not None else target
    usable = [img for img in sorted(labels) if confidences.get(img, 0.0) >= threshold]
    pos_pool = [img for img in usable if labels[img] == positive_label]
    neg_pool = [img for img in usable if labels[img] != positive_label]
    if len(pos_pool) < n_pos:
        raise InsufficientExamplesError(positive_label, len(pos_pool), n_pos)
    if len(neg_pool) < n_neg:
        raise InsufficientExamplesError(f"not_{positive_label}", len(neg_pool), n_neg)

    rng = np.random.default_rng(seed)
    chosen_pos = _kmeans_representatives(
        pos_pool, _encode_images(pos_pool, facts_per_image), n_pos, rng
    ) if n_pos else []
    chosen_neg = _kmeans_representatives(
        neg_pool, _encode_images(neg_pool, facts_per_image), n_neg, rng
    ) if n_neg else []

    facts: list[Atom] = []
    for img in chosen_pos + chosen_neg:
        facts.extend(facts_per_image[img])
    background = AbaFramework(
        rules=tuple(Rule(id=f"r{i + 1}", head=f) for i, f in enumerate(facts))
    )
    return ExampleSet(
        positives=tuple(Atom(target, (img,)) for img in chosen_pos),
        negatives=tuple(Atom(target, (img,)) for img in chosen_neg),
        background=background,
    ).validated()


# --------------------------------------------------------------------------
# Cascades and the command-string manifest


def target_predicate(class_id: str) -> str:
    """s1 -> s_1, c3 -> c_3; leaves other names untouched."""
    m = re.fullmatch(r"([a-z]+)(\d+)", class_id)
    return f"{m.group(1)}_{m.group(2)}" if m else class_id


def learn_cascade(
    examples_by_class: dict[str, ExampleSet],
    order: list[str],
    config: LearnerConfig = LearnerConfig(),
) -> list[LearntFramework]:
    """One framework per non-final class: stage i separates order[i] from the
    remaining classes; inference applies stages in order, falling through to
    the last class on rejection."""
    if len(order) < 2:
        raise ValueError("a cascade needs at least two classes")
    results = []
    for i, cls in enumerate(order[:-1]):
        target = target_predicate(cls)
        own = examples_by_class[cls]
        pos_images = [a.args[0] for a in own.positives]

        rest_pools = [
            [a.args[0] for a in examples_by_class[c].positives] for c in order[i + 1:]
        ]
        neg_images: list[str] = []
        j = 0
        while len(neg_images) < len(pos_images) and any(rest_pools):
            pool = rest_pools[j % len(rest_pools)]
            if pool:
                neg_images.append(pool.pop(0))
            j += 1

        facts: list[Atom] = [r.head for r in own.background.rules]
        seen = set(map(str, facts))
        for c in order[i + 1:]:
            for rule in examples_by_class[c].background.rules:
                if str(rule.head) not in seen:
                    facts.append(rule.head)
                    seen.add(str(rule.head))
        grouped = facts_by_image(facts)
        stage_facts = [
            f for img in pos_images + neg_images for f in grouped.get(img, [])
        ]
        background = AbaFramework(
            rules=tuple(Rule(id=f"r{k + 1}", head=f) for k, f in enumerate(stage_facts))
        )
        stage = ExampleSet(
            positives=tuple(Atom(target, (img,)) for img in pos_images),
            negatives=tuple(Atom(target, (img,)) for img in neg_images),
            background=background,
        )
        results.append(learn(stage, target, config))
    return results


_MANIFEST_RE = re.compile(
    r"aba_asp\(\s*'(?P<file>[^']+)'\s*,\s*\[(?P<pos>[^\]]*)\]\s*,\s*\[(?P<neg>[^\]]*)\]\s*\)\s*\.?",
    re.DOTALL,
)


def parse_learn_manifest(text: str, base_dir: str | Path = ".") -> ExampleSet:
    """Parse a command string ``aba_asp('file.aba', [e_pos], [e_neg]).`` into an
    ExampleSet; the framework file is resolved relative to ``base_dir``."""
    from nal.core import parse_atom

    m = _MANIFEST_RE.search(text)
    if m is None:
        raise ValidationError("not a valid aba_asp(...) command string")
    background = parse_framework((Path(base_dir) / m.group("file")).read_text())

    def atom_list(chunk: str) -> tuple[Atom, ...]:
        parts = re.findall(r"[a-z][a-zA-Z0-9_]*(?:\([^()]*\))?", chunk)
        return tuple(parse_atom(p) for p in parts)

    return ExampleSet(
        positives=atom_list(m.group("pos")),
        negatives=atom_list(m.group("neg")),
        background=background,
    ).validated()
