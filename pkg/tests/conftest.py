import pytest

from nal.core import AbaFramework, Atom, Rule, parse_framework
from nal.learning import ExampleSet, target_predicate
from nal.scenes import generate_scene, scene_to_facts

# Two-image fixture: both images contain a circle, the second also a square;
# an image is in the class if it has a circle, unless it also has a square.
TWO_IMAGE_SOURCE = """
circle(A) :- A=img_1.
circle(A) :- A=img_2.
square(A) :- A=img_2.
c_1(A) :- circle(A), alpha(A).
c_alpha(A) :- square(A).
assumption(alpha(A)).
contrary(alpha(A), c_alpha(A)).
"""


@pytest.fixture(scope="session")
def two_image_framework():
    return parse_framework(TWO_IMAGE_SOURCE)


def atom(text: str) -> Atom:
    from nal.core import parse_atom

    return parse_atom(text)


def fact_framework(facts: list[Atom]) -> AbaFramework:
    return AbaFramework(
        rules=tuple(Rule(id=f"r{i + 1}", head=f) for i, f in enumerate(facts))
    )


def scene_example_set(class_id: str, n_pos: int, n_neg: int,
                      seed0: int = 100) -> ExampleSet:
    """Build a small training set directly from generated scenes."""
    target = target_predicate(class_id)
    facts, pos, neg = [], [], []
    i = 0
    for polarity, count, bucket in ((True, n_pos, pos), (False, n_neg, neg)):
        for _ in range(count):
            scene = generate_scene(class_id, polarity, seed0 + i,
                                   image_id=f"img_{i}")
            facts.extend(scene_to_facts(scene))
            bucket.append(Atom(target, (f"img_{i}",)))
            i += 1
    return ExampleSet(
        positives=tuple(pos), negatives=tuple(neg),
        background=fact_framework(facts),
    ).validated()
