"""The full binary loop: dataset, example selection, learning, evaluation.

Learns class s1 ("contains a blue square") from 10+10 examples and evaluates
on the held-out split.  The learned top rule keeps an assumption per candidate
object; exception rules defeat the objects that don't fit the pattern.
"""

import tempfile
from pathlib import Path

from nal import learn, select_examples, serialize_framework, target_predicate
from nal.pipeline import evaluate_binary, explain, load_data
from nal.scenes import generate_dataset
from nal import parse_atom

CLASS = "s1"

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp) / "data"
    generate_dataset(root, "shapes", CLASS, n=900, seed=0)
    data = load_data(root)
    print(f"dataset: {len(data.image_ids('train'))} train / "
          f"{len(data.image_ids('test'))} test scenes")

    facts = data.facts_per_image("train")
    labels = {i: data.labels[i] for i in facts}
    confidences = {i: data.confidences[i] for i in facts}
    target = target_predicate(CLASS)
    examples = select_examples(facts, labels, confidences, n_pos=10, n_neg=10,
                               threshold=0.7, seed=0, target=target,
                               positive_label=CLASS)
    print("selected examples:", [str(a) for a in examples.positives[:3]], "...")

    model = learn(examples, target)
    print("\nlearned framework:")
    print(serialize_framework(model.rules_only()))

    metrics, _ = evaluate_binary(model, data, CLASS, split="test")
    print(f"test accuracy {metrics.accuracy:.1f}  precision {metrics.precision:.1f}  "
          f"recall {metrics.recall:.1f}  f1 {metrics.f1:.1f}")

    image = data.image_ids("test")[0]
    print(f"\nwhy was {image} classified this way?")
    print(explain(model, data.facts_for(image), parse_atom(f"{target}({image})")))
