"""Multi-class classification as a cascade of binary frameworks.

Three concepts over cube/sphere/cylinder scenes; stage one separates c3 from
the rest, stage two separates c1 from c2, total rejection falls through to c2.
Some example draws admit no stage-two hypothesis (the learner halts with a
search failure); this demo simply redraws until one learns.
"""

import tempfile
from pathlib import Path

from nal import LearnerConfig, SearchFailureError, learn_cascade, select_examples, target_predicate
from nal.pipeline import Cascade, evaluate_cascade, load_data, write_cascade_report
from nal.scenes import generate_dataset

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp) / "clevr"
    generate_dataset(root, "clevr", None, n=3600, seed=0)
    data = load_data(root)
    facts = data.facts_per_image("train")
    labels = {i: data.labels[i] for i in facts}
    confidences = {i: data.confidences[i] for i in facts}

    config = LearnerConfig(max_body_literals=3, allow_relations=False)
    models = None
    for seed in range(20):
        sets = {}
        for cls in ("c1", "c2", "c3"):
            cls_facts = {i: f for i, f in facts.items() if labels[i] == cls}
            sets[cls] = select_examples(
                cls_facts, {i: cls for i in cls_facts},
                {i: confidences[i] for i in cls_facts},
                10, 0, 0.0, seed=seed,
                target=target_predicate(cls), positive_label=cls)
        try:
            models = learn_cascade(sets, ["c3", "c1", "c2"], config)
            print(f"cascade learned with example draw {seed}")
            break
        except SearchFailureError:
            print(f"draw {seed}: no separating hypothesis, redrawing")
    assert models is not None

    for model in models:
        top = model.rules_only().rules[0]
        n_exceptions = len(model.rules_only().rules) - 1
        print(f"  stage {model.target}: {top}  (+{n_exceptions} exception rules)")

    cascade = Cascade(stages=(("c3", models[0]), ("c1", models[1])), fallback="c2")
    report, rows = evaluate_cascade(cascade, data, split="test")
    table = write_cascade_report(Path(tmp) / "cascade_report.json", report, rows)
    print()
    print(table)
    print("\nconfusion (true x predicted):", report.labels)
    for label, row in zip(report.labels, report.matrix):
        print(f"  {label}: {row}")
