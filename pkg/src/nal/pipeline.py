"""End-to-end orchestration: classification, evaluation, explanation, benchmarks.

Classification follows the four inference steps: encode the image as facts,
join them with the learned rules, compute the stable extensions of the ground
framework, and accept exactly when the target atom is a cautious consequence.
An image whose framework admits no stable extension is reported unclassifiable
(counted as rejected in binary metrics, as the fall-through class in cascades,
and tallied separately either way).
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from nal.core import AbaFramework, Atom, Rule, ValidationError, ground
from nal.learning import (
    LearnerConfig,
    LearntFramework,
    SearchFailureError,
    SearchTimeoutError,
    classify_atom,
    select_examples,
    target_predicate,
)
from nal.scenes import NoiseSpec, corrupt_facts, derive_seed
from nal.semantics import construct_arguments

__all__ = [
    "Metrics",
    "MulticlassReport",
    "Cascade",
    "DataSource",
    "metrics_from_counts",
    "classify_image",
    "classify_cascade",
    "evaluate_binary",
    "evaluate_cascade",
    "explain",
    "benchmark_scaling",
    "load_data",
    "write_binary_report",
    "write_cascade_report",
]

ACCEPTED = "accepted"
REJECTED = "rejected"
UNCLASSIFIABLE = "unclassifiable"


@dataclass(frozen=True)
class Metrics:
    """Binary counts plus the derived percentages.

    Undefined ratios (0/0) are reported as 0.0 and flagged in ``undefined``.
    """

    tp: int
    fp: int
    fn: int
    tn: int
    n_unclassifiable: int = 0
    accuracy: float = field(init=False, default=0.0)
    precision: float = field(init=False, default=0.0)
    recall: float = field(init=False, default=0.0)
    f1: float = field(init=False, default=0.0)
    undefined: tuple[str, ...] = field(init=False, default=())

    def __post_init__(self) -> None:
        undefined = []

        def ratio(num: int, den: int, name: str) -> float:
            if den == 0:
                undefined.append(name)
                return 0.0
            return 100.0 * num / den

        object.__setattr__(self, "accuracy",
                           ratio(self.tp + self.tn, self.total, "accuracy"))
        object.__setattr__(self, "precision", ratio(self.tp, self.tp + self.fp, "precision"))
        object.__setattr__(self, "recall", ratio(self.tp, self.tp + self.fn, "recall"))
        p, r = self.precision, self.recall
        if p + r == 0.0:
            undefined.append("f1")
            object.__setattr__(self, "f1", 0.0)
        else:
            object.__setattr__(self, "f1", 2 * p * r / (p + r))
        object.__setattr__(self, "undefined", tuple(undefined))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def support(self) -> tuple[int, int]:
        return (self.tp + self.fn, self.fp + self.tn)

    def to_json(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "unclassifiable": self.n_unclassifiable,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
            "undefined": list(self.undefined),
        }


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int,
                        n_unclassifiable: int = 0) -> Metrics:
    return Metrics(tp=tp, fp=fp, fn=fn, tn=tn, n_unclassifiable=n_unclassifiable)


@dataclass(frozen=True)
class MulticlassReport:
    labels: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]  # rows: true label, columns: prediction
    n_unclassifiable: int = 0

    def count(self, true: str, predicted: str) -> int:
        return self.matrix[self.labels.index(true)][self.labels.index(predicted)]

    def per_class(self) -> dict[str, Metrics]:
        out = {}
        total = sum(sum(row) for row in self.matrix)
        for i, label in enumerate(self.labels):
            tp = self.matrix[i][i]
            fn = sum(self.matrix[i]) - tp
            fp = sum(self.matrix[j][i] for j in range(len(self.labels))) - tp
            tn = total - tp - fn - fp
            out[label] = metrics_from_counts(tp, fp, fn, tn)
        return out

    @property
    def accuracy(self) -> float:
        total = sum(sum(row) for row in self.matrix)
        diag = sum(self.matrix[i][i] for i in range(len(self.labels)))
        return 100.0 * diag / total if total else 0.0

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": [list(row) for row in self.matrix],
            "accuracy": self.accuracy,
            "unclassifiable": self.n_unclassifiable,
            "per_class": {k: m.to_json() for k, m in self.per_class().items()},
        }


@dataclass(frozen=True)
class Cascade:
    """Ordered binary stages plus the fall-through class for total rejection."""

    stages: tuple[tuple[str, LearntFramework], ...]
    fallback: str


# --------------------------------------------------------------------------
# Classification


def _single_image_constant(facts: list[Atom]) -> str:
    images = sorted({a.args[0] for a in facts if a.predicate == "image"})
    if len(images) != 1:
        raise ValidationError(
            f"facts must describe exactly one image constant, found {images}"
        )
    return images[0]


def classify_image(model: LearntFramework | AbaFramework, facts: list[Atom],
                   target: str | None = None) -> str:
    """Accept, reject or give up on one image's facts under a learned framework."""
    if isinstance(model, LearntFramework):
        rules = model.rules_only()
        target = target if target is not None else model.target
    else:
        rules = model
        if target is None:
            raise ValidationError("a target predicate is required with a bare framework")
    image = _single_image_constant(facts)
    accepted = classify_atom(rules, facts, Atom(target, (image,)))
    if accepted is None:
        return UNCLASSIFIABLE
    return ACCEPTED if accepted else REJECTED


def _cascade_decision(cascade: Cascade, facts: list[Atom]) -> tuple[str, bool]:
    saw_unclassifiable = False
    for label, model in cascade.stages:
        outcome = classify_image(model, facts)
        if outcome == ACCEPTED:
            return label, saw_unclassifiable
        if outcome == UNCLASSIFIABLE:
            saw_unclassifiable = True
    return cascade.fallback, saw_unclassifiable


def classify_cascade(cascade: Cascade, facts: list[Atom]) -> str:
    """First stage whose target is accepted wins; total rejection falls through."""
    return _cascade_decision(cascade, facts)[0]


# --------------------------------------------------------------------------
# Data directories (shared with the perception component)


@dataclass(frozen=True)
class DataSource:
    root: Path
    images: tuple[str, ...]
    labels: dict[str, str]
    confidences: dict[str, float]
    splits: dict[str, str]

    def image_ids(self, split: str | None = None) -> list[str]:
        if split is None:
            return list(self.images)
        return [i for i in self.images if self.splits.get(i, "train") == split]

    def facts_for(self, image_id: str) -> list[Atom]:
        from nal.scenes import read_facts_file

        return read_facts_file(self.root / "facts" / f"{image_id}.facts")

    def facts_per_image(self, split: str | None = None) -> dict[str, list[Atom]]:
        return {i: self.facts_for(i) for i in self.image_ids(split)}


def load_data(root: str | Path) -> DataSource:
    """Read a dataset directory: labels.csv (+ scenes.jsonl for splits)."""
    root = Path(root)
    images, labels, confidences = [], {}, {}
    with open(root / "labels.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            images.append(row["image_id"])
            labels[row["image_id"]] = row["label"]
            confidences[row["image_id"]] = float(row["confidence"])
    splits: dict[str, str] = {}
    scenes = root / "scenes.jsonl"
    if scenes.exists():
        with open(scenes) as fh:
            for line in fh:
                record = json.loads(line)
                splits[record["image_id"]] = record.get("split", "train")
    return DataSource(
        root=root,
        images=tuple(images),
        labels=labels,
        confidences=confidences,
        splits=splits,
    )


def _image_noise(noise: NoiseSpec | None, image_id: str) -> NoiseSpec | None:
    if noise is None or (noise.p_attr == 0.0 and noise.p_drop == 0.0):
        return None
    return NoiseSpec(noise.p_attr, noise.p_drop, derive_seed(noise.seed, image_id, 0))


# --------------------------------------------------------------------------
# Evaluation


def evaluate_binary(
    model: LearntFramework,
    data: DataSource,
    class_id: str,
    split: str | None = "test",
    noise: NoiseSpec | None = None,
) -> tuple[Metrics, list[tuple[str, str, str]]]:
    """Classify every image of the split; unclassifiable counts as rejected.

    Returns the metrics and per-image rows (image_id, truth, prediction).
    """
    ids = data.image_ids(split)
    if not ids:
        raise ValidationError(f"no images in split {split!r}")
    rows = []
    tp = fp = fn = tn = unc = 0
    for image_id in ids:
        facts = data.facts_for(image_id)
        spec = _image_noise(noise, image_id)
        if spec is not None:
            facts = corrupt_facts(facts, spec)
        prediction = classify_image(model, facts)
        truth_positive = data.labels[image_id] == class_id
        if prediction == UNCLASSIFIABLE:
            unc += 1
        predicted_positive = prediction == ACCEPTED
        if truth_positive and predicted_positive:
            tp += 1
        elif truth_positive:
            fn += 1
        elif predicted_positive:
            fp += 1
        else:
            tn += 1
        rows.append((image_id, data.labels[image_id], prediction))
    return metrics_from_counts(tp, fp, fn, tn, n_unclassifiable=unc), rows


def evaluate_cascade(
    cascade: Cascade,
    data: DataSource,
    split: str | None = "test",
    noise: NoiseSpec | None = None,
) -> tuple[MulticlassReport, list[tuple[str, str, str]]]:
    ids = data.image_ids(split)
    if not ids:
        raise ValidationError(f"no images in split {split!r}")
    labels = tuple([label for label, _ in cascade.stages] + [cascade.fallback])
    index = {label: i for i, label in enumerate(labels)}
    matrix = [[0] * len(labels) for _ in labels]
    unc = 0
    rows = []
    for image_id in ids:
        facts = data.facts_for(image_id)
        spec = _image_noise(noise, image_id)
        if spec is not None:
            facts = corrupt_facts(facts, spec)
        predicted, undecided = _cascade_decision(cascade, facts)
        unc += undecided
        truth = data.labels[image_id]
        if truth not in index:
            raise ValidationError(f"image {image_id} has label {truth!r} outside the cascade")
        matrix[index[truth]][index[predicted]] += 1
        rows.append((image_id, truth, predicted))
    report = MulticlassReport(
        labels=labels,
        matrix=tuple(tuple(r) for r in matrix),
        n_unclassifiable=unc,
    )
    return report, rows


# --------------------------------------------------------------------------
# Reports


def _text_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(row, widths))
             for row in [header] + rows]
    return "\n".join(lines)


def write_binary_report(path: str | Path, class_id: str, metrics: Metrics,
                        rows: list[tuple[str, str, str]]) -> str:
    """Write the JSON report and the confusion CSV; return the text table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"class": class_id, "metrics": metrics.to_json()}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    with open(path.with_suffix(".confusion.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["", "pred_positive", "pred_negative"])
        writer.writerow(["true_positive", metrics.tp, metrics.fn])
        writer.writerow(["true_negative", metrics.fp, metrics.tn])
    table = _text_table(
        ["Predicted class", "Accuracy", "Precision", "Recall", "F1-Score"],
        [[class_id, f"{metrics.accuracy:.1f}", f"{metrics.precision:.1f}",
          f"{metrics.recall:.1f}", f"{metrics.f1:.1f}"]],
    )
    return table


def write_cascade_report(path: str | Path, report: MulticlassReport,
                         rows: list[tuple[str, str, str]]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_json(), indent=2) + "\n")
    with open(path.with_suffix(".confusion.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [f"pred_{c}" for c in report.labels])
        for label, row in zip(report.labels, report.matrix):
            writer.writerow([f"true_{label}"] + list(row))
    per = report.per_class()
    table = _text_table(
        ["Class", "Accuracy", "Precision", "Recall", "F1-Score"],
        [[c, f"{report.accuracy:.1f}", f"{per[c].precision:.1f}",
          f"{per[c].recall:.1f}", f"{per[c].f1:.1f}"] for c in report.labels],
    )
    return table


# --------------------------------------------------------------------------
# Explanations


def explain(model: LearntFramework | AbaFramework, facts: list[Atom],
            atom: Atom, limit: int = 8) -> str:
    """Human-readable argument listing for a classification decision."""
    rules = model.rules_only() if isinstance(model, LearntFramework) else model
    _single_image_constant(facts)
    accepted = classify_atom(rules, facts, atom)
    offset = len(rules.rules)
    fw = AbaFramework(
        rules=rules.rules + tuple(
            Rule(id=f"f{i + 1 + offset}", head=f) for i, f in enumerate(facts)
        ),
        assumptions=rules.assumptions,
        contraries=dict(rules.contraries),
    )
    gfw = ground(fw)
    lines = [f"claim: {atom}"]
    if accepted is None:
        lines.append("status: unclassifiable (no stable extension)")
    else:
        lines.append(f"status: {ACCEPTED if accepted else REJECTED}")
    arguments = construct_arguments(gfw, atom, limit=limit)
    if not arguments:
        lines.append("no argument constructs the claim")
        return "\n".join(lines)
    for i, argument in enumerate(arguments, start=1):
        lines.append(f"argument {i}: {argument}")
        attackers = []
        for assumption in sorted(argument.support_assumptions, key=str):
            contrary = gfw.contraries[assumption]
            for counter in construct_arguments(gfw, contrary, limit=limit):
                attackers.append((assumption, counter))
        if attackers:
            for assumption, counter in attackers:
                lines.append(f"  attacked by {counter} (undercuts {assumption})")
        else:
            lines.append("  unattacked")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Scaling benchmark


@dataclass(frozen=True)
class BenchRow:
    class_id: str
    n_examples: int
    seed: int
    seconds: float
    outcome: str  # ok | search_failure | timeout
    n_rules: int
    body_literals: int

    def as_csv_row(self) -> list:
        return [self.class_id, self.n_examples, self.seed,
                f"{self.seconds:.3f}", self.outcome, self.n_rules, self.body_literals]


def benchmark_scaling(
    data: DataSource,
    class_id: str,
    example_counts: list[int],
    seeds: list[int],
    config: LearnerConfig = LearnerConfig(),
    threshold: float = 0.7,
) -> list[BenchRow]:
    """Measure learning wall time per example count; no growth-rate assertion."""
    from nal.learning import learn

    target = target_predicate(class_id)
    facts = data.facts_per_image("train") if data.splits else data.facts_per_image()
    split = "train" if data.splits else None
    labels = {i: data.labels[i] for i in data.image_ids(split)}
    confidences = {i: data.confidences[i] for i in data.image_ids(split)}
    rows = []
    for count in example_counts:
        for seed in seeds:
            start = time.perf_counter()
            outcome, n_rules, body = "ok", 0, 0
            try:
                examples = select_examples(
                    facts, labels, confidences, count, count,
                    threshold=threshold, seed=seed, target=target,
                    positive_label=class_id,
                )
                model = learn(examples, target, config)
                learned = model.rules_only()
                n_rules = len(learned.rules)
                body = sum(len(r.body) for r in learned.rules)
            except SearchFailureError:
                outcome = "search_failure"
            except SearchTimeoutError:
                outcome = "timeout"
            rows.append(BenchRow(
                class_id=class_id, n_examples=count, seed=seed,
                seconds=time.perf_counter() - start, outcome=outcome,
                n_rules=n_rules, body_literals=body,
            ))
    return rows
