"""Command-line front end.

Subcommands: gen, learn, infer, eval, solve, explain, bench.
Exit codes: 0 ok, 2 validation error, 3 search failure, 4 timeout.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path

from nal.core import (
    AbaError,
    ValidationError,
    ground,
    parse_atom,
    parse_framework,
    serialize_framework,
)
from nal.learning import (
    InsufficientExamplesError,
    LearnerConfig,
    LearntFramework,
    SearchFailureError,
    SearchTimeoutError,
    learn,
    learn_cascade,
    parse_learn_manifest,
    select_examples,
    target_predicate,
)
from nal.pipeline import (
    Cascade,
    benchmark_scaling,
    classify_image,
    evaluate_binary,
    evaluate_cascade,
    explain,
    load_data,
    write_binary_report,
    write_cascade_report,
)
from nal.scenes import (
    CLEVR_CLASSES,
    GenerationError,
    NoiseSpec,
    SHAPES_CLASSES,
    generate_dataset,
    read_facts_file,
)
from nal.semantics import (
    NoStableExtensionError,
    ResourceLimitError,
    cautious_atoms,
    stable_extensions,
    to_logic_program,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SEARCH_FAILURE = 3
EXIT_TIMEOUT = 4


def _write_model(path: Path, model: LearntFramework) -> None:
    path.write_text(serialize_framework(
        model.rules_only(), header=f"target: {model.target}"
    ))


def _read_model(path: Path) -> tuple[object, str | None]:
    text = Path(path).read_text()
    fw = parse_framework(text)
    m = re.search(r"^%\s*target:\s*(\S+)", text, re.MULTILINE)
    return fw, (m.group(1) if m else None)


def _learner_config(args: argparse.Namespace) -> LearnerConfig:
    return LearnerConfig(
        max_body_literals=args.max_body_literals,
        max_object_vars=args.max_object_vars,
        allow_relations=not args.no_relations,
        max_exception_literals=args.max_exception_literals,
        seed=args.seed,
        timeout=args.timeout,
    )


def _add_learner_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-body-literals", type=int, default=4)
    sub.add_argument("--max-object-vars", type=int, default=2)
    sub.add_argument("--no-relations", action="store_true")
    sub.add_argument("--max-exception-literals", type=int, default=2)
    sub.add_argument("--timeout", type=float, default=None)


def _training_tables(data, split: str | None):
    ids = data.image_ids(split)
    facts = {i: data.facts_for(i) for i in ids}
    labels = {i: data.labels[i] for i in ids}
    confidences = {i: data.confidences[i] for i in ids}
    return facts, labels, confidences


def cmd_gen(args: argparse.Namespace) -> int:
    generate_dataset(
        args.out, args.mode, getattr(args, "class_id"), args.n, args.seed,
        render=args.render,
    )
    print(f"wrote {args.n} scenes under {args.out}")
    return EXIT_OK


def cmd_learn(args: argparse.Namespace) -> int:
    config = _learner_config(args)
    if args.manifest:
        examples = parse_learn_manifest(
            Path(args.manifest).read_text(), Path(args.manifest).parent
        )
        target = (examples.positives + examples.negatives)[0].predicate
        model = learn(examples, target, config)
        _write_model(Path(args.out), model)
        print(f"learned {target} -> {args.out}")
        return EXIT_OK

    data = load_data(args.data)
    split = "train" if data.splits else None
    facts, labels, confidences = _training_tables(data, split)

    if args.cascade:
        order = args.cascade.split(",")
        sets = {}
        for cls in order:
            cls_facts = {i: f for i, f in facts.items() if labels[i] == cls}
            sets[cls] = select_examples(
                cls_facts, {i: cls for i in cls_facts},
                {i: confidences[i] for i in cls_facts},
                args.pos, 0, args.threshold, args.seed,
                target=target_predicate(cls), positive_label=cls,
            )
        models = learn_cascade(sets, order, config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        manifest = {"order": order, "fallback": order[-1], "models": {}}
        for cls, model in zip(order[:-1], models):
            path = out / f"model_{cls}.aba"
            _write_model(path, model)
            manifest["models"][cls] = path.name
        (out / "cascade.json").write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"learned cascade {order} -> {out}/cascade.json")
        return EXIT_OK

    cls = getattr(args, "class_id")
    target = target_predicate(cls)
    examples = select_examples(
        facts, labels, confidences, args.pos, args.neg, args.threshold,
        args.seed, target=target, positive_label=cls,
    )
    model = learn(examples, target, config)
    _write_model(Path(args.out), model)
    print(f"learned {target} -> {args.out}")
    return EXIT_OK


def _load_cascade(path: Path) -> Cascade:
    manifest = json.loads(path.read_text())
    stages = []
    for cls in manifest["order"][:-1]:
        fw, target = _read_model(path.parent / manifest["models"][cls])
        stages.append((cls, _as_learnt(fw, target or target_predicate(cls))))
    return Cascade(stages=tuple(stages), fallback=manifest["fallback"])


def _as_learnt(fw, target: str) -> LearntFramework:
    return LearntFramework(
        framework=fw,
        learned_rule_ids=tuple(r.id for r in fw.rules),
        assumption_names=tuple(a.predicate for a in fw.assumptions),
        target=target,
    )


def cmd_infer(args: argparse.Namespace) -> int:
    fw, target = _read_model(Path(args.model))
    target = args.target or target
    if target is None:
        raise ValidationError("model carries no target; pass --target")
    facts = read_facts_file(args.facts)
    print(classify_image(_as_learnt(fw, target), facts))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    data = load_data(args.data)
    noise = None
    if args.p_attr or args.p_drop:
        noise = NoiseSpec(args.p_attr, args.p_drop, args.noise_seed)
    split = args.split if args.split != "all" else None
    if args.cascade:
        cascade = _load_cascade(Path(args.cascade))
        report, rows = evaluate_cascade(cascade, data, split, noise)
        table = write_cascade_report(Path(args.report), report, rows)
    else:
        fw, target = _read_model(Path(args.model))
        cls = getattr(args, "class_id") or (target.replace("_", "") if target else None)
        if target is None or cls is None:
            raise ValidationError("model carries no target; pass --class")
        model = _as_learnt(fw, target)
        metrics, rows = evaluate_binary(model, data, cls, split, noise)
        table = write_binary_report(Path(args.report), cls, metrics, rows)
    print(table)
    print(f"report: {args.report}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    fw = parse_framework(Path(args.aba).read_text())
    if args.export_lp:
        Path(args.export_lp).write_text(to_logic_program(fw).to_text())
    gfw = ground(fw)
    extensions = stable_extensions(gfw, max_enumerated=args.max_assumptions)
    try:
        cautious = cautious_atoms(gfw, max_enumerated=args.max_assumptions)
    except NoStableExtensionError:
        cautious = frozenset()
    atoms = sorted({a for e in extensions for a in e.closure} | set(cautious), key=str)
    payload = {
        "extensions": [
            {
                "assumptions": sorted(map(str, e.assumptions_in)),
                "closure_size": len(e.closure),
            }
            for e in extensions
        ],
        "cautious": {str(a): a in cautious for a in atoms},
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    fw, target = _read_model(Path(args.model))
    facts = read_facts_file(args.facts)
    atom = parse_atom(args.atom.strip("\"'"))
    print(explain(_as_learnt(fw, target or atom.predicate), facts, atom))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    data = load_data(args.data)
    counts = [int(c) for c in args.counts.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = benchmark_scaling(
        data, getattr(args, "class_id"), counts, seeds,
        config=LearnerConfig(timeout=args.timeout),
    )
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "n_examples", "seed", "seconds", "outcome",
                         "n_rules", "body_literals"])
        for row in rows:
            writer.writerow(row.as_csv_row())
    for row in rows:
        print(f"{row.class_id} n={row.n_examples} seed={row.seed} "
              f"{row.seconds:.2f}s {row.outcome}")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nal",
        description="Learn and run argumentation-based scene classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a labeled symbolic scene dataset")
    p.add_argument("--mode", choices=["shapes", "clevr"], required=True)
    p.add_argument("--class", dest="class_id",
                   choices=list(SHAPES_CLASSES) + list(CLEVR_CLASSES))
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--render", action="store_true",
                   help="also write 32x32 PNG renderings")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("learn", help="learn a framework from a dataset")
    p.add_argument("--data")
    p.add_argument("--manifest", help="aba_asp('file.aba', e_pos, e_neg) command file")
    p.add_argument("--class", dest="class_id")
    p.add_argument("--cascade", help="comma-separated class order, e.g. c3,c1,c2")
    p.add_argument("--pos", type=int, default=10)
    p.add_argument("--neg", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_learner_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("infer", help="classify one image's facts")
    p.add_argument("--model", required=True)
    p.add_argument("--facts", required=True)
    p.add_argument("--target")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="evaluate a model over a dataset split")
    p.add_argument("--model")
    p.add_argument("--cascade", help="path to cascade.json")
    p.add_argument("--data", required=True)
    p.add_argument("--class", dest="class_id")
    p.add_argument("--split", default="test", choices=["train", "test", "all"])
    p.add_argument("--report", required=True)
    p.add_argument("--p-attr", type=float, default=0.0)
    p.add_argument("--p-drop", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("solve", help="stable extensions and cautious atoms of an .aba file")
    p.add_argument("--aba", required=True)
    p.add_argument("--max-assumptions", type=int, default=24)
    p.add_argument("--export-lp", help="also write the logic-program translation")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("explain", help="arguments and attacks behind a decision")
    p.add_argument("--model", required=True)
    p.add_argument("--facts", required=True)
    p.add_argument("--atom", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="learning-time scaling measurement")
    p.add_argument("--data", required=True)
    p.add_argument("--class", dest="class_id", required=True)
    p.add_argument("--counts", default="5,10,20")
    p.add_argument("--seeds", default="0")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AbaError, ValidationError, InsufficientExamplesError,
            GenerationError, NoStableExtensionError, ResourceLimitError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SearchFailureError as exc:
        print(f"search failure: {exc}", file=sys.stderr)
        return EXIT_SEARCH_FAILURE
    except SearchTimeoutError as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT


if __name__ == "__main__":
    sys.exit(main())
