"""Argumentation-based scene classification: frameworks, semantics, learning, pipeline."""

from nal.core import (
    AbaError,
    AbaFramework,
    Atom,
    GroundFramework,
    GroundRule,
    ParseError,
    Rule,
    ValidationError,
    ground,
    parse_atom,
    parse_framework,
    serialize_framework,
)
from nal.semantics import (
    Argument,
    Attack,
    Extension,
    LogicProgram,
    NoStableExtensionError,
    ResourceLimitError,
    brute_force_stable_models,
    cautious_atoms,
    compute_attacks,
    construct_arguments,
    derive_closure,
    is_cautious,
    stable_extensions,
    to_logic_program,
)
from nal.learning import (
    ExampleSet,
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
    verify_solution,
)
from nal.scenes import (
    NoiseSpec,
    Scene,
    SceneObject,
    corrupt_facts,
    generate_dataset,
    generate_scene,
    oracle,
    scene_to_facts,
)
from nal.pipeline import (
    Cascade,
    Metrics,
    MulticlassReport,
    classify_cascade,
    classify_image,
    evaluate_binary,
    evaluate_cascade,
    explain,
    load_data,
    metrics_from_counts,
)

__all__ = [
    "AbaError", "AbaFramework", "Atom", "GroundFramework", "GroundRule",
    "ParseError", "Rule", "ValidationError", "ground", "parse_atom",
    "parse_framework", "serialize_framework",
    "Argument", "Attack", "Extension", "LogicProgram",
    "NoStableExtensionError", "ResourceLimitError",
    "brute_force_stable_models", "cautious_atoms", "compute_attacks",
    "construct_arguments", "derive_closure", "is_cautious",
    "stable_extensions", "to_logic_program",
    "ExampleSet", "InsufficientExamplesError", "LearnerConfig",
    "LearntFramework", "SearchFailureError", "SearchTimeoutError",
    "learn", "learn_cascade", "parse_learn_manifest", "select_examples",
    "target_predicate", "verify_solution",
    "NoiseSpec", "Scene", "SceneObject", "corrupt_facts", "generate_dataset",
    "generate_scene", "oracle", "scene_to_facts",
    "Cascade", "Metrics", "MulticlassReport", "classify_cascade",
    "classify_image", "evaluate_binary", "evaluate_cascade", "explain",
    "load_data", "metrics_from_counts",
]

__version__ = "0.1.0"
