"""Synthetic labeled symbolic scenes on a 3x3 grid, fact emission, perception noise.

Two vocabularies are supported: a shapes mode (square/triangle/circle in three
colors and two sizes) with six scene classes, and a richer clevr-like mode
(cube/sphere/cylinder, eight colors, two sizes, two materials) with three
conjunctive concepts.  Class membership is decided by a single oracle which is
also the rejection test during generation, so stored labels are correct by
construction.

Spatial convention: positions are (col, row) cells of a 3x3 grid with rows
growing downward; above(b, c) iff b.row < c.row, left(b, c) iff b.col < c.col.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from nal.core import Atom

__all__ = [
    "SceneObject",
    "Scene",
    "NoiseSpec",
    "GenerationError",
    "SHAPES_CLASSES",
    "CLEVR_CLASSES",
    "vocabulary",
    "oracle",
    "generate_scene",
    "scene_to_facts",
    "corrupt_facts",
    "derive_seed",
    "generate_dataset",
    "render_scene",
    "load_dataset_index",
    "read_facts_file",
]

GRID = 3
MAX_OBJECTS = 9
REJECTION_BUDGET = 100_000

SHAPES_VOCAB = {
    "shape": ("square", "triangle", "circle"),
    "color": ("red", "green", "blue"),
    "size": ("small", "large"),
}
CLEVR_VOCAB = {
    "shape": ("cube", "sphere", "cylinder"),
    "color": ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"),
    "size": ("small", "large"),
    "material": ("metal", "rubber"),
}

SHAPES_CLASSES = ("s1", "s2", "s3", "s4", "s5", "s6")
CLEVR_CLASSES = ("c1", "c2", "c3")

RELATIONS = ("above", "left")


class GenerationError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class SceneObject:
    id: str
    shape: str
    color: str
    size: str
    col: int
    row: int
    material: str | None = None

    def attributes(self) -> tuple[str, ...]:
        attrs = (self.shape, self.color, self.size)
        return attrs if self.material is None else attrs + (self.material,)


@dataclass(frozen=True)
class Scene:
    image_id: str
    objects: tuple[SceneObject, ...]
    label: str
    mode: str  # "shapes" | "clevr"

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "label": self.label,
            "mode": self.mode,
            "objects": [
                {k: v for k, v in {
                    "id": o.id, "shape": o.shape, "color": o.color,
                    "size": o.size, "col": o.col, "row": o.row,
                    "material": o.material,
                }.items() if v is not None}
                for o in self.objects
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "Scene":
        return Scene(
            image_id=data["image_id"],
            objects=tuple(
                SceneObject(
                    id=o["id"], shape=o["shape"], color=o["color"], size=o["size"],
                    col=o["col"], row=o["row"], material=o.get("material"),
                )
                for o in data["objects"]
            ),
            label=data["label"],
            mode=data["mode"],
        )


@dataclass(frozen=True)
class NoiseSpec:
    """Attribute-resampling / object-dropping noise standing in for perception error."""

    p_attr: float = 0.0
    p_drop: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_attr <= 1.0 and 0.0 <= self.p_drop <= 1.0):
            raise ValueError("noise probabilities must lie in [0, 1]")


def vocabulary(mode: str) -> dict[str, tuple[str, ...]]:
    if mode == "shapes":
        return SHAPES_VOCAB
    if mode == "clevr":
        return CLEVR_VOCAB
    raise ValueError(f"unknown mode {mode!r}")


def mode_of_class(class_id: str) -> str:
    if class_id in SHAPES_CLASSES:
        return "shapes"
    if class_id in CLEVR_CLASSES:
        return "clevr"
    raise ValueError(f"unknown class {class_id!r}")


def above(b: SceneObject, c: SceneObject) -> bool:
    return b.row < c.row


def left(b: SceneObject, c: SceneObject) -> bool:
    return b.col < c.col


def _has(scene: Scene, **attrs: str) -> bool:
    return any(_obj_matches(o, attrs) for o in scene.objects)


def _obj_matches(o: SceneObject, attrs: dict[str, str]) -> bool:
    return all(getattr(o, k) == v for k, v in attrs.items())


def oracle(class_id: str, scene: Scene) -> bool:
    """Direct evaluation of a class rule over the scene's objects and relations."""
    objs = scene.objects
    if class_id == "s1":
        return _has(scene, shape="square", color="blue")
    if class_id == "s2":
        return _has(scene, shape="triangle", size="small", color="green")
    if class_id == "s3":
        return (_has(scene, shape="triangle", color="blue")
                and _has(scene, shape="circle", color="red", size="large"))
    if class_id == "s4":
        return any(
            _obj_matches(b, {"shape": "circle", "color": "red"})
            and _obj_matches(c, {"shape": "square", "color": "blue"})
            and above(b, c)
            for b in objs for c in objs
        )
    if class_id == "s5":
        return any(
            _obj_matches(b, {"shape": "triangle", "color": "red"})
            and _obj_matches(c, {"shape": "circle", "color": "green"})
            and left(b, c)
            for b in objs for c in objs
        )
    if class_id == "s6":
        return not _has(scene, shape="circle", color="blue")
    # clevr concepts: conjunctions of two object patterns; parenthesized
    # attributes of the source task are confounders and not required
    if class_id == "c1":
        return (_has(scene, shape="cube", size="large")
                and _has(scene, shape="cylinder", size="large"))
    if class_id == "c2":
        return (_has(scene, shape="cube", size="small", material="metal")
                and _has(scene, shape="sphere", size="small"))
    if class_id == "c3":
        return (_has(scene, shape="sphere", size="large", color="blue")
                and _has(scene, shape="sphere", size="small", color="yellow"))
    raise ValueError(f"unknown class {class_id!r}")


def _random_scene(rng: random.Random, mode: str, image_id: str) -> Scene:
    vocab = vocabulary(mode)
    n = rng.randint(1, MAX_OBJECTS)
    cells = rng.sample([(c, r) for r in range(GRID) for c in range(GRID)], n)
    objects = []
    for j, (col, row) in enumerate(cells):
        objects.append(SceneObject(
            id=f"obj_{j}",
            shape=rng.choice(vocab["shape"]),
            color=rng.choice(vocab["color"]),
            size=rng.choice(vocab["size"]),
            col=col,
            row=row,
            material=rng.choice(vocab["material"]) if "material" in vocab else None,
        ))
    return Scene(image_id=image_id, objects=tuple(objects), label="", mode=mode)


def _accepts(class_id: str, scene: Scene, positive: bool) -> bool:
    if not positive:
        return not oracle(class_id, scene)
    if not oracle(class_id, scene):
        return False
    if scene.mode == "clevr":
        # positives of one concept must not accidentally satisfy another
        return not any(oracle(c, scene) for c in CLEVR_CLASSES if c != class_id)
    return True


def generate_scene(class_id: str, positive: bool, rng_seed: int,
                   image_id: str = "img_0") -> Scene:
    """Rejection-sample a random scene until the class oracle matches ``positive``."""
    mode = mode_of_class(class_id)
    rng = random.Random(rng_seed)
    label = class_id if positive else f"not_{class_id}"
    for _ in range(REJECTION_BUDGET):
        scene = _random_scene(rng, mode, image_id)
        if _accepts(class_id, scene, positive):
            return replace(scene, label=label)
    raise GenerationError(
        f"no {'positive' if positive else 'negative'} scene for {class_id} "
        f"within {REJECTION_BUDGET} draws"
    )


def _object_id(image_id: str, j: int) -> str:
    suffix = image_id.removeprefix("img_")
    return f"obj_{suffix}_{j}"


def scene_to_facts(scene: Scene) -> list[Atom]:
    """Emit the fact encoding: image/1, in/2, one unary atom per attribute,
    and above/left for every ordered pair satisfying the grid convention."""
    facts = [Atom("image", (scene.image_id,))]
    ids = []
    for j, obj in enumerate(scene.objects):
        oid = _object_id(scene.image_id, j)
        ids.append(oid)
        facts.append(Atom("in", (scene.image_id, oid)))
        for attr in obj.attributes():
            facts.append(Atom(attr, (oid,)))
    for j, b in enumerate(scene.objects):
        for k, c in enumerate(scene.objects):
            if j == k:
                continue
            if above(b, c):
                facts.append(Atom("above", (ids[j], ids[k])))
            if left(b, c):
                facts.append(Atom("left", (ids[j], ids[k])))
    return facts


def facts_to_text(facts: list[Atom]) -> str:
    return "".join(f"{a}.\n" for a in facts)


_FAMILIES: dict[str, tuple[str, tuple[str, ...]]] = {}
for _vocab in (SHAPES_VOCAB, CLEVR_VOCAB):
    for _family, _values in _vocab.items():
        for _v in _values:
            _FAMILIES.setdefault(_v, (_family, _values))
# color values shared between modes must resample within the right palette
for _v in SHAPES_VOCAB["color"]:
    _FAMILIES[_v] = ("color", SHAPES_VOCAB["color"])
_CLEVR_ONLY = {
    v for fam in CLEVR_VOCAB.values() for v in fam
} - {v for fam in SHAPES_VOCAB.values() for v in fam}


def corrupt_facts(facts: list[Atom], spec: NoiseSpec) -> list[Atom]:
    """Resample attribute facts and drop whole objects, per the noise spec.

    Each attribute fact is independently replaced by a different value of its
    family with probability p_attr; each object is removed (with its attribute
    and relation facts) with probability p_drop.  image/in structure is
    otherwise preserved and the result is deterministic in the seed.
    """
    rng = random.Random(spec.seed)
    clevr = any(a.predicate in _CLEVR_ONLY for a in facts)
    palette = CLEVR_VOCAB["color"] if clevr else SHAPES_VOCAB["color"]

    objects = [a.args[1] for a in facts if a.predicate == "in"]
    dropped = {o for o in objects if rng.random() < spec.p_drop}

    out: list[Atom] = []
    for atom in facts:
        if any(o in dropped for o in atom.args):
            continue
        family = _FAMILIES.get(atom.predicate)
        if family is not None and rng.random() < spec.p_attr:
            name, values = family
            if name == "color":
                values = palette
            choices = [v for v in values if v != atom.predicate]
            out.append(Atom(rng.choice(choices), atom.args))
        else:
            out.append(atom)
    return out


# --------------------------------------------------------------------------
# Dataset directories


def derive_seed(master_seed: int, *context: str | int) -> int:
    """Stable per-item seed from a master seed and context keys."""
    text = ":".join([str(master_seed), *map(str, context)])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class DatasetIndex:
    root: Path
    scenes: tuple[Scene, ...]
    splits: dict[str, str] = field(default_factory=dict)  # image_id -> train|test

    def images(self, split: str | None = None) -> list[Scene]:
        if split is None:
            return list(self.scenes)
        return [s for s in self.scenes if self.splits.get(s.image_id) == split]

    def facts_path(self, image_id: str) -> Path:
        return self.root / "facts" / f"{image_id}.facts"


def generate_dataset(
    out_dir: str | Path,
    mode: str,
    class_id: str | None,
    n: int,
    seed: int,
    test_fraction: float = 1 / 3,
    render: bool = False,
) -> DatasetIndex:
    """Write scenes.jsonl, facts/img_<i>.facts and labels.csv under ``out_dir``.

    Binary layout (shapes, or clevr with a class): n scenes alternating
    positive/negative, the trailing ``test_fraction`` of each polarity held out
    as the test split.  Multiclass layout (clevr without a class): n scenes
    split evenly over the three concepts, all positives of their class.
    """
    out = Path(out_dir)
    (out / "facts").mkdir(parents=True, exist_ok=True)
    if render:
        (out / "images").mkdir(exist_ok=True)

    plan: list[tuple[str, bool]] = []
    if class_id is not None:
        plan = [(class_id, i % 2 == 0) for i in range(n)]
    elif mode == "clevr":
        per = n // len(CLEVR_CLASSES)
        for c in CLEVR_CLASSES:
            plan.extend((c, True) for _ in range(per))
    else:
        raise ValueError("shapes datasets need a class id")

    counters: dict[str, int] = {}
    scenes: list[Scene] = []
    splits: dict[str, str] = {}
    for i, (cid, positive) in enumerate(plan):
        scene = generate_scene(cid, positive, derive_seed(seed, f"{cid}:{positive}", i),
                               image_id=f"img_{i}")
        scenes.append(scene)
        key = scene.label
        rank = counters.get(key, 0)
        counters[key] = rank + 1
        total = sum(1 for c, p in plan if (c if p else f"not_{c}") == key)
        cut = total - int(round(total * test_fraction))
        splits[scene.image_id] = "train" if rank < cut else "test"

    with open(out / "scenes.jsonl", "w") as fh:
        for scene in scenes:
            record = scene.to_json()
            record["split"] = splits[scene.image_id]
            fh.write(json.dumps(record) + "\n")
    with open(out / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "label", "confidence"])
        for scene in scenes:
            writer.writerow([scene.image_id, scene.label, "1.0"])
    for scene in scenes:
        path = out / "facts" / f"{scene.image_id}.facts"
        path.write_text(facts_to_text(scene_to_facts(scene)))
    if render:
        for scene in scenes:
            render_scene(scene).save(out / "images" / f"{scene.image_id}.png")

    return DatasetIndex(root=out, scenes=tuple(scenes), splits=splits)


def load_dataset_index(root: str | Path) -> DatasetIndex:
    root = Path(root)
    scenes = []
    splits = {}
    with open(root / "scenes.jsonl") as fh:
        for line in fh:
            record = json.loads(line)
            scene = Scene.from_json(record)
            scenes.append(scene)
            splits[scene.image_id] = record.get("split", "train")
    return DatasetIndex(root=root, scenes=tuple(scenes), splits=splits)


def read_facts_file(path: str | Path) -> list[Atom]:
    from nal.core import parse_framework

    fw = parse_framework(Path(path).read_text())
    return [r.head for r in fw.rules]


# --------------------------------------------------------------------------
# Optional flat rendering (input for the perception component only)

_COLORS = {
    "red": (220, 50, 47), "green": (60, 160, 60), "blue": (50, 90, 220),
    "gray": (128, 128, 128), "brown": (139, 94, 60), "purple": (140, 80, 180),
    "cyan": (60, 190, 200), "yellow": (230, 200, 50),
}


def render_scene(scene: Scene, cell: int = 10, margin: int = 1):
    """Draw the scene as flat colored glyphs on a 32x32 grid image."""
    from PIL import Image, ImageDraw

    size = 32
    img = Image.new("RGB", (size, size), (16, 16, 16))
    draw = ImageDraw.Draw(img)
    for obj in scene.objects:
        color = _COLORS[obj.color]
        x0 = obj.col * cell
        y0 = obj.row * cell
        extent = cell - 1 if obj.size == "large" else cell - 4
        pad = (cell - extent) // 2
        x0, y0 = x0 + pad, y0 + pad
        x1, y1 = x0 + extent, y0 + extent
        shape = obj.shape
        outline = (240, 240, 240) if obj.material == "metal" else None
        if shape in ("square", "cube"):
            draw.rectangle((x0, y0, x1, y1), fill=color, outline=outline)
        elif shape in ("circle", "sphere"):
            draw.ellipse((x0, y0, x1, y1), fill=color, outline=outline)
        elif shape == "cylinder":
            draw.rectangle((x0 + extent // 4, y0, x1 - extent // 4, y1),
                           fill=color, outline=outline)
        else:  # triangle
            draw.polygon(
                ((x0 + extent // 2, y0), (x0, y1), (x1, y1)),
                fill=color, outline=outline,
            )
    return img
