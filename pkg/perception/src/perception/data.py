"""Dataset bridge: rendered scene images plus per-object weak labels.

Consumes the directory layout produced by the symbolic scene generator
(``images/img_<i>.png`` and ``scenes.jsonl``); class labels are ignored, only
the object metadata is used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch import Tensor

from perception.model import ModelConfig


@dataclass(frozen=True)
class SceneRecord:
    image_id: str
    label: str
    objects: tuple[dict, ...]


def load_records(root: str | Path) -> list[SceneRecord]:
    records = []
    with open(Path(root) / "scenes.jsonl") as fh:
        for line in fh:
            data = json.loads(line)
            records.append(SceneRecord(
                image_id=data["image_id"],
                label=data["label"],
                objects=tuple(data["objects"]),
            ))
    return records


def encode_targets(record: SceneRecord, config: ModelConfig) -> tuple[Tensor, Tensor]:
    """Per-slot one-hot property rows plus a presence bit, and grid locations.

    Objects are sorted canonically (property values, then id) and padded with
    all-zero rows up to the slot count.
    """
    width = config.property_width + 1
    y = torch.zeros(config.num_slots, width)
    locations = torch.zeros(config.num_slots, 2)
    ranked = sorted(
        record.objects,
        key=lambda o: tuple(o.get(k, "") for k in ("shape", "color", "size", "id")),
    )[: config.num_slots]
    for slot, obj in enumerate(ranked):
        offset = 0
        for name, values in config.properties.items():
            y[slot, offset + values.index(obj[name])] = 1.0
            offset += len(values)
        y[slot, -1] = 1.0
        locations[slot, 0] = obj["col"] / 2.0
        locations[slot, 1] = obj["row"] / 2.0
    return y, locations


def load_tensors(root: str | Path, config: ModelConfig,
                 limit: int | None = None, max_objects: int | None = None):
    """Images, target rows and locations for up to ``limit`` scenes,
    optionally restricted to scenes with at most ``max_objects`` objects."""
    root = Path(root)
    records = load_records(root)
    if max_objects is not None:
        records = [r for r in records if len(r.objects) <= max_objects]
    if limit is not None:
        records = records[:limit]
    images, targets, locations = [], [], []
    for record in records:
        path = root / "images" / f"{record.image_id}.png"
        array = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
        images.append(torch.from_numpy(array).permute(2, 0, 1))
        y, loc = encode_targets(record, config)
        targets.append(y)
        locations.append(loc)
    return (
        torch.stack(images),
        torch.stack(targets),
        torch.stack(locations),
        records,
    )
