"""Turn slot predictions into symbolic fact files.

Output matches the scene generator's layout (``facts/img_<i>.facts`` plus
``labels.csv``) so the downstream pipeline cannot tell the producers apart.
"""

from __future__ import annotations

import csv
from pathlib import Path

import torch
from torch import Tensor

from perception.model import ModelConfig, ScenePerception


def slot_facts(image_id: str, prediction: Tensor, config: ModelConfig,
               threshold: float = 0.5) -> tuple[list[str], float]:
    """Facts for one image: slots below the presence threshold are skipped;
    the image confidence is the mean presence score over kept slots."""
    dictionary = [values for values in config.properties.values()]
    lines = [f"image({image_id})."]
    kept = []
    index = 0
    for slot in range(prediction.shape[0]):
        row = prediction[slot]
        score = float(row[-1])
        if score < threshold:
            continue
        kept.append(score)
        obj = f"obj_{image_id.removeprefix('img_')}_{index}"
        index += 1
        lines.append(f"in({image_id},{obj}).")
        offset = 0
        for values in dictionary:
            block = row[offset:offset + len(values)]
            if int(block.argmax()) >= len(values):
                raise IndexError("dictionary index out of range")
            lines.append(f"{values[int(block.argmax())]}({obj}).")
            offset += len(values)
    confidence = float(sum(kept) / len(kept)) if kept else 0.0
    return lines, confidence


@torch.no_grad()
def export_facts(model: ScenePerception, images: Tensor, image_ids: list[str],
                 labels: dict[str, str], out_dir: str | Path,
                 threshold: float = 0.5, seed: int = 0) -> None:
    out = Path(out_dir)
    (out / "facts").mkdir(parents=True, exist_ok=True)
    generator = torch.Generator().manual_seed(seed)
    predictions = model(images, generator=generator)["prediction"]
    rows = []
    for image_id, prediction in zip(image_ids, predictions):
        lines, confidence = slot_facts(image_id, prediction, model.config, threshold)
        (out / "facts" / f"{image_id}.facts").write_text("\n".join(lines) + "\n")
        rows.append([image_id, labels.get(image_id, ""), f"{confidence:.4f}"])
    with open(out / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "label", "confidence"])
        writer.writerows(rows)
