"""Desk-scale training: overfit a small render set until the heads are reliable."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import Tensor

from perception.data import load_tensors
from perception.losses import LossConfig, loss
from perception.matching import hungarian_match
from perception.model import ModelConfig, ScenePerception

LOCATION_WEIGHT = 0.1  # auxiliary term; the location head gets no signal
                       # from the matched-BCE objective


@dataclass
class TrainResult:
    model: ScenePerception
    losses: list[float]
    records: list


def train_step(model: ScenePerception, images: Tensor, targets: Tensor,
               locations: Tensor, optimizer, generator,
               config: LossConfig) -> float:
    optimizer.zero_grad()
    out = model(images, generator=generator)
    objective = loss(images, out["reconstruction"], targets,
                     out["prediction"], config)
    aux = targets.new_zeros(())
    for i in range(images.shape[0]):
        tau = hungarian_match(targets[i], out["prediction"][i])
        mask = targets[i, :, -1:]
        aux = aux + (((out["location"][i][tau] - locations[i]) ** 2) * mask).sum()
    objective = objective + LOCATION_WEIGHT * aux / images.shape[0]
    objective.backward()
    optimizer.step()
    return float(objective.detach())


def train(data_dir: str | Path, steps: int = 600, batch_size: int = 32,
          limit: int = 256, lr: float = 1e-3, max_objects: int | None = None,
          model_config: ModelConfig = ModelConfig(),
          loss_config: LossConfig = LossConfig()) -> TrainResult:
    torch.manual_seed(loss_config.seed)
    generator = torch.Generator().manual_seed(loss_config.seed)
    images, targets, locations, records = load_tensors(
        data_dir, model_config, limit=limit, max_objects=max_objects)
    model = ScenePerception(model_config)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)

    losses = []
    n = images.shape[0]
    order = torch.randperm(n, generator=generator)
    cursor = 0
    for step in range(steps):
        if step == int(steps * 0.7):  # settle after the binding phase
            for group in optimizer.param_groups:
                group["lr"] = lr * 0.3
        if cursor + batch_size > n:
            order = torch.randperm(n, generator=generator)
            cursor = 0
        batch = order[cursor:cursor + batch_size]
        cursor += batch_size
        losses.append(train_step(
            model, images[batch], targets[batch], locations[batch],
            optimizer, generator, loss_config))
    return TrainResult(model=model, losses=losses, records=records)


def save_checkpoint(model: ScenePerception, path: str | Path) -> None:
    torch.save({"config": model.config, "state": model.state_dict()}, path)


def load_checkpoint(path: str | Path) -> ScenePerception:
    payload = torch.load(path, weights_only=False)
    model = ScenePerception(payload["config"])
    model.load_state_dict(payload["state"])
    model.eval()
    return model


@torch.no_grad()
def property_accuracy(model: ScenePerception, images: Tensor, targets: Tensor,
                      seed: int = 0) -> dict[str, float]:
    """Per-family argmax accuracy over matched real-object slots."""
    generator = torch.Generator().manual_seed(seed)
    out = model(images, generator=generator)
    config = model.config
    totals = {name: 0 for name in config.properties}
    hits = {name: 0 for name in config.properties}
    presence_hits = 0
    presence_total = 0
    for i in range(images.shape[0]):
        tau = hungarian_match(targets[i], out["prediction"][i])
        aligned = out["prediction"][i][tau]
        for slot in range(config.num_slots):
            presence_total += 1
            predicted_real = aligned[slot, -1] >= 0.5
            actually_real = targets[i, slot, -1] >= 0.5
            presence_hits += int(predicted_real == actually_real)
            if not actually_real:
                continue
            offset = 0
            for name, values in config.properties.items():
                block = slice(offset, offset + len(values))
                totals[name] += 1
                hits[name] += int(
                    aligned[slot, block].argmax() == targets[i, slot, block].argmax())
                offset += len(values)
    scores = {name: hits[name] / totals[name] for name in totals}
    scores["presence"] = presence_hits / presence_total
    return scores
