"""Desk-scale slot-attention perception emitting symbolic scene facts."""

from perception.model import ModelConfig, ScenePerception, SlotAttention, slot_update
from perception.matching import binary_cross_entropy, hungarian_match, pairwise_bce_cost
from perception.losses import LossConfig, loss, matched_property_bce
from perception.export import export_facts, slot_facts
from perception.training import (
    load_checkpoint,
    property_accuracy,
    save_checkpoint,
    train,
)

__all__ = [
    "ModelConfig", "ScenePerception", "SlotAttention", "slot_update",
    "binary_cross_entropy", "hungarian_match", "pairwise_bce_cost",
    "LossConfig", "loss", "matched_property_bce",
    "export_facts", "slot_facts",
    "load_checkpoint", "property_accuracy", "save_checkpoint", "train",
]
