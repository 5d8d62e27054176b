"""Slot-attention autoencoder with property heads, desk scale.

The slot update is the plain renormalized cross-attention readout

    z_hat(t+1) = A_hat v,   A_hat_ij = A_ij / sum_l A_il,
    A = softmax_slots(q k^T / sqrt(d_slot))

iterated T times from slots drawn from a standard Gaussian.  A small CNN
produces the input features, a spatial-broadcast decoder with alpha
compositing reconstructs the image, and per-slot MLP heads predict the
categorical properties, a grid location, and a real-object score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
from torch import Tensor, nn

SHAPES_PROPERTIES = {
    "shape": ("square", "triangle", "circle"),
    "color": ("red", "green", "blue"),
    "size": ("small", "large"),
}


@dataclass(frozen=True)
class ModelConfig:
    num_slots: int = 10
    slot_dim: int = 64
    feature_dim: int = 64
    iterations: int = 3
    image_size: int = 32
    properties: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(SHAPES_PROPERTIES))

    @property
    def property_width(self) -> int:
        return sum(len(v) for v in self.properties.values())


def slot_update(features: Tensor, slots: Tensor, to_q: nn.Module,
                to_k: nn.Module, to_v: nn.Module) -> Tensor:
    """One update step: attention over slots, renormalized over inputs.

    features: (B, N, d), slots: (B, K, d_slot) -> (B, K, d_slot)
    """
    if features.dim() != 3 or slots.dim() != 3:
        raise ValueError("features and slots must be batched 3-d tensors")
    q = to_q(slots)
    k = to_k(features)
    v = to_v(features)
    logits = torch.einsum("bkd,bnd->bkn", q, k) / math.sqrt(q.shape[-1])
    attn = torch.softmax(logits, dim=1)  # normalize over slots per input
    attn = attn / attn.sum(dim=2, keepdim=True)  # weighted mean over inputs
    return torch.einsum("bkn,bnd->bkd", attn, v)


class SlotAttention(nn.Module):
    """Iterated renormalized attention readout with recurrent refinement.

    Each iteration computes the plain slot update and folds it into the slot
    state through a GRU cell plus a residual MLP (both act per slot with
    shared weights, so permutation equivariance is preserved; without them
    desk-scale training does not bind reliably).
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        d = config.slot_dim
        self.norm_inputs = nn.LayerNorm(config.feature_dim)
        self.norm_slots = nn.LayerNorm(d)
        self.to_q = nn.Linear(d, d, bias=False)
        self.to_k = nn.Linear(config.feature_dim, d, bias=False)
        self.to_v = nn.Linear(config.feature_dim, d, bias=False)
        self.gru = nn.GRUCell(d, d)
        self.norm_mlp = nn.LayerNorm(d)
        self.mlp = nn.Sequential(nn.Linear(d, d), nn.ReLU(), nn.Linear(d, d))

    def forward(self, features: Tensor, slots: Tensor | None = None,
                generator: torch.Generator | None = None) -> Tensor:
        batch = features.shape[0]
        features = self.norm_inputs(features)
        if slots is None:
            slots = torch.randn(
                batch, self.config.num_slots, self.config.slot_dim,
                generator=generator, device=features.device,
            )
        d = self.config.slot_dim
        for _ in range(self.config.iterations):
            update = slot_update(
                features, self.norm_slots(slots), self.to_q, self.to_k, self.to_v)
            slots = self.gru(
                update.reshape(-1, d), slots.reshape(-1, d)
            ).reshape(batch, -1, d)
            slots = slots + self.mlp(self.norm_mlp(slots))
        return slots


def _position_grid(side: int) -> Tensor:
    xs = torch.linspace(0.0, 1.0, side)
    ys = torch.linspace(0.0, 1.0, side)
    gy, gx = torch.meshgrid(ys, xs, indexing="ij")
    return torch.stack([gx, gy, 1 - gx, 1 - gy], dim=-1)  # (side, side, 4)


class Encoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.feature_dim
        # glyphs are a handful of pixels; keep a 16x16 grid so shape detail
        # survives into the features
        self.convs = nn.Sequential(
            nn.Conv2d(3, 32, 5, padding=2), nn.ReLU(),
            nn.Conv2d(32, 32, 5, padding=2, stride=2), nn.ReLU(),
            nn.Conv2d(32, d, 5, padding=2), nn.ReLU(),
        )
        side = config.image_size // 2
        self.register_buffer("grid", _position_grid(side).reshape(1, -1, 4))
        self.pos_proj = nn.Linear(4, d)
        self.out = nn.Sequential(nn.LayerNorm(d), nn.Linear(d, d), nn.ReLU(),
                                 nn.Linear(d, d))

    def forward(self, images: Tensor) -> Tensor:
        feats = self.convs(images)  # (B, d, s, s)
        feats = feats.flatten(2).transpose(1, 2)  # (B, N, d)
        feats = feats + self.pos_proj(self.grid)
        return self.out(feats)


class Decoder(nn.Module):
    """Per-slot spatial broadcast with alpha compositing."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.side = config.image_size // 4
        self.image_size = config.image_size
        d = config.slot_dim
        self.register_buffer("grid", _position_grid(self.side).reshape(1, -1, 4))
        self.pos_proj = nn.Linear(4, d)
        self.net = nn.Sequential(
            nn.ConvTranspose2d(d, 32, 4, stride=2, padding=1), nn.ReLU(),
            nn.ConvTranspose2d(32, 32, 4, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(32, 4, 3, padding=1),
        )

    def forward(self, slots: Tensor) -> tuple[Tensor, Tensor]:
        batch, num_slots, d = slots.shape
        grid = self.pos_proj(self.grid)  # (1, side*side, d)
        x = slots.reshape(batch * num_slots, 1, d) + grid
        x = x.transpose(1, 2).reshape(batch * num_slots, d, self.side, self.side)
        x = self.net(x)
        x = x.reshape(batch, num_slots, 4, self.image_size, self.image_size)
        rgb, alpha = x[:, :, :3], torch.softmax(x[:, :, 3:], dim=1)
        recon = (rgb * alpha).sum(dim=1)
        return recon, alpha.squeeze(2)


class PropertyHeads(nn.Module):
    """Per-slot categorical heads plus location and real-object score."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.slot_dim
        self.trunk = nn.Sequential(nn.Linear(d, d), nn.ReLU())
        self.categorical = nn.ModuleDict({
            name: nn.Linear(d, len(values))
            for name, values in config.properties.items()
        })
        self.location = nn.Linear(d, 2)
        self.presence = nn.Linear(d, 1)

    def forward(self, slots: Tensor) -> tuple[Tensor, Tensor]:
        h = self.trunk(slots)
        blocks = [torch.softmax(self.categorical[name](h), dim=-1)
                  for name in self.categorical]
        presence = torch.sigmoid(self.presence(h))
        prediction = torch.cat(blocks + [presence], dim=-1)  # (B, K, P+1)
        location = torch.sigmoid(self.location(h))
        return prediction, location


class ScenePerception(nn.Module):
    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.config = config
        self.encoder = Encoder(config)
        self.slot_attention = SlotAttention(config)
        self.decoder = Decoder(config)
        self.heads = PropertyHeads(config)

    def forward(self, images: Tensor, generator: torch.Generator | None = None):
        features = self.encoder(images)
        slots = self.slot_attention(features, generator=generator)
        recon, alpha = self.decoder(slots)
        prediction, location = self.heads(slots)
        return {
            "slots": slots,
            "reconstruction": recon,
            "alpha": alpha,
            "prediction": prediction,
            "location": location,
        }
