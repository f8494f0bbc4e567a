"""Full-frame baseline students: plain CNN and a relational-attention net.

The plain CNN follows the per-task recipes: the digit-sum variant flattens
its last feature map into a bias-free MLP; the control variants use a
global max pool into a small MLP head. The relation network shares the
conv trunk, optionally concatenates normalized spatial coordinates, and
applies multi-head dot-product attention over cells with a residual
connection before the output module.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from .gnn import _group_norm


@dataclass
class CnnSpec:
    image_size: int
    out_dim: int
    channels: tuple[int, ...] = (16, 32, 64, 128)
    strides: tuple[int, ...] | None = None  # None: maxpool 2 after each conv
    readout: str = "gmp"  # "gmp" or "flatten"
    head_hidden: int = 256
    head_bias: bool = True


def _trunk(spec: CnnSpec) -> tuple[nn.Sequential, int, int]:
    layers: list[nn.Module] = []
    in_ch, size = 3, spec.image_size
    strides = spec.strides or tuple(1 for _ in spec.channels)
    for ch, stride in zip(spec.channels, strides):
        layers += [nn.Conv2d(in_ch, ch, 3, stride=stride, padding=1), nn.ReLU()]
        if spec.strides is None:
            layers.append(nn.MaxPool2d(2))
            size //= 2
        else:
            size = (size + stride - 1) // stride
        in_ch = ch
    return nn.Sequential(*layers), in_ch, size


class PlainCnn(nn.Module):
    arch = "cnn"

    def __init__(self, spec: CnnSpec):
        super().__init__()
        self.spec = spec
        self.trunk, ch, size = _trunk(spec)
        self.feat_channels, self.feat_size = ch, size
        in_dim = ch if spec.readout == "gmp" else ch * size * size
        self.head = nn.Sequential(
            nn.Linear(in_dim, spec.head_hidden, bias=spec.head_bias), nn.ReLU(),
            nn.Linear(spec.head_hidden, spec.head_hidden, bias=spec.head_bias), nn.ReLU(),
            nn.Linear(spec.head_hidden, spec.out_dim),
        )

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.trunk(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        f = self.features(x)
        if self.spec.readout == "gmp":
            h = torch.amax(f, dim=(2, 3))
        else:
            h = f.flatten(1)
        return self.head(h)


class RelationModule(nn.Module):
    """Multi-head dot-product attention over spatial cells, residual add."""

    def __init__(self, channels: int, heads: int = 4, key_dim: int = 64):
        super().__init__()
        self.heads = heads
        self.key_dim = key_dim
        self.key = nn.Sequential(
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
            nn.Conv2d(channels, heads * key_dim, 1),
        )
        self.query = nn.Sequential(
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
            nn.Conv2d(channels, heads * key_dim, 1),
        )
        self.value = nn.Sequential(
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
        )
        if channels % heads:
            raise ValueError("channels must divide evenly across heads")
        self.post = nn.Sequential(
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
            nn.Conv2d(channels, channels, 1), _group_norm(channels), nn.ReLU(),
        )

    def forward(self, f: torch.Tensor, return_attention: bool = False):
        b, c, h, w = f.shape
        cells = h * w
        k = self.key(f).view(b, self.heads, self.key_dim, cells)
        q = self.query(f).view(b, self.heads, self.key_dim, cells)
        v = self.value(f).view(b, self.heads, c // self.heads, cells)
        logits = torch.einsum("bhdq,bhdk->bhqk", q, k) / self.key_dim**0.5
        attention = torch.softmax(logits, dim=-1)
        attended = torch.einsum("bhqk,bhck->bhcq", attention, v)
        attended = attended.reshape(b, c, h, w)
        out = f + self.post(attended)
        if return_attention:
            return out, attention
        return out


class RelationNet(nn.Module):
    arch = "relation_net"

    def __init__(self, spec: CnnSpec, heads: int = 4, key_dim: int = 64,
                 with_coords: bool = True):
        super().__init__()
        self.spec = spec
        self.trunk, ch, size = _trunk(spec)
        self.with_coords = with_coords
        self.feat_size = size
        attn_ch = ch + (2 if with_coords else 0)
        # pad channels so heads divide evenly
        self.pad = (-attn_ch) % heads
        self.relation = RelationModule(attn_ch + self.pad, heads=heads, key_dim=key_dim)
        self.attn_channels = attn_ch + self.pad
        in_dim = self.attn_channels if spec.readout == "gmp" else self.attn_channels * size * size
        self.head = nn.Sequential(
            nn.Linear(in_dim, spec.head_hidden), nn.ReLU(),
            nn.Linear(spec.head_hidden, spec.out_dim),
        )

    def _with_coords(self, f: torch.Tensor) -> torch.Tensor:
        if not self.with_coords and not self.pad:
            return f
        b, _, h, w = f.shape
        extras = []
        if self.with_coords:
            ys = torch.linspace(-1, 1, h, dtype=f.dtype).view(1, 1, h, 1).expand(b, 1, h, w)
            xs = torch.linspace(-1, 1, w, dtype=f.dtype).view(1, 1, 1, w).expand(b, 1, h, w)
            extras += [ys, xs]
        if self.pad:
            extras.append(f.new_zeros(b, self.pad, h, w))
        return torch.cat([f, *extras], dim=1)

    def forward(self, x: torch.Tensor, return_attention: bool = False):
        f = self._with_coords(self.trunk(x))
        if return_attention:
            f, attention = self.relation(f, return_attention=True)
        else:
            f = self.relation(f)
        if self.spec.readout == "gmp":
            h = torch.amax(f, dim=(2, 3))
        else:
            h = f.flatten(1)
        out = self.head(h)
        if return_attention:
            return out, attention
        return out
