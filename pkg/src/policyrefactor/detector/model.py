"""Grid-cell scene-decomposition VAE with anchor-relative boxes.

Every grid cell owns latents {presence, box offsets, depth, appearance}.
The image likelihood is a per-pixel two-component Gaussian mixture of the
composed foreground and a low-capacity background reconstruction:

    p(x) = alpha * N(x; mu_fg, sigma_fg) + (1 - alpha) * N(x; mu_bg, sigma_bg)

Foreground composition: each present cell decodes an RGBA patch from its
appearance code, pastes it at its decoded box, and contributes with a
per-pixel weight proportional to (presence * mask) * exp(depth_scale *
depth); the global mixing alpha is 1 - prod(1 - presence * mask).

Presence follows a relaxed Bernoulli (binary Concrete); everything else
is Gaussian with the reparameterization trick. The presence KL is the
probability-space Bernoulli KL against the annealed prior.

The background branch is a plain encoder/decoder (no VAE); it can be
disabled entirely, which models a black background.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..envs.base import BBox
from .boxes import AnchorGrid, decode_boxes_tensor
from .priors import PriorSchedule
from .relaxed import logistic_noise, presence_logit, sample_relaxed_presence
from .stn import crop_boxes, paste_patches

_EPS = 1e-6
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class SpaceConfig:
    image_size: int = 54
    grid: tuple[int, int] = (6, 6)
    glimpse_size: int = 14
    z_what_dim: int = 50
    anchor_size: float = 0.2
    enc_plan: tuple[tuple[int, int], ...] = ((64, 1), (64, 3), (128, 1), (128, 3), (256, 1))
    enc_head_channels: int = 128
    glimpse_hidden: int = 256
    norm_groups: int = 16
    background: bool = True
    bg_plan: tuple[tuple[int, int], ...] = ((32, 1), (32, 3), (64, 1), (64, 3), (64, 1))
    bg_hidden: int = 256
    priors: PriorSchedule = field(default_factory=PriorSchedule)

    @property
    def anchor_grid(self) -> AnchorGrid:
        return AnchorGrid(h=self.grid[0], w=self.grid[1],
                          anchor_w=self.anchor_size, anchor_h=self.anchor_size)


def _conv_stack(plan, in_ch=3) -> nn.Sequential:
    layers: list[nn.Module] = []
    for ch, stride in plan:
        layers += [nn.Conv2d(in_ch, ch, 3, stride=stride, padding=1),
                   nn.BatchNorm2d(ch), nn.ReLU()]
        in_ch = ch
    return nn.Sequential(*layers)


class CellEncoder(nn.Module):
    """Image -> per-cell presence probability, box-offset and depth posteriors."""

    def __init__(self, config: SpaceConfig):
        super().__init__()
        self.backbone = _conv_stack(config.enc_plan)
        ch = config.enc_plan[-1][0]
        head = config.enc_head_channels
        self.neck = nn.Sequential(
            nn.Conv2d(ch, head, 1), nn.BatchNorm2d(head), nn.ReLU(),
            nn.Conv2d(head, head, 1), nn.BatchNorm2d(head), nn.ReLU(),
        )
        self.pres_head = nn.Conv2d(head, 1, 1)
        self.where_mu_head = nn.Conv2d(head, 4, 1)
        self.where_std_head = nn.Conv2d(head, 4, 1)
        self.depth_mu_head = nn.Conv2d(head, 1, 1)
        self.depth_std_head = nn.Conv2d(head, 1, 1)

    def forward(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        b = x.shape[0]
        f = self.neck(self.backbone(x))

        def cells(t: torch.Tensor) -> torch.Tensor:
            return t.permute(0, 2, 3, 1).reshape(b, -1, t.shape[1])

        return {
            "pres_p": torch.sigmoid(cells(self.pres_head(f))).squeeze(-1),
            "where_mu": cells(self.where_mu_head(f)),
            "where_std": F.softplus(cells(self.where_std_head(f))) + 1e-4,
            "depth_mu": cells(self.depth_mu_head(f)).squeeze(-1),
            "depth_std": F.softplus(cells(self.depth_std_head(f))).squeeze(-1) + 1e-4,
        }


class GlimpseEncoder(nn.Module):
    def __init__(self, config: SpaceConfig):
        super().__init__()
        d_in = 3 * config.glimpse_size**2
        h = config.glimpse_hidden
        g = min(config.norm_groups, h)
        self.body = nn.Sequential(
            nn.Flatten(),
            nn.Linear(d_in, h), nn.GroupNorm(g, h), nn.ReLU(),
            nn.Linear(h, h), nn.GroupNorm(g, h), nn.ReLU(),
        )
        self.mu_head = nn.Linear(h, config.z_what_dim)
        self.std_head = nn.Linear(h, config.z_what_dim)

    def forward(self, patches: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        hidden = self.body(patches)
        return self.mu_head(hidden), F.softplus(self.std_head(hidden)) + 1e-4


class GlimpseDecoder(nn.Module):
    """Appearance code -> RGB patch + alpha mask (4 channels, sigmoid)."""

    def __init__(self, config: SpaceConfig):
        super().__init__()
        h = config.glimpse_hidden
        g = min(config.norm_groups, h)
        self.size = config.glimpse_size
        self.body = nn.Sequential(
            nn.Linear(config.z_what_dim, h), nn.GroupNorm(g, h), nn.ReLU(),
            nn.Linear(h, h), nn.GroupNorm(g, h), nn.ReLU(),
            nn.Linear(h, 4 * self.size**2),
        )

    def forward(self, z_what: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        out = torch.sigmoid(self.body(z_what)).view(-1, 4, self.size, self.size)
        return out[:, :3], out[:, 3:4]


class BackgroundModule(nn.Module):
    """Plain encoder/decoder reconstruction of the background (not a VAE)."""

    def __init__(self, config: SpaceConfig):
        super().__init__()
        self.image_size = config.image_size
        self.encoder = _conv_stack(config.bg_plan)
        ch = config.bg_plan[-1][0]
        h = config.bg_hidden
        self.decoder = nn.Sequential(
            nn.Linear(ch, h), nn.ReLU(),
            nn.Linear(h, 3 * config.image_size**2),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        f = self.encoder(x)
        f = torch.amax(f, dim=(2, 3))
        out = torch.sigmoid(self.decoder(f))
        return out.view(-1, 3, self.image_size, self.image_size)


def gaussian_kl(mu: torch.Tensor, std: torch.Tensor, prior_mean: float,
                prior_std: float) -> torch.Tensor:
    """Elementwise KL(N(mu, std) || N(prior_mean, prior_std)); always >= 0."""
    var_ratio = (std / prior_std) ** 2
    return 0.5 * (var_ratio + ((mu - prior_mean) / prior_std) ** 2 - 1.0) - torch.log(
        std / prior_std
    )


def bernoulli_kl(p: torch.Tensor, q: float) -> torch.Tensor:
    """Elementwise KL(Bern(p) || Bern(q)) in probability space."""
    p = p.clamp(_EPS, 1.0 - _EPS)
    q = min(max(q, _EPS), 1.0 - _EPS)
    return p * (torch.log(p) - math.log(q)) + (1.0 - p) * (
        torch.log1p(-p) - math.log(1.0 - q)
    )


def gaussian_logpdf(x: torch.Tensor, mean: torch.Tensor, std: float) -> torch.Tensor:
    return -0.5 * ((x - mean) / std) ** 2 - math.log(std) - 0.5 * _LOG_2PI


def mixture_likelihood(x: torch.Tensor, fg_mean: torch.Tensor, bg_mean: torch.Tensor,
                       alpha: torch.Tensor, fg_std: float, bg_std: float) -> torch.Tensor:
    """Log-likelihood of the per-pixel foreground/background Gaussian
    mixture, summed over pixels and channels.

    Accepts [C, H, W] (returns a scalar) or [B, C, H, W] (returns [B]).
    ``alpha`` is clamped away from {0, 1} for a finite gradient.
    """
    batched = x.ndim == 4
    if not batched:
        x, fg_mean, bg_mean, alpha = x[None], fg_mean[None], bg_mean[None], alpha[None]
    alpha = alpha.clamp(_EPS, 1.0 - _EPS)
    log_fg = torch.log(alpha) + gaussian_logpdf(x, fg_mean, fg_std)
    log_bg = torch.log1p(-alpha) + gaussian_logpdf(x, bg_mean, bg_std)
    ll = torch.logaddexp(log_fg, log_bg).sum(dim=(1, 2, 3))
    return ll if batched else ll[0]


@dataclass
class Detection:
    box: BBox
    score: float
    what: np.ndarray
    depth: float


class SpaceModel(nn.Module):
    def __init__(self, config: SpaceConfig):
        super().__init__()
        self.config = config
        self.cell_encoder = CellEncoder(config)
        self.glimpse_encoder = GlimpseEncoder(config)
        self.glimpse_decoder = GlimpseDecoder(config)
        self.background = BackgroundModule(config) if config.background else None
        self.register_buffer("anchors", config.anchor_grid.as_tensor(), persistent=False)

    # ---------------------------------------------------------------- helpers
    def _check_input(self, x: torch.Tensor) -> None:
        s = self.config.image_size
        if x.shape[-2:] != (s, s) or x.shape[-3] != 3:
            raise ValueError(f"expected [B, 3, {s}, {s}] input, got {tuple(x.shape)}")

    def _crop_glimpses(self, x: torch.Tensor, boxes: torch.Tensor) -> torch.Tensor:
        """x [B, 3, H, W], boxes [B, G, 4] -> patches [B*G, 3, P, P]."""
        b, g = boxes.shape[:2]
        imgs = x.unsqueeze(1).expand(b, g, *x.shape[1:]).reshape(b * g, *x.shape[1:])
        return crop_boxes(imgs, boxes.reshape(b * g, 4), self.config.glimpse_size)

    def background_mean(self, x: torch.Tensor) -> torch.Tensor:
        if self.background is None:
            return torch.zeros_like(x)
        return self.background(x)

    # ------------------------------------------------------------------ elbo
    def elbo(
        self,
        x: torch.Tensor,
        step: int,
        generator: torch.Generator | None = None,
        noises: dict[str, torch.Tensor] | None = None,
    ) -> tuple[torch.Tensor, dict[str, float], dict]:
        """Negative evidence lower bound (the training loss) and its parts.

        ``noises`` fixes every stochastic draw (keys: where, what, depth,
        pres) so gradients can be checked against finite differences.
        """
        self._check_input(x)
        cfg = self.config
        pri = cfg.priors
        b = x.shape[0]
        g = cfg.anchor_grid.cells
        enc = self.cell_encoder(x)

        def noise(name, shape):
            if noises is not None:
                return noises[name]
            if name == "pres":
                return logistic_noise(shape, generator=generator, dtype=x.dtype)
            return torch.randn(shape, generator=generator, dtype=x.dtype)

        z_where = enc["where_mu"] + enc["where_std"] * noise("where", (b, g, 4))
        boxes = decode_boxes_tensor(z_where, self.anchors)
        # keep the spatial transforms finite: a near-zero box size makes the
        # paste transform's 1/w explode, a runaway center adds nothing
        min_size = 1.0 / cfg.image_size
        boxes = torch.stack(
            [
                boxes[..., 0].clamp(-0.5, 1.5),
                boxes[..., 1].clamp(-0.5, 1.5),
                boxes[..., 2].clamp(min_size, 2.0),
                boxes[..., 3].clamp(min_size, 2.0),
            ],
            dim=-1,
        )

        patches = self._crop_glimpses(x, boxes)
        what_mu, what_std = self.glimpse_encoder(patches)
        what_mu = what_mu.view(b, g, -1)
        what_std = what_std.view(b, g, -1)
        z_what = what_mu + what_std * noise("what", (b, g, cfg.z_what_dim))

        rgb, mask = self.glimpse_decoder(z_what.view(b * g, -1))
        canvas_rgb = paste_patches(rgb, boxes.reshape(b * g, 4),
                                   (cfg.image_size, cfg.image_size))
        canvas_mask = paste_patches(mask, boxes.reshape(b * g, 4),
                                    (cfg.image_size, cfg.image_size))
        canvas_rgb = canvas_rgb.view(b, g, 3, cfg.image_size, cfg.image_size)
        canvas_mask = canvas_mask.view(b, g, 1, cfg.image_size, cfg.image_size)

        temperature = pri.temperature_at(step)
        z_pres = sample_relaxed_presence(
            presence_logit(enc["pres_p"]), temperature,
            noise=noise("pres", (b, g)),
        )
        z_depth = enc["depth_mu"] + enc["depth_std"] * noise("depth", (b, g))

        pres_mask = z_pres.view(b, g, 1, 1, 1) * canvas_mask
        # compositing weights: the 1e-5 floor and the bounded depth term keep
        # the log/exp gradients inside fp32 range (weights of near-invisible
        # cells are irrelevant to the reconstruction anyway)
        depth_term = pri.depth_scale * z_depth.clamp(-5.0, 5.0).view(b, g, 1, 1, 1)
        weight_logits = torch.log(pres_mask + 1e-5) + depth_term
        weights = torch.softmax(weight_logits, dim=1)
        fg_mean = (weights * canvas_rgb).sum(dim=1)
        alpha = 1.0 - torch.prod(1.0 - pres_mask, dim=1)

        bg_mean = self.background_mean(x)
        ll = mixture_likelihood(x, fg_mean, bg_mean, alpha, pri.fg_recon_std,
                                pri.bg_recon_std)
        recon_nll = -ll

        kl_pres = bernoulli_kl(enc["pres_p"], pri.pres_prior_at(step)).sum(dim=1)
        kl_where = gaussian_kl(enc["where_mu"], enc["where_std"],
                               pri.where_prior_mean, pri.where_prior_std).sum(dim=(1, 2))
        kl_what = gaussian_kl(what_mu, what_std, pri.what_prior_mean,
                              pri.what_prior_std).sum(dim=(1, 2))
        kl_depth = gaussian_kl(enc["depth_mu"], enc["depth_std"],
                               pri.depth_prior_mean, pri.depth_prior_std).sum(dim=1)

        loss = (recon_nll + kl_pres + kl_where + kl_what + kl_depth).mean()
        if not torch.isfinite(loss):
            raise FloatingPointError(
                "non-finite ELBO: "
                f"recon={recon_nll.mean().item():.4g} pres={kl_pres.mean().item():.4g} "
                f"where={kl_where.mean().item():.4g} what={kl_what.mean().item():.4g} "
                f"depth={kl_depth.mean().item():.4g}"
            )
        components = {
            "recon_nll": recon_nll.mean().item(),
            "kl_pres": kl_pres.mean().item(),
            "kl_where": kl_where.mean().item(),
            "kl_what": kl_what.mean().item(),
            "kl_depth": kl_depth.mean().item(),
        }
        aux = {"boxes": boxes.detach(), "pres_p": enc["pres_p"].detach(),
               "alpha": alpha.detach(), "fg_mean": fg_mean.detach(),
               "bg_mean": bg_mean.detach()}
        return loss, components, aux

    # ------------------------------------------------------------- inference
    @torch.no_grad()
    def candidates(self, frame: np.ndarray | torch.Tensor) -> list[Detection]:
        """All grid-cell proposals (posterior means), sorted by score."""
        was_training = self.training
        self.eval()
        try:
            x = self._frame_tensor(frame)
            enc = self.cell_encoder(x)
            boxes = decode_boxes_tensor(enc["where_mu"], self.anchors)
            patches = self._crop_glimpses(x, boxes)
            what_mu, _ = self.glimpse_encoder(patches)
            scores = enc["pres_p"][0]
            out = []
            for i in range(boxes.shape[1]):
                bx, by, bw, bh = boxes[0, i].tolist()
                out.append(
                    Detection(
                        box=BBox(
                            x_ctr=min(max(bx, 0.0), 1.0),
                            y_ctr=min(max(by, 0.0), 1.0),
                            w=min(max(bw, _EPS), 1.0),
                            h=min(max(bh, _EPS), 1.0),
                        ),
                        score=float(scores[i]),
                        what=what_mu[i].numpy().copy(),
                        depth=float(enc["depth_mu"][0, i]),
                    )
                )
            out.sort(key=lambda d: -d.score)
            return out
        finally:
            self.train(was_training)

    def detect(self, frame: np.ndarray | torch.Tensor, threshold: float = 0.1) -> list[Detection]:
        """Proposals whose presence probability reaches the threshold."""
        return [d for d in self.candidates(frame) if d.score >= threshold]

    def _frame_tensor(self, frame: np.ndarray | torch.Tensor) -> torch.Tensor:
        if isinstance(frame, np.ndarray):
            arr = frame.astype(np.float32)
            if frame.dtype == np.uint8:
                arr = arr / 255.0
            t = torch.from_numpy(arr).permute(2, 0, 1)[None]
        else:
            t = frame if frame.ndim == 4 else frame[None]
        self._check_input(t)
        return t
