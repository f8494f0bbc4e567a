"""Self-supervised object detector: scene-decomposition VAE with
anchor-relative box regression and a simplified background branch."""

from .boxes import (
    Anchor,
    AnchorGrid,
    BoxOffsets,
    decode_box,
    decode_boxes_tensor,
    encode_box,
    encode_boxes_tensor,
)
from .model import (
    Detection,
    SpaceConfig,
    SpaceModel,
    bernoulli_kl,
    gaussian_kl,
    mixture_likelihood,
)
from .priors import PriorSchedule, anneal
from .relaxed import logistic_noise, presence_logit, sample_relaxed_presence
from .stn import crop_boxes, paste_patches, stn_crop
from .train import DetectorResult, DetectorTrainConfig, load_detector, save_detector, train_detector

__all__ = [
    "Anchor",
    "AnchorGrid",
    "BoxOffsets",
    "decode_box",
    "decode_boxes_tensor",
    "encode_box",
    "encode_boxes_tensor",
    "Detection",
    "SpaceConfig",
    "SpaceModel",
    "bernoulli_kl",
    "gaussian_kl",
    "mixture_likelihood",
    "PriorSchedule",
    "anneal",
    "logistic_noise",
    "presence_logit",
    "sample_relaxed_presence",
    "crop_boxes",
    "paste_patches",
    "stn_crop",
    "DetectorResult",
    "DetectorTrainConfig",
    "load_detector",
    "save_detector",
    "train_detector",
]
