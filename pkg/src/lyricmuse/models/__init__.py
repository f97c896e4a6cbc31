"""The two VAEs: spectrogram encoder/decoder and the audio-conditioned text model."""

from .common import GaussianParams, TrainingDiverged, gaussian_kl, reparameterize
from .spec_vae import SpectrogramVAE
from .text_vae import ConditionedTextVAE, GenerationRequest
from .checkpoint import checkpoint_hash, load_checkpoint, save_checkpoint

__all__ = [
    "GaussianParams",
    "TrainingDiverged",
    "gaussian_kl",
    "reparameterize",
    "SpectrogramVAE",
    "ConditionedTextVAE",
    "GenerationRequest",
    "save_checkpoint",
    "load_checkpoint",
    "checkpoint_hash",
]
