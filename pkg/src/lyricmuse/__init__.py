"""lyricmuse: generate lyric lines whose lexicon and mood match a music clip.

A spectrogram VAE learns latent representations of MEL spectrograms; a text
VAE with an audio-conditioned decoder generates lines for any clip
embedding. Includes the full quantitative evaluation pipeline (latent-space
retrieval, word-KL / RBO analyses, peak-dB significance) and an HTTP service
for the interactive workbench.
"""

from .audio import MelConfig, Waveform, load_waveform, mel_spectrogram, peak_db, segment_clips
from .corpus import Vocabulary, build_vocab, detokenize, tokenize
from .models import ConditionedTextVAE, GenerationRequest, SpectrogramVAE

__version__ = "0.1.0"

__all__ = [
    "MelConfig",
    "Waveform",
    "load_waveform",
    "segment_clips",
    "mel_spectrogram",
    "peak_db",
    "Vocabulary",
    "build_vocab",
    "tokenize",
    "detokenize",
    "SpectrogramVAE",
    "ConditionedTextVAE",
    "GenerationRequest",
    "__version__",
]
