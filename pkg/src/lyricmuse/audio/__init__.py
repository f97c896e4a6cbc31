"""Audio pipeline: WAV loading, clip segmentation, MEL spectrograms, alignment."""

from .wav import Waveform, WavFormatError, load_waveform, resample
from .segment import Clip, peak_db, segment_clips
from .mel import MelConfig, Spectrogram, mel_filterbank, mel_spectrogram, to_unit_range
from .align import AlignedPair, LineAnnotation, align_coarse, align_manual, read_annotations
from .store import SpectrogramStore

__all__ = [
    "Waveform",
    "WavFormatError",
    "load_waveform",
    "resample",
    "Clip",
    "segment_clips",
    "peak_db",
    "MelConfig",
    "Spectrogram",
    "mel_filterbank",
    "mel_spectrogram",
    "to_unit_range",
    "LineAnnotation",
    "AlignedPair",
    "align_manual",
    "align_coarse",
    "read_annotations",
    "SpectrogramStore",
]
