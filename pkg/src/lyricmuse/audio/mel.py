"""MEL spectrogram extraction.

Pure numpy/scipy implementation: centered magnitude STFT with a periodic
Hann window, a triangular MEL filterbank on the HTK mel scale, and
power-to-dB conversion clamped at a configurable floor. Kept dependency-free
so spectrogram bytes are reproducible across machines.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np
import scipy.fft

from .segment import Clip


@dataclass(frozen=True)
class MelConfig:
    """Spectrogram parameters; must be identical across training and inference."""

    sample_rate: int = 22050
    window_size: int = 2048
    hop: int = 512
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float = 11025.0
    db_floor: float = -80.0

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not (0 <= self.f_min < self.f_max <= self.sample_rate / 2):
            raise ValueError(f"need 0 <= f_min < f_max <= nyquist, got {self.f_min}..{self.f_max}")
        if self.hop <= 0 or self.hop > self.window_size:
            raise ValueError("need 0 < hop <= window_size")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")
        if self.db_floor >= 0:
            raise ValueError("db_floor must be negative")

    @property
    def config_ref(self) -> str:
        """Short digest identifying this parameter set."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def n_frames(self, n_samples: int) -> int:
        """Frame count of a centered STFT over ``n_samples`` samples."""
        return 1 + n_samples // self.hop


@dataclass
class Spectrogram:
    """MEL power matrix in dB for one clip, shape (n_mels, n_frames)."""

    values: np.ndarray
    clip_ref: str
    config_ref: str


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_freqs(cfg: MelConfig) -> np.ndarray:
    """Center frequency in Hz of each MEL filter."""
    mels = np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mels + 2)
    return np.asarray(mel_to_hz(mels))[1:-1]


def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular MEL filterbank, shape (n_mels, window_size // 2 + 1).

    Filters have unit peak, are non-negative, and their centers are strictly
    increasing in Hz.
    """
    n_freq = cfg.window_size // 2 + 1
    fft_freqs = np.arange(n_freq, dtype=np.float64) * cfg.sample_rate / cfg.window_size
    mels = np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mels + 2)
    edges = np.asarray(mel_to_hz(mels))  # lower, center, upper per filter

    fb = np.zeros((cfg.n_mels, n_freq), dtype=np.float64)
    for i in range(cfg.n_mels):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (fft_freqs - lo) / (center - lo)
        falling = (hi - fft_freqs) / (hi - center)
        fb[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def stft_power(samples: np.ndarray, cfg: MelConfig) -> np.ndarray:
    """Centered power STFT, shape (window_size // 2 + 1, n_frames)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected mono samples")
    win = cfg.window_size
    pad = win // 2
    padded = np.pad(x, (pad, pad), mode="reflect" if len(x) > pad else "constant")
    n_frames = 1 + len(x) // cfg.hop

    idx = np.arange(win)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    frames = padded[idx]  # (n_frames, window_size)
    window = np.hanning(win + 1)[:-1]  # periodic Hann
    spec = scipy.fft.rfft(frames * window, axis=1)
    return (np.abs(spec) ** 2).T


def power_to_db(power: np.ndarray, ref: float, db_floor: float) -> np.ndarray:
    """10*log10(power / ref) clamped at ``db_floor``; a non-positive ref floors everything."""
    if ref <= 0.0:
        return np.full_like(power, db_floor, dtype=np.float64)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power / ref)
    return np.maximum(db, db_floor)


def mel_spectrogram(clip: Clip, cfg: MelConfig, ref_power: float | None = None) -> Spectrogram:
    """MEL power spectrogram in dB for one clip.

    ``ref_power`` sets the 0 dB point; it defaults to this clip's own maximum
    MEL power. Pass a corpus-wide maximum to make levels comparable across
    clips (the preprocessing pipeline does this).
    """
    if clip.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"clip rate {clip.sample_rate} != config rate {cfg.sample_rate}; resample upstream"
        )
    mel_power = mel_filterbank(cfg) @ stft_power(clip.samples, cfg)
    ref = float(np.max(mel_power)) if ref_power is None else float(ref_power)
    db = power_to_db(mel_power, ref, cfg.db_floor)
    return Spectrogram(
        values=db.astype(np.float32),
        clip_ref=clip.clip_ref,
        config_ref=cfg.config_ref,
    )


def mel_power(clip: Clip, cfg: MelConfig) -> np.ndarray:
    """Raw MEL power matrix (no dB conversion); used to find a corpus reference level."""
    if clip.sample_rate != cfg.sample_rate:
        raise ValueError("clip/config sample-rate mismatch")
    return mel_filterbank(cfg) @ stft_power(clip.samples, cfg)


def to_unit_range(values: np.ndarray, db_floor: float) -> np.ndarray:
    """Affinely rescale dB values in [db_floor, 0] to [0, 1] for VAE ingestion."""
    return np.clip((np.asarray(values, dtype=np.float32) - db_floor) / (-db_floor), 0.0, 1.0)


def from_unit_range(values: np.ndarray, db_floor: float) -> np.ndarray:
    """Inverse of :func:`to_unit_range`."""
    return np.asarray(values, dtype=np.float32) * (-db_floor) + db_floor
