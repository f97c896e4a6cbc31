"""WAV loading and the in-memory waveform type.

Only PCM WAV files are accepted: 16-bit integer or 32-bit float, mono or
stereo. Samples are normalized to [-1, 1] floats regardless of the on-disk
encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile


class WavFormatError(ValueError):
    """Unsupported or unreadable WAV content."""


@dataclass
class Waveform:
    """One song's mono audio plus its identity labels."""

    samples: np.ndarray
    sample_rate: int
    song_id: str
    album_id: str = ""
    artist_id: str = ""

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate


def load_waveform(
    path: str | Path,
    downmix: bool = True,
    song_id: str | None = None,
    album_id: str = "",
    artist_id: str = "",
) -> Waveform:
    """Load a PCM WAV file into a normalized mono :class:`Waveform`.

    Stereo files are averaged across channels when ``downmix`` is set;
    loading a stereo file with ``downmix=False`` is an error because the
    rest of the pipeline is mono.
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:  # scipy raises assorted ValueError subclasses
        raise WavFormatError(f"{path}: unreadable WAV ({exc})") from exc

    if data.size == 0:
        raise WavFormatError(f"{path}: zero-length audio")

    if data.dtype == np.int16:
        samples = data.astype(np.float32) / 32768.0
    elif data.dtype == np.float32:
        samples = np.clip(data, -1.0, 1.0).astype(np.float32)
    else:
        raise WavFormatError(
            f"{path}: unsupported encoding {data.dtype}; use 16-bit PCM or 32-bit float"
        )

    if samples.ndim == 2:
        if samples.shape[1] > 2:
            raise WavFormatError(f"{path}: {samples.shape[1]} channels, expected 1-2")
        if not downmix:
            raise WavFormatError(f"{path}: stereo input requires downmix")
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise WavFormatError(f"{path}: unexpected sample layout {samples.shape}")

    return Waveform(
        samples=samples,
        sample_rate=int(rate),
        song_id=song_id if song_id is not None else path.stem,
        album_id=album_id,
        artist_id=artist_id,
    )


def save_waveform(path: str | Path, w: Waveform) -> None:
    """Write a waveform as 16-bit PCM WAV (exact inverse of the loader's scaling)."""
    pcm = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(Path(path), w.sample_rate, pcm)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Linear-interpolation resample to ``target_rate``.

    Quality is adequate for the synthetic corpus and casual uploads; no
    anti-aliasing filter is applied.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == w.sample_rate:
        return w
    n_out = int(round(len(w.samples) * target_rate / w.sample_rate))
    t_out = np.arange(n_out, dtype=np.float64) / target_rate
    t_in = np.arange(len(w.samples), dtype=np.float64) / w.sample_rate
    samples = np.interp(t_out, t_in, w.samples.astype(np.float64)).astype(np.float32)
    return Waveform(samples, target_rate, w.song_id, w.album_id, w.artist_id)
