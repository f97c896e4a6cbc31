"""Fixed-length clip segmentation and peak level measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wav import Waveform

DEFAULT_CLIP_LENGTH = 10.0
DEFAULT_DB_FLOOR = -80.0


@dataclass
class Clip:
    """A fixed-length slice of one song's waveform."""

    song_id: str
    start: float
    length: float
    samples: np.ndarray
    sample_rate: int
    index: int = 0

    @property
    def clip_ref(self) -> str:
        """Stable identifier: song id plus zero-padded clip index."""
        return f"{self.song_id}/{self.index:04d}"


def segment_clips(w: Waveform, clip_length: float = DEFAULT_CLIP_LENGTH) -> list[Clip]:
    """Split a waveform into consecutive non-overlapping clips starting at 0.

    The trailing remainder shorter than ``clip_length`` is dropped; a
    waveform shorter than one clip yields an empty list.
    """
    if clip_length <= 0:
        raise ValueError("clip_length must be positive")
    spc = int(round(clip_length * w.sample_rate))
    n = len(w.samples) // spc
    return [
        Clip(
            song_id=w.song_id,
            start=i * clip_length,
            length=clip_length,
            samples=w.samples[i * spc : (i + 1) * spc],
            sample_rate=w.sample_rate,
            index=i,
        )
        for i in range(n)
    ]


def peak_db(clip: Clip | np.ndarray, db_floor: float = DEFAULT_DB_FLOOR) -> float:
    """20*log10 of the maximum absolute amplitude; digital silence maps to the floor."""
    samples = clip.samples if isinstance(clip, Clip) else np.asarray(clip)
    if samples.size == 0:
        raise ValueError("empty clip")
    peak = float(np.max(np.abs(samples)))
    if peak <= 0.0:
        return db_floor
    return max(20.0 * float(np.log10(peak)), db_floor)
