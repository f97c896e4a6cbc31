"""Synthetic paired audio/lyrics dataset.

Stands in for a real lyrics corpus at desk scale: two sound-alike classes
("calm" low-frequency tones at low level, "intense" wideband noise bursts
at high level) with class-specific template grammars over disjoint theme
vocabularies. Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..audio.align import LineAnnotation
from ..audio.wav import Waveform

LOW_TONE = "low-tone"
NOISE_BURST = "noise-burst"

_DEFAULT_TEMPLATES = (
    ("det", "adj", "noun", "verb"),
    ("det", "noun", "verb", "prep", "det", "noun"),
    ("adj", "noun", "verb", "prep", "det", "adj", "noun"),
    ("det", "noun", "verb"),
    ("adj", "adj", "noun", "verb"),
    ("noun", "prep", "det", "noun"),
)

_CALM_ROLES = {
    "det": ["the"],
    "noun": ["moon", "river", "breeze", "willow", "lake", "dusk", "snow", "dream"],
    "verb": ["drifts", "sleeps", "glows", "whispers", "settles", "floats"],
    "adj": ["quiet", "silver", "gentle", "pale", "soft", "slow"],
    "prep": ["over", "beneath"],
}

_INTENSE_ROLES = {
    "det": ["a"],
    "noun": ["fire", "storm", "engine", "hammer", "siren", "wire", "thunder", "steel"],
    "verb": ["burns", "screams", "shatters", "pounds", "rattles", "ignites"],
    "adj": ["loud", "furious", "burning", "savage", "wild", "sharp"],
    "prep": ["against", "through"],
}


@dataclass(frozen=True)
class SynthClass:
    """One category: how its audio sounds and which words its lines use."""

    name: str
    generator: str  # LOW_TONE | NOISE_BURST
    roles: dict[str, tuple[str, ...]]
    peak_range: tuple[float, float]
    templates: tuple[tuple[str, ...], ...] = tuple(_DEFAULT_TEMPLATES)

    def vocabulary(self) -> set[str]:
        return {w for words in self.roles.values() for w in words}


@dataclass(frozen=True)
class SynthSpec:
    """Full recipe for one synthetic corpus; the seed determines every byte."""

    classes: tuple[SynthClass, ...]
    songs_per_class: int
    seed: int
    sample_rate: int = 22050
    clip_length: float = 10.0
    song_length_range: tuple[float, float] = (30.0, 60.0)
    line_spacing: float = 2.5
    songs_per_album: int = 4
    require_disjoint: bool = True


@dataclass
class SynthDataset:
    waveforms: list[Waveform]
    annotations: dict[str, list[LineAnnotation]]
    song_labels: dict[str, dict[str, str]]  # song_id -> {album_id, artist_id, category}
    class_vocab: dict[str, set[str]] = field(default_factory=dict)

    def all_lines(self) -> list[str]:
        return [ann.text for anns in self.annotations.values() for ann in anns]


def default_synth_spec(songs_per_class: int = 50, seed: int = 0, **overrides) -> SynthSpec:
    """The standard two-class calm/intense spec used by tests and the CLI."""
    classes = (
        SynthClass(
            name="calm",
            generator=LOW_TONE,
            roles={k: tuple(v) for k, v in _CALM_ROLES.items()},
            peak_range=(0.08, 0.18),
        ),
        SynthClass(
            name="intense",
            generator=NOISE_BURST,
            roles={k: tuple(v) for k, v in _INTENSE_ROLES.items()},
            peak_range=(0.70, 0.95),
        ),
    )
    return SynthSpec(classes=classes, songs_per_class=songs_per_class, seed=seed, **overrides)


def _render_audio(cls: SynthClass, duration: float, sr: int, rng: np.random.Generator) -> np.ndarray:
    n = int(round(duration * sr))
    t = np.arange(n, dtype=np.float64) / sr
    if cls.generator == LOW_TONE:
        n_sin = int(rng.integers(2, 5))
        freqs = rng.uniform(60.0, 380.0, size=n_sin)
        phases = rng.uniform(0.0, 2 * np.pi, size=n_sin)
        amps = rng.uniform(0.5, 1.0, size=n_sin)
        x = np.zeros(n)
        for f, p, a in zip(freqs, phases, amps):
            x += a * np.sin(2 * np.pi * f * t + p)
        lfo_rate = rng.uniform(0.08, 0.3)
        x *= 0.75 + 0.25 * np.sin(2 * np.pi * lfo_rate * t)
    elif cls.generator == NOISE_BURST:
        x = rng.standard_normal(n)
        gate = np.zeros(n)
        pos = 0
        while pos < n:
            burst = int(rng.uniform(0.10, 0.35) * sr)
            gap = int(rng.uniform(0.05, 0.25) * sr)
            gate[pos : pos + burst] = 1.0
            pos += burst + gap
        x *= gate
    else:
        raise ValueError(f"unknown audio generator {cls.generator!r}")

    peak = rng.uniform(*cls.peak_range)
    max_abs = np.max(np.abs(x))
    if max_abs > 0:
        x = x / max_abs * peak
    return x.astype(np.float32)


def _render_line(cls: SynthClass, rng: np.random.Generator) -> str:
    template = cls.templates[int(rng.integers(len(cls.templates)))]
    return " ".join(cls.roles[role][int(rng.integers(len(cls.roles[role])))] for role in template)


def _render_lines(
    cls: SynthClass, start: float, end: float, spacing: float, rng: np.random.Generator
) -> list[LineAnnotation]:
    out = []
    t = start + 0.6
    while t < end - 0.4:
        onset = t + float(rng.uniform(0.0, 0.3 * spacing))
        if onset < end - 0.05:  # jitter must not push past the segment
            out.append(LineAnnotation(onset=onset, text=_render_line(cls, rng)))
        t += spacing
    return out


def _check_disjoint(spec: SynthSpec) -> None:
    for i, a in enumerate(spec.classes):
        for b in spec.classes[i + 1 :]:
            shared = a.vocabulary() & b.vocabulary()
            if shared:
                raise ValueError(f"classes {a.name!r}/{b.name!r} share words: {sorted(shared)}")


def synthesize_dataset(spec: SynthSpec) -> SynthDataset:
    """Generate waveforms, line annotations and labels for every song in the recipe."""
    if spec.require_disjoint:
        _check_disjoint(spec)
    root_ss = np.random.SeedSequence(spec.seed)
    song_seeds = root_ss.spawn(len(spec.classes) * spec.songs_per_class)

    ds = SynthDataset(waveforms=[], annotations={}, song_labels={})
    for c_idx, cls in enumerate(spec.classes):
        ds.class_vocab[cls.name] = cls.vocabulary()
        for s_idx in range(spec.songs_per_class):
            rng = np.random.default_rng(song_seeds[c_idx * spec.songs_per_class + s_idx])
            duration = float(rng.uniform(*spec.song_length_range))
            song_id = f"{cls.name}_song{s_idx:03d}"
            samples = _render_audio(cls, duration, spec.sample_rate, rng)
            ds.waveforms.append(
                Waveform(
                    samples=samples,
                    sample_rate=spec.sample_rate,
                    song_id=song_id,
                    album_id=f"{cls.name}_album{s_idx // spec.songs_per_album:02d}",
                    artist_id=cls.name,
                )
            )
            ds.annotations[song_id] = _render_lines(cls, 0.0, duration, spec.line_spacing, rng)
            ds.song_labels[song_id] = {
                "album_id": f"{cls.name}_album{s_idx // spec.songs_per_album:02d}",
                "artist_id": cls.name,
                "category": cls.name,
            }
    return ds


def synthesize_alternating_song(
    spec: SynthSpec, n_segments: int = 8, seed: int | None = None, song_id: str = "alternating"
) -> tuple[Waveform, list[LineAnnotation], list[str]]:
    """One song whose clip-length segments alternate between the first two classes.

    Returns the waveform, its line annotations, and the per-segment category
    ground truth (used by the timeline analysis).
    """
    if len(spec.classes) < 2:
        raise ValueError("need at least two classes")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed if seed is None else seed))
    sr = spec.sample_rate
    seg_len = spec.clip_length
    pieces: list[np.ndarray] = []
    annotations: list[LineAnnotation] = []
    categories: list[str] = []
    for i in range(n_segments):
        cls = spec.classes[i % 2]
        pieces.append(_render_audio(cls, seg_len, sr, rng))
        annotations.extend(_render_lines(cls, i * seg_len, (i + 1) * seg_len, spec.line_spacing, rng))
        categories.append(cls.name)
    w = Waveform(
        samples=np.concatenate(pieces),
        sample_rate=sr,
        song_id=song_id,
        album_id="mixed_album",
        artist_id="mixed",
    )
    return w, annotations, categories
