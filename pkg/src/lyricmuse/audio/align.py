"""Lyrics-to-clip alignment.

Two schemes: manual (per-line onset annotations, e.g. a Sonic Visualiser CSV
export) and coarse (a song's lines split into as many near-equal chunks as
the song has clips).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .segment import Clip
from .wav import Waveform


@dataclass
class LineAnnotation:
    """One lyric line and the time its vocal starts."""

    onset: float
    text: str


@dataclass
class AlignedPair:
    """Lyric lines attached to one clip."""

    clip_ref: str
    lines: list[str] = field(default_factory=list)
    precision: str = "high"  # "high" | "coarse"


def read_annotations(path: str | Path) -> list[LineAnnotation]:
    """Read a two-column CSV (time_seconds, line_text); the header row is optional."""
    out: list[LineAnnotation] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                onset = float(row[0])
            except ValueError:
                if not out:  # header row
                    continue
                raise
            text = row[1].strip() if len(row) > 1 else ""
            if not text:
                raise ValueError(f"{path}: empty line text at onset {onset}")
            out.append(LineAnnotation(onset=onset, text=text))
    _check_sorted(out)
    return out


def _check_sorted(annotations: list[LineAnnotation]) -> None:
    for a, b in zip(annotations, annotations[1:]):
        if b.onset <= a.onset:
            raise ValueError(f"annotation onsets must be strictly increasing ({a.onset} -> {b.onset})")


def align_manual(
    w: Waveform, annotations: list[LineAnnotation], clips: list[Clip]
) -> list[AlignedPair]:
    """Assign each annotated line to the clip containing its onset.

    Clip intervals are half-open [start, start+length), so a line at exactly
    a clip boundary belongs to the later clip. Clips that receive no lines
    are omitted; onsets landing in the dropped trailing remainder are skipped.
    """
    _check_sorted(annotations)
    if not clips:
        return []
    clip_length = clips[0].length
    by_index: dict[int, AlignedPair] = {}
    for ann in annotations:
        if ann.onset < 0 or ann.onset > w.duration:
            raise ValueError(f"onset {ann.onset} outside song duration {w.duration:.3f}")
        idx = int(ann.onset // clip_length)
        if idx >= len(clips):
            continue
        pair = by_index.setdefault(idx, AlignedPair(clip_ref=clips[idx].clip_ref, precision="high"))
        pair.lines.append(ann.text)
    return [by_index[i] for i in sorted(by_index)]


def align_coarse(clips: list[Clip], lines: list[str]) -> list[AlignedPair]:
    """Split lines into len(clips) contiguous near-equal chunks, chunk i -> clip i.

    When the count does not divide evenly, earlier chunks are one line longer.
    Clips whose chunk comes out empty are omitted.
    """
    if not clips:
        raise ValueError("no clips to align to")
    if not lines:
        raise ValueError("no lines to align")
    n, k = len(clips), len(lines)
    base, rem = divmod(k, n)
    out: list[AlignedPair] = []
    pos = 0
    for i, clip in enumerate(clips):
        size = base + (1 if i < rem else 0)
        if size == 0:
            continue
        out.append(AlignedPair(clip_ref=clip.clip_ref, lines=lines[pos : pos + size], precision="coarse"))
        pos += size
    return out
