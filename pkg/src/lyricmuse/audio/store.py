"""Per-clip spectrogram persistence: one MSPC tensor file per clip plus a JSON index."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from ..tensorfile import read_tensor, write_tensor
from .mel import Spectrogram

INDEX_NAME = "index.json"


def _safe_name(clip_ref: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", clip_ref)


class SpectrogramStore:
    """Directory of spectrogram tensor files keyed by clip_ref.

    The index maps clip_ref -> {song_id, start, file}; ordering is by
    clip_ref so stores built in parallel are byte-identical.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index: dict[str, dict] = {}
        index_path = self.root / INDEX_NAME
        if index_path.exists():
            self._index = json.loads(index_path.read_text(encoding="utf-8"))

    def add(self, spec: Spectrogram, song_id: str, start: float) -> None:
        fname = _safe_name(spec.clip_ref) + ".mspc"
        write_tensor(self.root / fname, spec.values)
        self._index[spec.clip_ref] = {"song_id": song_id, "start": start, "file": fname}

    def flush(self) -> None:
        ordered = {ref: self._index[ref] for ref in sorted(self._index)}
        (self.root / INDEX_NAME).write_text(
            json.dumps(ordered, indent=2, sort_keys=True), encoding="utf-8"
        )

    def clip_refs(self) -> list[str]:
        return sorted(self._index)

    def meta(self, clip_ref: str) -> dict:
        return self._index[clip_ref]

    def load(self, clip_ref: str) -> np.ndarray:
        entry = self._index[clip_ref]
        return read_tensor(self.root / entry["file"])

    def load_all(self) -> tuple[list[str], np.ndarray]:
        """All spectrograms stacked in clip_ref order; shapes must agree."""
        refs = self.clip_refs()
        if not refs:
            raise ValueError(f"{self.root}: empty spectrogram store")
        return refs, np.stack([self.load(r) for r in refs])

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, clip_ref: str) -> bool:
        return clip_ref in self._index
