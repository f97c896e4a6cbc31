"""Persistence for lines corpora and assembly of the paired training examples."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .vocab import DEFAULT_MAX_LINE_LEN, Vocabulary, tokenize


@dataclass
class PairedExample:
    """One training pair: a tokenized line and the clip it belongs to."""

    tokens: list[int]
    spec_ref: str
    embedding: np.ndarray | None = None


def make_paired_examples(
    lines_with_refs: list[tuple[str, str]],
    vocab: Vocabulary,
    max_line_len: int = DEFAULT_MAX_LINE_LEN,
) -> list[PairedExample]:
    """Tokenize (line, clip_ref) pairs into training examples."""
    return [
        PairedExample(tokens=tokenize(line, vocab, max_line_len), spec_ref=ref)
        for line, ref in lines_with_refs
    ]


def attach_embeddings(
    examples: list[PairedExample], by_ref: dict[str, np.ndarray]
) -> list[PairedExample]:
    """Fill each example's embedding from its clip; unresolvable refs are an error."""
    out = []
    for ex in examples:
        if ex.spec_ref not in by_ref:
            raise KeyError(f"no embedding for clip {ex.spec_ref}")
        out.append(replace(ex, embedding=np.asarray(by_ref[ex.spec_ref], dtype=np.float32)))
    return out


def save_lines_corpus(path: str | Path, lines: list[str], clip_refs: list[str]) -> None:
    """One line per row plus a JSON sidecar mapping line index -> clip_ref."""
    if len(lines) != len(clip_refs):
        raise ValueError("lines and clip_refs must have equal length")
    path = Path(path)
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    sidecar = path.with_suffix(path.suffix + ".refs.json")
    sidecar.write_text(json.dumps(clip_refs, indent=0), encoding="utf-8")


def load_lines_corpus(path: str | Path) -> tuple[list[str], list[str]]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    sidecar = path.with_suffix(path.suffix + ".refs.json")
    clip_refs = json.loads(sidecar.read_text(encoding="utf-8"))
    if len(lines) != len(clip_refs):
        raise ValueError(f"{path}: corpus/sidecar length mismatch")
    return lines, clip_refs
