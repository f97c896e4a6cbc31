"""Run configuration: one JSON file per run, CLI flags override keys.

A single global seed is forked deterministically per stage (and per clip
for generation) so stages are individually reproducible.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

DEFAULT_CONFIG: dict[str, Any] = {
    "seed": 0,
    "data": {
        "songs_per_class": 50,
        "alternating_segments": 8,
        "sample_rate": 22050,
        "clip_length": 10.0,
        "song_length_range": [30.0, 60.0],
        "songs_per_album": 4,
    },
    "mel": {
        "sample_rate": 22050,
        "window_size": 2048,
        "hop": 512,
        "n_mels": 80,
        "f_min": 0.0,
        "f_max": 11025.0,
        "db_floor": -80.0,
    },
    "prep": {"coarse_categories": ["intense"]},
    "vocab": {"min_count": 1},
    "spec_vae": {
        "latent_dim": 64,
        "channels": [32, 64, 128, 256],
        "epochs": 100,
        "batch_size": 32,
        "learning_rate": 1e-3,
        "beta": 1.0,
        "beta_warmup_epochs": 10,
    },
    "text_vae": {
        "latent_dim": 64,
        "embed_dim": 128,
        "hidden_size": 256,
        "epochs": 30,
        "batch_size": 32,
        "learning_rate": 1e-3,
        "beta": 1.0,
        "beta_warmup_epochs": 10,
        "word_dropout": 0.4,
        "max_line_len": 20,
        "validation_fraction": 0.1,
    },
    "generate": {"n_lines": 100, "temperature": 0.8},
    "eval": {
        "retrieval_ns": [50, 100],
        "rbo_p": 0.9,
        "rbo_depth": 100,
        "n_lines_per_clip": 100,
        "temperature": 0.8,
        "smoothing": 0.5,
        "fig2_songs_per_class": 8,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Defaults, deep-merged with the JSON file when given."""
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    user = json.loads(Path(path).read_text(encoding="utf-8"))
    return _merge(DEFAULT_CONFIG, user)


def fork_seed(seed: int, label: str) -> int:
    """Stable 63-bit child seed for a named stage or item."""
    digest = hashlib.blake2b(f"{seed}/{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") % (2**63)


def write_run_manifest(
    out_dir: str | Path, command: str, config: dict, inputs: dict[str, str] | None = None
) -> None:
    """Config snapshot + seed + input checkpoint hashes for one command run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "seed": config.get("seed"),
        "config": config,
        "inputs": inputs or {},
    }
    (out_dir / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
    )
