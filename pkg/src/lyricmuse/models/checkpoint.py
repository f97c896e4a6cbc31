"""Checkpoints: a JSON manifest plus one raw tensor file per parameter.

Tensor files use the same binary layout as the spectrogram store (MSPC
header + row-major little-endian float32); parameters with other ranks are
stored as (dim0, prod(rest)) and their true shapes live in the manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..audio.mel import MelConfig
from ..corpus.vocab import Vocabulary
from ..tensorfile import read_tensor, write_tensor
from .spec_vae import SpectrogramVAE
from .text_vae import ConditionedTextVAE

MANIFEST_NAME = "manifest.json"
VOCAB_NAME = "vocab.json"


def _param_filename(name: str) -> str:
    return name.replace(".", "__") + ".mspc"


def _as_2d(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(arr.shape[0], 1)
    return arr.reshape(arr.shape[0], -1)


def save_checkpoint(
    directory: str | Path,
    estimator: SpectrogramVAE | ConditionedTextVAE,
    mel_config: MelConfig | None = None,
    ref_power: float | None = None,
    epoch: int | None = None,
) -> Path:
    """Persist a fitted estimator; returns the checkpoint directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    if isinstance(estimator, SpectrogramVAE):
        model_type = "spectrogram_vae"
        extra = {"input_shape": list(estimator.input_shape_)}
        params = estimator.get_params()
    elif isinstance(estimator, ConditionedTextVAE):
        model_type = "text_vae"
        extra = {}
        params = estimator.get_params()
        estimator.vocab.to_json(directory / VOCAB_NAME)
        params.pop("vocab")
    else:
        raise TypeError(f"cannot checkpoint {type(estimator).__name__}")

    state = estimator.module_.state_dict()
    shapes: dict[str, list[int]] = {}
    for name, tensor in state.items():
        arr = tensor.detach().numpy().astype(np.float32)
        shapes[name] = list(arr.shape)
        write_tensor(directory / _param_filename(name), _as_2d(arr))

    manifest = {
        "model_type": model_type,
        "hyperparameters": _jsonable(params),
        "seed": estimator.seed,
        "epoch": len(estimator.history_) if epoch is None else epoch,
        "params": shapes,
        **extra,
    }
    if mel_config is not None:
        manifest["mel_config"] = asdict(mel_config)
    if ref_power is not None:
        manifest["ref_power"] = ref_power
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True), "utf-8")
    return directory


def _jsonable(params: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}


def load_checkpoint(directory: str | Path) -> SpectrogramVAE | ConditionedTextVAE:
    """Rebuild a fitted estimator from a checkpoint directory."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))
    hp = dict(manifest["hyperparameters"])

    if manifest["model_type"] == "spectrogram_vae":
        hp["channels"] = tuple(hp["channels"])
        est = SpectrogramVAE(**hp)
        est._build(tuple(manifest["input_shape"]))
    elif manifest["model_type"] == "text_vae":
        vocab = Vocabulary.from_json(directory / VOCAB_NAME)
        est = ConditionedTextVAE(vocab=vocab, **hp)
        est._build()
    else:
        raise ValueError(f"unknown model_type {manifest['model_type']!r}")

    state = {}
    for name, shape in manifest["params"].items():
        flat = read_tensor(directory / _param_filename(name))
        state[name] = torch.from_numpy(flat.reshape(shape))
    est.module_.load_state_dict(state)
    est.module_.eval()
    est.history_ = [{"epoch": manifest["epoch"]}] if manifest["epoch"] else []
    if "mel_config" in manifest:
        est.mel_config_ = MelConfig(**manifest["mel_config"])
    if "ref_power" in manifest:
        est.ref_power_ = manifest["ref_power"]
    return est


def checkpoint_hash(directory: str | Path) -> str:
    """Stable digest over the manifest and every tensor file."""
    directory = Path(directory)
    digest = hashlib.sha256()
    for path in sorted(directory.iterdir()):
        if path.suffix in (".json", ".mspc"):
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()[:16]
