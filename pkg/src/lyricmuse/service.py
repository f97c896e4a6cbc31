"""HTTP facade for the workbench UI and scripts.

Uploads are segmented to the configured clip length, converted to
spectrograms with the spectrogram model's MelConfig, embedded, and
persisted; generation delegates to the text model with the stored clip
embedding. Records live in a single sqlite file, blobs (audio,
spectrograms, embeddings) on the filesystem next to it.
"""

from __future__ import annotations

import os
import secrets
import sqlite3
import tempfile
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .audio.mel import MelConfig, mel_spectrogram, to_unit_range
from .audio.segment import peak_db, segment_clips
from .audio.wav import Waveform, WavFormatError, load_waveform, resample, save_waveform
from .models.checkpoint import checkpoint_hash, load_checkpoint
from .tensorfile import read_tensor, write_tensor

MAX_UPLOAD_BYTES = 64 * 1024 * 1024
MAX_LINES_PER_REQUEST = 500


class GenerateBody(BaseModel):
    clip_id: str
    n_lines: int = Field(default=100, ge=1, le=MAX_LINES_PER_REQUEST)
    temperature: float = Field(default=0.8, ge=0.0)
    seed: int | None = Field(default=None, ge=0, lt=2**64)


class FavoriteBody(BaseModel):
    clip_id: str
    line: str


class RecordStore:
    """sqlite-backed clip and favorite records; writes are serialized per connection."""

    def __init__(self, db_path: Path):
        self.conn = sqlite3.connect(db_path, check_same_thread=False)
        self._write_lock = threading.Lock()
        self.conn.execute(
            "CREATE TABLE IF NOT EXISTS clips ("
            " clip_id TEXT PRIMARY KEY, filename TEXT, duration REAL,"
            " peak_db REAL, embedding_file TEXT, created_at TEXT)"
        )
        self.conn.execute(
            "CREATE TABLE IF NOT EXISTS favorites ("
            " favorite_id TEXT PRIMARY KEY, clip_id TEXT, line TEXT, created_at TEXT)"
        )
        self.conn.commit()

    def add_clip(self, clip_id: str, filename: str, duration: float, peak: float, emb_file: str) -> None:
        with self._write_lock:
            self.conn.execute(
                "INSERT INTO clips VALUES (?, ?, ?, ?, ?, ?)",
                (clip_id, filename, duration, peak, emb_file, _now()),
            )
            self.conn.commit()

    def get_clip(self, clip_id: str) -> dict | None:
        row = self.conn.execute(
            "SELECT clip_id, filename, duration, peak_db, embedding_file, created_at"
            " FROM clips WHERE clip_id = ?",
            (clip_id,),
        ).fetchone()
        return None if row is None else _clip_dict(row)

    def list_clips(self) -> list[dict]:
        rows = self.conn.execute(
            "SELECT clip_id, filename, duration, peak_db, embedding_file, created_at"
            " FROM clips ORDER BY created_at, clip_id"
        ).fetchall()
        return [_clip_dict(r) for r in rows]

    def add_favorite(self, favorite_id: str, clip_id: str, line: str) -> None:
        with self._write_lock:
            self.conn.execute(
                "INSERT INTO favorites VALUES (?, ?, ?, ?)", (favorite_id, clip_id, line, _now())
            )
            self.conn.commit()

    def list_favorites(self) -> list[dict]:
        rows = self.conn.execute(
            "SELECT favorite_id, clip_id, line, created_at FROM favorites"
            " ORDER BY created_at, favorite_id"
        ).fetchall()
        return [
            {"favorite_id": r[0], "clip_id": r[1], "line": r[2], "created_at": r[3]} for r in rows
        ]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _clip_dict(row) -> dict:
    return {
        "clip_id": row[0],
        "filename": row[1],
        "duration": row[2],
        "peak_db": row[3],
        "embedding_file": row[4],
        "created_at": row[5],
    }


def create_app(
    data_dir: str | Path,
    spec_checkpoint: str | Path | None = None,
    text_checkpoint: str | Path | None = None,
    clip_length: float = 10.0,
    static_dir: str | Path | None = None,
    max_upload_bytes: int = MAX_UPLOAD_BYTES,
) -> FastAPI:
    data_dir = Path(data_dir)
    for sub in ("audio", "spectrograms", "embeddings"):
        (data_dir / sub).mkdir(parents=True, exist_ok=True)
    store = RecordStore(data_dir / "records.db")

    spec_model = text_model = None
    versions: dict[str, str] = {}
    if spec_checkpoint is not None:
        spec_model = load_checkpoint(spec_checkpoint)
        versions["spec_vae"] = checkpoint_hash(spec_checkpoint)
    if text_checkpoint is not None:
        text_model = load_checkpoint(text_checkpoint)
        versions["text_vae"] = checkpoint_hash(text_checkpoint)
    mel_config = getattr(spec_model, "mel_config_", None) or MelConfig()
    ref_power = getattr(spec_model, "ref_power_", None)

    app = FastAPI(title="lyricmuse")

    @app.get("/api/health")
    def health():
        ready = spec_model is not None and text_model is not None
        return {
            "status": "ok" if ready else "degraded",
            "models": versions,
            "clip_length": clip_length,
        }

    @app.post("/api/clips")
    async def upload_clip(file: UploadFile = File(...)):
        if spec_model is None:
            raise HTTPException(503, "spectrogram model not loaded")
        payload = await file.read()
        if len(payload) > max_upload_bytes:
            raise HTTPException(413, "upload too large")
        with tempfile.NamedTemporaryFile(suffix=".wav", delete=False) as tmp:
            tmp.write(payload)
            tmp_path = Path(tmp.name)
        try:
            try:
                w = load_waveform(tmp_path, downmix=True)
            except (WavFormatError, ValueError) as exc:
                raise HTTPException(400, f"undecodable WAV: {exc}") from exc
        finally:
            os.unlink(tmp_path)

        if w.sample_rate != mel_config.sample_rate:
            w = resample(w, mel_config.sample_rate)
        clips = segment_clips(w, clip_length)
        if not clips:
            raise HTTPException(400, f"audio shorter than the {clip_length:.0f}s clip length")

        results = []
        for clip in clips:
            clip_id = uuid.uuid4().hex
            spec = mel_spectrogram(clip, mel_config, ref_power=ref_power)
            values = to_unit_range(spec.values, mel_config.db_floor)
            if values.shape != spec_model.input_shape_:
                raise HTTPException(
                    400,
                    f"spectrogram shape {values.shape} incompatible with model"
                    f" input {spec_model.input_shape_}",
                )
            emb = spec_model.transform(values[None], seed=int.from_bytes(bytes.fromhex(clip_id[:8]), "big"))[0]
            write_tensor(data_dir / "spectrograms" / f"{clip_id}.mspc", values)
            write_tensor(data_dir / "embeddings" / f"{clip_id}.mspc", emb[None])
            save_waveform(
                data_dir / "audio" / f"{clip_id}.wav",
                Waveform(clip.samples, clip.sample_rate, clip.song_id),
            )
            db = peak_db(clip, mel_config.db_floor)
            store.add_clip(clip_id, file.filename or "upload.wav", clip.length, db, f"{clip_id}.mspc")
            results.append({"clip_id": clip_id, "duration": clip.length, "peak_db": db})
        return {"clips": results}

    @app.post("/api/generate")
    def generate(body: GenerateBody):
        if text_model is None:
            raise HTTPException(503, "text model not loaded")
        record = store.get_clip(body.clip_id)
        if record is None:
            raise HTTPException(404, f"unknown clip {body.clip_id}")
        emb = read_tensor(data_dir / "embeddings" / record["embedding_file"])[0]
        seed = body.seed if body.seed is not None else secrets.randbits(63)
        lines = text_model.generate(
            emb, n_lines=body.n_lines, temperature=body.temperature, seed=seed
        )
        return {"lines": lines, "seed": seed, "clip_id": body.clip_id, "temperature": body.temperature}

    @app.post("/api/favorites")
    def add_favorite(body: FavoriteBody):
        if store.get_clip(body.clip_id) is None:
            raise HTTPException(404, f"unknown clip {body.clip_id}")
        favorite_id = uuid.uuid4().hex
        store.add_favorite(favorite_id, body.clip_id, body.line)
        return {"favorite_id": favorite_id}

    @app.get("/api/favorites")
    def list_favorites():
        return {"favorites": store.list_favorites()}

    @app.get("/api/clips")
    def list_clips():
        return {"clips": [
            {k: v for k, v in c.items() if k != "embedding_file"} for c in store.list_clips()
        ]}

    @app.get("/api/clips/{clip_id}/audio")
    def clip_audio(clip_id: str):
        if store.get_clip(clip_id) is None:
            raise HTTPException(404, f"unknown clip {clip_id}")
        return FileResponse(data_dir / "audio" / f"{clip_id}.wav", media_type="audio/wav")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="workbench")

    return app
