"""Command-line pipeline: synth-data, preprocess, train both VAEs, generate,
evaluate, serve.

Every command reads one JSON config (flags override), writes its outputs
under ``--out DIR/<stage>/`` and drops a run manifest there. Stage seeds are
forked from the single global seed, so any stage can be rerun in isolation
and the whole pipeline is reproducible end to end.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .audio.align import align_coarse, align_manual, read_annotations
from .audio.mel import MelConfig, mel_filterbank, mel_spectrogram, stft_power, to_unit_range
from .audio.segment import peak_db, segment_clips
from .audio.store import SpectrogramStore
from .audio.wav import load_waveform, resample, save_waveform
from .config import fork_seed, load_config, write_run_manifest
from .corpus.io import attach_embeddings, make_paired_examples, save_lines_corpus
from .corpus.synth import default_synth_spec, synthesize_alternating_song, synthesize_dataset
from .corpus.vocab import build_vocab, normalize
from .evaluation import (
    clip_timeline,
    rbo_matrix,
    retrieval_table,
    ttest_peak_db,
    write_rbo_matrix_csv,
    write_retrieval_json,
    write_timeline_csv,
)
from .models.checkpoint import checkpoint_hash, load_checkpoint, save_checkpoint
from .models.spec_vae import SpectrogramVAE
from .models.text_vae import ConditionedTextVAE
from .tensorfile import read_tensor, write_tensor

MIXED_CATEGORY = "mixed"


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Audio-conditioned lyric line workbench."""


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="JSON config file; defaults apply otherwise.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), required=True,
                      help="Run directory; each stage writes a subdirectory.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the global seed.")(fn)
    return fn


def _load(config_path, seed):
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    return cfg


# ---------------------------------------------------------------------------
@main.command("synth-data")
@_common_options
def synth_data(config_path, out_dir, seed) -> None:
    """Generate the synthetic two-class corpus plus an alternating test song."""
    cfg = _load(config_path, seed)
    data_cfg = cfg["data"]
    out = Path(out_dir) / "dataset"
    (out / "songs").mkdir(parents=True, exist_ok=True)
    (out / "annotations").mkdir(parents=True, exist_ok=True)

    spec = default_synth_spec(
        songs_per_class=data_cfg["songs_per_class"],
        seed=fork_seed(cfg["seed"], "synth-data"),
        sample_rate=data_cfg["sample_rate"],
        clip_length=data_cfg["clip_length"],
        song_length_range=tuple(data_cfg["song_length_range"]),
        songs_per_album=data_cfg["songs_per_album"],
    )
    ds = synthesize_dataset(spec)

    labels = dict(ds.song_labels)
    if data_cfg["alternating_segments"] > 0:
        alt_w, alt_ann, alt_truth = synthesize_alternating_song(
            spec, n_segments=data_cfg["alternating_segments"],
            seed=fork_seed(cfg["seed"], "synth-data/alternating"),
        )
        ds.waveforms.append(alt_w)
        ds.annotations[alt_w.song_id] = alt_ann
        labels[alt_w.song_id] = {
            "album_id": alt_w.album_id,
            "artist_id": alt_w.artist_id,
            "category": MIXED_CATEGORY,
        }
        (out / "alt_truth.json").write_text(
            json.dumps({alt_w.song_id: alt_truth}, indent=2), encoding="utf-8"
        )

    for w in ds.waveforms:
        save_waveform(out / "songs" / f"{w.song_id}.wav", w)
        with open(out / "annotations" / f"{w.song_id}.csv", "w", encoding="utf-8") as fh:
            fh.write("time_seconds,line_text\n")
            for ann in ds.annotations[w.song_id]:
                fh.write(f"{ann.onset:.3f},{ann.text}\n")

    (out / "labels.json").write_text(json.dumps(labels, indent=2, sort_keys=True), encoding="utf-8")
    (out / "class_vocab.json").write_text(
        json.dumps({k: sorted(v) for k, v in ds.class_vocab.items()}, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    write_run_manifest(out, "synth-data", cfg)
    click.echo(f"wrote {len(ds.waveforms)} songs, {len(ds.all_lines())} lines to {out}")


# ---------------------------------------------------------------------------
@main.command("preprocess")
@_common_options
def preprocess(config_path, out_dir, seed) -> None:
    """Segment songs, compute MEL spectrograms, align lines to clips."""
    cfg = _load(config_path, seed)
    base = Path(out_dir)
    dataset = base / "dataset"
    if not dataset.is_dir():
        _fail(f"no dataset at {dataset}; run synth-data first")
    out = base / "prep"
    out.mkdir(parents=True, exist_ok=True)

    mel_cfg = MelConfig(**cfg["mel"])
    clip_length = cfg["data"]["clip_length"]
    coarse_categories = set(cfg["prep"]["coarse_categories"])
    labels = json.loads((dataset / "labels.json").read_text(encoding="utf-8"))

    song_paths = sorted((dataset / "songs").glob("*.wav"))
    if not song_paths:
        _fail(f"no songs in {dataset}/songs")

    # First pass: find the corpus-wide power reference so dB levels are
    # comparable across clips.
    fb = mel_filterbank(mel_cfg)
    all_clips: dict[str, list] = {}
    ref_power = 0.0
    for path in song_paths:
        song_id = path.stem
        w = load_waveform(path)
        if w.sample_rate != mel_cfg.sample_rate:
            w = resample(w, mel_cfg.sample_rate)
        clips = segment_clips(w, clip_length)
        all_clips[song_id] = (w, clips)
        for clip in clips:
            ref_power = max(ref_power, float(np.max(fb @ stft_power(clip.samples, mel_cfg))))
    if ref_power <= 0:
        _fail("corpus is digital silence; cannot set a dB reference")

    store = SpectrogramStore(out / "spectrograms")
    aligned: dict[str, dict] = {}
    lines_flat: list[str] = []
    line_refs: list[str] = []
    for song_id, (w, clips) in sorted(all_clips.items()):
        category = labels.get(song_id, {}).get("category", "")
        ann_path = dataset / "annotations" / f"{song_id}.csv"
        annotations = read_annotations(ann_path) if ann_path.exists() else []
        if category in coarse_categories:
            pairs = align_coarse(clips, [a.text for a in annotations]) if annotations else []
        else:
            pairs = align_manual(w, annotations, clips)
        lines_by_ref = {p.clip_ref: p for p in pairs}
        for clip in clips:
            spec = mel_spectrogram(clip, mel_cfg, ref_power=ref_power)
            store.add(spec, song_id=song_id, start=clip.start)
            pair = lines_by_ref.get(clip.clip_ref)
            aligned[clip.clip_ref] = {
                "song_id": song_id,
                "start": clip.start,
                "category": category,
                "album_id": labels.get(song_id, {}).get("album_id", ""),
                "artist_id": labels.get(song_id, {}).get("artist_id", ""),
                "precision": pair.precision if pair else "",
                "peak_db": peak_db(clip, mel_cfg.db_floor),
                "lines": pair.lines if pair else [],
            }
            for line in aligned[clip.clip_ref]["lines"]:
                lines_flat.append(line)
                line_refs.append(clip.clip_ref)
    store.flush()

    (out / "aligned.json").write_text(json.dumps(aligned, indent=2, sort_keys=True), encoding="utf-8")
    (out / "ref_power.json").write_text(json.dumps({"ref_power": ref_power}), encoding="utf-8")
    save_lines_corpus(out / "lines.txt", lines_flat, line_refs)
    write_run_manifest(out, "preprocess", cfg)
    click.echo(f"wrote {len(store)} spectrograms, {len(lines_flat)} aligned lines to {out}")


# ---------------------------------------------------------------------------
def _load_prep(base: Path):
    prep = base / "prep"
    if not prep.is_dir():
        _fail(f"no preprocessed data at {prep}; run preprocess first")
    aligned = json.loads((prep / "aligned.json").read_text(encoding="utf-8"))
    store = SpectrogramStore(prep / "spectrograms")
    ref_power = json.loads((prep / "ref_power.json").read_text(encoding="utf-8"))["ref_power"]
    return prep, aligned, store, ref_power


@main.command("train-spec-vae")
@_common_options
def train_spec_vae(config_path, out_dir, seed) -> None:
    """Train the spectrogram VAE and embed every clip in the corpus."""
    cfg = _load(config_path, seed)
    base = Path(out_dir)
    _, aligned, store, ref_power = _load_prep(base)
    out = base / "spec_vae"
    out.mkdir(parents=True, exist_ok=True)

    mel_cfg = MelConfig(**cfg["mel"])
    refs, values = store.load_all()
    X = to_unit_range(values, mel_cfg.db_floor)
    train_mask = np.array(
        [aligned[r]["category"] != MIXED_CATEGORY for r in refs], dtype=bool
    )
    if not train_mask.any():
        _fail("no training clips after excluding mixed-category songs")

    params = dict(cfg["spec_vae"])
    params["channels"] = tuple(params["channels"])
    est = SpectrogramVAE(**params, seed=fork_seed(cfg["seed"], "train-spec-vae"))
    est.fit(X[train_mask])

    embeddings = est.transform(X, seed=fork_seed(cfg["seed"], "embed"))
    write_tensor(out / "embeddings.mspc", embeddings)
    (out / "embeddings.json").write_text(json.dumps(refs, indent=0), encoding="utf-8")
    ckpt = save_checkpoint(out / "checkpoint", est, mel_config=mel_cfg, ref_power=ref_power)
    (out / "history.json").write_text(json.dumps(est.history_, indent=2), encoding="utf-8")
    write_run_manifest(out, "train-spec-vae", cfg, inputs={"checkpoint": checkpoint_hash(ckpt)})
    final = est.history_[-1] if est.history_ else {}
    click.echo(
        f"trained spec VAE on {int(train_mask.sum())} clips; "
        f"final recon {final.get('recon', float('nan')):.3f}; embedded {len(refs)} clips"
    )


def _load_embeddings(spec_run: Path) -> tuple[dict[str, np.ndarray], int]:
    emb = read_tensor(spec_run / "embeddings.mspc")
    refs = json.loads((spec_run / "embeddings.json").read_text(encoding="utf-8"))
    return {r: emb[i] for i, r in enumerate(refs)}, emb.shape[1]


@main.command("train-text-vae")
@_common_options
@click.option("--spec-run", "spec_run", type=click.Path(), default=None,
              help="spec-vae stage directory holding the frozen clip embeddings.")
def train_text_vae(config_path, out_dir, seed, spec_run) -> None:
    """Train the audio-conditioned text VAE on aligned (line, embedding) pairs."""
    cfg = _load(config_path, seed)
    base = Path(out_dir)
    _, aligned, _, _ = _load_prep(base)
    spec_run = Path(spec_run) if spec_run else base / "spec_vae"
    if not (spec_run / "embeddings.mspc").exists():
        _fail(f"no spec-vae embeddings under {spec_run}; run train-spec-vae first"
              " or pass --spec-run")
    out = base / "text_vae"
    out.mkdir(parents=True, exist_ok=True)

    by_ref, cond_dim = _load_embeddings(spec_run)
    train_lines = []
    for ref in sorted(aligned):
        entry = aligned[ref]
        if entry["category"] == MIXED_CATEGORY:
            continue
        for line in entry["lines"]:
            train_lines.append((line, ref))
    if not train_lines:
        _fail("no aligned training lines")

    vocab = build_vocab([line for line, _ in train_lines], min_count=cfg["vocab"]["min_count"])
    params = dict(cfg["text_vae"])
    examples = attach_embeddings(
        make_paired_examples(train_lines, vocab, params["max_line_len"]), by_ref
    )
    sequences = [ex.tokens for ex in examples]
    cond = np.stack([ex.embedding for ex in examples])

    est = ConditionedTextVAE(
        vocab=vocab, cond_dim=cond_dim, seed=fork_seed(cfg["seed"], "train-text-vae"), **params
    )
    est.fit(sequences, cond)
    ckpt = save_checkpoint(out / "checkpoint", est)
    (out / "history.json").write_text(json.dumps(est.history_, indent=2), encoding="utf-8")
    write_run_manifest(out, "train-text-vae", cfg, inputs={"checkpoint": checkpoint_hash(ckpt)})
    final = est.history_[-1] if est.history_ else {}
    click.echo(
        f"trained text VAE on {len(sequences)} lines, vocab {len(vocab)};"
        f" final recon {final.get('recon', float('nan')):.3f}"
    )


# ---------------------------------------------------------------------------
def _generation_seed(global_seed: int, clip_ref: str) -> int:
    return fork_seed(global_seed, f"generate/{clip_ref}")


def _generate_for_clips(est, by_ref, clip_refs, n_lines, temperature, global_seed):
    """Per-clip line batches, keyed and seeded by clip_ref (order-independent)."""
    return {
        ref: est.generate(
            by_ref[ref], n_lines=n_lines, temperature=temperature,
            seed=_generation_seed(global_seed, ref),
        )
        for ref in clip_refs
    }


@main.command("generate")
@_common_options
@click.option("--clip", "clip_ref", required=True, help="clip_ref to condition on.")
@click.option("--n", "n_lines", type=int, default=None, help="Number of lines.")
@click.option("--temperature", type=float, default=None)
@click.option("--spec-run", type=click.Path(), default=None)
@click.option("--text-run", type=click.Path(), default=None)
def generate_cmd(config_path, out_dir, seed, clip_ref, n_lines, temperature, spec_run, text_run) -> None:
    """Generate lines conditioned on one clip's stored embedding."""
    cfg = _load(config_path, seed)
    base = Path(out_dir)
    spec_run = Path(spec_run) if spec_run else base / "spec_vae"
    text_run = Path(text_run) if text_run else base / "text_vae"
    if not (text_run / "checkpoint").is_dir():
        _fail(f"no text-vae checkpoint under {text_run}")
    by_ref, _ = _load_embeddings(spec_run)
    if clip_ref not in by_ref:
        _fail(f"unknown clip {clip_ref}")

    est = load_checkpoint(text_run / "checkpoint")
    n_lines = n_lines if n_lines is not None else cfg["generate"]["n_lines"]
    temperature = temperature if temperature is not None else cfg["generate"]["temperature"]
    gen_seed = _generation_seed(cfg["seed"], clip_ref)
    lines = est.generate(by_ref[clip_ref], n_lines=n_lines, temperature=temperature, seed=gen_seed)

    out = base / "generated"
    out.mkdir(parents=True, exist_ok=True)
    payload = [
        {"line": line, "clip_ref": clip_ref, "seed": gen_seed, "temperature": temperature}
        for line in lines
    ]
    path = out / f"{clip_ref.replace('/', '_')}.json"
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    write_run_manifest(out, "generate", cfg, inputs={"text_vae": checkpoint_hash(text_run / "checkpoint")})
    click.echo(f"wrote {len(lines)} lines to {path}")


# ---------------------------------------------------------------------------
@main.command("evaluate")
@_common_options
@click.option("--spec-run", type=click.Path(), default=None)
@click.option("--text-run", type=click.Path(), default=None)
def evaluate(config_path, out_dir, seed, spec_run, text_run) -> None:
    """Run the full evaluation protocol: retrieval table, RBO matrix,
    per-clip timelines, peak-dB t-test."""
    cfg = _load(config_path, seed)
    ev = cfg["eval"]
    base = Path(out_dir)
    _, aligned, _, _ = _load_prep(base)
    spec_run = Path(spec_run) if spec_run else base / "spec_vae"
    text_run = Path(text_run) if text_run else base / "text_vae"
    by_ref, _ = _load_embeddings(spec_run)
    text_est = load_checkpoint(text_run / "checkpoint")
    out = base / "reports"
    out.mkdir(parents=True, exist_ok=True)

    train_refs = sorted(r for r in aligned if aligned[r]["category"] != MIXED_CATEGORY)
    categories = {r: aligned[r]["category"] for r in aligned}

    # 1. latent-space retrieval proportions
    pool = np.stack([by_ref[r] for r in train_refs])
    pool_labels = [
        {"song_id": aligned[r]["song_id"], "album_id": aligned[r]["album_id"],
         "artist_id": aligned[r]["artist_id"]}
        for r in train_refs
    ]
    ns = tuple(n for n in ev["retrieval_ns"] if n <= len(train_refs) - 1)
    if not ns:
        _fail(f"retrieval pool of {len(train_refs)} clips is smaller than every requested n")
    write_retrieval_json(out / "retrieval.json", retrieval_table(pool, pool_labels, ns))

    # 2. per-song generated corpora and the song-pair RBO matrix
    songs: dict[str, list[str]] = {}
    for r in train_refs:
        songs.setdefault(aligned[r]["song_id"], []).append(r)
    cap = ev.get("fig2_songs_per_class")
    if cap:
        kept: dict[str, list[str]] = {}
        per_cat: dict[str, int] = {}
        for song_id in sorted(songs):
            cat = categories[songs[song_id][0]]
            if per_cat.get(cat, 0) < cap:
                kept[song_id] = songs[song_id]
                per_cat[cat] = per_cat.get(cat, 0) + 1
        songs = kept

    clip_lines: dict[str, list[str]] = {}
    song_corpora: dict[str, list[str]] = {}
    for song_id in sorted(songs):
        gen = _generate_for_clips(
            text_est, by_ref, sorted(songs[song_id]), ev["n_lines_per_clip"],
            ev["temperature"], cfg["seed"],
        )
        clip_lines.update(gen)
        song_corpora[song_id] = [line for ref in sorted(gen) for line in gen[ref]]

    rbo_params = {
        "p": ev["rbo_p"], "depth": ev["rbo_depth"], "smoothing": ev["smoothing"],
        "n_lines_per_clip": ev["n_lines_per_clip"], "temperature": ev["temperature"],
    }
    song_ids, matrix = rbo_matrix(song_corpora, ev["rbo_p"], ev["rbo_depth"], ev["smoothing"])
    song_categories = {s: categories[songs[s][0]] for s in song_ids}
    write_rbo_matrix_csv(out / "rbo_matrix.csv", song_ids, matrix, song_categories, rbo_params)
    _write_fig2_summary(out, song_ids, matrix, song_categories)

    # 3. per-clip purity against the class vocabularies, when available
    class_vocab_path = base / "dataset" / "class_vocab.json"
    if class_vocab_path.exists():
        class_vocab = {
            k: set(v) for k, v in json.loads(class_vocab_path.read_text(encoding="utf-8")).items()
        }
        purity = {
            ref: _class_purity(lines, class_vocab.get(categories[ref], set()))
            for ref, lines in sorted(clip_lines.items())
        }
        (out / "purity.json").write_text(json.dumps(purity, indent=2, sort_keys=True), "utf-8")

    # 4. timelines for mixed-category songs against calm/intense references
    calm_ref = [l for r, ls in clip_lines.items() if categories[r] == "calm" for l in ls]
    intense_ref = [l for r, ls in clip_lines.items() if categories[r] == "intense" for l in ls]
    truth_path = base / "dataset" / "alt_truth.json"
    alt_truth = json.loads(truth_path.read_text(encoding="utf-8")) if truth_path.exists() else {}
    fig3 = {}
    mixed_songs = sorted({aligned[r]["song_id"] for r in aligned if aligned[r]["category"] == MIXED_CATEGORY})
    for song_id in mixed_songs:
        refs = sorted(r for r in aligned if aligned[r]["song_id"] == song_id)
        if len(refs) < 2 or not calm_ref or not intense_ref:
            continue
        gen = _generate_for_clips(
            text_est, by_ref, refs, ev["n_lines_per_clip"], ev["temperature"], cfg["seed"]
        )
        points = clip_timeline(
            [(aligned[r]["start"], gen[r]) for r in refs],
            calm_ref, intense_ref, ev["rbo_p"], ev["rbo_depth"], ev["smoothing"],
        )
        write_timeline_csv(
            out / f"timeline_{song_id}.csv", points,
            [aligned[r]["peak_db"] for r in refs], rbo_params,
        )
        truth = alt_truth.get(song_id)
        if truth and len(truth) == len(points):
            matches = [
                (pt.rbo_calm > pt.rbo_intense) == (cat == "calm")
                for pt, cat in zip(points, truth)
            ]
            fig3[song_id] = {"sign_match": sum(matches) / len(matches), "n_clips": len(matches)}
    if fig3:
        (out / "fig3_summary.json").write_text(json.dumps(fig3, indent=2, sort_keys=True), "utf-8")

    # 5. peak-dB significance between the two categories
    cats = sorted({categories[r] for r in train_refs})
    if len(cats) == 2:
        a = [aligned[r]["peak_db"] for r in train_refs if categories[r] == cats[0]]
        b = [aligned[r]["peak_db"] for r in train_refs if categories[r] == cats[1]]
        t, p = ttest_peak_db(a, b)
        (out / "ttest.json").write_text(
            json.dumps({"groups": cats, "t": round(t, 6), "p": p}, indent=2), encoding="utf-8"
        )

    write_run_manifest(out, "evaluate", cfg, inputs={
        "spec_vae": checkpoint_hash(spec_run / "checkpoint"),
        "text_vae": checkpoint_hash(text_run / "checkpoint"),
    })
    click.echo(f"wrote evaluation reports to {out}")


def _class_purity(lines: list[str], vocabulary: set[str]) -> float:
    tokens = [w for line in lines for w in normalize(line)]
    if not tokens or not vocabulary:
        return 0.0
    return sum(1 for w in tokens if w in vocabulary) / len(tokens)


def _write_fig2_summary(out: Path, song_ids, matrix, song_categories) -> None:
    within, cross = [], []
    for i in range(len(song_ids)):
        for j in range(i + 1, len(song_ids)):
            same = song_categories[song_ids[i]] == song_categories[song_ids[j]]
            (within if same else cross).append(float(matrix[i, j]))
    summary = {
        "mean_within": sum(within) / len(within) if within else None,
        "mean_cross": sum(cross) / len(cross) if cross else None,
        "n_songs": len(song_ids),
    }
    (out / "fig2_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True), "utf-8")


# ---------------------------------------------------------------------------
@main.command("serve")
@click.option("--port", type=int, default=8000, envvar="LYRICMUSE_PORT")
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(), envvar="LYRICMUSE_DATA", required=True)
@click.option("--spec-checkpoint", type=click.Path(exists=True), default=None)
@click.option("--text-checkpoint", type=click.Path(exists=True), default=None)
@click.option("--static-dir", type=click.Path(), default=None,
              help="Workbench build output to serve at /")
@click.option("--clip-length", type=float, default=10.0)
def serve(port, host, data_dir, spec_checkpoint, text_checkpoint, static_dir, clip_length) -> None:
    """Serve the HTTP API (and the workbench UI when --static-dir is given)."""
    import uvicorn

    from .service import create_app

    app = create_app(
        data_dir,
        spec_checkpoint=spec_checkpoint,
        text_checkpoint=text_checkpoint,
        clip_length=clip_length,
        static_dir=static_dir,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
