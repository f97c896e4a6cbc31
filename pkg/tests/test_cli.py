import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from lyricmuse.cli import main

TINY_CONFIG = {
    "seed": 13,
    "data": {
        "songs_per_class": 3,
        "alternating_segments": 4,
        "sample_rate": 8000,
        "song_length_range": [20.0, 30.0],
        "songs_per_album": 2,
    },
    "mel": {"sample_rate": 8000, "window_size": 1024, "hop": 1024, "n_mels": 16, "f_max": 4000.0},
    "spec_vae": {"latent_dim": 6, "channels": [4, 8], "epochs": 2, "batch_size": 16},
    "text_vae": {
        "latent_dim": 6, "embed_dim": 12, "hidden_size": 24, "epochs": 2,
        "batch_size": 32, "validation_fraction": 0.1,
    },
    "eval": {"retrieval_ns": [5], "n_lines_per_clip": 10, "fig2_songs_per_class": 2},
}


def run_cli(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config = out / "config.json"
    config.write_text(json.dumps(TINY_CONFIG))
    for cmd in ("synth-data", "preprocess", "train-spec-vae", "train-text-vae", "evaluate"):
        result = run_cli(cmd, "--config", str(config), "--out", str(out))
        assert result.exit_code == 0, f"{cmd} failed: {result.output}"
    return out, config


def test_stage_outputs_exist(pipeline):
    out, _ = pipeline
    assert (out / "dataset" / "labels.json").exists()
    assert (out / "dataset" / "alt_truth.json").exists()
    assert (out / "prep" / "spectrograms" / "index.json").exists()
    assert (out / "prep" / "aligned.json").exists()
    assert (out / "spec_vae" / "checkpoint" / "manifest.json").exists()
    assert (out / "spec_vae" / "embeddings.mspc").exists()
    assert (out / "text_vae" / "checkpoint" / "vocab.json").exists()
    for name in ("retrieval.json", "rbo_matrix.csv", "timeline_alternating.csv",
                 "ttest.json", "fig2_summary.json", "fig3_summary.json", "purity.json"):
        assert (out / "reports" / name).exists(), name


def test_run_manifests_written(pipeline):
    out, _ = pipeline
    for stage in ("dataset", "prep", "spec_vae", "text_vae", "reports"):
        manifest = json.loads((out / stage / "run_manifest.json").read_text())
        assert manifest["seed"] == 13
        assert "config" in manifest
    assert "checkpoint" in json.loads((out / "spec_vae" / "run_manifest.json").read_text())["inputs"]


def test_alignment_precisions_mixed(pipeline):
    out, _ = pipeline
    aligned = json.loads((out / "prep" / "aligned.json").read_text())
    precisions = {e["category"]: set() for e in aligned.values()}
    for e in aligned.values():
        if e["lines"]:
            precisions[e["category"]].add(e["precision"])
    assert precisions["calm"] == {"high"}
    assert precisions["intense"] == {"coarse"}  # default config coarse-aligns intense


def test_rbo_matrix_csv_well_formed(pipeline):
    out, _ = pipeline
    rows = list(csv.reader((out / "reports" / "rbo_matrix.csv").open()))
    header = rows[0]
    n = len(rows) - 1
    assert header[:2] == ["song_id", "category"]
    m = np.array([[float(x) for x in r[2:]] for r in rows[1:]])
    assert m.shape == (n, n)
    assert np.allclose(np.diag(m), 1.0)
    assert np.allclose(m, m.T, atol=1e-12)


def test_ttest_significant(pipeline):
    out, _ = pipeline
    report = json.loads((out / "reports" / "ttest.json").read_text())
    assert report["p"] < 0.05


def test_generate_deterministic(pipeline):
    out, config = pipeline
    aligned = json.loads((out / "prep" / "aligned.json").read_text())
    clip_ref = sorted(aligned)[0]
    args = ("generate", "--config", str(config), "--out", str(out),
            "--clip", clip_ref, "--n", "7")
    assert run_cli(*args).exit_code == 0
    path = out / "generated" / f"{clip_ref.replace('/', '_')}.json"
    first = path.read_text()
    assert run_cli(*args).exit_code == 0
    assert path.read_text() == first
    payload = json.loads(first)
    assert len(payload) == 7
    assert all(e["clip_ref"] == clip_ref for e in payload)


def test_text_vae_requires_embeddings(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps(TINY_CONFIG))
    r1 = run_cli("synth-data", "--config", str(config), "--out", str(tmp_path))
    r2 = run_cli("preprocess", "--config", str(config), "--out", str(tmp_path))
    assert r1.exit_code == 0 and r2.exit_code == 0
    result = run_cli("train-text-vae", "--config", str(config), "--out", str(tmp_path))
    assert result.exit_code != 0
    assert "embeddings" in result.output


def test_missing_dataset_diagnostic(tmp_path):
    result = run_cli("preprocess", "--out", str(tmp_path))
    assert result.exit_code != 0
    assert "synth-data" in result.output
