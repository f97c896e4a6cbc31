import numpy as np
import pytest

from lyricmuse.audio import peak_db, segment_clips
from lyricmuse.corpus import (
    SynthClass,
    SynthSpec,
    default_synth_spec,
    normalize,
    synthesize_alternating_song,
    synthesize_dataset,
)
from lyricmuse.evaluation import ttest_peak_db


@pytest.fixture(scope="module")
def dataset():
    return synthesize_dataset(default_synth_spec(songs_per_class=6, seed=7, sample_rate=8000))


def test_deterministic_byte_identical(dataset):
    again = synthesize_dataset(default_synth_spec(songs_per_class=6, seed=7, sample_rate=8000))
    for a, b in zip(dataset.waveforms, again.waveforms):
        assert a.song_id == b.song_id
        assert a.samples.tobytes() == b.samples.tobytes()
    assert {s: [(x.onset, x.text) for x in v] for s, v in dataset.annotations.items()} == {
        s: [(x.onset, x.text) for x in v] for s, v in again.annotations.items()
    }


def test_different_seed_differs(dataset):
    other = synthesize_dataset(default_synth_spec(songs_per_class=6, seed=8, sample_rate=8000))
    assert any(
        a.samples.tobytes() != b.samples.tobytes()
        for a, b in zip(dataset.waveforms, other.waveforms)
    )


def test_class_peak_db_separation(dataset):
    peaks = {"calm": [], "intense": []}
    for w in dataset.waveforms:
        peaks[w.artist_id].append(peak_db(w.samples))
    t, p = ttest_peak_db(peaks["intense"], peaks["calm"])
    assert p < 0.05
    assert t > 0  # intense louder
    # non-overlapping interquartile ranges
    assert np.percentile(peaks["calm"], 75) < np.percentile(peaks["intense"], 25)


def test_lines_use_only_class_vocabulary(dataset):
    for song_id, anns in dataset.annotations.items():
        category = dataset.song_labels[song_id]["category"]
        vocab = dataset.class_vocab[category]
        for ann in anns:
            assert set(normalize(ann.text)) <= vocab, ann.text


def test_class_vocabularies_disjoint(dataset):
    assert not (dataset.class_vocab["calm"] & dataset.class_vocab["intense"])


def test_onsets_strictly_increasing(dataset):
    for anns in dataset.annotations.values():
        onsets = [a.onset for a in anns]
        assert all(b > a for a, b in zip(onsets, onsets[1:]))
        assert len(anns) > 0


def test_song_lengths_and_labels(dataset):
    for w in dataset.waveforms:
        assert 30.0 <= w.duration <= 60.0
        labels = dataset.song_labels[w.song_id]
        assert labels["artist_id"] == w.artist_id
        assert labels["album_id"] == w.album_id


def test_disjointness_enforced():
    spec = default_synth_spec(songs_per_class=1, seed=0)
    overlapping = dict(spec.classes[0].roles)
    overlapping["noun"] = spec.classes[1].roles["noun"]
    bad = SynthClass(name="bad", generator="low-tone", roles=overlapping, peak_range=(0.1, 0.2))
    bad_spec = SynthSpec(classes=(bad, spec.classes[1]), songs_per_class=1, seed=0)
    with pytest.raises(ValueError, match="share words"):
        synthesize_dataset(bad_spec)


def test_alternating_song_structure():
    spec = default_synth_spec(songs_per_class=1, seed=3, sample_rate=8000)
    w, anns, truth = synthesize_alternating_song(spec, n_segments=6, seed=5)
    assert truth == ["calm", "intense"] * 3
    assert w.duration == pytest.approx(60.0)
    clips = segment_clips(w, spec.clip_length)
    assert len(clips) == 6
    # each segment's loudness matches its class
    for clip, cat in zip(clips, truth):
        if cat == "intense":
            assert peak_db(clip) > -10
        else:
            assert peak_db(clip) < -12
    # lines land inside their segment and use the segment's vocabulary
    for ann in anns:
        seg = int(ann.onset // spec.clip_length)
        assert set(normalize(ann.text)) <= spec.classes[seg % 2].vocabulary()
