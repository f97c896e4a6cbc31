import numpy as np
import pytest

from lyricmuse.audio import Waveform, peak_db, segment_clips


def make_wave(seconds, rate=1000, seed=0):
    rng = np.random.default_rng(seed)
    return Waveform(rng.uniform(-1, 1, int(seconds * rate)).astype(np.float32), rate, "song")


def test_35s_song_three_clips():
    clips = segment_clips(make_wave(35), 10.0)
    assert len(clips) == 3
    assert [c.start for c in clips] == [0.0, 10.0, 20.0]
    assert all(len(c.samples) == 10000 for c in clips)


def test_20s_song_two_clips():
    assert len(segment_clips(make_wave(20), 10.0)) == 2


def test_short_song_empty():
    assert segment_clips(make_wave(9), 10.0) == []


def test_partition_reproduces_prefix():
    w = make_wave(27.3, seed=5)
    clips = segment_clips(w, 10.0)
    joined = np.concatenate([c.samples for c in clips])
    assert np.array_equal(joined, w.samples[: len(joined)])
    assert len(joined) == 2 * 10000


def test_clip_refs_unique_and_indexed():
    clips = segment_clips(make_wave(40), 10.0)
    assert [c.clip_ref for c in clips] == [f"song/{i:04d}" for i in range(4)]


def test_invalid_clip_length():
    with pytest.raises(ValueError):
        segment_clips(make_wave(5), 0)


def test_peak_db_fullscale():
    assert peak_db(np.array([1.0, -0.2])) == pytest.approx(0.0)


def test_peak_db_half():
    assert peak_db(np.array([0.5, -0.3, 0.1])) == pytest.approx(-6.0206, abs=1e-3)


def test_peak_db_silence_floors():
    assert peak_db(np.zeros(100)) == -80.0
    assert peak_db(np.zeros(100), db_floor=-120.0) == -120.0


def test_peak_db_invariant_under_negation_and_permutation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(-1, 1, 257)
        assert peak_db(-x) == peak_db(x)
        assert peak_db(rng.permutation(x)) == peak_db(x)


def test_peak_db_empty_clip():
    with pytest.raises(ValueError):
        peak_db(np.array([]))
