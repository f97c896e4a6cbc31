import numpy as np
import pytest

from lyricmuse.audio import MelConfig, Waveform, mel_filterbank, mel_spectrogram, segment_clips, to_unit_range
from lyricmuse.audio.mel import from_unit_range, mel_center_freqs, stft_power

CFG = MelConfig()


def make_clip(samples, rate=22050):
    w = Waveform(np.asarray(samples, dtype=np.float32), rate, "song")
    clips = segment_clips(w, len(samples) / rate)
    assert len(clips) == 1
    return clips[0]


def test_silence_floors_every_cell():
    clip = make_clip(np.zeros(22050))
    spec = mel_spectrogram(clip, CFG)
    assert np.all(spec.values == CFG.db_floor)


def test_frame_count_10s_clip():
    clip = make_clip(np.zeros(220500))
    spec = mel_spectrogram(clip, CFG)
    assert spec.values.shape == (80, 431)
    assert CFG.n_frames(220500) == 220500 // 512 + 1


def test_sine_peaks_at_nearest_mel_center():
    t = np.arange(220500) / 22050
    clip = make_clip(0.5 * np.sin(2 * np.pi * 440.0 * t))
    spec = mel_spectrogram(clip, CFG)
    centers = mel_center_freqs(CFG)
    expected_bin = int(np.argmin(np.abs(centers - 440.0)))
    argmax_rows = spec.values.argmax(axis=0)
    assert np.all(argmax_rows == expected_bin)


def test_sine_oracle_direct_dft():
    # independent route: literal DFT of one windowed frame of the sine,
    # then the filterbank; must peak at the same bin as the nearest center
    n = CFG.window_size
    t = np.arange(n) / CFG.sample_rate
    frame = 0.5 * np.sin(2 * np.pi * 440.0 * t) * np.hanning(n + 1)[:-1]
    k = np.arange(n // 2 + 1)
    dft = np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n) @ frame
    mel_power = mel_filterbank(CFG) @ (np.abs(dft) ** 2)
    centers = mel_center_freqs(CFG)
    assert int(np.argmax(mel_power)) == int(np.argmin(np.abs(centers - 440.0)))


def test_deterministic_bit_identical():
    rng = np.random.default_rng(1)
    clip = make_clip(rng.uniform(-1, 1, 44100))
    a = mel_spectrogram(clip, CFG)
    b = mel_spectrogram(clip, CFG)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.config_ref == b.config_ref == CFG.config_ref


def test_values_bounded_below_by_floor():
    rng = np.random.default_rng(2)
    clip = make_clip(rng.uniform(-0.01, 0.01, 22050))
    spec = mel_spectrogram(clip, CFG)
    assert spec.values.min() >= CFG.db_floor
    assert spec.values.max() == pytest.approx(0.0, abs=1e-4)  # own max is the reference


def test_corpus_reference_shifts_levels():
    t = np.arange(22050) / 22050
    clip = make_clip(0.01 * np.sin(2 * np.pi * 200.0 * t))
    own = mel_spectrogram(clip, CFG)
    loud = mel_spectrogram(clip, CFG, ref_power=1e6)
    assert loud.values.max() < own.values.max()


def test_sample_rate_mismatch():
    clip = make_clip(np.zeros(8000), rate=8000)
    with pytest.raises(ValueError, match="rate"):
        mel_spectrogram(clip, CFG)


def test_filterbank_nonnegative_unimodal_increasing_centers():
    fb = mel_filterbank(CFG)
    assert fb.shape == (80, CFG.window_size // 2 + 1)
    assert np.all(fb >= 0)
    centers = mel_center_freqs(CFG)
    assert np.all(np.diff(centers) > 0)
    for row in fb:
        m = int(row.argmax())
        assert np.all(np.diff(row[: m + 1]) >= 0)
        assert np.all(np.diff(row[m:]) <= 0)
        assert row.max() > 0


def test_stft_power_shape_and_parseval_scale():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(22050)
    p = stft_power(x, CFG)
    assert p.shape == (CFG.window_size // 2 + 1, CFG.n_frames(len(x)))
    assert np.all(p >= 0)


def test_unit_range_round_trip():
    vals = np.linspace(-80, 0, 33, dtype=np.float32)
    unit = to_unit_range(vals, -80.0)
    assert unit.min() == 0.0 and unit.max() == 1.0
    assert np.allclose(from_unit_range(unit, -80.0), vals, atol=1e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        MelConfig(f_min=100, f_max=50)
    with pytest.raises(ValueError):
        MelConfig(f_max=20000)  # above nyquist
    with pytest.raises(ValueError):
        MelConfig(hop=4096)  # above window
    with pytest.raises(ValueError):
        MelConfig(n_mels=0)
