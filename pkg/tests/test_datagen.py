import numpy as np
import pytest

from sppkit.datagen import (MixSpec, make_training_pairs, mix_at_snr, synth_mixture,
                            synth_noise, synth_speechlike)
from sppkit.dumps import read_pair_file, write_pair_file
from sppkit.errors import DomainError, InvalidConfigError
from sppkit.frontend import SAMPLE_RATE, AudioBuffer, stft

from conftest import white


def snr_db(clean, noise):
    return 10.0 * np.log10(np.mean(clean.samples ** 2) / np.mean(noise.samples ** 2))


class TestMixAtSnr:
    def test_zero_db_equal_powers(self):
        clean = synth_speechlike(1.0, seed=1)
        noise = white(1.0, seed=2)
        noisy, scaled = mix_at_snr(clean, noise, 0.0)
        assert snr_db(clean, scaled) == pytest.approx(0.0, abs=1e-9)

    def test_ten_db_ratio(self):
        clean = synth_speechlike(1.0, seed=3)
        noise = white(1.0, seed=4)
        _, scaled = mix_at_snr(clean, noise, 10.0)
        ratio = np.mean(clean.samples ** 2) / np.mean(scaled.samples ** 2)
        assert ratio == pytest.approx(10.0, rel=1e-9)

    def test_exact_waveform_additivity(self):
        clean = synth_speechlike(1.0, seed=5)
        noise = white(1.0, seed=6)
        noisy, scaled = mix_at_snr(clean, noise, 3.0)
        np.testing.assert_array_equal(noisy.samples, clean.samples + scaled.samples)

    def test_spectral_additivity(self):
        clean = synth_speechlike(1.0, seed=7)
        noise = white(1.0, seed=8)
        noisy, scaled = mix_at_snr(clean, noise, -5.0)
        lhs = stft(noisy).data
        rhs = stft(clean).data + stft(scaled).data
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_short_noise_is_looped(self):
        clean = synth_speechlike(2.0, seed=9)
        noise = white(0.5, seed=10)
        noisy, scaled = mix_at_snr(clean, noise, 0.0)
        assert len(noisy) == len(clean) == len(scaled)

    def test_silent_clean_rejected(self):
        with pytest.raises(DomainError):
            mix_at_snr(AudioBuffer(np.zeros(1000)), white(1.0, seed=1), 0.0)

    def test_requested_snr_precision(self):
        clean = synth_speechlike(2.0, seed=11)
        noise = synth_noise("modulated", 2.0, seed=12)
        for target in (-10.0, -3.3, 0.0, 7.5):
            _, scaled = mix_at_snr(clean, noise, target)
            assert snr_db(clean, scaled) == pytest.approx(target, abs=0.01)


class TestSpeechlike:
    def test_deterministic(self):
        a = synth_speechlike(1.5, seed=1234)
        b = synth_speechlike(1.5, seed=1234)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_silence_fraction_in_band(self):
        for seed in range(8):
            audio = synth_speechlike(2.0, seed=seed)
            frac = np.mean(np.abs(audio.samples) < 1e-8)
            assert 0.2 <= frac <= 0.5, f"seed {seed}: silence fraction {frac:.3f}"

    def test_band_energy_below_4khz(self):
        for seed in (3, 4):
            audio = synth_speechlike(2.0, seed=seed)
            spectrum = np.abs(np.fft.rfft(audio.samples)) ** 2
            freqs = np.fft.rfftfreq(len(audio), 1.0 / SAMPLE_RATE)
            ratio = spectrum[freqs < 4000.0].sum() / spectrum.sum()
            assert ratio >= 0.9

    def test_amplitude_bounded(self):
        audio = synth_speechlike(1.0, seed=77)
        assert np.max(np.abs(audio.samples)) <= 1.0

    def test_too_short_rejected(self):
        with pytest.raises(InvalidConfigError):
            synth_speechlike(0.2, seed=0)


class TestSynthNoise:
    def test_deterministic(self):
        for kind in ("white", "pink", "modulated"):
            a = synth_noise(kind, 1.0, seed=9)
            b = synth_noise(kind, 1.0, seed=9)
            np.testing.assert_array_equal(a.samples, b.samples)

    def test_unknown_kind(self):
        with pytest.raises(InvalidConfigError):
            synth_noise("brown", 1.0, seed=0)

    def test_white_psd_flat(self):
        # Welch-style average over a 10 s realization: per-bin deviation from
        # the mean PSD stays within 1.5 dB
        audio = synth_noise("white", 10.0, seed=123)
        power = stft(audio).power().mean(axis=1)
        level_db = 10.0 * np.log10(power / power.mean())
        assert np.max(np.abs(level_db)) <= 1.5

    def test_pink_slopes_down(self):
        audio = synth_noise("pink", 10.0, seed=5)
        power = stft(audio).power().mean(axis=1)
        low = power[2:13].mean()    # ~125-750 Hz
        high = power[64:128].mean()  # ~4-8 kHz
        assert low > 4.0 * high

    def test_modulated_power_varies_more_than_white(self):
        frame = 2048
        cov = {}
        for kind in ("white", "modulated"):
            audio = synth_noise(kind, 4.0, seed=321)
            frames = audio.samples[:len(audio) // frame * frame].reshape(-1, frame)
            powers = np.mean(frames ** 2, axis=1)
            cov[kind] = powers.std() / powers.mean()
        assert cov["modulated"] > 2.0 * cov["white"]


class TestMixSpec:
    def test_mixture_honors_spec(self):
        spec = MixSpec(snr_db=5.0, seed=77, duration_s=1.0, noise_kind="pink")
        noisy, clean, scaled = synth_mixture(spec)
        np.testing.assert_array_equal(noisy.samples, clean.samples + scaled.samples)
        assert snr_db(clean, scaled) == pytest.approx(5.0, abs=1e-9)

    def test_deterministic(self):
        spec = MixSpec(snr_db=0.0, seed=3, duration_s=1.0)
        a, _, _ = synth_mixture(spec)
        b, _, _ = synth_mixture(spec)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_invalid_fields_rejected(self):
        with pytest.raises(InvalidConfigError):
            MixSpec(snr_db=0.0, seed=1, duration_s=0.0)
        with pytest.raises(InvalidConfigError):
            MixSpec(snr_db=0.0, seed=1, duration_s=1.0, noise_kind="brown")


class TestTrainingPairs:
    def test_pair_round_trip_bitwise(self, tmp_path):
        clean = synth_speechlike(1.0, seed=42)
        noise = synth_noise("modulated", 1.0, seed=43)
        record = make_training_pairs(clean, noise, snr_db=2.5, seed=42)
        path = tmp_path / "pair.sppd"
        write_pair_file(path, record)
        loaded = read_pair_file(path)
        np.testing.assert_array_equal(loaded.features, record.features)
        np.testing.assert_array_equal(loaded.target, record.target)
        assert loaded.seed == 42 and loaded.snr_db == 2.5
        assert loaded.norm_mean == record.norm_mean
        assert loaded.norm_std == record.norm_std

    def test_targets_in_unit_interval(self):
        clean = synth_speechlike(1.0, seed=1)
        noise = synth_noise("white", 1.0, seed=2)
        record = make_training_pairs(clean, noise, snr_db=0.0)
        assert np.all(record.target >= 0.0) and np.all(record.target <= 1.0)

    def test_noise_dominated_silences_have_zero_targets(self):
        # in silent stretches of the clean signal the oracle targets vanish
        clean = synth_speechlike(2.0, seed=7)
        noise = synth_noise("white", 2.0, seed=8)
        record = make_training_pairs(clean, noise, snr_db=0.0)
        clean_power = stft(clean).power()
        silent_frames = clean_power.sum(axis=0) == 0.0
        assert silent_frames.any()
        assert np.all(record.target[:, silent_frames] == 0.0)
