import numpy as np
import pytest
from scipy.io import wavfile

from sppkit.dumps import (MAGIC_FEATURES, MAGIC_NOISE, MAGIC_SPP, read_matrix_dump,
                          write_matrix_dump)
from sppkit.errors import FormatError
from sppkit.frontend import AudioBuffer
from sppkit.wavio import read_wav, write_wav


class TestWav:
    def test_pcm16_round_trip(self, rng, tmp_path):
        audio = AudioBuffer(np.clip(rng.standard_normal(8000) * 0.2, -1, 1))
        path = tmp_path / "a.wav"
        write_wav(path, audio, encoding="pcm16")
        back = read_wav(path)
        assert back.sample_rate == 16000
        np.testing.assert_allclose(back.samples, audio.samples, atol=1.0 / 32767)

    def test_float32_round_trip(self, rng, tmp_path):
        audio = AudioBuffer(rng.standard_normal(8000) * 0.2)
        path = tmp_path / "f.wav"
        write_wav(path, audio, encoding="float32")
        back = read_wav(path)
        np.testing.assert_allclose(back.samples, audio.samples.astype(np.float32),
                                   atol=0.0)

    def test_wrong_rate_rejected(self, tmp_path):
        path = tmp_path / "rate.wav"
        wavfile.write(path, 8000, np.zeros(100, dtype=np.int16))
        with pytest.raises(FormatError, match="16000"):
            read_wav(path)

    def test_stereo_rejected(self, tmp_path):
        path = tmp_path / "stereo.wav"
        wavfile.write(path, 16000, np.zeros((100, 2), dtype=np.int16))
        with pytest.raises(FormatError, match="mono"):
            read_wav(path)

    def test_unsupported_dtype_rejected(self, tmp_path):
        path = tmp_path / "i32.wav"
        wavfile.write(path, 16000, np.zeros(100, dtype=np.int32))
        with pytest.raises(FormatError, match="format"):
            read_wav(path)

    def test_pcm16_clipping(self, tmp_path):
        audio = AudioBuffer(np.array([2.0, -2.0, 0.0]))
        path = tmp_path / "clip.wav"
        write_wav(path, audio)
        back = read_wav(path)
        assert np.max(np.abs(back.samples)) <= 1.0


class TestMatrixDumps:
    @pytest.mark.parametrize("magic", [MAGIC_FEATURES, MAGIC_SPP, MAGIC_NOISE])
    def test_round_trip_bitwise(self, rng, tmp_path, magic):
        data = rng.standard_normal((129, 17)).astype(np.float32)
        path = tmp_path / "m.dump"
        write_matrix_dump(path, data, magic)
        loaded = read_matrix_dump(path, magic)
        np.testing.assert_array_equal(loaded, data)
        assert path.stat().st_size == 16 + 4 * 129 * 17

    def test_magic_enforced(self, rng, tmp_path):
        path = tmp_path / "m.dump"
        write_matrix_dump(path, np.zeros((2, 2), dtype=np.float32), MAGIC_SPP)
        with pytest.raises(FormatError, match="magic"):
            read_matrix_dump(path, MAGIC_NOISE)

    def test_unknown_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.dump"
        path.write_bytes(b"WHAT" + b"\x00" * 12)
        with pytest.raises(FormatError):
            read_matrix_dump(path)

    def test_truncated_rejected(self, rng, tmp_path):
        path = tmp_path / "t.dump"
        write_matrix_dump(path, np.zeros((4, 4), dtype=np.float32), MAGIC_SPP)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError, match="truncated"):
            read_matrix_dump(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "x.dump"
        write_matrix_dump(path, np.zeros((2, 2), dtype=np.float32), MAGIC_SPP)
        path.write_bytes(path.read_bytes() + b"zz")
        with pytest.raises(FormatError, match="trailing"):
            read_matrix_dump(path)
