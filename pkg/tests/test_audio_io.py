"""RIFF reader checked against files written by the stdlib wave module
and against hand-packed layouts it cannot produce."""

import struct

import numpy as np
import pytest

from accentgram.audio_io import AudioClip, WavFormatError, load_wav
from conftest import _riff, fmt_chunk, write_extensible_wav, write_float_wav, write_pcm_wav


def ramp(n=64):
    return np.linspace(-0.9, 0.9, n)


@pytest.mark.parametrize("sampwidth", [1, 2, 3, 4])
def test_pcm_depths_round_trip(tmp_path, sampwidth):
    x = ramp()
    path = write_pcm_wav(tmp_path / f"pcm{sampwidth}.wav", x, 8000, sampwidth)
    clip = load_wav(path)
    assert clip.sample_rate_hz == 8000
    assert clip.samples.shape == x.shape
    # quantization error bounded by one step of the written depth
    assert np.max(np.abs(clip.samples - x)) <= 2.0 ** -(8 * sampwidth - 1) + 1e-12


def test_16bit_values_are_exact(tmp_path):
    # integer-representable values survive the round trip bit-exactly
    x = np.array([0.0, 0.5, -0.5, 0.25, -1.0, 32767 / 32768])
    clip = load_wav(write_pcm_wav(tmp_path / "exact.wav", x, 44100, 2))
    assert np.array_equal(clip.samples, x)


@pytest.mark.parametrize("bits", [32, 64])
def test_ieee_float_depths(tmp_path, bits):
    x = ramp()
    clip = load_wav(write_float_wav(tmp_path / f"f{bits}.wav", x, 22050, bits))
    tol = 1e-7 if bits == 32 else 0.0
    assert np.max(np.abs(clip.samples - x)) <= tol


def test_float_out_of_range_is_clamped(tmp_path):
    x = np.array([0.0, 1.5, -2.0, 0.25])
    clip = load_wav(write_float_wav(tmp_path / "hot.wav", x, 8000, 32))
    assert np.array_equal(clip.samples, [0.0, 1.0, -1.0, 0.25])


def test_extensible_header(tmp_path):
    x = ramp()
    clip = load_wav(write_extensible_wav(tmp_path / "ext.wav", x, 16000, 16))
    assert clip.sample_rate_hz == 16000
    assert np.max(np.abs(clip.samples - x)) <= 2.0 ** -15 + 1e-12


def test_stereo_downmix_is_mean(tmp_path):
    left = np.array([0.5, -0.25, 0.0, 0.125])
    right = np.array([0.25, 0.25, 0.5, -0.125])
    clip = load_wav(write_pcm_wav(tmp_path / "st.wav", np.stack([left, right], 1), 8000, 2, 2))
    assert np.allclose(clip.samples, (left + right) / 2, atol=2.0 ** -15)


def test_metadata_chunks_are_skipped(tmp_path):
    x = (np.arange(8) - 4) / 8.0
    raw = (x * 32768).astype("<i2").tobytes()
    data = _riff(
        [
            (b"JUNK", b"\x00" * 11),  # odd size exercises word-alignment padding
            (b"fmt ", fmt_chunk(1, 1, 8000, 16)),
            (b"LIST", b"INFOisft\x04\x00\x00\x00test"),
            (b"fact", struct.pack("<I", 8)),
            (b"data", raw),
        ]
    )
    path = tmp_path / "chunky.wav"
    path.write_bytes(data)
    clip = load_wav(path)
    assert np.array_equal(clip.samples, x)


def bad_file(tmp_path, name, payload):
    path = tmp_path / name
    path.write_bytes(payload)
    return path


def test_rejects_non_riff(tmp_path):
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "x.wav", b"OggS" + b"\x00" * 40))
    assert info.value.offset == 0


def test_rejects_non_wave_form(tmp_path):
    body = b"RIFF" + struct.pack("<I", 4) + b"AVI "
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "x.wav", body))
    assert info.value.offset == 8


def test_rejects_tiny_file(tmp_path):
    with pytest.raises(WavFormatError):
        load_wav(bad_file(tmp_path, "x.wav", b"RIFF"))


def test_rejects_data_before_fmt(tmp_path):
    payload = _riff([(b"data", b"\x00\x00")])
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "x.wav", payload))
    assert "before fmt" in str(info.value)


def test_rejects_unsupported_codec(tmp_path):
    payload = _riff([(b"fmt ", fmt_chunk(85, 1, 8000, 16)), (b"data", b"\x00\x00")])
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "mp3.wav", payload))
    assert "0x0055" in str(info.value)


def test_rejects_truncated_data(tmp_path):
    raw = b"\x00" * 16
    payload = _riff([(b"fmt ", fmt_chunk(1, 1, 8000, 16)), (b"data", raw)])
    payload = payload[:-8]  # chop the tail while keeping the declared size
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "cut.wav", payload))
    assert "truncated" in str(info.value)


def test_rejects_zero_length_data(tmp_path):
    payload = _riff([(b"fmt ", fmt_chunk(1, 1, 8000, 16)), (b"data", b"")])
    with pytest.raises(WavFormatError):
        load_wav(bad_file(tmp_path, "empty.wav", payload))


def test_rejects_ragged_frames(tmp_path):
    payload = _riff([(b"fmt ", fmt_chunk(1, 1, 8000, 16)), (b"data", b"\x00" * 5)])
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "odd.wav", payload))
    assert "frames" in str(info.value)


def test_rejects_missing_data_chunk(tmp_path):
    payload = _riff([(b"fmt ", fmt_chunk(1, 1, 8000, 16))])
    with pytest.raises(WavFormatError) as info:
        load_wav(bad_file(tmp_path, "nodata.wav", payload))
    assert "no data chunk" in str(info.value)


def test_error_carries_path_and_offset(tmp_path):
    path = bad_file(tmp_path, "broken.wav", b"\x00" * 20)
    with pytest.raises(WavFormatError) as info:
        load_wav(path)
    assert str(path) in str(info.value)
    assert "offset" in str(info.value)


def test_clip_validation():
    with pytest.raises(Exception):
        AudioClip(samples=np.array([]), sample_rate_hz=8000, source_id="x")
    with pytest.raises(Exception):
        AudioClip(samples=np.array([2.0]), sample_rate_hz=8000, source_id="x")
    clip = AudioClip(samples=np.zeros(800), sample_rate_hz=8000, source_id="x")
    assert clip.duration_s == pytest.approx(0.1)
