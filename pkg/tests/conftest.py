"""Shared fixtures: synthetic WAV writers, record builders, acceptance report.

WAV files are written with the stdlib wave module (and raw struct packing for
the float/extensible layouts wave cannot produce), so the reader under test is
never checked against bytes it produced itself.
"""

from __future__ import annotations

import csv
import struct
import wave
from pathlib import Path

import numpy as np
import pytest

from accentgram import SpeakerRecord


# ---------------------------------------------------------------- WAV writers


def write_pcm_wav(path, samples, sample_rate, sampwidth=2, n_channels=1):
    """Write integer PCM via the stdlib wave module.

    samples: float array in [-1, 1), one row per frame; stereo input is a
    (n, 2) array. Quantization matches the symmetric full-scale convention
    (value * 2^(bits-1), clipped).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    full_scale = float(1 << (8 * sampwidth - 1))
    ints = np.clip(np.round(samples * full_scale), -full_scale, full_scale - 1).astype(np.int64)
    if sampwidth == 1:
        raw = (ints + 128).astype(np.uint8).tobytes()
    elif sampwidth == 2:
        raw = ints.astype("<i2").tobytes()
    elif sampwidth == 3:
        raw = b"".join(int(v).to_bytes(3, "little", signed=True) for v in ints.ravel())
    elif sampwidth == 4:
        raw = ints.astype("<i4").tobytes()
    else:
        raise ValueError(f"unsupported sampwidth {sampwidth}")
    with wave.open(str(path), "wb") as handle:
        handle.setnchannels(n_channels)
        handle.setsampwidth(sampwidth)
        handle.setframerate(sample_rate)
        handle.writeframes(raw)
    return Path(path)


def _riff(chunks: list[tuple[bytes, bytes]]) -> bytes:
    body = b"WAVE"
    for tag, payload in chunks:
        body += tag + struct.pack("<I", len(payload)) + payload
        if len(payload) % 2:
            body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def fmt_chunk(codec, n_channels, sample_rate, bits) -> bytes:
    block = n_channels * bits // 8
    return struct.pack("<HHIIHH", codec, n_channels, sample_rate, sample_rate * block, block, bits)


def write_float_wav(path, samples, sample_rate, bits=32):
    """IEEE float WAV (format code 3), built by hand; wave cannot write it."""
    samples = np.asarray(samples, dtype=np.float64)
    raw = samples.astype("<f4" if bits == 32 else "<f8").tobytes()
    data = _riff([(b"fmt ", fmt_chunk(3, 1, sample_rate, bits)), (b"data", raw)])
    Path(path).write_bytes(data)
    return Path(path)


def write_extensible_wav(path, samples, sample_rate, bits=16):
    """WAVE_FORMAT_EXTENSIBLE wrapper around integer PCM."""
    samples = np.asarray(samples, dtype=np.float64)
    full_scale = float(1 << (bits - 1))
    ints = np.clip(np.round(samples * full_scale), -full_scale, full_scale - 1)
    raw = ints.astype("<i2" if bits == 16 else "<i4").tobytes()
    pcm_guid = bytes(
        [0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10, 0x00,
         0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71]
    )
    ext = struct.pack("<HI", bits, 0) + pcm_guid  # validBits, channelMask, GUID
    fmt = fmt_chunk(0xFFFE, 1, sample_rate, bits) + struct.pack("<H", len(ext)) + ext
    data = _riff([(b"fmt ", fmt), (b"data", raw)])
    Path(path).write_bytes(data)
    return Path(path)


# ------------------------------------------------------------ record builders


def make_records(rng, n_a, n_b, n_features, shift=None, labels=("english", "mandarin")):
    """Two-group synthetic feature table. shift: per-feature mean offset
    added to the second group (array of length n_features, or None)."""
    label_a, label_b = labels
    offset = np.zeros(n_features) if shift is None else np.asarray(shift, dtype=np.float64)
    records = []
    for i in range(n_a):
        records.append(
            SpeakerRecord(f"spk_{label_a}_{i:04d}", label_a, rng.standard_normal(n_features))
        )
    for i in range(n_b):
        records.append(
            SpeakerRecord(f"spk_{label_b}_{i:04d}", label_b, rng.standard_normal(n_features) + offset)
        )
    return records


def separable_records(rng, n_per_group, n_features=2, margin=10.0, labels=("english", "mandarin")):
    """Unit-variance clusters with the given margin on every feature."""
    shift = np.full(n_features, margin)
    return make_records(rng, n_per_group, n_per_group, n_features, shift, labels)


# --------------------------------------------------------- synthetic corpora


def group_tone(rng, group_index, sample_rate=16000, duration_s=0.8):
    """Deterministic per-file waveform with a group-dependent spectral tilt."""
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    if group_index == 0:
        partials = [(220.0, 0.40), (660.0, 0.25), (1800.0, 0.10)]
    else:
        partials = [(300.0, 0.15), (900.0, 0.30), (2600.0, 0.30)]
    x = np.zeros_like(t)
    for freq, amp in partials:
        x += amp * np.sin(2 * np.pi * (freq * (1 + 0.01 * rng.standard_normal())) * t)
    x += 0.02 * rng.standard_normal(t.size)
    return 0.9 * x / np.max(np.abs(x))


def build_corpus(root: Path, n_per_group=6, sample_rate=16000, duration_s=0.8, seed=11):
    """Write n_per_group WAVs per group plus manifest.csv; returns the path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for g, label in enumerate(("english", "mandarin")):
        for i in range(n_per_group):
            name = f"{label}_{i:02d}.wav"
            write_pcm_wav(root / name, group_tone(rng, g, sample_rate, duration_s), sample_rate)
            rows.append((name, label, f"{label}_{i:02d}"))
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["path", "group", "speaker_id"])
        writer.writerows(rows)
    return manifest


@pytest.fixture(scope="session")
def corpus_manifest(tmp_path_factory):
    """12-file two-group corpus shared by pipeline tests (read-only)."""
    root = tmp_path_factory.mktemp("corpus")
    return build_corpus(root)


# ------------------------------------------------------- acceptance reporting


def pytest_configure(config):
    config._acceptance_rows = []


@pytest.fixture
def acceptance(pytestconfig):
    """Record one acceptance-criterion verdict for the terminal summary."""

    def record(criterion: int, description: str, status: str):
        assert status in ("PASS", "FAIL", "SKIP")
        pytestconfig._acceptance_rows.append((criterion, description, status))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_acceptance_rows", [])
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion, description, status in sorted(rows):
        terminalreporter.write_line(f"criterion {criterion:>2}: {status:4s} {description}")
