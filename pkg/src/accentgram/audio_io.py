"""RIFF/WAVE parsing into normalized mono float64 waveforms.

Supports the two uncompressed codecs found in practice: integer PCM
(8/16/24/32 bit, format tag 1) and IEEE float (32/64 bit, format tag 3),
little-endian only. Unknown chunks (LIST, fact, cue, ...) are skipped; the
`fmt ` chunk must appear before `data`. Every parse failure reports the
offending path and byte offset.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(DataError):
    """Raised when a file is not a WAV this reader can decode."""

    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: {message} (byte offset {offset})")
        self.path = str(path)
        self.offset = offset


@dataclass(frozen=True)
class AudioClip:
    """Decoded mono waveform: samples in [-1, 1], native sample rate."""

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise DataError(f"{self.source_id}: audio clip must hold at least one sample")
        if self.sample_rate_hz <= 0:
            raise DataError(f"{self.source_id}: sample rate must be positive")
        peak = float(np.abs(samples).max())
        if peak > 1.0:
            raise DataError(f"{self.source_id}: sample amplitude {peak} outside [-1, 1]")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


def _decode_pcm(raw: bytes, bits: int, path, offset: int) -> np.ndarray:
    if bits == 8:
        # 8-bit WAV is unsigned; recenter before scaling.
        return (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if bits == 24:
        triples = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.uint32)
        values = triples[:, 0] | (triples[:, 1] << 8) | (triples[:, 2] << 16)
        signed = values.astype(np.int32)
        signed[signed >= 1 << 23] -= 1 << 24
        return signed.astype(np.float64) / float(1 << 23)
    if bits == 32:
        return np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    raise WavFormatError(path, offset, f"unsupported PCM bit depth {bits}")


def _decode_float(raw: bytes, bits: int, path, offset: int) -> np.ndarray:
    if bits == 32:
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)
    if bits == 64:
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)
    raise WavFormatError(path, offset, f"unsupported IEEE float bit depth {bits}")


def load_wav(path) -> AudioClip:
    """Parse a RIFF/WAVE file into an AudioClip.

    Integer PCM is scaled by 1 / 2^(bits-1); multi-channel audio is downmixed
    by the per-frame arithmetic mean. The clip keeps the file's native sample
    rate; no resampling happens here.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12:
        raise WavFormatError(path, 0, "file too short for a RIFF header")
    if data[0:4] != b"RIFF":
        raise WavFormatError(path, 0, f"not a RIFF file (magic {data[0:4]!r})")
    if data[8:12] != b"WAVE":
        raise WavFormatError(path, 8, f"not a WAVE form (type {data[8:12]!r})")

    pos = 12
    fmt = None
    fmt_offset = 0
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body_start + 16 > len(data):
                raise WavFormatError(path, pos, "fmt chunk too short")
            tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from(
                "<HHIIHH", data, body_start
            )
            if tag == WAVE_FORMAT_EXTENSIBLE and chunk_size >= 40:
                # WAVE_FORMAT_EXTENSIBLE carries the real tag in the GUID head.
                (tag,) = struct.unpack_from("<H", data, body_start + 24)
            fmt = (tag, channels, rate, block_align, bits)
            fmt_offset = pos
        elif chunk_id == b"data":
            if fmt is None:
                raise WavFormatError(path, pos, "data chunk appears before fmt chunk")
            tag, channels, rate, block_align, bits = fmt
            if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
                raise WavFormatError(
                    path, fmt_offset, f"unsupported codec tag 0x{tag:04x} (PCM or IEEE float only)"
                )
            if channels < 1 or rate < 1 or bits < 1:
                raise WavFormatError(path, fmt_offset, "fmt chunk has zero channels, rate, or depth")
            if chunk_size == 0:
                raise WavFormatError(path, pos, "zero-length data chunk")
            if body_start + chunk_size > len(data):
                raise WavFormatError(
                    path,
                    pos,
                    f"truncated data chunk: declares {chunk_size} bytes, "
                    f"{len(data) - body_start} available",
                )
            bytes_per_frame = channels * (bits // 8)
            if bits % 8 != 0 or bytes_per_frame == 0 or chunk_size % bytes_per_frame != 0:
                raise WavFormatError(
                    path, pos, f"data chunk size {chunk_size} is not whole {bits}-bit frames"
                )
            raw = data[body_start : body_start + chunk_size]
            if tag == WAVE_FORMAT_PCM:
                flat = _decode_pcm(raw, bits, path, fmt_offset)
            else:
                flat = _decode_float(raw, bits, path, fmt_offset)
            if channels > 1:
                flat = flat.reshape(-1, channels).mean(axis=1)
            # Float WAVs may legally exceed full scale; clamp to the clip contract.
            flat = np.clip(flat, -1.0, 1.0)
            return AudioClip(samples=flat, sample_rate_hz=rate, source_id=str(path))
        # Any other chunk (LIST, fact, cue, ...) is metadata: skip it.
        pos = body_start + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavFormatError(path, pos, "no fmt chunk found")
    raise WavFormatError(path, pos, "no data chunk found")
