"""Mel-frequency cepstral coefficient extraction.

The chain is the standard one: overlapping Hann-windowed frames, real-FFT
power spectra, a Slaney-style mel filterbank (linear below 1 kHz, log above,
area-normalized triangles), dB compression with a floor and dynamic-range
clamp, and an orthonormal DCT-II. A recording is summarized by the
frame-mean of its coefficient matrix, one vector per speaker.

All arithmetic is float64 and deterministic for a given (clip, config).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioClip
from .errors import DataError, NumericalError

# Slaney mel scale: linear below the break frequency, logarithmic above.
_MEL_HZ_PER_MEL = 200.0 / 3.0
_MEL_BREAK_HZ = 1000.0
_MEL_BREAK = _MEL_BREAK_HZ / _MEL_HZ_PER_MEL  # 15.0
_MEL_LOG_STEP = np.log(6.4) / 27.0


@dataclass(frozen=True)
class MfccConfig:
    """Extraction parameters. Defaults give 13 coefficients from 128 mel bands."""

    window_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 128
    n_mfcc: int = 13
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None means Nyquist
    log_floor: float = 1e-10
    dynamic_range_db: float = 80.0

    def __post_init__(self):
        if self.window_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("window_ms and hop_ms must be positive")
        if self.hop_ms > self.window_ms:
            raise ValueError("hop_ms must not exceed window_ms")
        if self.n_mels < 1 or self.n_mfcc < 1:
            raise ValueError("n_mels and n_mfcc must be positive")
        if self.n_mfcc > self.n_mels:
            raise ValueError("n_mfcc must not exceed n_mels")
        if self.fmin_hz < 0:
            raise ValueError("fmin_hz must be non-negative")
        if self.fmax_hz is not None and self.fmin_hz >= self.fmax_hz:
            raise ValueError(f"fmin_hz {self.fmin_hz} must lie below fmax_hz {self.fmax_hz}")
        if self.log_floor <= 0 or self.dynamic_range_db <= 0:
            raise ValueError("log_floor and dynamic_range_db must be positive")

    def window_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.window_ms * sample_rate_hz / 1000.0))

    def hop_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.hop_ms * sample_rate_hz / 1000.0))

    def fft_size(self, sample_rate_hz: int) -> int:
        win = self.window_samples(sample_rate_hz)
        return 1 << max(win - 1, 1).bit_length() if win > 1 else 1

    def effective_fmax(self, sample_rate_hz: int) -> float:
        return sample_rate_hz / 2.0 if self.fmax_hz is None else self.fmax_hz


@dataclass(frozen=True)
class MfccMatrix:
    """Per-frame coefficients (n_frames x n_mfcc) with frame-center times."""

    values: np.ndarray
    frame_times: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise DataError("coefficient matrix must have at least one frame")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("coefficient matrix contains non-finite values")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


def hz_to_mel(f):
    """Slaney mel value for frequency f (scalar or array, Hz)."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequency must be non-negative")
    mel = f / _MEL_HZ_PER_MEL
    above = f >= _MEL_BREAK_HZ
    mel = np.where(above, _MEL_BREAK + np.log(np.maximum(f, 1.0) / _MEL_BREAK_HZ) / _MEL_LOG_STEP, mel)
    return float(mel) if mel.ndim == 0 else mel


def mel_to_hz(m):
    """Inverse of hz_to_mel."""
    m = np.asarray(m, dtype=float)
    hz = m * _MEL_HZ_PER_MEL
    above = m >= _MEL_BREAK
    hz = np.where(above, _MEL_BREAK_HZ * np.exp(_MEL_LOG_STEP * (m - _MEL_BREAK)), hz)
    return float(hz) if hz.ndim == 0 else hz


def frame_and_window(clip: AudioClip, cfg: MfccConfig) -> np.ndarray:
    """Slice the clip into centered, Hann-windowed frames of fft_size samples.

    The signal is reflect-padded by fft_size/2 on each side so frame t is
    centered on sample t*hop; the periodic Hann window of the analysis length
    sits centered in the frame with zero padding around it. Frame count is
    1 + floor(n_samples / hop).
    """
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.size < 1:
        raise DataError(f"{clip.source_id}: cannot frame an empty clip")
    sr = clip.sample_rate_hz
    win = cfg.window_samples(sr)
    hop = cfg.hop_samples(sr)
    if win < 1 or hop < 1:
        raise ValueError(f"window/hop shorter than one sample at {sr} Hz")
    fft_size = cfg.fft_size(sr)

    pad = fft_size // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = 1 + x.size // hop
    frames = np.lib.stride_tricks.sliding_window_view(padded, fft_size)[::hop][:n_frames]

    n = np.arange(win)
    hann = 0.5 * (1.0 - np.cos(2.0 * np.pi * n / win))  # periodic variant
    weight = np.zeros(fft_size)
    left = (fft_size - win) // 2
    weight[left : left + win] = hann
    return frames * weight


def power_spectrogram(frames: np.ndarray) -> np.ndarray:
    """Squared-magnitude real-input DFT of each frame (n_frames x fft/2+1)."""
    spectrum = np.fft.rfft(frames, axis=-1)
    return np.abs(spectrum) ** 2


def mel_filterbank(sample_rate_hz: int, fft_size: int, cfg: MfccConfig) -> np.ndarray:
    """Triangular mel filterbank matrix (n_mels x fft/2+1).

    Filter edges are equally spaced on the mel axis between fmin and fmax;
    each triangle is scaled by 2 / (subtended Hz width) so filters integrate
    to roughly constant area across the band.
    """
    fmax = cfg.effective_fmax(sample_rate_hz)
    nyquist = sample_rate_hz / 2.0
    if fmax > nyquist:
        raise ValueError(f"fmax {fmax} Hz exceeds Nyquist {nyquist} Hz")
    if cfg.fmin_hz >= fmax:
        raise ValueError(f"fmin {cfg.fmin_hz} Hz must lie below fmax {fmax} Hz")

    mel_edges = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(fmax), cfg.n_mels + 2)
    hz_edges = mel_to_hz(mel_edges)
    if np.any(np.diff(hz_edges) <= 0):
        raise ValueError(f"n_mels={cfg.n_mels} collapses adjacent filter edges")
    bin_freqs = np.arange(fft_size // 2 + 1) * (sample_rate_hz / fft_size)

    lower = hz_edges[:-2][:, None]
    center = hz_edges[1:-1][:, None]
    upper = hz_edges[2:][:, None]
    rising = (bin_freqs[None, :] - lower) / (center - lower)
    falling = (upper - bin_freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    empty = np.flatnonzero(weights.max(axis=1) == 0.0)
    if empty.size:
        raise ValueError(
            f"mel filter {int(empty[0])} has no nonzero FFT bin "
            f"(n_mels={cfg.n_mels} too large for fft_size={fft_size} at {sample_rate_hz} Hz)"
        )
    weights *= 2.0 / (upper - lower)
    return weights


def log_compress(mel_power: np.ndarray, cfg: MfccConfig) -> np.ndarray:
    """Power to dB with a floor, then clamp to the top dynamic_range_db."""
    level = 10.0 * np.log10(np.maximum(mel_power, cfg.log_floor))
    return np.maximum(level, level.max() - cfg.dynamic_range_db)


def dct_matrix(size: int) -> np.ndarray:
    """Orthonormal DCT-II matrix D with D @ D.T = I."""
    k = np.arange(size)[:, None]
    m = np.arange(size)[None, :]
    d = np.cos(np.pi * k * (2 * m + 1) / (2 * size))
    d[0] *= np.sqrt(1.0 / size)
    d[1:] *= np.sqrt(2.0 / size)
    return d


def dct2_orthonormal(values: np.ndarray, n_coeff: int | None = None) -> np.ndarray:
    """First n_coeff orthonormal DCT-II coefficients of each input vector.

    Accepts a single vector or a matrix whose rows are transformed
    independently.
    """
    values = np.asarray(values, dtype=np.float64)
    size = values.shape[-1]
    if n_coeff is None:
        n_coeff = size
    if not 1 <= n_coeff <= size:
        raise ValueError(f"n_coeff must lie in [1, {size}], got {n_coeff}")
    return values @ dct_matrix(size)[:n_coeff].T


def extract_mfcc(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> MfccMatrix:
    """Full extraction chain for one recording."""
    sr = clip.sample_rate_hz
    frames = frame_and_window(clip, cfg)
    power = power_spectrogram(frames)
    bank = mel_filterbank(sr, cfg.fft_size(sr), cfg)
    log_mel = log_compress(power @ bank.T, cfg)
    coeffs = dct2_orthonormal(log_mel, cfg.n_mfcc)
    hop = cfg.hop_samples(sr)
    times = np.arange(coeffs.shape[0]) * (hop / sr)
    return MfccMatrix(values=coeffs, frame_times=times)


def pool_mean(matrix: MfccMatrix) -> np.ndarray:
    """Column-wise mean of the coefficient matrix: one vector per recording."""
    if matrix.n_frames < 1:
        raise DataError("cannot pool an empty coefficient matrix")
    return matrix.values.mean(axis=0)
