"""39-dimensional MFCC front end.

Pipeline: pre-emphasis -> 25 ms / 10 ms Hamming frames -> power spectrum
(rfft, zero-padded) -> 26-filter mel log-energies -> orthonormal DCT-II
keeping c0..c12 -> regression deltas and double deltas -> per-utterance
cepstral mean subtraction. Input audio must already be at the canonical
16 kHz rate; nothing here resamples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .errors import FeatureFileError, SampleRateMismatch, SignalTooShort

CANONICAL_SAMPLE_RATE = 16000

# Filterbank energies are floored before the log so silent frames stay finite.
ENERGY_FLOOR = 1e-10

FEATURE_MAGIC = b"MFCC"
FEATURE_VERSION = 1
_FEATURE_HEADER = struct.Struct("<4sIII")


@dataclass(eq=False)
class AudioSignal:
    """Mono audio: float64 samples (nominally in [-1, 1]) plus sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be a one-dimensional array")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        self.sample_rate = int(self.sample_rate)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class MfccConfig:
    """Front-end parameters. Defaults are conventional for 16 kHz speech.

    frame_length_ms / frame_shift_ms: analysis window and hop.
    preemphasis_coeff: first-order high-pass coefficient in [0, 1).
    num_mel_filters: triangular filters between low_freq_hz and high_freq_hz.
    fft_size: power of two, at least one frame long.
    num_cepstra: cepstra kept per frame (c0 included).
    delta_window: regression half-width for velocity/acceleration.
    """

    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    preemphasis_coeff: float = 0.97
    num_mel_filters: int = 26
    fft_size: int = 512
    num_cepstra: int = 13
    delta_window: int = 2
    low_freq_hz: float = 20.0
    high_freq_hz: float = 7600.0

    def __post_init__(self):
        if self.frame_length_ms <= 0 or self.frame_shift_ms <= 0:
            raise ValueError("frame length and shift must be positive")
        if self.frame_shift_ms > self.frame_length_ms:
            raise ValueError("frame shift must not exceed frame length")
        if not 0.0 <= self.preemphasis_coeff < 1.0:
            raise ValueError("preemphasis_coeff must lie in [0, 1)")
        if self.num_mel_filters < 1:
            raise ValueError("need at least one mel filter")
        if self.fft_size < 2 or self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")
        if not 1 <= self.num_cepstra <= self.num_mel_filters:
            raise ValueError("num_cepstra must be in [1, num_mel_filters]")
        if self.delta_window < 1:
            raise ValueError("delta_window must be at least 1")
        if not 0.0 <= self.low_freq_hz < self.high_freq_hz:
            raise ValueError("need 0 <= low_freq_hz < high_freq_hz")

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_length_ms * sample_rate / 1000.0))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_shift_ms * sample_rate / 1000.0))


def preemphasize(signal: AudioSignal, coeff: float) -> AudioSignal:
    """First-order pre-emphasis: y[0] = x[0], y[n] = x[n] - coeff * x[n-1]."""
    if not 0.0 <= coeff < 1.0:
        raise ValueError("preemphasis coefficient must lie in [0, 1)")
    x = signal.samples
    if x.size == 0:
        return AudioSignal(x.copy(), signal.sample_rate)
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - coeff * x[:-1]
    return AudioSignal(y, signal.sample_rate)


def frame_signal(signal: AudioSignal, config: MfccConfig) -> np.ndarray:
    """Slice a signal into overlapping Hamming-windowed frames.

    Returns an array of shape (num_frames, frame_samples) where
    num_frames = floor((N - L) / H) + 1. Trailing samples that do not fill
    a whole frame are dropped. Raises SignalTooShort when N < L.
    """
    length = config.frame_samples(signal.sample_rate)
    hop = config.hop_samples(signal.sample_rate)
    n = signal.samples.size
    if n < length:
        raise SignalTooShort(
            f"signal has {n} samples, need at least {length} for one frame"
        )
    num_frames = (n - length) // hop + 1
    idx = hop * np.arange(num_frames)[:, None] + np.arange(length)[None, :]
    return signal.samples[idx] * np.hamming(length)


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: MfccConfig, sample_rate: int) -> np.ndarray:
    """Triangular mel filterbank, shape (num_mel_filters, fft_size//2 + 1).

    Centers are uniformly spaced on the mel scale between low_freq_hz and
    high_freq_hz and snapped to FFT bins; each filter peaks at weight 1.0
    on its center bin.
    """
    if config.high_freq_hz > sample_rate / 2.0:
        raise ValueError("high_freq_hz exceeds the Nyquist frequency")
    nfilt = config.num_mel_filters
    nfft = config.fft_size
    mel_pts = np.linspace(
        hz_to_mel(config.low_freq_hz), hz_to_mel(config.high_freq_hz), nfilt + 2
    )
    bins = np.floor((nfft + 1) * mel_to_hz(mel_pts) / sample_rate).astype(int)
    fbank = np.zeros((nfilt, nfft // 2 + 1))
    for j in range(nfilt):
        lo, center, hi = bins[j], bins[j + 1], bins[j + 2]
        for i in range(lo, center):
            fbank[j, i] = (i - lo) / (center - lo)
        for i in range(center, hi):
            fbank[j, i] = (hi - i) / (hi - center)
        # Guarantees the unit peak even when neighboring edges collapse
        # onto the same bin at coarse FFT resolutions.
        fbank[j, center] = 1.0
    return fbank


def mel_filterbank_energies(
    power_spectrum: np.ndarray,
    config: MfccConfig,
    sample_rate: int,
    energy_floor: float = ENERGY_FLOOR,
) -> np.ndarray:
    """Log mel-filterbank energies of a power spectrum.

    Accepts a single spectrum of length fft_size//2 + 1 or a batch of them
    (frames along axis 0). Each output is ln(max(energy, energy_floor)).
    """
    ps = np.asarray(power_spectrum, dtype=np.float64)
    expected = config.fft_size // 2 + 1
    if ps.shape[-1] != expected:
        raise ValueError(
            f"power spectrum has {ps.shape[-1]} bins, expected {expected}"
        )
    fbank = mel_filterbank(config, sample_rate)
    energies = ps @ fbank.T
    return np.log(np.maximum(energies, energy_floor))


def extract_mfcc13(signal: AudioSignal, config: MfccConfig | None = None) -> np.ndarray:
    """Static cepstra c0..c(num_cepstra-1) per frame, shape (T, num_cepstra).

    Rejects any sample rate other than the canonical 16 kHz: resampling is
    out of scope and silently accepting other rates would shift the
    filterbank.
    """
    config = config or MfccConfig()
    if signal.sample_rate != CANONICAL_SAMPLE_RATE:
        raise SampleRateMismatch(
            f"got {signal.sample_rate} Hz audio, require {CANONICAL_SAMPLE_RATE} Hz"
        )
    if config.frame_samples(signal.sample_rate) > config.fft_size:
        raise ValueError("fft_size is smaller than one frame; cannot zero-pad")
    emphasized = preemphasize(signal, config.preemphasis_coeff)
    frames = frame_signal(emphasized, config)
    spectrum = np.fft.rfft(frames, n=config.fft_size, axis=1)
    power = np.abs(spectrum) ** 2
    log_mel = mel_filterbank_energies(power, config, signal.sample_rate)
    cepstra = dct(log_mel, type=2, norm="ortho", axis=1)
    return np.ascontiguousarray(cepstra[:, : config.num_cepstra])


def _regression_delta(x: np.ndarray, window: int) -> np.ndarray:
    # delta[t] = sum_d d * (x[t+d] - x[t-d]) / (2 * sum_d d^2), indices
    # clamped to the matrix edges (first/last frame replication).
    t = x.shape[0]
    denom = 2.0 * sum(d * d for d in range(1, window + 1))
    out = np.zeros_like(x)
    base = np.arange(t)
    for d in range(1, window + 1):
        fwd = np.clip(base + d, 0, t - 1)
        bwd = np.clip(base - d, 0, t - 1)
        out += d * (x[fwd] - x[bwd])
    return out / denom


def append_deltas(static: np.ndarray, delta_window: int = 2) -> np.ndarray:
    """Append velocity and acceleration columns: (T, D) -> (T, 3*D)."""
    x = np.asarray(static, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("static cepstra must be a non-empty 2-D matrix")
    if delta_window < 1:
        raise ValueError("delta_window must be at least 1")
    velocity = _regression_delta(x, delta_window)
    acceleration = _regression_delta(velocity, delta_window)
    return np.hstack([x, velocity, acceleration])


def cepstral_mean_subtract(features: np.ndarray) -> np.ndarray:
    """Subtract the per-dimension mean over the utterance from every frame."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError("feature matrix must be a non-empty 2-D matrix")
    return f - f.mean(axis=0, keepdims=True)


def extract_features(signal: AudioSignal, config: MfccConfig | None = None) -> np.ndarray:
    """Full front end: static cepstra + deltas + CMS, shape (T, 3*num_cepstra)."""
    config = config or MfccConfig()
    static = extract_mfcc13(signal, config)
    return cepstral_mean_subtract(append_deltas(static, config.delta_window))


def extract_segment(signal: AudioSignal, start_s: float, end_s: float) -> AudioSignal:
    """Slice [start_s, end_s) out of a signal, clipped to its bounds."""
    if not 0.0 <= start_s < end_s:
        raise ValueError("need 0 <= start_s < end_s")
    lo = int(round(start_s * signal.sample_rate))
    hi = min(int(round(end_s * signal.sample_rate)), signal.samples.size)
    return AudioSignal(signal.samples[lo:hi].copy(), signal.sample_rate)


def write_features(path, features: np.ndarray) -> None:
    """Write a feature matrix: magic, version, num_frames, dim, f64-LE rows."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError("feature matrix must be a non-empty 2-D matrix")
    if not np.isfinite(f).all():
        raise ValueError("refusing to serialize non-finite features")
    header = _FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, *f.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def read_features(path) -> np.ndarray:
    """Read a feature matrix written by write_features, validating the header."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FEATURE_HEADER.size:
        raise FeatureFileError(f"{path}: truncated header")
    magic, version, num_frames, dim = _FEATURE_HEADER.unpack_from(blob)
    if magic != FEATURE_MAGIC:
        raise FeatureFileError(f"{path}: bad magic {magic!r}")
    if version != FEATURE_VERSION:
        raise FeatureFileError(f"{path}: unsupported version {version}")
    expected = _FEATURE_HEADER.size + 8 * num_frames * dim
    if len(blob) != expected:
        raise FeatureFileError(
            f"{path}: payload is {len(blob)} bytes, expected {expected}"
        )
    data = np.frombuffer(blob, dtype="<f8", offset=_FEATURE_HEADER.size)
    features = data.reshape(num_frames, dim).astype(np.float64)
    if not np.isfinite(features).all():
        raise FeatureFileError(f"{path}: non-finite feature values")
    return features


def write_features_csv(path, features: np.ndarray) -> None:
    """Plain-text export, one frame per line, full float64 precision."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError("feature matrix must be a non-empty 2-D matrix")
    np.savetxt(path, f, delimiter=",", fmt="%.17g")
