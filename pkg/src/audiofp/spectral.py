"""Shared signal-processing kernel.

Framing with Hann windows, magnitude spectra with a normalized weight PMF,
mel filterbank energies, orthonormal DCT-II and spectral peak picking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .audio_io import AudioClip
from .errors import BadBand, ClipTooShort

DEFAULT_FRAME_MS = 50.0
DEFAULT_OVERLAP = 0.5

# local maxima below this fraction of the peak magnitude are noise-floor artifacts
_PEAK_FLOOR_RATIO = 1e-4


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum with its normalized weight PMF.

    ``weights`` is magnitude / sum(magnitude), or uniform 1/N for an all-zero
    (silent) input so entropy-style features stay defined.
    """

    bin_freq_hz: np.ndarray
    magnitude: np.ndarray
    weights: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.magnitude.size

    def total_magnitude(self) -> float:
        return float(np.sum(self.magnitude))


@dataclass(frozen=True)
class FrameSequence:
    """Hann-windowed, fixed-length frames cut from one clip."""

    frames: np.ndarray  # (n_frames, frame_length)
    frame_length_samples: int
    hop_samples: int
    sample_rate_hz: int

    def __len__(self) -> int:
        return self.frames.shape[0]


def frame_length_for(sample_rate_hz: int, frame_ms: float = DEFAULT_FRAME_MS) -> int:
    """Frame length in samples: nearest even integer, ties rounded up."""
    half = sample_rate_hz * frame_ms / 2000.0
    return 2 * int(math.floor(half + 0.5))


def frame_signal(
    clip: AudioClip,
    frame_ms: float = DEFAULT_FRAME_MS,
    overlap_fraction: float = DEFAULT_OVERLAP,
) -> FrameSequence:
    """Cut a clip into Hann-windowed frames.

    Frame count is 1 + floor((n - frame_length) / hop); a trailing partial
    frame is discarded. Raises ClipTooShort when the clip cannot fill one
    frame.
    """
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must be in [0, 1)")
    frame_len = frame_length_for(clip.sample_rate_hz, frame_ms)
    n = len(clip)
    if n < frame_len:
        raise ClipTooShort(f"clip of {n} samples shorter than one {frame_len}-sample frame")
    hop = max(1, int(round(frame_len * (1.0 - overlap_fraction))))
    n_frames = 1 + (n - frame_len) // hop

    starts = np.arange(n_frames) * hop
    idx = starts[:, None] + np.arange(frame_len)[None, :]
    window = np.hanning(frame_len)
    return FrameSequence(
        frames=clip.samples[idx] * window,
        frame_length_samples=frame_len,
        hop_samples=hop,
        sample_rate_hz=clip.sample_rate_hz,
    )


def magnitude_spectrum(samples: np.ndarray, sample_rate_hz: int) -> Spectrum:
    """One-sided DFT magnitudes with bin frequencies i * rate / N."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("cannot take the spectrum of an empty sequence")
    n = samples.size
    magnitude = np.abs(np.fft.rfft(samples))
    freqs = np.arange(magnitude.size) * (sample_rate_hz / n)
    total = magnitude.sum()
    if total > 0:
        weights = magnitude / total
    else:
        weights = np.full(magnitude.size, 1.0 / magnitude.size)
    return Spectrum(bin_freq_hz=freqs, magnitude=magnitude, weights=weights)


def mel_from_hz(f_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz, dtype=np.float64) / 700.0)


def hz_from_mel(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_matrix(
    bin_freq_hz: np.ndarray, n_filters: int, f_min_hz: float, f_max_hz: float
) -> np.ndarray:
    """(n_filters, n_bins) triangular mel weights, each row unit-area in Hz.

    Filter centers are equally spaced on the mel scale between f_min and
    f_max; unit-area normalization makes a flat power spectrum excite every
    filter equally.
    """
    if f_min_hz >= f_max_hz:
        raise BadBand(f"f_min {f_min_hz} >= f_max {f_max_hz}")
    edges_hz = hz_from_mel(
        np.linspace(mel_from_hz(f_min_hz), mel_from_hz(f_max_hz), n_filters + 2)
    )
    freqs = np.asarray(bin_freq_hz, dtype=np.float64)
    matrix = np.zeros((n_filters, freqs.size))
    for j in range(n_filters):
        lo, mid, hi = edges_hz[j], edges_hz[j + 1], edges_hz[j + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        shape = np.clip(np.minimum(rising, falling), 0.0, None)
        matrix[j] = shape / (0.5 * (hi - lo))
    return matrix


def mel_filterbank_energies(
    spec: Spectrum, n_filters: int, f_min_hz: float, f_max_hz: float
) -> np.ndarray:
    """Power (magnitude squared) summed under unit-area mel triangles."""
    matrix = mel_filter_matrix(spec.bin_freq_hz, n_filters, f_min_hz, f_max_hz)
    return matrix @ (spec.magnitude**2)


def dct_ii(values: np.ndarray, n_out: int) -> np.ndarray:
    """First n_out coefficients of the orthonormal DCT-II (last axis)."""
    values = np.asarray(values, dtype=np.float64)
    if n_out > values.shape[-1]:
        raise ValueError(f"n_out {n_out} exceeds input length {values.shape[-1]}")
    return scipy.fft.dct(values, type=2, norm="ortho", axis=-1)[..., :n_out]


def find_spectral_peaks(spec: Spectrum) -> list[tuple[float, float]]:
    """Local maxima (freq, amplitude) in ascending frequency order.

    A bin i is a peak when m[i-1] < m[i] >= m[i+1], so a plateau reports its
    first bin. Peaks below 1e-4 of the maximum magnitude are dropped.
    """
    m = spec.magnitude
    if m.size < 3:
        raise ValueError("need at least 3 bins to find peaks")
    floor = _PEAK_FLOOR_RATIO * m.max()
    interior = np.arange(1, m.size - 1)
    is_peak = (m[interior - 1] < m[interior]) & (m[interior] >= m[interior + 1])
    is_peak &= m[interior] >= floor
    peaks = interior[is_peak]
    return [(float(spec.bin_freq_hz[i]), float(m[i])) for i in peaks]
