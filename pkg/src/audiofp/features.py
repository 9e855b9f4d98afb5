"""The 15 acoustic feature extractors and the combined per-clip extractor.

Scalar spectral features (codes 4-12) are computed from a single whole-clip
spectrum; RMS and ZCR from raw samples; low-energy rate, MFCC, chromagram and
tonal centroid from 50 ms Hann frames with 50% overlap.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .errors import ClipTooShort, SilentClip
from .spectral import (
    Spectrum,
    dct_ii,
    find_spectral_peaks,
    frame_signal,
    magnitude_spectrum,
    mel_filter_matrix,
)

MFCC_N_FILTERS = 26
MFCC_N_COEFFS = 13
MEL_LOG_FLOOR = 1e-10
CHROMA_REF_HZ = 440.0  # pitch class index 0 = A
CHROMA_MIN_HZ = 20.0
BRIGHTNESS_CUTOFF_HZ = 1500.0
ROLLOFF_FRACTION = 0.85
GEOMEAN_FLOOR = 1e-12


@dataclass(frozen=True)
class FeatureId:
    code: int
    name: str
    dimension: int


FEATURES: tuple[FeatureId, ...] = (
    FeatureId(1, "rms", 1),
    FeatureId(2, "zcr", 1),
    FeatureId(3, "low_energy_rate", 1),
    FeatureId(4, "spectral_centroid", 1),
    FeatureId(5, "spectral_entropy", 1),
    FeatureId(6, "spectral_irregularity", 1),
    FeatureId(7, "spectral_spread", 1),
    FeatureId(8, "spectral_skewness", 1),
    FeatureId(9, "spectral_kurtosis", 1),
    FeatureId(10, "spectral_rolloff", 1),
    FeatureId(11, "spectral_brightness", 1),
    FeatureId(12, "spectral_flatness", 1),
    FeatureId(13, "mfcc", MFCC_N_COEFFS),
    FeatureId(14, "chromagram", 12),
    FeatureId(15, "tonal_centroid", 6),
)

FEATURE_BY_CODE = {f.code: f for f in FEATURES}
ALL_CODES = tuple(f.code for f in FEATURES)

_COLUMN_PREFIX = {13: "mfcc", 14: "chroma", 15: "tonal"}


@dataclass
class FeatureVector:
    """Ordered map of feature code -> value vector for one clip."""

    values: dict[int, np.ndarray]
    label: str | None = None

    def __post_init__(self):
        clean = {}
        for code in sorted(self.values):
            arr = np.atleast_1d(np.asarray(self.values[code], dtype=np.float64))
            expected = FEATURE_BY_CODE[code].dimension
            if arr.size != expected:
                raise ValueError(
                    f"feature {code} has {arr.size} values, expected {expected}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"feature {code} contains non-finite values")
            clean[code] = arr
        self.values = clean

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(self.values)

    def flat(self) -> np.ndarray:
        """All values concatenated in ascending code order."""
        return np.concatenate([self.values[c] for c in self.values])

    def to_json_obj(self) -> dict:
        obj = {"label": self.label, "features": {}}
        for code, arr in self.values.items():
            obj["features"][FEATURE_BY_CODE[code].name] = arr.tolist()
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FeatureVector":
        by_name = {f.name: f.code for f in FEATURES}
        values = {by_name[name]: np.asarray(v) for name, v in obj["features"].items()}
        return cls(values=values, label=obj.get("label"))


def parse_feature_codes(text: str) -> tuple[int, ...]:
    """Parse '1,5' / 'all' into a tuple of valid Table-1 codes."""
    if text.strip().lower() == "all":
        return ALL_CODES
    codes = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            code = int(part)
        except ValueError:
            raise ValueError(f"feature code {part!r} is not an integer") from None
        if code not in FEATURE_BY_CODE:
            raise ValueError(f"feature code {code} outside 1..15")
        codes.append(code)
    if not codes:
        raise ValueError("empty feature selection")
    return tuple(dict.fromkeys(codes))


def scalar_column_names(codes) -> list[str]:
    """One column name per scalar dimension, e.g. rms, mfcc_03."""
    names = []
    for code in sorted(codes):
        feat = FEATURE_BY_CODE[code]
        if feat.dimension == 1:
            names.append(feat.name)
        else:
            prefix = _COLUMN_PREFIX[code]
            names.extend(f"{prefix}_{i:02d}" for i in range(1, feat.dimension + 1))
    return names


# ---------------------------------------------------------------------------
# time-domain features


def rms(clip: AudioClip) -> float:
    """Square root of the mean squared sample value."""
    if len(clip) == 0:
        raise ClipTooShort("rms of an empty clip")
    return float(np.sqrt(np.mean(clip.samples**2)))


def zcr(clip: AudioClip) -> float:
    """Rate of sign flips: mean |s(t) - s(t-1)| with s = 1 where sample > 0."""
    if len(clip) < 2:
        raise ClipTooShort("zcr needs at least two samples")
    s = (clip.samples > 0).astype(np.float64)
    return float(np.sum(np.abs(np.diff(s))) / len(clip))


def low_energy_rate(clip: AudioClip) -> float:
    """Fraction of 50 ms frames whose RMS is strictly below the frame mean."""
    frames = frame_signal(clip)
    frame_rms = np.sqrt(np.mean(frames.frames**2, axis=1))
    return float(np.mean(frame_rms < frame_rms.mean()))


# ---------------------------------------------------------------------------
# whole-clip spectral scalars


def _require_nonsilent(spec: Spectrum) -> float:
    total = spec.total_magnitude()
    if total <= 0:
        raise SilentClip("feature undefined on an all-zero spectrum")
    return total


def spectral_centroid(spec: Spectrum) -> float:
    """Magnitude-weighted mean frequency."""
    _require_nonsilent(spec)
    return float(np.dot(spec.bin_freq_hz, spec.weights))


def spectral_entropy(spec: Spectrum) -> float:
    """Shannon entropy (bits) of the spectral weight PMF."""
    w = spec.weights[spec.weights > 0]
    return float(-np.sum(w * np.log2(w)))


def spectral_irregularity(spec: Spectrum) -> float:
    """Squared amplitude jumps between successive peaks, normalized.

    The peak after the last is taken as zero; a spectrum with no peaks
    reports zero irregularity.
    """
    peaks = find_spectral_peaks(spec)
    if not peaks:
        return 0.0
    amps = np.array([a for _, a in peaks])
    diffs = np.diff(amps, append=0.0)
    return float(np.sum(diffs**2) / np.sum(amps**2))


def _central_moments(spec: Spectrum):
    mu = spectral_centroid(spec)
    dev = spec.bin_freq_hz - mu
    var = float(np.dot(dev**2, spec.weights))
    return mu, dev, var


def spectral_spread(spec: Spectrum) -> float:
    """Standard deviation of the spectral distribution around its centroid."""
    _, _, var = _central_moments(spec)
    return math.sqrt(var)


def spectral_skewness(spec: Spectrum) -> float:
    """Third standardized moment; 0 for a degenerate (single-bin) spectrum."""
    _, dev, var = _central_moments(spec)
    if var <= 0:
        return 0.0
    third = float(np.dot(dev**3, spec.weights))
    return third / var**1.5


def spectral_kurtosis(spec: Spectrum) -> float:
    """Fourth standardized moment; 0 for a degenerate spectrum."""
    _, dev, var = _central_moments(spec)
    if var <= 0:
        return 0.0
    fourth = float(np.dot(dev**4, spec.weights))
    return fourth / var**2


def spectral_rolloff(spec: Spectrum, fraction: float = ROLLOFF_FRACTION) -> float:
    """Lowest frequency below which the given fraction of magnitude lies."""
    total = _require_nonsilent(spec)
    cum = np.cumsum(spec.magnitude)
    idx = int(np.searchsorted(cum, fraction * total))
    idx = min(idx, spec.n_bins - 1)
    return float(spec.bin_freq_hz[idx])


def spectral_brightness(
    spec: Spectrum, cutoff_hz: float = BRIGHTNESS_CUTOFF_HZ
) -> float:
    """Fraction of total magnitude at or above the cutoff frequency."""
    total = _require_nonsilent(spec)
    high = spec.magnitude[spec.bin_freq_hz >= cutoff_hz].sum()
    return float(high / total)


def spectral_flatness(spec: Spectrum) -> float:
    """Geometric over arithmetic mean of the magnitudes.

    Zero bins are floored at 1e-12 inside the geometric mean only; an
    all-zero spectrum counts as perfectly flat.
    """
    m = spec.magnitude
    mean = m.mean()
    if mean <= 0:
        return 1.0
    geo = math.exp(float(np.mean(np.log(np.maximum(m, GEOMEAN_FLOOR)))))
    return geo / float(mean)


# ---------------------------------------------------------------------------
# frame-aggregated vector features


def _frame_power(clip: AudioClip):
    frames = frame_signal(clip)
    power = np.abs(np.fft.rfft(frames.frames, axis=1)) ** 2
    n_bins = power.shape[1]
    freqs = np.arange(n_bins) * (clip.sample_rate_hz / frames.frame_length_samples)
    return power, freqs


def _cepstrum_from_energies(energies: np.ndarray, n_out: int = MFCC_N_COEFFS):
    """log (floored) then orthonormal DCT-II, keeping the first n_out."""
    logged = np.log(np.maximum(energies, MEL_LOG_FLOOR))
    return dct_ii(logged, n_out)


def mfcc(clip: AudioClip) -> np.ndarray:
    """13 mel-frequency cepstral coefficients, averaged over frames.

    Per frame: Hann window, DFT power, 26 unit-area mel filters spanning
    0 Hz to Nyquist, floored log, orthonormal DCT-II, first 13 coefficients.
    """
    power, freqs = _frame_power(clip)
    mel = mel_filter_matrix(freqs, MFCC_N_FILTERS, 0.0, clip.sample_rate_hz / 2)
    energies = power @ mel.T
    coeffs = _cepstrum_from_energies(energies)
    return coeffs.mean(axis=0)


def chromagram(clip: AudioClip) -> np.ndarray:
    """Power folded onto the 12 pitch classes (index 0 = A), L1-normalized.

    Bins below 20 Hz are excluded. A silent clip yields the uniform 1/12
    vector.
    """
    power, freqs = _frame_power(clip)
    audible = freqs >= CHROMA_MIN_HZ
    classes = (
        np.rint(12.0 * np.log2(freqs[audible] / CHROMA_REF_HZ)).astype(int) % 12
    )
    fold = np.zeros((12, int(audible.sum())))
    fold[classes, np.arange(classes.size)] = 1.0
    per_frame = power[:, audible] @ fold.T
    chroma = per_frame.mean(axis=0)
    total = chroma.sum()
    if total <= 0:
        return np.full(12, 1.0 / 12.0)
    return chroma / total


def tonal_centroid_matrix() -> np.ndarray:
    """6x12 projection onto the fifths / major-third / minor-third circles."""
    phi = np.zeros((6, 12))
    circles = ((7 * np.pi / 6, 1.0), (3 * np.pi / 2, 1.0), (2 * np.pi / 3, 0.5))
    pitch = np.arange(12)
    for row, (theta, radius) in enumerate(circles):
        phi[2 * row] = radius * np.sin(pitch * theta)
        phi[2 * row + 1] = radius * np.cos(pitch * theta)
    return phi


def tonal_centroid(clip: AudioClip) -> np.ndarray:
    """Chromagram projected onto the 6-d harmonic-circle coordinates."""
    chroma = chromagram(clip)
    return tonal_centroid_matrix() @ chroma / np.sum(np.abs(chroma))


# ---------------------------------------------------------------------------
# combined extraction

_CLIP_FEATURES = {
    1: rms,
    2: zcr,
    3: low_energy_rate,
    13: mfcc,
    14: chromagram,
    15: tonal_centroid,
}

_SPECTRUM_FEATURES = {
    4: spectral_centroid,
    5: spectral_entropy,
    6: spectral_irregularity,
    7: spectral_spread,
    8: spectral_skewness,
    9: spectral_kurtosis,
    10: spectral_rolloff,
    11: spectral_brightness,
    12: spectral_flatness,
}


def extract(clip: AudioClip, selected) -> FeatureVector:
    """Compute the selected features (Table-1 codes) for one clip."""
    codes = sorted(set(int(c) for c in selected))
    if not codes:
        raise ValueError("no features selected")
    bad = [c for c in codes if c not in FEATURE_BY_CODE]
    if bad:
        raise ValueError(f"unknown feature codes {bad}")
    if len(clip) == 0:
        raise ClipTooShort("cannot extract features from an empty clip")

    spec = None
    values: dict[int, np.ndarray] = {}
    for code in codes:
        if code in _SPECTRUM_FEATURES:
            if spec is None:
                spec = magnitude_spectrum(clip.samples, clip.sample_rate_hz)
            values[code] = np.atleast_1d(_SPECTRUM_FEATURES[code](spec))
        else:
            values[code] = np.atleast_1d(_CLIP_FEATURES[code](clip))
    return FeatureVector(values=values, label=clip.source_label)


def extract_many(clips, selected) -> list[FeatureVector]:
    return [extract(clip, selected) for clip in clips]


def to_matrix(vectors) -> tuple[np.ndarray, list[str]]:
    """Stack FeatureVectors into an (n, d) matrix plus their labels."""
    rows = [fv.flat() for fv in vectors]
    labels = [fv.label for fv in vectors]
    return np.vstack(rows), labels


def write_features_csv(vectors, path) -> None:
    """CSV with a header naming each scalar column; floats via repr."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("nothing to write")
    codes = vectors[0].codes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + scalar_column_names(codes))
        for fv in vectors:
            if fv.codes != codes:
                raise ValueError("inconsistent feature sets across rows")
            writer.writerow([fv.label or ""] + [repr(x) for x in fv.flat()])


def read_features_csv(path, codes) -> list[FeatureVector]:
    codes = sorted(codes)
    dims = [FEATURE_BY_CODE[c].dimension for c in codes]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["label"] + scalar_column_names(codes):
            raise ValueError("CSV header does not match the requested features")
        out = []
        for row in reader:
            label = row[0] or None
            flat = np.array([float(x) for x in row[1:]])
            values = {}
            offset = 0
            for code, dim in zip(codes, dims):
                values[code] = flat[offset : offset + dim]
                offset += dim
            out.append(FeatureVector(values=values, label=label))
    return out


def write_features_json(vectors, path) -> None:
    with open(path, "w") as fh:
        json.dump([fv.to_json_obj() for fv in vectors], fh, indent=2, sort_keys=True)
