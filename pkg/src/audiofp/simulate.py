"""Virtual-device corpus generation.

A DeviceProfile imprints one unit's imperfections on a source clip: broadband
gain, a smooth frequency-response deviation, a weak cubic nonlinearity and an
additive noise floor. Rendering the same source through n_devices profiles,
several repetitions each, yields a labeled corpus shaped like a rack of
physical handsets re-recording the same excerpt.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .audio_io import AudioClip, load_wav, write_wav
from .errors import SilentNoise

RESPONSE_MIN_HZ = 100.0
RESPONSE_MAX_HZ = 16000.0
N_CONTROL_POINTS = 12
DEFAULT_NOISE_FLOOR_DB = -60.0


@dataclass(frozen=True)
class DeviceProfile:
    """One virtual unit's speaker/mic imperfection parameters."""

    device_id: str
    gain_db: float = 0.0
    response_deviation_db: tuple[float, ...] = (0.0,) * N_CONTROL_POINTS
    nonlinearity: float = 0.0  # cubic coefficient, 0 <= c <= 0.05
    noise_floor_db: float = DEFAULT_NOISE_FLOOR_DB
    seed: int = 0


@dataclass(frozen=True)
class ProfileScale:
    """Parameter ranges the corpus generator draws device profiles from."""

    gain_db_range: tuple[float, float]
    response_dev_db: float
    nonlinearity_range: tuple[float, float]
    noise_floor_db_range: tuple[float, float]


# Different-vendor units differ grossly in output level but have flat-ish
# responses; same-model units share the level and differ only in sub-dB
# response ripple. Noise floors are a per-unit trait in both regimes.
VENDOR_SCALE = ProfileScale(
    gain_db_range=(-6.0, 6.0),
    response_dev_db=0.5,
    nonlinearity_range=(0.0, 0.02),
    noise_floor_db_range=(-52.0, -46.0),
)
SAME_MODEL_SCALE = ProfileScale(
    gain_db_range=(-0.5, 0.5),
    response_dev_db=1.0,
    nonlinearity_range=(0.0, 0.01),
    noise_floor_db_range=(-46.0, -40.0),
)

_SCALES = {"vendor": VENDOR_SCALE, "same_model": SAME_MODEL_SCALE}


def control_frequencies(n_points: int = N_CONTROL_POINTS) -> np.ndarray:
    return np.geomspace(RESPONSE_MIN_HZ, RESPONSE_MAX_HZ, n_points)


def _response_gain(profile: DeviceProfile, freqs_hz: np.ndarray) -> np.ndarray:
    """Linear gain at arbitrary frequencies from the dB control points.

    Piecewise-cubic (PCHIP, no overshoot) through the log-spaced control
    points; clamped to the edge values outside 100 Hz..16 kHz.
    """
    dev = np.asarray(profile.response_deviation_db, dtype=np.float64)
    points = control_frequencies(dev.size)
    interp = PchipInterpolator(np.log(points), dev, extrapolate=False)
    log_f = np.log(np.maximum(freqs_hz, 1e-6))
    db = interp(np.clip(log_f, np.log(points[0]), np.log(points[-1])))
    return 10.0 ** (db / 20.0)


def apply_profile(clip: AudioClip, profile: DeviceProfile) -> AudioClip:
    """Render a clip through one device: gain, response, cubic, noise floor.

    Deterministic for a given (profile, input) pair; the profile seed drives
    only the noise-floor realization.
    """
    x = clip.samples * 10.0 ** (profile.gain_db / 20.0)

    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / clip.sample_rate_hz)
    x = np.fft.irfft(spectrum * _response_gain(profile, freqs), n=x.size)

    c = profile.nonlinearity
    if c > 0:
        peak = np.max(np.abs(x))
        if peak > 0:
            x = (x + c * x**3) / (1.0 + c * peak**2)

    rng = np.random.default_rng(profile.seed)
    sigma = 10.0 ** (profile.noise_floor_db / 20.0)
    x = x + rng.normal(0.0, sigma, x.size)

    np.clip(x, -1.0, 1.0, out=x)
    return AudioClip(x, clip.sample_rate_hz, profile.device_id)


@dataclass(frozen=True)
class NoiseScene:
    """Background ambience mixed at a target signal-to-noise ratio."""

    noise_clip: AudioClip
    snr_db: float


def mix_noise(clip: AudioClip, scene: NoiseScene) -> AudioClip:
    """Add the scene's noise scaled to the requested SNR.

    Noise shorter than the signal is looped; the sum is peak-normalized only
    if it would clip.
    """
    noise = scene.noise_clip.samples
    if noise.size < len(clip):
        reps = int(np.ceil(len(clip) / noise.size))
        noise = np.tile(noise, reps)
    noise = noise[: len(clip)]

    p_signal = float(np.mean(clip.samples**2))
    p_noise = float(np.mean(noise**2))
    if p_noise <= 0:
        raise SilentNoise("noise clip has zero power")
    scale = np.sqrt(p_signal / (p_noise * 10.0 ** (scene.snr_db / 10.0)))
    mixed = clip.samples + scale * noise
    peak = np.max(np.abs(mixed))
    if peak > 1.0:
        mixed = mixed / peak
    return AudioClip(mixed, clip.sample_rate_hz, clip.source_label)


def draw_profiles(
    n_devices: int, scale: ProfileScale | str, master_seed: int
) -> list[DeviceProfile]:
    """Draw device profiles from a scale's parameter ranges, deterministically."""
    if isinstance(scale, str):
        try:
            scale = _SCALES[scale]
        except KeyError:
            raise ValueError(
                f"unknown profile scale {scale!r}, want vendor or same_model"
            ) from None
    if n_devices < 2:
        raise ValueError("need at least 2 devices to build a corpus")
    rng = np.random.default_rng(np.random.SeedSequence(master_seed))
    profiles = []
    for i in range(n_devices):
        profiles.append(
            DeviceProfile(
                device_id=f"device_{i:02d}",
                gain_db=float(rng.uniform(*scale.gain_db_range)),
                response_deviation_db=tuple(
                    rng.uniform(-scale.response_dev_db, scale.response_dev_db, N_CONTROL_POINTS)
                ),
                nonlinearity=float(rng.uniform(*scale.nonlinearity_range)),
                noise_floor_db=float(rng.uniform(*scale.noise_floor_db_range)),
                seed=0,  # per-repetition seeds are assigned at render time
            )
        )
    return profiles


def generate_corpus(
    sources,
    n_devices: int,
    repetitions: int = 10,
    profile_scale: ProfileScale | str = "same_model",
    master_seed: int = 0,
) -> list[AudioClip]:
    """Render every source through every device, ``repetitions`` times each.

    Each render gets a fresh noise-floor realization from a deterministic
    sub-seed schedule, so the corpus is bit-identical for a given master
    seed. Clip labels are the device ids.
    """
    sources = list(sources)
    root = np.random.SeedSequence(master_seed)
    profile_seed, render_root = root.spawn(2)
    profiles = draw_profiles(
        n_devices, profile_scale, int(profile_seed.generate_state(1)[0])
    )

    render_seeds = iter(
        int(s.generate_state(1)[0])
        for s in render_root.spawn(n_devices * len(sources) * repetitions)
    )
    corpus = []
    for profile in profiles:
        for source in sources:
            for _ in range(repetitions):
                corpus.append(
                    apply_profile(source, replace(profile, seed=next(render_seeds)))
                )
    return corpus


# ---------------------------------------------------------------------------
# synthetic material: lets experiments run without shipping audio files


def synth_ringtone(
    duration_s: float = 1.0, sample_rate_hz: int = 44100, seed: int = 0
) -> AudioClip:
    """Instrumental-like test source: a two-note harmonic stack with tremolo."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    x = np.zeros(n)
    for f0 in (523.25, 659.26):  # C5 + E5
        phase = rng.uniform(0, 2 * np.pi)
        for harmonic in range(1, 9):
            amp = 1.0 / harmonic**1.2
            x += amp * np.sin(2 * np.pi * f0 * harmonic * t + phase * harmonic)
    x *= 0.55 + 0.45 * np.sin(2 * np.pi * 5.0 * t)  # tremolo
    x += 0.01 * rng.standard_normal(n)  # breath of wideband texture
    x *= 0.30 / np.max(np.abs(x))
    return AudioClip(x, sample_rate_hz, "ringtone")


def synth_ambience(
    duration_s: float = 2.0, sample_rate_hz: int = 44100, seed: int = 1
) -> AudioClip:
    """Cafe-like babble stand-in: tilted noise with slow loudness swells."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate_hz))
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    tilt = 1.0 / np.sqrt(np.maximum(freqs, 50.0))  # pink-ish slope
    x = np.fft.irfft(spectrum * tilt, n=n)
    t = np.arange(n) / sample_rate_hz
    swell = 1.0 + 0.35 * np.sin(2 * np.pi * 0.7 * t + rng.uniform(0, 2 * np.pi))
    x *= swell
    x *= 0.25 / np.max(np.abs(x))
    return AudioClip(x, sample_rate_hz, "ambience")


def distance_attenuation(meters: float, ref_meters: float = 0.1) -> tuple[float, float]:
    """(gain_db, snr_delta_db) for moving the recorder away from the source.

    Free-field inverse-distance loss; ambient noise stays fixed, so SNR
    drops by the same amount.
    """
    if meters <= 0 or ref_meters <= 0:
        raise ValueError("distances must be positive")
    loss_db = -20.0 * np.log10(meters / ref_meters)
    return loss_db, loss_db


# ---------------------------------------------------------------------------
# corpus persistence


def write_corpus(corpus, out_dir, repetitions: int = 10):
    """Write WAVs under corpus/<device>/<source>_<rep>.wav plus manifest.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.csv"
    rows = []
    per_device_counter: dict[str, int] = {}
    for clip in corpus:
        device = clip.source_label or "unknown"
        index = per_device_counter.get(device, 0)
        per_device_counter[device] = index + 1
        source_idx, rep = divmod(index, repetitions)
        rel = Path(device) / f"source{source_idx:02d}_{rep:02d}.wav"
        (out_dir / device).mkdir(exist_ok=True)
        write_wav(clip, out_dir / rel)
        rows.append([str(rel), device, f"source{source_idx:02d}", rep])
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "device_id", "source", "rep"])
        writer.writerows(rows)
    return manifest_path


def load_corpus(manifest_path) -> list[AudioClip]:
    """Read a corpus back from its manifest; labels come from device_id."""
    manifest_path = Path(manifest_path)
    clips = []
    with open(manifest_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            clip = load_wav(manifest_path.parent / row["path"])
            clips.append(clip.with_label(row["device_id"]))
    return clips
