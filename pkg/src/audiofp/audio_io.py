"""WAV decode/encode, downmix and band-limited resampling.

The only module that touches the filesystem. Everything downstream works on
:class:`AudioClip` values, which hold float samples in [-1, 1].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyAudio,
    IoFailure,
    MalformedContainer,
    RateTooLow,
    UnsupportedEncoding,
)

MIN_SAMPLE_RATE_HZ = 4000

# int16 full scale; symmetric convention so -32768 maps exactly to -1.0
_PCM_SCALE = 32768.0

# windowed-sinc resampler kernel half-width (64 taps total)
_KERNEL_HALF = 32


@dataclass(frozen=True)
class AudioClip:
    """Time-domain audio: float64 samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: int
    source_label: str | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.sample_rate_hz < MIN_SAMPLE_RATE_HZ:
            raise RateTooLow(
                f"sample rate {self.sample_rate_hz} Hz below minimum {MIN_SAMPLE_RATE_HZ}"
            )
        if samples.size and np.max(np.abs(samples)) > 1.0 + 1e-9:
            raise ValueError("samples exceed [-1, 1] full scale")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_label(self, label: str) -> "AudioClip":
        return AudioClip(self.samples, self.sample_rate_hz, label)


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise MalformedContainer("truncated chunk data")
    return data


def load_wav(path) -> AudioClip:
    """Decode a 16-bit PCM RIFF/WAVE file into an AudioClip.

    Stereo is downmixed by the per-frame channel mean. Raises
    MalformedContainer / UnsupportedEncoding / EmptyAudio on bad input.
    """
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IoFailure(f"cannot open {path}: {exc}") from exc
    with fh:
        header = fh.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

        fmt = None
        data = None
        while True:
            chunk_header = fh.read(8)
            if len(chunk_header) == 0:
                break
            if len(chunk_header) < 8:
                raise MalformedContainer("truncated chunk header")
            chunk_id, chunk_size = struct.unpack("<4sI", chunk_header)
            if chunk_id == b"fmt ":
                fmt = _read_exact(fh, chunk_size)
            elif chunk_id == b"data":
                data = _read_exact(fh, chunk_size)
            else:
                fh.seek(chunk_size, 1)
            if chunk_size % 2:  # chunks are word-aligned
                fh.seek(1, 1)
            if fmt is not None and data is not None:
                break

    if fmt is None or len(fmt) < 16:
        raise MalformedContainer(f"{path}: missing or short fmt chunk")
    if data is None:
        raise MalformedContainer(f"{path}: missing data chunk")

    format_code, n_channels, sample_rate, _, _, bits = struct.unpack(
        "<HHIIHH", fmt[:16]
    )
    if format_code != 1:
        raise UnsupportedEncoding(f"{path}: format code {format_code}, want PCM (1)")
    if bits != 16:
        raise UnsupportedEncoding(f"{path}: {bits}-bit samples, want 16")
    if n_channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {n_channels} channels, want 1 or 2")

    frame_bytes = 2 * n_channels
    n_frames = len(data) // frame_bytes
    if n_frames == 0:
        raise EmptyAudio(f"{path}: zero frames")

    raw = np.frombuffer(data[: n_frames * frame_bytes], dtype="<i2")
    samples = raw.astype(np.float64) / _PCM_SCALE
    if n_channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioClip(samples, int(sample_rate))


def write_wav(clip: AudioClip, path) -> None:
    """Write a clip as mono 16-bit PCM WAV.

    Quantizes by round-to-nearest, so a load/write round trip is exact to
    one least-significant bit (1/32768) per sample.
    """
    if len(clip) == 0:
        raise EmptyAudio("refusing to write a clip with no samples")
    if np.max(np.abs(clip.samples)) > 1.0 + 1e-9:
        raise ValueError("samples exceed [-1, 1]; normalize before writing")

    pcm = np.clip(np.rint(clip.samples * _PCM_SCALE), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,  # PCM
        1,  # mono
        clip.sample_rate_hz,
        clip.sample_rate_hz * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def resample(clip: AudioClip, target_rate_hz: int) -> AudioClip:
    """Band-limited resampling via a 64-tap windowed-sinc interpolator.

    Output length is round(n * target/source). The kernel is 64 taps wide at
    the lower of the two rates, i.e. the sinc and its Hann window stretch by
    the decimation factor when downsampling, which keeps the anti-alias
    cutoff at the lower Nyquist and a sub-Nyquist tone's RMS within 1%.
    """
    if target_rate_hz < MIN_SAMPLE_RATE_HZ:
        raise RateTooLow(f"target rate {target_rate_hz} < {MIN_SAMPLE_RATE_HZ} Hz")
    if target_rate_hz == clip.sample_rate_hz:
        return AudioClip(clip.samples.copy(), clip.sample_rate_hz, clip.source_label)

    source = clip.samples
    n_in = source.size
    n_out = int(round(n_in * target_rate_hz / clip.sample_rate_hz))
    if n_in == 0 or n_out == 0:
        return AudioClip(np.zeros(0), target_rate_hz, clip.source_label)

    ratio = clip.sample_rate_hz / target_rate_hz  # input samples per output sample
    cutoff = min(1.0, 1.0 / ratio)

    # position of each output sample on the input grid
    positions = np.arange(n_out) * ratio
    base = np.floor(positions).astype(np.int64)
    frac = positions - base

    # kernel support in input samples grows by 1/cutoff when downsampling
    half_span = int(np.ceil(_KERNEL_HALF / cutoff))
    padded = np.concatenate([np.zeros(half_span + 1), source, np.zeros(half_span + 2)])
    out = np.zeros(n_out)
    # accumulate one tap at a time; each pass is fully vectorized over outputs
    for tap in range(-half_span, half_span + 1):
        v = cutoff * (tap - frac)
        window = np.where(
            np.abs(v) < _KERNEL_HALF,
            0.5 * (1.0 + np.cos(np.pi * v / _KERNEL_HALF)),
            0.0,
        )
        out += padded[base + tap + half_span + 1] * cutoff * np.sinc(v) * window

    np.clip(out, -1.0, 1.0, out=out)
    return AudioClip(out, target_rate_hz, clip.source_label)
