"""Exception types shared across the package."""


class AudioFpError(Exception):
    """Base class for all package errors."""


# audio I/O
class MalformedContainer(AudioFpError):
    """File is not a parseable RIFF/WAVE container."""


class UnsupportedEncoding(AudioFpError):
    """WAV data is not 16-bit PCM mono/stereo."""


class EmptyAudio(AudioFpError):
    """Audio holds zero frames."""


class RateTooLow(AudioFpError):
    """Requested sample rate below the supported minimum."""


class IoFailure(AudioFpError):
    """Underlying file read/write failed."""


# signal processing / features
class ClipTooShort(AudioFpError):
    """Clip shorter than the minimum the operation needs."""


class BadBand(AudioFpError):
    """Invalid frequency band (f_min >= f_max)."""


class SilentClip(AudioFpError):
    """Operation undefined on an all-zero spectrum."""


# classification
class EmptyTrainingSet(AudioFpError):
    """No training examples supplied."""


class KTooLarge(AudioFpError):
    """k exceeds the number of stored exemplars."""


class DimensionMismatch(AudioFpError):
    """Query dimensionality differs from the trained model's."""


class TooFewSamples(AudioFpError):
    """Not enough samples to fit the requested mixture size."""


# selection / evaluation
class EmptyFeatureSet(AudioFpError):
    """Feature selection needs at least one candidate feature."""


class InsufficientSamples(AudioFpError):
    """A class has too few clips for the requested train/test split."""


# simulation
class SilentNoise(AudioFpError):
    """Noise clip has zero power, SNR scaling undefined."""
