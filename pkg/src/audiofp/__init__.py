"""Device fingerprinting from speaker/microphone spectral imperfections."""

from .audio_io import AudioClip, load_wav, resample, write_wav
from .features import FeatureVector, extract, parse_feature_codes
from .metrics import EvaluationReport, run_experiment, split
from .select import SelectionResult, sfs
from .simulate import DeviceProfile, NoiseScene, apply_profile, generate_corpus, mix_noise

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "DeviceProfile",
    "EvaluationReport",
    "FeatureVector",
    "NoiseScene",
    "SelectionResult",
    "apply_profile",
    "extract",
    "generate_corpus",
    "load_wav",
    "mix_noise",
    "parse_feature_codes",
    "resample",
    "run_experiment",
    "sfs",
    "split",
    "write_wav",
]
