# scratch calibration harness, not part of the package
import time

import numpy as np

from audiofp import metrics, simulate
from audiofp.audio_io import resample
from audiofp.simulate import ProfileScale


def crit_456(scale, source_seed=21, corpus_seed=97, eval_seed=55, duration=1.0):
    src = simulate.synth_ringtone(duration, 44100, seed=source_seed)
    corpus = simulate.generate_corpus(
        [src], n_devices=15, repetitions=10, profile_scale=scale, master_seed=corpus_seed
    )
    out = {}
    for train in (1, 3, 5):
        rep = metrics.run_experiment(
            corpus, [13, 14], "gmm", seed=eval_seed, train_per_class=train
        )
        out[train] = rep.avg_f1
    return out, corpus


def crit_7(corpus, eval_seed=55):
    f1 = {}
    for rate in (8000, 44100):
        resampled = [resample(c, rate) for c in corpus] if rate != 44100 else corpus
        rep = metrics.run_experiment(
            resampled, [13, 14], "gmm", seed=eval_seed, train_per_class=5
        )
        f1[rate] = rep.avg_f1
    return f1


def crit_8(corpus, eval_seed=55, amb_seed=5):
    amb = simulate.synth_ambience(2.5, 44100, seed=amb_seed)
    f1 = {}
    for snr in (20, 10, 0):
        rng = np.random.default_rng(1000 + snr)
        noisy = []
        for clip in corpus:
            offset = rng.integers(0, len(amb.samples) - len(clip.samples))
            seg = simulate.AudioClip(
                amb.samples[offset : offset + len(clip.samples)], 44100
            )
            noisy.append(simulate.mix_noise(clip, simulate.NoiseScene(seg, snr)))
        rep = metrics.run_experiment(
            noisy, [13, 14], "gmm", seed=eval_seed, train_per_class=5
        )
        f1[snr] = rep.avg_f1
    return f1


if __name__ == "__main__":
    scales = {
        "base(dev1.0,floor-46..-40)": ProfileScale((-0.5, 0.5), 1.0, (0.0, 0.01), (-46.0, -40.0)),
        "hot(dev0.8,floor-40..-34)": ProfileScale((-0.5, 0.5), 0.8, (0.0, 0.01), (-40.0, -34.0)),
        "hotter(dev0.6,floor-36..-30)": ProfileScale((-0.5, 0.5), 0.6, (0.0, 0.01), (-36.0, -30.0)),
    }
    for name, scale in scales.items():
        t0 = time.time()
        trend, corpus = crit_456(scale)
        print(
            f"{name}: f1(1)={trend[1]:.3f} f1(3)={trend[3]:.3f} f1(5)={trend[5]:.3f}"
            f"  gap={trend[5]-trend[1]:.3f}  [{time.time()-t0:.0f}s]"
        )
        if trend[5] >= 0.88:
            t0 = time.time()
            rates = crit_7(corpus)
            print(f"    rate: 8k={rates[8000]:.3f} 44.1k={rates[44100]:.3f}  [{time.time()-t0:.0f}s]")
            t0 = time.time()
            snrs = crit_8(corpus)
            print(f"    snr: 20={snrs[20]:.3f} 10={snrs[10]:.3f} 0={snrs[0]:.3f}  [{time.time()-t0:.0f}s]")
