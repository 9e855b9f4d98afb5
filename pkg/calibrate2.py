# scratch: grid over dev_db x floor x duration watching f1(1) vs f1(5)
import time

from audiofp import metrics, simulate
from audiofp.simulate import ProfileScale


def score(scale, duration, train_sizes=(1, 5), source_seed=21, corpus_seed=97, eval_seed=55):
    src = simulate.synth_ringtone(duration, 44100, seed=source_seed)
    corpus = simulate.generate_corpus(
        [src], n_devices=15, repetitions=10, profile_scale=scale, master_seed=corpus_seed
    )
    out = {}
    for train in train_sizes:
        rep = metrics.run_experiment(
            corpus, [13, 14], "gmm", seed=eval_seed, train_per_class=train
        )
        out[train] = rep.avg_f1
    return out


if __name__ == "__main__":
    for duration in (0.5, 1.0):
        for dev in (0.2, 0.3, 0.45):
            for floor_c in (-36.0, -32.0, -29.0):
                scale = ProfileScale(
                    (-0.3, 0.3), dev, (0.0, 0.01), (floor_c - 0.5, floor_c + 0.5)
                )
                t0 = time.time()
                out = score(scale, duration)
                print(
                    f"dur={duration} dev={dev} floor={floor_c}: "
                    f"f1(1)={out[1]:.3f} f1(5)={out[5]:.3f} gap={out[5]-out[1]:.3f} [{time.time()-t0:.0f}s]",
                    flush=True,
                )
