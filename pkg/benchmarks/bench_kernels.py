"""Time the LSTM recurrence kernels (Cython vs numpy) and one training step.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from tashkeel.nn import ModelConfig, SequenceModel, kernels, pad_batch


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_case(T, B, H, dtype=np.float32, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(T, B, 4 * H)).astype(dtype)
    Wh = (0.1 * rng.normal(size=(H, 4 * H))).astype(dtype)
    dH = rng.normal(size=(T, B, H)).astype(dtype)
    return x, Wh, dH


def bench_kernels(repeat):
    rows = []
    for T, B, H in ((60, 256, 100), (300, 32, 100), (40, 256, 100)):
        x, Wh, dH = kernel_case(T, B, H)
        for name, mod in sorted(kernels.BACKENDS.items()):
            Hs, C, G = mod.lstm_forward(x, Wh)
            fwd = best_of(lambda: mod.lstm_forward(x, Wh), repeat)
            bwd = best_of(lambda: mod.lstm_backward(dH, Wh, G, C, Hs), repeat)
            rows.append((f"T={T} B={B} H={H}", name, fwd, bwd))
    return rows


def bench_step(repeat):
    cfg = ModelConfig.cw((40, 6, 257, 3))
    model = SequenceModel.init(cfg, seed=0)
    rng = np.random.default_rng(1)
    seqs = []
    for _ in range(64):
        n = int(rng.integers(20, 80))
        ids = np.stack([rng.integers(1, v, n) for v in cfg.vocab_sizes], axis=1).astype(np.int32)
        seqs.append((ids, rng.integers(0, cfg.label_count, n).astype(np.int32)))
    ids, lengths, labels = pad_batch(seqs)
    rows = []
    before = kernels.BACKEND
    try:
        for name in sorted(kernels.BACKENDS):
            kernels.use_backend(name)
            rows.append((name, best_of(lambda: model.loss_and_gradients(ids, lengths, labels), repeat)))
    finally:
        kernels.use_backend(before)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"backends: {', '.join(sorted(kernels.BACKENDS))} (default {kernels.BACKEND})")
    print(f"{'shape':<22}{'backend':<9}{'forward ms':>12}{'backward ms':>13}")
    for shape, name, f, b in bench_kernels(args.repeat):
        print(f"{shape:<22}{name:<9}{1e3 * f:>12.2f}{1e3 * b:>13.2f}")
    print()
    print("CW loss+gradients, 64 sentences of 20-80 chars, default sizes")
    step = bench_step(args.repeat)
    base = dict(step).get("numpy")
    for name, t in step:
        print(f"  {name:<8}{1e3 * t:9.1f} ms" + (f"  ({base / t:.2f}x numpy)" if base else ""))


if __name__ == "__main__":
    main()
