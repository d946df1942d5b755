"""Timing comparison of the compiled and reference corruption kernels.

Runs every corruption kind at a chosen severity over a synthetic corpus
with each importable backend, checks the outputs are bit-identical, and
prints per-kind timings with the speedup of compiled over reference.

    python3 benchmarks/bench_corruptions.py --width 128 --height 96 --repeat 5
"""

import argparse
import time

import numpy as np

from perturbench import Image, available_backends, params_for
from perturbench.corrupt import ops
from perturbench.corrupt.params import NOISE_KINDS


def build_corpus(n, width, height):
    rng = np.random.default_rng(1914)
    images = []
    for _ in range(n):
        base = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        images.append(Image.from_array(base))
    return images


def run_backend(module, corpus, level, repeat):
    saved = ops.kernels
    ops.kernels = module
    try:
        timings = {}
        outputs = {}
        for kind in NOISE_KINDS:
            params = params_for(kind, level)
            best = float("inf")
            for _ in range(repeat):
                start = time.perf_counter()
                outs = [ops.corrupt(img, params, seed=7) for img in corpus]
                best = min(best, time.perf_counter() - start)
            timings[kind] = best
            outputs[kind] = [o.data for o in outs]
        return timings, outputs
    finally:
        ops.kernels = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--images", type=int, default=8)
    parser.add_argument("--width", type=int, default=128)
    parser.add_argument("--height", type=int, default=96)
    parser.add_argument("--level", type=int, default=3, choices=range(1, 6))
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = available_backends()
    corpus = build_corpus(args.images, args.width, args.height)
    print(
        f"backends: {', '.join(sorted(backends))} | corpus: {args.images} x "
        f"{args.width}x{args.height} | severity level {args.level}"
    )

    results = {}
    outputs = {}
    for name in sorted(backends):
        results[name], outputs[name] = run_backend(
            backends[name], corpus, args.level, args.repeat
        )

    if len(outputs) == 2:
        for kind in NOISE_KINDS:
            ref, comp = outputs["reference"][kind], outputs["compiled"][kind]
            if ref != comp:
                raise AssertionError(f"{kind}: backends disagree bit for bit")
        print("parity: compiled and reference outputs bit-identical")

    header = f"{'kind':<14}" + "".join(f"{n:>12}" for n in sorted(backends))
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kind in NOISE_KINDS:
        row = f"{kind:<14}"
        for name in sorted(backends):
            row += f"{results[name][kind] * 1e3:>10.1f}ms"
        if len(backends) == 2:
            ratio = results["reference"][kind] / results["compiled"][kind]
            row += f"{ratio:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
