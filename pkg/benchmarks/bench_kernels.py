#!/usr/bin/env python3
"""Benchmark the compiled LSTM kernels against the numpy fallback.

Times the fused cell forward/backward at training shapes, plus a full
2-layer stack pass, and reports the speedup. Run after `pip install -e .`:

    python3 benchmarks/bench_kernels.py [--batch 256] [--hidden 64] [--repeat 200]
"""

import argparse
import time

import numpy as np

from shotzone.nn import LstmStack, available_backends, load_kernels


def time_fn(fn, repeat: int) -> float:
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_cell(kernels, B: int, H: int, dtype, repeat: int):
    rng = np.random.default_rng(0)
    z = rng.normal(size=(B, 4 * H)).astype(dtype)
    c_prev = rng.normal(size=(B, H)).astype(dtype)
    h_prev = rng.normal(size=(B, H)).astype(dtype)
    active = np.ones((B, 1), dtype=dtype)
    a = np.empty((B, 4 * H), dtype=dtype)
    c = np.empty((B, H), dtype=dtype)
    h = np.empty((B, H), dtype=dtype)
    tanh_c = np.empty((B, H), dtype=dtype)
    dh = rng.normal(size=(B, H)).astype(dtype)
    dc = rng.normal(size=(B, H)).astype(dtype)
    dz = np.empty((B, 4 * H), dtype=dtype)
    dc_p = np.empty((B, H), dtype=dtype)
    dh_p = np.empty((B, H), dtype=dtype)

    fwd = time_fn(lambda: kernels.lstm_cell_forward(
        z, c_prev, h_prev, active, a, c, h, tanh_c), repeat)
    bwd = time_fn(lambda: kernels.lstm_cell_backward(
        dh, dc, a, c_prev, tanh_c, active, dz, dc_p, dh_p), repeat)
    return fwd, bwd


def bench_stack(kernels, B: int, H: int, dtype, repeat: int):
    rng = np.random.default_rng(0)
    stack = LstmStack(rng, 39, H, 2, dtype=dtype, kernels=kernels)
    x = rng.normal(size=(B, 6, 39)).astype(dtype)
    mask = np.zeros((B, 6), dtype=bool)
    dh = rng.normal(size=(B, H)).astype(dtype)

    def full_pass():
        stack.forward(x, mask)
        stack.backward(dh.astype(stack.layers[0].Wx.dtype))

    return time_fn(full_pass, max(repeat // 10, 5))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {backends}")
    print(f"batch={args.batch} hidden={args.hidden} repeat={args.repeat}\n")
    header = f"{'benchmark':<34}" + "".join(f"{name:>14}" for name in backends)
    print(header)
    print("-" * len(header))

    rows = []
    for dtype, label in ((np.float32, "fp32"), (np.float64, "fp64")):
        cells = {name: bench_cell(load_kernels(name)[0], args.batch, args.hidden,
                                  dtype, args.repeat)
                 for name in backends}
        rows.append((f"cell forward {label} (us)",
                     {n: cells[n][0] * 1e6 for n in backends}))
        rows.append((f"cell backward {label} (us)",
                     {n: cells[n][1] * 1e6 for n in backends}))
        stacks = {name: bench_stack(load_kernels(name)[0], args.batch, args.hidden,
                                    dtype, args.repeat)
                  for name in backends}
        rows.append((f"2-layer stack fwd+bwd {label} (ms)",
                     {n: stacks[n] * 1e3 for n in backends}))

    for label, values in rows:
        line = f"{label:<34}" + "".join(f"{values[n]:>14.2f}" for n in backends)
        if len(backends) == 2 and values[backends[1]] > 0:
            line += f"   x{values[backends[1]] / values[backends[0]]:.2f}"
        print(line)

    if len(backends) == 2:
        print("\n(speedup = python time / compiled time on the trailing column)")


if __name__ == "__main__":
    main()
