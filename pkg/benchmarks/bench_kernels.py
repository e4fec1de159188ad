"""Compare the numba and numpy constitutive kernels.

    python3 benchmarks/bench_kernels.py [--gauss N] [--times N] [--repeat N]

Both implementations are called directly, so the ``MTPGD_DISABLE_NUMBA``
flag does not matter here. Results are checked to agree before timing.
"""
import argparse
import time

import numpy as np

from mtpgd import kernels
from mtpgd.fem import Material


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def strain_history(n_gauss, n_times, seed=0):
    """Cyclic strain paths with random directions, large enough to yield."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_times) / n_times * 10.0
    wave = 2.0 / np.pi * np.arcsin(np.sin(2.0 * np.pi * t))
    direction = rng.normal(size=(n_gauss, 4, 1))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return 3e-3 * direction * wave


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gauss", type=int, default=2000)
    p.add_argument("--times", type=int, default=800)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    if kernels.numba is None:
        raise SystemExit("numba is not installed")
    mat = Material.steel()
    consts = (mat.lam, mat.G, mat.H, mat.sigma_y0)
    eps = strain_history(args.gauss, args.times)

    a = kernels.sweep_numba(eps, *consts)
    b = kernels.sweep_numpy(eps, *consts)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-15), "backends disagree"

    pts = eps[:, :, args.times // 3].copy()
    zeros4, zeros = np.zeros_like(pts), np.zeros(args.gauss)
    kernels.return_map_numba(pts, zeros4, zeros, *consts)

    rows = [
        ("history sweep", lambda: kernels.sweep_numba(eps, *consts),
         lambda: kernels.sweep_numpy(eps, *consts)),
        ("single return map", lambda: kernels.return_map_numba(pts, zeros4, zeros, *consts),
         lambda: kernels.return_map_numpy(pts, zeros4, zeros, *consts)),
    ]
    print(f"{args.gauss} Gauss points x {args.times} time steps, best of {args.repeat}")
    print(f"{'kernel':<20}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}")
    for name, nb_fn, np_fn in rows:
        t_nb, t_np = best_of(nb_fn, args.repeat), best_of(np_fn, args.repeat)
        print(f"{name:<20}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
