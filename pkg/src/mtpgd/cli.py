"""Command-line interface.

``mtpgd run CONFIG`` solves one case and writes CSV results;
``mtpgd decompose CSV --ntau N --nT M --tol TOL`` splits a sampled signal
into micro/macro sub-modes. The output directory of ``run`` can be
overridden with the ``MTPGD_OUTPUT_DIR`` environment variable.

Exit status is 0 when every requested solver converged, 1 when one did
not, and 2 on bad input.
"""
import argparse
import logging
import os
import sys
import time
import warnings

import numpy as np

from . import results
from .cases import build_mesh, make_waveform
from .config import load_config
from .driver import run
from .errors import ConfigError, GridError, MtpgdError, StepFailureError
from .fem import assemble_stiffness
from .multitime import decompose, decompose_field, grid_from_sizes, make_grid, storage_count
from .pgd import evaluate_field
from .reference import Solution, probe, solve_incremental

log = logging.getLogger("mtpgd")


def _run_pgd(cfg, system, waveform, out):
    t0 = time.perf_counter()
    field, state, report = run(system, waveform, delta=cfg.delta, max_iters=cfg.max_iters,
                               eps_mode=cfg.eps_mode, rhs_tol=cfg.rhs_tol,
                               relaxation=cfg.relaxation, anderson_depth=cfg.anderson_depth)
    elapsed = time.perf_counter() - t0
    report.to_csv(os.path.join(out, "report.csv"))
    results.write_modes(os.path.join(out, "space_modes.csv"), field.space_modes, "w")
    results.write_modes(os.path.join(out, "time_modes.csv"), field.time_modes, "lambda")
    results.write_modes(os.path.join(out, "space_modes_normalized.csv"), field.space_modes,
                        "w", normalize=True)
    results.write_modes(os.path.join(out, "time_modes_normalized.csv"), field.time_modes,
                        "lambda", normalize=True)
    spec = cfg.case()
    grid = make_grid(spec.n_times, spec.n_cycles, cfg.macro_k, spec.cycle_duration)
    mt = decompose_field(field, grid, tol=cfg.mt_tol)
    results.write_submodes(os.path.join(out, "submodes.csv"), mt)
    sol = Solution(evaluate_field(field, system, waveform), state)
    print(f"pgd: {report.status} after {report.iterations} iterations, "
          f"e={report.errors_per_iter[-1] if report.errors_per_iter else 0.0:.3e}, "
          f"rank={field.rank}, sub-mode storage={storage_count(mt)} "
          f"(full {field.rank * spec.n_times}), {elapsed:.2f} s")
    return sol, report.converged


def _run_fe(cfg, system, waveform, out):
    t0 = time.perf_counter()
    try:
        sol = solve_incremental(system, waveform, tol_eq=cfg.tol_eq)
    except StepFailureError as exc:
        print(f"fe: failed: {exc}")
        return None, False
    results.write_table(os.path.join(out, "fe_iterations.csv"), ["t", "iterations", "residual"],
                        [waveform.times, sol.iterations, sol.residuals])
    print(f"fe: converged, {int(sol.iterations.sum())} iterations, "
          f"{time.perf_counter() - t0:.2f} s")
    return sol, True


def cmd_run(args):
    try:
        cfg = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = cfg.resolved_output_dir()
    os.makedirs(out, exist_ok=True)
    spec = cfg.case()
    try:
        mesh = build_mesh(spec)
        system = assemble_stiffness(mesh, cfg.material())
    except MtpgdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    waveform = make_waveform(spec)
    mesh.to_csv(os.path.join(out, "nodes.csv"), os.path.join(out, "elements.csv"))
    print(f"case: {spec.geometry.value}, {mesh.n_nodes} nodes, {mesh.n_elements} elements, "
          f"{spec.n_times} time nodes over {spec.final_time:g} s")

    solved = {}
    ok = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg.solver in ("pgd", "both"):
            sol, conv = _run_pgd(cfg, system, waveform, out)
            solved["pgd"] = sol
            ok &= conv
        if cfg.solver in ("fe", "both"):
            sol, conv = _run_fe(cfg, system, waveform, out)
            if sol is not None:
                solved["fe"] = sol
            ok &= conv
    kinds = {}
    for w in caught:
        kinds.setdefault(w.category.__name__, []).append(str(w.message))
    for name, msgs in kinds.items():
        log.warning("%s raised %d times; last: %s", name, len(msgs), msgs[-1])

    series = {}
    for name, sol in solved.items():
        try:
            series[name] = results.probe_series(sol, system, cfg.probe, probe)
        except MtpgdError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        results.write_probes(os.path.join(out, f"probes_{name}.csv"), waveform, series[name])
        if cfg.vtk:
            results.write_vtk(os.path.join(out, f"final_{name}.vtk"), mesh,
                              sol.displacement[:, -1], sol.state.ebar_p[:, -1])
    if len(series) == 2:
        results.write_comparison(os.path.join(out, "comparison.csv"), waveform,
                                 series["fe"], series["pgd"])
        a, b = solved["fe"].displacement, solved["pgd"].displacement
        print(f"relative field difference pgd vs fe: "
              f"{np.linalg.norm(b - a) / np.linalg.norm(a):.3e}")
    print(f"results written to {out}")
    return 0 if ok else 1


def _read_signal(path, column):
    with open(path) as fh:
        first = fh.readline().strip().split(",")
    try:
        [float(v) for v in first]
        header = None
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        header, data = results.read_table(path)
    if column is None:
        names = header or []
        skip = [i for i, n in enumerate(names) if n in ("index", "t")]
        candidates = [i for i in range(data.shape[1]) if i not in skip]
        col = candidates[0] if candidates else 0
    elif header is not None and column in header:
        col = header.index(column)
    else:
        col = int(column)
    return data[:, col]


def cmd_decompose(args):
    try:
        h = _read_signal(args.csv, args.column)
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if h.size != args.ntau * args.nT:
        print(f"error: signal has {h.size} samples, expected ntau*nT = {args.ntau * args.nT}",
              file=sys.stderr)
        return 2
    grid = grid_from_sizes(args.ntau, args.nT)
    try:
        modes = decompose(h, grid, tol=args.tol)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out or os.environ.get("MTPGD_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    results.write_submodes(os.path.join(out, "submodes.csv"), [modes])
    results.write_table(os.path.join(out, "residual_trace.csv"), ["submodes", "residual"],
                        [np.arange(1, modes.n_submodes + 1), modes.residual_trace])
    print(f"{modes.n_submodes} sub-modes, relative residual {modes.residual:.3e}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mtpgd", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="solve a case described by a config file")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    d = sub.add_parser("decompose", help="micro/macro decomposition of a sampled signal")
    d.add_argument("csv")
    d.add_argument("--ntau", type=int, required=True)
    d.add_argument("--nT", type=int, required=True)
    d.add_argument("--tol", type=float, default=1e-6)
    d.add_argument("--column", default=None, help="column name or index")
    d.add_argument("--out", default=None, help="output directory")
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
