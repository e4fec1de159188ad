"""CSV and legacy-VTK writers for run results.

Numbers are written with 17 significant digits so every file parses back
to the same doubles.
"""
import numpy as np

FMT = "%.17g"
PROBE_QUANTITIES = ("ux", "uy", "sxx", "exx", "epxx", "ebar")


def write_table(path, header, columns):
    """Write equal-length columns with a one-line header."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(header), comments="")


def read_table(path):
    """Inverse of :func:`write_table`: ``(header, array)``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def probe_series(solution, system, points, probe_fn):
    """Dict ``"p{i}_{q}" -> series`` for every probe point and quantity."""
    out = {}
    for i, pt in enumerate(points):
        for q in PROBE_QUANTITIES:
            out[f"p{i}_{q}"] = probe_fn(solution, system, pt, q)
    return out


def write_probes(path, waveform, series):
    header = ["t", "u_D"] + list(series)
    write_table(path, header, [waveform.times, waveform.values] + list(series.values()))


def write_modes(path, modes, prefix, normalize=False):
    """One column per mode; ``normalize`` divides each by its max-abs entry."""
    modes = np.asarray(modes, dtype=float)
    if normalize and modes.size:
        scale = np.abs(modes).max(axis=0)
        modes = modes / np.where(scale > 0, scale, 1.0)
    header = [f"{prefix}{k}" for k in range(modes.shape[1])]
    write_table(path, ["index"] + header, [np.arange(modes.shape[0])] + list(modes.T))


def write_submodes(path, mt_modes):
    """Long format: ``mode, submode, scale, index, value, residual``.

    ``scale`` is 0 for micro entries and 1 for macro entries; ``residual`` is
    the relative residual after that sub-mode.
    """
    rows = []
    for k, m in enumerate(mt_modes):
        for j in range(m.n_submodes):
            res = m.residual_trace[j]
            for scale, vec in ((0, m.micro_modes[:, j]), (1, m.macro_modes[:, j])):
                idx = np.arange(vec.size)
                rows.append(np.column_stack([np.full(vec.size, k), np.full(vec.size, j),
                                             np.full(vec.size, scale), idx, vec,
                                             np.full(vec.size, res)]))
    data = np.vstack(rows) if rows else np.zeros((0, 6))
    np.savetxt(path, data, fmt=FMT, delimiter=",",
               header="mode,submode,scale,index,value,residual", comments="")


def read_submodes(path):
    """Rebuild ``[(micro, macro, residual_trace), ...]`` from :func:`write_submodes`."""
    _, data = read_table(path)
    out = []
    if data.size == 0:
        return out
    for k in np.unique(data[:, 0]).astype(int):
        dk = data[data[:, 0] == k]
        subs = np.unique(dk[:, 1]).astype(int)
        micro = np.column_stack([dk[(dk[:, 1] == j) & (dk[:, 2] == 0), 4] for j in subs])
        macro = np.column_stack([dk[(dk[:, 1] == j) & (dk[:, 2] == 1), 4] for j in subs])
        trace = np.array([dk[dk[:, 1] == j, 5][0] for j in subs])
        out.append((micro, macro, trace))
    return out


def write_report(path, report):
    report.to_csv(path)


def write_comparison(path, waveform, fe_series, pgd_series):
    header = ["t"]
    cols = [waveform.times]
    for key in fe_series:
        header += [f"{key}_fe", f"{key}_pgd", f"{key}_delta"]
        cols += [fe_series[key], pgd_series[key], pgd_series[key] - fe_series[key]]
    write_table(path, header, cols)


def write_vtk(path, mesh, displacement, ebar, title="mtpgd"):
    """Legacy ASCII unstructured grid with nodal displacement and cell ``ebar``.

    ``displacement`` holds one snapshot over all dofs; ``ebar`` one value per
    Gauss point, averaged per element.
    """
    u = np.asarray(displacement, dtype=float).reshape(-1, 2)
    eb = np.asarray(ebar, dtype=float).reshape(mesh.n_elements, -1).mean(axis=1)
    n, ne = mesh.n_nodes, mesh.n_elements
    with open(path, "w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {n} double\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g} 0\n")
        fh.write(f"CELLS {ne} {5 * ne}\n")
        for e in mesh.elements:
            fh.write("4 " + " ".join(str(int(i)) for i in e) + "\n")
        fh.write(f"CELL_TYPES {ne}\n" + "9\n" * ne)
        fh.write(f"POINT_DATA {n}\nVECTORS displacement double\n")
        for ux, uy in u:
            fh.write(f"{ux:.17g} {uy:.17g} 0\n")
        fh.write("SCALARS displacement_magnitude double 1\nLOOKUP_TABLE default\n")
        for v in np.hypot(u[:, 0], u[:, 1]):
            fh.write(f"{v:.17g}\n")
        fh.write(f"CELL_DATA {ne}\nSCALARS ebar_p double 1\nLOOKUP_TABLE default\n")
        for v in eb:
            fh.write(f"{v:.17g}\n")
