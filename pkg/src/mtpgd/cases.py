"""Reference geometries and cyclic displacement waveforms.

Two specimens are provided: a dog-bone tensile specimen and a square plate
with a vertical edge crack from the top. Both are centred on the origin and
loaded by imposing ``-u_D(t)`` on the left and ``+u_D(t)`` on the right end,
with the transverse displacement clamped there.
"""
import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InconsistentSpecError, InvalidSpecError
from .fem import DirichletSet, Mesh


class Geometry(str, enum.Enum):
    DOGBONE = "dogbone"
    CRACKED_PLATE = "plate"


@dataclass(frozen=True)
class DogboneShape:
    """Outline in mm; tapers are straight lines."""

    gauge_length: float = 40.0
    gauge_width: float = 10.0
    taper_length: float = 10.0
    grip_length: float = 20.0
    grip_width: float = 20.0

    @property
    def length(self):
        return self.gauge_length + 2.0 * (self.taper_length + self.grip_length)


@dataclass(frozen=True)
class PlateShape:
    width: float = 50.0
    height: float = 50.0


@dataclass(frozen=True)
class CaseSpec:
    """Parameters of one loading case.

    ``cycle_duration`` defaults to ``4 * amplitude / load_rate``. For the
    dog-bone an explicit value must agree with that formula.
    """

    geometry: Geometry
    n_elements: int
    n_cycles: int
    n_times: int
    amplitude: float = 0.125
    load_rate: float = 0.025
    ramp_slope: float = 0.0
    cycle_duration: float = None
    crack_fraction: float = 0.5
    dogbone: DogboneShape = DogboneShape()
    plate: PlateShape = PlateShape()

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        if self.n_cycles < 1:
            raise InvalidSpecError("at least one loading cycle is required")
        if self.n_times < 1 or self.n_times % self.n_cycles:
            raise InvalidSpecError(
                f"n_times={self.n_times} is not a positive multiple of n_cycles={self.n_cycles}")
        if not self.amplitude > 0:
            raise InvalidSpecError("amplitude must be positive")
        if not self.load_rate > 0:
            raise InvalidSpecError("load rate must be positive")
        natural = 4.0 * self.amplitude / self.load_rate
        if self.cycle_duration is None:
            object.__setattr__(self, "cycle_duration", natural)
        elif not self.cycle_duration > 0:
            raise InvalidSpecError("cycle duration must be positive")
        elif self.geometry is Geometry.DOGBONE and not np.isclose(
                self.cycle_duration, natural, rtol=1e-12, atol=0.0):
            raise InconsistentSpecError(
                f"cycle duration {self.cycle_duration} s differs from 4*a/v = {natural} s")

    @property
    def final_time(self):
        return self.n_cycles * self.cycle_duration

    @property
    def steps_per_cycle(self):
        return self.n_times // self.n_cycles


def dogbone_case(n_elements=500, n_cycles=10, n_times=800, **kw):
    """Dog-bone case; defaults reproduce the full-size run."""
    return CaseSpec(Geometry.DOGBONE, n_elements, n_cycles, n_times, **kw)


def plate_case(n_elements=400, n_cycles=40, n_times=3200, amplitude=0.125,
               cycle_duration=30.0, ramp_slope=None, **kw):
    """Cracked-plate case; defaults reproduce the full-size run.

    Without an explicit ``ramp_slope`` the drift is chosen so the mean
    offset reaches ``amplitude`` at the final time.
    """
    if ramp_slope is None:
        ramp_slope = amplitude / (n_cycles * cycle_duration)
    return CaseSpec(Geometry.CRACKED_PLATE, n_elements, n_cycles, n_times,
                    amplitude=amplitude, load_rate=4.0 * amplitude / cycle_duration,
                    ramp_slope=ramp_slope, cycle_duration=cycle_duration, **kw)


DESK_DOGBONE = dogbone_case(n_elements=50, n_cycles=10, n_times=200)
DESK_PLATE = plate_case(n_elements=64, n_cycles=10, n_times=200)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

def _grid_connectivity(nx, ny):
    """Counter-clockwise quads of an (nx+1) x (ny+1) grid, x index fastest."""
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    n0 = (j * (nx + 1) + i).ravel()
    return np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])


def _end_columns(nx, ny):
    left = np.arange(ny + 1) * (nx + 1)
    return left, left + nx


def _loaded_sets(left, right):
    return [
        DirichletSet("left", left, (True, True), (-1.0, 0.0)),
        DirichletSet("right", right, (True, True), (1.0, 0.0)),
    ]


def build_rectangle(nx, ny, width=1.0, height=1.0, origin=(0.0, 0.0), dirichlet=None):
    """Structured rectangle, ``nx`` by ``ny`` elements.

    Without explicit ``dirichlet`` sets both end columns are loaded like the
    specimens.
    """
    if nx < 1 or ny < 1:
        raise InvalidSpecError("a rectangle needs at least one element per direction")
    x = origin[0] + np.linspace(0.0, width, nx + 1)
    y = origin[1] + np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    if dirichlet is None:
        dirichlet = _loaded_sets(*_end_columns(nx, ny))
    return Mesh(nodes, _grid_connectivity(nx, ny), dirichlet, name="rectangle")


def dogbone_grid(n_elements):
    """Split an element count into (columns, rows) with aspect near 5:1."""
    pairs = [(n_elements // ny, ny) for ny in range(1, n_elements + 1) if n_elements % ny == 0]
    return min(pairs, key=lambda p: (abs(p[0] / p[1] - 5.0), -p[1]))


def _allocate_columns(nx, lengths):
    """Distribute nx columns over segments proportionally (largest remainder)."""
    lengths = np.asarray(lengths, dtype=float)
    share = nx * lengths / lengths.sum()
    cols = np.floor(share).astype(int)
    order = np.argsort(-(share - cols), kind="stable")
    cols[order[: nx - cols.sum()]] += 1
    return cols


def build_dogbone(spec):
    """Mapped structured grid of the dog-bone outline.

    The element count is split into columns along the specimen and rows
    across it (see :func:`dogbone_grid`); columns are allotted to the grip,
    taper, gauge, taper, grip segments in proportion to their length, so the
    taper kinks fall on node columns.
    """
    if Geometry(spec.geometry) is not Geometry.DOGBONE:
        raise InvalidSpecError("spec is not a dog-bone case")
    shape = spec.dogbone
    nx, ny = dogbone_grid(spec.n_elements)
    seg = [shape.grip_length, shape.taper_length, shape.gauge_length,
           shape.taper_length, shape.grip_length]
    cols = _allocate_columns(nx, seg)
    if ny < 4 or np.any(cols < 1):
        raise InvalidSpecError(
            f"{spec.n_elements} elements give a {nx}x{ny} grid, too coarse for the outline")
    edges = np.concatenate([[0.0], np.cumsum(seg)]) - shape.length / 2.0
    xs = [np.linspace(edges[k], edges[k + 1], cols[k] + 1)[:-1] for k in range(5)]
    x = np.concatenate(xs + [[edges[-1]]])
    half = np.interp(np.abs(x), [0.0, shape.gauge_length / 2.0,
                                 shape.gauge_length / 2.0 + shape.taper_length, shape.length],
                     [shape.gauge_width / 2.0, shape.gauge_width / 2.0,
                      shape.grip_width / 2.0, shape.grip_width / 2.0])
    eta = np.linspace(-1.0, 1.0, ny + 1)
    X = np.broadcast_to(x[None, :], (ny + 1, nx + 1))
    Y = eta[:, None] * half[None, :]
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    mesh = Mesh(nodes, _grid_connectivity(nx, ny), _loaded_sets(*_end_columns(nx, ny)),
                name="dogbone")
    return mesh


def plate_grid(n_elements):
    """Most nearly square (columns, rows) split of an element count."""
    ny = int(np.floor(np.sqrt(n_elements)))
    while n_elements % ny:
        ny -= 1
    return n_elements // ny, ny


def build_cracked_plate(spec):
    """Structured plate with a vertical crack from the top edge.

    The crack runs down the middle node column over
    ``round(crack_fraction * rows)`` elements. Every node on the crack except
    the tip is duplicated and the copy is used by the elements on the right,
    so the two faces are disconnected.
    """
    if Geometry(spec.geometry) is not Geometry.CRACKED_PLATE:
        raise InvalidSpecError("spec is not a cracked-plate case")
    if not 0.0 <= spec.crack_fraction <= 1.0:
        raise InvalidSpecError(f"crack fraction {spec.crack_fraction} outside [0, 1]")
    nx, ny = plate_grid(spec.n_elements)
    if nx < 4 or ny < 4:
        raise InvalidSpecError(f"{spec.n_elements} elements give a {nx}x{ny} grid, too coarse")
    shape = spec.plate
    base = build_rectangle(nx, ny, shape.width, shape.height,
                           origin=(-shape.width / 2.0, -shape.height / 2.0))
    n_crack = int(round(spec.crack_fraction * ny))
    nodes = base.nodes
    elements = base.elements.copy()
    if n_crack > 0:
        ic = nx // 2
        rows = np.arange(ny - n_crack + 1, ny + 1)       # node rows on the open crack
        originals = rows * (nx + 1) + ic
        copies = base.n_nodes + np.arange(rows.size)
        nodes = np.vstack([nodes, nodes[originals]])
        remap = dict(zip(originals.tolist(), copies.tolist()))
        e_rows = np.arange(ny - n_crack, ny)             # element rows along the crack
        right = (e_rows[:, None] * nx + ic).ravel()      # elements with left edge on crack
        for e in right:
            elements[e] = [remap.get(int(n), int(n)) for n in elements[e]]
    left, right_col = _end_columns(nx, ny)
    mesh = Mesh(nodes, elements, _loaded_sets(left, right_col), name="plate")
    return mesh


def build_mesh(spec):
    if Geometry(spec.geometry) is Geometry.DOGBONE:
        return build_dogbone(spec)
    return build_cracked_plate(spec)


# ---------------------------------------------------------------------------
# waveforms
# ---------------------------------------------------------------------------

@dataclass
class LoadWaveform:
    """Imposed end displacement (mm) sampled at ``times`` (s)."""

    times: np.ndarray
    values: np.ndarray
    final_time: float

    def __len__(self):
        return self.values.size

    @property
    def dt(self):
        return self.final_time / self.values.size


def triangle_wave(t, amplitude, period):
    """0 -> +a -> -a -> 0 over each period."""
    phase = np.mod(t / period, 1.0)
    return amplitude * np.where(
        phase < 0.25, 4.0 * phase,
        np.where(phase < 0.75, 2.0 - 4.0 * phase, 4.0 * phase - 4.0))


def make_waveform(spec):
    """Sample the loading at ``t_i = i * T_f / N_t``, ``i = 0 .. N_t - 1``.

    The last sample sits one step before ``T_f`` so that the samples tile
    into ``n_cycles`` identical blocks of ``N_t / n_cycles``.
    """
    T_f = spec.final_time
    n = spec.n_times
    i = np.arange(n)
    t = i * (T_f / n)
    # phase from integer arithmetic keeps cycle blocks bit-identical
    spc = spec.steps_per_cycle
    phase_t = (i % spc) * (spec.cycle_duration / spc)
    values = triangle_wave(phase_t, spec.amplitude, spec.cycle_duration)
    if spec.ramp_slope:
        values = values + spec.ramp_slope * t
    return LoadWaveform(times=t, values=values, final_time=T_f)


def with_overrides(spec, **kw):
    return replace(spec, **kw)
