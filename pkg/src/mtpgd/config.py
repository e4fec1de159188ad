"""Flat ``key = value`` run configuration.

Blank lines and text after ``#`` are ignored. Unknown keys, malformed lines
and out-of-range values raise :class:`~mtpgd.errors.ConfigError` carrying the
offending line number.

Example::

    geometry = dogbone
    n_elements = 50
    n_cycles = 10
    n_times = 200
    solver = both
    probe = 0 0; 10 0
"""
import os
from dataclasses import dataclass, field, fields

from .cases import CaseSpec, Geometry, dogbone_case, plate_case
from .errors import ConfigError, MtpgdError
from .fem import Material

OUTPUT_ENV = "MTPGD_OUTPUT_DIR"
SOLVERS = ("pgd", "fe", "both")


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _points(text):
    pts = []
    for chunk in text.split(";"):
        xy = chunk.replace(",", " ").split()
        if len(xy) != 2:
            raise ValueError(f"probe point needs two coordinates, got {chunk.strip()!r}")
        pts.append((float(xy[0]), float(xy[1])))
    return tuple(pts)


# key -> parser; None values in RunConfig mean "case default"
_PARSERS = {
    "geometry": lambda s: Geometry(s.lower()),
    "n_elements": int,
    "n_cycles": int,
    "n_times": int,
    "amplitude_mm": float,
    "load_rate_mm_s": float,
    "ramp_mm_s": float,
    "crack_fraction": float,
    "cycle_duration_s": float,
    "E_GPa": float,
    "nu": float,
    "sigma_y0_MPa": float,
    "H_GPa": float,
    "solver": str.lower,
    "delta": float,
    "eps_mode": float,
    "rhs_tol": float,
    "mt_tol": float,
    "macro_k": int,
    "tol_eq": float,
    "max_iters": int,
    "relaxation": float,
    "anderson_depth": int,
    "output_dir": str,
    "probe": _points,
    "vtk": _bool,
}

_TOLERANCES = ("delta", "eps_mode", "rhs_tol", "mt_tol", "tol_eq")


@dataclass
class RunConfig:
    geometry: Geometry = Geometry.DOGBONE
    n_elements: int = None
    n_cycles: int = None
    n_times: int = None
    amplitude_mm: float = 0.125
    load_rate_mm_s: float = None
    ramp_mm_s: float = None
    crack_fraction: float = None
    cycle_duration_s: float = None
    E_GPa: float = 210.0
    nu: float = 0.3
    sigma_y0_MPa: float = 205.0
    H_GPa: float = 2.0
    solver: str = "pgd"
    delta: float = 1e-4
    eps_mode: float = 1e-8
    rhs_tol: float = 1e-10
    mt_tol: float = 1e-6
    macro_k: int = 1
    tol_eq: float = 1e-8
    max_iters: int = 50
    relaxation: float = 1.0
    anderson_depth: int = 5
    output_dir: str = "results"
    probe: tuple = ((0.0, 0.0),)
    vtk: bool = False
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    def validate(self):
        def fail(key, msg):
            raise ConfigError(f"{key}: {msg}", self.lines.get(key))

        if self.solver not in SOLVERS:
            fail("solver", f"expected one of {SOLVERS}, got {self.solver!r}")
        for key in _TOLERANCES:
            v = getattr(self, key)
            if not 0.0 < v < 1.0:
                fail(key, f"tolerance must lie in (0, 1), got {v}")
        if not 0.0 < self.relaxation <= 1.0:
            fail("relaxation", "must lie in (0, 1]")
        for key in ("macro_k", "max_iters"):
            if getattr(self, key) < 1:
                fail(key, "must be at least 1")
        if self.anderson_depth < 0:
            fail("anderson_depth", "must be non-negative")
        try:
            self.case()
        except MtpgdError as exc:
            raise ConfigError(str(exc), None) from exc
        try:
            self.material()
        except (ValueError, MtpgdError) as exc:
            raise ConfigError(str(exc), None) from exc
        return self

    def case(self):
        kw = {}
        for key, name in (("n_elements", "n_elements"), ("n_cycles", "n_cycles"),
                          ("n_times", "n_times"), ("crack_fraction", "crack_fraction")):
            if getattr(self, key) is not None:
                kw[name] = getattr(self, key)
        if self.geometry is Geometry.DOGBONE:
            if self.load_rate_mm_s is not None:
                kw["load_rate"] = self.load_rate_mm_s
            if self.cycle_duration_s is not None:
                kw["cycle_duration"] = self.cycle_duration_s
            if self.ramp_mm_s is not None:
                kw["ramp_slope"] = self.ramp_mm_s
            return dogbone_case(amplitude=self.amplitude_mm, **kw)
        if self.cycle_duration_s is not None:
            kw["cycle_duration"] = self.cycle_duration_s
        kw["ramp_slope"] = self.ramp_mm_s
        spec = plate_case(amplitude=self.amplitude_mm, **kw)
        if self.load_rate_mm_s is not None:
            # an explicit rate fixes the cycle length of the triangle wave
            spec = CaseSpec(spec.geometry, spec.n_elements, spec.n_cycles, spec.n_times,
                            amplitude=spec.amplitude, load_rate=self.load_rate_mm_s,
                            ramp_slope=spec.ramp_slope,
                            cycle_duration=4.0 * spec.amplitude / self.load_rate_mm_s,
                            crack_fraction=spec.crack_fraction)
        return spec

    def material(self):
        return Material.from_gpa(self.E_GPa, self.nu, self.sigma_y0_MPa, self.H_GPa)

    def resolved_output_dir(self):
        return os.environ.get(OUTPUT_ENV) or self.output_dir


def parse_config(text):
    """Parse configuration text into a validated :class:`RunConfig`."""
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key in cfg.lines:
            raise ConfigError(f"duplicate key {key!r} (first on line {cfg.lines[key]})", lineno)
        try:
            setattr(cfg, key, _PARSERS[key](value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
        cfg.lines[key] = lineno
    return cfg.validate()


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    """Serialize back to the text format (round-trips through :func:`parse_config`)."""
    out = []
    for f in fields(cfg):
        if f.name == "lines":
            continue
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name == "probe":
            v = "; ".join(f"{x!r} {y!r}" for x, y in v)
        elif isinstance(v, Geometry):
            v = v.value
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"
