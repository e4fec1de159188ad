import numpy as np
import pytest

from _oracles import hand_mesh_counts
from mtpgd.cases import (DESK_DOGBONE, CaseSpec, Geometry, build_cracked_plate, build_dogbone,
                         build_mesh, build_rectangle, dogbone_case, dogbone_grid, make_waveform,
                         plate_case, plate_grid, triangle_wave, with_overrides)
from mtpgd.errors import InconsistentSpecError, InvalidSpecError


class TestCaseSpec:
    def test_dogbone_cycle_duration(self):
        spec = dogbone_case()
        assert spec.cycle_duration == pytest.approx(20.0)
        assert spec.final_time == pytest.approx(200.0)

    def test_plate_final_time(self):
        assert plate_case().final_time == pytest.approx(1200.0)

    def test_zero_cycles_rejected(self):
        with pytest.raises(InvalidSpecError):
            dogbone_case(n_cycles=0)

    def test_times_must_divide(self):
        with pytest.raises(InvalidSpecError):
            dogbone_case(n_times=801)

    def test_negative_amplitude(self):
        with pytest.raises(InvalidSpecError):
            dogbone_case(amplitude=-0.1)

    def test_inconsistent_dogbone_period(self):
        with pytest.raises(InconsistentSpecError):
            dogbone_case(cycle_duration=25.0)

    def test_geometry_from_string(self):
        spec = CaseSpec("plate", 64, 4, 80, cycle_duration=30.0)
        assert spec.geometry is Geometry.CRACKED_PLATE


class TestDogboneMesh:
    def test_full_size_node_count(self):
        mesh = build_dogbone(dogbone_case())
        assert (mesh.n_elements, mesh.n_nodes) == (500, 561)

    def test_desk_node_count(self):
        # columns per grip/taper/gauge/taper/grip, counted by hand from the outline
        mesh = build_dogbone(DESK_DOGBONE)
        assert dogbone_grid(50) == (10, 5)
        assert mesh.n_nodes == hand_mesh_counts([2, 1, 4, 1, 2], 5) == 66

    def test_too_coarse(self):
        with pytest.raises(InvalidSpecError):
            build_dogbone(dogbone_case(n_elements=12, n_times=10, n_cycles=1))

    def test_outline(self):
        mesh = build_dogbone(dogbone_case())
        x, y = mesh.nodes.T
        assert x.min() == pytest.approx(-50.0) and x.max() == pytest.approx(50.0)
        assert np.abs(y[np.abs(x) <= 20.0]).max() == pytest.approx(5.0)
        assert np.abs(y).max() == pytest.approx(10.0)

    def test_wrong_geometry(self):
        with pytest.raises(InvalidSpecError):
            build_dogbone(plate_case())


class TestPlateMesh:
    def test_full_size_node_count(self):
        mesh = build_cracked_plate(plate_case())
        assert (mesh.n_elements, mesh.n_nodes) == (400, 451)

    def test_no_crack(self):
        mesh = build_cracked_plate(plate_case(crack_fraction=0.0))
        nx, ny = plate_grid(400)
        assert mesh.n_nodes == (nx + 1) * (ny + 1)

    @pytest.mark.parametrize("frac", [0.25, 0.4, 0.5, 0.75])
    def test_duplicates_follow_crack(self, frac):
        spec = plate_case(crack_fraction=frac)
        mesh = build_cracked_plate(spec)
        nx, ny = plate_grid(400)
        # walk the crack from the top edge: every crack node but the tip is doubled
        along = int(round(frac * ny))
        top = (ny) * (nx + 1) + nx // 2
        walked = [top - k * (nx + 1) for k in range(along)]
        assert mesh.n_nodes - (nx + 1) * (ny + 1) == len(walked) == along
        assert np.allclose(mesh.nodes[(nx + 1) * (ny + 1):], mesh.nodes[walked[::-1]])

    def test_crack_faces_disconnected(self):
        mesh = build_cracked_plate(plate_case())
        nx, ny = plate_grid(400)
        top = ny * (nx + 1) + nx // 2
        users = [e for e, conn in enumerate(mesh.elements) if top in conn]
        # only the element left of the crack keeps the original top node
        assert len(users) == 1

    def test_crack_too_long(self):
        with pytest.raises(InvalidSpecError):
            build_cracked_plate(plate_case(crack_fraction=1.2))


class TestMeshInvariants:
    @pytest.mark.parametrize("spec", [dogbone_case(), plate_case(), DESK_DOGBONE])
    def test_distinct_ids_and_positive_area(self, spec):
        mesh = build_mesh(spec)
        assert all(len(set(e)) == 4 for e in mesh.elements)
        xe = mesh.nodes[mesh.elements]
        area = 0.5 * np.sum(xe[:, :, 0] * np.roll(xe[:, :, 1], -1, axis=1)
                            - np.roll(xe[:, :, 0], -1, axis=1) * xe[:, :, 1], axis=1)
        assert np.all(area > 0)

    @pytest.mark.parametrize("spec", [dogbone_case(), plate_case()])
    def test_boundary_partition(self, spec):
        mesh = build_mesh(spec)
        b = set(mesh.boundary_nodes.tolist())
        d = set(mesh.dirichlet_nodes.tolist())
        n = set(mesh.neumann_nodes.tolist())
        assert d <= b and not (d & n) and d | n == b

    def test_single_element(self):
        mesh = build_rectangle(1, 1)
        assert (mesh.n_nodes, mesh.n_elements) == (4, 1)


class TestWaveform:
    def test_dogbone_peak(self):
        wf = make_waveform(dogbone_case())
        assert wf.values[0] == 0.0
        i = np.argmin(np.abs(wf.times - 5.0))
        assert wf.times[i] == pytest.approx(5.0)
        assert wf.values[i] == pytest.approx(0.125)
        assert wf.values.max() == pytest.approx(0.125)

    def test_zero_mean_per_cycle(self):
        spec = dogbone_case()
        wf = make_waveform(spec)
        blocks = wf.values.reshape(spec.n_cycles, -1)
        assert np.abs(blocks.sum(axis=1)).max() < 1e-14

    def test_slope_is_load_rate(self):
        spec = dogbone_case()
        wf = make_waveform(spec)
        slope = np.diff(wf.values) / np.diff(wf.times)
        assert np.allclose(np.abs(slope), spec.load_rate, rtol=1e-12)

    def test_cycles_identical(self):
        spec = dogbone_case()
        blocks = make_waveform(spec).values.reshape(spec.n_cycles, -1)
        assert np.all(blocks == blocks[0])

    def test_plate_drift(self):
        spec = plate_case()
        wf = make_waveform(spec)
        periodic = triangle_wave(wf.times, spec.amplitude, spec.cycle_duration)
        drift = wf.values - periodic
        assert np.allclose(drift, spec.ramp_slope * wf.times)
        assert spec.ramp_slope * spec.final_time == pytest.approx(spec.amplitude)

    def test_uniform_nodes(self):
        wf = make_waveform(DESK_DOGBONE)
        assert len(wf) == 200
        assert np.allclose(np.diff(wf.times), wf.dt)

    def test_overrides(self):
        spec = with_overrides(DESK_DOGBONE, n_cycles=5, n_times=100)
        assert spec.final_time == pytest.approx(100.0)
