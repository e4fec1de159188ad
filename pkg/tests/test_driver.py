import warnings

import numpy as np
import pytest

from mtpgd import driver, probe, run, solve_elastic
from mtpgd.cases import DESK_DOGBONE, with_overrides
from mtpgd.driver import AndersonMixer, SolveReport, relative_change, strain_history
from mtpgd.pgd import SpaceTimeField, compress_rhs, evaluate_field, pgd_solve
from mtpgd.plasticity import history_sweep, plastic_rhs
from mtpgd.reference import Solution


def quiet_run(*args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run(*args, **kw)


@pytest.fixture(scope="module")
def short_dogbone(steel):
    from mtpgd import assemble_stiffness, build_mesh, make_waveform
    spec = with_overrides(DESK_DOGBONE, n_cycles=2, n_times=40)
    return spec, assemble_stiffness(build_mesh(spec), steel), make_waveform(spec)


class TestElastic:
    def test_rank_one_proportional(self, desk_dogbone):
        _, sys_, wf = desk_dogbone
        field = solve_elastic(sys_, wf)
        assert field.rank == 1
        lam = field.time_modes[:, 0]
        corr = abs(lam @ wf.values) / (np.linalg.norm(lam) * np.linalg.norm(wf.values))
        assert corr >= 1 - 1e-10

    def test_probe_matches_direct_solve(self, desk_dogbone):
        _, sys_, wf = desk_dogbone
        field = solve_elastic(sys_, wf)
        u = evaluate_field(field, sys_, wf)
        direct = sys_.expand(sys_.solve(np.outer(sys_.load, wf.values)), wf.values)
        zero = history_sweep(np.zeros((sys_.n_gauss, 4, len(wf))), sys_.material)
        a = probe(Solution(u, zero), sys_, (0.0, 0.0), "sxx")
        b = probe(Solution(direct, zero), sys_, (0.0, 0.0), "sxx")
        assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(b)


class TestRun:
    def test_below_yield(self, steel):
        from mtpgd import assemble_stiffness, build_mesh, make_waveform
        spec = with_overrides(DESK_DOGBONE, amplitude=1e-3, load_rate=2e-4)
        sys_ = assemble_stiffness(build_mesh(spec), steel)
        field, state, rep = quiet_run(sys_, make_waveform(spec))
        assert rep.converged and rep.iterations == 1
        assert rep.errors_per_iter[0] < 1e-14
        assert not state.ebar_p.any() and not state.eps_p.any()

    def test_desk_dogbone_converges(self, dogbone_pgd):
        _, _, rep = dogbone_pgd
        assert rep.converged and rep.status == "converged"
        assert rep.errors_per_iter[-1] < 1e-4
        assert len(rep.errors_per_iter) == rep.iterations
        assert len(rep.ranks_per_iter) == rep.iterations + 1

    def test_error_matches_dense(self, desk_dogbone, dogbone_pgd):
        _, sys_, wf = desk_dogbone
        a = dogbone_pgd[0]
        b = solve_elastic(sys_, wf)
        dense = (np.linalg.norm(evaluate_field(a, sys_, wf) - evaluate_field(b, sys_, wf))
                 / np.linalg.norm(evaluate_field(b, sys_, wf)))
        assert relative_change(sys_, a, b, wf) == pytest.approx(dense, rel=1e-12)

    def test_self_consistent(self, desk_dogbone, dogbone_pgd):
        _, sys_, wf = desk_dogbone
        field, state, _ = dogbone_pgd
        fp = plastic_rhs(history_sweep(strain_history(sys_, field, wf), sys_.material), sys_)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            again = pgd_solve(sys_, driver.external_rhs(sys_, wf) + compress_rhs(fp, 1e-10))
        state2 = history_sweep(strain_history(sys_, again, wf), sys_.material)
        a = probe(Solution(evaluate_field(field, sys_, wf), state), sys_, (0, 0), "sxx")
        b = probe(Solution(evaluate_field(again, sys_, wf), state2), sys_, (0, 0), "sxx")
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 10 * 1e-4

    def test_dissipation_non_negative(self, dogbone_pgd):
        assert dogbone_pgd[1].dissipation().min() >= -1e-12

    def test_deterministic(self, short_dogbone):
        _, sys_, wf = short_dogbone
        a = quiet_run(sys_, wf)[2].errors_per_iter
        b = quiet_run(sys_, wf)[2].errors_per_iter
        assert a == b

    def test_plain_fixed_point_still_available(self, short_dogbone):
        _, sys_, wf = short_dogbone
        _, _, rep = quiet_run(sys_, wf, anderson_depth=0, max_iters=200)
        assert rep.converged

    def test_max_iters(self, short_dogbone):
        _, sys_, wf = short_dogbone
        _, state, rep = quiet_run(sys_, wf, max_iters=2)
        assert not rep.converged and rep.status == "max_iters" and rep.iterations == 2
        assert state.sigma is not None

    def test_callback(self, short_dogbone):
        _, sys_, wf = short_dogbone
        seen = []
        quiet_run(sys_, wf, max_iters=3, callback=lambda it, e, f: seen.append((it, e)))
        assert [s[0] for s in seen] == [1, 2, 3]

    @pytest.mark.parametrize("kw", [dict(delta=0.0), dict(relaxation=0.0), dict(relaxation=1.5),
                                    dict(anderson_depth=-1)])
    def test_bad_arguments(self, short_dogbone, kw):
        _, sys_, wf = short_dogbone
        with pytest.raises(ValueError):
            run(sys_, wf, **kw)

    def test_divergence_abort(self, short_dogbone, monkeypatch):
        _, sys_, wf = short_dogbone
        real = driver.pgd_solve
        calls = []

        def blowing_up(system, rhs, **kw):
            field = real(system, rhs, **kw)
            calls.append(1)
            scale = 100.0 ** len(calls)
            return SpaceTimeField(field.space_modes, field.time_modes * scale)

        monkeypatch.setattr(driver, "pgd_solve", blowing_up)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, _, rep = run(sys_, wf, max_iters=20, anderson_depth=0)
        assert rep.status == "diverged" and not rep.converged
        assert rep.iterations < 20


class TestAnderson:
    def test_depth_zero_is_relaxation(self):
        mix = AndersonMixer(0, beta=0.5)
        x0 = mix.update(np.array([2.0]))
        x1 = mix.update(np.array([4.0]))
        assert x0[0] == 2.0 and x1[0] == pytest.approx(3.0)

    def test_linear_fixed_point(self, rng):
        n = 30
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        A = Q @ np.diag(np.linspace(0.0, 0.95, n)) @ Q.T
        b = rng.normal(size=n)
        exact = np.linalg.solve(np.eye(n) - A, b)

        def iterate(depth, steps):
            mix = AndersonMixer(depth)
            x = mix.update(b)
            for _ in range(steps):
                x = mix.update(A @ x + b)
            return np.linalg.norm(x - exact) / np.linalg.norm(exact)

        assert iterate(5, 40) < 1e-3 * iterate(0, 40)


def test_report_csv(tmp_path):
    rep = SolveReport(iterations=2, errors_per_iter=[0.1, 0.01], ranks_per_iter=[1, 3, 4],
                      rhs_ranks=[2, 3])
    rep.to_csv(tmp_path / "r.csv")
    data = np.loadtxt(tmp_path / "r.csv", delimiter=",", skiprows=1)
    assert data.tolist() == [[1, 0.1, 3, 2], [2, 0.01, 4, 3]]
