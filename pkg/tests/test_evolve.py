import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewave import collocation as co
from conewave import evolve as ev
from conewave.errors import DomainError, NotConvergedWarning


@pytest.fixture(scope="module")
def disc():
    return co.build(4, 96)


class TestStep:
    def test_gauge_eigenflow(self, disc):
        traj = ev.evolve(disc, disc.g_disc, 1.0, 0.01, "linear-perturbed")
        ref = math.e * disc.g_disc
        assert np.max(np.abs(traj.states[-1] - ref)) <= 1e-6 * np.max(ref)

    def test_zero_fixed_point(self, disc):
        traj = ev.evolve(disc, np.zeros(192), 1.0, 0.01, "nonlinear")
        assert np.max(np.abs(traj.states[-1])) == 0.0

    def test_free_mode_contractive(self, disc):
        rng = np.random.default_rng(1)
        u = co.random_smooth_pair(disc, rng)
        traj = ev.evolve(disc, u, 2.0, 0.01, "linear-free")
        growth = traj.energy_norms[1:] / traj.energy_norms[:-1]
        assert np.max(growth) <= 1.001

    def test_step_matches_evolve(self, disc):
        rng = np.random.default_rng(2)
        u = co.random_smooth_pair(disc, rng)
        one = ev.step(disc, u, 0.01, "linear-perturbed")
        traj = ev.evolve(disc, u, 0.01, 0.01, "linear-perturbed")
        assert np.max(np.abs(one - traj.states[-1])) == 0.0

    def test_invariant_subspace(self, disc):
        rng = np.random.default_rng(3)
        f = co.random_smooth_pair(disc, rng)
        phi0 = f - disc.P_mat @ f
        traj = ev.evolve(disc, phi0, 10.0, 0.01, "linear-perturbed")
        scale = co.sobolev_norm(disc, f)
        assert np.max(np.abs(traj.mode_coeffs)) <= 1e-6 * scale

    def test_mode_coefficient_eigenflow(self, disc):
        traj = ev.evolve(disc, disc.g_disc, 3.0, 0.01, "linear-perturbed")
        expect = np.exp(traj.taus)
        rel = np.abs(traj.mode_coeffs - expect) / expect
        assert np.max(rel) <= 1e-5

    def test_stable_sector_bound(self, disc):
        rng = np.random.default_rng(5)
        for _ in range(5):
            f = co.random_smooth_pair(disc, rng)
            phi0 = f - disc.P_mat @ f
            traj = ev.evolve(disc, phi0, 10.0, 0.01, "linear-perturbed")
            bound = 10.0 * np.exp(0.05 * traj.taus) * traj.energy_norms[0]
            assert np.all(traj.energy_norms <= bound)

    def test_step_halving_order(self, disc):
        rng = np.random.default_rng(7)
        phi0 = 0.05 * co.random_smooth_pair(disc, rng)
        ends = {}
        for dt in (0.04, 0.02, 0.01):
            ends[dt] = ev.evolve(disc, phi0, 1.0, dt, "nonlinear").states[-1]
        e_coarse = np.linalg.norm(ends[0.04] - ends[0.01])
        e_fine = np.linalg.norm(ends[0.02] - ends[0.01])
        order = math.log2(e_coarse / e_fine)
        assert order >= 3.5

    def test_blowup_detection(self, disc):
        phi0 = disc.stack(np.full(96, 3.0), np.zeros(96))
        traj = ev.evolve(disc, phi0, 20.0, 0.01, "nonlinear")
        assert traj.blowup_tau is not None
        assert np.max(np.abs(traj.states[-1])) > ev.BLOWUP_SUP

    def test_tau_cap(self, disc):
        with pytest.raises(DomainError):
            ev.evolve(disc, disc.g_disc, 60.0, 0.01, "linear-free")


class TestLqNorm:
    def test_constant_anchor(self, disc):
        # |S^3| = 2 pi^2, int rho^3 = 1/4
        val = ev.lq_norm(4, np.ones(96), 2.0, disc)
        assert val == pytest.approx(math.pi / math.sqrt(2.0), abs=1e-10)

    def test_monomial_anchor(self, disc):
        # u = rho: (2 pi^2 int rho^{q+3})^{1/q}
        q = 4.0
        ref = (2.0 * math.pi**2 / (q + 4.0)) ** (1.0 / q)
        assert ev.lq_norm(4, disc.nodes, q, disc) == pytest.approx(ref, abs=1e-10)

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=60, deadline=None)
    def test_homogeneity(self, c):
        d4 = co.build(4, 32)
        u = np.cos(d4.nodes)
        a = ev.lq_norm(4, c * u, 6.0, d4)
        b = c * ev.lq_norm(4, u, 6.0, d4)
        assert a == pytest.approx(b, rel=1e-12)

    def test_sup_norm(self, disc):
        u = disc.nodes**2
        assert ev.lq_norm(4, u, math.inf, disc) == 1.0

    def test_q_gate(self, disc):
        with pytest.raises(DomainError):
            ev.lq_norm(4, np.ones(96), 1.5, disc)


class TestStrichartzNorm:
    def _constant_traj(self, disc, u1, tau_max=2.0):
        state = disc.stack(u1, np.zeros_like(u1))
        n = int(tau_max / 0.1)
        taus = np.arange(n + 1) * 0.1
        states = np.tile(state, (n + 1, 1))
        return ev.EvolutionTrajectory(
            disc=disc, dtau=0.1, mode="linear-free", taus=taus, states=states,
            mode_coeffs=np.zeros(n + 1), energy_norms=np.ones(n + 1),
            lq_norms={}, alias_indicator=0.0)

    def test_constant_trajectory(self, disc):
        u1 = np.cos(disc.nodes)
        traj = self._constant_traj(disc, u1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            val = ev.strichartz_norm(traj, 2.0, 8.0)
        ref = math.sqrt(2.0) * ev.lq_norm(4, u1, 8.0, disc)
        assert val == pytest.approx(ref, rel=1e-12)

    def test_zero_trajectory(self, disc):
        traj = self._constant_traj(disc, np.zeros(96))
        assert ev.strichartz_norm(traj, 2.0, 8.0) == 0.0

    def test_not_converged_warning(self, disc):
        traj = self._constant_traj(disc, np.ones(96))
        with pytest.warns(NotConvergedWarning):
            ev.strichartz_norm(traj, 2.0, 8.0)

    def test_geometric_decay(self, disc):
        # e^{-tau} profile: L^2_tau norm = lq / sqrt(2) at tau_max >> 1
        u1 = np.cos(disc.nodes)
        state = disc.stack(u1, np.zeros_like(u1))
        taus = np.arange(0, 2001) * 0.01
        states = np.exp(-taus)[:, None] * state[None, :]
        traj = ev.EvolutionTrajectory(
            disc=disc, dtau=0.01, mode="linear-free", taus=taus, states=states,
            mode_coeffs=np.zeros(len(taus)), energy_norms=np.exp(-taus),
            lq_norms={}, alias_indicator=0.0)
        val = ev.strichartz_norm(traj, 2.0, 8.0)
        ref = ev.lq_norm(4, u1, 8.0, disc) / math.sqrt(2.0)
        assert val == pytest.approx(ref, rel=1e-3)

    def test_sup_in_time(self, disc):
        u1 = np.cos(disc.nodes)
        traj = self._constant_traj(disc, u1)
        val = ev.strichartz_norm(traj, math.inf, 4.0)
        assert val == pytest.approx(ev.lq_norm(4, u1, 4.0, disc), rel=1e-12)


class TestSuite:
    def test_gauge_data_all_zero(self, disc):
        # f = g has (I-P) f = 0: all ratios vanish
        report = ev.strichartz_suite(disc, [(2.0, 8.0)], tau_max=1.0,
                                     n_samples=1, seed=0)
        f = disc.g_disc
        phi0 = f - disc.P_mat @ f
        assert np.max(np.abs(phi0)) <= 1e-12
        traj = ev.evolve(disc, phi0, 1.0, 0.01, "linear-perturbed")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            assert ev.strichartz_norm(traj, 2.0, 8.0) <= 1e-12

    def test_small_suite(self, disc):
        report = ev.strichartz_suite(disc, [(2.0, 8.0), (math.inf, 4.0)],
                                     tau_max=16.0, n_samples=4, seed=1)
        assert np.all(np.isfinite(report["ratios"]))
        assert np.all(report["spread"] <= 3.0)
        drift = np.abs(report["ratios"] - report["ratios_half"]) / report["ratios"]
        assert np.max(drift) <= 0.05


class TestDump:
    def test_files_written(self, disc, tmp_path):
        traj = ev.evolve(disc, disc.g_disc, 0.1, 0.01, "linear-perturbed",
                         q_list=(8.0,))
        csv_path = tmp_path / "t.csv"
        json_path = tmp_path / "t.json"
        ev.dump_trajectory(traj, csv_path, json_path, stride=2)
        header = csv_path.read_text().splitlines()[0]
        assert header == "tau,rho_index,phi1,phi2"
        import json
        side = json.loads(json_path.read_text())
        assert "mode_coefficients" in side and "lq_norms" in side
