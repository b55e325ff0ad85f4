import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augburgers.analysis import (
    decay_monitor,
    gns_inequality_check,
    grad_decay_monitor,
    n_wave_diagnostic,
    restrict_pairwise,
    scaled_profile_error,
    self_convergence,
    series_lemma_check,
)
from augburgers.grid import GridFunction, make_grid, mass, norm, project_initial
from augburgers.initial import sine_bumps
from augburgers.profile import AsymptoticProfile, sample_on_grid
from augburgers.scheme import PhysicalParams, RunRecord


def record_from_snapshots(snaps):
    return RunRecord(snapshots=snaps, manifest={})


class TestScaledProfileError:
    def setup_method(self):
        self.wave = AsymptoticProfile(mass=1.0, viscosity=1.0)
        self.grid = make_grid(-20.0, 20.0, 0.1)

    def test_zero_when_snapshots_equal_profile(self):
        snaps = [
            (t, sample_on_grid(self.wave, self.grid, t)) for t in (1.0, 4.0, 9.0)
        ]
        series = scaled_profile_error(record_from_snapshots(snaps), self.wave, 2.0)
        assert np.all(series.values == 0.0)

    def test_skips_time_zero_with_warning(self):
        snaps = [
            (0.0, GridFunction(self.grid, np.zeros(self.grid.num_cells))),
            (1.0, sample_on_grid(self.wave, self.grid, 1.0)),
        ]
        with pytest.warns(UserWarning, match="t = 0"):
            series = scaled_profile_error(record_from_snapshots(snaps), self.wave, 1.0)
        assert list(series.times) == [1.0]

    def test_invariant_under_joint_translation(self):
        # Pure function of values, times and dx: shifting the window and the
        # profile center together changes nothing.
        rng = np.random.default_rng(2)
        vals = rng.random(self.grid.num_cells)
        snaps = [(2.0, GridFunction(self.grid, vals))]
        shifted_grid = make_grid(-10.0, 30.0, 0.1)
        shifted_snaps = [(2.0, GridFunction(shifted_grid, vals))]
        for p in (1.0, 2.0, math.inf):
            a = scaled_profile_error(record_from_snapshots(snaps), self.wave, p)
            b = scaled_profile_error(
                record_from_snapshots(shifted_snaps), self.wave, p, profile_offset=10.0
            )
            np.testing.assert_array_equal(a.values, b.values)

    def test_rate_exponents(self):
        u = GridFunction(self.grid, np.zeros(self.grid.num_cells))
        t = 16.0
        snaps = [(t, u)]
        rec = record_from_snapshots(snaps)
        prof = sample_on_grid(self.wave, self.grid, t)
        for p, expo in ((1.0, 0.0), (2.0, 0.25), (math.inf, 0.5)):
            series = scaled_profile_error(rec, self.wave, p)
            assert series.values[0] == pytest.approx(
                t**expo * norm(prof, p), rel=1e-13
            )


class TestMonitors:
    def test_zero_data_gives_zero_series(self):
        g = make_grid(0.0, 4.0, 0.5)
        zero = GridFunction(g, np.zeros(g.num_cells))
        rec = record_from_snapshots([(0.0, zero), (1.0, zero), (4.0, zero)])
        assert all(r == 0.0 for _, _, r in decay_monitor(rec, math.inf))
        assert all(v == 0.0 for _, v in grad_decay_monitor(rec, 1.0))

    def test_l1_ratio_is_normalized_norm(self):
        g = make_grid(0.0, 4.0, 0.5)
        rng = np.random.default_rng(3)
        u0 = GridFunction(g, rng.random(g.num_cells))
        u1 = GridFunction(g, 0.5 * u0.values)
        rec = record_from_snapshots([(0.0, u0), (2.0, u1)])
        rows = decay_monitor(rec, 1.0)
        assert rows[1][2] == pytest.approx(norm(u1, 1) / norm(u0, 1), rel=1e-14)

    def test_l1_monitor_matches_step_reports_at_snapshots(self):
        # Snapshot states are the stepped states, so the monitor's L1 column
        # agrees exactly with the per-step reports at matching times.
        from augburgers import scheme
        from augburgers.flux import FluxKind
        from augburgers.kernel import build, choose_n
        from augburgers.scheme import CorrectorMode, SchemeConfig

        g = make_grid(-20.0, 20.0, 0.25)
        quad = build(0.25, 1.0, choose_n(0.25, 1.0, 1e-6))
        config = SchemeConfig(
            flux=FluxKind.ENGQUIST_OSHER,
            quadrature=quad,
            corrector_mode=CorrectorMode.CORRECTED,
            grid=g,
        )
        u0 = project_initial(sine_bumps(), g)
        rec = scheme.run(
            u0,
            PhysicalParams(nu=1e-2, c=2e-2),
            config,
            t_end=3.0,
            snapshot_times=[1.0, 3.0],
        )
        by_time = {r.t: r.l1 for r in rec.step_reports}
        for t, _, _ in decay_monitor(rec, 1.0):
            if t > 0.0:
                assert by_time[t] == norm(
                    [u for s, u in rec.snapshots if s == t][0], 1
                )


class TestRestriction:
    def test_pairwise_average_preserves_mass(self):
        fine = make_grid(0.0, 8.0, 0.5)
        coarse = make_grid(0.0, 8.0, 1.0)
        rng = np.random.default_rng(4)
        w = GridFunction(fine, rng.random(fine.num_cells))
        r = restrict_pairwise(w, coarse)
        assert mass(r) == pytest.approx(mass(w), abs=1e-15)

    def test_rejects_non_nested(self):
        fine = make_grid(0.0, 9.0, 0.5)
        coarse = make_grid(0.0, 8.0, 1.0)
        rng = np.random.default_rng(5)
        w = GridFunction(fine, rng.random(fine.num_cells))
        with pytest.raises(ValueError):
            restrict_pairwise(w, coarse)


class TestSelfConvergence:
    PARAMS = PhysicalParams(nu=1e-2, c=2e-2, theta=1.0)

    def test_identical_resolutions_give_zero(self):
        out = self_convergence(
            self.PARAMS, sine_bumps(), -20.0, 20.0, [0.2, 0.2], t_check=0.5
        )
        assert out[0][1] == 0.0

    def test_rejects_non_halving(self):
        with pytest.raises(ValueError, match="halve"):
            self_convergence(
                self.PARAMS, sine_bumps(), -20.0, 20.0, [0.3, 0.2], t_check=0.5
            )

    def test_differences_shrink_with_refinement(self):
        out = self_convergence(
            self.PARAMS, sine_bumps(), -40.0, 40.0, [0.2, 0.1, 0.05], t_check=1.0
        )
        diffs = [d for _, d in out]
        assert diffs[1] < diffs[0]
        assert diffs[1] / diffs[0] <= 0.8


class TestNWaveDiagnostic:
    def test_nonnegative_data_has_no_negative_mass(self):
        g = make_grid(0.0, 3.0, 0.5)
        d = n_wave_diagnostic(GridFunction(g, np.array([0.0, 1.0, 2.0, 0.5, 0.0, 0.0])))
        assert d.negative_mass == 0.0
        assert d.max == 2.0

    def test_default_datum_part_masses(self):
        # Analytic integrals of the two arcs: +0.2 and -0.05.
        g = make_grid(-60.0, 60.0, 0.1)
        u = project_initial(sine_bumps(), g)
        d = n_wave_diagnostic(u)
        assert d.positive_mass == pytest.approx(0.2, abs=1e-9)
        assert d.negative_mass == pytest.approx(-0.05, abs=1e-9)

    @given(
        st.lists(
            st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
            min_size=2,
            max_size=30,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_parts_sum_to_mass(self, values):
        g = make_grid(0.0, 0.25 * len(values), 0.25)
        w = GridFunction(g, np.asarray(values))
        d = n_wave_diagnostic(w)
        assert d.positive_mass + d.negative_mass == pytest.approx(
            mass(w), rel=1e-13, abs=1e-13
        )


class TestGnsInequality:
    def test_single_cell_closed_form(self):
        # One cell of value v: lhs = (dx v^2)^3, gradient term = 2 v^2/dx,
        # rhs = 8 dx^3 v^6.
        dx, v = 0.3, 1.7
        g = make_grid(0.0, 2 * dx, dx)
        w = GridFunction(g, np.array([v, 0.0]))
        res = gns_inequality_check(w, 2.0)
        assert res.lhs == pytest.approx((dx * v * v) ** 3, rel=1e-12)
        assert res.rhs == pytest.approx(8.0 * dx**3 * v**6, rel=1e-12)
        assert res.holds

    def test_verdict_invariant_under_scaling(self):
        rng = np.random.default_rng(6)
        g = make_grid(0.0, 10.0, 0.5)
        w = GridFunction(g, rng.uniform(-1.0, 1.0, g.num_cells))
        for p in (2.0, 3.0):
            base = gns_inequality_check(w, p)
            scaled = gns_inequality_check(GridFunction(g, 37.5 * w.values), p)
            expo = p * (p + 1.0) / (p - 1.0)
            assert scaled.holds == base.holds
            assert scaled.lhs / base.lhs == pytest.approx(37.5**expo, rel=1e-9)
            assert scaled.rhs / base.rhs == pytest.approx(37.5**expo, rel=1e-9)

    def test_randomized_corpus_all_hold(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(3, 201))
            dx = float(rng.uniform(0.01, 1.0))
            vals = 2.0 * rng.random(n) - 1.0
            if not np.any(vals):
                vals[0] = 1.0
            w = GridFunction(make_grid(0.0, n * dx, dx), vals)
            for p in (2.0, 3.0, 4.0):
                assert gns_inequality_check(w, p).holds

    def test_rejects_zero_function(self):
        g = make_grid(0.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            gns_inequality_check(GridFunction(g, np.zeros(2)), 2.0)


class TestSeriesBound:
    def test_unit_b_degenerates_to_equality(self):
        res = series_lemma_check(0.5, 0.0, 10)
        assert res.lhs == 0.0
        assert res.holds

    def test_hand_case(self):
        res = series_lemma_check(0.5, math.pi, 10)
        assert res.holds
        assert res.rhs == pytest.approx(4.0 * 0.5 / 0.125, rel=1e-13)

    def test_randomized_corpus_all_hold(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            a = float(rng.uniform(0.01, 0.99))
            phi = float(rng.uniform(-math.pi, math.pi))
            n = int(rng.integers(1, 101))
            assert series_lemma_check(a, phi, n).holds
