import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilip.action import GOLDEN, apply_word, default_schottky
from bilip.errors import ConstructionError, EquivarianceError, NumericError, OrientationError
from bilip.examples import build_centralizer_demo, default_centralizer_driver
from bilip.extension import (
    IntervalExtension,
    commutation_residual,
    extend_circle,
    extend_interval,
    fundamental_domain,
    gap_driver,
    lipschitz_bound_audit,
    nondifferentiability_score,
    slope_jump_point,
    slope_jump_seed,
    smooth_seed,
    stabilized_gap_seed,
)
from bilip.map1d import Interval, identity, iterate, lipschitz_estimate, log_deriv_variation, make_bump

U = Interval(0.0, 1.0)
SCALES = [1e-4, 1e-5, 1e-6, 1e-7]


@pytest.fixture(scope="module")
def driver():
    return default_centralizer_driver()


@pytest.fixture(scope="module")
def demo(driver):
    return build_centralizer_demo(driver)


@pytest.fixture(scope="module")
def ext(demo):
    return demo.h


class TestFundamentalDomain:
    def test_sign_convention(self, driver):
        D = fundamental_domain(driver, 0.5)
        assert D.hi == 0.5 and D.lo == float(driver(0.5)) < 0.5

    def test_wrong_direction(self):
        with pytest.raises(OrientationError):
            fundamental_domain(make_bump(U, 4.0), 0.5)

    def test_fixed_point(self):
        with pytest.raises(OrientationError):
            fundamental_domain(make_bump(U, -4.0), 1.0)

    def test_iterates_tile(self, driver, ext):
        ends = [0.5]
        for _ in range(10):
            ends.append(float(driver(ends[-1])))
        b = ext.boundaries
        for j, e in enumerate(ends):
            assert abs(b[ext.n_fwd + 1 - j] - e) < 1e-12
        assert np.all(np.diff(b) > 1e-12)


class TestIntervalExtension:
    def test_identity_seed(self, driver):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, identity(D), c=0.5)
        x = U.mesh(10_001)
        assert np.max(np.abs(h(x) - x)) < 1e-12

    def test_seed_recovered(self, ext):
        D = ext.fundamental
        x = D.mesh(1001)
        assert np.max(np.abs(ext(x) - ext.seed(x))) <= 1e-12

    def test_commutes(self, driver, ext):
        assert commutation_residual(ext, driver, 10_000) < 1e-9

    def test_strictly_increasing(self, ext):
        assert np.all(np.diff(ext(U.mesh(10_000))) > 0)

    def test_fixes_ends(self, ext):
        assert ext(0.0) == 0.0 and ext(1.0) == 1.0

    def test_depth(self, ext):
        assert ext.n_fwd == ext.n_bwd == 30
        b = ext.boundaries
        # the flat ends of the bump make the untouched margins wide
        assert ext.truncation_mass == pytest.approx(b[0] + 1.0 - b[-1], abs=1e-15)
        assert 0 < ext.truncation_mass < 0.5

    def test_tiles_disjoint(self, ext):
        ts = ext.tiles
        for (_, a), (_, b) in zip(ts, ts[1:]):
            assert a.hi == b.lo and a.length > 0

    def test_inverse_is_extension_of_inverse_seed(self, ext):
        from bilip.map1d import invert
        x = U.mesh(2001)
        g = invert(ext)
        assert isinstance(g, IntervalExtension)
        assert np.max(np.abs(g(ext(x)) - x)) < 1e-12

    def test_seed_must_fix_endpoints(self, driver):
        D = fundamental_domain(driver, 0.5)
        from bilip.map1d import make_piecewise_affine
        bad = make_piecewise_affine([D.lo, D.hi], [D.lo, D.hi - 1e-4])
        with pytest.raises(ConstructionError):
            IntervalExtension(driver, bad, 0.5)

    def test_no_derivative_oracle(self, ext):
        with pytest.raises(NotImplementedError):
            ext.deriv(0.3)


class TestCorruptTile:
    def test_detected(self, driver):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, slope_jump_seed(D), c=0.5, fault_tile=3)
        assert commutation_residual(h, driver, 10_000) > 1e-3

    def test_only_that_tile_moves(self, driver, ext):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, slope_jump_seed(D), c=0.5, fault_tile=3)
        x = U.mesh(10_000)
        moved = np.abs(h(x) - ext(x)) > 0
        assert set(np.unique(ext.tile_index(x[moved]))) == {3}


class TestAudit:
    def test_interval_bound(self, demo, driver):
        a = demo.report
        assert a.M == pytest.approx(2.0, abs=1e-9) and a.V == log_deriv_variation(driver).value
        assert a.empirical <= a.cap * (1 + 1e-6)
        assert a.margin >= 1 and a.passed

    def test_per_tile_rows(self, demo):
        rows = demo.report.per_tile
        assert {r["tile"] for r in rows} >= set(range(-30, 31))
        assert max(max(r["fwd"], r["bwd"]) for r in rows) == pytest.approx(demo.report.empirical)

    def test_identity(self, driver):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, identity(D), c=0.5)
        a = lipschitz_bound_audit(h, 1.0, log_deriv_variation(driver).value)
        assert abs(a.empirical - 1.0) < 1e-6 and a.passed

    def test_non_monotone_fails(self, driver):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, slope_jump_seed(D), c=0.5, fault_tile=3)
        a = lipschitz_bound_audit(h, 2.0, log_deriv_variation(driver).value)
        assert not a.monotone and not a.passed and a.empirical == np.inf

    def test_demo_passes(self, demo):
        assert demo.passed

    def test_report_json(self, demo, tmp_path):
        import json
        p = tmp_path / "r.json"
        demo.report.to_json(p)
        assert json.loads(p.read_text())["passed"] is True


class TestScore:
    def test_identity(self):
        assert nondifferentiability_score(identity(U), 0.3, SCALES) < 1e-10

    def test_kink_in_tile_3(self, demo):
        assert demo.score >= 0.5

    def test_smooth_seed(self, driver):
        D = fundamental_domain(driver, 0.5)
        h = extend_interval(driver, smooth_seed(D), c=0.5)
        x = float(iterate(driver, 3)(slope_jump_point(D)))
        assert nondifferentiability_score(h, x, [1e-6, 2e-6]) < 1e-3

    def test_scale_floor(self, ext):
        with pytest.raises(NumericError):
            nondifferentiability_score(ext, 0.3, [1e-13, 1e-6])


@settings(max_examples=10, deadline=None)
@given(eps=st.floats(-12, -2), slope=st.floats(1.2, 3.0))
def test_interval_bound_soundness(eps, slope):
    f = make_bump(U, eps)
    D = fundamental_domain(f, 0.5)
    seed = slope_jump_seed(D, slope)
    h = extend_interval(f, seed, 20, c=0.5)
    M = max(lipschitz_estimate(seed))
    a = lipschitz_bound_audit(h, M, log_deriv_variation(f).value, mesh=1 << 12)
    assert a.passed
    assert commutation_residual(h, f, 2000) < 1e-8


class TestCircle:
    def test_gap_driver_pushes_left(self, schottky, stabilized_gap):
        w, gap = stabilized_gap
        I = gap.interval
        drv, _ = gap_driver(schottky.action, I, w)
        c = 0.5 * (I.lo + I.hi)
        assert float(drv(c)) < c

    def test_seed_commutes_with_stabilizer(self, schottky, stabilized_gap):
        w, gap = stabilized_gap
        I = gap.interval
        seed = stabilized_gap_seed(schottky.action, I, w)
        drv, _ = gap_driver(schottky.action, I, w)
        assert commutation_residual(seed, drv, 10_000) < 1e-9

    def test_identity_seed(self, schottky, stabilized_gap):
        w, gap = stabilized_gap
        I = gap.interval
        h = extend_circle(schottky.action, I, identity(I), w, 6)
        x = np.linspace(0, 1, 4001, endpoint=False)
        assert np.max(np.abs(h(x) - x)) < 1e-12

    def test_commutation(self, schottky, circle_ext):
        assert commutation_residual(circle_ext, schottky.action, 10_000) < 1e-8

    def test_consistency(self, circle_ext):
        assert circle_ext.consistency < 1e-9
        assert circle_ext.consistency_all < 1e-6

    def test_lift_and_monotone(self, circle_ext):
        x = np.linspace(0, 1, 10_000, endpoint=False)
        y = circle_ext(x)
        assert np.all(np.diff(y) > 0)
        assert np.max(np.abs(circle_ext(x + 1) - y - 1)) < 1e-12

    def test_gap_images_disjoint(self, circle_ext):
        lo, hi = circle_ext.los, circle_ext.his
        assert np.all(lo[1:] - hi[:-1] >= -1e-12)
        assert len(circle_ext.gaps) > 1000

    def test_bound(self, schottky, circle_ext, stabilized_gap):
        from bilip.map1d import difference_quotients
        w, gap = stabilized_gap
        I = gap.interval
        V = max(log_deriv_variation(g).value for g in schottky.action.generators)
        M = max(difference_quotients(circle_ext.seed._eval, I.lo, I.hi, 1 << 14))
        a = lipschitz_bound_audit(circle_ext, M, V, 2, 1 << 14)
        assert a.monotone and a.empirical <= a.cap * (1 + 1e-6) and a.margin >= 1

    def test_seed_kink_survives(self, circle_ext):
        D = circle_ext.seed.fundamental
        assert nondifferentiability_score(circle_ext, slope_jump_point(D), SCALES) >= 0.5

    def test_noncommuting_seed_rejected(self, schottky, stabilized_gap):
        w, gap = stabilized_gap
        I = gap.interval
        with pytest.raises(EquivarianceError):
            extend_circle(schottky.action, I, slope_jump_seed(I), w, 4)
