import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfxwl.core import (
    LN2,
    MomentGrid,
    PartitionTable,
    ZetaSurface,
    default_fit_range,
    diagonal_analysis,
    direct_spectrum,
    legendre_spectrum,
    loglog_fit,
    partition_table,
    plane_fit,
    scaling_exponents,
)
from mfxwl.dwt import haar_pyramid
from mfxwl.errors import ConfigError, NumericalError
from mfxwl.leaders import wavelet_leaders
from mfxwl.pipeline import AnalysisConfig, leaders_of
from mfxwl.synth import CascadeSpec, analytic_cross_spectrum, analytic_zeta_cross, binomial_measure
from oracles import partition_direct


def _leaders(x, **kw):
    return wavelet_leaders(haar_pyramid(np.cumsum(x)), **kw)


@pytest.fixture(scope="module")
def cascade_leaders():
    cfg = AnalysisConfig()
    x = binomial_measure(CascadeSpec(0.3, 16))
    y = binomial_measure(CascadeSpec(0.4, 16))
    return leaders_of(x, cfg), leaders_of(y, cfg)


@pytest.fixture
def noise_pair(rng):
    return _leaders(rng.standard_normal(1024)), _leaders(rng.standard_normal(1024))


def _injected_table(log_s, grid, scales):
    shape = log_s.shape
    z = np.zeros(shape)
    return PartitionTable(grid, np.asarray(scales), 2 ** (10 - np.asarray(scales)), log_s, z, z, z, z + 1)


# -- grid ---------------------------------------------------------------------


def test_grid_uniform():
    g = MomentGrid.uniform()
    assert g.shape == (17, 17) and g.dp == 0.5 and g.p_values[0] == -4 and g.p_values[-1] == 4
    assert 0.0 in g.p_values


@pytest.mark.parametrize("vals", [[0, 1, 1], [2, 1, 0], [0, 1, 3]])
def test_grid_rejects_bad_axes(vals):
    with pytest.raises(ConfigError):
        MomentGrid(vals, [0, 1, 2])


# -- partition table ------------------------------------------------------------


def test_zero_orders_give_unit_partition(noise_pair, backend):
    Lx, Ly = noise_pair
    t = partition_table(Lx, Ly, MomentGrid([-1, 0, 1], [-1, 0, 1]))
    assert np.all(t.log_S[1, 1] == 0.0)
    assert np.all(t.S[1, 1] == 1.0)


def test_matches_plain_power_sums(noise_pair, backend):
    Lx, Ly = noise_pair
    g = MomentGrid.uniform((-3, 3), (-3, 3), 1.5)
    t = partition_table(Lx, Ly, g)
    for (i, p), (k, q) in [((0, -3), (4, 3)), ((2, 0), (1, -1.5)), ((4, 3), (4, 3))]:
        for c, j in enumerate(t.scales):
            want = partition_direct(Lx.at(j), Ly.at(j), p, q)
            assert t.S[i, k, c] == pytest.approx(want, rel=1e-11)


def test_same_signal_reduces_to_single(noise_pair):
    Lx, _ = noise_pair
    g = MomentGrid([-2, 0, 2], [-2, 0, 2])
    t = partition_table(Lx, Lx, g)
    for i, q in enumerate(g.p_values):
        for c, j in enumerate(t.scales):
            assert t.S[i, i, c] == pytest.approx(np.mean(Lx.at(j) ** q), rel=1e-12)


def test_extreme_orders_do_not_overflow(noise_pair):
    Lx, Ly = noise_pair
    t = partition_table(Lx, Ly, MomentGrid([-400, 0, 400], [-400, 0, 400]))
    assert np.all(np.isfinite(t.log_S)) and np.all(np.isfinite(t.A_mu))


def test_mu_properties(noise_pair, backend):
    Lx, Ly = noise_pair
    t = partition_table(Lx, Ly, MomentGrid.uniform())
    assert np.all(np.abs(t.mu_sum - 1.0) <= 1e-10)
    assert np.all(t.A_mu <= 1e-12)


def test_zero_leader_policy(backend):
    x = np.zeros(64)
    x[3] = 1.0  # leaders vanish away from the spike
    Lx = wavelet_leaders(haar_pyramid(x))
    with pytest.raises(NumericalError, match="negative moment"):
        partition_table(Lx, Lx, MomentGrid([-1, 0, 1], [-1, 0, 1]))
    t = partition_table(Lx, Lx, MomentGrid([1, 2, 3], [1, 2, 3]))
    assert np.all(np.isfinite(t.log_S))
    t = partition_table(Lx, Lx, MomentGrid([-1, 0, 1], [-1, 0, 1]), epsilon=1e-6)
    assert np.all(np.isfinite(t.log_S))


def test_length_mismatch(rng):
    a = _leaders(rng.standard_normal(64))
    b = _leaders(rng.standard_normal(128))
    with pytest.raises(ConfigError):
        partition_table(a, b, MomentGrid.uniform())


def test_binomial_s22_slope(cascade_leaders):
    Lx, Ly = cascade_leaders
    z = scaling_exponents(partition_table(Lx, Ly, MomentGrid([1, 2, 3], [1, 2, 3])), (5, 13))
    assert z.zeta[1, 1] == pytest.approx(1 - math.log2(0.54), abs=0.05)


# -- regression -------------------------------------------------------------------


def test_loglog_fit_examples():
    xs = np.arange(6.0)
    s, c, r2 = loglog_fit(xs, 2 * xs + 1)
    assert (s, c, r2) == pytest.approx((2, 1, 1))
    assert loglog_fit(xs, np.full(6, 0.1)) == (0.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        loglog_fit(np.ones(5), xs[:5])
    with pytest.raises(ValueError):
        loglog_fit([1, 2], [3, 4])


def test_loglog_fit_noisy(rng):
    xs = np.linspace(0, 10, 200)
    ys = 3 * xs + rng.normal(0, 0.5, xs.size)
    s, _, r2 = loglog_fit(xs, ys)
    se = 0.5 / math.sqrt(np.sum((xs - xs.mean()) ** 2))
    assert abs(s - 3) <= 4 * se and r2 > 0.99


def test_injected_power_law():
    g = MomentGrid([0, 1, 2], [0, 1, 2])
    scales = np.arange(1, 9)
    pp, qq = g.mesh()
    c = 0.3 * pp - 0.2 * qq + 0.05
    log_s = c[..., None] * scales * LN2 + 4.0
    z = scaling_exponents(_injected_table(log_s, g, scales), (2, 7))
    np.testing.assert_allclose(z.zeta, c, atol=1e-12)
    np.testing.assert_allclose(z.r2, 1.0, atol=1e-12)


def test_zeta_origin_is_exactly_zero(noise_pair):
    z = scaling_exponents(partition_table(*noise_pair, MomentGrid.uniform()), (2, 7))
    assert z.zeta[8, 8] == 0.0


def test_fit_range_errors(noise_pair):
    t = partition_table(*noise_pair, MomentGrid.uniform())
    with pytest.raises(ConfigError, match="exceeds available scales"):
        scaling_exponents(t, (3, 20))
    with pytest.raises(ConfigError):
        scaling_exponents(t, (3, 4))
    with pytest.raises(ConfigError):
        scaling_exponents(t, (5, 5))


def test_default_fit_range():
    assert default_fit_range(range(1, 15), 16) == (3, 13)
    assert default_fit_range(range(1, 5), 6) == (1, 4)


def test_invalid_cells_are_masked():
    g = MomentGrid([0, 1, 2], [0, 1, 2])
    scales = np.arange(1, 6)
    log_s = np.tile(scales * LN2, (3, 3, 1))
    log_s[2, 0, 1] = np.nan
    z = scaling_exponents(_injected_table(log_s, g, scales), (1, 5))
    assert np.isnan(z.zeta[2, 0]) and z.valid.sum() == 8


# -- Legendre route ---------------------------------------------------------------


def _surface(zeta, g):
    return ZetaSurface(g, zeta, np.ones_like(zeta), np.zeros_like(zeta), (1, 2))


@pytest.mark.parametrize("scheme", ["central", "forward"])
def test_legendre_plane(scheme):
    g = MomentGrid.uniform()
    pp, qq = g.mesh()
    s = legendre_spectrum(_surface(0.2 * pp + 0.35 * qq - 0.1, g), scheme)
    np.testing.assert_allclose(s.h_x, 0.4, atol=1e-12)
    np.testing.assert_allclose(s.h_y, 0.7, atol=1e-12)
    np.testing.assert_allclose(s.D, 1.1, atol=1e-12)


def test_legendre_reported_plane():
    g = MomentGrid.uniform()
    pp, qq = g.mesh()
    s = legendre_spectrum(_surface(0.2112 * pp + 0.3809 * qq - 0.0168, g))
    assert np.mean(s.h_x) == pytest.approx(0.4224, abs=1e-12)
    assert np.mean(s.h_y) == pytest.approx(0.7618, abs=1e-12)
    assert np.mean(s.D) == pytest.approx(1.0168, abs=1e-12)


def test_legendre_identity_holds():
    g = MomentGrid.uniform()
    pp, qq = g.mesh()
    z = analytic_zeta_cross(0.3, 0.4, pp, qq)
    s = legendre_spectrum(_surface(z, g))
    np.testing.assert_allclose(s.D + z - pp * s.h_x / 2 - qq * s.h_y / 2, 1.0, atol=1e-12)


def test_legendre_second_order_convergence():
    errs = []
    for step in (0.2, 0.1):
        g = MomentGrid.uniform((-2, 2), (-2, 2), step)
        pp, qq = g.mesh()
        s = legendre_spectrum(_surface(analytic_zeta_cross(0.3, 0.4, pp, qq), g))
        hx, hy, _ = analytic_cross_spectrum(0.3, 0.4, pp, qq)
        inner = (slice(1, -1), slice(1, -1))
        errs.append(max(np.abs(s.h_x - hx)[inner].max(), np.abs(s.h_y - hy)[inner].max()))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] < 1e-3


def test_legendre_needs_three_points():
    g = MomentGrid([0, 1], [0, 1, 2])
    with pytest.raises(ConfigError):
        legendre_spectrum(_surface(np.zeros((2, 3)), g))


# -- direct route -----------------------------------------------------------------


def test_direct_origin_is_one(noise_pair):
    s = direct_spectrum(partition_table(*noise_pair, MomentGrid.uniform()), (1, 8))
    assert s.D[8, 8] == pytest.approx(1.0, abs=1e-12)


def test_direct_agrees_with_legendre_on_single_measure():
    L = leaders_of(binomial_measure(CascadeSpec(0.3, 16)), AnalysisConfig())
    d = diagonal_analysis(L, L, np.arange(-4, 4.01, 0.5), (3, 13))
    assert np.max(np.abs(d.D_legendre - d.D_direct)) <= 0.05
    assert np.max(np.abs(d.h_legendre - d.h_direct)) <= 0.05


# -- diagonal --------------------------------------------------------------------


def test_diagonal_matches_surface_diagonal(cascade_leaders):
    Lx, Ly = cascade_leaders
    q = np.arange(-2, 2.01, 0.5)
    d = diagonal_analysis(Lx, Ly, q, (3, 13))
    z = scaling_exponents(partition_table(Lx, Ly, MomentGrid(q, q)), (3, 13))
    np.testing.assert_allclose(d.zeta, np.diag(z.zeta), atol=1e-12)


def test_diagonal_same_signal_is_standard_formalism(cascade_leaders):
    Lx, _ = cascade_leaders
    q = np.array([-1.0, 0.0, 1.0, 2.0])
    d = diagonal_analysis(Lx, Lx, q, (3, 13))
    x = np.arange(3, 14) * LN2
    for i, qq in enumerate(q):
        want = np.polyfit(x, [np.log(np.mean(Lx.at(j) ** qq)) for j in range(3, 14)], 1)[0]
        assert d.zeta[i] == pytest.approx(want, abs=1e-10)


def test_diagonal_binomial_q2(cascade_leaders):
    d = diagonal_analysis(*cascade_leaders, [1, 2, 3], (5, 13))
    assert d.zeta[1] == pytest.approx(1.8890, abs=0.05)


def test_diagonal_binomial_sweep(cascade_leaders):
    q = np.arange(-4, 5.01, 1.0)
    d = diagonal_analysis(*cascade_leaders, q, (3, 13))
    assert np.max(np.abs(d.zeta - analytic_zeta_cross(0.3, 0.4, q, q))) <= 0.1


# -- plane fit ---------------------------------------------------------------------


def test_plane_exact():
    g = MomentGrid.uniform()
    pp, qq = g.mesh()
    a, b, c, r2 = plane_fit(_surface(0.21 * pp - 0.4 * qq + 0.3, g))
    assert (a, b, c) == pytest.approx((0.21, -0.4, 0.3), abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_plane_errors():
    g = MomentGrid([0, 1, 2], [0, 1, 2])
    z = np.full((3, 3), np.nan)
    z[0, :2] = 1.0
    with pytest.raises(ConfigError):
        plane_fit(_surface(z, g))
    g1 = MomentGrid([0.0], np.arange(8.0))
    with pytest.raises(ConfigError, match="degenerate"):
        plane_fit(_surface(np.arange(8.0)[None, :], g1))


def test_binomial_surface_is_curved(cascade_leaders):
    z = scaling_exponents(partition_table(*cascade_leaders, MomentGrid.uniform()), (3, 13))
    _, _, _, r2 = plane_fit(z)
    assert r2 < 0.995
    pp, _ = z.grid.mesh()
    assert np.all(np.diff(z.zeta[:, 8], 2) < 0)


# -- properties ----------------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.01, 100))
def test_symmetry_and_scaling(seed, c):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal(256), r.standard_normal(256)
    Lx, Ly = _leaders(x), _leaders(y)
    g = MomentGrid.uniform((-2, 2), (-2, 2), 1.0)
    txy = partition_table(Lx, Ly, g)
    tyx = partition_table(Ly, Lx, g)
    np.testing.assert_array_equal(txy.log_S, np.swapaxes(tyx.log_S, 0, 1))
    np.testing.assert_array_equal(txy.A_x, np.swapaxes(tyx.A_y, 0, 1))
    assert np.all(np.abs(txy.mu_sum - 1) <= 1e-10)
    assert np.all(txy.log_S[2, 2] == 0.0)

    fr = (1, 6)
    z1 = scaling_exponents(txy, fr)
    ts = partition_table(_leaders(c * x), Ly, g)
    z2 = scaling_exponents(ts, fr)
    np.testing.assert_allclose(z2.zeta, z1.zeta, atol=1e-9)
    l1, l2 = legendre_spectrum(z1), legendre_spectrum(z2)
    d1, d2 = direct_spectrum(txy, fr), direct_spectrum(ts, fr)
    for a, b in [(l1.h_x, l2.h_x), (l1.h_y, l2.h_y), (l1.D, l2.D), (d1.h_x, d2.h_x), (d1.D, d2.D)]:
        np.testing.assert_allclose(b, a, atol=1e-9)


def test_backends_agree(cascade_leaders, monkeypatch):
    g = MomentGrid.uniform()
    a = partition_table(*cascade_leaders, g)
    monkeypatch.setenv("MFXWL_DISABLE_NUMBA", "1")
    b = partition_table(*cascade_leaders, g)
    for name in ("log_S", "A_x", "A_y", "A_mu"):
        np.testing.assert_allclose(getattr(a, name), getattr(b, name), rtol=1e-10, atol=1e-10)
