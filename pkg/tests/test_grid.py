"""Grid-space tests: stencil symmetry, fast Poisson solve, norms, psi weight,
and the GRD2 dump round trip."""
import numpy as np
import pytest

from choqmp import grid as g

UNIT64 = g.Domain(1.0, 1.0, 64, 64)


def random_gf(dom, seed):
    rng = np.random.default_rng(seed)
    return g.GridFunction(dom, rng.standard_normal((dom.nx, dom.ny)))


class TestDomain:
    def test_spacings(self):
        d = g.Domain(2.0, 1.0, 19, 9)
        assert d.hx == pytest.approx(0.1)
        assert d.hy == pytest.approx(0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            g.Domain(0.0, 1.0, 8, 8)
        with pytest.raises(ValueError):
            g.Domain(1.0, 1.0, 2, 8)


class TestGridFunction:
    def test_shape_and_finite_validation(self):
        d = g.Domain(1.0, 1.0, 4, 5)
        with pytest.raises(ValueError):
            g.GridFunction(d, np.zeros((5, 4)))
        with pytest.raises(ValueError):
            g.GridFunction(d, np.full((4, 5), np.nan))

    def test_arithmetic(self):
        d = g.Domain(1.0, 1.0, 4, 4)
        u = random_gf(d, 0)
        v = random_gf(d, 1)
        w = 2.0 * u - v
        assert np.allclose(w.values, 2.0 * u.values - v.values)
        with pytest.raises(ValueError):
            u + random_gf(g.Domain(1.0, 1.0, 5, 5), 2)


class TestLaplacian:
    def test_zero(self):
        u = g.GridFunction.zeros(UNIT64)
        assert g.sup_norm(g.laplacian_apply(u)) == 0.0

    def test_eigenfunction(self):
        u = g.GridFunction.from_callable(
            UNIT64, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        lap = g.laplacian_apply(u)
        ratio = lap.values / u.values
        lam = float(ratio[32, 32])
        assert lam == pytest.approx(2.0 * np.pi ** 2, rel=1e-3)
        # the sampled eigenfunction is exact for the stencil: ratio constant
        assert np.max(np.abs(ratio - lam)) < 1e-9

    def test_symmetry(self):
        u = random_gf(UNIT64, 3)
        v = random_gf(UNIT64, 4)
        a = g.l2_inner(g.laplacian_apply(u), v)
        b = g.l2_inner(u, g.laplacian_apply(v))
        scale = abs(a) + abs(b)
        assert abs(a - b) <= 1e-12 * scale


class TestPoisson:
    def test_eigen_rhs(self):
        u = g.GridFunction.from_callable(
            UNIT64, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        rhs = g.laplacian_apply(u)
        back = g.poisson_solve(rhs)
        assert np.max(np.abs(back.values - u.values)) < 1e-12

    def test_zero(self):
        assert g.sup_norm(g.poisson_solve(g.GridFunction.zeros(UNIT64))) == 0.0

    def test_roundtrip_random(self):
        for dom in (UNIT64, g.Domain(2.0, 1.0, 48, 24)):
            u = random_gf(dom, 5)
            back = g.poisson_solve(g.laplacian_apply(u))
            rel = np.max(np.abs(back.values - u.values)) / np.max(np.abs(u.values))
            assert rel <= 1e-10

    def test_polynomial_mms_is_discretely_exact(self):
        # x(1-x)y(1-y) is quadratic per axis: the 5-point stencil has zero
        # truncation error, so the solve reproduces the samples exactly
        dom = g.Domain(1.0, 1.0, 33, 33)
        u_star = g.GridFunction.from_callable(
            dom, lambda x, y: x * (1 - x) * y * (1 - y))
        rhs = g.GridFunction.from_callable(
            dom, lambda x, y: 2.0 * y * (1 - y) + 2.0 * x * (1 - x))
        u = g.poisson_solve(rhs)
        assert np.max(np.abs(u.values - u_star.values)) < 1e-12

    def test_mms_convergence_order(self):
        # exponential-weighted MMS keeps u_xxxx, u_yyyy nonzero
        def u_exact(x, y):
            return x * (1 - x) * np.exp(x) * y * (1 - y) * np.exp(2 * y)

        def rhs_exact(x, y):
            gx = x * (1 - x) * np.exp(x)
            ky = y * (1 - y) * np.exp(2 * y)
            gxx = (-x * x - 3 * x) * np.exp(x)
            kyy = (2 - 4 * y - 4 * y * y) * np.exp(2 * y)
            return -(gxx * ky + gx * kyy)

        errs = []
        for n in (32, 64, 128):
            dom = g.Domain(1.0, 1.0, n, n)
            u = g.poisson_solve(g.GridFunction.from_callable(dom, rhs_exact))
            ue = g.GridFunction.from_callable(dom, u_exact)
            errs.append(np.max(np.abs(u.values - ue.values)))
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
        for order in orders:
            assert abs(order - 2.0) <= 0.1


class TestNorms:
    def test_h1_eigenfunction(self):
        u = g.GridFunction.from_callable(
            UNIT64, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        assert g.h1_norm(u) == pytest.approx(np.sqrt(np.pi ** 2 / 2), rel=2e-3)

    def test_l2_of_constant(self):
        dom = g.Domain(2.0, 3.0, 80, 120)
        one = g.GridFunction(dom, np.ones((dom.nx, dom.ny)))
        assert g.lp_norm(one, 2.0) == pytest.approx(np.sqrt(6.0), rel=2e-2)

    def test_cauchy_schwarz(self):
        for seed in range(5):
            u = random_gf(UNIT64, seed)
            v = random_gf(UNIT64, seed + 100)
            assert abs(g.l2_inner(u, v)) <= g.lp_norm(u, 2) * g.lp_norm(v, 2) + 1e-14

    def test_integration_by_parts(self):
        # h1_norm(u)^2 = <lap u, u> exactly (zero trace)
        for seed in range(4):
            u = random_gf(UNIT64, seed)
            a = g.h1_norm(u) ** 2
            b = g.l2_inner(g.laplacian_apply(u), u)
            assert abs(a - b) <= 1e-10 * abs(a)

    def test_h1_inner_consistent(self):
        u = random_gf(UNIT64, 11)
        assert g.h1_inner(u, u) == pytest.approx(g.h1_norm(u) ** 2, rel=1e-13)

    def test_homogeneity_and_triangle(self):
        u = random_gf(UNIT64, 7)
        v = random_gf(UNIT64, 8)
        for p in (1.0, 2.0, 3.5):
            assert g.lp_norm(-2.5 * u, p) == pytest.approx(
                2.5 * g.lp_norm(u, p), rel=1e-12)
            assert g.lp_norm(u + v, p) <= g.lp_norm(u, p) + g.lp_norm(v, p) + 1e-12
        assert g.h1_norm(u + v) <= g.h1_norm(u) + g.h1_norm(v) + 1e-12
        assert g.sup_norm(3.0 * u) == pytest.approx(3.0 * g.sup_norm(u))

    def test_p_validation(self):
        with pytest.raises(ValueError):
            g.lp_norm(random_gf(UNIT64, 0), 0.5)


class TestPsi:
    def test_center_and_sign(self):
        dom = g.Domain(1.0, 1.0, 63, 63)  # odd: center node at (1/2, 1/2)
        psi = g.weight_psi(dom)
        assert psi.values[31, 31] == pytest.approx(1.0)
        assert np.all(psi.values > 0.0)

    def test_ratio_sup_stable_under_refinement(self):
        vals = [g.psi_gradient_ratio_sup(g.Domain(1.0, 1.0, n, n))
                for n in (64, 128, 256)]
        target = 4.0 * np.pi ** 2
        assert vals[-1] == pytest.approx(target, rel=0.01)
        assert abs(vals[1] - vals[2]) / vals[2] < 0.01


class TestGrd2:
    def test_roundtrip_bit_exact(self, tmp_path):
        dom = g.Domain(1.5, 0.75, 12, 7)
        u = random_gf(dom, 42)
        path = tmp_path / "u.grd2"
        g.write_grd2(u, path)
        raw = path.read_bytes()
        assert raw[:4] == b"GRD2"
        assert len(raw) == 32 + 12 * 7 * 8
        v = g.read_grd2(path)
        assert v.dom == dom
        assert np.array_equal(v.values, u.values)
        g.write_grd2(v, tmp_path / "u2.grd2")
        assert (tmp_path / "u2.grd2").read_bytes() == raw

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.grd2"
        path.write_bytes(b"NOPE" + bytes(60))
        with pytest.raises(ValueError):
            g.read_grd2(path)
