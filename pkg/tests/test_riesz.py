"""Riesz operator tests: kernel table properties, backend equivalence,
positivity, self-adjointness, and the HLS quotient diagnostics."""
import numpy as np
import pytest
import scipy.integrate as si

from choqmp import grid as g
from choqmp import riesz as rz

# mpmath 50-digit polar and Cartesian quadratures of the unit-cell integral
# int_{[-1/2,1/2]^2} |z|^(-1/2) dz
UNIT_CELL_MU05 = 1.7677476267894528056


def random_gf(dom, seed):
    rng = np.random.default_rng(seed)
    return g.GridFunction(dom, rng.standard_normal((dom.nx, dom.ny)))


class TestKernelBuild:
    def test_mu_validation(self):
        dom = g.Domain(1.0, 1.0, 8, 8)
        for mu in (0.0, 1.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                rz.kernel_build(dom, mu)

    def test_symmetry_and_positivity(self):
        dom = g.Domain(1.0, 2.0, 9, 6)
        k = rz.kernel_build(dom, 0.7)
        assert np.all(k.table > 0.0)
        assert np.all(np.isfinite(k.table))
        assert np.allclose(k.table, k.table[::-1, ::-1], rtol=0, atol=0)

    def test_singular_cell_two_schemes(self):
        # polar oracle vs a second independent scheme (Cartesian dblquad)
        val = rz.singular_cell_weight(1.0, 1.0, 0.5)
        cart, _ = si.dblquad(lambda y, x: (x * x + y * y) ** -0.25,
                             0.0, 0.5, 0.0, 0.5, epsabs=1e-11)
        assert val == pytest.approx(4.0 * cart, abs=1e-9)
        assert val == pytest.approx(UNIT_CELL_MU05, rel=1e-10)

    def test_singular_cell_scaling(self):
        # |z|^(-mu) scales as h^(2-mu) under cell dilation
        v1 = rz.singular_cell_weight(1.0, 1.0, 0.5)
        vh = rz.singular_cell_weight(0.25, 0.25, 0.5)
        assert vh == pytest.approx(0.25 ** 1.5 * v1, rel=1e-10)


class TestApply:
    def test_zero(self):
        dom = g.Domain(1.0, 1.0, 16, 16)
        k = rz.kernel_for(dom, 0.5)
        zero = g.GridFunction.zeros(dom)
        assert g.sup_norm(rz.riesz_apply_direct(k, zero)) == 0.0
        assert g.sup_norm(rz.riesz_apply_fft(k, zero)) == 0.0

    @pytest.mark.parametrize("n", [16, 32, 64])
    @pytest.mark.parametrize("mu", [0.25, 0.5, 0.75])
    def test_backend_equivalence(self, n, mu):
        dom = g.Domain(1.0, 1.0, n, n)
        k = rz.kernel_for(dom, mu)
        u = random_gf(dom, n + int(mu * 100))
        a = rz.riesz_apply_direct(k, u)
        b = rz.riesz_apply_fft(k, u)
        rel = g.sup_norm(a - b) / g.sup_norm(a)
        assert rel <= 1e-10

    def test_self_adjoint(self):
        dom = g.Domain(1.0, 1.0, 24, 24)
        k = rz.kernel_for(dom, 0.5)
        f = random_gf(dom, 1)
        h = random_gf(dom, 2)
        a = g.l2_inner(rz.riesz_apply_direct(k, f), h)
        b = g.l2_inner(f, rz.riesz_apply_direct(k, h))
        assert abs(a - b) <= 1e-12 * (abs(a) + abs(b))

    def test_linearity(self):
        dom = g.Domain(1.0, 1.0, 20, 20)
        k = rz.kernel_for(dom, 0.4)
        u, v = random_gf(dom, 3), random_gf(dom, 4)
        for apply_fn in (rz.riesz_apply_direct, rz.riesz_apply_fft):
            lhs = apply_fn(k, 2.0 * u - 0.5 * v)
            rhs = 2.0 * apply_fn(k, u) - 0.5 * apply_fn(k, v)
            assert g.sup_norm(lhs - rhs) <= 1e-12 * g.sup_norm(rhs)

    def test_positivity(self):
        dom = g.Domain(1.0, 1.0, 16, 16)
        k = rz.kernel_for(dom, 0.5)
        u = g.GridFunction(dom, np.abs(random_gf(dom, 5).values))
        out = rz.riesz_apply_fft(k, u)
        assert np.all(out.values > 0.0)

    def test_semigroup_positivity(self):
        # <Kf, f> >= 0 on random f (positive-definite kernel)
        dom = g.Domain(1.0, 1.0, 16, 16)
        k = rz.kernel_for(dom, 0.5)
        for seed in range(5):
            f = random_gf(dom, seed)
            assert g.l2_inner(rz.riesz_apply_direct(k, f), f) >= 0.0

    def test_constant_input_shape(self):
        # center value dominates corners; refinement agreement at shared nodes
        vals = {}
        for n in (63, 127):
            dom = g.Domain(1.0, 1.0, n, n)
            k = rz.kernel_for(dom, 0.5)
            one = g.GridFunction(dom, np.ones((n, n)))
            out = rz.riesz_apply_fft(k, one)
            c = n // 2
            assert out.values[c, c] > out.values[0, 0] > 0.0
            vals[n] = out.values[c, c]  # node at (1/2, 1/2) both times
        assert vals[63] == pytest.approx(vals[127], rel=2e-2)

    def test_backend_name_validation(self):
        dom = g.Domain(1.0, 1.0, 8, 8)
        k = rz.kernel_for(dom, 0.5)
        with pytest.raises(ValueError):
            rz.riesz_apply(k, g.GridFunction.zeros(dom), backend="magic")


class TestHls:
    def test_positive_bump(self):
        dom = g.Domain(1.0, 1.0, 24, 24)
        bump = g.GridFunction.from_callable(
            dom, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        q = rz.hls_quotient(bump, bump, 0.5)
        assert q > 0.0

    def test_scaling_invariance(self):
        dom = g.Domain(1.0, 1.0, 16, 16)
        f = random_gf(dom, 20)
        h = random_gf(dom, 21)
        q1 = rz.hls_quotient(f, h, 0.5)
        q2 = rz.hls_quotient(17.5 * f, h, 0.5)
        q3 = rz.hls_quotient(f, 0.003 * h, 0.5)
        assert q2 == pytest.approx(q1, rel=1e-12)
        assert q3 == pytest.approx(q1, rel=1e-12)

    def test_zero_denominator(self):
        dom = g.Domain(1.0, 1.0, 8, 8)
        z = g.GridFunction.zeros(dom)
        with pytest.raises(ValueError):
            rz.hls_quotient(z, z, 0.5)


class TestBench:
    def test_rows_and_speedup(self):
        rows = rz.bench_backends([48], [0.5], repeats=2)
        assert {r["backend"] for r in rows} == {"direct", "fft"}
        direct = next(r for r in rows if r["backend"] == "direct")
        fft = next(r for r in rows if r["backend"] == "fft")
        assert direct["millis"] > 0 and fft["millis"] > 0

    @pytest.mark.slow
    def test_fft_speedup_at_128(self):
        rows = rz.bench_backends([128], [0.5], repeats=2)
        direct = next(r for r in rows if r["backend"] == "direct")
        fft = next(r for r in rows if r["backend"] == "fft")
        assert direct["millis"] >= 20.0 * fft["millis"]
