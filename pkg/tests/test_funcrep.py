"""Representations, quadrature, entropy, gradients, rearrangement, I/O."""

import math

import numpy as np
import pytest

from infconv import funcrep as fr
from infconv import specfun as sf
from conftest import power_profile

SQRT_PI = math.sqrt(math.pi)


def indicator_profile(n, radius, rmax=3.0):
    grid = np.unique(np.concatenate([
        np.linspace(0.0, radius, 400), np.linspace(radius, rmax, 100)]))
    vals = np.where(grid <= radius, 0.0, -np.inf)
    return fr.RadialProfile(n, grid, vals)


class TestRadialIntegral:
    def test_gaussian_line(self):
        prof = power_profile(1, 1.0, 2.0)
        assert fr.radial_integral(prof) == pytest.approx(SQRT_PI, rel=1e-12)

    def test_unit_disk_area(self):
        prof = indicator_profile(2, 1.0)
        assert fr.radial_integral(prof) == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_gaussian_measure_normalized(self, n):
        r = fr.make_radial_grid(20.0, 512)
        one = fr.RadialProfile(n, r, np.zeros_like(r),
                               exact=lambda rr: np.zeros_like(rr))
        assert fr.radial_integral(one, fr.GAUSSIAN) == pytest.approx(1.0, rel=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
    def test_matches_closed_form(self, n, q, m):
        prof = power_profile(n, m, q, rmax=40.0, num=1024)
        want = sf.power_exponential_integral(n, q, m)
        assert fr.radial_integral(prof) == pytest.approx(want, rel=1e-10)

    def test_divergence_signalled(self):
        r = fr.make_radial_grid(5.0, 64)
        bad = fr.RadialProfile(1, r, np.zeros_like(r))  # no tail, no decay
        with pytest.raises(fr.DivergenceError):
            fr.radial_integral(bad)


class TestLogNormAlpha:
    def test_unit_volume_set(self):
        prof = indicator_profile(1, 0.5)  # interval of length 1
        assert fr.log_norm_alpha(prof, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_gaussian_exponent(self):
        prof = power_profile(1, 1.0, 2.0)
        assert fr.log_norm_alpha(prof, 1.0) == pytest.approx(
            math.log(SQRT_PI), rel=1e-12)

    def test_shift_law_exact(self, rng):
        prof = power_profile(2, 0.7, 1.8)
        base = fr.log_norm_alpha(prof, 1.3)
        for c in rng.uniform(-5.0, 5.0, size=8):
            shifted = fr.log_norm_alpha(prof.shifted(float(c)), 1.3)
            assert shifted - base == pytest.approx(float(c), abs=1e-12)


class TestEntropy:
    def test_indicator_of_unit_volume(self):
        prof = indicator_profile(1, 0.5)
        assert fr.entropy(prof) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("n,p", [(1, 2.0), (2, 2.0), (1, 3.0), (2, 1.5)])
    def test_extremizer_closed_form(self, n, p):
        # rho = f0^p with f0 = e^(-|x|^p'/p): Ent has an explicit Gamma form
        pc = p / (p - 1.0)
        rho = power_profile(n, 1.0, pc)
        got = fr.entropy(rho)
        nom = n * sf.unit_ball_volume(n)
        mass = (nom / pc) * sf.gamma(n / pc)
        want = -(nom / pc) * sf.gamma(1.0 + n / pc) - mass * math.log(mass)
        assert got == pytest.approx(want, rel=1e-11)

    def test_homogeneity(self, rng):
        rho = power_profile(1, 1.0, 2.0)
        base = fr.entropy(rho)
        for c in rng.uniform(0.05, 10.0, size=10):
            scaled = fr.entropy(rho.shifted(math.log(float(c))))
            want = float(c) * base  # Ent(c rho) = c Ent(rho)
            assert scaled == pytest.approx(want, rel=1e-10, abs=1e-12)


class TestGradNorm:
    def test_constant_vanishes(self):
        r = fr.make_radial_grid(10.0, 256)
        const = fr.RadialProfile(1, r, np.full_like(r, 1.2),
                                 exact=lambda rr: np.full_like(rr, 1.2),
                                 exact_dlog=lambda rr: np.zeros_like(rr))
        assert fr.grad_norm_p(const, 2.0, fr.GAUSSIAN) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("n,p,eps", [(1, 2.0, 0.0), (1, 2.0, 0.3),
                                         (2, 3.0, 0.1), (3, 2.0, 0.0)])
    def test_stretched_family_closed_form(self, n, p, eps):
        pc = p / (p - 1.0)
        q = pc - eps
        f = power_profile(n, 1.0 / p, q, rmax=40.0, num=1024)
        got = fr.grad_norm_p(f, p)
        nom = n * sf.unit_ball_volume(n)
        want = nom * q ** (p - 1.0) / p ** p * sf.gamma((p * (q - 1.0) + n) / q)
        assert got == pytest.approx(want, rel=1e-10)

    @pytest.mark.parametrize("n", [1, 2])
    def test_gaussian_quadratic_family(self, n):
        eps = 0.1
        f = power_profile(n, 0.5 * eps, 2.0)
        got = fr.grad_norm_p(f, 2.0, fr.GAUSSIAN)
        want = n * eps ** 2 * (1.0 + 2.0 * eps) ** (-0.5 * n - 1.0)
        assert got == pytest.approx(want, rel=1e-11)

    def test_finite_difference_fallback(self):
        # sampled-only profile: central differences, grid-limited accuracy
        r = fr.make_radial_grid(25.0, 4096)
        f = fr.RadialProfile(1, r, -r ** 2 / 2.0, tail=fr.TailDecay(0.0, 0.5, 2.0))
        got = fr.grad_norm_p(f, 2.0)
        want = fr.grad_norm_p(power_profile(1, 0.5, 2.0, rmax=25.0), 2.0)
        assert got == pytest.approx(want, rel=1e-3)


class TestSchwarzRearrange:
    def bump(self, shift=1.5):
        # radial profile with an off-origin peak (not monotone)
        r = fr.make_radial_grid(12.0, 800)
        vals = -((r - shift) ** 2)
        return fr.RadialProfile(1, r, vals)

    def test_fixed_point_on_decreasing(self):
        # sampled-only decreasing input: rearrangement reproduces its interpolant
        r = np.linspace(0.0, 12.0, 1024)
        prof = fr.RadialProfile(1, r, -r ** 2, tail=fr.TailDecay(0.0, 1.0, 2.0))
        star = fr.schwarz_rearrange(prof)
        probe = np.linspace(0.0, 8.0, 2000)
        assert np.max(np.abs(star.log_at(probe) - prof.log_at(probe))) < 1e-9

    def test_nonincreasing_output(self):
        star = fr.schwarz_rearrange(self.bump())
        assert np.all(np.diff(star.logvals) <= 1e-12)

    @pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
    def test_norm_preservation(self, q):
        prof = self.bump()
        star = fr.schwarz_rearrange(prof)
        orig = fr.log_norm_alpha(prof, q)
        new = fr.log_norm_alpha(star, q)
        assert new == pytest.approx(orig, abs=1e-6)

    def test_idempotent(self):
        star = fr.schwarz_rearrange(self.bump())
        star2 = fr.schwarz_rearrange(star)
        probe = np.linspace(0.0, 6.0, 200)
        assert np.max(np.abs(star2.log_at(probe) - star.log_at(probe))) < 1e-6

    def test_polya_szego_direction(self):
        # asymmetric double bump: rearrangement strictly lowers the
        # Dirichlet integral (a single translated bump would be an
        # isometry and the comparison would be all noise)
        xs = np.linspace(-14.0, 14.0, 2801)
        vals = np.maximum(-((xs - 1.5) ** 2), -2.0 * (xs + 1.5) ** 2 - 0.3)
        gf = fr.GridFunction(1, (xs[0],), xs[1] - xs[0], vals)
        star = fr.schwarz_rearrange(gf)
        for p in (1.5, 2.0, 3.0):
            d_orig = fr.grad_norm_p(gf, p)
            d_star = fr.grad_norm_p(star, p)
            assert d_star < d_orig

    def test_non_decaying_input_rejected(self):
        xs = np.linspace(-5.0, 5.0, 101)
        gf = fr.GridFunction(1, (xs[0],), xs[1] - xs[0], 0.1 * xs)  # grows
        with pytest.raises(fr.DivergenceError):
            fr.schwarz_rearrange(gf)

    def test_l1_mass_preserved_from_grid(self):
        xs = np.linspace(-14.0, 14.0, 2101)
        vals = -np.abs(xs - 0.7) ** 1.7
        gf = fr.GridFunction(1, (xs[0],), xs[1] - xs[0], vals)
        star = fr.schwarz_rearrange(gf)
        orig = fr.log_grid_integral(gf)
        new = fr.log_norm_alpha(star, 1.0)
        assert new == pytest.approx(orig, abs=1e-5)


class TestFileFormat:
    def test_radial_roundtrip(self, tmp_path):
        prof = power_profile(2, 0.8, 1.7, num=256)
        path = tmp_path / "prof.dat"
        fr.save_function(path, prof, p=2.4)
        back, meta = fr.load_function(path)
        assert isinstance(back, fr.RadialProfile)
        assert back.n == 2
        assert meta["p"] == pytest.approx(2.4)
        assert back.tail.q == pytest.approx(1.7)
        assert np.allclose(back.logvals, prof.logvals)

    def test_grid_roundtrip(self, tmp_path):
        xs = np.linspace(-3.0, 3.0, 101)
        gf = fr.GridFunction(1, (xs[0],), xs[1] - xs[0], -xs ** 2)
        path = tmp_path / "grid.dat"
        fr.save_function(path, gf)
        back, _ = fr.load_function(path)
        assert isinstance(back, fr.GridFunction)
        assert back.dim == 1
        assert np.allclose(back.logvals, gf.logvals)

    def test_grid2d_roundtrip(self, tmp_path):
        xs = np.linspace(-2.0, 2.0, 21)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        gf = fr.GridFunction(2, (xs[0], xs[0]), xs[1] - xs[0], -(X ** 2 + Y ** 2))
        path = tmp_path / "grid2.dat"
        fr.save_function(path, gf)
        back, _ = fr.load_function(path)
        assert back.dim == 2
        assert np.allclose(back.logvals, gf.logvals)


class TestProfileValidation:
    def test_grid_must_start_at_zero(self):
        with pytest.raises(ValueError):
            fr.RadialProfile(1, np.linspace(0.1, 1, 32), np.zeros(32))

    def test_grid_must_increase(self):
        r = np.concatenate([[0.0], np.full(31, 1.0)])
        with pytest.raises(ValueError):
            fr.RadialProfile(1, r, np.zeros(32))

    def test_minimum_length(self):
        with pytest.raises(ValueError):
            fr.RadialProfile(1, np.linspace(0, 1, 8), np.zeros(8))

    def test_tail_consistency_warns(self):
        r = np.linspace(0.0, 5.0, 64)
        with pytest.warns(RuntimeWarning):
            fr.RadialProfile(1, r, np.zeros(64), tail=fr.TailDecay(0.0, 1.0, 2.0))
