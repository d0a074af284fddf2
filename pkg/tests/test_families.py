"""Closed-form families against the numerical pipeline."""

import math

import numpy as np
import pytest

from infconv import deficits as df
from infconv import extremizer as ex
from infconv import families as fam
from infconv import funcrep as fr
from infconv import hopflax as hl
from infconv import specfun as sf


class TestValidation:
    def test_power_range(self):
        with pytest.raises(ValueError):
            fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.3})  # above 1/4
        with pytest.raises(ValueError):
            fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.0})

    def test_stretch_range(self):
        with pytest.raises(ValueError):
            fam.Family("stretch_lsi", 1, {"p": 2.0, "eps": 1.0})  # p' - 1 = 1
        fam.Family("stretch_lsi", 1, {"p": 2.0, "eps": 0.0})

    def test_gauss_range(self):
        with pytest.raises(ValueError):
            fam.Family("gauss_quadratic", 1, {"eps": 0.25})

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            fam.Family("nope", 1, {})

    def test_parse_roundtrip(self):
        member = fam.parse_family("power_hc:n=2,p=3,eps=0.01")
        assert member.kind == "power_hc" and member.n == 2
        assert member.get("p") == 3.0 and member.get("eps") == 0.01


class TestSampling:
    def test_extremizer_profile_values(self):
        member = fam.Family("extremizer_hc", 1,
                            {"p": 2.0, "alpha": 1.0, "beta": 2.0, "t": 1.0, "C": 0.0})
        prof = fam.sample(member)
        pc = 2.0
        theta_g = ((2.0 - 1.0) / 2.0) ** (pc - 1.0)
        want = -theta_g * prof.r ** pc / pc
        assert np.allclose(prof.logvals, want)

    def test_power_at_zero_eps_not_allowed_but_limit_is_extremizer(self):
        # eps -> 0 places the member in the extremizer family: deficit -> 0
        ds = []
        for eps in (0.04, 0.02, 0.01):
            member = fam.Family("power_hc", 1, {"p": 2.0, "eps": eps})
            prof = fam.sample(member)
            ds.append(df.hc_deficit(
                prof, df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)).deficit)
        assert ds[0] > ds[1] > ds[2] > 0.0
        assert ds[2] == pytest.approx(4.0 * 0.01 ** 2, rel=0.05)

    def test_gauss_linear_values(self):
        member = fam.Family("gauss_linear", 1, {"x0": 0.8, "C0": 0.3})
        grid = fam.sample(member, span=10.0, num=501)
        xs = grid.xs
        assert np.allclose(grid.logvals, 0.8 * xs + 0.3)

    def test_tail_descriptors_exact(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.05})
        prof = fam.sample(member)
        assert prof.tail.c2 == pytest.approx(0.25 + 0.05)
        assert prof.tail.q == pytest.approx(2.0)


MATRIX = [(1, 2.0, 0.05), (2, 2.0, 0.02), (1, 3.0, 0.04), (3, 2.0, 0.05)]


class TestAnalyticAgainstPipeline:
    @pytest.mark.parametrize("n,p,eps", MATRIX)
    def test_power_family(self, n, p, eps):
        member = fam.Family("power_hc", n, {"p": p, "eps": eps})
        vals = fam.analytic_values(member)
        prof = fam.sample(member)
        # initial mass
        got = fr.log_norm_alpha(prof, 1.0)
        assert got == pytest.approx(vals["log_norm_initial"], rel=1e-9)
        # evolved coefficient
        img = hl.radial_inf_convolve(prof, hl.HopfLaxParams(p=p, t=1.0))
        r_probe = np.linspace(0.5, 3.0, 50)
        pc = p / (p - 1.0)
        fitted = -img.log_at(r_probe) / r_probe ** pc
        assert np.max(np.abs(fitted - vals["q1_coefficient"])) < 1e-8
        # evolved norm and deficit
        got_q = fr.log_density_integral(img, fr.LEBESGUE, p)
        assert got_q == pytest.approx(vals["log_qnorm_beta"], rel=1e-9)
        rep = df.hc_deficit(prof, df.HCParams(p=p, t=1.0, alpha=1.0, beta=p))
        assert rep.deficit == pytest.approx(vals["deficit"], rel=1e-6)

    @pytest.mark.parametrize("n,p,eps", MATRIX)
    def test_stretch_family(self, n, p, eps):
        member = fam.Family("stretch_lsi", n, {"p": p, "eps": eps})
        vals = fam.analytic_values(member)
        prof = fam.sample(member)
        assert math.exp(fr.log_density_integral(prof, fr.LEBESGUE, p)) == \
            pytest.approx(vals["norm_p_pow_p"], rel=1e-10)
        assert fr.entropy(prof.scaled(p)) == pytest.approx(vals["entropy"], rel=1e-9)
        assert fr.grad_norm_p(prof, p) == pytest.approx(vals["dirichlet"], rel=1e-10)
        rep = df.lsi_deficit(prof, p)
        assert rep.deficit == pytest.approx(vals["deficit"], rel=1e-6)

    @pytest.mark.parametrize("n", [1, 2])
    def test_gauss_quadratic_family(self, n):
        eps = 0.05
        member = fam.Family("gauss_quadratic", n, {"eps": eps})
        vals = fam.analytic_values(member)
        prof = fam.sample(member)
        assert math.exp(fr.log_norm_alpha(prof, 1.0, fr.GAUSSIAN)) == \
            pytest.approx(vals["norm_1_mu"], rel=1e-10)
        img = hl.inf_convolve_fast(prof, hl.HopfLaxParams(p=2.0, t=1.0))
        assert math.exp(fr.log_norm_alpha(img, 2.0, fr.GAUSSIAN)) == \
            pytest.approx(vals["qnorm_2_mu"], rel=1e-9)
        assert df.ghc_deficit(prof, 1.0, 1.0).deficit == \
            pytest.approx(vals["deficit_ghc"], rel=1e-6)
        f = prof.scaled(0.5)
        assert df.glsi_deficit(f).deficit == \
            pytest.approx(vals["deficit_glsi"], rel=1e-6)


class TestQuadraticConstants:
    def test_power_constant_values(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.01})
        assert fam.analytic_values(member)["quad_constant"] == pytest.approx(4.0)

    def test_stretch_constant_positive_on_grid(self):
        # equivalent, under x = n/p' and q = p - 1, to the positivity of
        # the trigamma combination h(x, q)
        for n in np.geomspace(1.01, 50.0, 24):
            for p in np.geomspace(1.02, 50.0, 24):
                assert fam.stretch_quadratic_constant(float(n), float(p)) > 0.0

    def test_stretch_constant_matches_trigamma_form(self):
        n, p = 2, 3.0
        pc = p / (p - 1.0)
        x = n / pc
        want = (x * x + x - (p - 1.0)
                - x * x * (x - (p - 1.0)) * sf.trigamma(x)) / (2.0 * n * pc)
        assert fam.stretch_quadratic_constant(n, p) == pytest.approx(want, rel=1e-12)

    def test_stretch_constant_is_the_taylor_coefficient(self):
        # half the second eps-derivative of the closed-form deficit at 0,
        # via the forward second difference f(2h) - 2 f(h) + f(0), f(0) = 0
        for n, p in ((1, 2.0), (2, 3.0)):
            h = 1e-4

            def d(eps, n=n, p=p):
                member = fam.Family("stretch_lsi", n, {"p": p, "eps": eps})
                return fam.analytic_values(member)["deficit"]

            coeff = (d(2.0 * h) - 2.0 * d(h)) / (2.0 * h ** 2)
            assert coeff == pytest.approx(fam.stretch_quadratic_constant(n, p),
                                          rel=5e-3)

    def test_stretch_first_order_term_vanishes(self):
        # deficit(eps)/eps -> 0: the family sits at a critical point
        n, p = 1, 2.0
        ratios = []
        for eps in (0.02, 0.01, 0.005, 0.0025):
            member = fam.Family("stretch_lsi", n, {"p": p, "eps": eps})
            ratios.append(fam.analytic_values(member)["deficit"] / eps)
        assert all(abs(b) < abs(a) for a, b in zip(ratios, ratios[1:]))
        assert abs(ratios[-1]) < 0.01 * fam.stretch_quadratic_constant(n, p)


class TestVariationConstants:
    def test_power_exact_value(self):
        # (n, p) = (1, 2): the integrand antiderivative is elementary
        want = 2.0 * math.sqrt(2.0) * math.exp(-0.5)
        assert fam.power_variation_constant(1, 2.0) == pytest.approx(want, rel=1e-12)

    def test_gaussian_exact_values(self):
        assert fam.gaussian_variation_constant(1) == pytest.approx(
            4.0 * math.exp(-0.5) / math.sqrt(2.0 * math.pi), rel=1e-12)
        assert fam.gaussian_variation_constant(2) == pytest.approx(
            4.0 * math.exp(-1.0), rel=1e-12)

    def test_all_positive(self):
        for n, p in ((1, 2.0), (2, 2.0), (1, 3.0), (2, 1.5)):
            assert fam.power_variation_constant(n, p) > 0.0
            assert fam.stretch_variation_constant(n, p) > 0.0
        assert fam.gaussian_variation_constant(3) > 0.0


class TestZParameterization:
    def test_rate_parameter_positive_and_vanishing(self):
        rates = [fam.power_rate_parameter(
            fam.Family("power_hc", 1, {"p": 2.0, "eps": e}))
            for e in (0.04, 0.02, 0.01)]
        assert all(rr > 0.0 for rr in rates)
        assert rates[0] > rates[1] > rates[2]

    def test_z_formula(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.05})
        vals = fam.analytic_values(member)
        # z = p' b^(p-1); p = 2: z = 2 b, b = 0.5 + 2 eps
        assert vals["z"] == pytest.approx(2.0 * (0.5 + 2.0 * 0.05), rel=1e-13)
