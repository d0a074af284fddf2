"""Matching parameters, model distances, translation fitting."""

import math

import numpy as np
import pytest

from infconv import deficits as df
from infconv import extremizer as ex
from infconv import families as fam
from infconv import funcrep as fr
from conftest import power_profile


class TestHCParams:
    def test_extremizer_parameters(self):
        member = fam.Family("extremizer_hc", 2,
                            {"p": 2.0, "alpha": 1.0, "beta": 3.0, "t": 0.7, "C": 0.4})
        g = fam.sample(member)
        params = df.HCParams(p=2.0, t=0.7, alpha=1.0, beta=3.0)
        pars = ex.hc_params(g, params)
        vals = fam.analytic_values(member)
        assert pars.theta == pytest.approx(vals["theta"], rel=1e-13)
        assert pars.a == pytest.approx(vals["mass_ratio"], rel=1e-11)

    def test_power_family_parameters(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.05})
        g = fam.sample(member)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        pars = ex.hc_params(g, params)
        vals = fam.analytic_values(member)
        assert pars.theta == pytest.approx(vals["theta"], rel=1e-13)
        assert pars.a == pytest.approx(vals["mass_ratio"], rel=1e-10)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_theta_at_unit_parameters(self, p):
        # (alpha, t, beta) = (1, 1, p) gives theta = (p')^(1-p')
        member = fam.Family("power_hc", 1, {"p": p, "eps": 0.01})
        g = fam.sample(member)
        pars = ex.hc_params(g, df.HCParams(p=p, t=1.0, alpha=1.0, beta=p))
        pc = p / (p - 1.0)
        assert pars.theta == pytest.approx(pc ** (1.0 - pc), rel=1e-13)


class TestLSIParams:
    def test_extremizer_c1_equals_p(self):
        for n, p in ((1, 2.0), (2, 3.0)):
            pc = p / (p - 1.0)
            f = power_profile(n, 1.0 / p, pc)
            pars = ex.lsi_params(f, p)
            assert pars.c1 == pytest.approx(p, rel=1e-11)

    @pytest.mark.parametrize("n,p,eps", [(1, 2.0, 0.1), (2, 3.0, 0.2)])
    def test_stretched_family_closed_form(self, n, p, eps):
        member = fam.Family("stretch_lsi", n, {"p": p, "eps": eps})
        f = fam.sample(member)
        pars = ex.lsi_params(f, p)
        vals = fam.analytic_values(member)
        assert pars.c1 == pytest.approx(vals["c1"], rel=1e-10)
        assert pars.c2 == pytest.approx(vals["c2"], rel=1e-10)

    def test_scale_invariance(self):
        f = power_profile(1, 0.5, 2.0)
        a = ex.lsi_params(f, 2.0)
        b = ex.lsi_params(f.shifted(math.log(4.0)), 2.0)
        assert b.c1 == pytest.approx(a.c1, rel=1e-12)

    def test_degenerate_input(self):
        r = fr.make_radial_grid(5.0, 64)
        const = fr.RadialProfile(1, r, np.zeros_like(r),
                                 exact=lambda rr: np.zeros_like(rr),
                                 exact_dlog=lambda rr: np.zeros_like(rr))
        with pytest.raises((ValueError, fr.DivergenceError)):
            ex.lsi_params(const, 2.0)


class TestModelDistance:
    def test_hc_extremizer_distance_vanishes(self):
        member = fam.Family("extremizer_hc", 1,
                            {"p": 3.0, "alpha": 1.0, "beta": 2.0, "t": 1.2, "C": -0.2})
        g = fam.sample(member)
        params = df.HCParams(p=3.0, t=1.2, alpha=1.0, beta=2.0)
        pars = ex.hc_params(g, params)
        assert ex.l1_model_distance(g, pars) < 1e-8

    def test_lsi_extremizer_distance_vanishes(self):
        f = power_profile(2, 0.5, 2.0)
        pars = ex.lsi_params(f, 2.0)
        assert ex.l1_model_distance(f, pars) < 1e-8

    def test_gaussian_distance_limit(self):
        # distance / eps tends to the first-variation integral
        ratios = []
        for eps in (0.04, 0.02, 0.01, 0.005):
            g = power_profile(1, eps, 2.0)
            pars = ex.ghc_params(g, 1.0, 1.0)
            ratios.append(ex.l1_model_distance(g, pars) / eps)
        target = fam.gaussian_variation_constant(1)
        devs = [abs(rr - target) for rr in ratios]
        assert all(b < a for a, b in zip(devs, devs[1:]))
        assert devs[-1] / target < 0.02

    def test_power_distance_limit(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.01})
        g = fam.sample(member)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        pars = ex.hc_params(g, params)
        dist = ex.l1_model_distance(g, pars)
        z_rate = fam.power_rate_parameter(member)
        target = fam.power_variation_constant(1, 2.0)
        assert dist / z_rate == pytest.approx(target, rel=0.03)

    def test_radial_input_rejects_translation(self):
        f = power_profile(1, 0.5, 2.0)
        pars = ex.lsi_params(f, 2.0)
        with pytest.raises(ValueError):
            ex.l1_model_distance(f, pars, x0=np.array([0.5]))


class TestFitTranslation:
    def planted_member(self, x0, num=1201, span=15.0):
        member = fam.Family("extremizer_hc", 1,
                            {"p": 2.0, "alpha": 1.0, "beta": 2.0, "t": 1.0,
                             "C": 0.0, "x0": x0})
        return fam.sample(member, span=span, num=num)

    def test_radial_returns_origin(self):
        f = power_profile(1, 0.5, 2.0)
        pars = ex.lsi_params(f, 2.0)
        fit = ex.fit_translation(f, pars)
        assert np.all(fit.x0 == 0.0)

    def test_planted_translation_recovered(self):
        span, num = 15.0, 1201
        h = 2.0 * span / (num - 1)
        plant = 20.0 * h  # exactly grid-commensurate
        g = self.planted_member(plant, num=num, span=span)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        pars = ex.hc_params(g, params)
        fit = ex.fit_translation(g, pars)
        assert abs(float(fit.x0[0]) - plant) <= h / 64.0
        assert fit.distance < 1e-5

    def test_fit_never_worse_than_centered(self):
        g = self.planted_member(0.37, num=601)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        pars = ex.hc_params(g, params)
        centered = ex.l1_model_distance(g, pars, x0=np.array([0.0]))
        fit = ex.fit_translation(g, pars)
        assert fit.distance <= centered + 1e-12

    def test_2d_planted_translation(self):
        member = fam.Family("extremizer_hc", 2,
                            {"p": 2.0, "alpha": 1.0, "beta": 2.0, "t": 1.0,
                             "C": 0.0, "x0": 0.5})
        g = fam.sample(member, span=6.0, num=97)
        h = 12.0 / 96
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        # parameters from the radial closed form (the 2D flow is not needed
        # to test the fitting machinery)
        vals = fam.analytic_values(member)
        pars = ex.ExtremizerParams(kind="hc", n=2, p=2.0, theta=vals["theta"],
                                   a=vals["mass_ratio"],
                                   log_a=math.log(vals["mass_ratio"]),
                                   alpha=1.0, beta=2.0, t=1.0)
        fit = ex.fit_translation(g, pars, coarse_stride=8)
        assert abs(float(fit.x0[0]) - 0.5) <= h / 8.0
        assert abs(float(fit.x0[1])) <= h / 8.0


class TestEqualityCharacterization:
    """Deficit below 1e-9 exactly when the fitted distance is below 1e-5."""

    def test_extremizers_both_small(self):
        for n, p, beta, t in ((1, 2.0, 2.0, 1.0), (2, 3.0, 4.0, 0.8)):
            member = fam.Family("extremizer_hc", n,
                                {"p": p, "alpha": 1.0, "beta": beta, "t": t, "C": 0.1})
            g = fam.sample(member)
            params = df.HCParams(p=p, t=t, alpha=1.0, beta=beta)
            d = df.hc_deficit(g, params).deficit
            fit = ex.fit_translation(g, ex.hc_params(g, params))
            assert d < 1e-9 and fit.distance < 1e-5

    def test_perturbed_both_large(self):
        member = fam.Family("power_hc", 1, {"p": 2.0, "eps": 0.05})
        g = fam.sample(member)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        d = df.hc_deficit(g, params).deficit
        fit = ex.fit_translation(g, ex.hc_params(g, params))
        assert d > 1e-4 and fit.distance > 1e-3
