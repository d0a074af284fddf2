"""Prekopa-Leindler triples: hypothesis, excess, equivalence, conclusions."""

import math

import numpy as np
import pytest

from infconv import deficits as df
from infconv import families as fam
from infconv import pl
from conftest import power_profile


def hc_member(n=1, p=2.0, eps=0.03):
    return fam.sample(fam.Family("power_hc", n, {"p": p, "eps": eps}))


class TestBuildTriple:
    def test_theta0_relation(self):
        params = df.HCParams(p=2.0, t=0.7, alpha=1.0, beta=3.0)
        g = hc_member()
        triple = pl.build_hc_triple(g, params)
        pc = params.p_conj
        theta = params.alpha * ((params.beta - params.alpha)
                                / (params.beta * params.t)) ** (pc - 1.0)
        assert triple.theta0 == pytest.approx(
            (params.beta / params.alpha) ** pc * theta, rel=1e-12)

    def test_w_mass_change_of_variables(self):
        # int w = (alpha/beta)^n ||e^g||_alpha^alpha
        from infconv import funcrep as fr
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        g = hc_member(n=2)
        triple = pl.build_hc_triple(g, params)
        _, _, log_iw = triple.log_integrals()
        want = (2 * math.log(params.alpha / params.beta)
                + params.alpha * fr.log_norm_alpha(g, params.alpha))
        assert log_iw == pytest.approx(want, rel=1e-10)

    def test_v_mass_closed_form(self):
        from infconv import specfun as sf
        params = df.HCParams(p=3.0, t=1.0, alpha=1.0, beta=3.0)
        g = hc_member(p=3.0, eps=0.02)
        triple = pl.build_hc_triple(g, params)
        _, log_iv, _ = triple.log_integrals()
        pc = params.p_conj
        want = sf.log_power_exponential_integral(1, pc, triple.theta0 / pc)
        assert log_iv == pytest.approx(want, rel=1e-11)

    def test_complementary_branch_selected(self):
        params = df.HCParams(p=2.0, t=0.5, alpha=1.5, beta=2.0)
        triple = pl.build_hc_triple(hc_member(), params)
        assert triple.swapped
        assert triple.lam == pytest.approx(1.0 - 1.5 / 2.0)

    def test_gaussian_lambda_and_v_mass(self):
        g = power_profile(1, 0.05, 2.0)
        triple = pl.build_gaussian_triple(g, 1.0, 1.0)
        assert triple.lam == pytest.approx(0.5)
        _, log_iv, _ = triple.log_integrals()
        assert log_iv == pytest.approx(0.0, abs=1e-10)  # standard Gaussian mass


class TestHypothesis:
    def test_concave_exponent_satisfies_hypothesis(self):
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        triple = pl.build_hc_triple(hc_member(), params)
        assert pl.check_pl_hypothesis(triple, samples=10000) <= 1e-6

    def test_diagonal_with_identical_log_concave(self):
        # u = v = w log-concave: on x = y the hypothesis is an identity
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        triple = pl.build_hc_triple(hc_member(), params)
        lam = triple.lam
        xs = np.linspace(0.0, 5.0, 64)
        viol = lam * triple.log_v(xs) + (1 - lam) * triple.log_v(xs) - triple.log_v(xs)
        assert np.max(np.abs(viol)) < 1e-12

    def test_gaussian_triple_hypothesis(self):
        g = power_profile(2, 0.05, 2.0)
        triple = pl.build_gaussian_triple(g, 1.0, 1.0)
        assert pl.check_pl_hypothesis(triple, samples=10000) <= 1e-6

    def test_gaussian_midpoint_identity(self, rng):
        # |lam x + (1-lam) y|^2 = lam |x|^2 + (1-lam) |y|^2
        #                          - lam (1-lam) |x - y|^2 exactly
        for _ in range(200):
            lam = float(rng.uniform(0.05, 0.95))
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            lhs = float(np.dot(lam * x + (1 - lam) * y, lam * x + (1 - lam) * y))
            rhs = (lam * float(np.dot(x, x)) + (1 - lam) * float(np.dot(y, y))
                   - lam * (1 - lam) * float(np.dot(x - y, x - y)))
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestExcess:
    def test_identical_functions_give_zero(self):
        # equality case: u = v = w the same log-concave function
        from infconv import funcrep as fr
        g = power_profile(1, 0.5, 2.0)
        triple = pl.PLTriple(
            n=1, lam=0.4, log_u=g.log_at, log_v=g.log_at, log_w=g.log_at,
            u_tail=g.tail, v_tail=g.tail, w_tail=g.tail, edges=g.r)
        assert pl.pl_epsilon(triple) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n,p,alpha,beta", [
        (1, 2.0, 1.0, 2.0), (2, 3.0, 1.0, 3.0), (1, 2.0, 1.5, 2.0),
    ])
    def test_matches_hc_deficit(self, n, p, alpha, beta):
        g = hc_member(n=n, p=p)
        params = df.HCParams(p=p, t=1.0, alpha=alpha, beta=beta)
        eps_pl = pl.pl_epsilon(pl.build_hc_triple(g, params))
        d = df.hc_deficit(g, params).deficit
        assert eps_pl == pytest.approx(d, rel=1e-8)

    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_gaussian_deficit(self, n):
        g = power_profile(n, 0.05, 2.0)
        eps_pl = pl.pl_epsilon(pl.build_gaussian_triple(g, 1.0, 1.0))
        d = df.ghc_deficit(g, 1.0, 1.0).deficit
        assert eps_pl == pytest.approx(d, rel=1e-8)

    def test_nonnegative(self):
        for eps in (0.01, 0.1):
            g = hc_member(eps=eps)
            params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
            assert pl.pl_epsilon(pl.build_hc_triple(g, params)) >= 0.0


class TestConclusionDistances:
    def test_equality_triple_vanishes(self):
        member = fam.Family("extremizer_hc", 1,
                            {"p": 2.0, "alpha": 1.0, "beta": 2.0, "t": 1.0, "C": 0.0})
        g = fam.sample(member)
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        term1, term2 = pl.pl_conclusion_distances(pl.build_hc_triple(g, params))
        assert term1 < 1e-8 and term2 < 1e-8

    def test_second_term_controlled_by_sqrt_excess(self):
        # along the eps ladder term2 / sqrt(excess) stays bounded
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        ratios = []
        for eps in (0.04, 0.02, 0.01, 0.005):
            g = hc_member(eps=eps)
            triple = pl.build_hc_triple(g, params)
            excess = pl.pl_epsilon(triple)
            _, term2 = pl.pl_conclusion_distances(triple)
            ratios.append(term2 / math.sqrt(excess))
        assert max(ratios) / min(ratios) < 1.5

    def test_translations_rejected_for_radial(self):
        params = df.HCParams(p=2.0, t=1.0, alpha=1.0, beta=2.0)
        triple = pl.build_hc_triple(hc_member(), params)
        with pytest.raises(ValueError):
            pl.pl_conclusion_distances(triple, x0=0.5)
