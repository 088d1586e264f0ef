from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegastop import levy
from omegastop.errors import DomainError, InadmissibleParameterError
from omegastop.model import (
    GainSpec,
    OmegaClock,
    compute_delta,
    intensity_constants,
    killing_probability,
    make_model,
    symmetric_delta,
    validate_params,
)


@st.composite
def admissible(draw):
    branch = draw(st.sampled_from(["low", "high", "cauchy"]))
    if branch == "cauchy":
        return 1.0, 0.5
    if branch == "low":
        return draw(st.floats(0.02, 0.98)), draw(st.floats(0.02, 0.98))
    a = draw(st.floats(1.02, 1.98))
    lo, hi = 1.0 - 1.0 / a, 1.0 / a
    return a, lo + draw(st.floats(0.02, 0.98)) * (hi - lo)


class TestParams:
    @pytest.mark.parametrize("alpha, rho", [(0.5, 0.3), (1.0, 0.5), (1.5, 0.5)])
    def test_accepted(self, alpha, rho):
        p = validate_params(alpha, rho)
        assert p.rho_hat == pytest.approx(1.0 - rho)

    @pytest.mark.parametrize("alpha, rho, branch", [
        (1.5, 0.2, "(1,2)"), (1.0, 0.4, "symmetric"), (0.5, 1.0, "(0,1)"), (2.0, 0.5, "outside"),
    ])
    def test_rejected_names_branch(self, alpha, rho, branch):
        with pytest.raises(InadmissibleParameterError, match=branch.replace("(", r"\(").replace(")", r"\)")):
            validate_params(alpha, rho)

    def test_negative_k_rejected(self):
        with pytest.raises(InadmissibleParameterError):
            OmegaClock(-0.1)

    def test_gain_validation(self):
        with pytest.raises(InadmissibleParameterError):
            GainSpec(0.0, 1.0)
        with pytest.raises(InadmissibleParameterError):
            GainSpec(0.1, 0.0)


class TestConstants:
    def test_cauchy_intensities(self):
        c_plus, c_minus = intensity_constants(validate_params(1.0, 0.5))
        assert c_plus == pytest.approx(1.0 / math.pi, rel=1e-14)
        assert c_minus == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_half_alpha_intensity(self):
        c_plus, _ = intensity_constants(validate_params(0.5, 0.5))
        assert c_plus == pytest.approx((math.sqrt(math.pi) / 2) / (math.pi * math.sqrt(2)), rel=1e-13)

    def test_fixture_p_and_delta(self, fixture_model):
        assert fixture_model.p == pytest.approx(0.5, abs=1e-14)
        assert fixture_model.delta == pytest.approx(0.25, abs=1e-14)
        # (1/2) sin^2(pi/2) = sin^2(pi/4)
        assert 0.5 * math.sin(math.pi / 2) ** 2 == pytest.approx(math.sin(math.pi / 4) ** 2)

    def test_delta_special_values(self):
        assert compute_delta(validate_params(0.8, 0.4), 0.0) == 0.0
        assert compute_delta(validate_params(1.2, 0.5), 1.0) == pytest.approx(0.6, abs=1e-14)

    # below ~1e-10 the increment of delta over its k = 0 value drops under
    # the float spacing of delta itself, so strictness is not representable
    @given(admissible(), st.one_of(st.just(0.0), st.floats(1e-10, 50.0)))
    @settings(max_examples=100, deadline=None)
    def test_model_invariants(self, ar, k):
        a, rho = ar
        m = make_model(a, rho, k)
        assert m.identity_residual <= 1e-12
        assert max(0.0, a - 1.0) <= m.delta < min(a * rho, a * (1 - rho))
        assert (m.delta > max(0.0, a - 1.0)) == (k > 0)
        assert 0.0 <= m.p < 1.0

    @given(admissible(), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_k(self, ar, k1, k2):
        lo, hi = sorted((k1, k2))
        a, rho = ar
        m_lo, m_hi = make_model(a, rho, lo), make_model(a, rho, hi)
        assert m_lo.p <= m_hi.p
        assert m_lo.delta <= m_hi.delta + 1e-15

    @given(st.floats(0.02, 1.98), st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_symmetric_delta_agrees(self, a, p):
        if abs(a - 1.0) < 1e-9:
            a = 1.0
        params = validate_params(a, 0.5)
        assert symmetric_delta(a, p) == pytest.approx(compute_delta(params, p), abs=1e-12)

    def test_killing_probability_increasing(self):
        params = validate_params(0.7, 0.4)
        ps = [killing_probability(params, OmegaClock(k)) for k in (0.0, 0.1, 1.0, 10.0)]
        assert ps[0] == 0.0 and all(x < y for x, y in zip(ps, ps[1:]))


class TestExponents:
    def test_psi_star_at_zero(self, fixture_model):
        assert levy.psi_star(0.0, fixture_model) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_psi_star_hermitian(self):
        m = make_model(0.7, 0.3, 0.5)
        for th in (0.3, 1.0, 4.0):
            assert levy.psi_star(-th, m) == pytest.approx(np.conj(levy.psi_star(th, m)), rel=1e-13)

    def test_psi_star_product_oracle(self, fixture_model):
        # Gamma(1 - i) Gamma(1 + i) / (Gamma(1/2 - i) Gamma(1/2 + i)) = (pi / sinh pi) / (pi / cosh pi)
        assert levy.psi_star(1.0, fixture_model) == pytest.approx(1.0 / math.tanh(math.pi), rel=1e-13)

    def test_psi_cpp(self, fixture_model):
        assert levy.psi_cpp(0.0, fixture_model) == 0.0
        # Cauchy case: 1 - Gamma(1/2 + it)Gamma(1/2 - it)Gamma(1 + it)Gamma(1 - it)/pi
        th = 0.7
        ratio = (math.pi / math.cosh(math.pi * th)) * (math.pi * th / math.sinh(math.pi * th)) / math.pi
        assert levy.psi_cpp(th, fixture_model) == pytest.approx((1.0 / math.pi) * (1.0 - ratio), rel=1e-13)
        for t in np.linspace(-5, 5, 21):
            assert levy.psi_cpp(t, fixture_model).real >= -1e-15

    def test_structural_equals_closed(self, fixture_model):
        assert levy.psi_structural(1.0, fixture_model) == pytest.approx(levy.psi_closed(1.0, fixture_model),
                                                                        rel=1e-12)
        assert levy.psi_structural(0.0, fixture_model).real == pytest.approx(fixture_model.q, rel=1e-13)

    def test_kappa_at_zero(self, fixture_model):
        assert levy.kappa(0.0, fixture_model) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-13)

    def test_kappa_log_slope(self, fixture_model):
        z = np.array([1e4, 1e5])
        slope = np.diff(np.log(levy.kappa(z, fixture_model))) / np.diff(np.log(z))
        assert slope[0] == pytest.approx(fixture_model.params.alpha_rho, abs=1e-4)

    def test_kappa_domain(self, fixture_model):
        with pytest.raises(DomainError):
            levy.kappa(-0.5, fixture_model)
        with pytest.raises(DomainError):
            levy.kappa_hat(-0.5, fixture_model)

    @given(admissible(), st.floats(0.01, 10.0), st.floats(-8.0, 8.0))
    @settings(max_examples=80, deadline=None)
    def test_factorization(self, ar, k, theta):
        m = make_model(*ar, k)
        assert levy.factorization_residual(theta, m) <= 1e-10
        ev = levy.evaluate_factors(theta, m)
        assert ev.structural_gap <= 1e-10
