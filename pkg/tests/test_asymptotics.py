import math

import numpy as np
import pytest

import _oracles as orc
from neckflow.asymptotics import (
    MODEL_TRIPLES,
    empirical_ratio,
    finite_model_integral,
    fit_exponent,
    limit_constant_c1,
    limit_constant_c2,
    predicted_exponent,
)

# frozen independently-verified limit constants for the beta >= 1 triples;
# the beta = 0 cases are covered exactly by the gamma closed forms below
C2_FROZEN = {
    (4.0, 1.5, 1.0, 3.0): 0.6555143885730299,
    (4.0, 1.5, 1.0, 2.0): 0.3559793298891319,
    (4.0, 2.5, 2.0, 3.0): 0.3964944611355759,
    (6.0, 1.5, 1.0, 5.0): 0.4673940351084847,
    (6.0, 1.5, 1.0, 4.0): 0.3236657262623853,
    (6.0, 2.5, 2.0, 5.0): 0.3356123040708201,
}


def test_c1_against_gamma_closed_form():
    for r in (4.0, 6.0):
        for alpha in (0.5, 1.5, 2.5):
            assert limit_constant_c1(r, alpha) == pytest.approx(
                orc.c1_closed_form(r, alpha), rel=1e-12
            )


def test_c1_precondition():
    with pytest.raises(ValueError):
        limit_constant_c1(4.0, 0.25)  # alpha * r = 1: diverges


def test_c2_beta0_against_gamma_closed_form():
    for r in (4.0, 6.0):
        assert limit_constant_c2(r, 0.0, 0.5, 0.0) == pytest.approx(
            orc.c2_closed_form_beta0(r, 0.5), rel=1e-12
        )


def test_c2_frozen_values():
    for (r, alpha, beta, q), want in C2_FROZEN.items():
        assert limit_constant_c2(r, q, alpha, beta) == pytest.approx(want, rel=1e-9)


def test_c2_preconditions():
    with pytest.raises(ValueError):
        limit_constant_c2(4.0, 3.0, 1.0, 1.0)  # alpha r - beta q = 1
    with pytest.raises(ValueError):
        limit_constant_c2(4.0, 1.0, 2.5, 1.0)  # alpha >= 1 + beta


def test_kind_1a_frozen_ratio():
    """Frozen: the eps = 1 truncation costs 1.7% at alpha = 1/2, b = 1e-6.

    The neglected tail of C1 runs from eps b^(-1/4) ~ 32 upward and decays
    like x^(-2); this ratio is what the 1%-level acceptance checks must
    budget for (they evaluate at eps = 2 where the defect is ~0.85%).
    """
    b = 1e-6
    val = finite_model_integral("1a", 4.0, 0.5, b, eps=1.0)
    ratio = val / (limit_constant_c1(4.0, 0.5) * b ** (1.0 / 4.0 - 0.5))
    assert ratio == pytest.approx(0.9829441748886647, rel=1e-10)


def test_kind_1a_ratio_approaches_one():
    ratios = empirical_ratio("1a", 4.0, 1.5, [1e-3, 1e-5, 1e-7], eps=1.0)
    err = np.abs(ratios - 1.0)
    assert err[0] > err[1] > err[2]
    assert err[2] < 1e-3


def test_kind_2_ratios_approach_one():
    for kind in ("2a", "2b"):
        ratios = empirical_ratio(
            kind, 4.0, 1.5, [1e-2, 1e-3, 1e-4], eps=1.0, q=3.0, beta=1.0
        )
        err = np.abs(ratios - 1.0)
        assert err[0] > err[2]
        assert err[2] < 0.02


def test_finite_model_integral_against_direct_quadrature():
    # kind 2a at moderate b has no real singularity trouble for Simpson on
    # a shifted grid; compare the package's substituted form against it
    b, r, alpha, beta, q = 0.1, 4.0, 1.5, 1.0, 3.0

    def raw(s):
        return (s**r - b**r) ** -alpha * (s**q - b**q) ** beta

    # integrable ~ (s-b)^(beta-alpha) = (s-b)^(-1/2) at s=b: substitute
    # s = b + w^2 with an independent midpoint rule
    def sub(w):
        return raw(b + w * w) * 2.0 * w

    ref = orc.midpoint(sub, 0.0, math.sqrt(1.0 - b), 400_000)
    val = finite_model_integral("2a", r, alpha, b, eps=1.0, q=q, beta=beta)
    assert val == pytest.approx(ref, rel=1e-9)


def test_finite_model_integral_validation():
    with pytest.raises(ValueError):
        finite_model_integral("3c", 4.0, 0.5, 1e-3)
    with pytest.raises(ValueError):
        finite_model_integral("1a", 4.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        finite_model_integral("2a", 4.0, 1.5, 2.0, eps=1.0, q=3.0, beta=1.0)


def test_predicted_exponents():
    assert predicted_exponent("1a", 4.0, 0.5, 0.0, 0.0) == 1.0 / 4.0 - 0.5
    assert predicted_exponent("2a", 4.0, 1.5, 3.0, 1.0) == 3.0 - 6.0 + 1.0
    assert predicted_exponent("2b", 6.0, 2.5, 5.0, 2.0) == 10.0 - 15.0 + 1.0


def test_model_triples_well_formed():
    assert len(MODEL_TRIPLES) == 6
    for kind, alpha, beta, q_off in MODEL_TRIPLES:
        assert kind in ("1a", "2a", "2b")
        if kind == "1a":
            assert beta == 0.0
        else:
            # q = r + q_off must keep the integrals convergent for r >= 4
            assert alpha < 1.0 + beta
            assert alpha * 4.0 - beta * (4.0 + q_off) > 1.0


def test_fit_exponent_exact_power_law():
    n = np.array([10.0, 20.0, 40.0, 80.0, 160.0])
    fit = fit_exponent(n, 3.0 * n**2.5)
    assert fit.exponent == pytest.approx(2.5, abs=1e-12)
    assert fit.constant == pytest.approx(3.0, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.residual_max < 1e-12
    assert fit.exponent_stderr < 1e-10
    assert fit.index_range == (10.0, 160.0)


def test_fit_exponent_constant_data():
    # constant values: flat slope, perfect residuals, r^2 pinned into [0, 1]
    fit = fit_exponent([1, 2, 3, 4, 5], [7.0] * 5)
    assert fit.exponent == pytest.approx(0.0, abs=1e-14)
    assert fit.residual_max < 1e-14
    assert 0.0 <= fit.r_squared <= 1.0


def test_fit_exponent_preconditions():
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3, 4], [1, 2, 3, 4])
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3, 4, 4], [1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3, 4, 5], [1, 2, 0, 4, 5])
