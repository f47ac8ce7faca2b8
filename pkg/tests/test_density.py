import math

import numpy as np
import pytest
from scipy import integrate as scipy_integrate
from scipy import stats

from seroclass.core.measurements import LogPoint
from seroclass.core.params import DomainSpec, Family, NegativeModelParams, QuadratureSpec
from seroclass.models.density import gridded_density, normalize, to_gridded, to_linear_units, truncation_mass
from seroclass.models.sampling import draw_shape
from seroclass.models.shapes import (
    eval_negative_shape,
    eval_positive_shape,
    negative_log_density,
    negative_shape,
    positive_log_density,
    positive_shape,
    unrotate,
)
from seroclass.utils.exceptions import (
    InvalidConfigException,
    InvalidParameterException,
    UnknownFamilyException,
    ZeroMassException,
)
from seroclass.validation.reference import REFERENCE_NEGATIVE, REFERENCE_POSITIVE


def _w_marginal(log_density, params, z, mu, sigma):
    """Integral over the cross-diagonal coordinate at fixed ``z``."""
    value, _ = scipy_integrate.quad(
        lambda w: math.exp(float(log_density(params, np.array([z]), np.array([w]))[0])),
        mu - 12.0 * sigma, mu + 12.0 * sigma, points=[mu], limit=200, epsabs=0.0, epsrel=1e-11,
    )
    return value


NEGATIVE_Z = np.linspace(0.05, 2.5, 50)
POSITIVE_Z = np.linspace(1.5, 8.0, 50)


class TestShapes:
    @pytest.mark.parametrize("z", NEGATIVE_Z)
    def test_negative_z_marginal_is_gamma(self, z):
        p = REFERENCE_NEGATIVE
        expected = stats.gamma.pdf(z, p.k, scale=p.theta)
        marginal = _w_marginal(negative_log_density, p, z, p.mu, p.alpha * math.exp(z / p.beta))
        assert marginal == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("z", POSITIVE_Z)
    def test_positive_z_marginal_is_scaled_beta(self, z):
        p = REFERENCE_POSITIVE
        expected = stats.beta.pdf(z / p.z_scale, p.alpha, p.beta_shape) / p.z_scale
        marginal = _w_marginal(positive_log_density, p, z, p.mu, p.theta * math.sqrt(z / p.z_scale))
        assert marginal == pytest.approx(expected, rel=1e-8)

    def test_positive_conditional_is_normal(self):
        p = REFERENCE_POSITIVE
        rng = np.random.default_rng(21)
        t = rng.uniform(0.2, 0.9, size=100)
        sigma = p.theta * np.sqrt(t)
        w = rng.normal(p.mu, 2.0 * sigma)
        x, y = unrotate(p.z_scale * t, w)
        conditional = positive_shape(p, x, y) / stats.beta.pdf(t, p.alpha, p.beta_shape)
        assert np.allclose(conditional, stats.norm.pdf(w, p.mu, sigma), rtol=1e-8, atol=0.0)

    def test_negative_conditional_is_normal(self):
        p = REFERENCE_NEGATIVE
        rng = np.random.default_rng(22)
        z = rng.uniform(0.1, 1.5, size=100)
        sigma = p.alpha * np.exp(z / p.beta)
        w = rng.normal(p.mu, 2.0 * sigma)
        x, y = unrotate(z, w)
        conditional = negative_shape(p, x, y) / stats.gamma.pdf(z, p.k, scale=p.theta)
        assert np.allclose(conditional, stats.norm.pdf(w, p.mu, sigma), rtol=1e-8, atol=0.0)

    @pytest.mark.parametrize("k,expected", [(1.0, 1.0 / 0.5), (2.0, 0.0)])
    def test_negative_shape_at_zero_level(self, k, expected):
        params = NegativeModelParams(theta=0.5, k=k, alpha=0.2, mu=0.0, beta=3.0)
        at_origin = float(negative_shape(params, 0.0, 0.0))
        assert at_origin == pytest.approx(expected * stats.norm.pdf(0.0, 0.0, 0.2))
        assert float(negative_shape(params, -0.01, 0.0)) == 0.0

    def test_cross_section_is_gaussian(self):
        p = REFERENCE_NEGATIVE
        z = 1.0
        sigma = p.alpha * math.exp(z / p.beta)
        values = np.exp(negative_log_density(p, np.full(3, z), np.array([0.0, sigma, 2 * sigma])))
        assert values[1] / values[0] == pytest.approx(math.exp(-0.5))
        assert values[2] / values[0] == pytest.approx(math.exp(-2.0))

    def test_point_evaluation(self):
        n, p = REFERENCE_NEGATIVE, REFERENCE_POSITIVE
        point = LogPoint(2.6, 2.4)
        z, w = 5.0 / math.sqrt(2.0), 0.2 / math.sqrt(2.0)
        negative = stats.gamma.pdf(z, n.k, scale=n.theta) * stats.norm.pdf(w, n.mu, n.alpha * math.exp(z / n.beta))
        t = z / p.z_scale
        positive = stats.beta.pdf(t, p.alpha, p.beta_shape) * stats.norm.pdf(w, p.mu, p.theta * math.sqrt(t))
        assert eval_negative_shape(n, point) == pytest.approx(negative, rel=1e-9)
        assert eval_positive_shape(p, point) == pytest.approx(positive, rel=1e-9)

    def test_point_evaluation_outside_the_support(self):
        assert eval_negative_shape(REFERENCE_NEGATIVE, LogPoint(0.0, 0.0)) == 0.0
        assert eval_positive_shape(REFERENCE_POSITIVE, LogPoint(7.0, 7.0)) == 0.0


class TestNormalize:
    def test_unit_mass(self, pos_density, neg_density):
        for density in (pos_density, neg_density):
            assert density.mass() == pytest.approx(1.0, abs=1e-12)
            assert density.mass(QuadratureSpec(512)) == pytest.approx(1.0, rel=1e-4)

    def test_converges_at_default_resolution(self):
        density = normalize(Family.POSITIVE, REFERENCE_POSITIVE)
        assert density.converged
        assert density.convergence_delta < 1e-6

    def test_zero_outside_domain(self, neg_density):
        values = neg_density.evaluate(np.array([-0.1, 7.5, 0.5]), np.array([0.5, 0.5, 0.5]))
        assert values[0] == 0.0 and values[1] == 0.0
        assert values[2] > 0.0

    def test_point_and_array_evaluation_agree(self, pos_density):
        point = LogPoint(3.1, 2.9)
        assert pos_density.pdf(point) == pytest.approx(float(pos_density(3.1, 2.9)))

    def test_family_and_params_must_match(self):
        with pytest.raises(InvalidParameterException):
            normalize(Family.POSITIVE, REFERENCE_NEGATIVE)

    def test_unknown_family(self):
        with pytest.raises(UnknownFamilyException):
            normalize("bimodal", REFERENCE_NEGATIVE)

    def test_no_mass_on_domain(self):
        with pytest.raises(ZeroMassException):
            normalize(Family.NEGATIVE, REFERENCE_NEGATIVE, DomainSpec(400.0, 401.0), QuadratureSpec(32))


class TestTruncationMass:
    def test_matches_fraction_of_untruncated_draws(self):
        for family, params in ((Family.NEGATIVE, REFERENCE_NEGATIVE), (Family.POSITIVE, REFERENCE_POSITIVE)):
            points = draw_shape(family, params, 200_000, np.random.default_rng(11))
            inside = DomainSpec().contains(points[:, 0], points[:, 1]).mean()
            assert truncation_mass(family, params, quad=QuadratureSpec(512)) == pytest.approx(inside, abs=0.01)

    def test_large_domain_keeps_everything(self):
        mass = truncation_mass(Family.POSITIVE, REFERENCE_POSITIVE, DomainSpec(-2.0, 9.0), QuadratureSpec(512))
        assert mass == pytest.approx(1.0, abs=1e-3)


class TestGridded:
    def test_uniform(self):
        density = gridded_density(np.ones((32, 32)))
        assert density.family is Family.GRIDDED
        assert float(density(3.5, 3.5)) == pytest.approx(1.0 / 49.0)
        assert density.mass() == pytest.approx(1.0)

    def test_interpolates_between_cell_centres(self):
        values = np.ones((16, 16))
        values[:, 8:] = 3.0
        density = gridded_density(values)
        nodes = density.native_grid.nodes
        middle = 0.5 * (nodes[7] + nodes[8])
        assert float(density(1.0, middle)) == pytest.approx(2.0 * density.norm_const)

    def test_to_gridded_keeps_values_at_nodes(self, pos_density):
        gridded = to_gridded(pos_density, QuadratureSpec(128))
        nodes = gridded.native_grid.nodes
        x, y = nodes[70], nodes[66]
        assert float(gridded(x, y)) == pytest.approx(float(pos_density(x, y)), rel=1e-3)
        assert gridded.mass() == pytest.approx(1.0)

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidConfigException):
            gridded_density(np.ones((4, 5)))
        with pytest.raises(InvalidParameterException):
            gridded_density(-np.ones((16, 16)))
        with pytest.raises(ZeroMassException):
            gridded_density(np.zeros((16, 16)))


class TestLinearUnits:
    def test_jacobian(self, neg_density):
        x, y = math.exp(0.4), math.exp(0.35)
        expected = float(neg_density(0.4, 0.35)) / (x * y)
        assert to_linear_units(neg_density, (x, y)) == pytest.approx(expected)

    def test_integrates_to_one_in_linear_units(self, pos_density):
        # substitute x = exp(u) back into the integral, on the rule the density was normalized with
        t, w = np.polynomial.legendre.leggauss(256)
        u = 3.5 * (t + 1.0)
        weights = 3.5 * w
        total = 0.0
        for ui, wi in zip(u, weights):
            row = [to_linear_units(pos_density, (math.exp(ui), math.exp(v))) * math.exp(ui + v) for v in u]
            total += wi * float(np.dot(weights, row))
        assert total == pytest.approx(1.0, abs=1e-5)

    def test_requires_positive_coordinates(self, pos_density):
        with pytest.raises(InvalidParameterException):
            to_linear_units(pos_density, (0.0, 2.0))
