import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rfdiv._quad import QuadratureMeasure, gauss_legendre, tensor_rule
from rfdiv.errors import InvalidArgument, QuadratureFailure


class TestGaussLegendre:
    def test_exact_for_low_degree_polynomials(self):
        # 3 nodes integrate degree <= 5 exactly
        x, w = gauss_legendre(3, 0.0, 1.0)
        assert w @ x**4 == pytest.approx(0.2, rel=1e-14)
        assert w @ x**5 == pytest.approx(1.0 / 6.0, rel=1e-14)

    def test_smooth_integrand(self):
        x, w = gauss_legendre(20, -1.0, 2.0)
        assert w @ np.exp(x) == pytest.approx(math.e**2 - math.e**-1, rel=1e-13)

    def test_interval_validation(self):
        with pytest.raises(InvalidArgument):
            gauss_legendre(0, 0.0, 1.0)
        with pytest.raises(InvalidArgument):
            gauss_legendre(4, 1.0, 1.0)


class TestTensorRule:
    def test_weights_sum_to_volume(self):
        for n in (1, 2, 3):
            points, w = tensor_rule(n, 5, -2.0, 2.0)
            assert points.shape == (5**n, n)
            assert w.sum() == pytest.approx(4.0**n, rel=1e-13)

    def test_separable_integrand(self):
        points, w = tensor_rule(2, 4, -1.0, 1.0)
        vals = points[:, 0] ** 2 * points[:, 1] ** 2
        assert w @ vals == pytest.approx(4.0 / 9.0, rel=1e-13)


class TestQuadratureMeasure:
    def test_uniform_density_gives_equal_weights(self):
        mu = QuadratureMeasure.from_log_density(
            lambda pts: np.zeros(pts.shape[0]), n=2, a=2.0, nodes=8
        )
        assert mu.weights.sum() == pytest.approx(1.0, rel=1e-14)
        assert mu.points.shape == (64, 2)
        # symmetric measure: all first moments vanish
        assert_allclose(mu.expect(mu.points), 0.0, atol=1e-14)

    def test_gaussian_second_moment(self):
        mu = QuadratureMeasure.from_log_density(
            lambda pts: -0.5 * np.sum(pts**2, axis=1), n=1, a=2.0, nodes=60
        )
        # frozen: E[x^2] of the standard normal truncated to [-2, 2]
        assert mu.expect(mu.points[:, 0] ** 2) == pytest.approx(
            0.77374130354992324718, rel=1e-12
        )

    def test_matrix_expectation(self):
        mu = QuadratureMeasure.from_log_density(
            lambda pts: np.zeros(pts.shape[0]), n=1, a=1.0, nodes=16
        )
        vals = np.column_stack([mu.points[:, 0], mu.points[:, 0] ** 2])
        out = mu.expect(vals)
        assert out.shape == (2,)
        assert out[0] == pytest.approx(0.0, abs=1e-15)
        assert out[1] == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_vanishing_density_rejected(self):
        with pytest.raises(QuadratureFailure):
            QuadratureMeasure.from_log_density(
                lambda pts: np.full(pts.shape[0], -np.inf), n=1, a=1.0, nodes=4
            )

    def test_validation(self):
        pts = np.zeros((3, 1))
        with pytest.raises(InvalidArgument):
            QuadratureMeasure(points=pts, weights=np.array([0.5, 0.6, -0.1]))
        with pytest.raises(InvalidArgument):
            QuadratureMeasure(points=pts, weights=np.array([0.5, 0.6, 0.2]))
        with pytest.raises(InvalidArgument):
            QuadratureMeasure(points=pts, weights=np.array([0.5, 0.5]))
        mu = QuadratureMeasure(points=pts, weights=np.full(3, 1.0 / 3.0))
        with pytest.raises(InvalidArgument):
            mu.expect(np.zeros(5))
