import numpy as np
import pytest

from hessfree.oracles import DomainSampler, builtin, fd_jacobian
from hessfree.slices import (
    Functional,
    derivative_norm_via_functionals,
    difference_matrix,
    functional_sup_ratio,
    reconstruct_derivative_action,
    slice_gradient_map,
    slice_map,
    slice_smoothness_check,
    unit_functional,
    unit_functional_set,
)


def analytic_poly_jacobian(x):
    # F(x1, x2) = (x1^2, x1 x2)
    return np.array([[2 * x[0], 0.0], [x[1], x[0]]])


class TestFunctional:
    def test_unit_enforced(self):
        f = unit_functional(np.array([3.0, 4.0]))
        assert f.norm == pytest.approx(1.0, abs=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            unit_functional(np.zeros(2))

    def test_application(self):
        f = Functional(np.array([0.5, 0.5]))
        assert f(np.array([4.0, 6.0])) == pytest.approx(5.0)

    def test_sampling_includes_basis(self):
        fs = unit_functional_set(2, 10, np.random.default_rng(0))
        coeffs = np.stack([f.coeffs for f in fs])
        for e in np.eye(2):
            assert any(np.array_equal(c, e) for c in coeffs)
            assert any(np.array_equal(c, -e) for c in coeffs)
        norms = np.sqrt(np.einsum("ij,ij->i", coeffs, coeffs))
        assert np.all(norms <= 1 + 1e-12)


class TestSliceMap:
    def test_first_component(self):
        F = builtin("poly_map_2d")
        phi = slice_map(F, Functional(np.array([1.0, 0.0])))
        assert phi(np.array([2.0, 3.0])) == pytest.approx(4.0)

    def test_zero_functional(self):
        F = builtin("poly_map_2d")
        phi = slice_map(F, Functional(np.array([0.0, 0.0])))
        assert phi(np.array([2.0, 3.0])) == 0.0

    def test_mixed_functional(self):
        F = builtin("poly_map_2d")
        phi = slice_map(F, Functional(np.array([0.5, 0.5])))
        assert phi(np.array([2.0, 3.0])) == pytest.approx(5.0)

    def test_dim_mismatch(self):
        F = builtin("poly_map_2d")
        with pytest.raises(ValueError, match="dim"):
            slice_map(F, Functional(np.array([1.0, 0.0, 0.0])))

    def test_batched(self):
        F = builtin("poly_map_2d")
        phi = slice_map(F, Functional(np.array([1.0, 0.0])))
        np.testing.assert_allclose(
            phi(np.array([[2.0, 3.0], [1.0, 1.0]])), [4.0, 1.0]
        )


class TestSliceGradientMap:
    def test_against_analytic(self):
        F = builtin("poly_map_2d")
        ystar = unit_functional(np.array([1.0, 2.0]))
        grad = slice_gradient_map(F, ystar)
        rng = np.random.default_rng(42)
        for _ in range(20):
            x = rng.uniform(-5, 5, 2)
            expected = analytic_poly_jacobian(x).T @ ystar.coeffs
            np.testing.assert_allclose(grad(x), expected, rtol=1e-7, atol=1e-8)

    def test_batch_matches_single(self):
        F = builtin("separable_cubic", [3.0, 1.0]).gradient_oracle()
        grad = slice_gradient_map(F, unit_functional(np.array([1.0, 1.0])))
        pts = np.random.default_rng(1).uniform(-5, 5, (6, 2))
        batched = grad(pts)
        for i, p in enumerate(pts):
            np.testing.assert_array_equal(batched[i], grad(p))


class TestSliceSmoothnessCheck:
    def test_calibrated_gradient_map_passes(self):
        o = builtin("separable_cubic", [3.0, 1.0])
        rep = slice_smoothness_check(
            o.gradient_oracle(), 3.0, 8, DomainSampler(2), np.random.default_rng(42)
        )
        assert rep.passed

    def test_affine_with_floored_l(self):
        rep = slice_smoothness_check(
            builtin("affine"), 0.0, 8, DomainSampler(2), np.random.default_rng(42)
        )
        assert rep.passed

    def test_understated_constant_fails_with_witness(self):
        # true constant of poly_map_2d is 2; the e1 slice x1^2 already has
        # a 2-Lipschitz gradient, violating the claimed 1
        rep = slice_smoothness_check(
            builtin("poly_map_2d"), 1.0, 8, DomainSampler(2), np.random.default_rng(42)
        )
        assert not rep.passed
        w = rep.witness
        assert w is not None
        assert w.grad_dist > w.bound


class TestReconstructDerivativeAction:
    def test_affine_exact(self):
        F = builtin("affine")
        a = np.array([[2.0, -1.0], [0.5, 1.0]])
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.uniform(-5, 5, 2)
            h = rng.standard_normal(2)
            got = reconstruct_derivative_action(F, x, h)
            ref = a @ h
            assert np.linalg.norm(got - ref) <= 1e-7 * max(1.0, np.linalg.norm(ref))

    def test_poly_map_hand_value(self):
        F = builtin("poly_map_2d")
        got = reconstruct_derivative_action(F, np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        np.testing.assert_allclose(got, [2.0, 1.0], rtol=1e-9)

    def test_zero_direction(self):
        F = builtin("poly_map_2d")
        np.testing.assert_array_equal(
            reconstruct_derivative_action(F, np.array([1.0, 1.0]), np.zeros(2)), [0.0, 0.0]
        )

    def test_linearity(self):
        F = builtin("rosenbrock").gradient_oracle()
        rng = np.random.default_rng(42)
        for _ in range(30):
            x = rng.uniform(-3, 3, 2)
            h1 = rng.standard_normal(2)
            h2 = rng.standard_normal(2)
            alpha = float(rng.uniform(0.3, 3.0))
            sum_parts = reconstruct_derivative_action(F, x, h1) + reconstruct_derivative_action(F, x, h2)
            joint = reconstruct_derivative_action(F, x, h1 + h2)
            scale = max(1.0, np.linalg.norm(joint))
            assert np.linalg.norm(joint - sum_parts) <= 1e-6 * scale
            scaled = reconstruct_derivative_action(F, x, alpha * h1)
            ref = alpha * reconstruct_derivative_action(F, x, h1)
            assert np.linalg.norm(scaled - ref) <= 1e-6 * max(1.0, np.linalg.norm(ref))

    @pytest.mark.parametrize(
        "name,params",
        [("affine", []), ("poly_map_2d", []), ("separable_cubic", [3.0, 1.0]),
         ("rosenbrock", []), ("norm_cubed", [])],
    )
    def test_agrees_with_fd_jacobian_vector_product(self, name, params):
        o = builtin(name, params)
        F = o if not hasattr(o, "gradient_oracle") else o.gradient_oracle()
        rng = np.random.default_rng(42)
        for _ in range(30):
            x = rng.uniform(-5, 5, F.dim_in)
            h = rng.standard_normal(F.dim_in)
            rec = reconstruct_derivative_action(F, x, h)
            ref = fd_jacobian(F, x) @ h
            assert np.linalg.norm(rec - ref) <= 1e-5 * max(1.0, np.linalg.norm(ref)), name


class TestDerivativeNormViaFunctionals:
    def test_affine_near_zero(self):
        F = builtin("affine")
        nrm = derivative_norm_via_functionals(
            F, np.array([1.0, 0.0]), np.array([-2.0, 3.0]), rng=np.random.default_rng(0)
        )
        assert nrm <= 1e-6

    def test_poly_map_hand_value(self):
        # difference matrix between (1,0) and (0,0) is diag(2, 1): norm 2
        F = builtin("poly_map_2d")
        nrm = derivative_norm_via_functionals(
            F, np.array([1.0, 0.0]), np.array([0.0, 0.0]), rng=np.random.default_rng(0)
        )
        assert nrm == pytest.approx(2.0, abs=1e-4)

    def test_equal_points(self):
        F = builtin("poly_map_2d")
        assert derivative_norm_via_functionals(F, np.ones(2), np.ones(2)) == 0.0

    def test_lipschitz_transfer_on_zoo(self):
        rng = np.random.default_rng(42)
        for name, params in [("poly_map_2d", []), ("separable_cubic", [3.0, 1.0]),
                             ("cubic1d", [1.0])]:
            o = builtin(name, params)
            F = o if not hasattr(o, "gradient_oracle") else o.gradient_oracle()
            known = F.known_L
            sampler = DomainSampler(F.dim_in)
            for _ in range(100):
                x = sampler.gaussian(rng)
                y = sampler.gaussian(rng)
                dist = np.linalg.norm(x - y)
                if dist < 1e-6:
                    continue
                nrm = derivative_norm_via_functionals(F, x, y, rng=rng)
                assert nrm <= known * dist * (1 + 1e-3), name

    def test_functional_sup_realization_small_codomain(self):
        rng = np.random.default_rng(42)
        # m = 2 and m = 3 cases
        cases = [builtin("poly_map_2d"),
                 builtin("separable_cubic", [3.0, 1.0, 2.0]).gradient_oracle()]
        for F in cases:
            for _ in range(10):
                x = rng.uniform(-5, 5, F.dim_in)
                y = rng.uniform(-5, 5, F.dim_in)
                ratio = functional_sup_ratio(F, x, y, 1000, rng)
                assert ratio >= 0.99

    def test_boundedness_of_slice_derivative(self):
        # ||grad phi_{y*}(x)|| <= ||J(x)|| ||y*|| + FD slack on samples
        F = builtin("poly_map_2d")
        rng = np.random.default_rng(7)
        for _ in range(40):
            x = rng.uniform(-5, 5, 2)
            jac = fd_jacobian(F, x)
            jnorm = np.linalg.norm(jac, 2)
            ystar = unit_functional(rng.standard_normal(2))
            g = slice_gradient_map(F, ystar)(x)
            assert np.linalg.norm(g) <= jnorm * ystar.norm + 1e-6
