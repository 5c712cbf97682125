from fractions import Fraction

import numpy as np
import pytest

from kuokit import (CapabilityError, InputError, PolyMap, SigmaSet, eval_map,
                    jacobian, make_perturbation_family, sample_shells, truncate_jet)
from kuokit.polynomials import Poly

from conftest import central_difference_jacobian, random_polymap


class TestEvalMap:
    def test_germ_condition_at_origin(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        assert eval_map(f, [0.0, 0.0])[0] == 0.0

    def test_hand_evaluated_example(self):
        f = PolyMap.from_strings(["x1^2 + x2^2", "x1*x2"])
        np.testing.assert_allclose(eval_map(f, [1.0, 2.0]), [5.0, 2.0])

    def test_single_monomial(self):
        f = PolyMap.from_strings(["x1^3"])
        assert eval_map(f, [-2.0])[0] == -8.0

    def test_dimension_mismatch(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        with pytest.raises(InputError):
            eval_map(f, [1.0])

    def test_exact_mode_linearity(self):
        f = PolyMap.from_strings(["x1^2 + x2^2", "x1*x2"], exact=True)
        g = PolyMap.from_strings(["x1^3", "x2"], exact=True)
        x = [Fraction(2, 3), Fraction(-1, 7)]
        lhs = (f + g).eval(x)
        rhs = [a + b for a, b in zip(f.eval(x), g.eval(x))]
        assert lhs == rhs


class TestJacobian:
    def test_gradient_of_quadratic(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        np.testing.assert_allclose(jacobian(f, [1.0, 2.0]), [[2.0, 4.0]])

    def test_symbolic_matches_central_differences(self):
        f = PolyMap.from_strings(["x1^2 + x2^2", "x1*x2"])
        J = jacobian(f, [1.0, 2.0])
        np.testing.assert_allclose(J, [[2.0, 4.0], [2.0, 1.0]])
        np.testing.assert_allclose(J, central_difference_jacobian(f, [1.0, 2.0]),
                                   rtol=1e-6)

    def test_singular_point(self):
        f = PolyMap.from_strings(["x1^3"])
        np.testing.assert_allclose(jacobian(f, [0.0]), [[0.0]])

    def test_random_germs_against_finite_differences(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 4))
            p = int(rng.integers(1, n + 1))
            f = random_polymap(rng, n, p, max_degree=5)
            x = rng.uniform(-1, 1, n)
            J = jacobian(f, x)
            fd = central_difference_jacobian(f, x)
            scale = np.maximum(np.abs(J), 1.0)
            assert np.max(np.abs(J - fd) / scale) < 1e-6

    def test_batch_matches_single(self, rng):
        f = random_polymap(rng, 2, 2, max_degree=4)
        pts = rng.uniform(-1, 1, (20, 2))
        batch = f.jacobian_batch(pts)
        for i, x in enumerate(pts):
            np.testing.assert_allclose(batch[i], f.jacobian(x), rtol=1e-13)


class TestTruncateJet:
    def test_drops_higher_degree(self):
        f = PolyMap.from_strings(["x1^2 + x2^3"])
        assert truncate_jet(f, 2).to_strings() == ["x1^2"]

    def test_identity_when_degree_small(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        assert truncate_jet(f, 2).to_strings() == f.to_strings()

    def test_degree_filter(self):
        f = PolyMap.from_strings(["x1 + x1^2*x2 + x2^4"])
        assert truncate_jet(f, 3).to_strings() == ["x1^2*x2 + x1"]

    def test_idempotent(self):
        f = PolyMap.from_strings(["x1 + x1^3 + x2^4 + x1*x2"])
        once = truncate_jet(f, 2)
        twice = truncate_jet(once, 2)
        assert once.components == twice.components


class TestPolyMapValidation:
    def test_rejects_p_greater_than_n(self):
        with pytest.raises(InputError, match="n >= p required"):
            PolyMap.from_strings(["x1", "x1^2"], n=1)

    def test_rejects_nonzero_constant_term(self):
        with pytest.raises(InputError):
            PolyMap([Poly(2, {(0, 0): 1.0, (1, 0): 1.0})])


class TestPerturbationFamily:
    def test_origin_generators_are_all_degree3_monomials(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        sigma = SigmaSet.origin(2)
        fam = make_perturbation_family(f, sigma, 2, [0.1])
        assert len(fam.generators) == 4  # x^3, x^2 y, x y^2, y^3 times e1
        degrees = {g.components[0].total_degree() for g in fam.generators}
        assert degrees == {3}
        texts = {g.components[0].to_string() for g in fam.generators}
        assert texts == {"x1^3", "x1^2*x2", "x1*x2^2", "x2^3"}

    def test_codomain_copies_for_p2(self):
        f = PolyMap.from_strings(["x1^2", "x2^2"])
        fam = make_perturbation_family(f, SigmaSet.origin(2), 2, [1.0])
        assert len(fam.generators) == 8
        assert fam.n_members() == 9  # base + 8 generators at one amplitude

    def test_subspace_generators_use_normal_coordinate_only(self):
        f = PolyMap.from_strings(["x1^3"], n=2)
        sigma = SigmaSet.subspace([[0.0], [1.0]])  # Sigma = {x1 = 0}
        fam = make_perturbation_family(f, sigma, 2, [1.0])
        assert len(fam.generators) == 1
        gen = fam.generators[0].components[0]
        # the single degree-3 monomial in the normal coordinate, i.e. +-x1^3
        assert set(gen.terms) == {(3, 0)}
        assert abs(abs(gen.coefficient((3, 0))) - 1.0) < 1e-12

    def test_polynomial_sigma_is_a_capability_error(self):
        f = PolyMap.from_strings(["x1^2"], n=2)
        sigma = SigmaSet.zero_set(["x2 - x1^2"], ambient_dim=2)
        with pytest.raises(CapabilityError, match="check_certificate"):
            make_perturbation_family(f, sigma, 2, [1.0])

    def test_flatness_bound_holds_pointwise(self, rng):
        sigma = SigmaSet.subspace([[0.0], [1.0]])
        f = PolyMap.from_strings(["x1^2"], n=2)
        fam = make_perturbation_family(f, sigma, 2, [1.0])
        sample = sample_shells(sigma, 0.5, 6, 64, seed=1)
        worst = fam.check_flatness_on(sample.all_points(), sample.all_distances())
        assert worst <= 1.0 + 1e-9

    def test_generators_have_zero_r_jet_for_origin(self):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        fam = make_perturbation_family(f, SigmaSet.origin(2), 2, [0.5])
        for gen in fam.generators:
            assert all(c.is_zero() for c in truncate_jet(gen, 2).components)
        for label, g in fam.members():
            assert truncate_jet(g, 2).to_strings() == truncate_jet(f, 2).to_strings()
