import numpy as np
import pytest

from kuokit import (CapabilityError, EstimationError, PolyMap, ShellSample, SigmaSet,
                    check_certificate, check_dual4, check_gram3, check_K,
                    check_K_delta, check_K_tilde, check_K_tilde_delta, check_KZ,
                    check_singular_containment, estimate_exponent,
                    make_perturbation_family, sample_shells)

from conftest import random_polymap, random_rotation

ORIGIN2 = SigmaSet.origin(2)
ORIGIN1 = SigmaSet.origin(1)
AXIS_SIGMA = SigmaSet.subspace([[0.0], [1.0]])       # Sigma = {x1 = 0}


@pytest.fixture(scope="module")
def sample2():
    return sample_shells(ORIGIN2, 0.5, 12, 512, seed=101)


@pytest.fixture(scope="module")
def sample1():
    return sample_shells(ORIGIN1, 0.5, 12, 256, seed=7)


@pytest.fixture(scope="module")
def sample_axis():
    return sample_shells(AXIS_SIGMA, 0.5, 12, 256, seed=13)


class TestEstimateExponent:
    def test_power_of_binning_variable(self, sample2):
        est = estimate_exponent(sample2, lambda pts: np.linalg.norm(pts, axis=1) ** 2)
        assert est.slope == pytest.approx(2.0, abs=0.02)
        assert est.r2 > 0.99

    def test_cubic_monomial(self, sample1):
        f = PolyMap.from_strings(["x1^3"])
        est = estimate_exponent(sample1, f.norm_batch)
        assert est.slope == pytest.approx(3.0, abs=0.05)

    def test_constant_field(self, sample2):
        est = estimate_exponent(sample2, lambda pts: np.ones(pts.shape[0]))
        assert est.slope == pytest.approx(0.0, abs=0.01)
        assert est.r2 == pytest.approx(1.0)  # flat data fitted by a flat line

    def test_too_few_shells_is_an_error(self):
        small = sample_shells(ORIGIN2, 0.5, 3, 16, seed=0)
        with pytest.raises(EstimationError):
            estimate_exponent(small, lambda pts: np.ones(pts.shape[0]))


class TestCheckK:
    def test_radial_quadratic_holds(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        v = check_K(f, ORIGIN2, 2, sample=sample2)
        assert v.status == "holds"
        assert v.margin == pytest.approx(3.0, abs=1e-9)

    def test_degenerate_direction_fails_with_axis_witness(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        v = check_K(f, ORIGIN2, 2, sample=sample2)
        assert v.status == "fails"
        x = np.asarray(v.witnesses[0]["point"])
        assert abs(x[0]) <= 1e-3 * np.linalg.norm(x)

    def test_relative_cubic_holds(self, sample_axis):
        f = PolyMap.from_strings(["x1^3"], n=2)
        v = check_K(f, AXIS_SIGMA, 3, sample=sample_axis)
        assert v.status == "holds"
        assert v.margin == pytest.approx(4.0, abs=1e-9)

    def test_exponent_shortfall_fails_by_slope(self, sample1):
        # kappa = 3x^2 ~ d^2 but the target is d^{r-1} = d: the ratio decays
        f = PolyMap.from_strings(["x1^3"])
        v = check_K(f, ORIGIN1, 2, sample=sample1)
        assert v.status == "fails"


class TestCheckKTilde:
    def test_holds_with_margin_three(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        v = check_K_tilde(f, ORIGIN2, 2, sample=sample2)
        assert v.status == "holds"
        assert v.margin == pytest.approx(3.0, abs=1e-9)

    def test_fails_on_axis(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        assert check_K_tilde(f, ORIGIN2, 2, sample=sample2).status == "fails"

    def test_linear_germ_holds(self, sample1):
        f = PolyMap.from_strings(["x1"])
        v = check_K_tilde(f, ORIGIN1, 1, sample=sample1)
        assert v.status == "holds"
        assert v.margin == pytest.approx(2.0, abs=1e-9)


class TestEquivalenceQuartet:
    CHECKS = (check_K, check_K_tilde, check_gram3, check_dual4)

    def statuses(self, f, sigma, r, sample):
        out = []
        for check in self.CHECKS:
            if check is check_K:
                out.append(check(f, sigma, r, sample=sample).status)
            else:
                out.append(check(f, sigma, r, sample=sample).status)
        return out

    def test_positive_germ_agreement(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        assert self.statuses(f, ORIGIN2, 2, sample2) == ["holds"] * 4

    def test_negative_germ_agreement(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        assert self.statuses(f, ORIGIN2, 2, sample2) == ["fails"] * 4

    def test_p1_gram_ratio_reduces_to_gradient_norm(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        a = check_K_tilde(f, ORIGIN2, 2, sample=sample2)
        b = check_gram3(f, ORIGIN2, 2, sample=sample2)
        assert a.estimate.per_shell_infima == b.estimate.per_shell_infima

    def test_submersion_dual4_margin(self, sample2):
        f = PolyMap.from_strings(["x1", "x2"])
        v = check_dual4(f, ORIGIN2, 1, sample=sample2)
        assert v.status == "holds"
        assert v.margin >= 1.0 - 1e-9

    def test_random_germs_never_split_between_holds_and_fails(self, rng, sample2):
        for _ in range(8):
            f = random_polymap(rng, 2, int(rng.integers(1, 3)), max_degree=3)
            statuses = set(self.statuses(f, ORIGIN2, 2, sample2))
            assert not ({"holds", "fails"} <= statuses), f.to_strings()


class TestScaleCoherence:
    def test_scaling_moves_margins_not_statuses(self, sample2):
        base = PolyMap.from_strings(["x1^2 + x2^2"])
        v1 = check_K_tilde(base, ORIGIN2, 2, sample=sample2)
        for c in (0.25, 4.0):
            v2 = check_K_tilde(base.scaled(c), ORIGIN2, 2, sample=sample2)
            assert v2.status == v1.status
            assert v2.margin == pytest.approx(c * v1.margin, rel=1e-9)
            assert v2.estimate.slope == pytest.approx(v1.estimate.slope, abs=1e-9)


class TestRotationInvariance:
    def test_statuses_and_infima_match_on_rotated_inputs(self, rng, sample2):
        f = PolyMap.from_strings(["x1^2 + 0.5*x2^3 + x1*x2"])
        base = check_K_tilde(f, ORIGIN2, 2, sample=sample2)
        for _ in range(3):
            R = random_rotation(rng, 2)
            f_rot = f.rotated(R)
            rotated_sample = ShellSample.from_points(
                ORIGIN2, sample2.alpha, sample2.n_shells,
                sample2.all_points() @ R,   # x' = R^-1 x rows
            )
            v = check_K_tilde(f_rot, ORIGIN2, 2, sample=rotated_sample)
            assert v.status == base.status
            for (r1, i1), (r2, i2) in zip(base.estimate.per_shell_infima,
                                          v.estimate.per_shell_infima):
                assert r1 == pytest.approx(r2, rel=1e-12)
                assert i1 == pytest.approx(i2, rel=1e-6)


class TestDeltaFamily:
    def test_radial_quadratic_holds_vacuously(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        fam = make_perturbation_family(f, ORIGIN2, 2, [1.0])
        v = check_K_delta(f, ORIGIN2, 2, fam, sample=sample2)
        assert v.status == "holds"
        assert any("family-relative" in note for note in v.notes)

    def test_axis_degenerate_fails(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        fam = make_perturbation_family(f, ORIGIN2, 2, [1.0])
        assert check_K_delta(f, ORIGIN2, 2, fam, sample=sample2).status == "fails"
        assert check_K_tilde_delta(f, ORIGIN2, 2, fam, sample=sample2).status == "fails"

    def test_exact_order_r_kappa_fails(self, sample1):
        # kappa = 3x^2 forces exponent r, not r - delta
        f = PolyMap.from_strings(["x1^3"])
        fam = make_perturbation_family(f, ORIGIN1, 2, [1.0])
        v = check_K_delta(f, ORIGIN1, 2, fam, sample=sample1)
        assert v.status == "fails"

    def test_k_tilde_delta_holds_with_delta_one(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        fam = make_perturbation_family(f, ORIGIN2, 2, [1.0])
        v = check_K_tilde_delta(f, ORIGIN2, 2, fam, sample=sample2)
        assert v.status == "holds"
        assert v.delta_hat == pytest.approx(1.0, abs=0.05)

    def test_variant_statuses_agree_on_random_germs(self, rng, sample2):
        # the kappa(df) and kappa(dg) regressions must grade members alike
        agreements = 0
        for _ in range(5):
            f = random_polymap(rng, 2, 1, max_degree=4)
            fam = make_perturbation_family(f, ORIGIN2, 2, [0.5])
            v = check_K_tilde_delta(f, ORIGIN2, 2, fam, sample=sample2)
            assert not any("variants disagree" in note for note in v.notes)
            agreements += 1
        assert agreements == 5

    def test_one_way_implication(self, sample2, sample1, sample_axis):
        # whenever K~delta holds, K_delta must not fail
        cases = [
            (PolyMap.from_strings(["x1^2 + x2^2"]), ORIGIN2, 2, sample2),
            (PolyMap.from_strings(["x1"]), ORIGIN1, 1, sample1),
            (PolyMap.from_strings(["x1^3"], n=2), AXIS_SIGMA, 3, sample_axis),
        ]
        for f, sigma, r, sample in cases:
            fam = make_perturbation_family(f, sigma, r, [1.0])
            tilde = check_K_tilde_delta(f, sigma, r, fam, sample=sample)
            if tilde.status == "holds":
                kd = check_K_delta(f, sigma, r, fam, sample=sample)
                assert kd.status != "fails"

    def test_missing_family_is_a_capability_error(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        with pytest.raises(CapabilityError, match="check_certificate"):
            check_K_delta(f, ORIGIN2, 2, None, sample=sample2)


class TestKZ:
    def test_divergent_ratio_holds(self, sample1):
        f = PolyMap.from_strings(["x1^2"])
        v = check_KZ(f, ORIGIN1, 2, sample=sample1)
        assert v.status == "holds"
        assert v.estimate.slope == pytest.approx(-1.0, abs=0.05)

    def test_bounded_ratio_fails(self, sample1):
        f = PolyMap.from_strings(["x1^3"])
        v = check_KZ(f, ORIGIN1, 2, sample=sample1)
        assert v.status == "fails"
        assert v.estimate.slope == pytest.approx(0.0, abs=0.05)

    def test_submersion_holds(self, sample2):
        f = PolyMap.from_strings(["x1", "x2"])
        assert check_KZ(f, ORIGIN2, 1, sample=sample2).status == "holds"

    def test_agrees_with_k_tilde_delta(self, sample1):
        f = PolyMap.from_strings(["x1^3"])
        fam = make_perturbation_family(f, ORIGIN1, 2, [1.0])
        kz = check_KZ(f, ORIGIN1, 2, sample=sample1)
        ktd = check_K_tilde_delta(f, ORIGIN1, 2, fam, sample=sample1)
        assert kz.status == ktd.status == "fails"


class TestCertificate:
    def test_radial_quadratic(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        v = check_certificate(f, ORIGIN2, 2, sample=sample2)
        assert v.status == "holds"
        assert v.delta_hat == pytest.approx(1.0, abs=0.05)

    def test_boundary_slope_is_inconclusive(self, sample1):
        # f = x^{r+1} gives LHS ~ d^{r+1} exactly: no strict delta exists and
        # the tie is never graded holds
        f = PolyMap.from_strings(["x1^3"])
        v = check_certificate(f, ORIGIN1, 2, sample=sample1)
        assert v.status == "inconclusive"
        assert v.estimate.slope == pytest.approx(3.0, abs=0.05)
        assert any("boundary" in note for note in v.notes)

    def test_relative_boundary_case(self, sample_axis):
        f = PolyMap.from_strings(["x1^3"], n=2)
        v = check_certificate(f, AXIS_SIGMA, 2, sample=sample_axis)
        assert v.status == "inconclusive"
        assert v.estimate.slope == pytest.approx(3.0, abs=0.05)

    def test_collapse_fails(self, sample2):
        f = PolyMap.from_strings(["x1^2"], n=2)
        assert check_certificate(f, ORIGIN2, 2, sample=sample2).status == "fails"


class TestSingularContainment:
    def test_radial_quadratic_holds(self, sample2):
        f = PolyMap.from_strings(["x1^2 + x2^2"])
        v = check_singular_containment(f, ORIGIN2, 2, sample=sample2)
        assert v.status == "holds"

    def test_crafted_axis_points_fail(self):
        f = PolyMap.from_strings(["x1^2"], n=2)
        crafted = np.array([[0.0, 0.4], [0.0, 0.2], [0.3, 0.1]])
        sample = ShellSample.from_points(ORIGIN2, 0.5, 4, crafted)
        v = check_singular_containment(f, ORIGIN2, 2, sample=sample)
        assert v.status == "fails"
        assert all(abs(w["point"][0]) < 1e-12 for w in v.witnesses)

    def test_submersion_vacuously_holds(self, sample2):
        f = PolyMap.from_strings(["x1", "x2"])
        v = check_singular_containment(f, ORIGIN2, 1, sample=sample2)
        assert v.status == "holds"
