import json
import math

import numpy as np
import pytest

from minimax_bench.problems import ProblemParams
from minimax_bench.theory import (
    alex_constants,
    alex_prescription,
    alt_prescription,
    bilinear_cgd,
    bilinear_optimal_delta1,
    bilinear_step_region,
    schur_cubic,
    schur_quartic,
    sim_prescription,
)


def random_params(rng):
    mu_x, mu_y = rng.uniform(0.05, 1.0, 2)
    kx, ky = rng.uniform(1.0, 100.0, 2)
    kxy = rng.uniform(0.0, 100.0)
    return ProblemParams(mu_x, mu_y, mu_x * kx, mu_y * ky, kxy * math.sqrt(mu_x * mu_y))


# ----------------------------------------------------------------------
# simultaneous scheme


def test_sim_perfectly_conditioned_decoupled():
    pres = sim_prescription(ProblemParams(1.0, 1.0, 1.0, 1.0, 0.0))
    assert pres.contraction_r == pytest.approx(0.0, abs=1e-15)


def test_sim_symmetric_unit_case():
    pres = sim_prescription(ProblemParams(1.0, 1.0, 1.0, 1.0, 1.0))
    assert pres.alpha == pytest.approx(0.5, abs=1e-12)
    assert pres.beta == pytest.approx(0.5, abs=1e-12)
    assert pres.contraction_r == pytest.approx(0.5, abs=1e-12)
    assert pres.validity_constant_A == pytest.approx(2.0, abs=1e-10)


def test_sim_complexity_scale_identity():
    # 1/(1-r) = (1/4)(xi + 1/xi)^2
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = random_params(rng)
        pres = sim_prescription(p)
        xi = p.kappa_xy + math.sqrt(max(p.kappa_x, p.kappa_y) + p.kappa_xy**2)
        assert 1.0 / (1.0 - pres.contraction_r) == pytest.approx(
            0.25 * (xi + 1.0 / xi) ** 2, rel=1e-10
        )


# ----------------------------------------------------------------------
# alternating scheme


def test_alt_symmetric_unit_case():
    pres = alt_prescription(ProblemParams(1.0, 1.0, 1.0, 1.0, 1.0))
    assert pres.alpha == pytest.approx(0.5)
    assert pres.beta == pytest.approx(0.5)
    assert pres.contraction_r == pytest.approx(2.0 / 3.0)


def test_alt_third_ratio_below_one_and_A_positive():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = random_params(rng)
        pres = alt_prescription(p)
        third = (1.0 / pres.alpha - p.mu_x) * pres.alpha
        assert 0.0 < third < 1.0
        if p.kappa_x > 1.0:  # degenerate boundary kappa_x = 1 gives A = 0
            assert pres.validity_constant_A > 0.0


def test_alt_step_sizes_within_theorem_bounds():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = random_params(rng)
        pres = alt_prescription(p)
        assert pres.alpha <= 0.5 * min(
            1.0 / p.L_x, math.sqrt(p.mu_y) / (p.L_xy * math.sqrt(p.L_x))
        ) * (1 + 1e-12)
        assert pres.beta <= 0.5 * min(
            1.0 / p.L_y, math.sqrt(p.mu_x) / (p.L_xy * math.sqrt(p.L_y))
        ) * (1 + 1e-12)


# ----------------------------------------------------------------------
# extrapolated scheme


def test_alex_constants_at_two_two():
    c = alex_constants(2.0, 2.0)
    assert (c.C1, c.C2, c.C3, c.C4) == (0.125, 0.125, 0.25, 0.25)
    assert c.C == 0.125


def test_alex_constants_inequality_system():
    # the derived inequalities the contraction proof consumes
    rng = np.random.default_rng(3)
    for _ in range(200):
        g, d = rng.uniform(1.001, 6.0, 2)
        c = alex_constants(g, d)
        assert c.C1 <= (g - 1) / (2 * g * g) + 1e-12
        assert c.C2 <= (d - 1) / (2 * d * d) + 1e-12
        assert g * g * c.C1 + g * (d - 1) * c.C4 <= 2 * (g - 1) + 1e-9
        assert (g + 1) * c.C1 + (3 * d - 2) * c.C4 <= 2 + 1e-9
        assert d * d * c.C2 + (g - 1) * d * c.C3 <= (d - 1) + 1e-9
        assert (d + 1) * c.C2 + (3 * g - 2) * c.C3 <= 2 + 1e-9
        assert c.C1 + (g - 1) * (d - 1) * c.C3 <= 1 + 1e-9
        assert c.C1 + (g - 1) * (d - 1) * c.C4 <= 1 + 1e-9
        assert 4 * c.C3 * c.C4 <= 1 + 1e-9
        assert 4 * (d - 1) * c.C3 * c.C4 <= 1 + 1e-9


def test_alex_constants_vanish_as_gamma_to_one():
    assert alex_constants(1.0 + 1e-9, 2.0).C1 == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        alex_constants(1.0, 2.0)
    with pytest.raises(ValueError):
        alex_constants(2.0, 0.9)


def test_alex_prescription_unit_case():
    pres = alex_prescription(ProblemParams(1.0, 1.0, 1.0, 1.0, 1.0), 2.0, 2.0)
    assert pres.alpha == pytest.approx(0.125)
    assert pres.beta == pytest.approx(0.125)
    assert pres.contraction_r == pytest.approx(0.875)


def test_alex_complexity_scale_identity():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = random_params(rng)
        pres = alex_prescription(p, 2.0, 2.0)
        expect = max(1.0 / (pres.alpha * p.mu_x), 1.0 / (pres.beta * p.mu_y))
        assert 1.0 / (1.0 - pres.contraction_r) == pytest.approx(expect, rel=1e-9)
        assert 0.0 < pres.contraction_r < 1.0


def test_prescriptions_contraction_in_unit_interval():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = random_params(rng)
        for pres in (sim_prescription(p), alt_prescription(p), alex_prescription(p, 2, 2)):
            assert 0.0 <= pres.contraction_r < 1.0


def test_complexity_estimate_formula():
    pres = sim_prescription(ProblemParams(1.0, 1.0, 1.0, 1.0, 1.0))  # r = 0.5
    K = pres.complexity_estimate(psi0=1.0, eps=1e-6)
    expect = math.ceil(math.log(1.0 / (pres.validity_constant_A * 1e-6)) / math.log(2.0))
    assert K == expect
    assert pres.complexity_estimate(psi0=1e-12, eps=1.0) == 0


def test_monotone_ordering_loglog_slopes():
    # at equal parameters, complexity grows ~ kappa^2 (sim), kappa^1.5 (alt), kappa (alex)
    kappas = [10.0, 31.6, 100.0, 316.0, 1000.0]
    costs = {"sim": [], "alt": [], "alex": []}
    for k in kappas:
        p = ProblemParams(1.0, 1.0, k, k, k)
        costs["sim"].append(1.0 / (1.0 - sim_prescription(p).contraction_r))
        costs["alt"].append(1.0 / (1.0 - alt_prescription(p).contraction_r))
        costs["alex"].append(1.0 / (1.0 - alex_prescription(p, 2, 2).contraction_r))

    def slope(ys):
        s = [
            (math.log(y2) - math.log(y1)) / (math.log(k2) - math.log(k1))
            for (k1, y1), (k2, y2) in zip(zip(kappas, ys), zip(kappas[1:], ys[1:]))
        ]
        return sorted(s)[len(s) // 2]

    assert abs(slope(costs["sim"]) - 2.0) <= 0.15
    assert abs(slope(costs["alt"]) - 1.5) <= 0.15
    assert abs(slope(costs["alex"]) - 1.0) <= 0.15


# ----------------------------------------------------------------------
# bilinear results


def test_step_region_branches():
    assert bilinear_step_region(1.0, 1.0) is None
    assert bilinear_step_region(1.5, 1.5) == pytest.approx(1.0)
    # second branch: gamma=3, delta=0.5
    assert 4 * 3 * 0.5 - 3 * 3.5 + 2 < 0
    assert bilinear_step_region(3.0, 0.5) == pytest.approx(0.6)


def test_cgd_values_and_symmetry():
    assert bilinear_cgd(2.0, 2.0) == pytest.approx(16.0)
    assert bilinear_cgd(3.0, 3.0) == pytest.approx(
        max(25.0 / 2.0, 0.0, 2.0 * 144.0 / 4.0)
    )
    with pytest.raises(ValueError):
        bilinear_cgd(1.0, 1.0)


def test_cgd_step_inside_region():
    rng = np.random.default_rng(6)
    for _ in range(200):
        g = rng.uniform(1.0, 5.0)
        d = rng.uniform(1.0, 5.0)
        if g + d <= 2.0:
            continue
        ab = 1.0 / bilinear_cgd(g, d)  # L_xy = 1
        bound = bilinear_step_region(g, d)
        assert ab < bound


def test_bilinear_optimal_delta1_values():
    ab, g, rate = bilinear_optimal_delta1(2.0, 1.0)
    assert ab == pytest.approx(0.1)
    assert g == pytest.approx(5.0)
    assert rate == pytest.approx(math.sqrt(0.6), abs=1e-12)
    assert bilinear_optimal_delta1(3.0, 3.0)[2] == 0.0
    with pytest.raises(ValueError):
        bilinear_optimal_delta1(1.0, 2.0)


# ----------------------------------------------------------------------
# unit-disk tests


def test_schur_cubic_examples():
    assert schur_cubic(0.0, 0.0, 0.0)
    assert not schur_cubic(0.0, 0.0, -1.1)
    # boundary sweep at alpha*beta*L^2 = 1 for gamma = delta = 1.5
    for phi, expect in ((0.99, True), (1.01, False)):
        a2 = phi * 2.25 - 2.0
        a1 = 1.0 - phi * 1.5
        a0 = phi * 0.25
        assert schur_cubic(a2, a1, a0) is expect


def test_schur_quartic_examples():
    assert schur_quartic(0.0, 0.0, 0.0, 0.0)
    assert not schur_quartic(0.0, 0.0, 0.0, -1.2)
    # the optimistic scheme's quartic at a = b = 0.1, kappa_xy = 1 is stable
    p, q, r, l = 1.6, 0.48, -0.12, 0.02
    assert schur_quartic(-p, q, -r, l)
    roots = np.roots([1.0, -p, q, -r, l])
    assert max(abs(roots)) < 1.0


def test_schur_against_root_oracle():
    rng = np.random.default_rng(7)
    n = 2000  # the full 10^4-draw sweep runs in the acceptance suite
    for _ in range(n):
        a2, a1, a0 = rng.uniform(-3, 3, 3)
        m = max(abs(np.roots([1.0, a2, a1, a0])))
        if 1 - 1e-6 < m < 1 + 1e-6:
            continue
        assert schur_cubic(a2, a1, a0) is bool(m < 1.0)
    for _ in range(n):
        a3, a2, a1, a0 = rng.uniform(-3, 3, 4)
        m = max(abs(np.roots([1.0, a3, a2, a1, a0])))
        if 1 - 1e-6 < m < 1 + 1e-6:
            continue
        assert schur_quartic(a3, a2, a1, a0) is bool(m < 1.0)


def test_prescription_json():
    pres = sim_prescription(ProblemParams(1.0, 1.0, 2.0, 2.0, 1.0))
    doc = json.loads(pres.to_json(psi0=10.0, eps=1e-8))
    assert doc["algo"] == "SimGDA"
    assert set(doc) == {"algo", "alpha", "beta", "r", "A", "K_of"}
    assert doc["K_of"]["K"] == pres.complexity_estimate(10.0, 1e-8)
