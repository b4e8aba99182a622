import numpy as np
import pytest

from minimax_bench import theory
from minimax_bench.algorithms import (
    Algo,
    AlgorithmConfig,
    initial_state,
    run,
    step_alex,
    step_alt,
)
from minimax_bench.lyapunov import (
    LyapunovKind,
    alex_validity_lower,
    alt_validity_lower,
    kind_for,
    verify_contraction,
)
from minimax_bench.problems import (
    JointPoint,
    ProblemParams,
    QuadraticGame,
    nash_equilibrium,
    random_quadratic,
    worst_case_6d,
)

WC = ProblemParams(0.2, 0.2, 1.0, 1.0, 1.0)


def test_psi_sim_values_and_scaling():
    kind = LyapunovKind("Sim", alpha=0.5, beta=0.5)
    q = worst_case_6d(WC)
    z_star = nash_equilibrium(q)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=0.5, beta=0.5)

    at_nash = initial_state(cfg, z_star)
    assert kind.psi_sim(at_nash, z_star) == 0.0

    x = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0])
    s = initial_state(cfg, JointPoint(x, y))
    assert kind.psi_sim(s, z_star) == pytest.approx(4.0)

    for t in (0.5, 2.0, 7.0):
        st = initial_state(cfg, JointPoint(t * x, t * y))
        assert kind.psi_sim(st, z_star) == pytest.approx(t * t * 4.0)

    # validity: Psi >= min(1/a, 1/b) ||z - z*||^2
    rng = np.random.default_rng(0)
    kind2 = LyapunovKind("Sim", alpha=0.2, beta=0.7)
    A = min(1 / 0.2, 1 / 0.7)
    for _ in range(20):
        z = JointPoint(rng.standard_normal(3), rng.standard_normal(3))
        s = initial_state(cfg, z)
        assert kind2.psi_sim(s, z_star) >= A * z.dist_sq(z_star) * (1 - 1e-12)


def test_psi_alt_hand_value():
    # 1+1-dim quadratic, alpha = beta = 0.25, start (2, 1):
    # grad_x = 2.5, x1 = 1.375, Psi0 = 12 + 6 + 3*1.375^2 - 0.25*0.75*2.5^2 = 22.5
    q = QuadraticGame(np.array([[1.0]]), np.array([[0.5]]), np.array([[1.0]]))
    cfg = AlgorithmConfig(algo=Algo.AltGDA, alpha=0.25, beta=0.25)
    s0 = initial_state(cfg, JointPoint([2.0], [1.0]))
    s1 = step_alt(s0, q, cfg)
    kind = kind_for(cfg, q)
    assert kind.psi_alt(s0, s1, q, nash_equilibrium(q)) == pytest.approx(22.5)


def test_psi_alt_zero_at_nash():
    q = worst_case_6d(WC)
    z_star = nash_equilibrium(q)
    cfg = AlgorithmConfig(algo=Algo.AltGDA, alpha=0.25, beta=0.25)
    s0 = initial_state(cfg, z_star)
    s1 = step_alt(s0, q, cfg)
    assert kind_for(cfg, q).psi_alt(s0, s1, q, z_star) == 0.0


def test_psi_alex_zero_at_nash_and_gamma_delta_one_limit():
    q = worst_case_6d(WC)
    z_star = nash_equilibrium(q)
    cfg = AlgorithmConfig(algo=Algo.AlexGDA, alpha=0.2, beta=0.2, gamma=2.0, delta=2.0)
    kind = kind_for(cfg, q)
    s0 = initial_state(cfg, z_star)
    s1 = step_alex(s0, q, cfg)
    s2 = step_alex(s1, q, cfg)
    assert kind.psi_alex0(s0, s1, q, z_star) == 0.0
    assert kind.psi_alex(s0, s1, s2, q, z_star) == 0.0

    # as gamma, delta -> 1+ the two correction terms vanish
    rng = np.random.default_rng(1)
    z0 = JointPoint(rng.standard_normal(3), rng.standard_normal(3))
    one = 1.0 + 1e-12
    cfg1 = AlgorithmConfig(algo=Algo.AlexGDA, alpha=0.2, beta=0.2, gamma=one, delta=one)
    k1 = kind_for(cfg1, q)
    t0 = initial_state(cfg1, z0)
    t1 = step_alex(t0, q, cfg1)
    t2 = step_alex(t1, q, cfg1)
    got = k1.psi_alex(t0, t1, t2, q, z_star)
    a = 0.2
    gx = q.grad_x(t1.x, t1.tilde_y)
    reduced = (
        t1.x @ t1.x / a + 2 * (t1.y @ t1.y) / a + t2.x @ t2.x / a - a * gx @ gx
    )
    assert got == pytest.approx(reduced, rel=1e-9)


def test_kind_validation():
    with pytest.raises(ValueError):
        LyapunovKind("Alt", alpha=0.25, beta=0.25)  # missing params
    p = ProblemParams(1.0, 1.0, 2.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        LyapunovKind("Alt", alpha=1.5, beta=0.25, params=p)  # alpha >= 1/mu_x
    with pytest.raises(ValueError):
        LyapunovKind("Alex", alpha=0.25, beta=0.25, params=p)  # missing gamma/delta
    with pytest.raises(ValueError):
        LyapunovKind("Huh", alpha=0.1, beta=0.1)
    cfg = AlgorithmConfig(algo=Algo.EG, alpha=0.1, beta=0.1)
    with pytest.raises(ValueError):
        kind_for(cfg, worst_case_6d(WC))


def test_contraction_sim_prescribed_holds():
    rng = np.random.default_rng(2)
    for seed in range(5):
        q = random_quadratic(4, 5, ProblemParams(0.3, 0.4, 2.0, 3.0, 1.2), 0.2, seed)
        pres = theory.sim_prescription(q.params)
        cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=pres.alpha, beta=pres.beta)
        z0 = JointPoint(rng.standard_normal(4), rng.standard_normal(5))
        tr = run(q, cfg, z0, 1e-26, 300, keep_states=True)
        rep = verify_contraction(tr, kind_for(cfg, q), q, pres.contraction_r)
        assert rep.holds, rep
        assert rep.worst_ratio <= pres.contraction_r + 1e-10


def test_contraction_violated_with_doubled_alpha():
    g = worst_case_6d(WC)
    pres = theory.sim_prescription(WC)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=2 * pres.alpha, beta=pres.beta)
    tr = run(g, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-20, 200, keep_states=True)
    kind = LyapunovKind("Sim", cfg.alpha, cfg.beta)
    rep = verify_contraction(tr, kind, g, pres.contraction_r)
    assert not rep.holds
    assert rep.first_violation is not None


def test_contraction_vacuous_at_nash():
    q = worst_case_6d(WC)
    pres = theory.sim_prescription(WC)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=pres.alpha, beta=pres.beta)
    tr = run(q, cfg, nash_equilibrium(q), 1e-20, 50, keep_states=True)
    rep = verify_contraction(tr, kind_for(cfg, q), q, pres.contraction_r)
    assert rep.holds and rep.worst_ratio == 0.0 and rep.first_violation is None


def test_contraction_requires_states():
    q = worst_case_6d(WC)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=0.1, beta=0.1)
    tr = run(q, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-12, 10)
    with pytest.raises(ValueError):
        verify_contraction(tr, kind_for(cfg, q), q, 0.9)


def test_validity_lower_bounds_along_runs():
    rng = np.random.default_rng(3)
    for seed in range(5):
        q = random_quadratic(3, 4, ProblemParams(0.3, 0.4, 2.0, 3.0, 1.2), 0.2, seed)
        z0 = JointPoint(rng.standard_normal(3), rng.standard_normal(4))
        z_star = nash_equilibrium(q)

        pres = theory.alt_prescription(q.params)
        cfg = AlgorithmConfig(algo=Algo.AltGDA, alpha=pres.alpha, beta=pres.beta)
        tr = run(q, cfg, z0, 1e-26, 150, keep_states=True)
        kind = kind_for(cfg, q)
        for k in range(len(tr.states) - 1):
            psi = kind.psi_alt(tr.states[k], tr.states[k + 1], q, z_star)
            low = alt_validity_lower(kind, tr.states[k], tr.states[k + 1], z_star)
            assert psi >= low * (1 - 1e-9)

        pres = theory.alex_prescription(q.params, 2.0, 2.0)
        cfg = AlgorithmConfig(
            algo=Algo.AlexGDA, alpha=pres.alpha, beta=pres.beta, gamma=2.0, delta=2.0
        )
        tr = run(q, cfg, z0, 1e-26, 150, keep_states=True)
        kind = kind_for(cfg, q)
        psis = kind.values_along(tr.states, q, z_star)
        for k, psi in enumerate(psis):
            low = alex_validity_lower(kind, tr.states[k], tr.states[k + 1], z_star)
            assert psi >= low * (1 - 1e-9)


def test_report_json():
    q = worst_case_6d(WC)
    pres = theory.sim_prescription(WC)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=pres.alpha, beta=pres.beta)
    tr = run(q, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-20, 50, keep_states=True)
    rep = verify_contraction(tr, kind_for(cfg, q), q, pres.contraction_r)
    import json

    doc = json.loads(rep.to_json())
    assert set(doc) == {"kind", "r", "holds", "worst_ratio", "first_violation"}
    assert doc["holds"] is True


def test_run_records_lyapunov_column():
    q = worst_case_6d(WC)
    pres = theory.sim_prescription(WC)
    cfg = AlgorithmConfig(algo=Algo.SimGDA, alpha=pres.alpha, beta=pres.beta)
    tr = run(q, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-20, 30)
    assert all(r.lyapunov is not None for r in tr.records)
    ratios = [
        tr.records[k + 1].lyapunov / tr.records[k].lyapunov
        for k in range(len(tr.records) - 1)
    ]
    assert max(ratios) <= pres.contraction_r + 1e-10

    cfg = AlgorithmConfig(algo=Algo.AltGDA, alpha=0.1, beta=0.1)
    tr = run(q, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-20, 30)
    assert all(r.lyapunov is not None for r in tr.records[:-1])
    assert tr.records[-1].lyapunov is None

    cfg = AlgorithmConfig(algo=Algo.AlexGDA, alpha=0.1, beta=0.1, gamma=2.0, delta=2.0)
    tr = run(q, cfg, JointPoint(np.ones(3), np.ones(3)), 1e-20, 30)
    assert all(r.lyapunov is not None for r in tr.records[:-1])
