import warnings

import numpy as np
import pytest

from airy_nonlocal import (
    DataError,
    DecayReport,
    FunctionSpec,
    SolverConfig,
    eval_longtime,
    make_manufactured_periodic,
    measure_decay,
    solve_homogeneous,
    solve_invp,
)
from airy_nonlocal.longtime import bounded_tail, homogeneous_data, initial_difference

F = FunctionSpec
K1 = F.polynomial([1.0])
BUMP = F.builtin("compatible_bump")
XS = [0.1, 0.3, 0.5, 0.7, 0.9]


def test_bounded_tail_rule():
    assert bounded_tail([])
    assert bounded_tail([5.0, 1.0, 1.0, 3.9])
    assert not bounded_tail([1.0, 1.0, 1.0, 4.1])


def test_constant_sup_norm_grows_linearly_when_tail_spans_a_decade():
    t = 2.0 ** np.arange(1, 9)
    assert not DecayReport.from_sup_norms(t, np.ones_like(t)).bounded_flag
    # over {2, 4, 8} the tail ratio stays within the factor 4
    t4 = np.array([2.0, 4.0, 8.0, 16.0])
    assert DecayReport.from_sup_norms(t4, np.ones(4)).bounded_flag


def test_noise_floor_resolves_roundoff():
    t = np.array([2.0, 4.0, 8.0, 16.0])
    sups = np.array([1e-16, 3e-17, 4e-16, 1e-18])
    raw = DecayReport.from_sup_norms(t, sups)
    assert not raw.bounded_flag
    rep = DecayReport.from_sup_norms(t, sups, np.full(4, 1e-15))
    assert rep.bounded_flag
    assert np.all(rep.resolved == 0)
    np.testing.assert_array_equal(rep.scaled, t * sups)


def test_report_validation():
    with pytest.raises(ValueError):
        DecayReport([1.0, 2.0], [1.0], [1.0], True)
    with pytest.raises(ValueError):
        DecayReport([1.0], [-1.0], [-1.0], True)


def test_zero_initial_datum_gives_zero():
    f = solve_homogeneous(F.zero(), K1, SolverConfig(check_zeros=False), [(0.5, 0.2), (0.2, 1.0)])
    assert np.all(np.abs(f.values) <= 1e-12)
    rep = measure_decay(F.zero(), K1, SolverConfig(check_zeros=False), [2, 4], XS)
    assert rep.bounded_flag
    assert np.all(rep.sup_norms <= 1e-12)


def test_homogeneous_solution_is_linear_in_V():
    cfg = SolverConfig(check_zeros=False)
    pts = [(x, 0.002) for x in XS]
    a = solve_homogeneous(BUMP, K1, cfg, pts)
    b = solve_homogeneous(BUMP.scaled(2.0), K1, cfg, pts)
    assert np.max(np.abs(b.values - 2 * a.values)) <= 4 * np.max(a.est_abs_error) + 1e-14
    assert np.max(np.abs(a.values)) > 1e-3 * np.max(np.abs(BUMP.evaluate(np.array(XS))))


def test_incompatible_V_is_rejected():
    with pytest.raises(DataError, match="incompatible"):
        homogeneous_data(F.polynomial([1.0]), K1)
    with pytest.warns(RuntimeWarning):
        homogeneous_data(BUMP + F.polynomial([1e-7]), K1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        homogeneous_data(BUMP, K1)


def test_measure_decay_arguments():
    with pytest.raises(ValueError):
        measure_decay(BUMP, K1, None, [0.5, 2.0], XS)
    with pytest.raises(ValueError):
        measure_decay(BUMP, K1, None, [4.0, 2.0], XS)


def test_decay_of_compatible_bump():
    rep = measure_decay(BUMP, K1, SolverConfig(check_zeros=False), [1.0, 2.0], XS)
    assert rep.bounded_flag
    assert np.all(rep.sup_norms <= rep.noise_floor + 1e-10)


@pytest.fixture(scope="module")
def perturbed():
    """Periodic manufactured data with an extra compatible bump in the initial datum."""
    case = make_manufactured_periodic([(8, 0)], 1.0, K1)
    return case, case.data.replace(initial=case.data.initial + BUMP)


def test_exact_start_gives_periodic_solution(perturbed):
    case, _ = perturbed
    pts = [(x, t) for t in (0.2, 1.0) for x in XS]
    f = eval_longtime(case.data, 16, SolverConfig(check_zeros=False), pts)
    p = np.array(pts)
    assert np.max(np.abs(f.values - case.exact(p[:, 0], p[:, 1]))) <= 1e-6
    assert f.diagnostics["parts"] == ["q", "v"]


def test_initial_difference_recovers_bump(perturbed):
    _, data = perturbed
    V, err, _ = initial_difference(data, 16, SolverConfig(check_zeros=False))
    x = np.linspace(0, 1, 37)
    assert np.max(np.abs(V.evaluate(x) - BUMP.evaluate(x))) <= 1e-6
    assert err <= 1e-6


def test_longtime_matches_direct_solve(perturbed):
    _, data = perturbed
    cfg = SolverConfig(check_zeros=False)
    pts = [(x, t) for t in (0.002, 1.0) for x in XS]
    lt = eval_longtime(data, 16, cfg, pts)
    direct = solve_invp(data, cfg, pts)
    assert np.all(np.abs(lt.values - direct.values) <= 2 * (lt.est_abs_error + direct.est_abs_error))
    q_only = eval_longtime(data, 16, cfg, pts, correction=False)
    assert q_only.diagnostics["parts"] == ["q"]
    # early on the bump has not decayed; by t = 1 it has
    assert np.max(np.abs(q_only.values[:5] - direct.values[:5])) > 1e-3
    assert np.max(np.abs(q_only.values[5:] - direct.values[5:])) <= 1e-8


def test_period_required():
    z = F.zero((0.0, np.inf))
    from airy_nonlocal import ProblemData
    with pytest.raises(DataError, match="period required"):
        eval_longtime(ProblemData(F.zero(), K1, z, z, z), 4)
