#  type: ignore
#  pylint: disable=too-many-statements,no-member,unused-variable
"""
Tests for exact MAP privacy
"""

import itertools

import numpy as np
import pytest

from rhopriv import (
    DataModel,
    Mechanism,
    AddNoiseMechanism,
    err,
    support_stats,
    build_Wo,
    build_Vo,
    build_Wo_predicate,
    build_V1,
    build_V2_for,
    build_V1_for,
    lift_to_W,
    collapse_to_V,
    map_estimate,
    map_estimate_multi,
    privacy_single,
    privacy_multi,
    privacy_multi_addnoise,
    predicate_privacy,
    function_recovery_probability,
    monotone_sequence,
    bounds,
    oracle,
    privacy,
    METHOD,
)

from . import case


def brute_force(px, mats):
    """1 - sum over response tuples of the largest joint mass."""
    k = mats[0].shape[1]
    success = 0.0
    for responses in itertools.product(range(k), repeat=len(mats)):
        best = 0.0
        for x, p in enumerate(px):
            mass = p
            for mat, i in zip(mats, responses):
                mass *= mat[x, i]
            best = max(best, mass)
        success += best
    return 1.0 - success


def test_map_estimate():
    w = lift_to_W(build_V1(3, 0.6), case.TRIO.f)
    assert map_estimate(case.TRIO, w, 0) == 0
    assert map_estimate(case.TRIO, w, 1) == 0
    assert map_estimate(case.TRIO, w, 2) == 2

    w = build_Wo(case.CELLS, None, 1.0)
    stats = support_stats(case.CELLS)
    for i in range(case.CELLS.k):
        assert map_estimate(case.CELLS, w, i) == stats.x_i_star[i]


def test_privacy_single():
    stats = support_stats(case.TRIO)
    report = privacy_single(case.TRIO, build_Wo(case.TRIO, stats, 0.6))
    assert report.value == pytest.approx(0.4, abs=1e-12)
    assert report.success == pytest.approx(0.6, abs=1e-12)
    assert report.method == METHOD.NAIVE
    assert report.n == 1
    assert report.decision_rule(1) == 1

    report = privacy_single(case.TRIO, lift_to_W(build_V1(3, 0.6),
                                                  case.TRIO.f))
    assert report.value == pytest.approx(0.38, abs=1e-12)
    assert np.allclose(report.error_masses, [0.2, 0.18, 0.0])
    assert report.pointwise_value == pytest.approx(0.2)
    assert report.todict()['pointwise_value'] == pytest.approx(0.2)
    assert np.allclose(
        privacy.pointwise_error_masses(case.TRIO, build_V1(3, 0.6)),
        [0.2, 0.18, 0.0])

    flat = Mechanism(np.full((3, 3), 1 / 3))
    assert privacy_single(case.TRIO, flat).value == pytest.approx(0.5)


def test_privacy_multi():
    w = lift_to_W(build_V1(3, 0.6), case.TRIO.f)
    single = privacy_single(case.TRIO, w)
    assert privacy_multi(case.TRIO, [w]).value == single.value

    naive = privacy_multi(case.TRIO, [w, w], method=METHOD.NAIVE)
    typed = privacy_multi(case.TRIO, [w, w], method=METHOD.TYPE_CLASS)
    expected = brute_force(case.TRIO.px, [w.matrix, w.matrix])
    assert naive.value == pytest.approx(expected, abs=1e-12)
    assert typed.value == pytest.approx(expected, abs=1e-12)
    assert naive.method == METHOD.NAIVE
    assert typed.method == METHOD.TYPE_CLASS
    assert privacy_multi(case.TRIO, [w, w]).method == METHOD.TYPE_CLASS
    assert naive.decision_rule((0, 0)) == 0
    assert naive.decision_rule((2, 2)) == 2

    try:
        privacy_multi(case.TRIO, [])
        assert False, "Should raise err.InvalidValueError"
    except err.InvalidValueError:
        pass
    try:
        privacy_multi(case.TRIO, [Mechanism([[0.5, 0.5], [0.5, 0.5]])])
        assert False, "Should raise err.InvalidValueError"
    except err.InvalidValueError:
        pass


def test_enumeration_cap():
    rng = np.random.default_rng(8)
    ws = [oracle.random_feasible_mechanism(case.TRIO, 0.5, rng)
          for _ in range(4)]
    try:
        privacy.success_mass(case.TRIO.px, [w.matrix for w in ws], cap=80)
        assert False, "Should raise err.EnumerationTooLarge"
    except err.EnumerationTooLarge as e:
        assert '80' in str(e)
    mass, used = privacy.success_mass(case.TRIO.px,
                                      [w.matrix for w in ws], cap=81)
    assert used == METHOD.NAIVE
    assert 1.0 - mass == pytest.approx(
        brute_force(case.TRIO.px, [w.matrix for w in ws]), abs=1e-12)


def test_type_class_matches_naive():
    rng = np.random.default_rng(19)
    for k in (2, 3, 4):
        for model in case.random_models(k, 3, 5, k):
            w = oracle.random_feasible_mechanism(model, 0.5, rng)
            for n in range(2, 7 if k < 4 else 5):
                naive = privacy_multi(model, [w] * n,
                                      method=METHOD.NAIVE).value
                typed = privacy_multi(model, [w] * n,
                                      method=METHOD.TYPE_CLASS).value
                assert abs(naive - typed) <= 1e-9


def test_workers_are_deterministic():
    w = lift_to_W(build_V1(3, 0.7), case.TRIO.f)
    one = privacy_multi(case.TRIO, [w] * 6, workers=1).value
    two = privacy_multi(case.TRIO, [w] * 6, workers=2).value
    again = privacy_multi(case.TRIO, [w] * 6, workers=2).value
    assert two == again
    assert abs(one - two) <= 1e-12


def test_privacy_multi_addnoise():
    stats = support_stats(case.TRIO)
    vo = build_Vo(case.TRIO, stats, 0.6)
    report = privacy_multi_addnoise(case.TRIO, vo, stats)
    assert report.value == pytest.approx(0.4, abs=1e-12)
    assert report.method == METHOD.REDUCED
    assert report.path == METHOD.NAIVE
    assert report.todict()['path'] == METHOD.NAIVE

    v = AddNoiseMechanism([[0.7, 0.3], [0.3, 0.7]])
    report = privacy_multi_addnoise(case.COIN, [v] * 3)
    expected = brute_force(case.COIN.px, [v.matrix] * 3)
    assert report.value == pytest.approx(expected, abs=1e-12)
    assert report.method == 'reduced-lemma3'
    assert report.path == METHOD.TYPE_CLASS
    forced = privacy_multi_addnoise(case.COIN, [v] * 3, method=METHOD.NAIVE)
    assert forced.method == METHOD.REDUCED
    assert forced.path == METHOD.NAIVE
    assert forced.value == pytest.approx(expected, abs=1e-12)
    assert report.decision_rule((1, 1, 1)) == 1
    assert report.decision_rule((0, 1, 0)) == 0

    try:
        privacy_multi_addnoise(case.TRIO, [build_V1(2, 0.6)])
        assert False, "Should raise err.InvalidValueError"
    except err.InvalidValueError:
        pass


def test_addnoise_equivalence():
    for model in case.random_models(23, 8, 6, 3):
        stats = support_stats(model)
        for rho in (0.3, 0.7):
            w = build_Wo(model, stats, rho)
            v = collapse_to_V(w, model.f)
            for n in range(1, 5):
                lifted = privacy_multi(model, [w] * n).value
                report = privacy_multi_addnoise(model, [v] * n, stats)
                assert abs(lifted - report.value) <= 1e-12
                rebuilt = 1.0 - stats.sum_xi_star * report.reduced_success
                assert abs(rebuilt - report.value) <= 1e-12
    model = case.CELLS
    v1 = build_V1_for(model, 0.8)
    v2 = build_V1_for(model, 0.6)
    assert abs(privacy_multi(model, [lift_to_W(v1, model.f),
                                     lift_to_W(v2, model.f)]).value
               - privacy_multi_addnoise(model, [v1, v2]).value) <= 1e-12


def test_v2_does_not_improve_with_n():
    for model, rho in ((case.UNIFORM8, 1 / 3), (case.CELLS, 0.5)):
        stats = support_stats(model)
        v = build_V2_for(model, rho)
        closed = bounds.closed_V2(stats, rho)
        for n in range(1, 5):
            value = privacy_multi_addnoise(model, [v] * n, stats).value
            assert value == pytest.approx(closed, abs=1e-12)
    assert bounds.closed_V2(support_stats(case.UNIFORM8), 1 / 3) == \
        pytest.approx(0.625)


def test_predicate_privacy():
    stats = support_stats(case.PRED)
    w = build_Wo_predicate(case.PRED, stats, 0.9)
    assert predicate_privacy(case.PRED, w).value == pytest.approx(0.4)

    flat = Mechanism(np.full((4, 2), 0.5))
    assert predicate_privacy(case.PRED, flat).value == pytest.approx(0.4)
    skew = DataModel([0.4, 0.3, 0.2, 0.1], [0, 0, 1, 1], [0, 1, 1, 1])
    assert predicate_privacy(skew, flat).value == pytest.approx(0.4)
    skew = DataModel([0.1, 0.3, 0.2, 0.4], [0, 0, 1, 1], [0, 1, 1, 1])
    assert predicate_privacy(skew, flat).value == pytest.approx(0.1)

    try:
        predicate_privacy(case.TRIO, w)
        assert False, "Should raise err.NoPredicate"
    except err.NoPredicate:
        pass

    rng = np.random.default_rng(31)
    for model in case.random_models(37, 10, 5, 3, 2):
        w = oracle.random_feasible_mechanism(model, 0.4, rng)
        assert predicate_privacy(model, w).value <= \
            privacy_single(model, w).value + 1e-12
        ident = model.with_predicate(np.arange(model.r))
        assert abs(predicate_privacy(ident, w).value
                   - privacy_single(ident, w).value) <= 1e-12


def test_function_recovery_probability():
    w = lift_to_W(build_V1(3, 0.6), case.TRIO.f)
    assert function_recovery_probability(case.TRIO, [w]) == \
        pytest.approx(0.62)
    w = build_Wo(case.CELLS, None, 1.0)
    assert function_recovery_probability(case.CELLS, [w]) == \
        pytest.approx(1.0)

    v = lift_to_W(build_V1(2, 0.8), case.COIN.f)
    success = function_recovery_probability(case.COIN, [v] * 5)
    assert success >= 0.94208 - 1e-12

    rng = np.random.default_rng(41)
    for model in case.random_models(43, 6, 5, 3):
        rho = 0.6
        ws = [oracle.random_feasible_mechanism(model, rho, rng)
              for _ in range(3)]
        value = function_recovery_probability(model, ws)
        cells = [model.px[model.cell(i)].sum() for i in range(model.k)]
        floor = max(rho, max(cells), bounds.binom_tail_gt_half(3, rho))
        assert value >= floor - 1e-12


def test_function_recovery_floor():
    rng = np.random.default_rng(59)
    models = case.random_models(61, 10, 5, 3) + \
        case.random_models(67, 10, 4, 2)
    for draw in range(200):
        model = models[draw % len(models)]
        rho = (0.3, 0.5, 0.6, 0.75, 0.9)[draw % 5]
        n = 1 + (draw // 5) % 5
        ws = [oracle.random_feasible_mechanism(model, rho, rng)
              for _ in range(n)]
        value = function_recovery_probability(model, ws)
        cells = [model.px[model.cell(i)].sum() for i in range(model.k)]
        floor = max(rho, max(cells), bounds.binom_tail_gt_half(n, rho))
        assert value >= floor - 1e-12


def test_monotone_sequence():
    rng = np.random.default_rng(47)
    for model in case.random_models(53, 6, 4, 3):
        ws = [oracle.random_feasible_mechanism(model, 0.4, rng)
              for _ in range(4)]
        values = monotone_sequence(model, ws)
        assert len(values) == 4
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-12


def test_map_estimate_multi():
    w = lift_to_W(build_V1(3, 0.6), case.TRIO.f)
    assert map_estimate_multi(case.TRIO, [w, w], (1, 1)) == 1
    assert map_estimate_multi(case.TRIO, [w, w], (2, 0)) == 2
    try:
        map_estimate_multi(case.TRIO, [w, w], (1,))
        assert False, "Should raise err.InvalidValueError"
    except err.InvalidValueError:
        pass
