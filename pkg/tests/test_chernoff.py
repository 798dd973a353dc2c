#  type: ignore
#  pylint: disable=too-many-statements,no-member,unused-variable
"""
Tests for Chernoff information and the asymptotics of repeated responses
"""

import math

import numpy as np
import pytest

from rhopriv import (
    DataModel,
    AddNoiseMechanism,
    err,
    support_stats,
    build_Vo,
    build_V1,
    build_V1_for,
    privacy_multi_addnoise,
    bounds,
    chernoff,
)
from rhopriv._const import VERDICT

from . import case


def test_renyi_divergence():
    p = [0.2, 0.5, 0.3]
    for lam in (0.1, 0.5, 0.9):
        assert chernoff.renyi_divergence(p, p, lam) == \
            pytest.approx(0.0, abs=1e-12)
    half = chernoff.renyi_divergence([0.3, 0.7], [0.7, 0.3], 0.5)
    assert 0.5 * half == pytest.approx(0.1257694, abs=1e-6)
    assert 0.5 * half == pytest.approx(-math.log2(2 * math.sqrt(0.21)))
    assert chernoff.renyi_divergence([1, 0], [0, 1], 0.5) == math.inf
    for lam in (0.0, 1.0, 1.5):
        try:
            chernoff.renyi_divergence(p, p, lam)
            assert False, "Should raise err.LambdaOutOfRange"
        except err.LambdaOutOfRange:
            pass
    try:
        chernoff.renyi_divergence([0.5, 0.4], [0.5, 0.5], 0.5)
        assert False, "Should raise err.InvalidValueError"
    except err.InvalidValueError:
        pass


def test_chernoff_pair():
    v = build_V1(3, 0.6)
    value, lam = chernoff.chernoff_pair(v, 0, 1)
    assert value == pytest.approx(0.0294469, abs=1e-7)
    assert value == pytest.approx(bounds.bernoulli_kl(0.5, 0.6), abs=1e-9)
    assert lam == pytest.approx(0.5, abs=1e-4)

    value, lam = chernoff.chernoff_pair(v, 0, 2)
    assert value == pytest.approx(-math.log2(0.4), abs=1e-9)
    assert value == pytest.approx(1.32193, abs=1e-5)
    assert lam == 0.0
    back, lam_back = chernoff.chernoff_pair(v, 2, 0)
    assert back == value
    assert lam_back == 1.0

    same = AddNoiseMechanism([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0],
                              [0.0, 0.0, 1.0]])
    assert chernoff.chernoff_pair(same, 0, 1) == (0.0, 0.5)
    assert chernoff.chernoff_pair(same, 0, 2)[0] == math.inf
    try:
        chernoff.chernoff_pair(v, 1, 1)
        assert False, "Should raise err.SameRowIndex"
    except err.SameRowIndex:
        pass


def test_chernoff_pair_symmetry():
    rng = np.random.default_rng(89)
    for _ in range(20):
        v = AddNoiseMechanism(rng.dirichlet(np.ones(4), size=4))
        for j in range(4):
            for jp in range(j + 1, 4):
                a, la = chernoff.chernoff_pair(v, j, jp)
                b, lb = chernoff.chernoff_pair(v, jp, j)
                assert abs(a - b) <= 1e-12
                assert la == pytest.approx(1.0 - lb, abs=1e-12)
                grid = np.linspace(0, 1, 2001)
                dense = max(
                    -math.log2(np.sum(v.matrix[j] ** t
                                      * v.matrix[jp] ** (1 - t)))
                    for t in grid)
                assert a >= dense - 1e-9
                assert a <= dense + 1e-5


def test_chernoff_radius():
    report = chernoff.chernoff_radius(build_V1(3, 0.6))
    assert report.radius == pytest.approx(0.0294469, abs=1e-7)
    assert report.argmin_pair == (0, 1)
    assert len(report.pairwise) == 3

    same = AddNoiseMechanism([[0.6, 0.4], [0.6, 0.4]])
    assert chernoff.chernoff_radius(same).radius == 0.0

    v = build_Vo(case.COIN, None, 0.7)
    assert chernoff.chernoff_radius(v).radius == pytest.approx(
        -math.log2(2 * math.sqrt(0.21)), abs=1e-9)
    assert chernoff.chernoff_radius(v).radius == pytest.approx(
        0.1257694, abs=1e-6)

    for rho in np.linspace(0.55, 0.95, 9):
        for k in (2, 3, 4, 5):
            radius = chernoff.chernoff_radius(build_V1(k, rho)).radius
            assert abs(radius - bounds.bernoulli_kl(0.5, rho)) <= 1e-9


def test_vo_radius_closed_forms():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        px = rng.dirichlet(np.ones(2))
        model = DataModel(px, [0, 1])
        stats = support_stats(model)
        for rho in (0.55, 0.7, 0.9):
            b = max(stats.rho_c, rho)
            radius = chernoff.chernoff_radius(
                build_Vo(model, stats, rho)).radius
            assert abs(radius + math.log2(2 * math.sqrt(b * (1 - b)))) \
                <= 1e-9
    for model in case.random_models(97, 50, 5, 3) + \
            case.random_models(101, 10, 6, 4):
        stats = support_stats(model)
        for rho in (0.55, 0.7, 0.85):
            b = max(stats.rho_c, rho)
            radius = chernoff.chernoff_radius(
                build_Vo(model, stats, rho)).radius
            assert radius > -math.log2(2 * math.sqrt(b * (1 - b))) + 1e-9


def test_reduce_identical_rows():
    stats = support_stats(case.TRIO)
    red = chernoff.reduce_identical_rows(stats, build_V1(3, 0.6))
    assert red.groups == []
    assert red.R_S == [0, 1, 2]
    assert np.array_equal(red.matrix, build_V1(3, 0.6).matrix)

    stats = support_stats(case.UNIFORM8)
    red = chernoff.reduce_identical_rows(
        stats, build_Vo(case.UNIFORM8, stats, 0.1))
    assert red.groups == [tuple(range(8))]
    assert red.R_S == [0]

    tied = DataModel([0.4, 0.4, 0.2], [0, 1, 2])
    stats = support_stats(tied)
    red = chernoff.reduce_identical_rows(stats, build_Vo(tied, stats, 0.3))
    assert red.groups == [(0, 1)]
    assert red.j_S == [0]
    assert red.R_S == [0, 2]
    check = chernoff.identical_row_check(tied, stats, 0.3)
    assert check.passed is True
    assert check.cap == 2


def test_identical_row_check():
    for model in case.random_models(103, 20, 6, 3):
        stats = support_stats(model)
        for rho in (stats.rho_c + 0.01, 0.95):
            if rho > 1:
                continue
            check = chernoff.identical_row_check(model, stats, rho)
            assert check.passed is True
            assert check.groups == []
    check = chernoff.identical_row_check(case.UNIFORM8, None, 0.05)
    assert check.passed is True
    assert check.groups == [tuple(range(8))]


def test_asymptotic_privacy():
    stats = support_stats(case.TRIO)
    limit, rate = chernoff.asymptotic_privacy(stats, build_V1(3, 0.6))
    assert limit == pytest.approx(0.0, abs=1e-15)
    assert rate == pytest.approx(0.0294469, abs=1e-7)

    flat = AddNoiseMechanism(np.full((3, 3), 1 / 3))
    limit, rate = chernoff.asymptotic_privacy(stats, flat)
    assert limit == pytest.approx(0.5)
    assert rate == math.inf
    for n in (1, 3, 5):
        assert privacy_multi_addnoise(case.TRIO, [flat] * n,
                                      stats).value == pytest.approx(0.5)

    stats = support_stats(case.COIN)
    limit, rate = chernoff.asymptotic_privacy(
        stats, build_Vo(case.COIN, stats, 0.7))
    assert limit == pytest.approx(0.0, abs=1e-15)
    assert rate == pytest.approx(0.1257694, abs=1e-6)

    report = chernoff.chernoff_report(stats, build_Vo(case.COIN, stats, 0.7))
    data = report.todict()
    assert data['R_S'] == [0, 1]
    assert data['rate'] == pytest.approx(0.1257694, abs=1e-6)
    assert data['pairwise'][0]['pair'] == [0, 1]


def test_fit_exponent():
    ns = np.arange(1, 20)
    values = 0.1 + 3.0 * 2.0 ** (-0.4 * ns)
    assert chernoff.fit_exponent(ns, values, 0.1, prefactor=False) == \
        pytest.approx(0.4)
    values = 0.1 + ns ** -0.5 * 2.0 ** (-0.4 * ns)
    assert chernoff.fit_exponent(ns, values, 0.1) == pytest.approx(0.4)
    try:
        chernoff.fit_exponent([1, 2], [0.1, 0.05], 0.1)
        assert False, "Should raise err.NumericalError"
    except err.NumericalError:
        pass


def test_empirical_rate():
    ns = list(range(20, 121, 10))
    for rho in (0.6, 0.75):
        stats = support_stats(case.TRIO)
        v = build_V1_for(case.TRIO, rho)
        limit, rate = chernoff.asymptotic_privacy(stats, v)
        values = [privacy_multi_addnoise(case.TRIO, [v] * n, stats).value
                  for n in ns]
        slope = chernoff.fit_exponent(ns, values, limit)
        assert abs(slope - rate) <= 0.15 * rate


def test_empirical_rate_short_window():
    ns = list(range(6, 15))
    stats = support_stats(case.TRIO)
    fits = {}
    for rho in (0.6, 0.75):
        v = build_V1_for(case.TRIO, rho)
        limit, rate = chernoff.asymptotic_privacy(stats, v)
        values = [privacy_multi_addnoise(case.TRIO, [v] * n, stats).value
                  for n in ns]
        fits[rho] = (rate,
                     chernoff.fit_exponent(ns, values, limit, prefactor=False),
                     chernoff.fit_exponent(ns, values, limit))
    # the n^(-1/2) factor still steepens a plain line this early
    for rate, plain, _ in fits.values():
        assert plain > 1.15 * rate
    rate, plain, corrected = fits[0.75]
    assert plain == pytest.approx(0.2575, abs=2e-3)
    assert abs(corrected - rate) <= 0.15 * rate
    rate, plain, corrected = fits[0.6]
    assert plain == pytest.approx(0.0552, abs=2e-3)


def test_compare_schemes():
    result = chernoff.compare_schemes(case.COIN, 0.8, nmax=3)
    assert result.verdict == VERDICT.EQUALITY
    assert result.finite_n_agrees is True
    for row in result.table:
        assert row['pi_vo'] == row['pi_scheme']

    result = chernoff.compare_schemes(case.SKEWED, 0.6, nmax=3)
    assert result.verdict == VERDICT.STRICT
    assert result.chernoff_scheme == pytest.approx(0.0294469, abs=1e-7)
    assert result.chernoff_vo == pytest.approx(
        -math.log2(2 * math.sqrt(0.09)), abs=1e-9)

    result = chernoff.compare_schemes(case.TRIO, 0.6, nmax=4)
    assert result.verdict == VERDICT.STRICT
    assert result.scheme == 'v1'
    assert result.chernoff_vo > result.chernoff_scheme
    assert result.kl_half == pytest.approx(0.0294469, abs=1e-7)
    assert [row['n'] for row in result.table] == [1, 2, 3, 4]
    assert result.table[0]['pi_vo'] == pytest.approx(0.4)
    assert result.table[0]['pi_scheme'] == pytest.approx(0.38)
    for row in result.table:
        assert row['pi_vo'] <= row['converse_upper'] + 1e-12
        assert row['pi_scheme'] >= row['achievability'] - 1e-12

    result = chernoff.compare_schemes(case.UNIFORM8, 0.3, nmax=2)
    assert result.verdict == VERDICT.STRICT
    assert result.scheme == 'v2'
    assert result.limit_scheme == pytest.approx(0.625)
    assert result.limit_vo == pytest.approx(0.0, abs=1e-15)
    assert chernoff.limit_vo_low_realm(case.UNIFORM8, None, 0.3) == \
        pytest.approx(0.0, abs=1e-15)
