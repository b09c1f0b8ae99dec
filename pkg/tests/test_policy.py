import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpstream.policy import (
    CodingPolicy,
    InfeasiblePolicy,
    PathSpec,
    admissibility_margin,
    check_policy,
    interval_from_rate,
    is_admissible,
    max_coded_path_rate,
    rate_from_interval,
)

TWO = (PathSpec(4, 0.01), PathSpec(3, 0.01))


def test_lossless_any_redundancy_is_admissible():
    paths = (PathSpec(2), PathSpec(5))
    assert is_admissible(CodingPolicy((None, 50)), paths)
    assert not is_admissible(CodingPolicy((None, None)), paths)


def test_single_path_boundary_is_strict():
    # c = 1 - eps exactly: l = 1 / eps
    paths = (PathSpec(1, 0.1),)
    assert admissibility_margin([0.9], paths) == pytest.approx(0, abs=1e-15)
    assert not is_admissible(CodingPolicy.from_rates([0.9]), paths)
    assert is_admissible(CodingPolicy((9,)), paths)


def test_two_path_margin_value():
    margin = admissibility_margin([0.9, 1.0], TWO)
    assert margin == pytest.approx(0.3267, abs=1e-12)
    assert is_admissible(CodingPolicy((10, None)), TWO)


def test_single_coded_bound_values():
    assert max_coded_path_rate((PathSpec(1, 0.2),), 0) == pytest.approx(0.8)
    assert max_coded_path_rate(TWO, 0) == pytest.approx(0.9825, abs=1e-12)


def test_single_coded_bound_infeasible():
    paths = (PathSpec(1, 0.01), PathSpec(100, 0.9))
    with pytest.raises(InfeasiblePolicy):
        max_coded_path_rate(paths, 0)
    problems = check_policy(CodingPolicy((2, None)), paths)
    assert problems and "aggregate rate condition" in problems[0]


def test_bound_agrees_with_margin():
    bound = max_coded_path_rate(TWO, 1)
    assert admissibility_margin([1.0, bound], TWO) == pytest.approx(0, abs=1e-12)
    assert admissibility_margin([1.0, bound - 1e-6], TWO) > 0


def test_interval_rate_conversions():
    assert interval_from_rate(0) == 1
    assert interval_from_rate(0.9) == 10
    assert interval_from_rate(0.8) == 5
    assert interval_from_rate(1.0) is None
    assert interval_from_rate(0.85) == 7  # 6.67 rounds up
    assert rate_from_interval(None) == 1.0
    assert rate_from_interval(10) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        interval_from_rate(1.5)
    with pytest.raises(ValueError):
        rate_from_interval(0)


@given(st.integers(1, 10_000))
def test_interval_round_trip(l):
    assert interval_from_rate(rate_from_interval(l)) == l


def test_check_policy_messages():
    assert check_policy(CodingPolicy((10, None)), TWO) == []
    assert "aggregate rate condition" in check_policy(CodingPolicy((None, None)), TWO)[0]
    assert "intervals for" in check_policy(CodingPolicy((10,)), TWO)[0]
    problems = check_policy(CodingPolicy((1,)), (PathSpec(1),))
    assert any("no path carries info" in p for p in problems)


def test_check_policy_flags_single_coded_bound():
    # rate 0.99 on path 0 is above the 0.9825 bound
    problems = check_policy(CodingPolicy((100, None)), TWO)
    assert problems


def test_path_spec_validation():
    with pytest.raises(ValueError):
        PathSpec(-1)
    with pytest.raises(ValueError):
        PathSpec(1, 1.0)
    with pytest.raises(ValueError):
        PathSpec(1, 0.1, -0.5)
    p = PathSpec(4, 0.1, 0.02)
    assert p.rtt == pytest.approx(0.25 + 0.04)


def test_coding_policy_helpers():
    pol = CodingPolicy.single_coded(3, 1, 8)
    assert pol.intervals == (None, 8, None)
    assert pol.coded_path == 1
    assert CodingPolicy((2, 3)).coded_path is None
    with pytest.raises(ValueError):
        CodingPolicy((0,))


@given(
    data=st.data(),
    n=st.integers(1, 4),
)
def test_admissibility_monotone(data, n):
    r = data.draw(st.lists(st.floats(0.1, 10), min_size=n, max_size=n))
    eps = data.draw(st.lists(st.floats(0, 0.5), min_size=n, max_size=n))
    c = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    i = data.draw(st.integers(0, n - 1))
    scale = data.draw(st.floats(0, 1))
    paths = [PathSpec(a, b) for a, b in zip(r, eps)]
    base = admissibility_margin(c, paths)
    if base <= 0:
        return
    c2 = list(c)
    c2[i] *= scale
    assert admissibility_margin(c2, paths) > 0 or math.isclose(
        admissibility_margin(c2, paths), 0, abs_tol=1e-12
    )
    paths2 = list(paths)
    paths2[i] = PathSpec(r[i], eps[i] * scale)
    assert admissibility_margin(c, paths2) > 0 or math.isclose(
        admissibility_margin(c, paths2), 0, abs_tol=1e-12
    )


def test_margin_not_monotone_in_erasure_above_one_half():
    # per-path term (1 - eps)(1 - c - eps) r grows as eps falls only while eps <= 1/2
    paths = [PathSpec(1, 0.0), PathSpec(1, 0.9)]
    c = [0.85, 1.0]
    assert admissibility_margin(c, paths) > 0
    assert admissibility_margin(c, [PathSpec(1, 0.0), PathSpec(1, 0.5)]) < 0
