import math

from hypothesis import given, settings
from hypothesis import strategies as st

from record_election.numerics import (
    TowerReal,
    log_star,
    modified_iterlog,
    modified_tetration,
)

finite_reals = st.floats(min_value=1.0, max_value=1e300,
                         allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(finite_reals)
def test_tower_round_trip(x):
    t = TowerReal.from_value(x)
    assert 1.0 <= t.residue < math.e
    assert abs(t.value - x) <= 1e-9 * x


@settings(max_examples=300, deadline=None)
@given(finite_reals, finite_reals)
def test_tower_order_isomorphism(x, y):
    tx, ty = TowerReal.from_value(x), TowerReal.from_value(y)
    if x < y * (1 - 1e-12) or y < x * (1 - 1e-12):
        assert (tx < ty) == (x < y)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.0, max_value=2.718, exclude_max=True),
       st.integers(min_value=0, max_value=12),
       st.integers(min_value=0, max_value=12))
def test_group_property(s, m, n):
    n = min(n, m)
    r = modified_iterlog(n, modified_tetration(m, s))
    want = modified_tetration(m - n, s)
    got = r if isinstance(r, TowerReal) else TowerReal.from_value(r)
    assert got.level == want.level
    assert abs(got.residue - want.residue) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.0, max_value=1e300,
                 allow_nan=False, allow_infinity=False))
def test_log_star_matches_brute_force(x):
    v, n = x, 0
    while v >= 1.0:
        v = math.log(v)
        n += 1
    assert log_star(x) == n


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=40),
       st.floats(min_value=1.0, max_value=2.718, exclude_max=True))
def test_one_more_level_is_strictly_larger(n, s):
    if s == 1.0:
        return  # fixed point of the modified exponential
    a = modified_tetration(n, s)
    b = modified_tetration(n + 1, s)
    assert b > a
