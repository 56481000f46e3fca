import pytest

from patternpack.model import ApartRule, Instance, ItemType
from patternpack.oracle import (OracleGuardError, OracleProblem,
                                exact_max_fill, exact_min_bins, exact_solve,
                                exact_solve_problem, feasible_patterns)
from patternpack.placement import verify_layout


def test_max_fill_square_quadrant():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 0, 6),))
    assert exact_max_fill({"A": 6}, inst) == [{"A": 4}]


def test_max_fill_two_large_squares_exclude_each_other():
    inst = Instance(10, 10, 0, (ItemType("A", 6, 6, 0, 1), ItemType("B", 6, 6, 0, 1)))
    maximal = exact_max_fill({"A": 1, "B": 1}, inst)
    assert sorted(maximal, key=str) == [{"A": 1}, {"B": 1}]


def test_max_fill_empty_caps():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 0, 6),))
    assert exact_max_fill({}, inst) == [{}]


def test_vector_guard_refuses():
    inst = Instance(100, 100, 0, tuple(
        ItemType(f"t{k}", 1, 1, 0, 30) for k in range(4)))
    with pytest.raises(OracleGuardError):
        exact_max_fill({f"t{k}": 30 for k in range(4)}, inst)


def test_exact_solve_perfect_tiling():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 4, 4),))
    result = exact_solve(inst)
    assert (result.bins, result.patterns) == (1, 1)


def test_exact_solve_with_spacing():
    inst = Instance(10, 10, 2, (ItemType("A", 4, 4, 8, 9),))
    result = exact_solve(inst)
    assert (result.bins, result.patterns) == (2, 1)


def test_exact_solve_zero_demand():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 0, 4),))
    result = exact_solve(inst)
    assert (result.bins, result.patterns) == (0, 0)


def test_exact_solve_mixed_vs_pure():
    # one of each fits one bin; forced one of each
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 1, 1), ItemType("B", 5, 5, 1, 1)))
    result = exact_solve(inst)
    assert (result.bins, result.patterns) == (1, 1)
    assert dict(result.assignment[0][0]) == {"A": 1, "B": 1}


def test_feasible_patterns_have_verifying_witnesses():
    inst = Instance(10, 10, 1, (ItemType("A", 4, 4, 0, 4), ItemType("B", 9, 4, 0, 2)))
    problem = OracleProblem.from_instance(inst)
    pats = feasible_patterns(problem)
    assert pats
    for vec, layout in pats.items():
        counts = {tid: n for tid, n in zip(problem.type_ids, vec) if n}
        assert verify_layout(layout, counts, inst, problem.registry)


def test_node_view_conflicts_restrict_patterns():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 1, 2), ItemType("B", 5, 5, 1, 2)))
    base = OracleProblem.from_instance(inst)
    conflicted = OracleProblem(
        instance=inst, registry=base.registry, type_ids=base.type_ids,
        ranges=base.ranges,
        rules=frozenset({ApartRule("A", "B", frozenset({"A", "B"}))}))
    for vec in feasible_patterns(conflicted):
        assert not (vec[0] > 0 and vec[1] > 0)
    # apart-branch needs two bins where together one would do
    assert exact_min_bins(conflicted) == 2
    assert exact_min_bins(base) == 1


def test_node_view_caps_restrict_patterns():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 2, 2),))
    base = OracleProblem.from_instance(inst)
    capped = OracleProblem(
        instance=inst, registry=base.registry, type_ids=base.type_ids,
        ranges=base.ranges,
        rules=frozenset({ApartRule("A", "A", frozenset({"A"}))}))
    assert exact_min_bins(capped) == 2
    assert exact_min_bins(base) == 1


def test_infeasible_view_returns_none():
    inst = Instance(10, 10, 0, (ItemType("A", 5, 5, 2, 2),))
    base = OracleProblem.from_instance(inst)
    broken = OracleProblem(
        instance=inst, registry=base.registry, type_ids=base.type_ids,
        ranges=((3, 2),))
    assert exact_solve_problem(broken) is None
