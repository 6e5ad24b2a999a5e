import numpy as np
import pytest

from arsched.calendar import OPEN_END, AvailabilityCalendar
from arsched.oracle import DenseTimeline, OracleError, as_dense, oracle_find
from arsched.policies import POLICY_ORDER, Policy
from arsched.validation import (
    check_admission_equivalence,
    check_calendar_equivalence,
    check_inverse_property,
)


def example_timeline(horizon=16):
    t = DenseTimeline(8, horizon)
    t.add(0, 3, {0, 1})
    t.add(0, 1, {2, 3})
    t.add(8, 10, {4})
    return t


def test_constructor_bounds():
    DenseTimeline(64, 4096)
    for n_pes, horizon in ((0, 16), (65, 16), (8, 0), (8, 4097)):
        with pytest.raises(OracleError):
            DenseTimeline(n_pes, horizon)


def test_add_marks_cells():
    t = DenseTimeline(2, 4)
    t.add(0, 3, {1})
    assert t.busy.tolist() == [
        [False, False, False, False],
        [True, True, True, False],
    ]


def test_add_rejects_busy_cell_with_coordinates():
    t = DenseTimeline(2, 4)
    t.add(0, 3, {1})
    with pytest.raises(OracleError, match=r"cell \(pe=1, t=2\) already busy"):
        t.add(2, 4, {0, 1})
    # failed add must not leave partial bookings behind
    assert not t.busy[0].any()


def test_delete_rejects_idle_cell_with_coordinates():
    t = DenseTimeline(2, 4)
    with pytest.raises(OracleError, match=r"cell \(pe=0, t=1\) not busy"):
        t.delete(1, 2, {0})


def test_add_delete_inverse():
    t = DenseTimeline(4, 16)
    t.add(2, 9, {0, 3})
    t.delete(2, 9, {0, 3})
    assert not t.busy.any()


def test_span_and_pe_validation():
    t = DenseTimeline(2, 4)
    with pytest.raises(OracleError, match="outside"):
        t.add(-1, 2, {0})
    with pytest.raises(OracleError, match="outside"):
        t.add(0, 5, {0})
    with pytest.raises(OracleError, match="empty"):
        t.add(0, 2, set())
    with pytest.raises(OracleError, match="outside"):
        t.add(0, 2, {2})


def test_free_set():
    t = DenseTimeline(2, 4)
    t.add(0, 3, {1})
    assert t.free_set(0, 3) == frozenset({0})
    assert t.free_set(3, 4) == frozenset({0, 1})
    assert t.free_set(0, 4) == frozenset({0})


def test_rectangle_example():
    t = example_timeline()
    assert t.rectangle(2, 2) == (1, 8, frozenset(range(2, 8)))
    assert t.rectangle(3, 2) == (3, 8, frozenset(range(8)))


def test_rectangle_open_end_and_floor():
    t = example_timeline()
    t_begin, t_end, free = t.rectangle(12, 2)
    assert (t_begin, t_end) == (10, OPEN_END)
    assert free == frozenset(range(8))
    empty = DenseTimeline(4, 32)
    assert empty.rectangle(5, 3) == (0, OPEN_END, frozenset(range(4)))


def test_oracle_find_empty_timeline():
    t = DenseTimeline(8, 64)
    for policy in POLICY_ORDER:
        assert oracle_find(t, 10, 5, 40, 3, policy) == (10, frozenset({0, 1, 2}))


def test_oracle_find_example():
    t = example_timeline()
    assert oracle_find(t, 2, 2, 9, 2, Policy.PE_W) == (3, frozenset({0, 1}))
    assert oracle_find(t, 2, 2, 9, 2, Policy.FF) == (2, frozenset({2, 3}))
    assert oracle_find(t, 2, 2, 9, 2, Policy.DU_B) == (3, frozenset({0, 1}))


def test_oracle_find_respects_starts_argument():
    t = example_timeline()
    assert oracle_find(t, 2, 2, 9, 2, Policy.PE_W, starts=[2]) == (
        2,
        frozenset({2, 3}),
    )


def test_oracle_find_infeasible():
    t = DenseTimeline(2, 16)
    t.add(0, 16, {0, 1})
    assert oracle_find(t, 0, 4, 12, 1, Policy.FF) is None


def test_as_dense_matches_hand_matrix():
    cal = AvailabilityCalendar(8)
    cal.add_allocation(0, 3, {0, 1})
    cal.add_allocation(0, 1, {2, 3})
    cal.add_allocation(8, 10, {4})
    dense = as_dense(cal, 16)
    assert np.array_equal(dense.busy, example_timeline().busy)


def test_as_dense_requires_horizon_past_last_record():
    cal = AvailabilityCalendar(8)
    cal.add_allocation(8, 10, {4})
    as_dense(cal, 10)
    with pytest.raises(OracleError, match="horizon"):
        as_dense(cal, 9)


def test_calendar_equivalence_smoke():
    report = check_calendar_equivalence(n_sequences=4, n_ops=25, n_pes=8, horizon=64, seed=1)
    assert report.ok, "\n".join(report.lines())
    assert report.sequences == 4
    assert report.operations == 100


def test_admission_equivalence_smoke():
    report = check_admission_equivalence(n_queries=40, n_pes=8, horizon=64, seed=2)
    assert report.ok, "\n".join(report.lines())
    assert report.queries == 40 * len(POLICY_ORDER)


def test_admission_completeness_counts_only():
    """The unrestricted scan may prefer a non-candidate start for
    fit-scored policies, but must never accept where the candidate
    scan rejects."""
    report = check_admission_equivalence(
        n_queries=60, n_pes=8, horizon=64, seed=3, completeness=True
    )
    assert report.ok, "\n".join(report.lines())
    assert report.full_scan_extra_accepts == 0


def test_inverse_property_smoke():
    report = check_inverse_property(n_cases=300, n_pes=8, horizon=64, seed=4)
    assert report.ok, "\n".join(report.lines())
    assert report.inverse_cases + report.error_cases >= 300


def test_report_lines_shape():
    report = check_inverse_property(n_cases=50, n_pes=4, horizon=32, seed=5)
    lines = report.lines()
    assert lines[-1] == "mismatches:             0"
    assert any(line.startswith("inverse cases:") for line in lines)
