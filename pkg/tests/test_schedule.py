"""Schedules: generation, extension, observability, observation summaries."""

import numpy as np
import pytest

from lethe.distributions import make_distribution
from lethe.schedule import (
    PostRecord,
    down_period_count_exceeding,
    dump_schedule_csv,
    extend_schedule,
    generate_schedule,
    observable,
    observation_summary,
)

from conftest import rng

HOUR = 3600
DAY = 86400
YEAR = 365 * DAY


@pytest.fixture(scope="module")
def degenerate_schedule():
    up = make_distribution("degenerate", 9 * HOUR)
    down = make_distribution("degenerate", HOUR)
    return generate_schedule(up, down, t0=0, horizon=YEAR, rng=rng("deg"))


def test_strawman_toggle_pattern(degenerate_schedule):
    s = degenerate_schedule
    assert list(s.toggles[:4]) == [9 * HOUR, 10 * HOUR, 19 * HOUR, 20 * HOUR]
    assert s.covered_until >= YEAR
    assert s.created_at == 0


def test_schedule_invariants(mechanism_90):
    up, down = mechanism_90
    s = generate_schedule(up, down, t0=1000, horizon=YEAR, rng=rng("inv"))
    diffs = np.diff(s.toggles)
    assert (diffs >= 1).all()
    assert s.toggles[0] > s.created_at
    assert s.covered_until >= s.toggles[-1]


def test_same_seed_reproduces_schedule(mechanism_90):
    up, down = mechanism_90
    a = generate_schedule(up, down, 0, YEAR, rng("same", 1))
    b = generate_schedule(up, down, 0, YEAR, rng("same", 1))
    assert np.array_equal(a.toggles, b.toggles)
    assert a.covered_until == b.covered_until


def test_extension_prefix_stable_and_step_invariant(mechanism_90):
    up, down = mechanism_90
    base = generate_schedule(up, down, 0, 30 * DAY, rng("ext"))
    one_step = extend_schedule(base, up, down, 3 * YEAR)
    two_step = extend_schedule(
        extend_schedule(base, up, down, 200 * DAY), up, down, 3 * YEAR
    )
    assert np.array_equal(one_step.toggles, two_step.toggles)
    assert np.array_equal(one_step.toggles[: len(base.toggles)], base.toggles)
    assert one_step.covered_until >= 3 * YEAR
    # extension to an already-covered horizon is a no-op
    assert extend_schedule(base, up, down, 10 * DAY) is base


def test_extension_preserves_past_answers(mechanism_90):
    up, down = mechanism_90
    base = generate_schedule(up, down, 0, 60 * DAY, rng("past"))
    extended = extend_schedule(base, up, down, YEAR)
    probes = np.linspace(0, 60 * DAY, 500).astype(int)
    for t in probes:
        assert base.state_at(int(t)) == extended.state_at(int(t))


def test_observable_contracts(degenerate_schedule):
    post = PostRecord("p", "tok", "content", degenerate_schedule)
    assert observable(post, 0) is True  # initially up
    assert observable(post, 9 * HOUR - 1) is True
    assert observable(post, 9 * HOUR) is False  # first down phase
    assert observable(post, 10 * HOUR) is True
    with pytest.raises(ValueError):
        observable(post, degenerate_schedule.covered_until + 1)
    with pytest.raises(ValueError):
        degenerate_schedule.state_at(-5)


def test_deletion_forces_down(degenerate_schedule):
    post = PostRecord("p", "tok", "content", degenerate_schedule)
    post.mark_deleted(5 * HOUR)  # mid first up phase
    assert observable(post, 5 * HOUR - 1) is True
    assert observable(post, 5 * HOUR) is False
    assert observable(post, 30 * HOUR) is False  # never visible again
    assert post.real_state(4 * HOUR) is True
    assert post.real_state(5 * HOUR) is False
    with pytest.raises(ValueError):
        post.mark_deleted(6 * HOUR)  # cannot re-delete


def test_deletion_never_creates_visibility(mechanism_90):
    up, down = mechanism_90
    s = generate_schedule(up, down, 0, 30 * DAY, rng("vis"))
    clean = PostRecord("a", "t", "c", s)
    deleted = PostRecord("b", "t", "c", s)
    deleted.mark_deleted(3 * DAY)
    for t in range(0, 20 * DAY, 9999):
        assert not (observable(deleted, t) and not observable(clean, t))


def test_observation_summary_cases(degenerate_schedule):
    s = degenerate_schedule
    # non-deleted, inside first down phase
    post = PostRecord("p", "tok", "c", s)
    summary = observation_summary(post, 9 * HOUR + 600)
    assert summary.last_up == 9 * HOUR
    assert summary.down_elapsed == 600
    assert summary.as_of == 9 * HOUR + 600
    # currently up
    assert observation_summary(post, 100) is None
    assert observation_summary(post, 10 * HOUR) is None

    # deleted mid up phase: truncated up duration observed
    cut = PostRecord("q", "tok", "c", s)
    cut.mark_deleted(5 * HOUR)
    summary = observation_summary(cut, 5 * HOUR + 50)
    assert summary.last_up == 5 * HOUR
    assert summary.down_elapsed == 50

    # deleted during a scheduled down phase: merges invisibly
    merged = PostRecord("r", "tok", "c", s)
    merged.mark_deleted(9 * HOUR + 120)
    summary = observation_summary(merged, 12 * HOUR)
    assert summary.last_up == 9 * HOUR
    assert summary.down_elapsed == 3 * HOUR

    # deletion exactly at an up-phase-start toggle merges with previous down
    at_up = PostRecord("s", "tok", "c", s)
    at_up.mark_deleted(10 * HOUR)
    summary = observation_summary(at_up, 11 * HOUR)
    assert summary.last_up == 9 * HOUR
    assert summary.down_elapsed == 2 * HOUR

    # deletion exactly at a down-toggle instant belongs to the down phase
    at_down = PostRecord("t", "tok", "c", s)
    at_down.mark_deleted(19 * HOUR)
    summary = observation_summary(at_down, 19 * HOUR + 30)
    assert summary.last_up == 9 * HOUR
    assert summary.down_elapsed == 30


def test_summary_at_toggle_instant_clamps_to_one(degenerate_schedule):
    post = PostRecord("p", "tok", "c", degenerate_schedule)
    summary = observation_summary(post, 9 * HOUR)
    assert summary.down_elapsed == 1


def test_down_period_counts(degenerate_schedule):
    s = degenerate_schedule
    assert down_period_count_exceeding(s, 2 * HOUR, (0, 300 * DAY)) == 0
    # k full 10h cycles contain k down-phase starts
    k = 10
    assert down_period_count_exceeding(s, 30 * 60, (0, k * 10 * HOUR - 1)) == k
    with pytest.raises(ValueError):
        down_period_count_exceeding(s, 60, (0, s.covered_until + 10))


def test_down_period_rate_matches_renewal_theory(mechanism_90):
    # Monte-Carlo rate of long down phases ~ window/mean_cycle * ccdf(theta-1)
    up, down = mechanism_90
    theta = 12 * HOUR
    window = 200 * DAY
    q = down.ccdf(theta - 1)
    expected_per_post = window / (up.mean + down.mean) * q
    posts = 400
    total = sum(
        down_period_count_exceeding(
            generate_schedule(up, down, 0, window + 10 * DAY, rng("rate", i)),
            theta,
            (0, window),
        )
        for i in range(posts)
    )
    expected = posts * expected_per_post
    assert abs(total - expected) <= 3 * np.sqrt(expected) + 3


def test_schedule_csv_dump(tmp_path, degenerate_schedule):
    path = tmp_path / "schedule.csv"
    dump_schedule_csv(degenerate_schedule, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "toggle_index,timestamp_seconds"
    assert lines[1] == "0,32400"
    assert lines[2] == "1,36000"
    assert len(lines) == len(degenerate_schedule.toggles) + 1


def test_long_run_observable_fraction(mechanism_90):
    up, down = mechanism_90
    horizon = 2 * YEAR
    fractions = []
    for i in range(150):
        s = generate_schedule(up, down, 0, horizon, rng("frac", i))
        cut = s.toggles[s.toggles <= horizon]
        durations = np.diff(np.concatenate([[0], cut, [horizon]]))
        fractions.append(durations[::2].sum() / horizon)
    assert np.mean(fractions) == pytest.approx(0.90, abs=0.02)
