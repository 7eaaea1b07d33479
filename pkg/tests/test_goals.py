import numpy as np
import pytest

from scengen.errors import ConfigurationError, InconsistencyError
from scengen.goals import (
    AchievedGoal,
    Constraint,
    Goal,
    compute_reward,
    dump_goal,
    evaluate_goal_quantities,
    goal_from_achieved,
    load_preset,
    parse_goal,
    sample_goal,
)
from scengen.world import Actor, Scenario, derive_kinematics, generate_map, min_distance


def _lane_following_trajectory(y, speed, n=101, dt=0.1, x0=0.0):
    xs = x0 + speed * dt * np.arange(n)
    return derive_kinematics(np.column_stack([xs, np.full(n, y)]), dt)


def _scenario(adv_speed=11.0, others=((15.0, 3.5, 9.0),)):
    """Ego at the origin lane, adversary ahead, optional others.

    ``others`` lists (x0, y, speed) triples placed in the left lane.
    """
    lane_map = generate_map("straight", n_lanes=3, length=500.0)
    actors = [
        Actor(id="ego", role="ego", lane_index=1),
        Actor(id="adv", role="adversarial", lane_index=1),
    ]
    trajectories = {
        "ego": _lane_following_trajectory(0.0, 10.0),
        "adv": _lane_following_trajectory(0.0, adv_speed, x0=30.0),
    }
    for k, (x0, y, speed) in enumerate(others):
        actors.append(Actor(id=f"npc{k}", role="other", lane_index=0))
        trajectories[f"npc{k}"] = _lane_following_trajectory(y, speed, x0=x0)
    return Scenario(lane_map=lane_map, actors=tuple(actors),
                    trajectories=trajectories, dt=0.1, horizon=10.0)


def test_deceleration_preset_values():
    goal = load_preset("deceleration")
    assert [c.quantity for c in goal.eq] == ["ego_adv_min_distance"]
    assert goal.eq[0].target == 0.0
    assert [(c.quantity, c.target, c.direction) for c in goal.ieq] == [
        ("adv_max_abs_accel", 8.0, "upper"),
        ("adv_max_abs_steer", 0.7, "upper"),
    ]
    assert goal.as_vector() == pytest.approx([0.0, 8.0, 0.7])


def test_cut_in_preset_adds_heading_bound():
    goal = load_preset("cut_in")
    assert goal.as_vector() == pytest.approx([0.0, 8.0, 0.7, 0.5])
    assert goal.ieq[-1].quantity == "ego_adv_heading_at_min_distance"
    assert goal.ieq[-1].direction == "upper"


def test_cut_out_preset_targets_the_other_vehicle():
    goal = load_preset("cut_out")
    assert goal.eq[0].quantity == "ego_other_min_distance"
    assert goal.as_vector() == pytest.approx([0.0, 8.0, 0.7, 0.25])
    clearance = goal.ieq[-1]
    assert clearance.quantity == "adv_others_min_distance"
    assert clearance.direction == "lower"
    assert clearance.target == 0.25


def test_evaluate_quantities_against_direct_measurement():
    scenario = _scenario()
    goal = load_preset("deceleration")
    achieved = evaluate_goal_quantities(scenario, goal)
    ego = scenario.trajectories["ego"]
    adv = scenario.trajectories["adv"]
    assert achieved.eq[0] == pytest.approx(min_distance(ego, adv)[0])
    assert achieved.ieq[0] == pytest.approx(np.max(np.abs(adv.a)))
    assert achieved.ieq[1] == pytest.approx(np.max(np.abs(adv.delta)))


def test_other_distance_takes_the_nearest():
    scenario = _scenario(others=((15.0, 3.5, 9.0), (6.0, 3.5, 10.0)))
    goal = load_preset("cut_out")
    achieved = evaluate_goal_quantities(scenario, goal)
    ego = scenario.trajectories["ego"]
    expected = min(min_distance(ego, scenario.trajectories["npc0"])[0],
                   min_distance(ego, scenario.trajectories["npc1"])[0])
    assert achieved.eq[0] == pytest.approx(expected)
    # ego overtakes the slower npc0, closing to the bare lateral gap
    near = min_distance(ego, scenario.trajectories["npc0"])[0]
    assert achieved.eq[0] == pytest.approx(near)
    assert near == pytest.approx(1.7, abs=0.1)


def test_other_quantities_require_an_other_vehicle():
    scenario = _scenario(others=())
    goal = load_preset("cut_out")
    with pytest.raises(ConfigurationError):
        evaluate_goal_quantities(scenario, goal)


def test_reward_truth_table():
    goal = load_preset("deceleration")
    good_eq, bad_eq = (0.05,), (1.5,)
    good_ieq, bad_ieq = (3.0, 0.2), (9.0, 0.2)
    cases = [
        (good_eq, good_ieq, 0.0, True),
        (good_eq, bad_ieq, -1.0, False),
        (bad_eq, good_ieq, -1.0, False),
        (bad_eq, bad_ieq, -1.0, False),
    ]
    for eq, ieq, want_reward, want_success in cases:
        reward, success = compute_reward(AchievedGoal(eq=eq, ieq=ieq), goal)
        assert reward == want_reward
        assert success is want_success


def test_reward_boundaries_are_strict():
    goal = load_preset("deceleration")
    # equality error of exactly epsilon fails
    _, success = compute_reward(AchievedGoal(eq=(0.1,), ieq=(3.0, 0.2)), goal)
    assert not success
    _, success = compute_reward(AchievedGoal(eq=(0.0999,), ieq=(3.0, 0.2)), goal)
    assert success
    # an upper bound met with equality fails
    _, success = compute_reward(AchievedGoal(eq=(0.0,), ieq=(8.0, 0.2)), goal)
    assert not success
    # so does a lower bound
    cut_out = load_preset("cut_out")
    _, success = compute_reward(AchievedGoal(eq=(0.0,), ieq=(3.0, 0.2, 0.25)), cut_out)
    assert not success
    _, success = compute_reward(AchievedGoal(eq=(0.0,), ieq=(3.0, 0.2, 0.26)), cut_out)
    assert success


def test_reward_rejects_shape_mismatch():
    goal = load_preset("deceleration")
    with pytest.raises(InconsistencyError):
        compute_reward(AchievedGoal(eq=(0.0,), ieq=(1.0,)), goal)


def test_hindsight_goal_copies_achieved_values():
    template = load_preset("cut_in")
    achieved = AchievedGoal(eq=(2.37,), ieq=(5.1, 0.44, 0.31))
    relabeled = goal_from_achieved(template, achieved)
    assert relabeled.as_vector() == pytest.approx([2.37, 5.1, 0.44, 0.31])
    assert [c.quantity for c in relabeled.ieq] == [c.quantity for c in template.ieq]
    assert [c.direction for c in relabeled.ieq] == [c.direction for c in template.ieq]
    # achieving strictly less than the relabeled bounds now counts as success
    reward, success = compute_reward(
        AchievedGoal(eq=(2.40,), ieq=(5.0, 0.40, 0.30)), relabeled)
    assert reward == 0.0 and success


def test_sample_goal_ranges():
    rng = np.random.default_rng(5)
    for _ in range(50):
        goal = sample_goal("deceleration", rng)
        assert 0.0 <= goal.eq[0].target <= 20.0
        assert goal.eq[0].quantity == "ego_adv_min_distance"
        accel, steer = goal.ieq
        assert 4.0 <= accel.target <= 10.0
        assert 0.3 <= steer.target <= 0.9
    goal = sample_goal("cut_in", np.random.default_rng(6))
    assert len(goal.ieq) == 3
    assert 0.3 <= goal.ieq[2].target <= 0.7
    goal = sample_goal("cut_out", np.random.default_rng(7))
    assert goal.eq[0].quantity == "ego_other_min_distance"
    assert goal.ieq[2].direction == "lower"
    assert 0.1 <= goal.ieq[2].target <= 0.5
    with pytest.raises(ConfigurationError):
        sample_goal("rear_end", rng)


def test_sample_goal_is_reproducible():
    a = sample_goal("cut_in", np.random.default_rng(42))
    b = sample_goal("cut_in", np.random.default_rng(42))
    assert a == b


def test_goal_file_roundtrip():
    goal = sample_goal("cut_out", np.random.default_rng(9))
    assert parse_goal(dump_goal(goal)) == goal


def test_parse_goal_rejects_malformed_input():
    with pytest.raises(ConfigurationError):
        parse_goal("{}")
    with pytest.raises(ConfigurationError):
        parse_goal("[{\"quantity\": \"adv_max_abs_accel\"}]")
    with pytest.raises(ConfigurationError):
        parse_goal("not json")
    bad_quantity = dump_goal(load_preset("deceleration")).replace(
        "ego_adv_min_distance", "time_to_collision")
    with pytest.raises(ConfigurationError):
        parse_goal(bad_quantity)


def test_constraint_validation():
    with pytest.raises(ConfigurationError):
        Constraint("adv_max_abs_accel", "bound", 8.0, "upper", "m/s^2")
    with pytest.raises(ConfigurationError):
        Constraint("adv_max_abs_accel", "ieq", 8.0, "none", "m/s^2")
    with pytest.raises(ConfigurationError):
        Goal(eq=(), ieq=())


def test_quantity_cache_evaluates_each_name_once(monkeypatch):
    calls = []
    import scengen.goals as goals_module
    original = goals_module.QUANTITIES["ego_adv_min_distance"]

    def counting(scenario):
        calls.append(1)
        return original(scenario)

    monkeypatch.setitem(goals_module.QUANTITIES, "ego_adv_min_distance", counting)
    goal = Goal(
        eq=(Constraint("ego_adv_min_distance", "eq", 0.0, "none", "m"),),
        ieq=(Constraint("ego_adv_min_distance", "ieq", 5.0, "lower", "m"),),
    )
    evaluate_goal_quantities(_scenario(), goal)
    assert len(calls) == 1
