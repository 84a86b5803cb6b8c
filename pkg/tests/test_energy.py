import math

import pytest
from hypothesis import given, strategies as st

from gridsweep.energy import (
    HARVEST_SATURATION_W,
    OPTIMIZED_HARVEST_GAIN,
    FlightSetting,
    PlatformSpec,
    charge_duration,
    full_battery,
    ground_speed_along_track,
    harvest_power,
    hover_energy,
    leg_energy,
    power_draw,
    resolve_flight,
    stall_speed,
    track_unit,
    wind_components,
)
from gridsweep.errors import (
    NotWingedError,
    SchemaError,
    StallError,
    WindError,
    ZeroHarvestError,
)

from conftest import simple_rotor


def morphing_platform(**overrides) -> PlatformSpec:
    base = dict(
        id="morph", kind="morphing_vtol", battery_capacity_wh=240.0,
        hover_power_w=520.0, cruise_power_w=170.0, v_inspect=14.0, v_cruise=20.0,
        v_stall_base=13.30, wing_surface_retracted=0.527, wing_surface_extended=0.709,
        max_wind=12.0, range_limit=7000.0,
    )
    base.update(overrides)
    return PlatformSpec(**base)


# ---------------------------------------------------------------------------
# Wind triangle


def test_ground_speed_still_air():
    assert ground_speed_along_track(12.0, (1.0, 0.0), (0.0, 0.0)) == 12.0


def test_ground_speed_head_and_tail_wind():
    east = (1.0, 0.0)
    assert ground_speed_along_track(12.0, east, (-3.0, 0.0)) == pytest.approx(9.0)
    assert ground_speed_along_track(12.0, east, (3.0, 0.0)) == pytest.approx(15.0)


def test_ground_speed_pure_crosswind():
    gs = ground_speed_along_track(13.0, (1.0, 0.0), (0.0, 5.0))
    assert gs == pytest.approx(12.0)  # 5-12-13 triangle


def test_wind_components_decomposition():
    unit = track_unit((0.0, 0.0), (0.0, 100.0))
    along, cross = wind_components(unit, (2.0, -3.0))
    assert along == pytest.approx(-3.0)
    assert cross == pytest.approx(2.0)


def test_unflyable_crosswind_raises():
    with pytest.raises(WindError, match="crosswind"):
        ground_speed_along_track(5.0, (1.0, 0.0), (0.0, 5.0))


def test_overwhelming_headwind_raises():
    with pytest.raises(WindError, match="headwind"):
        ground_speed_along_track(5.0, (1.0, 0.0), (-6.0, 0.0))


def test_track_unit_degenerate_segment():
    assert track_unit((7.0, 7.0), (7.0, 7.0)) == (1.0, 0.0)


@given(
    airspeed=st.floats(min_value=5.0, max_value=30.0),
    wind_speed=st.floats(min_value=0.0, max_value=4.9),
    wind_angle=st.floats(min_value=0.0, max_value=2 * math.pi),
)
def test_ground_speed_bounds(airspeed, wind_speed, wind_angle):
    wind = (wind_speed * math.cos(wind_angle), wind_speed * math.sin(wind_angle))
    gs = ground_speed_along_track(airspeed, (1.0, 0.0), wind)
    assert 0.0 < gs <= airspeed + wind_speed + 1e-9
    assert gs >= airspeed - wind_speed - 1e-9


@given(
    d=st.floats(min_value=100.0, max_value=2000.0),
    v=st.floats(min_value=8.0, max_value=25.0),
    frac=st.floats(min_value=0.0, max_value=0.8),
)
def test_round_trip_time_closed_form(d, v, frac):
    # out-and-back along the wind axis: t = 2dv / (v^2 - w^2)
    w = frac * v
    t_out = d / ground_speed_along_track(v, (1.0, 0.0), (w, 0.0))
    t_back = d / ground_speed_along_track(v, (-1.0, 0.0), (w, 0.0))
    assert t_out + t_back == pytest.approx(2 * d * v / (v * v - w * w), rel=1e-12)


def test_round_trip_time_grows_with_wind():
    times = []
    for w in range(0, 10):
        t = (1000.0 / ground_speed_along_track(12.0, (1.0, 0.0), (float(w), 0.0))
             + 1000.0 / ground_speed_along_track(12.0, (-1.0, 0.0), (float(w), 0.0)))
        times.append(t)
    assert times == sorted(times)
    assert times[0] == pytest.approx(2000.0 / 12.0)


# ---------------------------------------------------------------------------
# Stall speeds and mode selection


def test_stall_speed_retracted_is_baseline():
    p = morphing_platform()
    assert stall_speed(p, "retracted") == 13.30
    assert stall_speed(p) == 13.30


def test_stall_speed_drops_when_wing_extends():
    p = morphing_platform()
    expected = 13.30 * math.sqrt(0.527 / 0.709)
    assert stall_speed(p, "extended") == pytest.approx(expected, rel=1e-12)
    assert stall_speed(p, "extended") == pytest.approx(11.47, abs=0.05)


def test_stall_speed_rejects_multirotor():
    with pytest.raises(NotWingedError):
        stall_speed(simple_rotor())


def test_resolve_flight_multirotor():
    p = simple_rotor()
    assert resolve_flight(p, 9.0, "inspect") == FlightSetting("forward_vtol", "retracted", 9.0)
    assert resolve_flight(p, 15.0, "transit") == FlightSetting("forward_vtol", "retracted", 15.0)


def test_resolve_flight_fixed_wing_floors_at_stall():
    p = PlatformSpec(id="fw", kind="fixed_wing_vtol", battery_capacity_wh=710.0,
                     hover_power_w=900.0, cruise_power_w=180.0, v_inspect=15.0,
                     v_cruise=20.0, v_stall_base=13.30, wing_surface_retracted=0.6,
                     wing_surface_extended=0.6)
    slow = resolve_flight(p, 10.0, "inspect")
    assert slow.mode == "forward_wing"
    assert slow.airspeed == 13.30
    fast = resolve_flight(p, 20.0, "transit")
    assert fast == FlightSetting("forward_wing", "retracted", 20.0)


def test_resolve_flight_morphing_inspect_extends_wing():
    p = morphing_platform()
    stall_ext = stall_speed(p, "extended")
    wingborne = resolve_flight(p, 12.0, "inspect")
    assert wingborne == FlightSetting("forward_wing", "extended", 12.0)
    assert 12.0 >= stall_ext
    rotorborne = resolve_flight(p, 8.0, "inspect")
    assert rotorborne == FlightSetting("forward_vtol", "extended", 8.0)


def test_resolve_flight_morphing_transit_prefers_retracted():
    p = morphing_platform()
    assert resolve_flight(p, 20.0, "transit") == FlightSetting("forward_wing", "retracted", 20.0)
    mid = resolve_flight(p, 12.0, "transit")  # below base stall, above extended stall
    assert mid == FlightSetting("forward_wing", "extended", 12.0)
    slow = resolve_flight(p, 5.0, "transit")
    assert slow == FlightSetting("forward_vtol", "extended", 5.0)


def test_resolve_flight_rejects_unknown_phase():
    with pytest.raises(ValueError, match="phase"):
        resolve_flight(simple_rotor(), 10.0, "loiter")


# ---------------------------------------------------------------------------
# Power draw


def test_hover_power_is_flat():
    p = simple_rotor()
    assert power_draw(p, "hover", "retracted", 0.0) == 400.0


def test_forward_vtol_power_adds_cubic_drag():
    p = simple_rotor(drag_coeff=0.06)
    assert power_draw(p, "forward_vtol", "retracted", 10.0) == pytest.approx(400.0 + 0.06 * 1000.0)


def test_extended_wing_discounts_drag_term():
    p = morphing_platform()
    pw = power_draw(p, "forward_vtol", "extended", 10.0)
    assert pw == pytest.approx(520.0 + 0.06 * 0.85 * 1000.0)


def test_wing_borne_power_is_cruise_power():
    p = morphing_platform()
    assert power_draw(p, "forward_wing", "retracted", 18.0) == 170.0
    assert power_draw(p, "forward_wing", "extended", 12.0) == 170.0


def test_wing_borne_below_stall_raises():
    p = morphing_platform()
    with pytest.raises(StallError, match="stall"):
        power_draw(p, "forward_wing", "retracted", 12.0)


def test_leg_and_hover_energy():
    p = simple_rotor()
    setting = FlightSetting("hover", "retracted", 0.0)
    assert leg_energy(p, setting, 3600.0) == pytest.approx(400.0)
    assert hover_energy(p, 900.0) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        leg_energy(p, setting, -1.0)


# ---------------------------------------------------------------------------
# Battery and charging


def test_battery_state_accounting():
    p = simple_rotor(battery_capacity_wh=200.0)
    b = full_battery(p)
    assert b.fraction == 1.0
    b2 = b.drained(50.0)
    assert b2.level_wh == 150.0
    assert b2.deficit_wh == 50.0
    with pytest.raises(ValueError):
        b.drained(500.0)


def test_harvest_power_quadratic_then_saturated():
    assert harvest_power("baseline", 50.0) == pytest.approx(0.02 * 2500.0)
    assert harvest_power("baseline", 200.0) == HARVEST_SATURATION_W
    # saturation point: 0.02 I^2 = 120 at I ~ 77.46 A
    assert harvest_power("baseline", 80.0) == HARVEST_SATURATION_W


def test_optimized_harvest_is_fixed_multiple():
    for current in (20.0, 55.0, 77.0, 150.0):
        base = harvest_power("baseline", current)
        assert harvest_power("optimized", current) == OPTIMIZED_HARVEST_GAIN * base


def test_harvest_power_rejects_dead_line():
    with pytest.raises(ZeroHarvestError):
        harvest_power("baseline", 0.0)
    with pytest.raises(ValueError, match="harvest_mode"):
        harvest_power("turbo", 50.0)


def test_charge_duration_includes_ground_overheads():
    p = simple_rotor()  # landing 60 s, takeoff 30 s defaults
    # saturated line: 120 W, so 50 Wh takes 1500 s of charging
    assert charge_duration(p, 50.0, "baseline", 100.0) == pytest.approx(1590.0)
    assert charge_duration(p, 0.0, "baseline", 100.0) == pytest.approx(90.0)
    with pytest.raises(ValueError):
        charge_duration(p, -1.0, "baseline", 100.0)


# ---------------------------------------------------------------------------
# Spec validation


def test_platform_defaults_range_limit_by_kind():
    rotor = simple_rotor(range_limit=0.0)
    assert rotor.range_limit == 2000.0
    wing = morphing_platform(range_limit=0.0)
    assert wing.range_limit == 10000.0


def test_platform_rejects_bad_fields():
    with pytest.raises(SchemaError, match="kind"):
        simple_rotor(kind="ornithopter")
    with pytest.raises(SchemaError, match="hover_power_w"):
        simple_rotor(hover_power_w=0.0)
    with pytest.raises(SchemaError, match="reserve_fraction"):
        simple_rotor(reserve_fraction=1.0)
    with pytest.raises(SchemaError, match="v_stall_base"):
        morphing_platform(v_stall_base=0.0)
    with pytest.raises(SchemaError, match="wing_surface_extended"):
        morphing_platform(wing_surface_extended=0.3)


def test_reserve_and_hover_capability():
    p = simple_rotor(battery_capacity_wh=300.0, reserve_fraction=0.2)
    assert p.reserve_wh == pytest.approx(60.0)
    assert p.can_hover_inspect
    assert not p.is_winged
    m = morphing_platform()
    assert m.can_hover_inspect and m.is_winged
