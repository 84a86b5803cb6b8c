"""Platform flight-performance and battery models.

Power units are watts, energy is watt-hours, speeds are m/s. Airspeed is what
the platform commands; ground speed is what the mission clock sees. The two
are related through the wind triangle, so every duration/energy helper here
takes the wind into account explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from . import serialize
from .errors import NotWingedError, SchemaError, StallError, WindError, ZeroHarvestError

KIND_MULTIROTOR = "multirotor"
KIND_FIXED_WING = "fixed_wing_vtol"
KIND_MORPHING = "morphing_vtol"
KINDS = (KIND_MULTIROTOR, KIND_FIXED_WING, KIND_MORPHING)
WINGED_KINDS = (KIND_FIXED_WING, KIND_MORPHING)

MODE_HOVER = "hover"
MODE_FORWARD_VTOL = "forward_vtol"
MODE_FORWARD_WING = "forward_wing"
MODES = (MODE_HOVER, MODE_FORWARD_VTOL, MODE_FORWARD_WING)

WING_RETRACTED = "retracted"
WING_EXTENDED = "extended"
WING_CONFIGS = (WING_RETRACTED, WING_EXTENDED)

# Inductive harvest curve: P = min(k * I^2, saturation), for primary current I.
HARVEST_COEFF_W_PER_A2 = 0.02
HARVEST_SATURATION_W = 120.0
# Measured gain of the resonant-tuned pickup over the plain coil.
OPTIMIZED_HARVEST_GAIN = 1.586


@dataclass(frozen=True)
class PlatformSpec:
    """Static performance envelope of one vehicle.

    drag_coeff is the cubic forward-flight power coefficient in W/(m/s)^3 for
    rotor-borne translation. morph_drag_factor scales it when extended wings
    offload the rotors. Winged kinds must give cruise_power_w and v_stall_base;
    stall speed in the extended configuration follows from the wing areas.
    """

    id: str
    kind: str
    battery_capacity_wh: float
    hover_power_w: float
    v_inspect: float
    v_cruise: float
    cruise_power_w: float = 0.0
    drag_coeff: float = 0.06
    v_stall_base: float = 0.0
    wing_surface_retracted: float = 0.0
    wing_surface_extended: float = 0.0
    morph_drag_factor: float = 0.85
    max_wind: float = 12.0
    reserve_fraction: float = 0.1
    range_limit: float = 0.0
    transit_buffer: float = 30.0
    v_vertical: float = 3.0
    landing_duration: float = 60.0
    takeoff_duration: float = 30.0
    mass: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"platform {self.id}: unknown kind {self.kind!r}")
        for name in ("battery_capacity_wh", "hover_power_w", "v_inspect", "v_cruise",
                     "v_vertical", "transit_buffer"):
            if getattr(self, name) <= 0:
                raise SchemaError(f"platform {self.id}: {name} must be > 0")
        if not 0.0 <= self.reserve_fraction < 1.0:
            raise SchemaError(f"platform {self.id}: reserve_fraction must be in [0, 1)")
        if self.kind in WINGED_KINDS:
            if self.v_stall_base <= 0:
                raise SchemaError(f"platform {self.id}: winged kind needs v_stall_base > 0")
            if self.cruise_power_w <= 0:
                raise SchemaError(f"platform {self.id}: winged kind needs cruise_power_w > 0")
            if self.wing_surface_retracted <= 0 or self.wing_surface_extended <= 0:
                raise SchemaError(f"platform {self.id}: winged kind needs both wing surfaces > 0")
            if self.wing_surface_extended < self.wing_surface_retracted:
                raise SchemaError(
                    f"platform {self.id}: wing_surface_extended must be >= wing_surface_retracted"
                )
        if self.range_limit <= 0:
            # default operating radius by class
            object.__setattr__(
                self, "range_limit", 2000.0 if self.kind == KIND_MULTIROTOR else 10000.0
            )

    @property
    def is_winged(self) -> bool:
        return self.kind in WINGED_KINDS

    @property
    def can_hover_inspect(self) -> bool:
        return self.kind in (KIND_MULTIROTOR, KIND_MORPHING)

    @property
    def reserve_wh(self) -> float:
        return self.battery_capacity_wh * self.reserve_fraction


@dataclass
class BatteryState:
    capacity_wh: float
    level_wh: float

    def __post_init__(self):
        if not 0.0 <= self.level_wh <= self.capacity_wh + 1e-9:
            raise ValueError(f"battery level {self.level_wh} outside [0, {self.capacity_wh}]")

    @property
    def fraction(self) -> float:
        return self.level_wh / self.capacity_wh

    @property
    def deficit_wh(self) -> float:
        return self.capacity_wh - self.level_wh

    def drained(self, wh: float) -> "BatteryState":
        return replace(self, level_wh=self.level_wh - wh)


def full_battery(platform: PlatformSpec) -> BatteryState:
    return BatteryState(platform.battery_capacity_wh, platform.battery_capacity_wh)


# ---------------------------------------------------------------------------
# Wind triangle


def airspeed_magnitude(ground_velocity, wind) -> float:
    """Airspeed needed to realize a ground velocity vector under a steady wind."""
    return math.hypot(ground_velocity[0] - wind[0], ground_velocity[1] - wind[1])


def wind_components(track_unit, wind) -> tuple[float, float]:
    """(along-track, cross-track magnitude) decomposition of the wind."""
    along = wind[0] * track_unit[0] + wind[1] * track_unit[1]
    cross = wind[0] * -track_unit[1] + wind[1] * track_unit[0]
    return along, abs(cross)


def ground_speed_along_track(airspeed: float, track_unit, wind) -> float:
    """Ground speed achieved by crabbing along track_unit at a commanded
    airspeed. Raises WindError when the wind makes the track unflyable."""
    along, cross = wind_components(track_unit, wind)
    if airspeed <= cross:
        raise WindError(
            f"airspeed {airspeed:.2f} m/s cannot hold track against {cross:.2f} m/s crosswind"
        )
    gs = along + math.sqrt(airspeed * airspeed - cross * cross)
    if gs <= 0.0:
        raise WindError(
            f"airspeed {airspeed:.2f} m/s gives non-positive ground speed into {-along:.2f} m/s headwind"
        )
    return gs


def track_unit(p1, p2) -> tuple[float, float]:
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    d = math.hypot(dx, dy)
    if d == 0.0:
        return (1.0, 0.0)
    return (dx / d, dy / d)


# ---------------------------------------------------------------------------
# Stall and flight mode resolution


def stall_speed(platform: PlatformSpec, wing_config: str = WING_RETRACTED) -> float:
    """Minimum wing-borne airspeed. Lift scales with wing area, so the stall
    speed scales with 1/sqrt(area) relative to the retracted baseline."""
    if not platform.is_winged:
        raise NotWingedError(f"platform {platform.id} ({platform.kind}) has no wing")
    if wing_config not in WING_CONFIGS:
        raise ValueError(f"unknown wing config {wing_config!r}")
    if wing_config == WING_RETRACTED:
        return platform.v_stall_base
    ratio = platform.wing_surface_retracted / platform.wing_surface_extended
    return platform.v_stall_base * math.sqrt(ratio)


@dataclass(frozen=True)
class FlightSetting:
    """Resolved (mode, wing config, commanded airspeed) for one leg."""

    mode: str
    wing_config: str
    airspeed: float


def resolve_flight(platform: PlatformSpec, requested_airspeed: float, phase: str) -> FlightSetting:
    """Pick the cheapest legal mode for a leg.

    phase is "inspect" or "transit". Multirotors always translate rotor-borne.
    Fixed wings are always wing-borne (the airspeed floors at stall). Morphing
    platforms extend the wing to stay wing-borne at low inspection speeds and
    retract it for fast transit; below the extended-wing stall they fall back
    to rotor-borne flight with the wing extended for partial lift.
    """
    if phase not in ("inspect", "transit"):
        raise ValueError(f"unknown phase {phase!r}")
    v = requested_airspeed
    if platform.kind == KIND_MULTIROTOR:
        return FlightSetting(MODE_FORWARD_VTOL, WING_RETRACTED, v)
    if platform.kind == KIND_FIXED_WING:
        return FlightSetting(MODE_FORWARD_WING, WING_RETRACTED, max(v, platform.v_stall_base))
    stall_ext = stall_speed(platform, WING_EXTENDED)
    if phase == "inspect":
        if v >= stall_ext:
            return FlightSetting(MODE_FORWARD_WING, WING_EXTENDED, v)
        return FlightSetting(MODE_FORWARD_VTOL, WING_EXTENDED, v)
    if v >= platform.v_stall_base:
        return FlightSetting(MODE_FORWARD_WING, WING_RETRACTED, v)
    if v >= stall_ext:
        return FlightSetting(MODE_FORWARD_WING, WING_EXTENDED, v)
    return FlightSetting(MODE_FORWARD_VTOL, WING_EXTENDED, v)


# ---------------------------------------------------------------------------
# Power and energy


def power_draw(platform: PlatformSpec, mode: str, wing_config: str, airspeed: float) -> float:
    """Electrical power in watts for a flight condition.

    Rotor-borne translation costs hover power plus a cubic drag term; an
    extended wing offloads the rotors and discounts that term. Wing-borne
    flight costs a flat cruise power but is only legal above stall.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if wing_config not in WING_CONFIGS:
        raise ValueError(f"unknown wing config {wing_config!r}")
    if mode == MODE_HOVER:
        return platform.hover_power_w
    if mode == MODE_FORWARD_VTOL:
        coeff = platform.drag_coeff
        if wing_config == WING_EXTENDED and platform.is_winged:
            coeff *= platform.morph_drag_factor
        return platform.hover_power_w + coeff * airspeed ** 3
    v_min = stall_speed(platform, wing_config)
    if airspeed < v_min - 1e-9:
        raise StallError(
            f"platform {platform.id}: airspeed {airspeed:.2f} m/s below "
            f"{wing_config} stall speed {v_min:.2f} m/s"
        )
    return platform.cruise_power_w


def leg_energy(platform: PlatformSpec, setting: FlightSetting, duration_s: float) -> float:
    """Energy in Wh drawn over a leg flown at a fixed setting."""
    if duration_s < 0:
        raise ValueError(f"negative duration {duration_s}")
    return power_draw(platform, setting.mode, setting.wing_config, setting.airspeed) * duration_s / 3600.0


def hover_energy(platform: PlatformSpec, duration_s: float) -> float:
    return platform.hover_power_w * duration_s / 3600.0


# ---------------------------------------------------------------------------
# Charging


def harvest_power(harvest_mode: str, primary_current: float) -> float:
    """Power in watts delivered by a clamp-on charge point.

    The plain pickup follows a quadratic of primary current up to a hard
    saturation; the tuned pickup delivers a fixed multiple of that.
    """
    base = min(HARVEST_COEFF_W_PER_A2 * primary_current ** 2, HARVEST_SATURATION_W)
    if harvest_mode == "baseline":
        power = base
    elif harvest_mode == "optimized":
        power = OPTIMIZED_HARVEST_GAIN * base
    else:
        raise ValueError(f"unknown harvest_mode {harvest_mode!r}")
    if power <= 0.0:
        raise ZeroHarvestError(
            f"charge point delivers no power at primary current {primary_current:.1f} A"
        )
    return power


def charge_duration(platform: PlatformSpec, deficit_wh: float, harvest_mode: str,
                    primary_current: float) -> float:
    """Total stop duration in seconds to recover deficit_wh at a charge point,
    including the landing and takeoff overheads."""
    if deficit_wh < 0:
        raise ValueError(f"negative deficit {deficit_wh}")
    power = harvest_power(harvest_mode, primary_current)
    return deficit_wh * 3600.0 / power + platform.landing_duration + platform.takeoff_duration


# ---------------------------------------------------------------------------
# Fleet file format

_PLATFORM_REQUIRED = ("id", "kind", "battery_capacity_wh", "hover_power_w", "v_inspect", "v_cruise")
_PLATFORM_OPTIONAL = (
    "cruise_power_w", "drag_coeff", "v_stall_base", "wing_surface_retracted",
    "wing_surface_extended", "morph_drag_factor", "max_wind", "reserve_fraction",
    "range_limit", "transit_buffer", "v_vertical", "landing_duration",
    "takeoff_duration", "mass",
)


def platform_to_dict(p: PlatformSpec) -> dict:
    return {
        "id": p.id,
        "kind": p.kind,
        "battery_capacity_wh": p.battery_capacity_wh,
        "hover_power_w": p.hover_power_w,
        "v_inspect": p.v_inspect,
        "v_cruise": p.v_cruise,
        "cruise_power_w": p.cruise_power_w,
        "drag_coeff": p.drag_coeff,
        "v_stall_base": p.v_stall_base,
        "wing_surface_retracted": p.wing_surface_retracted,
        "wing_surface_extended": p.wing_surface_extended,
        "morph_drag_factor": p.morph_drag_factor,
        "max_wind": p.max_wind,
        "reserve_fraction": p.reserve_fraction,
        "range_limit": p.range_limit,
        "transit_buffer": p.transit_buffer,
        "v_vertical": p.v_vertical,
        "landing_duration": p.landing_duration,
        "takeoff_duration": p.takeoff_duration,
        "mass": p.mass,
    }


def platform_from_dict(data: dict, ctx: str) -> PlatformSpec:
    serialize.require_keys(data, _PLATFORM_REQUIRED, _PLATFORM_OPTIONAL, ctx)
    kwargs = {
        "id": serialize.get_string(data, "id", ctx),
        "kind": serialize.get_string(data, "kind", ctx),
    }
    for key in _PLATFORM_REQUIRED[2:]:
        kwargs[key] = serialize.get_number(data, key, ctx)
    for key in _PLATFORM_OPTIONAL:
        if key in data:
            kwargs[key] = serialize.get_number(data, key, ctx)
    return PlatformSpec(**kwargs)


def load_fleet(path: str | Path) -> list[PlatformSpec]:
    data = serialize.load_path(path)
    ctx = str(path)
    serialize.require_keys(data, ("format_version", "platforms"), (), ctx)
    serialize.check_version(data, ctx)
    if not isinstance(data["platforms"], list) or not data["platforms"]:
        raise SchemaError(f"{ctx}: platforms must be a non-empty list")
    fleet = [
        platform_from_dict(item, f"{ctx}.platforms[{i}]")
        for i, item in enumerate(data["platforms"])
    ]
    ids = [p.id for p in fleet]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise SchemaError(f"{ctx}: duplicate platform ids {dupes}")
    return fleet


def write_fleet(fleet: list[PlatformSpec], path: str | Path) -> None:
    serialize.dump_path(
        {"format_version": serialize.FORMAT_VERSION,
         "platforms": [platform_to_dict(p) for p in fleet]},
        path,
    )
