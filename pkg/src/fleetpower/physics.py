"""Deterministic forward models for propulsion power.

Two model families live here. The grey-box mean function

    P = a * V^3 + b * cos(alpha) * U_R^2 * V

is linear in the resistance coefficients (a, b) and is what the inference
engine calibrates per ship. The white-box path composes the ITTC-1957
friction line with frictional and residual resistance to get a power estimate
from ship characteristics alone, without any consumption data.

The white-box regression tables for wetted surface and the residual
coefficient are not implemented; both are required inputs (a flagged
geometric heuristic for the wetted surface is available for convenience).
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, ParseError

#: Seawater near 15 degC; overridable wherever WaterProperties is accepted.
DEFAULT_WATER_DENSITY = 1025.0  # kg/m3
DEFAULT_KINEMATIC_VISCOSITY = 1.188e-6  # m2/s

CHARACTERISTICS_HEADER = [
    "ship_id",
    "gross_tonnage",
    "lwl_m",
    "breadth_m",
    "draft_m",
    "wetted_surface_m2",
    "c_r",
]


@dataclass(frozen=True)
class WaterProperties:
    """Bulk water properties used by the white-box resistance chain."""

    density: float = DEFAULT_WATER_DENSITY  # kg/m3
    kinematic_viscosity: float = DEFAULT_KINEMATIC_VISCOSITY  # m2/s

    def __post_init__(self):
        if not (self.density > 0 and math.isfinite(self.density)):
            raise DataError("water density must be positive and finite")
        if not (self.kinematic_viscosity > 0 and math.isfinite(self.kinematic_viscosity)):
            raise DataError("kinematic viscosity must be positive and finite")


@dataclass(frozen=True)
class VesselCharacteristics:
    """Static per-ship metadata.

    ``wetted_surface`` and ``residual_coeff`` are optional; they are only
    needed by the white-box model and are supplied externally (the published
    regression tables for them are out of scope).
    """

    ship_id: str
    gross_tonnage: float  # GT, dimensionless
    lwl: Optional[float] = None  # waterline length, m
    breadth: Optional[float] = None  # m
    draft: Optional[float] = None  # m
    wetted_surface: Optional[float] = None  # m2
    residual_coeff: Optional[float] = None  # dimensionless

    def __post_init__(self):
        if not (self.gross_tonnage > 0 and math.isfinite(self.gross_tonnage)):
            raise DataError("ship %r: gross_tonnage must be positive" % (self.ship_id,))
        for name in ("lwl", "breadth", "draft", "wetted_surface", "residual_coeff"):
            value = getattr(self, name)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise DataError("ship %r: %s must be positive when present" % (self.ship_id, name))


@dataclass(frozen=True)
class ShipParameters:
    """Per-ship resistance coefficients and observation noise scale."""

    a: float  # hydrodynamic coefficient, kg/m
    b: float  # aerodynamic coefficient, kg/m
    sigma: float  # observation noise s.d., W

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DataError("a must be positive and finite")
        if not (self.b >= 0 and math.isfinite(self.b)):
            raise DataError("b must be non-negative and finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DataError("sigma must be positive and finite")


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise DataError("%s must be finite" % name)


def greybox_power(params: ShipParameters, stw, rel_wind_speed, rel_wind_angle):
    """Mean grey-box propulsion power, W.

    Parameters
    ----------
    params : ShipParameters
        Resistance coefficients (a, b); ``sigma`` is ignored here.
    stw : float or ndarray
        Speed through water V, m/s (>= 0).
    rel_wind_speed : float or ndarray
        Relative wind speed U_R, m/s (>= 0).
    rel_wind_angle : float or ndarray
        Relative wind angle, rad; 0 is head-on.

    Returns
    -------
    float or ndarray
        ``a*V^3 + b*cos(angle)*U_R^2*V``. The value is linear in (a, b) and
        may be negative under a strong tailwind; no clamping is applied.
    """
    stw = np.asarray(stw, dtype=float)
    rel_wind_speed = np.asarray(rel_wind_speed, dtype=float)
    rel_wind_angle = np.asarray(rel_wind_angle, dtype=float)
    for name, value in (("stw", stw), ("rel_wind_speed", rel_wind_speed),
                        ("rel_wind_angle", rel_wind_angle)):
        _check_finite(name, value)
    if np.any(stw < 0):
        raise DataError("stw must be non-negative")
    if np.any(rel_wind_speed < 0):
        raise DataError("rel_wind_speed must be non-negative")
    power = params.a * stw ** 3 + params.b * np.cos(rel_wind_angle) * rel_wind_speed ** 2 * stw
    return float(power) if power.ndim == 0 else power


def reynolds_number(stw, lwl, nu):
    """Reynolds number V * L_wl / nu."""
    stw = np.asarray(stw, dtype=float)
    for name, value in (("stw", stw), ("lwl", lwl), ("nu", nu)):
        _check_finite(name, value)
    if np.any(stw <= 0) or lwl <= 0 or nu <= 0:
        raise DataError("reynolds_number requires positive stw, lwl, nu")
    out = stw * lwl / nu
    return float(out) if out.ndim == 0 else out


def ittc_friction_coefficient(reynolds):
    """ITTC-1957 friction line ``0.075 / (log10(Rn) - 2)**2``.

    Only defined for Rn > 100 (the denominator is singular at Rn = 100).
    Strictly decreasing in Rn.
    """
    reynolds = np.asarray(reynolds, dtype=float)
    _check_finite("reynolds", reynolds)
    if np.any(reynolds <= 100.0):
        raise DataError("ittc friction line requires reynolds > 100")
    out = 0.075 / (np.log10(reynolds) - 2.0) ** 2
    return float(out) if out.ndim == 0 else out


def frictional_resistance(friction_coeff, density, wetted_surface, stw):
    """Frictional resistance ``C_F * (rho/2) * S * V^2``, N."""
    stw = np.asarray(stw, dtype=float)
    for name, value in (("friction_coeff", friction_coeff), ("density", density),
                        ("wetted_surface", wetted_surface), ("stw", stw)):
        _check_finite(name, value)
    if np.any(np.asarray(friction_coeff) < 0) or density <= 0 or wetted_surface <= 0:
        raise DataError("frictional_resistance requires non-negative C_F and positive rho, S")
    if np.any(stw < 0):
        raise DataError("stw must be non-negative")
    out = np.asarray(friction_coeff) * 0.5 * density * wetted_surface * stw ** 2
    return float(out) if out.ndim == 0 else out


def residual_resistance(residual_coeff, density, breadth, draft, stw):
    """Residual resistance ``C_R * (rho/2) * (B*T/10) * V^2``, N."""
    stw = np.asarray(stw, dtype=float)
    for name, value in (("residual_coeff", residual_coeff), ("density", density),
                        ("breadth", breadth), ("draft", draft), ("stw", stw)):
        _check_finite(name, value)
    if residual_coeff < 0 or density <= 0 or breadth <= 0 or draft <= 0:
        raise DataError("residual_resistance requires non-negative C_R and positive rho, B, T")
    if np.any(stw < 0):
        raise DataError("stw must be non-negative")
    out = residual_coeff * 0.5 * density * (breadth * draft / 10.0) * stw ** 2
    return float(out) if out.ndim == 0 else out


def steam2_power(chars: VesselCharacteristics, water: WaterProperties, stw):
    """White-box propulsion power ``(R_F + R_R) * V``, W.

    Requires ``chars.wetted_surface``, ``chars.residual_coeff``, ``chars.lwl``,
    ``chars.breadth`` and ``chars.draft``; raises DataError when the white-box
    inputs are unavailable.
    """
    missing = [n for n in ("wetted_surface", "residual_coeff", "lwl", "breadth", "draft")
               if getattr(chars, n) is None]
    if missing:
        raise DataError("ship %r: white-box inputs unavailable (missing %s)"
                        % (chars.ship_id, ", ".join(missing)))
    stw = np.asarray(stw, dtype=float)
    if np.any(stw <= 0):
        raise DataError("steam2_power requires stw > 0")
    rn = reynolds_number(stw, chars.lwl, water.kinematic_viscosity)
    cf = ittc_friction_coefficient(rn)
    rf = frictional_resistance(cf, water.density, chars.wetted_surface, stw)
    rr = residual_resistance(chars.residual_coeff, water.density, chars.breadth,
                             chars.draft, stw)
    out = (rf + rr) * stw
    return float(out) if out.ndim == 0 else out


def heuristic_wetted_surface(chars: VesselCharacteristics, factor: float = 1.0) -> float:
    """Rough fallback ``lwl * (B + 2T) * factor`` when S is not supplied.

    Any output derived from this value should be labeled as using a heuristic
    wetted surface; it is a convenience, not a substitute for the published
    regression estimate.
    """
    if chars.lwl is None or chars.breadth is None or chars.draft is None:
        raise DataError("ship %r: heuristic wetted surface needs lwl, breadth, draft"
                        % (chars.ship_id,))
    if factor <= 0:
        raise DataError("wetted surface factor must be positive")
    return chars.lwl * (chars.breadth + 2.0 * chars.draft) * factor


def _parse_float(text, column, path, line, optional=False):
    text = text.strip()
    if text == "":
        if optional:
            return None
        raise ParseError("missing value for %s" % column, path, line)
    try:
        return float(text)
    except ValueError:
        raise ParseError("unparseable %s: %r" % (column, text), path, line) from None


def load_characteristics_csv(path, strict: bool = True):
    """Load a vessel characteristics CSV.

    Columns: ``ship_id,gross_tonnage,lwl_m,breadth_m,draft_m,
    wetted_surface_m2,c_r``; the last two may be empty. In strict mode any bad
    row raises ParseError with its line number; otherwise bad rows are skipped
    and reported in the returned ``(ships, problems)`` tuple.
    """
    ships = []
    problems = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header", path, 1) from None
        if [h.strip() for h in header] != CHARACTERISTICS_HEADER:
            raise ParseError("bad header %r, expected %r" % (header, CHARACTERISTICS_HEADER),
                             path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != len(CHARACTERISTICS_HEADER):
                    raise ParseError("expected %d columns, got %d"
                                     % (len(CHARACTERISTICS_HEADER), len(row)), path, lineno)
                ship_id = row[0].strip()
                if not ship_id:
                    raise ParseError("empty ship_id", path, lineno)
                if ship_id in seen:
                    raise ParseError("duplicate ship_id %r" % ship_id, path, lineno)
                chars = VesselCharacteristics(
                    ship_id=ship_id,
                    gross_tonnage=_parse_float(row[1], "gross_tonnage", path, lineno),
                    lwl=_parse_float(row[2], "lwl_m", path, lineno, optional=True),
                    breadth=_parse_float(row[3], "breadth_m", path, lineno, optional=True),
                    draft=_parse_float(row[4], "draft_m", path, lineno, optional=True),
                    wetted_surface=_parse_float(row[5], "wetted_surface_m2", path, lineno,
                                                optional=True),
                    residual_coeff=_parse_float(row[6], "c_r", path, lineno, optional=True),
                )
            except (ParseError, DataError) as exc:
                if strict:
                    if isinstance(exc, ParseError):
                        raise
                    raise ParseError(str(exc), path, lineno) from None
                problems.append("%s:%d: %s" % (path, lineno, exc))
                continue
            seen.add(ship_id)
            ships.append(chars)
    return ships, problems


def save_characteristics_csv(path, ships):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CHARACTERISTICS_HEADER)
        for c in ships:
            writer.writerow([
                c.ship_id,
                repr(float(c.gross_tonnage)),
                "" if c.lwl is None else repr(float(c.lwl)),
                "" if c.breadth is None else repr(float(c.breadth)),
                "" if c.draft is None else repr(float(c.draft)),
                "" if c.wetted_surface is None else repr(float(c.wetted_surface)),
                "" if c.residual_coeff is None else repr(float(c.residual_coeff)),
            ])
