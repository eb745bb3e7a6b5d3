"""Joint posterior for the hierarchical fleet model.

Per ship i with rows (x_hydro, x_aero, y):

    y_ij ~ Normal(a_i * x_hydro_ij + b_i * x_aero_ij, sigma_i)
    a_i  ~ Normal(lambda1 + lambda2 * w_i, sigma_a)
    b_i  ~ Normal(lambda3 + lambda4 * w_i, sigma_b)

where w_i is the ship's gross tonnage. Resistance coefficients carry uniform
priors over a data-scaled box (a > 0, b >= 0); the scales sigma carry uniform
priors with positivity constraints; the hyper slopes/intercepts are
unbounded (flat). The log posterior is the sum of the per-ship Gaussian log
likelihoods and the hyper-level Gaussian log densities; the flat-prior
constant is fixed to zero.

Internally the sampler works with gross tonnage centered at the fleet mean
(``w_i - gt_centering``), a pure reparameterization that decorrelates
intercepts and slopes; reported lambdas are always in the uncentered
parameterization above.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError
from .ingest import feature_arrays
from .physics import VesselCharacteristics

_LOG_2PI = math.log(2.0 * math.pi)

# Relative floor for the lower edge of the sigma boxes; keeps the scale
# conditionals proper even on exactly noise-free data.
_SIGMA_LO_REL = 1e-9


@dataclass(frozen=True)
class HyperParameters:
    """Hyper-model slopes/intercepts and between-ship noise scales."""

    lambda1: float  # kg/m
    lambda2: float  # kg/m per GT
    lambda3: float  # kg/m
    lambda4: float  # kg/m per GT
    sigma_a: float  # kg/m
    sigma_b: float  # kg/m

    def __post_init__(self):
        if not (self.sigma_a > 0 and math.isfinite(self.sigma_a)):
            raise DataError("sigma_a must be positive and finite")
        if not (self.sigma_b > 0 and math.isfinite(self.sigma_b)):
            raise DataError("sigma_b must be positive and finite")

    def coefficients_at(self, gross_tonnage: float) -> Tuple[float, float]:
        """Hyper-line evaluation (a, b) at a gross tonnage, noise excluded."""
        return (self.lambda1 + self.lambda2 * gross_tonnage,
                self.lambda3 + self.lambda4 * gross_tonnage)


@dataclass
class PriorBounds:
    """Box bounds for all sampled parameters.

    a lies in (0, a_hi], b in [0, b_hi]; each sigma in [lo, hi] where lo is a
    tiny positive numerical guard. The hyper slopes/intercepts are unbounded.
    ``notes`` records how data-driven values were chosen.
    """

    a_hi: float
    b_hi: float
    sigma_obs_lo: float
    sigma_obs_hi: np.ndarray  # per ship
    sigma_a_lo: float
    sigma_a_hi: float
    sigma_b_lo: float
    sigma_b_hi: float
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.sigma_obs_hi = np.asarray(self.sigma_obs_hi, dtype=float)
        if not (self.a_hi > 0 and self.b_hi > 0):
            raise DataError("coefficient boxes must have positive upper edges")
        if not (self.sigma_obs_lo > 0 and np.all(self.sigma_obs_hi > self.sigma_obs_lo)):
            raise DataError("sigma_obs box is empty")
        if not (0 < self.sigma_a_lo < self.sigma_a_hi):
            raise DataError("sigma_a box is empty")
        if not (0 < self.sigma_b_lo < self.sigma_b_hi):
            raise DataError("sigma_b box is empty")


class FleetModel:
    """A fleet of ships with observations, ready for posterior evaluation.

    Parameters
    ----------
    ships : sequence of (VesselCharacteristics, rows)
        Rows are FeatureRow or NoonReport sequences, at least one per ship.
    prior_bounds : PriorBounds, optional
        Defaults to :func:`bounds_from_data` with ``bound_multiplier``.
    bound_multiplier : float
        Width factor for the data-driven prior boxes.
    """

    def __init__(self, ships, prior_bounds: Optional[PriorBounds] = None,
                 bound_multiplier: float = 10.0):
        ships = list(ships)
        if not ships:
            raise DataError("fleet must contain at least one ship")
        self.characteristics: List[VesselCharacteristics] = []
        xh_parts, xa_parts, y_parts = [], [], []
        seen = set()
        for chars, rows in ships:
            xh, xa, y = feature_arrays(rows)
            if xh.size == 0:
                raise DataError("ship %r has no observations" % chars.ship_id)
            if chars.ship_id in seen:
                raise DataError("duplicate ship %r in fleet" % chars.ship_id)
            seen.add(chars.ship_id)
            self.characteristics.append(chars)
            xh_parts.append(xh)
            xa_parts.append(xa)
            y_parts.append(y)

        self.ship_ids = [c.ship_id for c in self.characteristics]
        self.n_ships = len(self.ship_ids)
        self.gt = np.array([c.gross_tonnage for c in self.characteristics], dtype=float)
        self.gt_centering = float(np.mean(self.gt))
        self.wtil = self.gt - self.gt_centering

        self.nobs = np.array([len(p) for p in xh_parts], dtype=np.int64)
        self.offsets = np.zeros(self.n_ships + 1, dtype=np.int64)
        np.cumsum(self.nobs, out=self.offsets[1:])
        self.xh = np.concatenate(xh_parts)
        self.xa = np.concatenate(xa_parts)
        self.y = np.concatenate(y_parts)

        # Per-ship sufficient statistics for the Gaussian blocks.
        self.sxx00 = np.zeros(self.n_ships)
        self.sxx01 = np.zeros(self.n_ships)
        self.sxx11 = np.zeros(self.n_ships)
        self.sxy0 = np.zeros(self.n_ships)
        self.sxy1 = np.zeros(self.n_ships)
        for i in range(self.n_ships):
            xh, xa, y = self.ship_rows(i)
            self.sxx00[i] = xh @ xh
            self.sxx01[i] = xh @ xa
            self.sxx11[i] = xa @ xa
            self.sxy0[i] = xh @ y
            self.sxy1[i] = xa @ y

        self._ols = None
        self.prior_bounds = prior_bounds if prior_bounds is not None else bounds_from_data(
            self, multiplier=bound_multiplier)

    def ship_rows(self, i: int):
        s, e = self.offsets[i], self.offsets[i + 1]
        return self.xh[s:e], self.xa[s:e], self.y[s:e]

    def ship_index(self, ship_id: str) -> int:
        try:
            return self.ship_ids.index(ship_id)
        except ValueError:
            raise DataError("unknown ship %r" % ship_id) from None

    @property
    def param_names(self) -> List[str]:
        names = []
        for sid in self.ship_ids:
            names.extend(["a[%s]" % sid, "b[%s]" % sid, "sigma[%s]" % sid])
        names.extend(["lambda1", "lambda2", "lambda3", "lambda4", "sigma_a", "sigma_b"])
        return names

    @property
    def n_params(self) -> int:
        return 3 * self.n_ships + 6

    def ols_estimates(self):
        """Per-ship least squares (a_hat, b_hat, sigma_hat, identifiable flags).

        Non-identifiable columns (zero variance) get the minimum-norm
        coefficient 0 and a False flag.
        """
        if self._ols is not None:
            return self._ols
        n = self.n_ships
        a_hat = np.zeros(n)
        b_hat = np.zeros(n)
        sigma_hat = np.zeros(n)
        ident_a = np.zeros(n, dtype=bool)
        ident_b = np.zeros(n, dtype=bool)
        for i in range(n):
            xh, xa, y = self.ship_rows(i)
            ident_a[i] = self.sxx00[i] > 0.0
            ident_b[i] = self.sxx11[i] > 0.0
            design = np.column_stack([xh, xa])
            coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
            a_hat[i], b_hat[i] = coef
            resid = y - design @ coef
            dof = max(int(len(y)) - int(rank), 1)
            sigma_hat[i] = math.sqrt(float(resid @ resid) / dof)
        self._ols = (a_hat, b_hat, sigma_hat, ident_a, ident_b)
        return self._ols

    def unpack(self, theta: np.ndarray):
        """Split a parameter vector into (a, b, sigma, lam, sigma_a, sigma_b)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise DataError("parameter vector has length %d, expected %d"
                            % (theta.size, self.n_params))
        per_ship = theta[:3 * self.n_ships].reshape(self.n_ships, 3)
        a = per_ship[:, 0]
        b = per_ship[:, 1]
        sigma = per_ship[:, 2]
        lam = theta[3 * self.n_ships:3 * self.n_ships + 4]
        sigma_a = theta[-2]
        sigma_b = theta[-1]
        return a, b, sigma, lam, sigma_a, sigma_b

    def pack(self, a, b, sigma, lam, sigma_a, sigma_b) -> np.ndarray:
        theta = np.empty(self.n_params)
        per_ship = theta[:3 * self.n_ships].reshape(self.n_ships, 3)
        per_ship[:, 0] = a
        per_ship[:, 1] = b
        per_ship[:, 2] = sigma
        theta[3 * self.n_ships:3 * self.n_ships + 4] = lam
        theta[-2] = sigma_a
        theta[-1] = sigma_b
        return theta

    def inside_box(self, theta: np.ndarray) -> bool:
        a, b, sigma, lam, sigma_a, sigma_b = self.unpack(theta)
        pb = self.prior_bounds
        if not np.all(np.isfinite(theta)):
            return False
        if np.any(a <= 0.0) or np.any(a > pb.a_hi):
            return False
        if np.any(b < 0.0) or np.any(b > pb.b_hi):
            return False
        if np.any(sigma < pb.sigma_obs_lo) or np.any(sigma > pb.sigma_obs_hi):
            return False
        if not (pb.sigma_a_lo <= sigma_a <= pb.sigma_a_hi):
            return False
        if not (pb.sigma_b_lo <= sigma_b <= pb.sigma_b_hi):
            return False
        return True


def bounds_from_data(fleet: FleetModel, multiplier: float = 10.0) -> PriorBounds:
    """Scale-aware prior boxes: ``multiplier`` times data-driven estimates.

    Coefficient boxes come from per-ship least squares; the sigma_obs box
    from per-ship response spreads; the hyper-noise boxes from the spread of
    the least-squares coefficients across ships. Fallbacks for degenerate
    cases are recorded in ``notes``.
    """
    if multiplier <= 0:
        raise DataError("bound multiplier must be positive")
    a_hat, b_hat, _, ident_a, ident_b = fleet.ols_estimates()
    notes = []

    a_scale = float(np.max(np.abs(a_hat))) if np.any(ident_a) else 0.0
    if a_scale <= 0:
        a_scale = 1.0
        notes.append("a box fallback: no identifiable hydro coefficient, using 1.0 kg/m")
    a_hi = multiplier * a_scale

    if np.any(ident_b):
        b_scale = float(np.max(np.abs(b_hat[ident_b])))
    else:
        b_scale = 0.0
    if b_scale <= 0:
        b_scale = a_scale
        notes.append("b box fallback: no identifiable aero coefficient, reusing the a scale")
    b_hi = multiplier * b_scale

    y_sd = np.empty(fleet.n_ships)
    for i in range(fleet.n_ships):
        _, _, y = fleet.ship_rows(i)
        sd = float(np.std(y))
        if sd <= 0:
            sd = max(abs(float(np.mean(y))), 1.0)
            notes.append("sigma box fallback for ship %s: constant response"
                         % fleet.ship_ids[i])
        y_sd[i] = sd
    sigma_obs_hi = multiplier * y_sd
    sigma_obs_lo = _SIGMA_LO_REL * float(np.min(y_sd))

    def _spread(values, label):
        sd = float(np.std(values))
        if sd <= 0:
            sd = max(float(np.mean(np.abs(values))), 1.0)
            notes.append("%s box fallback: zero across-ship spread" % label)
        return sd

    sa_scale = _spread(a_hat, "sigma_a")
    sb_scale = _spread(b_hat[ident_b] if np.any(ident_b) else a_hat, "sigma_b")
    return PriorBounds(
        a_hi=a_hi,
        b_hi=b_hi,
        sigma_obs_lo=sigma_obs_lo,
        sigma_obs_hi=sigma_obs_hi,
        sigma_a_lo=_SIGMA_LO_REL * sa_scale,
        sigma_a_hi=multiplier * sa_scale,
        sigma_b_lo=_SIGMA_LO_REL * sb_scale,
        sigma_b_hi=multiplier * sb_scale,
        notes=notes,
    )


def log_likelihood(fleet: FleetModel, theta: np.ndarray) -> float:
    """Sum over ships of the Gaussian observation log likelihood."""
    a, b, sigma, _, _, _ = fleet.unpack(theta)
    total = 0.0
    for i in range(fleet.n_ships):
        xh, xa, y = fleet.ship_rows(i)
        resid = y - a[i] * xh - b[i] * xa
        n = resid.size
        total += (-0.5 * n * _LOG_2PI - n * math.log(sigma[i])
                  - float(resid @ resid) / (2.0 * sigma[i] ** 2))
    return total


def log_hyper_density(fleet: FleetModel, theta: np.ndarray) -> float:
    """Gaussian log density of the coefficients around the hyper-lines."""
    a, b, _, lam, sigma_a, sigma_b = fleet.unpack(theta)
    ra = a - (lam[0] + lam[1] * fleet.gt)
    rb = b - (lam[2] + lam[3] * fleet.gt)
    n = fleet.n_ships
    return (-0.5 * n * _LOG_2PI - n * math.log(sigma_a) - float(ra @ ra) / (2.0 * sigma_a ** 2)
            - 0.5 * n * _LOG_2PI - n * math.log(sigma_b) - float(rb @ rb) / (2.0 * sigma_b ** 2))


def log_posterior(fleet: FleetModel, theta: np.ndarray) -> float:
    """Joint log posterior (flat-prior constant fixed to zero).

    Returns -inf outside the prior box; otherwise
    ``log_likelihood + log_hyper_density``.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (fleet.n_params,):
        raise DataError("parameter vector has length %d, expected %d"
                        % (theta.size, fleet.n_params))
    if not fleet.inside_box(theta):
        return float("-inf")
    return log_likelihood(fleet, theta) + log_hyper_density(fleet, theta)
