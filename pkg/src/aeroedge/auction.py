"""Area assignment by sealed bids: linear utilities over the estimates,
greedy per-UAV allocation with declared tie-breaking, marginal (VCG-style)
prices from counterfactual re-allocation, and waypoint planning.

The utility weight on estimated energy defaults to a small negative value so
cheaper areas bid higher; bids are utilities scaled by a positive stability
coefficient, which never changes any argmax. Prices are computed by rerunning
the allocation without each UAV in turn. Note the per-row argmax allocation
is not welfare-maximizing, so truthfulness is not guaranteed; misreport_probe
lets callers explore that directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .estimator import AreaEstimate
from .world import Position3, TaskArea, UavState

# relative inward pull on planned boundary waypoints so that arrival
# satisfies the closed-disc presence test despite float rounding
_BOUNDARY_MARGIN = 1e-9


@dataclass
class BidMatrix:
    values: np.ndarray  # (U, M) bids
    utilities: np.ndarray  # (U, M)
    gamma1: float
    gamma2: float
    bid_scale: float


@dataclass
class AuctionResult:
    assignment: list[int]  # area index per UAV
    area_sets: list[list[int]]  # UAV indices per area
    total_utility: float
    prices: Optional[list[float]] = None


def utility(est: AreaEstimate, gamma1: float, gamma2: float) -> float:
    """Linear combination of estimated energy and estimated successes."""
    return gamma1 * est.est_energy + gamma2 * est.est_success


def build_bids(estimates: Sequence[Sequence[AreaEstimate]],
               gamma1: float = -0.001, gamma2: float = 1.0,
               bid_scale: float = 1.0) -> BidMatrix:
    """Bid matrix over a complete U x M estimate grid."""
    if bid_scale <= 0:
        raise ConfigError("auction.bid_scale must be positive")
    n_uavs = len(estimates)
    if n_uavs == 0 or len(estimates[0]) == 0:
        raise ConfigError("auction requires at least one UAV and one area")
    utils = np.array([[utility(est, gamma1, gamma2) for est in row]
                      for row in estimates], dtype=np.float64)
    if not np.all(np.isfinite(utils)):
        raise ConfigError("auction utilities must be finite")
    return BidMatrix(values=bid_scale * utils, utilities=utils,
                     gamma1=gamma1, gamma2=gamma2, bid_scale=bid_scale)


def _allocate_rows(values: np.ndarray, utilities: np.ndarray,
                   rows: Sequence[int], n_areas: int,
                   capacity: Optional[int]) -> tuple[dict[int, int], float]:
    """Greedy allocation over the given UAV rows (ascending); returns the
    row->area map and the summed utility of chosen cells."""
    if capacity is not None and capacity * n_areas < len(rows):
        raise ConfigError("auction.capacity too small for the UAV count")
    remaining = [capacity] * n_areas if capacity is not None else None
    chosen: dict[int, int] = {}
    total = 0.0
    for u in rows:
        if remaining is None:
            area = int(np.argmax(values[u]))  # first max: lowest area index
        else:
            open_areas = [m for m in range(n_areas) if remaining[m] > 0]
            area = max(open_areas, key=lambda m: (values[u, m], -m))
            remaining[area] -= 1
        chosen[u] = area
        total += float(utilities[u, area])
    return chosen, total


def allocate(bids: BidMatrix, capacity: Optional[int] = None) -> AuctionResult:
    """Assign every UAV to its maximal-bid area (ties: lowest area index).

    Multiple UAVs may share an area; with a per-area capacity, UAVs are
    processed in ascending index and each takes its best area that still has
    room. Total utility sums the chosen cells of the utility matrix.
    """
    n_uavs, n_areas = bids.values.shape
    chosen, total = _allocate_rows(bids.values, bids.utilities,
                                   range(n_uavs), n_areas, capacity)
    assignment = [chosen[u] for u in range(n_uavs)]
    area_sets = [[u for u in range(n_uavs) if assignment[u] == m]
                 for m in range(n_areas)]
    return AuctionResult(assignment=assignment, area_sets=area_sets,
                         total_utility=total)


def vcg_prices(result: AuctionResult, bids: BidMatrix,
               capacity: Optional[int] = None) -> AuctionResult:
    """Marginal price per UAV: total utility with everyone minus the total
    utility of a fresh allocation without that UAV."""
    n_uavs, n_areas = bids.values.shape
    prices = []
    for u in range(n_uavs):
        others = [v for v in range(n_uavs) if v != u]
        _, total_without = _allocate_rows(bids.values, bids.utilities,
                                          others, n_areas, capacity)
        prices.append(result.total_utility - total_without)
    return replace(result, prices=prices)


def run_auction(bids: BidMatrix, capacity: Optional[int] = None) -> AuctionResult:
    """Allocation plus prices in one call."""
    return vcg_prices(allocate(bids, capacity), bids, capacity)


def misreport_probe(bids: BidMatrix, uav_index: int,
                    misreported_row: Sequence[float],
                    capacity: Optional[int] = None) -> dict:
    """Compare a UAV's truthful outcome with a misreported bid row.

    Returns the assignment and price under both reports; utility is always
    evaluated at the true utilities. Exploration aid only.
    """
    truthful = run_auction(bids, capacity)
    fake_values = bids.values.copy()
    fake_values[uav_index] = np.asarray(misreported_row, dtype=np.float64)
    fake = replace(bids, values=fake_values)
    lied = run_auction(fake, capacity)
    return {
        "truthful_area": truthful.assignment[uav_index],
        "truthful_price": truthful.prices[uav_index],
        "truthful_utility": float(bids.utilities[uav_index,
                                                 truthful.assignment[uav_index]]),
        "misreport_area": lied.assignment[uav_index],
        "misreport_price": lied.prices[uav_index],
        "misreport_utility": float(bids.utilities[uav_index,
                                                  lied.assignment[uav_index]]),
    }


def plan_waypoint(uav: UavState, area: TaskArea) -> Position3:
    """Nearest point of the area disc to the UAV (minimal travel distance).

    Inside the area the UAV stays put; outside, the target is the boundary
    point on the segment toward the center, pulled inward by a relative
    margin so the presence indicator holds on arrival. Altitude is kept.
    """
    d = uav.pos.horizontal_distance(area.center)
    if d <= area.radius:
        return Position3(uav.pos.x, uav.pos.y, uav.pos.z)
    reach = area.radius * (1.0 - _BOUNDARY_MARGIN)
    frac = reach / d
    x = area.center.x + (uav.pos.x - area.center.x) * frac
    y = area.center.y + (uav.pos.y - area.center.y) * frac
    return Position3(x, y, uav.pos.z)
