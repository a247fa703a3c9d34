"""Multi-area adequacy Monte Carlo: fleets, availability sampling, LOLE.

The network is a transport model: areas are nodes, edges carry net
transfer capacities.  Fleets are built from conventional capacity plus
5% of wind nameplate, split into equal units whose size is the largest
divisor of the capacity no greater than 500 MW (or an explicit
override).  Units fail independently, so available capacity per area is
unit size times a binomial draw.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import qp

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
DEFAULT_AVAILABILITY = 0.83
DEFAULT_THRESHOLD_MW = 1e-6
MAX_UNIT_SIZE_MW = 500


class AdequacyError(ValueError):
    pass


@dataclass
class NetworkModel:
    """Areas plus canonical (i < j) edges with [-backward, +forward] bounds."""

    areas: list[str]
    edges: list[tuple[int, int]] = field(default_factory=list)
    flow_lo: np.ndarray = field(default_factory=lambda: np.zeros(0))
    flow_hi: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.flow_lo = np.asarray(self.flow_lo, dtype=float)
        self.flow_hi = np.asarray(self.flow_hi, dtype=float)
        n = len(self.areas)
        for i, j in self.edges:
            if i == j:
                raise AdequacyError("self-edges are not allowed")
            if not 0 <= i < j < n:
                raise AdequacyError(f"edge ({i}, {j}) out of range or not i<j")
        if np.any(self.flow_lo > 0) or np.any(self.flow_hi < 0):
            raise AdequacyError("transfer capacities must be nonnegative")

    @property
    def n_areas(self) -> int:
        return len(self.areas)


@dataclass
class FleetArea:
    unit_size_mw: float
    unit_count: int
    availability: float = DEFAULT_AVAILABILITY

    def __post_init__(self):
        if not 0.0 < self.availability <= 1.0:
            raise AdequacyError("availability must be in (0, 1]")
        if self.unit_count < 0 or self.unit_size_mw < 0:
            raise AdequacyError("unit size and count must be nonnegative")

    @property
    def capacity_mw(self) -> float:
        return self.unit_size_mw * self.unit_count


@dataclass
class GenerationFleet:
    areas: list[FleetArea]

    @property
    def capacities(self) -> np.ndarray:
        return np.array([a.capacity_mw for a in self.areas])


@dataclass
class SystemState:
    """One sampled state: available capacity and demand per area."""

    available: np.ndarray    # MW
    demand: np.ndarray       # MW
    source: int | None = None


@dataclass
class LoleReport:
    areas: list[str]
    lole: np.ndarray            # hours/year
    std_error: np.ndarray       # hours/year
    samples: int
    threshold_mw: float
    negative_demand_clamps: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "areas": self.areas,
            "lole_hours_per_year": self.lole.tolist(),
            "std_error_hours_per_year": self.std_error.tolist(),
            "samples": self.samples,
            "threshold_mw": self.threshold_mw,
            "negative_demand_clamps": self.negative_demand_clamps,
            "seed": self.seed,
        }


def derive_unit_size(total_capacity_mw: int) -> int:
    """Largest integer divisor of the capacity that is at most 500 MW."""
    cap = int(total_capacity_mw)
    if cap != total_capacity_mw or cap < 1:
        raise AdequacyError("capacity must be a positive integer in MW")
    for size in range(min(MAX_UNIT_SIZE_MW, cap), 0, -1):
        if cap % size == 0:
            return size
    raise AssertionError("unreachable: 1 divides everything")


def build_fleet(
    conventional_mw,
    wind_nameplate_mw,
    overrides: dict[int, float] | None = None,
    availability=DEFAULT_AVAILABILITY,
) -> GenerationFleet:
    """Fleet per area: conventional + 5% wind, split into equal units.

    An override pins the unit size for an area; capacities that the
    override does not divide are rounded to the nearest multiple.
    ``availability`` is a scalar or one probability per area.
    """
    conventional_mw = np.asarray(conventional_mw, dtype=float)
    wind_nameplate_mw = np.asarray(wind_nameplate_mw, dtype=float)
    if conventional_mw.shape != wind_nameplate_mw.shape:
        raise AdequacyError("conventional and wind arrays must align")
    if np.any(conventional_mw < 0) or np.any(wind_nameplate_mw < 0):
        raise AdequacyError("capacities must be nonnegative")
    overrides = overrides or {}
    availability = np.broadcast_to(
        np.asarray(availability, dtype=float), conventional_mw.shape
    )

    areas = []
    for idx in range(conventional_mw.size):
        modeled = int(round(conventional_mw[idx] + 0.05 * wind_nameplate_mw[idx]))
        if idx in overrides:
            size = float(overrides[idx])
            if size <= 0:
                raise AdequacyError(f"override for area {idx} must be positive")
            count = int(round(modeled / size))
            if abs(count * size - modeled) > 1e-9 and modeled:
                log.warning(
                    "area %d: capacity %d MW rounded to %g MW (%d units of %g MW)",
                    idx, modeled, count * size, count, size,
                )
        elif modeled == 0:
            size, count = 0.0, 0
        else:
            size = float(derive_unit_size(modeled))
            count = int(round(modeled / size))
        areas.append(FleetArea(size, count, float(availability[idx])))
    return GenerationFleet(areas)


def sample_availability(fleet: GenerationFleet, rng: np.random.Generator) -> np.ndarray:
    """Available capacity per area: unit size x Binomial(count, availability)."""
    return np.array(
        [a.unit_size_mw * rng.binomial(a.unit_count, a.availability)
         for a in fleet.areas]
    )


def evaluate_state(
    state: SystemState,
    network: NetworkModel,
    qp_tolerance: float = 1e-7,
    warm_active=None,
    debug: bool = False,
):
    """Curtailment per area for one state, via the balanced-curtailment QP.

    Returns (curtailments, active_set) so Monte Carlo loops can warm
    start the next state.  Networks without edges decouple per node, so
    the closed form max(0, d - g) applies (cross-checked against the QP
    in the tests).
    """
    d = np.asarray(state.demand, dtype=float)
    g = np.asarray(state.available, dtype=float)
    if d.size != network.n_areas or g.size != network.n_areas:
        raise AdequacyError("state dimensions do not match the network")
    if not network.edges:
        return np.maximum(0.0, d - g), None
    problem = qp.build_curtailment_qp(
        d, g, network.edges, network.flow_lo, network.flow_hi
    )
    sol = qp.solve(problem, tolerance=qp_tolerance, warm_active=warm_active)
    if sol.status != "optimal":
        raise qp.QPError(f"QP did not converge: {sol.status}")
    if debug:
        _assert_curtailment_consistency(sol, problem, qp_tolerance)
    return sol.curtailment, sol.active_set


def _assert_curtailment_consistency(sol, problem, tolerance):
    """Recompute served power from flows/generation; c must equal max(0, d-p)."""
    incidence = np.zeros((problem.n_nodes, len(problem.edges)))
    for e, (i, j) in enumerate(problem.edges):
        incidence[j, e] = 1.0
        incidence[i, e] = -1.0
    net = incidence @ sol.flows
    dispatched = np.clip(
        problem.demands - sol.curtailment - net, 0.0, problem.gens
    )
    power = dispatched + net
    recovered = np.maximum(0.0, problem.demands - power)
    err = np.abs(recovered - sol.curtailment).max()
    if err > max(100 * tolerance, 1e-5):
        raise qp.QPError(f"curtailment inconsistency {err} vs flows/generation")


def estimate_lole(
    network: NetworkModel,
    fleet: GenerationFleet,
    load_pool: np.ndarray,
    mc_samples: int,
    seed: int,
    threshold_mw: float = DEFAULT_THRESHOLD_MW,
    chunk_size: int = 8192,
    qp_tolerance: float = 1e-7,
    n_jobs: int = 1,
) -> LoleReport:
    """Monte Carlo LOLE: pair availability draws with random load rows.

    All randomness is pre-drawn per chunk from seeds spawned off the
    master seed, so results do not depend on evaluation order or on the
    number of workers.
    """
    load_pool = np.asarray(load_pool, dtype=float)
    if load_pool.ndim != 2 or load_pool.shape[1] != network.n_areas:
        raise AdequacyError("load pool must be (n, areas) in MW")
    if load_pool.shape[0] == 0:
        raise AdequacyError("load pool is empty")
    if mc_samples < 1:
        raise AdequacyError("mc_samples must be >= 1")
    clamps = int((load_pool < 0).sum())
    if clamps:
        load_pool = np.maximum(load_pool, 0.0)

    n_chunks = (mc_samples + chunk_size - 1) // chunk_size
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    chunks = [
        (children[k], min(chunk_size, mc_samples - k * chunk_size))
        for k in range(n_chunks)
    ]

    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        args = [(ss, size, network, fleet, load_pool, threshold_mw, qp_tolerance)
                for ss, size in chunks]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            counts = sum(pool.map(_lole_chunk_star, args))
    else:
        counts = np.zeros(network.n_areas, dtype=np.int64)
        for ss, size in chunks:
            counts += _lole_chunk(
                ss, size, network, fleet, load_pool, threshold_mw, qp_tolerance
            )

    p_hat = counts / mc_samples
    lole = HOURS_PER_YEAR * p_hat
    se = HOURS_PER_YEAR * np.sqrt(p_hat * (1.0 - p_hat) / mc_samples)
    return LoleReport(
        areas=list(network.areas),
        lole=lole,
        std_error=se,
        samples=mc_samples,
        threshold_mw=threshold_mw,
        negative_demand_clamps=clamps,
        seed=seed,
    )


def _lole_chunk_star(args):
    return _lole_chunk(*args)


def _lole_chunk(seed_seq, size, network, fleet, load_pool, threshold, qp_tolerance):
    rng = np.random.default_rng(seed_seq)
    avail = np.empty((size, network.n_areas))
    for a, area in enumerate(fleet.areas):
        avail[:, a] = area.unit_size_mw * rng.binomial(
            area.unit_count, area.availability, size=size
        )
    idx = rng.integers(0, load_pool.shape[0], size=size)
    demand = load_pool[idx]

    counts = np.zeros(network.n_areas, dtype=np.int64)
    deficit = (demand > avail).any(axis=1)
    if not network.edges:
        shortfall = np.maximum(0.0, demand - avail)
        return (shortfall > threshold).sum(axis=0).astype(np.int64)
    warm = None
    for row in np.flatnonzero(deficit):
        state = SystemState(avail[row], demand[row], source=int(idx[row]))
        curtailment, warm = evaluate_state(
            state, network, qp_tolerance, warm_active=warm
        )
        counts += curtailment > threshold
    return counts


def exact_lole_single_node(area: FleetArea, demand_distribution) -> float:
    """Exact LOLE for one unconnected area against a finite demand list.

    ``demand_distribution`` is a sequence of (demand_mw, probability)
    pairs; probabilities must sum to one.  An hour counts as lost load
    when available capacity is strictly below demand.
    """
    demands = np.array([mw for mw, _ in demand_distribution], dtype=float)
    probs = np.array([pr for _, pr in demand_distribution], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise AdequacyError("demand probabilities must be nonnegative and sum to 1")
    units = np.arange(area.unit_count + 1)
    pmf = stats.binom.pmf(units, area.unit_count, area.availability)
    capacity = units * area.unit_size_mw
    loss_prob = 0.0
    for mw, pr in zip(demands, probs):
        loss_prob += pr * pmf[capacity < mw].sum()
    return HOURS_PER_YEAR * float(loss_prob)


# --- network/fleet description file ---

def load_network_file(path):
    """Read the JSON network+fleet description.

    Schema: {"areas": [...names...],
             "edges": [{"from": A, "to": B, "forward_mw": x, "backward_mw": y}],
             "fleet": {name: {"conventional_mw": x, "wind_nameplate_mw": y,
                              "availability": p, "unit_size_override_mw": s}}}
    """
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        areas = list(obj["areas"])
        index = {name: i for i, name in enumerate(areas)}
        if len(index) != len(areas):
            raise AdequacyError("duplicate area names")

        edges, lo, hi = [], [], []
        for e in obj.get("edges", []):
            i, j = index[e["from"]], index[e["to"]]
            fwd = float(e.get("forward_mw", 0.0))
            bwd = float(e.get("backward_mw", 0.0))
            if fwd < 0 or bwd < 0:
                raise AdequacyError("transfer capacities must be nonnegative")
            if i > j:
                i, j, fwd, bwd = j, i, bwd, fwd
            elif i == j:
                raise AdequacyError(f"self-edge on {e['from']}")
            edges.append((i, j))
            lo.append(-bwd)
            hi.append(fwd)

        order = sorted(range(len(edges)), key=lambda k: edges[k])
        network = NetworkModel(
            areas,
            [edges[k] for k in order],
            np.array([lo[k] for k in order], dtype=float),
            np.array([hi[k] for k in order], dtype=float),
        )

        fleet_spec = obj.get("fleet", {})
        conventional = np.zeros(len(areas))
        wind = np.zeros(len(areas))
        overrides = {}
        availability = np.full(len(areas), DEFAULT_AVAILABILITY)
        for name, entry in fleet_spec.items():
            if name not in index:
                raise AdequacyError(f"fleet entry for unknown area {name!r}")
            a = index[name]
            conventional[a] = float(entry.get("conventional_mw", 0.0))
            wind[a] = float(entry.get("wind_nameplate_mw", 0.0))
            if entry.get("unit_size_override_mw") is not None:
                overrides[a] = float(entry["unit_size_override_mw"])
            if "availability" in entry:
                availability[a] = float(entry["availability"])
        fleet = build_fleet(conventional, wind, overrides, availability)
    except KeyError as exc:
        raise AdequacyError(f"network file missing key: {exc}") from exc
    return network, fleet
