"""Bike-share rebalancing instances built from trip logs or synthetic geometry.

Truck rebalancing is Phase I (one dummy offline vertex), crowdsourced
rebalancing is Phase II (worker types are ordered site pairs). Every task
consumes one unit of its supplying and demanding site and some of the global
budget.

The global budget resource is expressed in units of ``max(1, λ)`` CBR payments
so that all per-edge costs stay within [0, 1]: a truck move costs 1 and a
crowdsourced move costs ``cbr / λ``, where ``cbr`` is the normalized payment
whose maximum over all qualified assignments is 1.
"""

from __future__ import annotations

import csv
import datetime as dt
import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ArrivalModel,
    EdgeSpec,
    Instance,
    Resource,
    ResourceKind,
    Side,
)

log = logging.getLogger(__name__)

TRIP_COLUMNS = (
    "starttime",
    "stoptime",
    "start station id",
    "start station latitude",
    "start station longitude",
    "end station id",
    "end station latitude",
    "end station longitude",
)
_TIME_FORMATS = (
    "%Y-%m-%d %H:%M:%S.%f",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
)


class InstanceBuildError(ValueError):
    pass


class TripParseError(ValueError):
    pass


@dataclass(frozen=True)
class TripRecord:
    start_station: str
    end_station: str
    start_time: dt.datetime
    end_time: dt.datetime
    start_lat: float
    start_lon: float
    end_lat: float
    end_lon: float


@dataclass(frozen=True)
class Site:
    id: int
    center: tuple[float, float]
    members: frozenset


@dataclass(frozen=True)
class BikeShareConfig:
    num_sites: int = 50
    top_k: int = 10
    lam: float = 1.5
    gamma: float = 2.0
    beta: float = 1.0
    rho: float = 0.2
    tau: float | None = None  # None: median pairwise site distance
    kappa: float = 0.5
    rush_start: dt.time = dt.time(8, 0)
    rush_end: dt.time = dt.time(9, 0)
    weekdays: tuple[int, ...] = (0, 1, 2, 3)
    weight_seed: int = 0

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if not 0 <= self.rho <= 1:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        for name in ("gamma", "beta", "kappa"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.num_sites < 1 or self.top_k < 1:
            raise ValueError("num_sites and top_k must be >= 1")

    def with_param(self, name: str, value: float) -> "BikeShareConfig":
        return replace(self, **{"lam" if name == "lambda" else name: value})


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def manhattan(p, q) -> float:
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


# -- trip ingestion -----------------------------------------------------------


def _parse_time(text: str) -> dt.datetime:
    text = text.strip()
    for fmt in _TIME_FORMATS:
        try:
            return dt.datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ValueError(f"unrecognized timestamp {text!r}")


@dataclass
class ParseSummary:
    rows: int = 0
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    def __str__(self) -> str:
        return f"{self.rows} rows read, {self.rows - self.skipped} kept, {self.skipped} malformed"


def read_trips(path: str | Path) -> tuple[list[TripRecord], ParseSummary]:
    """Parse a Citibike-style trip CSV. Malformed rows are counted and skipped."""
    summary = ParseSummary()
    records: list[TripRecord] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip().lower() for h in (reader.fieldnames or [])]
        missing = [c for c in TRIP_COLUMNS if c not in header]
        if missing:
            raise TripParseError(f"{path}: missing columns {missing}")
        reader.fieldnames = header
        for row in reader:
            summary.rows += 1
            try:
                rec = TripRecord(
                    start_station=row["start station id"].strip(),
                    end_station=row["end station id"].strip(),
                    start_time=_parse_time(row["starttime"]),
                    end_time=_parse_time(row["stoptime"]),
                    start_lat=float(row["start station latitude"]),
                    start_lon=float(row["start station longitude"]),
                    end_lat=float(row["end station latitude"]),
                    end_lon=float(row["end station longitude"]),
                )
                coords = (rec.start_lat, rec.start_lon, rec.end_lat, rec.end_lon)
                if not all(math.isfinite(c) for c in coords):
                    raise ValueError("non-finite coordinate")
                if rec.end_time < rec.start_time:
                    raise ValueError("trip ends before it starts")
                if not rec.start_station or not rec.end_station:
                    raise ValueError("empty station id")
            except (ValueError, TypeError, AttributeError) as exc:
                summary.skipped += 1
                summary.reasons[type(exc).__name__] += 1
                continue
            records.append(rec)
    if summary.skipped:
        log.warning("%s: %s", path, summary)
    if not records:
        raise TripParseError(f"{path}: no usable trips ({summary})")
    return records, summary


def write_trips(path: str | Path, trips: Iterable[TripRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIP_COLUMNS)
        for r in trips:
            w.writerow([
                r.start_time.strftime("%Y-%m-%d %H:%M:%S"),
                r.end_time.strftime("%Y-%m-%d %H:%M:%S"),
                r.start_station,
                repr(r.start_lat),
                repr(r.start_lon),
                r.end_station,
                repr(r.end_lat),
                repr(r.end_lon),
            ])


def stations_from_trips(trips: Iterable[TripRecord]) -> list[tuple[str, tuple[float, float]]]:
    """Station ids with the first coordinates seen, sorted by id."""
    seen: dict[str, tuple[float, float]] = {}
    for r in trips:
        seen.setdefault(r.start_station, (r.start_lat, r.start_lon))
        seen.setdefault(r.end_station, (r.end_lat, r.end_lon))
    return sorted(seen.items())


def synthetic_trip_log(
    n_stations: int = 80,
    n_days: int = 8,
    trips_per_day: int = 300,
    seed: int = 0,
    start: dt.date = dt.date(2017, 9, 4),
) -> list[TripRecord]:
    """A fake trip log with commuter flow from outer stations toward a core.

    Useful for demos and tests when the real trip data is not at hand.
    """
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 1, size=(n_stations, 2))
    lat = 40.70 + 0.10 * xy[:, 1]
    lon = -74.02 + 0.06 * xy[:, 0]
    core = np.abs(xy - 0.5).sum(axis=1)
    pull = np.exp(-4 * core)
    pull /= pull.sum()
    push = np.exp(4 * core)
    push /= push.sum()
    ids = [f"S{n:03d}" for n in range(n_stations)]
    out: list[TripRecord] = []
    day = start
    made = 0
    while made < n_days:
        if day.weekday() < 4:
            for _ in range(trips_per_day):
                commuter = rng.random() < 0.7
                s = int(rng.choice(n_stations, p=push if commuter else None))
                e = int(rng.choice(n_stations, p=pull if commuter else None))
                minute = int(rng.integers(0, 60))
                t0 = dt.datetime.combine(day, dt.time(8, minute))
                t1 = t0 + dt.timedelta(minutes=int(rng.integers(3, 40)))
                out.append(TripRecord(ids[s], ids[e], t0, t1, float(lat[s]), float(lon[s]), float(lat[e]), float(lon[e])))
            made += 1
        day += dt.timedelta(days=1)
    return out


# -- clustering ---------------------------------------------------------------


def _kmedians_once(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int):
    centers = X[rng.choice(X.shape[0], size=k, replace=False)].copy()
    labels = None
    for _ in range(max_iter):
        dist = np.abs(X[:, None, :] - centers[None, :, :]).sum(axis=2)
        new_labels = np.argmin(dist, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # reseed an empty cluster with the worst-served point of a shared cluster
            own = dist[np.arange(X.shape[0]), new_labels]
            own[counts[new_labels] <= 1] = -1
            p = int(np.argmax(own))
            counts[new_labels[p]] -= 1
            new_labels[p] = c
            counts[c] = 1
        new_centers = np.array([np.median(X[new_labels == c], axis=0) for c in range(k)])
        done = labels is not None and np.array_equal(new_labels, labels) and np.array_equal(new_centers, centers)
        labels, centers = new_labels, new_centers
        if done:
            break
    cost = float(np.abs(X - centers[labels]).sum())
    return labels, centers, cost


def cluster_stations(
    stations: Sequence[tuple[object, tuple[float, float]]],
    k: int,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 100,
) -> list[Site]:
    """K-medians under Manhattan distance; best of ``n_init`` seeded restarts."""
    n = len(stations)
    if not 1 <= k <= n:
        raise ValueError(f"cannot form {k} clusters from {n} stations")
    X = np.array([c for _, c in stations], dtype=float).reshape(n, 2)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, centers, cost = _kmedians_once(X, k, rng, max_iter)
        if best is None or cost < best[2] - 1e-12:
            best = (labels, centers, cost)
    labels, centers, _ = best
    return [
        Site(
            id=c,
            center=(float(centers[c, 0]), float(centers[c, 1])),
            members=frozenset(stations[i][0] for i in np.flatnonzero(labels == c)),
        )
        for c in range(k)
    ]


# -- supply, demand, arrivals ---------------------------------------------------


def in_rush_window(t: dt.datetime, config: BikeShareConfig) -> bool:
    return t.weekday() in config.weekdays and config.rush_start <= t.time() < config.rush_end


def rush_trips(trips: Iterable[TripRecord], config: BikeShareConfig) -> list[TripRecord]:
    return [r for r in trips if in_rush_window(r.start_time, config)]


@dataclass(frozen=True)
class SiteActivity:
    site: int
    supply: float  # mean daily check-ins
    demand: float  # mean daily check-outs

    @property
    def net(self) -> float:
        return self.supply - self.demand


def _site_index(sites: Sequence[Site]) -> dict:
    return {st: s.id for s in sites for st in s.members}


def site_activity(trips: Sequence[TripRecord], sites: Sequence[Site]) -> list[SiteActivity]:
    """Mean daily check-ins and check-outs per site over the days present in ``trips``."""
    where = _site_index(sites)
    days = {r.start_time.date() for r in trips}
    if not days:
        raise InstanceBuildError("no trips inside the rush window")
    ins: Counter = Counter()
    outs: Counter = Counter()
    for r in trips:
        outs[where[r.start_station]] += 1
        ins[where[r.end_station]] += 1
    nd = len(days)
    return [SiteActivity(s.id, ins[s.id] / nd, outs[s.id] / nd) for s in sites]


def extract_supply_demand(
    trips: Sequence[TripRecord], sites: Sequence[Site], config: BikeShareConfig
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Top-k supplying and demanding sites with γ-scaled, rounded capacities.

    Sites are ranked by net flow (check-ins minus check-outs, ties by site id);
    the top ``top_k`` supply and the bottom ``top_k`` demand.
    """
    active = [a for a in site_activity(trips, sites) if a.supply > 0 or a.demand > 0]
    if len(active) < 2 * config.top_k:
        raise InstanceBuildError(f"only {len(active)} active sites, need {2 * config.top_k}")
    ranked = sorted(active, key=lambda a: (-a.net, a.site))
    supply = [(a.site, round_half_up(config.gamma * a.supply)) for a in ranked[: config.top_k]]
    demand = [(a.site, round_half_up(config.gamma * a.demand)) for a in ranked[::-1][: config.top_k]]
    return supply, demand


def worker_rates(trips: Sequence[TripRecord], sites: Sequence[Site], beta: float) -> dict[tuple[int, int], float]:
    """β × mean daily trips per (start site, end site) pair, positive pairs only."""
    where = _site_index(sites)
    days = {r.start_time.date() for r in trips}
    counts = Counter((where[r.start_station], where[r.end_station]) for r in trips)
    return {pair: beta * n / len(days) for pair, n in sorted(counts.items())}


def global_budget(avg_cost: float, supplies: Sequence[int], demands: Sequence[int], kappa: float) -> tuple[float, float]:
    """(A, κ·A) where A = mean CBR payment × number of potential tasks."""
    A = avg_cost * min(sum(supplies), sum(demands))
    return A, kappa * A


def median_pairwise_distance(centers: Mapping[int, tuple[float, float]]) -> float:
    pts = [centers[s] for s in sorted(centers)]
    d = [manhattan(p, q) for p, q in itertools.combinations(pts, 2)]
    return float(np.median(d)) if d else 0.0


def assemble_instance(
    centers: Mapping[int, tuple[float, float]],
    supply: Sequence[tuple[int, int]],
    demand: Sequence[tuple[int, int]],
    workers: Sequence[tuple[int, int]],
    rates: Sequence[float],
    config: BikeShareConfig,
    weight_rng: np.random.Generator | None = None,
) -> Instance:
    """Turn sites, capacities, and worker-type rates into a TS-RA instance."""
    supply = [(a, c) for a, c in supply if c > 0]
    demand = [(b, c) for b, c in demand if c > 0]
    if not supply or not demand:
        raise InstanceBuildError("no tasks: every supply or every demand rounds to zero")
    total_rate = math.fsum(rates)
    T = round_half_up(total_rate)
    if T < 1:
        raise InstanceBuildError(f"horizon rounds to zero (total arrival rate {total_rate:.3g})")
    tau = config.tau if config.tau is not None else median_pairwise_distance(centers)
    if tau <= 0:
        raise InstanceBuildError("walking threshold tau is zero")

    tasks = [(a, b) for a, _ in supply for b, _ in demand]
    if weight_rng is None:
        weight_rng = np.random.default_rng(config.weight_seed)
    weights = 1.0 - weight_rng.random(len(tasks))  # (0, 1]

    raw: list[tuple[int, int, float]] = []
    for i, (a, b) in enumerate(tasks):
        for j, (c, d) in enumerate(workers):
            extra = manhattan(centers[c], centers[a]) + manhattan(centers[b], centers[d])
            if extra <= tau:
                raw.append((i, j, config.rho + (1 - config.rho) * extra / tau))
    if not raw:
        raise InstanceBuildError("no worker type qualifies for any task")
    top = max(r for _, _, r in raw)
    scale = max(1.0, config.lam)
    cbr = [r / top for _, _, r in raw]

    n_sup = len(supply)
    sup_res = {a: n for n, (a, _) in enumerate(supply)}
    dem_res = {b: n_sup + n for n, (b, _) in enumerate(demand)}
    g = n_sup + len(demand)
    _, budget = global_budget(
        float(np.mean(cbr)), [c for _, c in supply], [c for _, c in demand], config.kappa
    )
    resources = (
        *(Resource(n, ResourceKind.INTEGRAL, float(c)) for n, (_, c) in enumerate(supply)),
        *(Resource(n_sup + n, ResourceKind.INTEGRAL, float(c)) for n, (_, c) in enumerate(demand)),
        Resource(g, ResourceKind.NON_INTEGRAL, budget / scale),
    )
    e1 = tuple(
        EdgeSpec(i, Side.PHASE_ONE, i, 0, float(weights[i]), {sup_res[a]: 1.0, dem_res[b]: 1.0, g: config.lam / scale})
        for i, (a, b) in enumerate(tasks)
    )
    e2 = tuple(
        EdgeSpec(
            len(tasks) + n,
            Side.PHASE_TWO,
            i,
            j,
            float(weights[i]),
            {sup_res[tasks[i][0]]: 1.0, dem_res[tasks[i][1]]: 1.0, g: cost / scale},
        )
        for n, ((i, j, _), cost) in enumerate(zip(raw, cbr))
    )
    probs = [r / total_rate for r in rates]
    return Instance(
        n_offline=len(tasks),
        n_phase1=1,
        n_online=len(workers),
        resources=resources,
        edges_phase1=e1,
        edges_phase2=e2,
        arrivals=ArrivalModel.from_iid(probs, T),
    )


def build_instance(trips: Sequence[TripRecord], config: BikeShareConfig, seed: int = 0) -> Instance:
    """Full pipeline: cluster stations, pick top sites, derive worker types and costs."""
    stations = stations_from_trips(trips)
    if len(stations) < config.num_sites:
        raise InstanceBuildError(f"{len(stations)} stations cannot form {config.num_sites} sites")
    sites = cluster_stations(stations, config.num_sites, seed)
    window = rush_trips(trips, config)
    supply, demand = extract_supply_demand(window, sites, config)
    rates = worker_rates(window, sites, config.beta)
    centers = {s.id: s.center for s in sites}
    return assemble_instance(centers, supply, demand, list(rates), list(rates.values()), config)


def synthetic_instance(
    shape: tuple[int, int, int, int], config: BikeShareConfig | None = None, seed: int = 0
) -> Instance:
    """A random instance shaped like the trip pipeline's output.

    ``shape`` is (supplying sites, demanding sites, worker types, base horizon);
    the horizon is scaled by β like the arrival rates.
    """
    n_sup, n_dem, n_types, horizon = shape
    if min(shape) < 1:
        raise ValueError(f"all shape entries must be >= 1, got {shape}")
    config = config or BikeShareConfig()
    rng = np.random.default_rng(seed)
    n_sites = max(n_sup + n_dem + 2, math.isqrt(n_types - 1) + 1)
    xy = rng.uniform(0.0, 1.0, size=(n_sites, 2))
    centers = {s: (float(xy[s, 0]), float(xy[s, 1])) for s in range(n_sites)}
    sup_sites = range(n_sup)
    dem_sites = range(n_sup, n_sup + n_dem)
    base_sup = rng.integers(1, 4, size=n_sup)
    base_dem = rng.integers(1, 4, size=n_dem)
    supply = [(a, round_half_up(config.gamma * c)) for a, c in zip(sup_sites, base_sup)]
    demand = [(b, round_half_up(config.gamma * c)) for b, c in zip(dem_sites, base_dem)]

    pairs = [(c, d) for c in range(n_sites) for d in range(n_sites)]
    pref = np.array([4.0 if (c < n_sup and n_sup <= d < n_sup + n_dem) else 1.0 for c, d in pairs])
    first = pairs.index((0, n_sup))
    pref[first] = 0.0
    rest = rng.choice(len(pairs), size=n_types - 1, replace=False, p=pref / pref.sum()) if n_types > 1 else []
    workers = [pairs[first], *(pairs[int(n)] for n in rest)]
    raw = rng.uniform(0.5, 1.5, size=n_types)
    rates = (raw / raw.sum() * horizon * config.beta).tolist()
    weight_rng = np.random.default_rng([seed, config.weight_seed])
    return assemble_instance(centers, supply, demand, workers, rates, config, weight_rng)
