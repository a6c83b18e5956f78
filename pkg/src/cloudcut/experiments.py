"""Experiment drivers: dataset assembly, sweeps, and oracle comparisons.

Everything here is deterministic for a fixed ExperimentConfig: random state
always derives from the config seed plus fixed salts, floats are written with
repr (shortest round-trip form), and rows are emitted in a fixed order, so
rerunning a command reproduces its output files byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import cloud as cloudmod
from .cloud import AffinityTable, CloudModel, PricingMatrix, default_profiles
from .errors import ValidationError
from .graph import SocialGraph, bfs_sample, load_graph, synth_graph
from .objective import Assignment, ObjectiveParams, evaluate, total_objective
from .partition import (
    HeuristicParams,
    baseline_max_preference,
    baseline_min_propagation,
    baseline_random,
    brute_force_optimal,
    run_heuristic,
)

SWEEP_HEADER = ("alpha", "n_clouds", "algorithm", "objective",
                "pref_satisfaction", "inter_cloud_cost", "inter_cloud_edges")
ORACLE_HEADER = ("n_edges", "instance", "heuristic_objective",
                 "optimal_objective", "ratio")
ALGORITHMS = ("heuristic", "random", "min_propagation", "max_preference")


@dataclass(frozen=True)
class ExperimentConfig:
    """One JSON-loadable document driving every CLI command.

    File inputs are optional; whatever is missing is synthesized from the
    seed (a random graph, regions on the unit square mapped round-robin-free
    onto clouds, distance-decayed affinities, flat 0/1 pricing).
    """

    # dataset files (all optional; synthetic fallback otherwise)
    edges_path: str | None = None
    regions_path: str | None = None
    pricing_path: str | None = None
    affinity_path: str | None = None
    profiles_path: str | None = None
    # synthetic dataset shape
    synth_users: int = 20000
    synth_mean_degree: float = 10.0
    synth_weight_exponent: float = 2.0
    synth_regions: int = 80
    synth_clouds: int = 6
    inter_cloud_price: float = 1.0
    intra_cloud_price: float = 0.0
    affinity_scale: float = 0.3
    # optional BFS subsample applied after loading/synthesis
    sample_users: int | None = None
    sample_seeds: int = 10
    # solver selection and trade-off parameters
    algorithm: str = "heuristic"
    algorithms: tuple = ALGORITHMS
    alpha: float = 0.5
    cost_weight: float = 1.0
    use_normalized: bool = True
    min_gain: float = 0.0
    touched_budget: float = 0.2
    termination_mode: str = "both"
    delta_mode: str = "exact"
    # sweep grids
    alpha_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    cloud_grid: tuple | None = None
    # oracle comparison instances
    oracle_users: int = 10
    oracle_clouds: int = 3
    oracle_edge_grid: tuple = (10, 15, 20, 25, 30)
    oracle_instances: int = 10
    oracle_weight_scale: float = 0.5
    brute_force_cap: int = 10_000_000
    # bookkeeping
    rng_seed: int = 0
    output_dir: str = "out"
    telemetry: bool = False

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        doc = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        cfg = cls(**doc)
        if cfg.algorithm not in ALGORITHMS:
            raise ValidationError(f"algorithm must be one of {ALGORITHMS}")
        for a in cfg.algorithms:
            if a not in ALGORITHMS:
                raise ValidationError(f"unknown algorithm {a!r}")
        return cfg

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self):
        return asdict(self)

    def objective_params(self, alpha=None):
        return ObjectiveParams(
            alpha=self.alpha if alpha is None else alpha,
            cost_weight=self.cost_weight,
            use_normalized=self.use_normalized,
        )

    def heuristic_params(self, alpha=None):
        return HeuristicParams(
            objective=self.objective_params(alpha),
            min_gain=self.min_gain,
            touched_budget=self.touched_budget,
            termination_mode=self.termination_mode,
            delta_mode=self.delta_mode,
        )


def _rng(config, *salts):
    """Child generator derived from the config seed and integer salts."""
    return np.random.default_rng(np.random.SeedSequence([config.rng_seed, *salts]))


# -- dataset assembly --------------------------------------------------------

def _synth_regions(config):
    """Random region geometry: unit-square coordinates, every cloud covered."""
    rng = _rng(config, 11)
    R, C = config.synth_regions, config.synth_clouds
    if R < C:
        raise ValidationError("synth_regions must be >= synth_clouds")
    xy = rng.uniform(0.0, 1.0, size=(R, 2))
    region_cloud = np.concatenate([
        np.arange(C, dtype=np.int64),
        rng.integers(0, C, size=R - C, dtype=np.int64),
    ])
    cloud_labels = [f"c{k}" for k in range(C)]
    region_labels = [f"r{j}" for j in range(R)]
    return cloud_labels, region_labels, region_cloud, xy


def build_dataset(config):
    """(graph, model) per the config, loading files where given."""
    if config.edges_path:
        graph = load_graph(config.edges_path)
    else:
        graph = synth_graph(config.synth_users, config.synth_mean_degree,
                            config.synth_weight_exponent, config.rng_seed)
    sampled = config.sample_users is not None
    if sampled:
        graph = bfs_sample(graph, config.sample_seeds, config.sample_users,
                           rng_seed=config.rng_seed)

    region_xy = None
    if config.regions_path:
        cloud_labels, region_labels, region_cloud, region_xy = cloudmod.load_regions(config.regions_path)
    else:
        cloud_labels, region_labels, region_cloud, region_xy = _synth_regions(config)

    if config.pricing_path:
        price_labels, pricing = PricingMatrix.from_csv(config.pricing_path)
        if list(price_labels) != list(cloud_labels):
            raise ValidationError("pricing cloud labels disagree with region file")
    else:
        pricing = PricingMatrix.uniform(len(cloud_labels), config.inter_cloud_price,
                                        config.intra_cloud_price)

    if config.profiles_path:
        vol, blend, home = cloudmod.load_profiles(
            config.profiles_path, graph, region_labels, ignore_unknown_users=sampled)
    else:
        vol, blend = default_profiles(graph)
        home = _rng(config, 12).integers(0, len(region_labels), size=graph.n_users,
                                         dtype=np.int64)

    if config.affinity_path:
        affinity = cloudmod.load_affinities(
            config.affinity_path, graph, region_labels, ignore_unknown_users=sampled)
    else:
        if region_xy is None:
            raise ValidationError(
                "no affinity file and regions carry no coordinates to derive one")
        if np.any(home < 0):
            raise ValidationError(
                "deriving affinities from geography needs a home region per user")
        user_xy = region_xy[home]
        affinity = AffinityTable.from_coordinates(user_xy, region_xy, config.affinity_scale)

    model = CloudModel(cloud_labels, region_labels, region_cloud, pricing,
                       affinity, vol, blend, home)
    if model.n_users != graph.n_users:
        raise ValidationError("model user universe does not match the graph")
    return graph, model


def solve(graph, model, config, algorithm=None, alpha=None, telemetry=None):
    """Run one algorithm and return its Assignment."""
    algorithm = algorithm or config.algorithm
    if algorithm == "heuristic":
        return run_heuristic(graph, model, config.heuristic_params(alpha), telemetry=telemetry)
    if algorithm == "random":
        return baseline_random(graph, model, rng_seed=config.rng_seed)
    if algorithm == "min_propagation":
        return baseline_min_propagation(graph, model)
    if algorithm == "max_preference":
        return baseline_max_preference(graph, model)
    raise ValidationError(f"unknown algorithm {algorithm!r}")


# -- output helpers ----------------------------------------------------------

def _outdir(config):
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(x) for x in row])


# -- commands ----------------------------------------------------------------

def cmd_partition(config):
    """Partition the dataset once; writes assignment.csv and report.json."""
    out = _outdir(config)
    graph, model = build_dataset(config)
    telemetry_path = out / "telemetry.jsonl"
    if config.telemetry and config.algorithm == "heuristic":
        with open(telemetry_path, "w", encoding="utf-8", newline="") as tfh:
            assignment = solve(graph, model, config, telemetry=tfh)
    else:
        assignment = solve(graph, model, config)
    report = evaluate(assignment, graph, model, config.objective_params())
    assignment.to_csv(out / "assignment.csv", graph, model)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    return {"assignment": str(out / "assignment.csv"),
            "report": str(out / "report.json"),
            **report.to_dict()}


def cmd_evaluate(config, assignment_path):
    """Score an existing assignment file; writes report.json."""
    out = _outdir(config)
    graph, model = build_dataset(config)
    assignment = Assignment.from_csv(assignment_path, graph, model)
    report = evaluate(assignment, graph, model, config.objective_params())
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    return {"report": str(out / "report.json"), **report.to_dict()}


def cmd_synth(config):
    """Write the synthetic dataset itself (edges, regions, pricing, profiles)."""
    for p in (config.edges_path, config.regions_path, config.pricing_path,
              config.affinity_path, config.profiles_path):
        if p:
            raise ValidationError("synth generates a fresh dataset; remove input paths")
    out = _outdir(config)
    graph, model = build_dataset(config)
    graph.to_csv(out / "edges.csv")
    with open(out / "regions.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        cloud_labels, region_labels, region_cloud, xy = _synth_regions(config)
        for j, lab in enumerate(region_labels):
            wr.writerow([lab, cloud_labels[region_cloud[j]],
                         repr(float(xy[j, 0])), repr(float(xy[j, 1]))])
    model.pricing.to_csv(out / "pricing.csv", model.cloud_labels)
    with open(out / "profiles.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        for u in range(graph.n_users):
            home = int(model.home_region[u])
            row = [graph.label_of(u), repr(float(model.upload_volume[u])),
                   repr(float(model.blend_weight[u]))]
            if home >= 0:
                row.append(model.region_labels[home])
            wr.writerow(row)
    return {"edges": str(out / "edges.csv"), "regions": str(out / "regions.csv"),
            "pricing": str(out / "pricing.csv"), "profiles": str(out / "profiles.csv"),
            "n_users": graph.n_users, "n_edges": graph.n_edges}


def _sweep_cloud_grid(config, model):
    if config.cloud_grid is not None:
        grid = [int(k) for k in config.cloud_grid]
        for k in grid:
            if not 1 <= k <= model.n_clouds:
                raise ValidationError(f"cloud_grid entry {k} outside 1..{model.n_clouds}")
        return grid
    return [model.n_clouds]


def _sweep_rows(graph, model, config, alphas, cloud_counts):
    rows = []
    for k in cloud_counts:
        sub = model.restrict(k)
        for algorithm in config.algorithms:
            for alpha in alphas:
                assignment = solve(graph, sub, config, algorithm=algorithm, alpha=alpha)
                report = evaluate(assignment, graph, sub, config.objective_params(alpha))
                rows.append((float(alpha), k, algorithm,
                             report.objective_value,
                             report.preference_satisfaction,
                             report.inter_cloud_cost,
                             report.inter_cloud_edge_count))
    return rows


def cmd_sweep_alpha(config):
    """Alpha grid x algorithm set x cloud-count grid; writes sweep_alpha.csv."""
    out = _outdir(config)
    graph, model = build_dataset(config)
    rows = _sweep_rows(graph, model, config,
                       [float(a) for a in config.alpha_grid],
                       _sweep_cloud_grid(config, model))
    path = out / "sweep_alpha.csv"
    _write_csv(path, SWEEP_HEADER, rows)
    return {"sweep": str(path), "rows": len(rows)}


def cmd_sweep_providers(config):
    """Cloud-count grid at fixed alpha; writes sweep_providers.csv."""
    out = _outdir(config)
    graph, model = build_dataset(config)
    grid = (config.cloud_grid if config.cloud_grid is not None
            else range(1, model.n_clouds + 1))
    rows = _sweep_rows(graph, model, config, [config.alpha],
                       [int(k) for k in grid])
    path = out / "sweep_providers.csv"
    _write_csv(path, SWEEP_HEADER, rows)
    return {"sweep": str(path), "rows": len(rows)}


def make_oracle_instance(config, n_edges, instance):
    """Small random instance: exact directed edge count, one region per cloud,
    independent uniform affinities.

    Edge weights are uniform on (0, oracle_weight_scale], sized so the cost
    and preference terms of the score are commensurate at alpha = 0.5; the
    weight unit is otherwise uncalibrated in the model.
    """
    n = config.oracle_users
    C = config.oracle_clouds
    if n_edges > n * (n - 1):
        raise ValidationError("n_edges exceeds the number of ordered pairs")
    rng = _rng(config, 7001, n_edges, instance)
    codes = rng.choice(n * (n - 1), size=n_edges, replace=False)
    src = codes // (n - 1)
    rem = codes % (n - 1)
    dst = rem + (rem >= src)
    weights = rng.uniform(0.0, config.oracle_weight_scale, size=n_edges)
    graph = SocialGraph([f"u{i}" for i in range(n)], src, dst, weights)

    affinity = AffinityTable(rng.uniform(0.0, 1.0, size=(n, C)),
                             rng.uniform(0.0, 1.0, size=(n, C)))
    vol, blend = default_profiles(graph)
    model = CloudModel(
        [f"c{k}" for k in range(C)], [f"r{k}" for k in range(C)],
        np.arange(C, dtype=np.int64),
        PricingMatrix.uniform(C, config.inter_cloud_price, config.intra_cloud_price),
        affinity, vol, blend,
    )
    return graph, model


def oracle_heuristic_params(config, alpha=None):
    """Full re-hosting pass for oracle-scale instances: on a handful of
    connections a touched budget would examine almost nothing, so the stop is
    the gain threshold alone."""
    return HeuristicParams(
        objective=config.objective_params(alpha),
        min_gain=config.min_gain,
        touched_budget=1.0,
        termination_mode="gain_threshold",
        delta_mode=config.delta_mode,
    )


def cmd_oracle_compare(config):
    """Heuristic vs exhaustive optimum on small instances; writes oracle.csv."""
    out = _outdir(config)
    rows = []
    for n_edges in config.oracle_edge_grid:
        for instance in range(config.oracle_instances):
            graph, model = make_oracle_instance(config, int(n_edges), instance)
            params = oracle_heuristic_params(config)
            heur = run_heuristic(graph, model, params)
            opt = brute_force_optimal(graph, model, config.objective_params(),
                                      cap=config.brute_force_cap)
            obj = config.objective_params()
            h_val = total_objective(heur, graph, model, obj)
            o_val = total_objective(opt, graph, model, obj)
            if o_val == 0.0:
                ratio = 1.0 if abs(h_val) < 1e-12 else math.nan
            else:
                ratio = h_val / o_val
            rows.append((int(n_edges), instance, h_val, o_val, ratio))
    path = out / "oracle.csv"
    _write_csv(path, ORACLE_HEADER, rows)
    return {"oracle": str(path), "rows": len(rows)}
