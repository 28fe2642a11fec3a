"""Preset degree profiles, trial runners and the reproducible experiment bundle."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, theory
from .dcm import Digraph, sample_dcm
from .degrees import Block, DegreeProfile, build_sequence, compute_stats
from .forward import OpinionConfig, sample_grid, simulate_density
from .seeding import GRAPH, TRIALS, derive_seed, derive_seeds, fan_out, rng_for

FIG3_PROFILES = ("red", "green", "blue")
FIG3_P = (0.3, 0.45)
SCALES = {"full": 10_000, "desk": 2_000}


def preset_profile(name: str, n: int = 10_000) -> DegreeProfile:
    """The three Fig.-3 style profiles at size n (n must be even for green/blue)."""
    if name == "red":
        return DegreeProfile((Block(n, 6, 6),))
    if n % 2:
        raise ValueError(f"profile {name!r} needs an even vertex count")
    half = n // 2
    if name == "green":
        return DegreeProfile((Block(half, 10, 5), Block(half, 5, 10)))
    if name == "blue":
        return DegreeProfile((Block(half, 10, 2), Block(half, 2, 10)))
    raise ValueError(f"unknown preset profile {name!r}")


def resolve_profile(spec: str, n: int | None = None) -> DegreeProfile:
    """A preset name (red, green, blue) or a path to a profile JSON file."""
    if spec in FIG3_PROFILES:
        return preset_profile(spec, n if n is not None else 10_000)
    profile = DegreeProfile.load(spec)
    if n is not None and profile.n != n:
        raise ValueError(f"--n {n} does not match the profile total {profile.n}")
    return profile


def theory_summary(profile: DegreeProfile, p: float) -> dict:
    seq = build_sequence(profile)
    st = compute_stats(seq)
    regime = theory.classify(p, st.rho)
    return {
        "rho": st.rho,
        "lambda": st.lam,
        "p_c": regime.p_c,
        "regime": regime.tag,
        "z_star": regime.z_star,
        "q_star": theory.q_star_closed(p, st.rho, st.lam) if p < regime.p_c else 0.0,
        "q_star_closed": theory.q_star_closed(p, st.rho, st.lam) if p < 1 else None,
        "q_star_sum": theory.q_star_sum(seq, p) if p < 1 else None,
    }


def _density_trial(job):
    g, p, s, t_max, sample_dt, seed = job
    return simulate_density(g, p, s, t_max, sample_dt, OpinionConfig.all_red(g.n), rng_for(seed)).red_density


def run_density_trials(g: Digraph, p: float, s: int, t_max: float, sample_dt: float,
                       seeds, threads: int = 1) -> np.ndarray:
    """Red-density trajectories, one row per seed."""
    rows = fan_out(_density_trial, [(g, p, s, t_max, sample_dt, sd) for sd in seeds], threads)
    return np.array(rows)


def density_csv(times: np.ndarray, rows: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "time", "red_density"])
    for trial, row in enumerate(rows):
        for t, d in zip(times.tolist(), row.tolist()):
            w.writerow([trial, repr(t), repr(d)])
    return buf.getvalue()


def read_density_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Back to (times, rows) with one row per trial."""
    with open(path) as fh:
        data = list(csv.DictReader(fh))
    trials = sorted({int(r["trial"]) for r in data})
    times = np.array(sorted({float(r["time"]) for r in data}))
    rows = np.zeros((len(trials), len(times)))
    col = {t: i for i, t in enumerate(times.tolist())}
    for r in data:
        rows[int(r["trial"]), col[float(r["time"])]] = float(r["red_density"])
    return times, rows


def window_mean(times: np.ndarray, values: np.ndarray, lo: float, hi: float) -> float:
    w = (times >= lo - 1e-9) & (times <= hi + 1e-9)
    return float(np.mean(values[..., w]))


@dataclass
class ExperimentSpec:
    scale: str = "desk"
    n: int = SCALES["desk"]
    p_values: list[float] = field(default_factory=lambda: list(FIG3_P))
    profiles: list[str] = field(default_factory=lambda: list(FIG3_PROFILES))
    s: int = 2
    t_max: float = 50.0
    sample_dt: float = 0.5
    trials: int = 5
    seed: int = 0
    out: str = "fig3-out"

    def __post_init__(self):
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("p values must lie in [0, 1]")
        for name in self.profiles:
            preset_profile(name, self.n)

    @classmethod
    def for_scale(cls, scale: str, **kw) -> "ExperimentSpec":
        if scale not in SCALES:
            raise ValueError(f"scale must be one of {sorted(SCALES)}")
        return cls(scale=scale, n=SCALES[scale], **kw)


@dataclass
class RunManifest:
    tool_version: str
    spec: dict
    graph_seeds: dict[str, int]
    trial_seeds: dict[str, list[int]]
    wall_clock_seconds: float
    outputs: dict[str, str]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))


def csv_name(profile: str, p: float) -> str:
    return f"fig3_{profile}_p{p:g}.csv"


def run_fig3(spec: ExperimentSpec, threads: int = 1, log=print) -> RunManifest:
    """Simulate every (profile, p) pair and write CSVs, a plot script and a manifest.

    One graph is sampled per profile and shared by all p values; trial seeds are
    derived per (profile, p) from ``spec.seed``.
    """
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    graph_seeds: dict[str, int] = {}
    trial_seeds: dict[str, list[int]] = {}
    outputs: dict[str, str] = {}
    theory_rows = []
    grid = sample_grid(spec.t_max, spec.sample_dt)
    for i, name in enumerate(spec.profiles):
        profile = preset_profile(name, spec.n)
        gseed = derive_seed(spec.seed, GRAPH, i)
        graph_seeds[name] = gseed
        g = sample_dcm(build_sequence(profile), rng_for(gseed))
        for j, p in enumerate(spec.p_values):
            key = csv_name(name, p)
            seeds = derive_seeds(spec.seed, spec.trials, TRIALS, i, j)
            trial_seeds[key] = seeds
            rows = run_density_trials(g, p, spec.s, spec.t_max, spec.sample_dt, seeds, threads)
            text = density_csv(grid, rows)
            (out / key).write_text(text)
            outputs[key] = hashlib.sha256(text.encode()).hexdigest()
            summ = theory_summary(profile, p) if spec.s == 2 else {}
            theory_rows.append({"profile": name, "p": p, **summ})
            if log:
                lo, hi = min(20.0, spec.t_max / 2), min(30.0, spec.t_max)
                plateau = window_mean(grid, rows.mean(axis=0), lo, hi)
                log(f"{name:>5} p={p:<5g} plateau[{lo:g},{hi:g}]={plateau:.4f} "
                    f"q_star={summ.get('q_star', float('nan')):.4f}")
    theory_text = _theory_csv(theory_rows)
    (out / "fig3_theory.csv").write_text(theory_text)
    outputs["fig3_theory.csv"] = hashlib.sha256(theory_text.encode()).hexdigest()
    script = plot_script(spec, theory_rows)
    (out / "fig3.gp").write_text(script)
    outputs["fig3.gp"] = hashlib.sha256(script.encode()).hexdigest()
    manifest = RunManifest(__version__, asdict(spec), graph_seeds, trial_seeds,
                           round(time.perf_counter() - started, 3), outputs)
    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return manifest


def replay(manifest_path, out: str, threads: int = 1, log=None) -> RunManifest:
    spec = ExperimentSpec(**{**RunManifest.load(manifest_path).spec, "out": out})
    return run_fig3(spec, threads, log)


def _theory_csv(rows) -> str:
    buf = io.StringIO()
    cols = ["profile", "p", "rho", "lambda", "p_c", "regime", "q_star"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([r.get(c, "") for c in cols])
    return buf.getvalue()


def plot_script(spec: ExperimentSpec, theory_rows) -> str:
    """gnuplot script: trial-mean curves per profile with dashed q_star levels."""
    lines = [
        "# gnuplot script; run from this directory: gnuplot fig3.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,450",
        "set output 'fig3.png'",
        f"set multiplot layout 1,{len(spec.p_values)}",
        "set xlabel 't'",
        "set ylabel 'red density'",
        "set yrange [0:1]",
    ]
    colors = {"red": "#d62728", "green": "#2ca02c", "blue": "#1f77b4"}
    for p in spec.p_values:
        lines.append(f"set title 'p = {p:g}'")
        plots = []
        for name in spec.profiles:
            c = colors.get(name, "black")
            plots.append(f"'{csv_name(name, p)}' every ::1 using 2:3 smooth unique "
                         f"with lines lc rgb '{c}' title '{name}'")
            q = next((r.get("q_star") for r in theory_rows if r["profile"] == name and r["p"] == p), None)
            if q is not None and 0 < q:
                plots.append(f"{q!r} with lines dt 2 lc rgb '{c}' notitle")
        lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"
