"""Declarative experiments: config parsing, runs, and their CSV/text outputs.

A config is flat ``key = value`` text, one setting per line, ``#`` starts a
comment.  Keys (defaults in parentheses)::

    problem.name     shaw | phillips | gravity | foxgood | paralleltomo | file  (shaw)
    problem.n        size of the 1-D problems (400)
    problem.depth    gravity source depth (0.25)
    problem.nx       paralleltomo image side (32)
    problem.angles   start:stop:step in degrees, or a comma list (0:180:1)
    problem.nrays    rays per angle (round(sqrt(2) nx))
    problem.matrix   Matrix Market file (file problems)
    problem.sidecar  exported sidecar with b and optionally x_true, eta (file problems)
    problem.rhs      single-column CSV right-hand side (file problems without sidecar)
    noise.kind       white | red | violet | poisson | tomo-photon  (white)
    noise.level      target |eta| / |A x| (1e-3)
    noise.exponent   spectral exponent override for colored noise
    noise.scale      Poisson scale (overrides noise.level)
    noise.n0         mean photon count for tomo-photon (1e5)
    reorth           full-double | none  (full-double)
    kmax             last iteration reported (30)
    methods          comma list from craig, lsqr, lsmr  (all three)
    outputs          output directory (out)
    seed             noise seed (0)
    plateau          phase threshold relative to max |phi| (0.5)
    rank_tol         singular value threshold for rank(S_k) (0.1)
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bidiag import BidiagState, ReorthMode, bidiagonalize
from .diagnostics import (highfreq_power, rank_sequence, residual_noise_match)
from .factors import FactorTrace, detect_noise_revealing, factor_trace, noise_estimate
from .linalg import MatrixOperator, read_matrix_market, write_matrix_market
from .noise import NOISE_KINDS, NoiseSpec, generate
from .problems import (TestProblem, make_foxgood, make_gravity, make_paralleltomo,
                       make_phillips, make_shaw)
from .solvers import METHODS, solver_trace

__all__ = [
    "ConfigError",
    "NumericalError",
    "ExperimentConfig",
    "RunResult",
    "TRACE_COLUMNS",
    "parse_config",
    "load_config",
    "build_config",
    "build_problem",
    "execute",
    "write_run",
    "run",
    "compare",
    "estimate_noise",
    "export_problem",
    "read_vector_csv",
    "write_vector_csv",
]

TRACE_COLUMNS = ("k", "alpha_k", "beta_kplus1", "phi0_k", "psi0_k", "res_craig", "res_lsqr",
                 "atres_lsmr", "err_craig", "err_lsqr", "err_lsmr", "rank_Sk")
PROBLEMS = ("shaw", "phillips", "gravity", "foxgood", "paralleltomo", "file")
AGREEMENT_TOL = 0.1


class ConfigError(ValueError):
    """Invalid experiment settings; `origin` points at the offending line or flag."""

    def __init__(self, message: str, origin: str | None = None):
        self.origin = origin
        super().__init__(f"{origin}: {message}" if origin else message)


class NumericalError(RuntimeError):
    """The computation itself could not proceed."""


# Config -------------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _int(text):
    return int(text)


def _positive_float(text):
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise ValueError("must be a positive finite number")
    return value


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _choice(options):
    def conv(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text
    return conv


def _methods(text):
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    if not items:
        raise ValueError("at least one method is required")
    for item in items:
        if item not in METHODS:
            raise ValueError(f"unknown method {item!r}; choose from {', '.join(METHODS)}")
    return tuple(m for m in METHODS if m in items)


def _angles(text):
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("expected start:stop:step with a positive step")
        values = np.arange(*parts)
    else:
        values = np.array([float(p) for p in text.split(",") if p.strip()])
    if values.size == 0:
        raise ValueError("angle set is empty")
    return tuple(values.tolist())


def _text(text):
    if not text:
        raise ValueError("must not be empty")
    return text


# key -> (attribute, converter)
_KEYS = {
    "problem.name": ("problem", _choice(PROBLEMS)),
    "problem.n": ("n", _positive_int),
    "problem.depth": ("depth", _positive_float),
    "problem.nx": ("nx", _positive_int),
    "problem.angles": ("angles", _angles),
    "problem.nrays": ("nrays", _positive_int),
    "problem.matrix": ("matrix", _text),
    "problem.sidecar": ("sidecar", _text),
    "problem.rhs": ("rhs", _text),
    "noise.kind": ("noise_kind", _choice(NOISE_KINDS)),
    "noise.level": ("level", _positive_float),
    "noise.exponent": ("exponent", _float),
    "noise.scale": ("scale", _positive_float),
    "noise.n0": ("n0", _positive_float),
    "reorth": ("reorth", _choice(tuple(m.value for m in ReorthMode))),
    "kmax": ("kmax", _int),
    "methods": ("methods", _methods),
    "outputs": ("outputs", _text),
    "seed": ("seed", _int),
    "plateau": ("plateau", _float),
    "rank_tol": ("rank_tol", _float),
}
_PATH_KEYS = ("problem.matrix", "problem.sidecar", "problem.rhs", "outputs")


@dataclass
class ExperimentConfig:
    problem: str = "shaw"
    n: int = 400
    depth: float = 0.25
    nx: int = 32
    angles: tuple = tuple(range(180))
    nrays: int | None = None
    matrix: str | None = None
    sidecar: str | None = None
    rhs: str | None = None
    noise_kind: str = "white"
    level: float = 1e-3
    exponent: float | None = None
    scale: float | None = None
    n0: float = 1e5
    reorth: str = "full-double"
    kmax: int = 30
    methods: tuple = METHODS
    outputs: str = "out"
    seed: int = 0
    plateau: float = 0.5
    rank_tol: float = 0.1
    origins: dict = field(default_factory=dict, repr=False)

    def origin(self, key: str) -> str | None:
        return self.origins.get(key)

    def noise_spec(self) -> NoiseSpec:
        params = {}
        if self.exponent is not None:
            params["exponent"] = self.exponent
        if self.scale is not None:
            params["scale"] = self.scale
        params["n0"] = self.n0
        return NoiseSpec(self.noise_kind, self.level, self.seed, params)


def parse_config(text: str, source: str = "<config>") -> dict:
    """Split config text into ``{key: (value, origin)}`` without interpreting values."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        origin = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", origin)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", origin)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set at {entries[key][1]})", origin)
        entries[key] = (value, origin)
    return entries


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    entries = parse_config(text, str(path))
    # paths inside a config file are relative to that file
    for key in _PATH_KEYS:
        if key in entries:
            value, origin = entries[key]
            if not os.path.isabs(value):
                value = str(path.parent / value)
            entries[key] = (value, origin)
    return entries


def build_config(entries: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Turn parsed entries (and flag overrides, which win) into a validated config."""
    merged = dict(entries or {})
    merged.update(overrides or {})
    cfg = ExperimentConfig()
    for key, (value, origin) in merged.items():
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r} for {key}: {exc}", origin) from None
        cfg.origins[key] = origin
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.kmax < 1:
        raise ConfigError(f"kmax must be at least 1, got {cfg.kmax}", cfg.origin("kmax"))
    if not 0 < cfg.plateau < 1:
        raise ConfigError("plateau must lie in (0, 1)", cfg.origin("plateau"))
    if not 0 < cfg.rank_tol < 1:
        raise ConfigError("rank_tol must lie in (0, 1)", cfg.origin("rank_tol"))
    if cfg.problem == "file":
        if cfg.matrix is None:
            raise ConfigError("file problems need problem.matrix", cfg.origin("problem.name"))
        if (cfg.sidecar is None) == (cfg.rhs is None):
            raise ConfigError("file problems need exactly one of problem.sidecar and problem.rhs",
                              cfg.origin("problem.name"))
    elif cfg.problem == "phillips" and cfg.n % 4:
        raise ConfigError(f"phillips needs n divisible by 4, got {cfg.n}", cfg.origin("problem.n"))
    elif cfg.problem == "shaw" and cfg.n % 2:
        raise ConfigError(f"shaw needs an even n, got {cfg.n}", cfg.origin("problem.n"))
    if cfg.problem == "paralleltomo" and cfg.nx < 8:
        raise ConfigError(f"paralleltomo needs nx >= 8, got {cfg.nx}", cfg.origin("problem.nx"))
    if cfg.noise_kind == "tomo-photon" and cfg.problem in ("file",):
        raise ConfigError("tomo-photon noise needs a synthetic problem", cfg.origin("noise.kind"))
    if cfg.n0 < 1:
        raise ConfigError("noise.n0 must be at least 1", cfg.origin("noise.n0"))


# Vector files ----------------------------------------------------------------

def write_vector_csv(path, v, header: str) -> None:
    lines = [header] + [repr(float(x)) for x in np.asarray(v, dtype=np.float64)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vector_csv(path) -> np.ndarray:
    rows = Path(path).read_text().split()
    if len(rows) < 2:
        raise ValueError(f"{path}: expected a header line followed by values")
    return np.array([float(r) for r in rows[1:]])


def _read_sidecar(path) -> dict:
    data = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        data[key.strip()] = value.strip()
    return data


# Problems -------------------------------------------------------------------

def _synthetic(cfg: ExperimentConfig) -> TestProblem:
    if cfg.problem == "shaw":
        return make_shaw(cfg.n)
    if cfg.problem == "phillips":
        return make_phillips(cfg.n)
    if cfg.problem == "gravity":
        return make_gravity(cfg.n, cfg.depth)
    if cfg.problem == "foxgood":
        return make_foxgood(cfg.n)
    return make_paralleltomo(cfg.nx, np.asarray(cfg.angles), cfg.nrays)


def _file_problem(cfg: ExperimentConfig) -> TestProblem:
    try:
        A = read_matrix_market(cfg.matrix)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix {cfg.matrix}: {exc}", cfg.origin("problem.matrix")) from None
    x_true = eta = b_exact = None
    params = {"matrix": cfg.matrix}
    try:
        if cfg.sidecar is not None:
            side = _read_sidecar(cfg.sidecar)
            vec = lambda key: np.array([float(t) for t in side[key].split()]) if side.get(key) else None
            b = vec("b")
            if b is None:
                raise ValueError("sidecar has no b")
            x_true, eta, b_exact = vec("x_true"), vec("eta"), vec("b_exact")
            params["sidecar"] = cfg.sidecar
        else:
            b = read_vector_csv(cfg.rhs)
    except (OSError, ValueError) as exc:
        key = "problem.sidecar" if cfg.sidecar is not None else "problem.rhs"
        raise ConfigError(f"cannot read right-hand side: {exc}", cfg.origin(key)) from None
    if b.size != A.shape[0]:
        raise ConfigError(f"right-hand side has {b.size} entries, matrix has {A.shape[0]} rows",
                          cfg.origin("problem.matrix"))
    if eta is not None and b_exact is None:
        b_exact = b - eta
    return TestProblem("file", MatrixOperator(A), x_true, b_exact, eta, b, params)


def build_problem(cfg: ExperimentConfig) -> TestProblem:
    """Problem with noisy data as described by `cfg`."""
    if cfg.problem == "file":
        return _file_problem(cfg)
    clean = _synthetic(cfg)
    b, eta = generate(cfg.noise_spec(), clean)
    return TestProblem(clean.name, clean.A, clean.x_true, clean.b_exact, eta, b,
                       dict(clean.params))


# Runs -------------------------------------------------------------------------

@dataclass
class RunResult:
    config: ExperimentConfig
    problem: TestProblem
    state: BidiagState
    factors: FactorTrace
    traces: dict
    ranks: np.ndarray
    kmax: int

    @property
    def k_rev(self):
        return self.factors.k_rev

    def rows(self) -> list[dict]:
        st, ft = self.state, self.factors
        out = []
        for k in range(self.kmax + 1):
            row = dict.fromkeys(TRACE_COLUMNS)
            row["k"] = k
            if k >= 1:
                row["alpha_k"] = st.alphas[k - 1]
                row["rank_Sk"] = int(self.ranks[k - 1])
            if k + 1 <= len(st.betas):
                row["beta_kplus1"] = st.betas[k]
            if k < ft.phi0.size:
                row["phi0_k"] = ft.phi0[k]
            if k < ft.psi0.size:
                row["psi0_k"] = ft.psi0[k]
            for method, trace in self.traces.items():
                if k >= len(trace.rows):
                    continue
                r = trace.rows[k]
                key = "atres_lsmr" if method == "lsmr" else f"res_{method}"
                row[key] = r.atresnorm if method == "lsmr" else r.resnorm
                row[f"err_{method}"] = r.errnorm
            out.append(row)
        return out


def execute(cfg: ExperimentConfig) -> RunResult:
    """Generate data, bidiagonalize, and evaluate the requested methods."""
    problem = build_problem(cfg)
    m, n = problem.A.shape
    if cfg.kmax > min(m, n):
        raise ConfigError(f"kmax={cfg.kmax} exceeds min(m, n)={min(m, n)}", cfg.origin("kmax"))
    try:
        # one extra step provides psi_kmax and the LSMR iterate at kmax
        state = bidiagonalize(problem.A, problem.b, min(cfg.kmax + 1, min(m, n)), cfg.reorth)
    except ValueError as exc:
        raise NumericalError(str(exc)) from None
    if state.k == 0:
        raise NumericalError(f"bidiagonalization stopped before the first step ({state.reason})")
    kmax = min(cfg.kmax, state.k)
    ft = factor_trace(state, cfg.plateau)
    traces = {meth: solver_trace(meth, state, kmax, problem.x_true) for meth in cfg.methods}
    ranks = rank_sequence(state.S, kmax, cfg.rank_tol)
    return RunResult(cfg, problem, state, ft, traces, ranks, kmax)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trace_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in result.rows():
        writer.writerow([_fmt(row[c]) for c in TRACE_COLUMNS])
    return buf.getvalue()


def _argmin(values, start=0):
    vals = np.asarray(values[start:], dtype=float)
    if vals.size == 0 or np.all(np.isnan(vals)):
        return None
    return int(np.nanargmin(vals)) + start


def summary(result: RunResult) -> dict:
    p, st, ft = result.problem, result.state, result.factors
    out = {
        "problem": p.name,
        "m": p.A.shape[0],
        "n": p.A.shape[1],
        "reorth": result.config.reorth,
        "seed": result.config.seed,
        "noise_kind": result.config.noise_kind if p.name != "file" else "given",
        "delta_noise": p.delta_noise,
        "steps": st.k,
        "termination": st.reason or "none",
        "kmax": result.kmax,
        "k_rev": ft.k_rev,
        "phase_start": ft.rev_phase[0] if ft.rev_phase else None,
        "phase_end": ft.rev_phase[1] if ft.rev_phase else None,
    }
    for method, trace in result.traces.items():
        if p.x_true is not None:
            errs = trace.errnorms
            kbest = _argmin(errs)
            out[f"argmin_err_{method}"] = kbest
            out[f"min_err_{method}"] = errs[kbest]
        res = trace.atresnorms if method == "lsmr" else trace.resnorms
        name = "atres" if method == "lsmr" else "res"
        out[f"argmin_{name}_{method}"] = _argmin(res, start=1)
    return out


def _kv_text(items: dict) -> str:
    lines = []
    for key, value in items.items():
        if value is None:
            text = "none"
        elif isinstance(value, (float, np.floating)):
            text = repr(float(value))
        elif isinstance(value, np.integer):
            text = str(int(value))
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def match_rows(result: RunResult) -> list[list]:
    """Per-iteration residual-noise match for each method (needs a known eta)."""
    eta = result.problem.eta
    rows = []
    for k in range(result.kmax + 1):
        row = [k]
        for method in METHODS:
            trace = result.traces.get(method)
            if trace is None or k >= len(trace.rows):
                row += [None, None]
                continue
            rep = residual_noise_match(eta, trace.rows[k].residual(result.state))
            row += [rep.l2_diff, rep.highfreq_ratio if rep.defined else None]
        rows.append(row)
    return rows


MATCH_COLUMNS = ("k", "l2_craig", "hf_craig", "l2_lsqr", "hf_lsqr", "l2_lsmr", "hf_lsmr")


def write_run(result: RunResult, outdir=None) -> dict:
    """Write trace.csv, summary.txt, noise estimates and match.csv; return the paths."""
    outdir = Path(outdir or result.config.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"trace": outdir / "trace.csv", "summary": outdir / "summary.txt"}
    paths["trace"].write_text(trace_csv(result))
    info = summary(result)
    k_rev = result.k_rev
    eta = result.problem.eta
    if k_rev is not None:
        est = noise_estimate(result.state, k_rev, result.factors.phi0)
        paths["eta_tilde"] = outdir / "eta_tilde.csv"
        write_vector_csv(paths["eta_tilde"], est, "eta_tilde")
        if eta is not None:
            paths["eta_residual"] = outdir / "eta_minus_eta_tilde.csv"
            write_vector_csv(paths["eta_residual"], eta - est, "eta_minus_eta_tilde")
    else:
        info["notice"] = "no noise-revealing iteration within kmax; noise estimate not written"
    if eta is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(MATCH_COLUMNS)
        rows = match_rows(result)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        paths["match"] = outdir / "match.csv"
        paths["match"].write_text(buf.getvalue())
        for j, method in enumerate(METHODS):
            vals = [r[1 + 2 * j] for r in rows]
            if method in result.traces:
                kbest = _argmin([np.nan if v is None else v for v in vals])
                info[f"argmin_match_{method}"] = kbest
                info[f"min_match_{method}"] = vals[kbest]
    paths["summary"].write_text(_kv_text(info))
    return paths


def run(cfg: ExperimentConfig, outdir=None) -> tuple[RunResult, dict]:
    result = execute(cfg)
    return result, write_run(result, outdir)


# Comparison ---------------------------------------------------------------------

def read_trace(path) -> dict:
    """Load a trace CSV into ``{column: float array}`` with NaN for empty fields."""
    path = Path(path)
    if path.is_dir():
        path = path / "trace.csv"
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read trace: {exc.strerror}", str(path)) from None
    if header is None or tuple(header) != TRACE_COLUMNS:
        raise ConfigError(f"not a trace file (header {header})", str(path))
    cols = {c: np.array([float(r[i]) if r[i] else np.nan for r in rows]) for i, c in enumerate(header)}
    if np.any(np.diff(cols["k"]) <= 0):
        raise ConfigError("k column is not strictly increasing", str(path))
    return cols


def agreement_window(a, b, tol: float = AGREEMENT_TOL) -> int | None:
    """Largest ``k0`` with ``|a_k - b_k| <= tol |b_k|`` for every ``k <= k0``."""
    end = None
    for k, (x, y) in enumerate(zip(a, b)):
        if np.isnan(x) or np.isnan(y) or abs(x - y) > tol * abs(y):
            break
        end = k
    return end


def _method_columns(cols: dict) -> dict:
    present = {}
    for method in METHODS:
        res_key = "atres_lsmr" if method == "lsmr" else f"res_{method}"
        if not np.all(np.isnan(cols[res_key])):
            present[method] = (cols[f"err_{method}"], cols[res_key])
    return present


def compare(trace_path, twin_path=None) -> dict:
    """Tabulate best iterations, match minima, the LSQR/CRAIG agreement window, twin delay."""
    cols = read_trace(trace_path)
    present = _method_columns(cols)
    if len(present) < 2:
        raise ConfigError(f"comparison needs at least two methods, trace has {list(present)}",
                          str(trace_path))
    ks = cols["k"].astype(int)
    report = {}
    for method, (err, res) in present.items():
        if not np.all(np.isnan(err)):
            kbest = _argmin(err)
            report[f"best_k_{method}"] = int(ks[kbest])
            report[f"best_err_{method}"] = float(err[kbest])
        else:
            kbest = _argmin(res, start=1)
            report[f"best_res_k_{method}"] = None if kbest is None else int(ks[kbest])
    match_path = Path(trace_path)
    match_path = (match_path if match_path.is_dir() else match_path.parent) / "match.csv"
    if match_path.exists():
        with match_path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            mrows = list(reader)
        for method in present:
            vals = np.array([float(r[f"l2_{method}"]) if r[f"l2_{method}"] else np.nan for r in mrows])
            kbest = _argmin(vals)
            if kbest is not None:
                report[f"best_match_k_{method}"] = int(kbest)
                report[f"best_match_{method}"] = float(vals[kbest])
    if "lsqr" in present and "craig" in present:
        use_err = not np.all(np.isnan(present["lsqr"][0]))
        idx = 0 if use_err else 1
        window = agreement_window(present["craig"][idx], present["lsqr"][idx])
        report["agreement_basis"] = "error" if use_err else "residual"
        report["agreement_window_end"] = None if window is None else int(ks[window])
    k_rev, peak = _trace_k_rev(cols)
    report["k_rev"] = k_rev
    report["peak_k"] = peak
    if twin_path is not None:
        twin_rev, twin_peak = _trace_k_rev(read_trace(twin_path))
        report["twin_k_rev"] = twin_rev
        report["twin_peak_k"] = twin_peak
        notes = []
        for label, mine, theirs in (("k_rev", k_rev, twin_rev), ("peak of |phi|", peak, twin_peak)):
            if mine is None or theirs is None:
                continue
            if mine > theirs:
                notes.append(f"{label} delayed by {mine - theirs}")
            elif mine < theirs:
                notes.append(f"{label} earlier by {theirs - mine}")
        if k_rev is not None and twin_rev is not None:
            report["k_rev_delay"] = k_rev - twin_rev
        if peak is not None and twin_peak is not None:
            report["peak_delay"] = peak - twin_peak
        report["notice"] = ("; ".join(notes) + " relative to the twin run") if notes \
            else "noise revealing matches the twin run"
    return report


def _trace_k_rev(cols):
    """First local maximum and global maximum of |phi_k(0)| in a trace."""
    phi = cols["phi0_k"]
    phi = phi[~np.isnan(phi)]
    if phi.size < 2:
        return None, None
    return detect_noise_revealing(phi).k_rev, int(np.argmax(np.abs(phi)))


def format_report(report: dict) -> str:
    return _kv_text(report)


# Noise estimate ------------------------------------------------------------------

def estimate_noise(cfg: ExperimentConfig, k: int | None = None, outdir=None) -> dict:
    """Write the noise estimate at `k` (default k_rev) and, when eta is known, a match report."""
    cfg_run = ExperimentConfig(**{**cfg.__dict__, "origins": dict(cfg.origins)})
    if k is not None:
        cfg_run.kmax = max(cfg.kmax, k)
    result = execute(cfg_run)
    if k is None:
        k = result.k_rev
        if k is None:
            raise NumericalError("no noise-revealing iteration detected; pass k explicitly")
    if k < 0 or k >= result.factors.phi0.size:
        raise ConfigError(f"iteration {k} not computed (bidiagonalization has {result.state.k} steps)")
    est = noise_estimate(result.state, k, result.factors.phi0)
    outdir = Path(outdir or cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"eta_tilde": outdir / "eta_tilde.csv"}
    write_vector_csv(paths["eta_tilde"], est, "eta_tilde")
    report = {"k": k, "k_rev": result.k_rev}
    eta = result.problem.eta
    if eta is None:
        report["notice"] = "noise vector unknown (real data); match report omitted"
    else:
        paths["eta_residual"] = outdir / "eta_minus_eta_tilde.csv"
        write_vector_csv(paths["eta_residual"], eta - est, "eta_minus_eta_tilde")
        rep = residual_noise_match(eta, est)
        hf_eta = highfreq_power(eta)
        hf_diff = highfreq_power(eta - est)
        report.update({
            "eta_norm": float(np.linalg.norm(eta)),
            "l2_diff": rep.l2_diff,
            "highfreq_ratio": rep.highfreq_ratio if rep.defined else None,
            "highfreq_power_eta": hf_eta,
            "highfreq_power_diff": hf_diff,
            "highfreq_power_ratio": hf_diff / hf_eta if hf_eta > 0 else None,
        })
    paths["report"] = outdir / "noise_match.txt"
    paths["report"].write_text(_kv_text(report))
    return {"report": report, "paths": paths}


# Export ----------------------------------------------------------------------------

def export_problem(cfg: ExperimentConfig, outdir=None) -> dict:
    """Write ``A.mtx`` plus a ``problem.txt`` sidecar that replays the same data."""
    problem = build_problem(cfg)
    outdir = Path(outdir or cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"matrix": outdir / "A.mtx", "sidecar": outdir / "problem.txt"}
    write_matrix_market(paths["matrix"], problem.dense, "array",
                        comment=f"{problem.name} {problem.A.shape[0]}x{problem.A.shape[1]}")
    vec = lambda v: None if v is None else " ".join(repr(float(x)) for x in v)
    info = {"name": problem.name}
    for key, value in problem.params.items():
        info[f"param.{key}"] = " ".join(map(str, value)) if isinstance(value, list) else value
    info.update({
        "noise.kind": cfg.noise_kind if problem.name != "file" else "given",
        "noise.seed": cfg.seed,
        "delta_noise": problem.delta_noise,
        "x_true": vec(problem.x_true),
        "b_exact": vec(problem.b_exact),
        "eta": vec(problem.eta),
        "b": vec(problem.b),
    })
    paths["sidecar"].write_text(_kv_text({k: v for k, v in info.items() if v is not None}))
    return paths
