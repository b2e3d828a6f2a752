"""Simulation driver: configuration, initial data, the step loop, restarts.

A run writes into its output directory:

    diagnostics.csv           time, H, K, C2_rel..C{k_max}_rel per sample
    spectrum_<step>.csv       rows (l, E_l) per sample
    grid_<step>.bin           rendered vorticity samples (optional)
    checkpoint_<step>.zck     full restart state
    run_meta.json             baselines needed to continue a run

Sampling happens at steps {0, sample_every, 2 sample_every, ...} plus the
final step.  Floats are serialized with full precision, and the time
accumulator is restored bit-exactly from checkpoints, so a resumed run
reproduces the diagnostics stream of an uninterrupted one byte for byte
(given the same thread/determinism settings).
"""

from __future__ import annotations

import contextlib
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .basis import HarmonicCoefficients, compute_basis, extract, load_basis, project
from .diagnostics import casimir_drift, energy_spectrum, evaluate_on_grid, hamiltonian
from .formats import (
    Checkpoint,
    FileFormatError,
    format_float,
    read_checkpoint,
    write_checkpoint,
    write_grid,
)
from .integrator import (
    FixedPointError,
    StepperState,
    casimirs,
    default_time_step,
    midpoint_step_info,
)
from .laplacian import build_operator, spectral_norm

__all__ = [
    "SimConfig",
    "ConfigError",
    "SolverError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_SOLVER",
    "EXIT_IO",
    "load_config_file",
    "make_config",
    "random_initial_condition",
    "run",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class SolverError(RuntimeError):
    """The inner iteration failed during a run; carries the step index."""


@dataclass
class SimConfig:
    """Run parameters.  ``h=None`` selects the advective-limit default."""

    n: int
    steps: int
    h: float | None = None
    tol: float = 1e-12
    max_iter: int = 10
    seed: int = 0
    l_min: int = 2
    l_max: int = 20
    sample_every: int = 5000
    checkpoint_every: int = 10000
    output_dir: str = "out"
    threads: int = 0
    comm_scale: float = 1.0
    k_max: int = 5
    deterministic: bool = False
    write_grid: bool = True
    basis_cache: str | None = None

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.steps < 0:
            raise ConfigError(f"steps must be nonnegative, got {self.steps}")
        if self.h is not None and not self.h > 0.0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if not 2 <= self.l_min <= self.l_max <= self.n - 1:
            raise ConfigError(
                f"need 2 <= l_min <= l_max <= n-1, got l_min={self.l_min}, "
                f"l_max={self.l_max}, n={self.n}"
            )
        if self.tol <= 0.0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.sample_every < 1 or self.checkpoint_every < 1:
            raise ConfigError("sample_every and checkpoint_every must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if not 2 <= self.k_max <= self.n:
            raise ConfigError(f"k_max={self.k_max} out of range 2..{self.n}")
        if self.threads < 0:
            raise ConfigError(f"threads must be nonnegative, got {self.threads}")
        if self.comm_scale <= 0.0:
            raise ConfigError(f"comm_scale must be positive, got {self.comm_scale}")


def _coerce_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def load_config_file(path) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment, blank lines are ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def make_config(file_values: dict[str, str] | None = None, **overrides) -> SimConfig:
    """Build a SimConfig from config-file strings plus typed overrides."""
    known = {f.name: f for f in fields(SimConfig)}
    kwargs: dict[str, object] = {}
    for key, text in (file_values or {}).items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        kwargs[key] = _coerce_field(key, text)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        kwargs[key] = value
    missing = [k for k in ("n", "steps") if k not in kwargs]
    if missing:
        raise ConfigError(f"missing required configuration keys: {', '.join(missing)}")
    return SimConfig(**kwargs)  # type: ignore[arg-type]


_FIELD_TYPES = {
    "n": int,
    "steps": int,
    "h": float,
    "tol": float,
    "max_iter": int,
    "seed": int,
    "l_min": int,
    "l_max": int,
    "sample_every": int,
    "checkpoint_every": int,
    "output_dir": str,
    "threads": int,
    "comm_scale": float,
    "k_max": int,
    "deterministic": _coerce_bool,
    "write_grid": _coerce_bool,
    "basis_cache": str,
}


def _coerce_field(key: str, text: str):
    try:
        return _FIELD_TYPES[key](text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from exc


def random_initial_condition(
    cfg: SimConfig, basis, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Random band-limited state, unit spectral norm, seed-reproducible.

    Coefficient magnitudes are uniform in [0.8, 1.2] with uniform random
    phase (m = 0 entries are real with random sign); negative orders follow
    from the reality condition.  The draw order is fixed (m ascending, l
    ascending within each m), so a given seed pins the state bitwise.
    """
    if cfg.l_max >= cfg.n:
        raise ConfigError(f"l_max={cfg.l_max} must be below n={cfg.n}")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    coeffs = HarmonicCoefficients.zeros(cfg.n)
    for m in range(cfg.l_max + 1):
        lo = max(cfg.l_min, m, 1)
        if lo > cfg.l_max:
            continue
        count = cfg.l_max - lo + 1
        amps = rng.uniform(0.8, 1.2, count)
        if m == 0:
            vals = amps * np.where(rng.random(count) < 0.5, -1.0, 1.0) + 0j
        else:
            vals = amps * np.exp(2j * np.pi * rng.random(count))
        start = lo - max(m, 1)
        coeffs.pos[m][start : start + count] = vals
    coeffs.enforce_reality()
    w = project(coeffs, basis)
    return w / spectral_norm(w)


def _thread_limits(cfg: SimConfig):
    limit = cfg.threads or (1 if cfg.deterministic else 0)
    if limit:
        import threadpoolctl

        return threadpoolctl.threadpool_limits(limits=limit)
    return contextlib.nullcontext()


def _diag_header(k_max: int) -> str:
    return ",".join(["time", "H", "K"] + [f"C{k}_rel" for k in range(2, k_max + 1)])


def _truncate_diagnostics(path: Path, t_resume: float, h: float) -> None:
    """Drop sample rows after the resume point, keeping the stream consistent."""
    if not path.exists():
        raise FileFormatError(f"{path}: missing diagnostics file for resume")
    lines = path.read_text().splitlines()
    kept = lines[:1]
    for line in lines[1:]:
        if not line:
            continue
        if float(line.split(",", 1)[0]) <= t_resume + 0.5 * h:
            kept.append(line)
    path.write_text("\n".join(kept) + "\n")


def _log(msg: str) -> None:
    print(f"[zeitlin] {msg}", file=sys.stderr, flush=True)


def run(cfg: SimConfig, resume: str | None = None) -> int:
    """Execute a run; returns a process exit code (0 ok, 2/3/4 on failure)."""
    try:
        cfg.validate()
    except ConfigError as exc:
        _log(f"configuration error: {exc}")
        return EXIT_CONFIG
    try:
        with _thread_limits(cfg):
            _run_inner(cfg, resume)
    except ConfigError as exc:
        _log(f"configuration error: {exc}")
        return EXIT_CONFIG
    except SolverError as exc:
        _log(f"solver failure: {exc}")
        return EXIT_SOLVER
    except FixedPointError as exc:
        _log(f"solver failure: {exc}")
        return EXIT_SOLVER
    except (OSError, FileFormatError) as exc:
        _log(f"I/O failure: {exc}")
        return EXIT_IO
    return EXIT_OK


def _run_inner(cfg: SimConfig, resume: str | None) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    diag_path = out / "diagnostics.csv"
    meta_path = out / "run_meta.json"

    lap = build_operator(cfg.n)
    if cfg.basis_cache:
        basis = load_basis(cfg.basis_cache)
        if basis.n != cfg.n:
            raise ConfigError(
                f"basis cache is for N={basis.n}, configuration asks for N={cfg.n}"
            )
    else:
        basis = compute_basis(cfg.n, workers=max(1, cfg.threads))

    if resume is not None:
        cp = read_checkpoint(resume)
        if cp.n != cfg.n:
            raise ConfigError(f"checkpoint is for N={cp.n}, configuration asks for N={cfg.n}")
        if cp.seed != cfg.seed:
            raise ConfigError(f"checkpoint seed {cp.seed} differs from configured {cfg.seed}")
        if not meta_path.exists():
            raise ConfigError(
                f"resume requires {meta_path} from the original run directory"
            )
        meta = json.loads(meta_path.read_text())
        if meta.get("n") != cfg.n or meta.get("seed") != cfg.seed:
            raise ConfigError(f"{meta_path} does not match this configuration")
        h = float.fromhex(meta["h"])
        if cfg.h is not None and cfg.h != h:
            raise ConfigError(
                f"configured h={cfg.h} differs from the original run's h={h}; "
                "a resumed run must keep its time-step"
            )
        baseline = np.array([float.fromhex(s) for s in meta["casimir_baseline"]])
        if baseline.size != cfg.k_max:
            raise ConfigError(f"{meta_path} stores k_max={baseline.size}, configured {cfg.k_max}")
        rng = np.random.default_rng(cfg.seed)
        rng.bit_generator.state = json.loads(cp.rng_state.decode("utf-8"))
        state = StepperState(
            w=cp.w,
            h=h,
            time=cp.time,
            step_index=cp.step_index,
            tol=cfg.tol,
            max_iter=cfg.max_iter,
            comm_scale=cfg.comm_scale,
        )
        _truncate_diagnostics(diag_path, cp.time, h)
        _log(f"resumed from {resume} at step {cp.step_index} (t={cp.time:g})")
    else:
        rng = np.random.default_rng(cfg.seed)
        w0 = random_initial_condition(cfg, basis, rng)
        h = cfg.h if cfg.h is not None else default_time_step(w0, lap)
        baseline = casimirs(w0, cfg.k_max)
        state = StepperState(
            w=w0, h=h, tol=cfg.tol, max_iter=cfg.max_iter, comm_scale=cfg.comm_scale
        )
        meta = {
            "version": 1,
            "n": cfg.n,
            "seed": cfg.seed,
            "h": float(h).hex(),
            "k_max": cfg.k_max,
            "casimir_baseline": [float(c).hex() for c in baseline],
        }
        meta_path.write_text(json.dumps(meta, indent=1) + "\n")
        diag_path.write_text(_diag_header(cfg.k_max) + "\n")
        _log(f"N={cfg.n} steps={cfg.steps} h={h:g} seed={cfg.seed}")

    l_render = min(cfg.n - 1, 512)

    def write_sample(st: StepperState) -> float:
        ck = casimirs(st.w, cfg.k_max)
        rec = casimir_drift([(0.0, baseline), (st.time, ck)])[1]
        h_val = hamiltonian(st.w, lap)
        coeffs = extract(st.w, basis)
        energy = energy_spectrum(coeffs)
        k_val = float(energy.sum())
        row = [format_float(st.time), format_float(h_val), format_float(k_val)]
        row += [format_float(v) for v in rec.casimir_rel_err]
        with open(diag_path, "a", encoding="utf-8") as fh:
            fh.write(",".join(row) + "\n")
        spath = out / f"spectrum_{st.step_index:08d}.csv"
        with open(spath, "w", encoding="utf-8") as fh:
            fh.write("l,E_l\n")
            for l in range(1, cfg.n):
                fh.write(f"{l},{format_float(energy[l])}\n")
        if cfg.write_grid:
            field = evaluate_on_grid(coeffs, 2 * l_render, 4 * l_render, l_max=l_render)
            write_grid(out / f"grid_{st.step_index:08d}.bin", field, st.time)
        return h_val

    def write_cp(st: StepperState) -> None:
        blob = json.dumps(rng.bit_generator.state).encode("utf-8")
        cp = Checkpoint(
            step_index=st.step_index,
            time=st.time,
            n=cfg.n,
            seed=cfg.seed,
            rng_state=blob,
            w=st.w,
        )
        write_checkpoint(out / f"checkpoint_{st.step_index:08d}.zck", cp)

    if resume is None:
        write_sample(state)
        write_cp(state)

    while state.step_index < cfg.steps:
        try:
            state, info = midpoint_step_info(state, lap)
        except FixedPointError as exc:
            raise SolverError(
                f"step {state.step_index + 1}: {exc} (residual {exc.residual:.3e})"
            ) from exc
        s = state.step_index
        final = s == cfg.steps
        if s % cfg.sample_every == 0 or final:
            h_val = write_sample(state)
            _log(
                f"step {s}/{cfg.steps} t={state.time:.6g} H={h_val:.9e} "
                f"iters={info.iterations}"
            )
        if s % cfg.checkpoint_every == 0 or final:
            write_cp(state)
