"""Command-line front end.

Subcommands: trap | coherence | rb | optimize | noise.  Each run reads a
single JSON config (flags override the seed / output directory / format
fields), validates it fully before computing, and writes its outputs
plus a manifest enabling exact replay: feeding a manifest back in as
--config reproduces byte-identical CSV bodies.

Exit codes: 0 success, 2 config validation error, 3 computation error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import benchmark as rb_mod
from . import coherence, io, montecarlo, noise, optimizer, sequences, trap
from .constants import ATOMIC_MASS, ELEMENTARY_CHARGE
from .errors import ConfigError, PenningDDError

_STREAM_IDS = {"oracle": 1, "rb": 2, "noise": 3, "optimize": 4}


def sub_seed(global_seed: int, name: str) -> int:
    """Named, reproducible sub-stream of the global seed."""
    ss = np.random.SeedSequence(entropy=(int(global_seed), _STREAM_IDS[name]))
    return int(ss.generate_state(1, np.uint64)[0])


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing field '{key}' in '{where}' block")
    return block[key]


def _spectrum_from_config(block: dict) -> noise.NoiseSpectrum:
    shape = _require(block, "shape", "spectrum")
    alpha = float(block.get("alpha", 1.0))
    if shape == "white":
        return noise.White(alpha=alpha)
    if shape == "ohmic":
        return noise.OhmicSharpCutoff(
            omega_hi=float(_require(block, "omega_hi", "spectrum")),
            alpha=alpha)
    if shape == "ambient":
        return noise.AmbientPowerLaw(
            exponent=float(_require(block, "exponent", "spectrum")),
            omega_lo=float(_require(block, "omega_lo", "spectrum")),
            alpha=alpha,
            lines=tuple((float(w), float(a))
                        for w, a in block.get("lines", [])),
            line_fwhm=float(block.get("line_fwhm", noise.DEFAULT_LINE_FWHM)))
    if shape == "tabulated":
        if "path" in block:
            spec = noise.read_spectrum_table(block["path"])
            return noise.Tabulated(omegas=spec.omegas, values=spec.values,
                                   alpha=alpha)
        return noise.Tabulated(
            omegas=tuple(float(w) for w in _require(block, "omegas",
                                                    "spectrum")),
            values=tuple(float(v) for v in _require(block, "values",
                                                    "spectrum")),
            alpha=alpha)
    raise ConfigError(f"unknown spectrum shape '{shape}'")


def _sequence_from_config(block: dict) -> sequences.PulseSequence:
    kind = _require(block, "kind", "sequence")
    tau_pi = float(block.get("tau_pi", 0.0))
    if kind == "ramsey":
        return sequences.ramsey()
    if kind == "cpmg":
        return sequences.cpmg(int(_require(block, "n", "sequence")), tau_pi)
    if kind == "udd":
        return sequences.udd(int(_require(block, "n", "sequence")), tau_pi)
    if kind == "custom":
        return sequences.custom(
            [float(p) for p in _require(block, "positions", "sequence")],
            tau_pi)
    if kind == "record":
        return sequences.PulseSequence.deserialize(
            _require(block, "record", "sequence"))
    raise ConfigError(f"unknown sequence kind '{kind}'")


def _grid_from_config(block: dict) -> np.ndarray:
    start = float(_require(block, "start", "grid"))
    stop = float(_require(block, "stop", "grid"))
    points = int(_require(block, "points", "grid"))
    spacing = block.get("spacing", "linear")
    if not 0 < start < stop or points < 1:
        raise ConfigError("grid needs 0 < start < stop and points >= 1")
    if spacing == "linear":
        return np.linspace(start, stop, points)
    if spacing == "log":
        return np.geomspace(start, stop, points)
    raise ConfigError(f"unknown grid spacing '{spacing}'")


def _trap_config(block: dict) -> trap.TrapConfig:
    if "charge_e" in block:
        charge = float(block["charge_e"]) * ELEMENTARY_CHARGE
    else:
        charge = float(_require(block, "charge", "trap"))
    if "mass_amu" in block:
        mass = float(block["mass_amu"]) * ATOMIC_MASS
    else:
        mass = float(_require(block, "mass", "trap"))
    b0 = float(_require(block, "b0", "trap"))
    u0 = float(_require(block, "u0", "trap"))
    try:
        return trap.TrapConfig(
            charge=charge, mass=mass, b0=b0, u0=u0,
            r0=float(block.get("r0", 0.0)), z0=float(block.get("z0", 0.0)),
            geometry_factor=(float(block["geometry_factor"])
                             if "geometry_factor" in block else None))
    except ValueError as exc:
        raise ConfigError(f"invalid trap block: {exc}") from exc


# --- subcommand implementations ------------------------------------------

def _cmd_trap(cfg: dict, seed: int, out: Path, fmt: str):
    tcfg = _trap_config(_require(cfg, "trap", "config"))
    plasma = None
    if "plasma" in cfg:
        pblock = cfg["plasma"]
        density = (float(pblock["density_per_cm3"]) * 1e6
                   if "density_per_cm3" in pblock
                   else float(_require(pblock, "density", "plasma")))
        try:
            plasma = trap.PlasmaState(
                density=density,
                temperature=float(_require(pblock, "temperature", "plasma")))
        except ValueError as exc:
            raise ConfigError(f"invalid plasma block: {exc}") from exc

    report = trap.mode_report(tcfg)
    rows = [(name, vals["rad_per_s"], vals["hz"])
            for name, vals in report.items()]
    summary = {"modes": report}
    if plasma is not None:
        gamma = trap.coupling_constant(plasma)
        summary["coupling_constant"] = gamma
        summary["crystallized"] = trap.is_crystallized(plasma)
        rows.append(("coupling_constant", gamma, gamma))
    files = [io.write_table(out / "trap_report", ("quantity", "rad_per_s",
                                                  "hz"), rows, fmt)]
    return summary, files


def _cmd_coherence(cfg: dict, seed: int, out: Path, fmt: str):
    spec = _spectrum_from_config(_require(cfg, "spectrum", "config"))
    seq = _sequence_from_config(_require(cfg, "sequence", "config"))
    taus = _grid_from_config(_require(cfg, "grid", "config"))
    methods = cfg.get("methods", ["analytic"])
    if not set(methods) <= {"analytic", "montecarlo"}:
        raise ConfigError("methods must be drawn from analytic|montecarlo")
    files = []
    summary = {}
    if "analytic" in methods:
        curve = coherence.coherence_curve(spec, taus, seq)
        files.append(io.write_curve(out / "coherence_analytic", curve, fmt))
        summary["analytic_final_w"] = float(curve.w[-1])
    if "montecarlo" in methods:
        run = montecarlo.DephasingRun(
            spectrum=spec, sequence=seq,
            shots=int(cfg.get("shots", 2000)),
            seed=sub_seed(seed, "oracle"),
            dt=(float(cfg["dt"]) if cfg.get("dt") is not None else None))
        curve = montecarlo.simulate_coherence(run, taus)
        files.append(io.write_curve(out / "coherence_montecarlo", curve, fmt))
        summary["montecarlo_final_w"] = float(curve.w[-1])
    return summary, files


def _cmd_rb(cfg: dict, seed: int, out: Path, fmt: str):
    block = _require(cfg, "rb", "config")
    spec = (_spectrum_from_config(block["detuning_spectrum"])
            if block.get("detuning_spectrum") else None)
    try:
        exp = rb_mod.RBExperiment(
            lengths=tuple(int(x) for x in _require(block, "lengths", "rb")),
            randomizations=int(block.get("randomizations", 20)),
            seed=sub_seed(seed, "rb"),
            depolarizing=float(block.get("depolarizing", 0.0)),
            overrotation=float(block.get("overrotation", 0.0)),
            detuning_spectrum=spec,
            gate_gap=float(block.get("gate_gap", 5e-6)),
            tau_pi=float(block.get("tau_pi", 232.5e-6)),
            measurement_shots=(int(block["measurement_shots"])
                               if block.get("measurement_shots") is not None
                               else None))
    except ValueError as exc:
        raise ConfigError(f"invalid rb block: {exc}") from exc
    result = rb_mod.simulate(exp)
    rows = [(l, run, result.fidelities[i, run])
            for i, l in enumerate(result.lengths)
            for run in range(exp.randomizations)]
    files = [io.write_table(out / "rb_runs", ("l", "run", "fidelity"),
                            rows, fmt)]
    summary = {
        "error_per_gate": result.error_per_gate,
        "ci_68": result.ci,
        "amplitude": result.amplitude,
        "residual": result.residual,
        "seed": exp.seed,
    }
    return summary, files


def _cmd_optimize(cfg: dict, seed: int, out: Path, fmt: str):
    block = _require(cfg, "optimize", "config")
    spec = _spectrum_from_config(_require(block, "spectrum", "optimize"))
    start = (_sequence_from_config(block["start"])
             if block.get("start") else None)
    try:
        problem = optimizer.OptimizationProblem(
            n=int(_require(block, "n", "optimize")),
            tau=float(_require(block, "tau", "optimize")),
            tau_pi=float(block.get("tau_pi", 0.0)),
            spectrum=spec, start=start,
            chi_rel_tol=float(block.get("chi_rel_tol", 1e-4)),
            max_sweeps=int(block.get("max_sweeps", 60)),
            restarts=int(block.get("restarts", 0)),
            seed=sub_seed(seed, "optimize"))
    except ValueError as exc:
        raise ConfigError(f"invalid optimize block: {exc}") from exc
    result = optimizer.optimize(problem)
    record = result.sequence.serialize()
    (out / "optimized_sequence.txt").write_text(record + "\n")
    rows = [(i, v) for i, v in enumerate(result.chi_trace)]
    files = [out / "optimized_sequence.txt",
             io.write_table(out / "chi_trace", ("iteration", "chi"),
                            rows, fmt)]
    summary = {
        "sequence_record": record,
        "chi": result.chi_value,
        "chi_start": result.chi_start,
        "sweeps": result.sweeps,
        "converged": result.converged,
        "stalled_at_constraint": result.stalled_at_constraint,
        "tau": problem.tau,
        "n": problem.n,
    }
    return summary, files


def _cmd_noise(cfg: dict, seed: int, out: Path, fmt: str):
    block = _require(cfg, "noise", "config")
    spec = _spectrum_from_config(_require(block, "spectrum", "config"))
    dt = float(_require(block, "dt", "noise"))
    n = int(_require(block, "n", "noise"))
    n_seeds = int(block.get("seeds", 1))
    segment = int(block.get("segment_length", min(n, 1024)))
    base = sub_seed(seed, "noise")
    files = []
    traces = []
    for k in range(n_seeds):
        tr = noise.synthesize_trace(spec, dt, n, seed=base + k)
        traces.append(tr)
        if block.get("write_traces", True) and k < 4:
            files.append(io.write_trace(out / f"trace_{k}", tr, fmt))
    # averaged PSD estimate across the generated traces
    acc = None
    for tr in traces:
        est = noise.estimate_psd(tr, segment)
        vals = np.asarray(est.values)
        acc = vals if acc is None else acc + vals
    est_avg = noise.Tabulated(omegas=est.omegas,
                              values=tuple(acc / len(traces)))
    noise.write_spectrum_table(out / "spectrum_estimate.txt", est_avg)
    files.append(out / "spectrum_estimate.txt")
    summary = {"traces": n_seeds, "segment_length": segment,
               "first_seed": base}
    if "stepup_factor" in block:
        summary["stepup_db"] = noise.phase_noise_stepup(
            float(block["stepup_factor"]))
    return summary, files


_COMMANDS = {
    "trap": _cmd_trap,
    "coherence": _cmd_coherence,
    "rb": _cmd_rb,
    "optimize": _cmd_optimize,
    "noise": _cmd_noise,
}


def _load_config(path: str):
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    # a manifest from a previous run is itself a valid config (replay)
    if "config" in raw and "subcommand" in raw:
        return raw["config"], raw.get("seed"), raw["subcommand"]
    return raw, None, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="penningdd",
        description="Qubit dephasing / dynamical decoupling toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file "
                       "(a manifest from a previous run replays it)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, manifest_seed, manifest_cmd = _load_config(args.config)
        if manifest_cmd is not None and manifest_cmd != args.subcommand:
            raise ConfigError(
                f"manifest was produced by '{manifest_cmd}', "
                f"not '{args.subcommand}'")
        seed = args.seed if args.seed is not None else (
            manifest_seed if manifest_seed is not None
            else int(cfg.get("seed", 0)))
        out = Path(args.out if args.out != "." else cfg.get("out", "."))
        out.mkdir(parents=True, exist_ok=True)
        fmt = args.format
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    command = _COMMANDS[args.subcommand]
    try:
        summary, files = command(cfg, seed, out, fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PenningDDError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    manifest = {
        "subcommand": args.subcommand,
        "config": cfg,
        "seed": seed,
        "version": __version__,
        "streams": {k: sub_seed(seed, k) for k in _STREAM_IDS},
        "outputs": [str(Path(f).name) for f in files],
        "summary": summary,
    }
    io.write_manifest(out / "manifest.json", manifest)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
