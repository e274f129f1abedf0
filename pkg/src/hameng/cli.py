"""Command-line front end: ``hameng {group,synthesize,verify,simulate}``.

Exit codes: 0 success, 1 usage or validation error, 2 infeasible linear
program, 3 numerical verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import presets as pr
from .avgham import average_coefficients, average_operator, engineered_transform, toggling_frames
from .irrep import IrreducibleForm, SpinCoefficients, extract_coefficients
from .numerics import MAX_SPINS
from .rotgroup import GROUP_SIZE_CAP, RotationElement, block_coupling, generate_group, named_group
from .sim import (
    MODES,
    EnsembleSpec,
    build_hamiltonian,
    evolve,
    evolve_static,
    random_ensemble,
    write_csv,
)
from .svg import line_plot
from .synth import LP_MODES, PulseSequence, build_lp, lower_sequence, assemble_sequence, solve_lp

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_TOL = 1e-8


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- schemas

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_VEC5 = {"type": "array", "items": {"type": "number"}, "minItems": 5, "maxItems": 5}
_FORM = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"alpha": {"type": "number"}, "beta": _VEC3, "gamma": _VEC5},
}
_TERMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"field": _VEC3, "pair": _FORM},
}
_ENSEMBLE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_spins": {"type": "integer", "minimum": 1},
        "couplings_hz": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "positions": {"type": "array", "items": _VEC3},
        "coupling_const_hz": {"type": "number"},
        "typical_hz": {"type": "number", "exclusiveMinimum": 0},
        "bz_t": {"type": "number"},
        "gyro_hz_per_t": {"type": "number"},
        "seed": {"type": "integer"},
        "max_spins": {"type": "integer", "minimum": 1},
    },
}
_COEFFS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_spins"],
    "properties": {
        "n_spins": {"type": "integer", "minimum": 1},
        "fields": {"type": "array", "items": _VEC3},
        "pairs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["a", "b"],
                "properties": {
                    "a": {"type": "integer"},
                    "b": {"type": "integer"},
                    "alpha": {"type": "number"},
                    "beta": _VEC3,
                    "gamma": _VEC5,
                },
            },
        },
    },
}
_GENERATOR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["axis", "angle_rad"],
    "properties": {"axis": _VEC3, "angle_rad": {"type": "number"}},
}

SCHEMAS = {
    "group": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "name": {"type": "string"},
            "generators": {"type": "array", "items": _GENERATOR, "minItems": 1},
            "cap": {"type": "integer", "minimum": 1},
        },
    },
    "synthesize": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "preset": {"type": "string"},
            "group": {"type": "string"},
            "input": _TERMS,
            "target": _TERMS,
            "free_rows": {"type": "array", "items": {"type": "string"}},
            "mode": {"enum": list(LP_MODES)},
            "scale": {"type": "number"},
            "cycle_time_s": {"type": "number", "exclusiveMinimum": 0},
            "symmetrize": {"type": "boolean"},
            "rabi_hz": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "verify": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "sequence": {"type": "string"},
            "preset": {"type": "string"},
            "coefficients": _COEFFS,
            "ensemble": _ENSEMBLE,
            "tolerance": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "simulate": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "ensemble": _ENSEMBLE,
            "sequence": {"type": "string"},
            "preset": {"type": "string"},
            "cycle_time_s": {"type": "number", "exclusiveMinimum": 0},
            "mode": {"enum": list(MODES)},
            "cycles": {"type": "integer"},
            "rabi_hz": {"type": "number", "exclusiveMinimum": 0},
            "initial": {"enum": ["+x", "-x", "+y", "-y", "+z", "-z"]},
        },
    },
}


def load_config(command: str, path) -> dict:
    """Read a JSON config and validate it against the command's schema."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    validate_config(command, data)
    return data


def validate_config(command: str, data: dict) -> None:
    try:
        jsonschema.validate(data, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid {command} config at {where}: {exc.message}") from None


# ---------------------------------------------------------------- helpers


def _fmt(v) -> str:
    return "[" + ", ".join(f"{x: .6g}" for x in np.atleast_1d(v)) + "]"


def _stack(terms: dict) -> np.ndarray:
    pair = IrreducibleForm.from_json(terms.get("pair", {}))
    return np.concatenate([np.asarray(terms.get("field", [0.0, 0.0, 0.0]), float), pair.gamma])


def _two_spin(terms: dict) -> SpinCoefficients:
    field = np.asarray(terms.get("field", [0.0, 0.0, 0.0]), float)
    return SpinCoefficients(2, np.tile(field, (2, 1)), {(0, 1): IrreducibleForm.from_json(terms.get("pair", {}))})


def ensemble_from_config(cfg: dict, seed=None) -> EnsembleSpec:
    n = cfg.get("n_spins", 4)
    max_spins = cfg.get("max_spins", MAX_SPINS)
    if n > max_spins:
        raise UsageError(f"{n} spins exceeds the configured maximum of {max_spins}")
    seed = cfg.get("seed", 0) if seed is None else seed
    bz = cfg.get("bz_t", 2e-9)
    extra = {"gyro": cfg["gyro_hz_per_t"]} if "gyro_hz_per_t" in cfg else {}
    if "couplings_hz" in cfg:
        return EnsembleSpec(len(cfg["couplings_hz"]), np.array(cfg["couplings_hz"]), bz=bz, seed=seed, **extra)
    if "positions" in cfg:
        return EnsembleSpec.from_positions(cfg["positions"], cfg.get("coupling_const_hz", 60.0), bz=bz, seed=seed, **extra)
    spec = random_ensemble(n, cfg.get("typical_hz", 60.0), bz, seed)
    if extra:
        spec.gyro = extra["gyro"]
    return spec


def _report_coefficients(before: SpinCoefficients, after: SpinCoefficients, out) -> None:
    for label, c in (("before", before), ("after", after)):
        print(f"{label}:", file=out)
        print(f"  field[0] {_fmt(c.fields[0])}", file=out)
        for (a, b), form in sorted(c.pairs.items()):
            print(f"  pair({a},{b}) alpha {form.alpha: .6g} beta {_fmt(form.beta)} gamma {_fmt(form.gamma)}", file=out)


def _preset_sequence(name: str, cycle_time: float | None = None) -> PulseSequence:
    preset = pr.get_preset(name)
    solution, seq = pr.synthesize(preset, cycle_time or 1e-4)
    if seq is None:
        raise UsageError(f"preset {name!r} has no feasible sequence ({', '.join(solution.unreachable)})")
    return seq


# ---------------------------------------------------------------- commands


def cmd_group(args, out) -> int:
    cfg = load_config("group", args.config)
    name = args.name or cfg.get("name")
    if cfg.get("generators"):
        gens = [RotationElement.from_axis_angle(g["axis"], g["angle_rad"]).r3 for g in cfg["generators"]]
        try:
            group = generate_group(gens, name=name or "Custom", cap=cfg.get("cap", GROUP_SIZE_CAP))
        except RuntimeError as exc:
            raise UsageError(str(exc)) from None
    elif name:
        group = named_group(name)
    else:
        raise UsageError("group needs a name (clifford | icosahedral) or a generator config")
    group.check_axioms()
    couplings = [block_coupling(e.r5) for e in group]
    print(f"group {group.name}: order {len(group)}", file=out)
    print(f"rep5 block coupling {{1,2}}<->{{3,4,5}}: max {max(couplings):.3g}, "
          f"elements coupling > 1e-12: {sum(c > 1e-12 for c in couplings)}", file=out)
    if args.out:
        group.save(args.out)
        print(f"wrote {args.out}", file=out)
    return EXIT_OK


def _synth_problem(cfg: dict):
    """(preset or None, group, problem) from a preset name or an explicit config."""
    if "preset" in cfg:
        p = pr.get_preset(cfg["preset"])
        if p.fixed_pulses:
            return p, None, None
        group, problem = p.problem()
        return p, group, problem
    for key in ("group", "input", "target"):
        if key not in cfg and not (key == "target" and cfg.get("mode") == "pure-decouple"):
            raise UsageError(f"synthesize config needs {key!r} (or a preset)")
    group = named_group(cfg["group"])
    v_in = _stack(cfg["input"])
    target = _stack(cfg["target"]) if "target" in cfg else None
    problem = build_lp(group, v_in, target, cfg.get("mode", "max-scale"), tuple(cfg.get("free_rows", ())), cfg.get("scale"))
    return None, group, problem


def cmd_synthesize(args, out) -> int:
    cfg = load_config("synthesize", args.config)
    if args.preset:
        cfg["preset"] = args.preset
    if args.mode:
        cfg["mode"] = args.mode
    validate_config("synthesize", cfg)
    cycle_time = cfg.get("cycle_time_s", 1e-4)
    preset, group, problem = _synth_problem(cfg)
    if problem is None:
        _, seq = pr.synthesize(preset, cycle_time)
        scale = None
    else:
        solution = solve_lp(problem)
        if not solution.optimal:
            names = ", ".join(solution.unreachable) or "target direction"
            print(f"infeasible: no duration vector over {group.name} reaches the target; "
                  f"unreachable components: {names}", file=out)
            return EXIT_INFEASIBLE
        seq = assemble_sequence(group, solution, cycle_time, symmetrize=cfg.get("symmetrize", True))
        if preset is not None:
            seq.meta["preset"] = preset.name
        scale = solution.scale
    if "rabi_hz" in cfg:
        seq = lower_sequence(seq, cfg["rabi_hz"])
    before = preset.input_coefficients() if preset is not None else _two_spin(cfg["input"])
    after = average_coefficients(before, engineered_transform(toggling_frames(seq)))
    print(f"group {seq.meta.get('group', preset.group if preset else '?')}: {len(seq.pulses)} pulses, "
          f"cycle time {seq.cycle_time:g} s, cyclic {seq.is_cyclic()}", file=out)
    if scale is not None:
        print(f"coefficient {scale:.10g}", file=out)
    _report_coefficients(before, after, out)
    path = args.out or "sequence.json"
    seq.save(path)
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    cfg = load_config("verify", args.config)
    if args.sequence:
        cfg["sequence"] = args.sequence
    if args.preset:
        cfg["preset"] = args.preset
    if "sequence" in cfg:
        try:
            seq = PulseSequence.load(cfg["sequence"])
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read sequence {cfg['sequence']}: {exc}") from None
    elif "preset" in cfg:
        seq = _preset_sequence(cfg["preset"])
    else:
        raise UsageError("verify needs a sequence file or a preset")
    if "coefficients" in cfg:
        coeffs = SpinCoefficients.from_json(cfg["coefficients"])
    elif "ensemble" in cfg:
        coeffs = ensemble_from_config(cfg["ensemble"], args.seed).coefficients()
    else:
        coeffs = pr.nv_coefficients(3)
    if not seq.is_cyclic():
        print("verification failed: sequence is not cyclic (pulse product is not the identity)", file=out)
        return EXIT_VERIFY
    frames = toggling_frames(seq)
    coeff_path = average_coefficients(coeffs, engineered_transform(frames))
    op_path = extract_coefficients(average_operator(coeffs.operator(), frames, coeffs.n_spins), coeffs.n_spins)
    gap = coeff_path.max_difference(op_path)
    alpha_drift = max((abs(coeff_path.form(*k).alpha - f.alpha) for k, f in coeffs.pairs.items()), default=0.0)
    _report_coefficients(coeffs, coeff_path, out)
    print(f"operator-level vs coefficient-level max discrepancy {gap:.3e}", file=out)
    print(f"isotropic alpha drift {alpha_drift:.3e}", file=out)
    tol = cfg.get("tolerance", VERIFY_TOL)
    if gap > tol:
        print(f"verification failed: discrepancy above {tol:g}", file=out)
        return EXIT_VERIFY
    print("verification passed", file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    cfg = load_config("simulate", args.config)
    for key in ("mode", "cycles", "preset"):
        if getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    validate_config("simulate", cfg)
    cycles = cfg.get("cycles", 100)
    if cycles < 1:
        raise UsageError("cycles must be at least 1")
    mode = cfg.get("mode", "instantaneous")
    spec = ensemble_from_config(cfg.get("ensemble", {}), args.seed)
    if "sequence" in cfg:
        seq = PulseSequence.load(cfg["sequence"])
    else:
        seq = _preset_sequence(cfg.get("preset", "zeeman-icosahedral"))
    if "cycle_time_s" in cfg:
        seq = seq.with_cycle_time(cfg["cycle_time_s"])
    if mode == "off_resonant" and "rabi_hz" in cfg:
        seq = lower_sequence(seq, cfg["rabi_hz"])
    h = build_hamiltonian(spec)
    traj = evolve(h, seq, mode, cycles, cfg.get("initial", "+x"), spec.n_spins)
    # reference: average-Hamiltonian evolution after the same number of cycles
    h_avg = average_operator(h, toggling_frames(seq), spec.n_spins)
    ref = evolve_static(h_avg, seq.cycle_time * np.arange(1, cycles + 1), traj.initial, spec.n_spins)
    fidelity = np.abs(np.einsum("ti,ti->t", ref.states.conj(), traj.states)) ** 2
    path = args.out or "trajectory.csv"
    write_csv(path, traj, fidelity)
    print(f"{spec.n_spins} spins, {cycles} cycles, mode {mode}: final fidelity {fidelity[-1]:.6f}", file=out)
    print(f"wrote {path}", file=out)
    if args.svg:
        line_plot(args.svg, traj.times, {"fidelity": fidelity}, title=f"{mode}, {spec.n_spins} spins",
                  xlabel="t (s)", ylabel="fidelity")
        print(f"wrote {args.svg}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hameng", description="Design and check pulse sequences by average Hamiltonian engineering.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path")
        return p

    g = common(sub.add_parser("group", help="enumerate a rotation group"))
    g.add_argument("name", nargs="?", help="clifford | icosahedral")

    s = common(sub.add_parser("synthesize", help="solve the LP and write a pulse sequence"))
    s.add_argument("--preset", choices=sorted(pr.PRESETS))
    s.add_argument("--mode", choices=LP_MODES)

    v = common(sub.add_parser("verify", help="compare coefficient- and operator-level averages"))
    v.add_argument("sequence", nargs="?", help="sequence JSON file")
    v.add_argument("--preset", choices=sorted(pr.PRESETS))
    v.add_argument("--seed", type=int)

    m = common(sub.add_parser("simulate", help="exact dynamics, written as CSV"))
    m.add_argument("--preset", choices=sorted(pr.PRESETS))
    m.add_argument("--mode", choices=MODES)
    m.add_argument("--cycles", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--svg", help="optional SVG plot of fidelity vs time")
    return parser


COMMANDS = {"group": cmd_group, "synthesize": cmd_synthesize, "verify": cmd_verify, "simulate": cmd_simulate}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
