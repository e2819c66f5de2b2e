"""Command-line scenario runner.

Every subcommand writes ``<out>/<subcommand>.json`` (and CSV tables when
``--format`` asks for them). Exit status: 0 success, 2 invalid input, 3 the
algorithm ran but did not reach an answer.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tnsynth import serialize
from tnsynth.errors import AlgorithmFailure, ValidationError
from tnsynth.hsp.circuit import MAX_QUBITS, HSPInstance, parse_bits
from tnsynth.hsp.shor import attempt_success_probability, check_modulus, parse_script, run_trials, shor_factor
from tnsynth.hsp.template import run_template
from tnsynth.rng import check_seed
from tnsynth.states import bell_state, mps_from_dense, schmidt_decompose
from tnsynth.waterwire import (
    Grid1D,
    ModelPotential,
    WireScenario,
    dimer_scenario,
    pentamer_scenario,
    validate_scenario,
    wire_generalize,
)

SUBCOMMANDS = ("shor", "hsp", "dimer", "pentamer", "wire", "schmidt")
FORMATS = ("json", "csv", "both")
KIND_ALIASES = {"dj": "deutsch_jozsa", "bv": "bernstein_vazirani"}
EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    script: str | None = None
    out: Path = Path(".")
    format: str = "json"
    trials: int | None = None


# scripts


def parse_hsp_script(text: str) -> list[tuple[int | None, int]]:
    """``"y=1011"`` or ``"w=3,y=101;w=0,y=011"``: ``w`` an integer, ``y`` a bitstring."""
    runs = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        vals = {}
        for item in chunk.split(","):
            key, _, val = item.partition("=")
            key, val = key.strip(), val.strip()
            if key not in ("w", "y") or not val:
                raise ValidationError(f"bad script entry {item!r}; expected w=<int>,y=<bits>")
            if key == "y":
                vals[key] = parse_bits(val)
            elif val.isdigit():
                vals[key] = int(val)
            else:
                raise ValidationError(f"bad script value {val!r}")
        if "y" not in vals:
            raise ValidationError(f"script run {chunk!r} must give y")
        runs.append((vals.get("w"), vals["y"]))
    if not runs:
        raise ValidationError("empty script")
    return runs


# scenario construction


def _grid(params: dict, default_points: int) -> Grid1D:
    g = params.get("grid") or {}
    return Grid1D(
        int(params.get("points") or g.get("n_points", default_points)),
        float(g.get("x_min", -2.5)),
        float(g.get("x_max", 2.5)),
    )


def _potential(params: dict) -> ModelPotential:
    p = dict(params.get("potential") or {})
    if params.get("coupling") is not None:
        p["coupling"] = params["coupling"]
    if isinstance(p.get("coupling"), list):
        p["coupling"] = tuple(p["coupling"])
    return ModelPotential(**p)


def build_scenario(sub: str, params: dict) -> WireScenario:
    n_modes = {"dimer": 2, "pentamer": 4}.get(sub) or int(params.get("modes", 4))
    mode = params.get("mode") or ("explicit" if params.get("alphas") else "model")
    beta = params.get("beta")
    if beta is not None:
        beta = np.asarray(beta, dtype=float)
    weights = params.get("bond_weights")
    return WireScenario(
        n_modes=n_modes,
        grid=_grid(params, 32 if n_modes == 2 else 8),
        potential=_potential(params),
        mode=mode,
        alphas=tuple(float(a) for a in params["alphas"]) if params.get("alphas") else None,
        bond_weights=tuple(tuple(float(x) for x in w) for w in weights) if weights else None,
        local_dim=params.get("local_dim"),
        k=int(params.get("k", 1)),
        superposition=tuple(params.get("superposition", (1, 2))),
        beta=beta,
    )


# validation


def validate(config: RunConfig) -> list[str]:
    """Static checks; an empty list means the run can start."""
    out = []
    if config.subcommand not in SUBCOMMANDS:
        return [f"unknown subcommand {config.subcommand!r}; expected one of {SUBCOMMANDS}"]
    if config.format not in FORMATS:
        out.append(f"format must be one of {FORMATS}")
    if config.seed is not None:
        try:
            check_seed(config.seed)
        except ValidationError as exc:
            out.append(str(exc))
    if config.trials is not None and config.trials < 1:
        out.append("trials must be >= 1")
    p = config.params
    try:
        if config.subcommand == "shor":
            n, a = p.get("n"), p.get("a")
            if n is None or a is None:
                return out + ["shor needs --n and --a"]
            out += check_modulus(int(n), int(a))
            width = int(n).bit_length()
            q = int(p.get("q") or width)
            if q + width > MAX_QUBITS:
                out.append(f"q + m = {q + width} exceeds the dense simulation bound of {MAX_QUBITS} qubits")
            if config.script is not None:
                parse_script(config.script)
            elif config.seed is None:
                out.append("shor needs --seed or --script")
        elif config.subcommand == "hsp":
            _instance(p)
            if config.script is not None:
                (parse_script if _instance(p).kind == "shor" else parse_hsp_script)(config.script)
            elif config.seed is None:
                out.append("hsp needs --seed or --script")
        elif config.subcommand in ("dimer", "pentamer", "wire"):
            out += validate_scenario(build_scenario(config.subcommand, p))
        elif config.subcommand == "schmidt":
            _schmidt_state(p)
    except ValidationError as exc:
        out.append(str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        out.append(f"malformed parameters: {exc}")
    return out


def _instance(p: dict) -> HSPInstance:
    kind = KIND_ALIASES.get(p.get("kind"), p.get("kind"))
    if kind == "shor":
        return HSPInstance.shor(int(p["n"]), int(p["a"]), q=p.get("q"))
    if kind in ("bernstein_vazirani", "simon"):
        secret = p.get("secret")
        if not secret:
            raise ValidationError(f"{kind} needs --secret")
        parse_bits(secret)
        return HSPInstance.bernstein_vazirani(secret) if kind == "bernstein_vazirani" else HSPInstance.simon(secret)
    if kind in ("deutsch", "deutsch_jozsa"):
        table = p.get("table")
        if not table:
            raise ValidationError(f"{kind} needs --table (e.g. 0110)")
        values = [int(c) for c in str(table)] if isinstance(table, str) else list(table)
        return HSPInstance.deutsch(values) if kind == "deutsch" else HSPInstance.deutsch_jozsa(values)
    raise ValidationError(f"unknown kind {p.get('kind')!r}")


def _schmidt_state(p: dict):
    if p.get("state"):
        state = p["state"]
        if isinstance(state, str):
            state = json.loads(Path(state).read_text(encoding="utf-8"))
        return serialize.state_from_dict(state)
    bell = p.get("bell") or "2+"
    if len(bell) != 2 or bell[0] not in "12" or bell[1] not in "+-":
        raise ValidationError(f"--bell must look like 1+, 1-, 2+ or 2-, got {bell!r}")
    return bell_state(int(bell[0]), bell[1])


# execution


def _emit(config: RunConfig, doc: dict, tables: dict[str, str]) -> list[Path]:
    config.out.mkdir(parents=True, exist_ok=True)
    written = []
    if config.format in ("json", "both"):
        written.append(serialize.write_json(config.out / f"{config.subcommand}.json", doc))
    if config.format in ("csv", "both"):
        for name, text in tables.items():
            written.append(serialize.write_text(config.out / f"{config.subcommand}_{name}.csv", text))
    return written


def _run_shor(config: RunConfig) -> tuple[dict, dict, bool]:
    p = config.params
    n, a, q = int(p["n"]), int(p["a"]), p.get("q")
    max_attempts = int(p.get("max_attempts", 32))
    if config.trials and config.script is None:
        runs = run_trials(n, a, config.seed, config.trials, max_attempts=max_attempts)
        wins = sum(t.success for t in runs)
        doc = {
            "N": n,
            "a": a,
            "seed": config.seed,
            "trials": config.trials,
            "successes": wins,
            "success_rate": wins / config.trials,
            "first_attempt_successes": sum(t.success and len(t.attempts) == 1 for t in runs),
            "exact_attempt_success": attempt_success_probability(n, a, q),
            "runs": [
                {
                    "stream": t.stream,
                    "success": t.success,
                    "attempts": len(t.attempts),
                    "period": t.period,
                    "factors": t.factors,
                    "rng_calls": t.rng_calls,
                }
                for t in runs
            ],
        }
        table = serialize.csv_text(
            ["stream", "success", "attempts", "period"],
            ((t.stream, int(t.success), len(t.attempts), t.period or 0) for t in runs),
        )
        return doc, {"trials": table}, wins > 0
    script = parse_script(config.script) if config.script is not None else None
    t = shor_factor(n, a, seed=config.seed, script=script, q=q, max_attempts=max_attempts)
    tables = {}
    if t.qft_distribution:
        tables["qft"] = serialize.distribution_csv(t.qft_distribution, "v")
    return t.to_dict(), tables, t.success


def _run_hsp(config: RunConfig) -> tuple[dict, dict, bool]:
    instance = _instance(config.params)
    script = None
    if config.script is not None:
        script = parse_script(config.script) if instance.kind == "shor" else parse_hsp_script(config.script)
    t = run_template(instance, seed=config.seed, script=script)
    probs = t.stages.get("transform", {}).get("probabilities")
    tables = {}
    if probs is not None:
        support = t.stages["transform"]["support"]
        tables["distribution"] = serialize.csv_text(["outcome", "probability"], zip(support, probs))
    return t.to_dict(), tables, t.success


def _run_dimer(config: RunConfig) -> tuple[dict, dict, bool]:
    r = dimer_scenario(build_scenario("dimer", config.params))
    tables = {
        "schmidt": serialize.csv_text(["index", "alpha"], ((i + 1, float(a)) for i, a in enumerate(r.alphas))),
        "spectrum_k": serialize.spectrum_csv(r.spectra["k"]),
        "spectrum_superposition": serialize.spectrum_csv(r.spectra["superposition"]),
    }
    return serialize.to_jsonable(r), tables, True


def _run_chain(config: RunConfig) -> tuple[dict, dict, bool]:
    scenario = build_scenario(config.subcommand, config.params)
    if config.subcommand == "pentamer":
        r = pentamer_scenario(scenario)
    else:
        r = wire_generalize(scenario.n_modes, scenario)
    weights = serialize.csv_text(
        ["bond", "index", "weight"],
        ((b + 1, i + 1, float(w)) for b, ws in enumerate(r.bond_weights) for i, w in enumerate(ws)),
    )
    tables = {
        "end_distribution": serialize.distribution_csv(r.end_distribution, "x_index"),
        "bond_weights": weights,
        "spectrum": serialize.spectrum_csv(r.spectrum),
    }
    return serialize.to_jsonable(r), tables, True


def _run_schmidt(config: RunConfig) -> tuple[dict, dict, bool]:
    p = config.params
    state = _schmidt_state(p)
    cut = int(p.get("cut", 1))
    form = schmidt_decompose(state, cut)
    doc = {
        "parts": [{"name": q.name, "dim": q.dim} for q in state.parts],
        "cut": cut,
        "alphas": form.alphas,
        "weight_total": float(np.sum(form.alphas**2)),
    }
    if len(state.parts) > 1 and state.normalized:
        mps = mps_from_dense(state, max_bond=p.get("max_bond"))
        doc["mps"] = mps
    table = serialize.csv_text(["index", "alpha"], ((i + 1, float(a)) for i, a in enumerate(form.alphas)))
    return doc, {"alphas": table}, True


RUNNERS = {
    "shor": _run_shor,
    "hsp": _run_hsp,
    "dimer": _run_dimer,
    "pentamer": _run_chain,
    "wire": _run_chain,
    "schmidt": _run_schmidt,
}


def run(config: RunConfig, stderr=None) -> int:
    stderr = stderr or sys.stderr
    problems = validate(config)
    if problems:
        for msg in problems:
            print(f"error: {msg}", file=stderr)
        return EXIT_INVALID
    try:
        doc, tables, ok = RUNNERS[config.subcommand](config)
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    except AlgorithmFailure as exc:
        print(f"failed: {exc}", file=stderr)
        return EXIT_FAILED
    try:
        _emit(config, doc, tables)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_INVALID
    if not ok:
        notes = doc.get("notes") or ["no result"]
        print(f"failed: {'; '.join(notes)}", file=stderr)
        return EXIT_FAILED
    return EXIT_OK


# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="64-bit seed for sampled measurements")
    p.add_argument("--script", help="fixed measurement outcomes, e.g. w=4,v=12")
    p.add_argument("--config", type=Path, help="JSON file with subcommand parameters")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--trials", type=int, help="independent seeded runs (shor)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tnsynth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("shor", help="factor N with base a")
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--q", type=int, help="input register qubits (default: bit length of N)")
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    _add_common(p)

    p = sub.add_parser("hsp", help="run one hidden-subgroup instance")
    p.add_argument("--kind", choices=("deutsch", "deutsch_jozsa", "dj", "bernstein_vazirani", "bv", "simon", "shor"))
    p.add_argument("--secret")
    p.add_argument("--table", help="0/1 truth table, e.g. 0110")
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=int)
    _add_common(p)

    for name in ("dimer", "pentamer", "wire"):
        p = sub.add_parser(name, help=f"water-wire {name} scenario")
        p.add_argument("--points", type=int, help="grid points per mode")
        p.add_argument("--coupling", type=float)
        p.add_argument("--k", type=int, help="1-based index of the ket measured on R1")
        p.add_argument("--mode", choices=("model", "explicit", "synthetic"))
        p.add_argument("--alphas", help="comma-separated Schmidt weights (explicit mode)")
        if name == "wire":
            p.add_argument("--modes", type=int)
        _add_common(p)

    p = sub.add_parser("schmidt", help="Schmidt and MPS decomposition of a state")
    p.add_argument("--bell", help="1+, 1-, 2+ or 2-")
    p.add_argument("--state", help="DenseState JSON file")
    p.add_argument("--cut", type=int)
    p.add_argument("--max-bond", dest="max_bond", type=int)
    _add_common(p)
    return parser


COMMON = ("subcommand", "seed", "script", "config", "out", "format", "trials")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = {}
    if args.config is not None:
        try:
            params = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
    for key, val in vars(args).items():
        if key not in COMMON and val is not None:
            params[key] = val
    if isinstance(params.get("alphas"), str):
        params["alphas"] = [float(x) for x in params["alphas"].split(",")]
    seed = args.seed if args.seed is not None else params.pop("seed", None)
    script = args.script if args.script is not None else params.pop("script", None)
    return RunConfig(args.subcommand, params, seed, script, args.out, args.format, args.trials)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
