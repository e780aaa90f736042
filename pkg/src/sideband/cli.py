"""Command-line front end: validate networks, sweep spectra, run the
twin-beam experiment preset, cross-validate against Monte-Carlo, and print
delay designs.

Outputs are plot-ready files: CSV for sweeps (fixed header
f_hz,abs,snl,norm,db) and JSON for reports.  Every output embeds or
references a run manifest (command, input hash, overrides, seed, version,
timestamp) and reruns are byte-identical apart from the timestamp field.

Exit codes: 0 success, 2 I/O or usage, 3 parse error, 4 validation error,
5 numerical/statistical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

from . import __version__, dsl, engine, entanglement, montecarlo, mzi, scenario
from .network import Combo, NetworkSpec, validate

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_NUMERICAL = 5

SEED_ENV_VAR = "SIDEBAND_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)


def _load_network(path: str, overrides: list[str]) -> tuple[NetworkSpec, str]:
    text = _read_text(path)
    try:
        spec = dsl.parse(text)
    except dsl.ParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    try:
        spec = apply_overrides(spec, overrides)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc), EXIT_IO)
    violations = validate(spec)
    if violations:
        listing = "\n".join("  " + str(v) for v in violations)
        raise CliError(f"{path}: network is invalid:\n{listing}", EXIT_VALIDATION)
    return spec, text


def apply_overrides(spec: NetworkSpec, overrides: list[str]) -> NetworkSpec:
    """Apply name.param=value overrides; values take the DSL quantity syntax."""
    if not overrides:
        return spec
    sources = list(spec.sources)
    elements = list(spec.elements)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"override must look like name.param=value: {item!r}")
        target, raw = item.split("=", 1)
        name, param = target.split(".", 1)
        hit = False
        for i, decl in enumerate(elements):
            if decl.name != name:
                continue
            elements[i] = dataclasses.replace(
                decl, element=_override_element(decl.element, param, raw))
            hit = True
        for i, decl in enumerate(sources):
            if decl.name != name:
                continue
            sources[i] = dataclasses.replace(
                decl, spec=_override_source(decl.spec, param, raw))
            hit = True
        if not hit:
            raise KeyError(f"override target {name!r} not found in network")
    return dataclasses.replace(spec, sources=tuple(sources), elements=tuple(elements))


def _override_element(element, param: str, raw: str):
    from .network import BeamSplitter, Delay, Loss, PhaseShift

    if isinstance(element, Delay) and param == "length":
        return Delay(dsl.parse_quantity(raw, dsl.LENGTH) / scenario.SPEED_OF_LIGHT,
                     element.carrier_phase)
    dims = {
        (BeamSplitter, "t"): dsl.PLAIN,
        (PhaseShift, "phi"): dsl.PLAIN,
        (Delay, "tau"): dsl.TIME,
        (Delay, "carrier_phase"): dsl.PLAIN,
        (Loss, "eta"): dsl.PLAIN,
    }
    key = (type(element), param)
    if key not in dims:
        raise KeyError(f"element {type(element).__name__} has no parameter {param!r}")
    return dataclasses.replace(element, **{param: dsl.parse_quantity(raw, dims[key])})


def _override_source(src, param: str, raw: str):
    from .network import Coherent, ComplexAmp, QuadSpectrum, SqueezedCoherent

    if param == "amp" and isinstance(src, (Coherent, SqueezedCoherent)):
        amp = ComplexAmp(dsl.parse_quantity(raw, dsl.PLAIN), src.amp.im)
        return dataclasses.replace(src, amp=amp)
    if param in ("vx", "vy") and isinstance(src, SqueezedCoherent):
        if not src.noise.is_constant:
            raise KeyError("cannot override a tabulated spectrum point-wise")
        value = dsl.parse_quantity(raw, dsl.VAR)
        vx = value if param == "vx" else src.noise.vx
        vy = value if param == "vy" else src.noise.vy
        return dataclasses.replace(src, noise=QuadSpectrum.constant(vx, vy))
    raise KeyError(f"source has no overridable parameter {param!r}")


def _resolve_combo(spec: NetworkSpec, text: str | None) -> Combo:
    detectors = spec.detector_names()
    if text is None:
        if spec.measurements:
            return spec.measurements[0].combo
        text = "sum"
    if text.startswith("single:"):
        idx = int(text.split(":", 1)[1])
        if not 0 <= idx < len(detectors):
            raise CliError(f"single:{idx} out of range (have {len(detectors)} detectors)",
                           EXIT_IO)
        return Combo.single(detectors[idx])
    if text.startswith("measure:"):
        name = text.split(":", 1)[1]
        for m in spec.measurements:
            if m.name == name:
                return m.combo
        raise CliError(f"no measurement named {name!r} in network", EXIT_IO)
    if text in ("sum", "diff"):
        if len(detectors) != 2:
            raise CliError(
                f"{text} needs exactly 2 detectors (have {len(detectors)}); "
                "use measure:NAME or single:K", EXIT_IO)
        return Combo(text, detectors)
    raise CliError(f"unknown combo {text!r}", EXIT_IO)


def _seed_from(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV_VAR} must be an integer, got {env!r}", EXIT_IO)
    return 0


def make_manifest(command: str, *, path: str | None = None, text: str | None = None,
                  overrides=None, seed: int | None = None) -> dict:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if path is not None:
        manifest["input_file"] = path
        manifest["input_sha256"] = hashlib.sha256(
            (text or "").encode("utf-8")).hexdigest()
    if overrides:
        manifest["overrides"] = list(overrides)
    if seed is not None:
        manifest["seed"] = seed
    return manifest


def _emit_json(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(rows: list[tuple], header: str, out: str | None, manifest: dict):
    body = header + "\n" + "\n".join(
        ",".join(f"{v:.12g}" for v in row) for row in rows) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(body)
        with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(body)


# ---------------------------------------------------------------------------
# Commands

def cmd_validate(args) -> int:
    text = _read_text(args.net)
    try:
        spec = dsl.parse(text)
    except dsl.ParseError as exc:
        print(f"{args.net}: parse error", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE
    violations = validate(spec)
    if violations:
        print(f"{args.net}: {len(violations)} violation(s)", file=sys.stderr)
        for v in violations:
            print("  " + str(v), file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{args.net}: ok ({len(spec.sources)} sources, {len(spec.elements)} "
          f"elements, {len(spec.detectors)} detectors)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec, text = _load_network(args.net, args.override)
    combo = _resolve_combo(spec, args.combo)
    if args.freqs:
        try:
            freqs = dsl.parse_frequency_range(args.freqs)
        except dsl.ParseError as exc:
            raise CliError(f"bad --freqs: {exc}", EXIT_IO)
    elif spec.measurements:
        freqs = spec.measurements[0].freqs
    else:
        raise CliError("no --freqs given and the network has no measure statement",
                       EXIT_IO)
    values = freqs.values()
    if not values:
        raise CliError("frequency range is empty", EXIT_IO)

    net = engine.compile(spec)
    rows = []
    for f in values:
        pt = engine.spectrum(net, combo, 2.0 * math.pi * f)
        rows.append((f, pt.absolute, pt.snl, pt.normalized, pt.db))

    manifest = make_manifest("simulate", path=args.net, text=text,
                             overrides=args.override)
    if args.format == "csv":
        _emit_csv(rows, "f_hz,abs,snl,norm,db", args.out, manifest)
    else:
        payload = {
            "manifest": manifest,
            "combo": {"kind": combo.kind, "detectors": list(combo.detectors)},
            "points": [dict(zip(("f_hz", "abs", "snl", "norm", "db"), row))
                       for row in rows],
        }
        _emit_json(payload, args.out)
    return EXIT_OK


def cmd_scenario(args) -> int:
    overrides = {}
    for item in args.override:
        if "=" not in item:
            raise CliError(f"override must look like key=value: {item!r}", EXIT_IO)
        key, raw = item.split("=", 1)
        overrides[key] = float(raw)
    try:
        cfg = scenario.config_with_overrides(scenario.ExperimentConfig(), overrides)
    except KeyError as exc:
        raise CliError(str(exc), EXIT_IO)

    report = scenario.run_experiment(cfg)
    pair = entanglement.CorrelationPair(v_plus=report.v_plus, v_minus=report.v_minus)
    verdict = entanglement.assess(
        pair, beam_levels=(report.phase.beam1, report.phase.beam2))

    payload = {
        "manifest": make_manifest("scenario", overrides=args.override),
        "config": dataclasses.asdict(cfg),
        "measurement_frequency_hz": report.phase.f_m,
        "detection_loss": report.detection_loss,
        "phase_path_loss": report.phase_path_loss,
        "amplitude_mode": {
            "correlation": report.amplitude.correlation,
            "correlation_db": scenario.variance_to_db(report.amplitude.correlation),
            "anticorrelation": report.amplitude.anticorrelation,
            "beam1": report.amplitude.beam1,
            "beam2": report.amplitude.beam2,
        },
        "phase_mode": {
            "correlation": report.phase.correlation,
            "correlation_db": scenario.variance_to_db(report.phase.correlation),
            "anticorrelation": report.phase.anticorrelation,
            "beam1": report.phase.beam1,
            "beam2": report.phase.beam2,
        },
        "entanglement": verdict.as_json_dict(),
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec, text = _load_network(args.net, args.override)
    combo = _resolve_combo(spec, args.combo)
    try:
        freq = dsl.parse_quantity(args.freq, dsl.FREQ)
    except dsl.ParseError as exc:
        raise CliError(f"bad --freq: {exc}", EXIT_IO)
    seed = _seed_from(args)
    net = engine.compile(spec)

    engine_value = None
    if args.mc_override:
        # evaluate the engine on the uncorrupted network, run MC on the
        # corrupted one: a deliberate-mismatch diagnostic
        engine_value = engine.spectrum(net, combo, 2.0 * math.pi * freq).normalized
        corrupted = apply_overrides(spec, args.mc_override)
        net = engine.compile(corrupted)

    cfg = montecarlo.MCConfig(
        sample_rate=args.sample_rate or 8.0 * freq,
        seed=seed,
        segment_length=args.segment_length,
        segment_count=args.segments,
        window=args.window,
    )
    try:
        result = montecarlo.cross_validate(net, combo, 2.0 * math.pi * freq, cfg,
                                           engine_value=engine_value)
    except montecarlo.MCError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL)

    payload = {
        "manifest": make_manifest("oracle", path=args.net, text=text,
                                  overrides=args.override + args.mc_override,
                                  seed=seed),
        "combo": {"kind": combo.kind, "detectors": list(combo.detectors)},
        "result": result.as_json_dict(),
    }
    _emit_json(payload, args.out)
    return EXIT_OK if result.passed else EXIT_NUMERICAL


def cmd_design(args) -> int:
    if (args.frep is None) == (args.fm is None):
        raise CliError("give exactly one of --frep (with --n) or --fm", EXIT_IO)
    rows = []
    if args.fm is not None:
        f_m = dsl.parse_quantity(args.fm, dsl.FREQ)
        delta_l = mzi.delay_for_frequency(f_m)
        rows.append({"n": None, "f_m_hz": f_m, "delta_l_m": delta_l,
                     "tau_s": delta_l / scenario.SPEED_OF_LIGHT})
    else:
        f_rep = dsl.parse_quantity(args.frep, dsl.FREQ)
        for n in range(1, args.n + 1):
            d = mzi.pulsed_design(f_rep, n)
            rows.append({"n": n, "f_m_hz": d.f_m, "delta_l_m": d.delta_l,
                         "tau_s": d.delta_l / scenario.SPEED_OF_LIGHT})
    payload = {"manifest": make_manifest("design"), "designs": rows}
    _emit_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sideband",
        description="Quantum-noise spectra of passive optical networks at rf "
                    "sideband frequencies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a .net file")
    p.add_argument("net")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="frequency sweep of a photocurrent combo")
    p.add_argument("--net", required=True)
    p.add_argument("--freqs", help="LO:HI:STEP or a single frequency (units ok)")
    p.add_argument("--combo", help="sum | diff | single:K | measure:NAME")
    p.add_argument("--override", action="append", default=[],
                   metavar="NAME.PARAM=VALUE")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="run the twin-beam entanglement preset")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("oracle", help="Monte-Carlo cross-validation of the engine")
    p.add_argument("--net", required=True)
    p.add_argument("--combo")
    p.add_argument("--freq", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--segments", type=int, default=4096)
    p.add_argument("--segment-length", type=int, default=512)
    p.add_argument("--sample-rate", type=float,
                   help="Hz; default 8x the measurement frequency")
    p.add_argument("--window", choices=("hann", "rect"), default="hann")
    p.add_argument("--override", action="append", default=[],
                   metavar="NAME.PARAM=VALUE")
    p.add_argument("--mc-override", action="append", default=[],
                   metavar="NAME.PARAM=VALUE",
                   help="corrupt only the Monte-Carlo network (mismatch test)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("design", help="delay-line designs for pulsed operation")
    p.add_argument("--frep", help="laser repetition rate (units ok)")
    p.add_argument("--n", type=int, default=4,
                   help="list designs for 1..n pulse delays")
    p.add_argument("--fm", help="measurement frequency (units ok)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except engine.StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
