"""``loopqec`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 infeasible model.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli

from . import __version__
from .ftcost import Code, LogicalOp, distillation_scheme, full_ft_savings, logical_op_cycles, msd_spacetime, two_sig
from .hardware import max_k_no_buffer, preset, solve_scheme
from .pipeline import (
    GapSchedule,
    InfeasibleModelError,
    PipelineSpec,
    constant_gap_time,
    des_simulate,
    loop_capacity,
    steady_flow_time,
    steady_loop_flow_time,
)
from .schedules import colour_cycle, surface_cycle

RESULTS_SCHEMA = 1
SILICON_ROWS = {"edsr": [(1, 1), (5, 1), (5, 2), (10, 1), (10, 3)], "esr": [(1, 1), (5, 1), (10, 1)]}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunManifest:
    command: list
    config_digest: str
    seed: int | None
    version: str = __version__
    git_revision: str | None = None
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "version": self.version,
            "git_revision": self.git_revision,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        }


def _git_revision() -> str | None:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, cwd=Path(__file__).parent, timeout=5
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return out.stdout.strip() or None


def _num(x) -> float | int:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else float(x)


def _us(x) -> float:
    return round(float(Fraction(x) / 1000), 6)


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(ctx, name: str, payload, rows: list[dict] | None = None):
    """Print results and, with ``--out``, write them to files."""
    fmt = ctx.args.format
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
        ext = "csv"
    else:
        text = json.dumps({"schema": RESULTS_SCHEMA, **payload}, indent=2, sort_keys=True) + "\n"
        ext = "json"
    if ctx.args.out:
        out = Path(ctx.args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{name}.{ext}"
        path.write_text(text, encoding="utf-8")
        ctx.manifest.outputs.append(str(path))
    sys.stdout.write(text)


@dataclass
class _Ctx:
    args: argparse.Namespace
    manifest: RunManifest


# Pipelines


def _load_spec(args) -> PipelineSpec:
    if args.spec:
        return PipelineSpec.from_json(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    if args.durations:
        return PipelineSpec.linear(args.durations.split(","))
    raise UsageError("give --spec FILE or --durations a,b,c")


def _gap_schedule(spec, args) -> tuple[GapSchedule, object]:
    if args.gap is not None:
        g = Fraction(args.gap)
        return GapSchedule.constant_gap(spec, g), constant_gap_time(spec, args.k, g)
    if args.loop_flow:
        return GapSchedule.steady_loop_flow(spec), steady_loop_flow_time(spec, args.k)
    return GapSchedule.steady_flow(spec), steady_flow_time(spec, args.k)


def cmd_pipe_time(ctx):
    args = ctx.args
    spec = _load_spec(args)
    sched, analytic = _gap_schedule(spec, args)
    des = des_simulate(spec, args.k, sched)
    payload = {
        "k": args.k,
        "T_circ": _num(analytic.T_circ),
        "tau_max": _num(analytic.tau_max),
        "T_eff": _num(analytic.T_eff),
        "T_pipe": _num(analytic.T_pipe),
        "des_completion": _num(des.completion_time),
        "agree": des.completion_time == analytic.T_pipe,
        "collision": None if des.collision is None else des.collision.kind,
    }
    _emit(ctx, "pipe_time", payload, [payload])


def cmd_pipe_collide(ctx):
    args = ctx.args
    spec = _load_spec(args)
    T_loop = spec.loop_min_time()
    if T_loop is None:
        raise UsageError("pipeline has no loop rounds to check")
    g = Fraction(args.gap) if args.gap is not None else None
    sched, _ = _gap_schedule(spec, args)
    gap = g if g is not None else max(sched.links)
    K = loop_capacity(T_loop, gap)
    des = des_simulate(spec, args.k, sched)
    payload = {
        "k": args.k,
        "T_loop_min": _num(T_loop),
        "tau_gap": _num(gap),
        "K_loop": K,
        "fits": args.k <= K,
        "collision": None
        if des.collision is None
        else {"kind": des.collision.kind, "time": _num(des.collision.time), "step": des.collision.step},
    }
    _emit(ctx, "pipe_collide", payload, [{k: v for k, v in payload.items() if k != "collision"}])


# Code cycles and schemes


def cmd_code_cycle(ctx):
    args = ctx.args
    hw = preset(args.preset, args.devices)
    model = surface_cycle(hw) if args.code == "surface" else colour_cycle(hw, args.doubled_ancilla)
    payload = {
        "preset": args.preset,
        "code": args.code,
        "T_circ_data_us": _us(model.T_circ_data),
        "T_circ_anc_us": _us(model.T_circ_anc),
        "T_cycle_us": _us(model.T_cycle),
        "T_loop_min_us": _us(model.T_loop_min),
        "K_loop": model.K_loop,
        "tau_gap_us": _us(model.tau_gap),
    }
    if args.format == "text":
        print(f"T_cycle {payload['T_cycle_us']:g} us  (data {payload['T_circ_data_us']:g} us, "
              f"ancilla {payload['T_circ_anc_us']:g} us, K_loop {model.K_loop})")
        return
    _emit(ctx, "code_cycle", payload, [payload])


def _scheme_row(name, k, m):
    hw = preset(name, m)
    sol = solve_scheme(hw, k)
    return {
        "preset": name,
        "k": k,
        "m": m,
        "gap_us": _us(sol.tau_gap),
        "T_cycle_us": _us(sol.T_cycle),
        "regime": sol.regime.value,
    }, sol


def cmd_scheme_solve(ctx):
    args = ctx.args
    row, _ = _scheme_row(args.preset, args.k, args.m)
    row["max_k_no_buffer"] = max_k_no_buffer(preset(args.preset, 1))
    if args.format == "text":
        print(f"gap {row['gap_us']:g} us  T_cycle {row['T_cycle_us']:g} us  ({row['regime']})")
        return
    _emit(ctx, "scheme_solve", row, [row])


def cmd_msd_table(ctx):
    args = ctx.args
    rows = []
    for k in (1, 5, 10):
        # Colour-code rows assume equal cycle times across schemes.
        s = distillation_scheme(Code.COLOUR, k)
        rep = msd_spacetime(Code.COLOUR, k, 1, 1, 1)
        rows.append(_msd_row(Code.COLOUR, k, None, s, None, rep))
    base = solve_scheme(preset(args.preset, 1), 1).T_cycle
    for k, m in SILICON_ROWS[args.preset]:
        sol = solve_scheme(preset(args.preset, m), k)
        rep = msd_spacetime(Code.SURFACE, k, 1, sol.T_cycle, base)
        rows.append(_msd_row(Code.SURFACE, k, m, distillation_scheme(Code.SURFACE, k), sol, rep))
    if args.format == "text":
        for r in rows:
            timing = "equal T_cycle" if r["m"] is None else f"m={r['m']} gap {r['gap_us']:g} us T_cycle {r['T_cycle_ns'] / 1000:g} us"
            print(f"{r['code']:8s} k={r['k']:<3d} A={r['A']:<3d} D={r['D_coefficient']}d  overhead {r['A'] * r['D_coefficient']}d*T  "
                  f"{timing}  time x{r['time_rounded']}  space-time x{r['spacetime_rounded']}")
        return
    _emit(ctx, "msd_table", {"preset": args.preset, "rows": rows}, rows)


def _msd_row(code, k, m, scheme, sol, rep):
    return {
        "code": code.value,
        "k": k,
        "m": m,
        "A": scheme.A,
        "D_coefficient": scheme.cycles(1),
        "gap_us": None if sol is None else _us(sol.tau_gap),
        "T_cycle_ns": None if sol is None else _num(sol.T_cycle),
        "time_factor": float(rep.time_factor),
        "spacetime_factor": float(rep.spacetime_factor),
        "time_rounded": two_sig(rep.time_factor),
        "spacetime_rounded": two_sig(rep.spacetime_factor),
    }


def cmd_ft_table(ctx):
    rows = []
    for k in ctx.args.k:
        for st in full_ft_savings(k):
            rows.append({"k": k, "stage": st.stage, "space": st.space_text, "time": st.time_text})
    if ctx.args.format == "text":
        for r in rows:
            print(f"k={r['k']:<3d} {r['stage']:18s} space {r['space']:>6s}  time {r['time']}")
        return
    _emit(ctx, "ft_table", {"rows": rows}, rows)


def cmd_ft_ops(ctx):
    d = ctx.args.d
    rows = [
        {"op": op.value, "surface": logical_op_cycles(Code.SURFACE, op, d), "colour": logical_op_cycles(Code.COLOUR, op, d)}
        for op in LogicalOp
    ]
    if ctx.args.format == "text":
        print(f"code cycles at d={d}")
        for r in rows:
            print(f"{r['op']:18s} surface {r['surface']:>4d}  colour {r['colour']:>4d}")
        return
    _emit(ctx, "ft_ops", {"d": d, "rows": rows}, rows)


# Thresholds


def _noise(args):
    from .threshold.noise import NoiseModel

    return NoiseModel(args.p, args.p_sh, args.p_leak, args.p_rash, args.meas)


def cmd_threshold_run(ctx):
    from .threshold.sampler import logical_error_rate

    args = ctx.args
    noise = _noise(args)
    points = []
    for d in args.distances:
        r = logical_error_rate(d, noise, args.shots, ctx.manifest.seed, cycles=args.cycles, threads=args.threads)
        points.append(r.to_json())
    rows = [{"d": p["d"], "shots": p["shots"], "failures": p["failures"], "rate": p["rate"], "stderr": p["stderr"]}
            for p in points]
    meta = {"rounds": "d noisy cycles plus a noiseless readout" if args.cycles is None else args.cycles,
            "failure": "either logical sector"}
    _emit(ctx, "threshold_run", {"noise": noise.to_json(), "points": points, "meta": meta}, rows)


def cmd_threshold_sweep(ctx):
    from .threshold.sweep import SweepConfig, ThresholdError, find_threshold, run_sweep

    args = ctx.args
    doc = tomli.loads(Path(args.config).read_text(encoding="utf-8"))
    sweep = dict(doc.get("sweep", doc))
    if args.shots:
        sweep["shots"] = args.shots
    if args.distances:
        sweep["distances"] = args.distances
    sweep["seed"] = ctx.manifest.seed
    cfg = SweepConfig.from_mapping(sweep)
    res = run_sweep(cfg, threads=args.threads)
    try:
        est = find_threshold(res, seed=cfg.seed).to_json()
    except ThresholdError as e:
        est = {"error": str(e)}
    payload = {"config": {**sweep, "values": cfg.values}, "points": [r.to_json() for r in res.points], "threshold": est}
    rows = res.to_rows()
    if args.out:
        # Both artefacts are always written: JSON summary and the CSV curve.
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        (out / "threshold_sweep.csv").write_text(buf.getvalue(), encoding="utf-8")
        ctx.manifest.outputs.append(str(out / "threshold_sweep.csv"))
    _emit(ctx, "threshold_sweep", payload, rows)


# Error mitigation


def cmd_qem_run(ctx):
    import numpy as np

    from . import qem

    doc = json.loads(Path(ctx.args.config).read_text(encoding="utf-8"))
    N, M = int(doc["N"]), int(doc["M"])
    O = qem.PauliObservable(doc["O"], int(doc.get("phase", 1)))
    if "amplitudes" in doc:
        psi = np.array([complex(a) if not isinstance(a, list) else complex(*a) for a in doc["amplitudes"]])
    else:
        fixture = doc.get("fixture", "ghz")
        psi = np.zeros(1 << N, dtype=complex)
        if fixture == "ghz":
            psi[0] = psi[-1] = 1
        elif fixture == "plus":
            psi[:] = 1
        elif fixture == "zero":
            psi[0] = 1
        else:
            raise UsageError(f"unknown fixture {fixture!r}")
    eps = float(doc.get("eps", 0.0))
    noise = doc.get("noise", "depolarize")
    rho = qem.depolarized(psi, eps) if noise == "depolarize" else qem.dephased(psi, eps)
    stack = qem.CopyStack(N, M)
    ht = qem.hadamard_test(stack, rho, O, doc.get("shots"), ctx.manifest.seed or 0, doc.get("ancillas", "ghz"))
    payload = {
        "N": N,
        "M": M,
        "O": O.word,
        "eps": eps,
        "ideal": float(np.real(np.vdot(psi / np.linalg.norm(psi), O.matrix() @ (psi / np.linalg.norm(psi))))),
        "raw": qem.purified_expectation(rho, O, 1),
        "purified": qem.purified_expectation(rho, O, M),
        "permutation_numerator": qem.permutation_expectation(stack, rho, O),
        "hadamard_test": ht.value,
        "hadamard_stderr": ht.stderr,
        "purity": rho.purity(M),
    }
    _emit(ctx, "qem_run", payload, [payload])


def cmd_plot(ctx):
    from .svgplot import line_chart, read_curves

    args = ctx.args
    curves = read_curves(args.csv, args.x, args.y, args.group)
    svg = line_chart(curves, args.x, args.y, args.title or "", logy=args.logy)
    target = Path(args.svg)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(svg, encoding="utf-8")
    ctx.manifest.outputs.append(str(target))
    print(target)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for result files and the run manifest")
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--seed", type=int, help="master seed (default: fresh OS entropy, recorded)")
    common.add_argument("--config", help="TOML (threshold) or JSON (qem) config file")

    p = _Parser(prog="loopqec", description="Looped-pipeline timing, resources, thresholds and QEM checks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    pipe = sub.add_parser("pipe", help="pipeline timing").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, fn in (("time", cmd_pipe_time), ("collide", cmd_pipe_collide)):
        q = pipe.add_parser(name, parents=[common])
        q.add_argument("--spec", help="pipeline JSON")
        q.add_argument("--durations", help="comma-separated step durations (ns) of a linear pipeline")
        q.add_argument("-k", type=int, default=1)
        q.add_argument("--gap", help="constant stream gap (ns)")
        q.add_argument("--loop-flow", action="store_true", help="gap set by the slowest on-loop station")
        q.set_defaults(fn=fn)

    code = sub.add_parser("code").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = code.add_parser("cycle", parents=[common])
    q.add_argument("--preset", choices=["edsr", "esr"], default="edsr")
    q.add_argument("--code", choices=["surface", "colour"], default="surface")
    q.add_argument("--devices", type=int, help="measurement devices per ancilla loop")
    q.add_argument("--doubled-ancilla", action="store_true")
    q.set_defaults(fn=cmd_code_cycle, format="text")

    scheme = sub.add_parser("scheme").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = scheme.add_parser("solve", parents=[common])
    q.add_argument("--preset", choices=["edsr", "esr"], default="edsr")
    q.add_argument("-k", type=int, required=True)
    q.add_argument("-m", type=int, default=1)
    q.set_defaults(fn=cmd_scheme_solve, format="text")

    msd = sub.add_parser("msd").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = msd.add_parser("table", parents=[common])
    q.add_argument("--preset", choices=["edsr", "esr"], default="edsr")
    q.add_argument("-d", type=int, default=1, help="code distance (cancels in the ratios)")
    q.set_defaults(fn=cmd_msd_table, format="text")

    ft = sub.add_parser("ft").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = ft.add_parser("table", parents=[common])
    q.add_argument("-k", type=_ints, default=[1, 5, 10])
    q.set_defaults(fn=cmd_ft_table, format="text")
    q = ft.add_parser("ops", parents=[common])
    q.add_argument("-d", type=int, default=1, help="code distance")
    q.set_defaults(fn=cmd_ft_ops, format="text")

    thr = sub.add_parser("threshold").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = thr.add_parser("run", parents=[common])
    q.add_argument("--distances", type=_ints, default=[3, 5, 7])
    q.add_argument("--shots", type=int, default=10_000)
    q.add_argument("--threads", type=int, default=1)
    q.add_argument("--cycles", type=int)
    q.add_argument("--p", type=float, default=0.0)
    q.add_argument("--p-sh", type=float, default=0.0)
    q.add_argument("--p-leak", type=float, default=0.0)
    q.add_argument("--p-rash", type=float, default=0.0)
    q.add_argument("--meas", choices=["depolarize", "flip"], default="depolarize")
    q.set_defaults(fn=cmd_threshold_run)
    q = thr.add_parser("sweep", parents=[common])
    q.add_argument("--distances", type=_ints)
    q.add_argument("--shots", type=int)
    q.add_argument("--threads", type=int, default=1)
    q.set_defaults(fn=cmd_threshold_sweep)

    qem = sub.add_parser("qem").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = qem.add_parser("run", parents=[common])
    q.set_defaults(fn=cmd_qem_run)

    q = sub.add_parser("plot", parents=[common], help="CSV curves to an SVG line chart")
    q.add_argument("csv")
    q.add_argument("svg")
    q.add_argument("--x", required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--group")
    q.add_argument("--title")
    q.add_argument("--logy", action="store_true")
    q.set_defaults(fn=cmd_plot)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.fn in (cmd_threshold_sweep, cmd_qem_run) and not args.config:
            raise UsageError("--config is required")
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little")
    config_bytes = Path(args.config).read_bytes() if getattr(args, "config", None) else b""
    digest = hashlib.sha256(config_bytes + json.dumps(argv).encode()).hexdigest()
    manifest = RunManifest(argv, digest, seed, git_revision=_git_revision())
    ctx = _Ctx(args, manifest)
    t0 = time.perf_counter()
    try:
        args.fn(ctx)
        code = 0
    except UsageError as e:
        print(e, file=sys.stderr)
        code = 1
    except (InfeasibleModelError, OSError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = 2 if isinstance(e, InfeasibleModelError) else 1
    manifest.wall_time_s = time.perf_counter() - t0
    text = json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
