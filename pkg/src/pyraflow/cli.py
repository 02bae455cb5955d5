"""Command-line front end.

Subcommands: schedule, verify-renoise, train-toy2d, train-image, sample,
tokens, mask, plot. Options resolve as: built-in default, then the matching
key in the --config file section named after the subcommand, then the
explicit flag. Exit codes: 0 success, 1 validation failure (including
usage), 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from pathlib import Path

import numpy as np

from . import accounting, model, renoise, sampler, svgplot, temporal
from .errors import ArgumentError, NumericalError, PyraflowError, ValidationError
from .grid import LatentGrid, stream_rng, write_grid
from .schedule import GAMMA_DEFAULT, build_schedule


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise _UsageError(f"{self.format_usage()}error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ArgumentError(f"expected comma-separated integers, got {text!r}")


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ArgumentError(f"expected a boolean, got {text!r}")


# Per-subcommand option tables: name -> (type, default, help). Config file
# sections use the same names with underscores.
_OPTIONS = {
    "schedule": {
        "stages": (int, 3, "number of pyramid stages"),
        "gamma": (float, GAMMA_DEFAULT, "within-block correlation of the corrective noise"),
    },
    "verify-renoise": {
        "gamma": (float, GAMMA_DEFAULT, "within-block correlation to verify"),
        "s": (float, 2.0 / 3.0, "next-stage start time of the verified jump"),
        "samples": (int, 1_000_000, "Monte Carlo sample count"),
    },
    "train-toy2d": {
        "steps": (int, 5000, "optimizer steps"),
        "batch-size": (int, 256, "examples per step"),
        "learning-rate": (float, 1e-3, "Adam learning rate"),
        "beta1": (float, 0.9, "Adam beta1"),
        "beta2": (float, 0.95, "Adam beta2"),
        "eps": (float, 1e-6, "Adam epsilon"),
        "coupling-mode": (str, "ours", "endpoint noise coupling: ours or random"),
        "datapoints": (int, 3, "number of target points (1 or 3)"),
        "traj-count": (int, 64, "trajectories written to the CSV"),
    },
    "train-image": {
        "steps": (int, 20000, "optimizer step cap"),
        "batch-size": (int, 32, "images per step"),
        "learning-rate": (float, 2e-3, "Adam learning rate"),
        "beta1": (float, 0.9, "Adam beta1"),
        "beta2": (float, 0.95, "Adam beta2"),
        "eps": (float, 1e-6, "Adam epsilon"),
        "stages": (int, 3, "pyramid stages (1 = full-resolution baseline)"),
        "pixel-budget": (int, 8_000_000, "stop once this many pixel evaluations are consumed"),
    },
    "sample": {
        "model": (str, None, "checkpoint file (required)"),
        "steps": (_int_list, None, "integration steps per stage, coarsest first"),
        "guidance": (float, 1.0, "classifier-free guidance scale"),
        "no-renoise": (_bool, False, "disable corrective renoising at jumps"),
        "height": (int, 16, "output grid height (image models)"),
        "width": (int, 16, "output grid width (image models)"),
        "gamma": (float, GAMMA_DEFAULT, "schedule gamma"),
    },
    "tokens": {
        "frames": (int, 241, "video frames"),
        "height": (int, 768, "frame height in pixels"),
        "width": (int, 1280, "frame width in pixels"),
        "vae-spatial": (int, 8, "spatial compression of the autoencoder"),
        "vae-temporal": (int, 8, "temporal compression of the autoencoder"),
        "patch": (int, 2, "transformer patch size"),
        "stages": (int, 3, "pyramid stages"),
        "divisors": (_int_list, None, "explicit history divisors, oldest first"),
    },
    "mask": {
        "frames": (int, 3, "number of frames"),
        "tokens-per-frame": (_int_list, None, "tokens per frame (default: 4 each)"),
    },
    "plot": {
        "input": (str, None, "trajectory CSV (required)"),
        "output": (str, None, "output SVG path (default: <out-dir>/trajectories.svg)"),
    },
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="pyraflow", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name, opts in _OPTIONS.items():
        p = sub.add_parser(name, add_help=True)
        p.add_argument("--seed", type=int, default=None, help="global random seed")
        p.add_argument("--out-dir", type=str, default=None, help="directory for output files")
        p.add_argument("--config", type=str, default=None, help="key=value config file")
        for opt, (typ, _default, help_text) in opts.items():
            p.add_argument(f"--{opt}", type=typ, default=None, help=help_text, dest=opt.replace("-", "_"))
    return parser


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge builtin defaults, config file section, and explicit flags."""
    opts = _OPTIONS[command]
    resolved = {name: default for name, (_, default, _) in opts.items()}
    resolved["seed"] = 0
    resolved["out_dir"] = "out"
    if args.config is not None:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise ArgumentError(f"config file not found: {args.config}")
        if cp.has_section(command):
            for key, value in cp.items(command):
                key_norm = key.replace("_", "-")
                if key_norm == "seed":
                    resolved["seed"] = int(value)
                elif key_norm == "out-dir":
                    resolved["out_dir"] = value
                elif key_norm in opts:
                    resolved[key_norm] = opts[key_norm][0](value)
                else:
                    raise ArgumentError(f"unknown config key {key!r} in section [{command}]")
    if args.seed is not None:
        resolved["seed"] = args.seed
    if args.out_dir is not None:
        resolved["out_dir"] = args.out_dir
    for opt in opts:
        cli_value = getattr(args, opt.replace("-", "_"))
        if cli_value is not None:
            resolved[opt] = cli_value
    return {k.replace("-", "_"): v for k, v in resolved.items()}


def _out_dir(resolved: dict) -> Path:
    out = Path(resolved["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt4(x: float) -> str:
    return str(round(x, 4))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_schedule(o: dict) -> int:
    sched = build_schedule(o["stages"], o["gamma"])
    print("k,divisor,s,e")
    for k in range(sched.num_stages):
        st = sched.stage(k)
        print(f"{k},{st.divisor},{_fmt4(st.s)},{_fmt4(st.e)}")
    return 0


def _cmd_verify_renoise(o: dict) -> int:
    moments = renoise.noise_block_moments(o["gamma"], o["samples"], o["seed"])
    x1 = LatentGrid(stream_rng(o["seed"], 99).standard_normal((8, 8, 1)))
    jm = renoise.jump_moment_check(x1, k=1, s=o["s"], gamma=o["gamma"], n_samples=o["samples"], seed=o["seed"] + 1)
    print("metric,value")
    print(f"noise_diag,{moments.diag_mean!r}")
    print(f"noise_offdiag,{moments.offdiag_mean!r}")
    print(f"max_block_sum,{moments.max_abs_block_sum!r}")
    print(f"jump_mean_err,{jm.max_mean_err!r}")
    print(f"jump_var_err,{jm.max_var_err!r}")
    ok = moments.ok(o["gamma"], tol=0.01) and jm.ok(tol=0.005)
    print("PASS" if ok else "FAIL")
    if not ok:
        raise NumericalError("renoising moments outside tolerances")
    return 0


def _cmd_train_toy2d(o: dict) -> int:
    out = _out_dir(o)
    cfg = model.TrainConfig(
        task="toy2d",
        batch_size=o["batch_size"],
        learning_rate=o["learning_rate"],
        beta1=o["beta1"],
        beta2=o["beta2"],
        eps=o["eps"],
        steps=o["steps"],
        seed=o["seed"],
        coupling_mode=o["coupling_mode"],
        datapoints=o["datapoints"],
    )
    field, metrics = model.train_toy2d(cfg)
    _write_csv(
        out / "toy2d_metrics.csv",
        ["step", "loss"],
        [(i, repr(v)) for i, v in enumerate(metrics["losses"])],
    )
    model.save_checkpoint(field, out / "toy2d_model.pyrm")
    _write_csv(
        out / "toy2d_trajectories.csv",
        ["traj", "step", "t", "stage", "x0", "x1"],
        _toy_trajectory_rows(metrics["trajectories"], o["traj_count"]),
    )
    print("metric,value")
    print(f"straightness,{metrics['straightness']!r}")
    print(f"mean_nearest_target_distance,{metrics['mean_nearest_target_distance']!r}")
    return 0


def _toy_trajectory_rows(traj: dict, limit: int):
    windows = traj["windows"]
    times = traj["times"]
    n = min(limit, windows[0].shape[0])
    rows = []
    for i in range(n):
        step = 0
        for w_ix, (states, ts) in enumerate(zip(windows, times)):
            stage = len(windows) - 1 - w_ix
            for p in range(states.shape[1]):
                rows.append((i, step, repr(float(ts[p])), stage, repr(float(states[i, p, 0])), repr(float(states[i, p, 1]))))
                step += 1
    return rows


def _cmd_train_image(o: dict) -> int:
    out = _out_dir(o)
    cfg = model.TrainConfig(
        task="tinyimage",
        batch_size=o["batch_size"],
        learning_rate=o["learning_rate"],
        beta1=o["beta1"],
        beta2=o["beta2"],
        eps=o["eps"],
        steps=o["steps"],
        seed=o["seed"],
        stages=o["stages"],
        pixel_budget=o["pixel_budget"],
    )
    field, metrics = model.train_tinyimage(cfg)
    _write_csv(
        out / "tinyimage_metrics.csv",
        ["step", "loss"],
        [(i, repr(v)) for i, v in enumerate(metrics["losses"])],
    )
    model.save_checkpoint(field, out / "tinyimage_model.pyrm")
    print("metric,value")
    print(f"steps_run,{metrics['steps_run']}")
    print(f"pixel_evals,{metrics['pixel_evals']}")
    print(f"energy_distance,{metrics['energy_distance']!r}")
    return 0


def _cmd_sample(o: dict) -> int:
    if o["model"] is None:
        raise ArgumentError("--model is required")
    out = _out_dir(o)
    field = model.load_checkpoint(o["model"])
    if isinstance(field, model.PointField):
        return _sample_point(o, out, field)
    return _sample_image(o, out, field)


def _sample_point(o: dict, out: Path, field) -> int:
    sched = build_schedule(2, o["gamma"])
    steps = o["steps"][0] if o["steps"] else 16
    traj = model.sample_toy_trajectories(field, sched, n_traj=1, steps_per_window=steps, seed=o["seed"])
    rows = _toy_trajectory_rows(traj, 1)
    _write_csv(out / "sample_trajectory.csv", ["traj", "step", "t", "stage", "x0", "x1"], rows)
    write_grid(LatentGrid(traj["final"][0].reshape(1, 1, 2)), out / "sample_grid.pyrg")
    print(f"final,{traj['final'][0, 0]!r},{traj['final'][0, 1]!r}")
    return 0


def _sample_image(o: dict, out: Path, field) -> int:
    K = field.net.n_stages
    sched = build_schedule(K, o["gamma"])
    steps = o["steps"] if o["steps"] else [16] * K
    cfg = sampler.SamplerConfig(
        steps_per_stage=tuple(steps),
        guidance_scale=o["guidance"],
        seed=o["seed"],
        renoise_enabled=not o["no_renoise"],
    )
    grid, trajectory = sampler.sample(field, sched, cfg, (o["height"], o["width"], 1))
    rows = []
    for step, (t, stage, state) in enumerate(trajectory.points):
        d = state.data
        rows.append(
            (
                step,
                repr(float(t)),
                stage,
                repr(float(d.mean())),
                repr(float(d.std())),
                repr(float(d.min())),
                repr(float(d.max())),
            )
        )
    _write_csv(out / "sample_trajectory.csv", ["step", "t", "stage", "mean", "std", "min", "max"], rows)
    write_grid(grid, out / "sample_grid.pyrg")
    print(f"grid,{out / 'sample_grid.pyrg'}")
    return 0


def _cmd_tokens(o: dict) -> int:
    spec = accounting.VideoSpec(
        frames=o["frames"],
        height=o["height"],
        width=o["width"],
        vae_spatial=o["vae_spatial"],
        vae_temporal=o["vae_temporal"],
        patch=o["patch"],
    )
    report = accounting.cost_report(spec, o["stages"], o["divisors"])
    print("tokens_full,tokens_pyramid,cost_ratio,correction_vs_ideal")
    print(
        f"{report.tokens_full},{report.tokens_pyramid},"
        f"{report.cost_ratio!r},{report.correction_vs_ideal!r}"
    )
    return 0


def _cmd_mask(o: dict) -> int:
    tokens = o["tokens_per_frame"] if o["tokens_per_frame"] else [4] * o["frames"]
    mask = temporal.causal_mask(o["frames"], tokens)
    print(",".join(str(f) for f in mask.frame_of_token))
    for row in mask.allowed.astype(int):
        print(",".join(str(v) for v in row))
    return 0


def _cmd_plot(o: dict) -> int:
    if o["input"] is None:
        raise ArgumentError("--input is required")
    out = _out_dir(o)
    target = Path(o["output"]) if o["output"] else out / "trajectories.svg"
    with open(o["input"], newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ArgumentError(f"{o['input']}: empty file")
        cols = {name: i for i, name in enumerate(header)}
        state_cols = [name for name in header if name.startswith("x")]
        if not state_cols and "mean" in cols:
            raise ArgumentError("trajectory CSV carries summary stats, not 2-d states")
        if len(state_cols) != 2:
            raise ArgumentError(f"plot supports exactly 2-d states, found {len(state_cols)} state columns")
        grouped: dict[str, list] = {}
        for row in reader:
            key = row[cols["traj"]] if "traj" in cols else "0"
            grouped.setdefault(key, []).append(
                (
                    float(row[cols["t"]]),
                    int(row[cols["stage"]]),
                    float(row[cols[state_cols[0]]]),
                    float(row[cols[state_cols[1]]]),
                )
            )
    svg = svgplot.trajectories_svg(list(grouped.values()))
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(svg)
    print(f"svg,{target}")
    return 0


_COMMANDS = {
    "schedule": _cmd_schedule,
    "verify-renoise": _cmd_verify_renoise,
    "train-toy2d": _cmd_train_toy2d,
    "train-image": _cmd_train_image,
    "sample": _cmd_sample,
    "tokens": _cmd_tokens,
    "mask": _cmd_mask,
    "plot": _cmd_plot,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            print(parser.format_usage(), file=sys.stderr)
            return 1
        resolved = _resolve(args, args.command)
        return _COMMANDS[args.command](resolved)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PyraflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
