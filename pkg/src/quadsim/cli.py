"""Command-line entry point: run, compare, batch, limits and serve."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import AppConfig, load_config
from .controllers import CONTROLLER_KINDS, DEFAULT_PID_GAINS
from .env import EnvConfig
from .errors import QuadSimError
from .harness import batch, compare, limits_report, run_and_save_episode
from .metrics import AXIS_ANGLE_INDEX
from .server import serve_stdio, serve_tcp


def _load(args) -> AppConfig:
    if args.config is not None:
        app = load_config(args.config)
    else:
        app = AppConfig(env=EnvConfig(), pid_gains=DEFAULT_PID_GAINS)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "dynamics", None) is not None:
        overrides["dynamics_kind"] = args.dynamics
    if getattr(args, "stochastic", False):
        overrides["stochastic"] = True
    if overrides:
        app.env = replace(app.env, **overrides)
    return app


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="YAML config file")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--dynamics", choices=("linear", "nonlinear"), default=None)
    parser.add_argument("--stochastic", action="store_true", help="enable noise injection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one episode and write trajectory + metrics")
    _add_common(p_run)
    p_run.add_argument("--controller", choices=CONTROLLER_KINDS, default="pid")
    p_run.add_argument("--axis", choices=tuple(AXIS_ANGLE_INDEX), default="roll")
    p_run.add_argument("--out", type=Path, required=True, help="output directory")

    p_cmp = sub.add_parser("compare", help="run controllers on one identical step-reference episode")
    _add_common(p_cmp)
    p_cmp.add_argument(
        "--controller",
        action="append",
        choices=CONTROLLER_KINDS,
        default=None,
        help="repeatable; defaults to pid, zero and random",
    )
    p_cmp.add_argument("--axis", choices=tuple(AXIS_ANGLE_INDEX), default="roll")
    p_cmp.add_argument("--step-amplitude", type=float, default=1.0)
    p_cmp.add_argument("--out", type=Path, required=True)

    p_batch = sub.add_parser("batch", help="run many environments across a worker pool")
    _add_common(p_batch)
    p_batch.add_argument("--controller", choices=CONTROLLER_KINDS, default="pid")
    p_batch.add_argument("--episodes", type=int, default=8, help="number of independent environments")
    p_batch.add_argument("--episodes-per-env", type=int, default=1)
    p_batch.add_argument("--workers", type=int, default=1)
    p_batch.add_argument("--out", type=Path, default=None, help="write the JSON report here")

    p_lim = sub.add_parser("limits", help="print derived input and state limits")
    _add_common(p_lim)

    p_srv = sub.add_parser("serve", help="serve environments over the JSON line protocol")
    _add_common(p_srv)
    p_srv.add_argument("--port", type=int, default=5555, help="TCP port (0 picks a free one)")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--stdio", action="store_true", help="speak the protocol on stdin/stdout instead")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        app = _load(args)
        if args.command == "run":
            result = run_and_save_episode(
                app.env, args.controller, args.out, pid_gains=app.pid_gains, axis=args.axis,
                controller_seed=app.env.seed,
            )
            print(json.dumps(result["record"], indent=2))
        elif args.command == "compare":
            specs = args.controller or ["pid", "zero", "random"]
            result = compare(
                app.env, specs, axis=args.axis, step_amplitude=args.step_amplitude,
                out_dir=args.out, pid_gains=app.pid_gains,
            )
            print(result.table.render_text())
            print(f"\nartifacts written to {args.out}")
        elif args.command == "batch":
            report = batch(
                app.env,
                n_envs=args.episodes,
                episodes_per_env=args.episodes_per_env,
                workers=args.workers,
                controller_spec=args.controller,
                pid_gains=app.pid_gains,
                master_seed=app.env.seed if app.env.seed is not None else 0,
            )
            text = json.dumps(report, indent=2)
            if args.out is not None:
                args.out.parent.mkdir(parents=True, exist_ok=True)
                args.out.write_text(text + "\n")
            print(text)
        elif args.command == "limits":
            print(limits_report(app.env))
        elif args.command == "serve":
            if args.stdio:
                print(json.dumps({"event": "stdio"}), file=sys.stderr, flush=True)
                serve_stdio(app.env)
            else:
                server = serve_tcp(args.host, args.port, app.env, announce=lambda line: print(line, flush=True))
                try:
                    server.serve_forever()
                except KeyboardInterrupt:
                    pass
                finally:
                    server.server_close()
    except QuadSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
