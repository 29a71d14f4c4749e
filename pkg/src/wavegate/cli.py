"""Command-line front end.

The CLI is a thin client of the service layer: every subcommand builds the
same request models the HTTP endpoints accept and either calls the handlers
in process (default) or POSTs them to a running server (``--server URL``).
Artifacts arrive as {path: text} bundles and are written under ``--out``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, service
from .config import NOISE_MODES, load_config
from .errors import ConfigError, DataFormatError, GridError
from .storage import (
    parse_distribution_csv,
    parse_reconstruction_csv,
    write_bundle,
)

_POST_PATHS = {
    "simulate": "/simulate",
    "reconstruct": "/reconstruct",
    "fit_sinc": "/fit/sinc-width",
    "fit_phase": "/fit/phase-gradient",
    "fidelity": "/fidelity",
}


def _call(server: str | None, kind: str, payload, scenario: str | None = None):
    """Dispatch a request model in process or over HTTP."""
    if server is None:
        if kind == "simulate":
            return service.handle_simulate(payload).model_dump()
        if kind == "reconstruct":
            return service.handle_reconstruct(payload).model_dump()
        if kind == "fit_sinc":
            return service.handle_fit_sinc(payload)
        if kind == "fit_phase":
            return service.handle_fit_phase(payload)
        if kind == "fidelity":
            return service.handle_fidelity(payload)
        if kind == "scenario":
            return service.handle_scenario_run(scenario, payload).model_dump()
        raise ConfigError(f"unknown request kind {kind!r}")

    import httpx

    path = f"/scenarios/{scenario}/run" if kind == "scenario" else _POST_PATHS[kind]
    response = httpx.post(server.rstrip("/") + path, json=payload.model_dump(), timeout=600.0)
    if response.status_code != 200:
        raise DataFormatError(f"server returned {response.status_code}: {response.text}")
    return response.json()


def _load_params(path: str | None, allowed) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    return load_config(path, allowed=allowed)


def _cmd_simulate(args) -> int:
    req = service.SimulateRequest(
        params=_load_params(args.config, allowed=service.RUN_KEYS),
        noise_mode=args.noise,
        seed=args.seed,
    )
    out = _call(args.server, "simulate", req)
    written = write_bundle(out["files"], args.out)
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _cmd_reconstruct(args) -> int:
    files = {}
    for name in sorted(os.listdir(args.indir)):
        if name.startswith(("counts_", "probability_")) and name.endswith(".csv"):
            with open(os.path.join(args.indir, name), "r", encoding="utf-8") as fh:
                files[name] = fh.read()
    if not files:
        raise DataFormatError(f"no counts_*.csv or probability_*.csv files in {args.indir}")
    req = service.ReconstructRequest(
        files=files,
        filter_width_radps=args.filter_width,
        filter_center_radps=args.filter_center,
        mask_threshold=args.threshold,
    )
    out = _call(args.server, "reconstruct", req)
    write_bundle(out["files"], args.out)
    print(json.dumps(out["metadata"], sort_keys=True))
    return 0


def _read_reconstruction(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_reconstruction_csv(fh.read(), path)


def _cmd_fit(args) -> int:
    t, amps, _, _, valid = _read_reconstruction(args.infile)
    t, amps = t[valid], amps[valid]
    if args.kind == "sinc":
        req = service.SincFitRequest(t_ps=t.tolist(), magnitude=np.abs(amps).tolist())
        report = _call(args.server, "fit_sinc", req)
    else:
        req = service.PhaseFitRequest(
            t_ps=t.tolist(),
            re=amps.real.tolist(),
            im=amps.imag.tolist(),
            window=(args.window[0], args.window[1]),
        )
        report = _call(args.server, "fit_phase", req)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_fidelity(args) -> int:
    dists = []
    for path in (args.p, args.q):
        with open(path, "r", encoding="utf-8") as fh:
            x, values = parse_distribution_csv(fh.read(), path)
        dists.append(service.Distribution(x=x.tolist(), values=values.tolist()))
    req = service.FidelityRequest(p=dists[0], q=dists[1], domain=args.domain)
    report = _call(args.server, "fidelity", req)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_scenario(args) -> int:
    overrides = _load_params(args.config, allowed=service.RUN_KEYS)
    req = service.ScenarioRunRequest(noise_mode=args.noise, seed=args.seed, overrides=overrides)
    out = _call(args.server, "scenario", req, scenario=args.name)
    written = write_bundle(out["files"], args.out)
    print(f"scenario {args.name}: wrote {len(written)} files to {args.out}")
    return 0


def _cmd_list_scenarios(args) -> int:
    for entry in service.list_scenarios():
        print(f"{entry['name']}: {entry['description']}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(service.app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavegate",
        description="Simulate and reconstruct gate-scanned direct measurements "
        "of ultrafast temporal wavefunctions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, server=True):
        if server:
            p.add_argument("--server", default=None, help="base URL of a running service")

    p = sub.add_parser("simulate", help="run the apparatus and write delay-scan CSVs")
    p.add_argument("--config", default=None, help="key = value run configuration file")
    p.add_argument("--noise", choices=NOISE_MODES, default="noiseless")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="out", help="output directory")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct the envelope from four scan CSVs")
    p.add_argument("--in", dest="indir", required=True, help="directory with the four CSVs")
    p.add_argument("--out", default="out")
    p.add_argument("--filter-width", type=float, default=1.08, help="filter width, rad/ps")
    p.add_argument("--filter-center", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=0.05, help="sinc mask threshold")
    common(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("fit", help="fit a reconstruction (sinc magnitude or phase gradient)")
    p.add_argument("--in", dest="infile", required=True, help="reconstruction_time CSV")
    p.add_argument("--kind", choices=("sinc", "phase"), default="sinc")
    p.add_argument("--window", type=float, nargs=2, default=(3.75, 5.75), metavar=("T0", "T1"))
    p.add_argument("--out", default=None, help="write the fit report JSON here")
    common(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("fidelity", help="classical fidelity between two distribution CSVs")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--domain", default="time")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=_cmd_fidelity)

    p = sub.add_parser("scenario", help="run a registered scenario")
    p.add_argument("name")
    p.add_argument("--noise", choices=NOISE_MODES, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="parameter overrides file")
    p.add_argument("--out", default="out")
    common(p)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("list-scenarios", help="list registered scenarios")
    p.set_defaults(func=_cmd_list_scenarios)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
