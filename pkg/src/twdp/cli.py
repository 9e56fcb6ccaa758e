"""Command-line client.

By default every command parses the config and runs in process; with
--server URL the raw config and overrides are POSTed to a running service
and the response is treated exactly like a local result. Artifacts:

  region    CSV (r1,r2,is_frontier) at --output plus a .json sidecar with
            the achieving policies; full JSON to stdout when --output is
            omitted
  gaussian  JSON report
  simulate  JSON report at --output, optional per-n CSV curve via --curve
  verify    pass/fail line per property, JSON report with --output

Exit codes: 0 success, 1 validation/config error, 2 internal-consistency
error (verify also exits 2 when any property fails).
"""
from __future__ import annotations

import json
import os
import sys

import click

from .config import (
    DiscreteConfig,
    SimulateBundle,
    apply_region_overrides,
    apply_simulate_overrides,
    load_json,
    parse_config_data,
)
from .errors import TwdpError, ValidationError
from .gaussian import GaussianTwcSpec
from .runners import (
    region_csv_lines,
    run_gaussian,
    run_region,
    run_simulate,
    run_verify,
    simulate_csv_lines,
)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _emit(result: dict, output: str | None):
    if output:
        _write_text(output, _json_text(result))
    else:
        click.echo(_json_text(result), nl=False)


def _sidecar_path(output: str) -> str:
    stem, ext = os.path.splitext(output)
    return (stem if ext.lower() == ".csv" else output) + ".json"


class RemoteError(TwdpError):
    """Server-reported failure; carries the exit code the server chose."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _post(server: str, endpoint: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + endpoint
    try:
        response = httpx.post(url, json=payload, timeout=600.0)
    except httpx.HTTPError as exc:
        raise RemoteError(f"request to {url} failed: {exc}", exit_code=2)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "error" in detail:
        raise RemoteError(str(detail["error"]), exit_code=int(detail.get("exit_code", 2)))
    raise RemoteError(f"server returned HTTP {response.status_code}", exit_code=2)


@click.group()
@click.version_option(package_name="twdp")
def cli():
    """Two-way channel with state: regions, dirty-paper checks, simulations."""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="discrete channel config (JSON)")
@click.option("--output", "output_path", default=None, type=click.Path(), help="CSV path; a .json sidecar is written next to it")
@click.option("--grid-step", type=float, default=None, help="simplex quantization step in (0, 0.5]")
@click.option("--aux-size", type=int, multiple=True, help="auxiliary alphabet size; pass twice for per-user sizes")
@click.option("--max-pairs", type=int, default=None, help="enumeration budget cap")
@click.option("--convexify", is_flag=True, default=False, help="also report the time-sharing hull")
@click.option("--server", default=None, help="base URL of a running service; runs remotely when set")
def region(input_path, output_path, grid_step, aux_size, max_pairs, convexify, server):
    """Enumerate the achievable rate region of a discrete channel."""
    raw = load_json(input_path)
    if server:
        payload = {"config": raw, "convexify": convexify}
        if grid_step is not None:
            payload["grid_step"] = grid_step
        if aux_size:
            payload["aux_size"] = list(aux_size)
        if max_pairs is not None:
            payload["max_pairs"] = max_pairs
        result = _post(server, "/region", payload)
    else:
        parsed = parse_config_data(raw)
        if not isinstance(parsed, DiscreteConfig):
            raise ValidationError("region requires a config with kind 'discrete'")
        parsed = apply_region_overrides(parsed, grid_step=grid_step,
                                        aux_size=aux_size, max_pairs=max_pairs)
        result = run_region(parsed, convexify_flag=convexify)
    if output_path:
        _write_text(output_path, "\n".join(region_csv_lines(result)) + "\n")
        sidecar = {key: result[key] for key in
                   ("command", "grid_step", "aux_sizes", "frontier", "config_echo")}
        if "convex_hull" in result:
            sidecar["convex_hull"] = result["convex_hull"]
        _write_text(_sidecar_path(output_path), _json_text(sidecar))
        click.echo(f"wrote {result['num_points']} points to {output_path}")
    else:
        click.echo(_json_text(result), nl=False)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="gaussian spec config (JSON)")
@click.option("--output", "output_path", default=None, type=click.Path(), help="JSON report path")
@click.option("--server", default=None, help="base URL of a running service")
def gaussian(input_path, output_path, server):
    """Evaluate dirty-paper coefficients, rates, and capacity corners."""
    raw = load_json(input_path)
    if server:
        result = _post(server, "/gaussian", {"config": raw})
    else:
        parsed = parse_config_data(raw)
        if not isinstance(parsed, GaussianTwcSpec):
            raise ValidationError("gaussian requires a config with kind 'gaussian'")
        result = run_gaussian(parsed)
    _emit(result, output_path)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="simulate bundle config (JSON)")
@click.option("--output", "output_path", default=None, type=click.Path(), help="JSON report path")
@click.option("--curve", "curve_path", default=None, type=click.Path(), help="optional per-n CSV curve path")
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--bin-rate1", type=float, default=None)
@click.option("--bin-rate2", type=float, default=None)
@click.option("--server", default=None, help="base URL of a running service")
def simulate(input_path, output_path, curve_path, seed, trials, epsilon,
             bin_rate1, bin_rate2, server):
    """Monte Carlo error probabilities of the binning scheme."""
    raw = load_json(input_path)
    if server:
        payload = {"config": raw}
        for key, value in (("seed", seed), ("trials", trials), ("epsilon", epsilon),
                           ("bin_rate1", bin_rate1), ("bin_rate2", bin_rate2)):
            if value is not None:
                payload[key] = value
        result = _post(server, "/simulate", payload)
    else:
        parsed = parse_config_data(raw)
        if not isinstance(parsed, SimulateBundle):
            raise ValidationError("simulate requires a config with kind 'simulate'")
        parsed = apply_simulate_overrides(parsed, seed=seed, trials=trials, epsilon=epsilon,
                                          bin_rate1=bin_rate1, bin_rate2=bin_rate2)
        result = run_simulate(parsed)
    if curve_path:
        _write_text(curve_path, "\n".join(simulate_csv_lines(result)) + "\n")
    _emit(result, output_path)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="any config kind (JSON)")
@click.option("--output", "output_path", default=None, type=click.Path(), help="JSON report path")
@click.option("--server", default=None, help="base URL of a running service")
@click.pass_context
def verify(ctx, input_path, output_path, server):
    """Run the invariant suite for the config's kind; exit 2 on any failure."""
    raw = load_json(input_path)
    if server:
        result = _post(server, "/verify", {"config": raw})
    else:
        result = run_verify(parse_config_data(raw))
    for prop in result["properties"]:
        status = "PASS" if prop["passed"] else "FAIL"
        click.echo(f"{status} {prop['name']}: {prop['detail']}")
    if output_path:
        _write_text(output_path, _json_text(result))
    if not result["all_passed"]:
        ctx.exit(2)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("twdp.service:app", host=host, port=port)


def main(argv=None) -> int:
    try:
        # non-standalone click returns ctx.exit codes instead of raising
        code = cli.main(args=argv, standalone_mode=False)
        if isinstance(code, int) and code != 0:
            sys.exit(code)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except RemoteError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except TwdpError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
