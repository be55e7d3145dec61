"""Command-line front end.

    gaugefrac --mode verify-bbm-1d --function '{"kind": "tent", "dim": 1}' --p 1
    gaugefrac --config runs/ball_p2.json --out results/ball_p2.json

Exit status: 0 on success or a passing verdict, 2 when a verdict is not a
pass (or any sweep entry fails), 1 on malformed input.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from gaugefrac.experiment import (
    EXIT_ERROR,
    FORMATS,
    MODES,
    OUT_DIR_ENV,
    SWEEP_FIELDS,
    ConfigError,
    ExperimentConfig,
    default_out_path,
    execute,
    parse_config_text,
    render,
    rows_to_csv,
    sweep,
    write_atomic,
)


def _json_option(text, name):
    if text is None:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--{name}: column {exc.colno}: {exc.msg}") from None


def _parse_s_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--s-list must be comma-separated reals, got {text!r}") from None


def _apply_overrides(config: ExperimentConfig, opts: dict) -> ExperimentConfig:
    for key in ("mode", "p", "s", "method", "out", "format"):
        if opts.get(key) is not None:
            setattr(config, key, opts[key])
    if opts.get("s_list") is not None:
        config.s_list = _parse_s_list(opts["s_list"])
    for key in ("body", "function"):
        value = _json_option(opts.get(key), key)
        if value is not None:
            setattr(config, key, value)
    if opts.get("seed") is not None:
        config.quadrature = {**config.quadrature, "seed": opts["seed"]}
    config.__post_init__()
    return config


def _summary(record: dict) -> str:
    mode, res = record["mode"], record["result"]
    lines = [f"{mode}  config {record['config_digest']}  seed {record['seed']}"]
    if mode == "body-info":
        lines.append(f"  kind      {res['body']['kind']} (n={res['body']['dim']})")
        lines.append(f"  volume    {res['volume']:.12g}")
        for x, g in res["gauge"].items():
            lines.append(f"  gauge   {x:<18} {g:.12g}   support {res['support'][x]:.12g}")
        m = res["moment_norm_e1"]
        lines.append(f"  moment norm (p={m['p']:g}) at e1  {m['value']:.10g} +- {m['std_error']:.2g}")
    elif mode == "seminorm":
        lines.append(f"  s={res['s']:g} p={res['p']:g} method={res['method']}")
        lines.append(f"  value     {res['value']:.12g} +- {res['std_error']:.3g}")
    else:
        lines.append(f"  {'s':>8} {'scaled value':>18} {'std error':>11}")
        for s, v, e in res["samples"]:
            lines.append(f"  {s:>8.5g} {v:>18.12g} {e:>11.3g}")
        lines.append(f"  fitted limit {res['fitted_limit']:.10g} ({res['model']}, residual {res['fit_residual']:.3g})")
        lines.append(f"  target       {res['target']:.10g}")
        lines.append(f"  rel error    {res['rel_error']:.3g} (tolerance {res['tolerance']:g})")
        lines.append(f"  verdict      {res['verdict']}")
    return "\n".join(lines)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config: one object, or an array for a sweep.")
@click.option("--mode", type=click.Choice(MODES), help="Experiment kind (overrides the config).")
@click.option("--body", help="Body descriptor as JSON, e.g. '{\"kind\": \"box\", \"dim\": 2, \"parameters\": {\"half_widths\": [1, 1]}}'.")
@click.option("--function", help="Function descriptor as JSON, e.g. '{\"kind\": \"tent\", \"dim\": 1}'.")
@click.option("--p", type=float, help="Integrability exponent p >= 1.")
@click.option("--s", type=float, help="Fractional order for mode seminorm.")
@click.option("--s-list", help="Comma-separated s ladder for the verify modes.")
@click.option("--method", type=click.Choice(["direct", "bp", "one_d"]), help="Seminorm route.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="RNG seed for Monte Carlo moment integrals.")
@click.option("--out", type=click.Path(dir_okay=False), help=f"Output file (default: ${OUT_DIR_ENV}/<mode>-<digest>.<fmt> if set).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Output format.")
@click.option("--jobs", type=click.IntRange(1), default=1, show_default=True, help="Worker processes for sweeps.")
@click.option("--quiet", is_flag=True, help="Suppress the summary table.")
def main(config_path, mode, body, function, p, s, s_list, method, seed, out, fmt, jobs, quiet):
    """Compute anisotropic fractional seminorms and verify their limits."""
    opts = dict(mode=mode, body=body, function=function, p=p, s=s, s_list=s_list, method=method, seed=seed, out=out, format=fmt)
    try:
        if config_path:
            try:
                text = Path(config_path).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read {config_path}: {exc.strerror}") from None
            parsed = parse_config_text(text, config_path)
        else:
            if mode is None:
                raise ConfigError("either --config or --mode is required")
            parsed = ExperimentConfig(mode=mode)
        if isinstance(parsed, list):
            configs = [_apply_overrides(c, {**opts, "out": None}) for c in parsed]
            code, rows = sweep(configs, jobs)
            text = rows_to_csv(rows, SWEEP_FIELDS)
            if out:
                write_atomic(out, text)
            if not quiet or not out:
                click.echo(text, nl=False)
            sys.exit(code)
        config = _apply_overrides(parsed, opts)
        code, record = execute(config)
    except (ConfigError, ValueError, ArithmeticError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    target = default_out_path(config, config.format)
    if target is not None:
        write_atomic(target, render(record, config.format))
    if not quiet:
        click.echo(_summary(record))
        if target is not None:
            click.echo(f"wrote {target}")
    if target is None and quiet:
        click.echo(render(record, config.format), nl=False)
    sys.exit(code)


if __name__ == "__main__":
    main()
