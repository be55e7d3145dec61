"""Experiment configs, dispatch to the numerical modules, and result files.

A config is a JSON object (one experiment) or a JSON array (a sweep). Every
result record carries the tool version, the config digest and the seed, and
nothing time-dependent, so rerunning a stored config reproduces it byte for
byte.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gaugefrac.bodies import ConvexBody, lp_moment_norm_error
from gaugefrac.functions import TestFunction
from gaugefrac.limits import (
    BBM_LADDER,
    MODELS,
    MS_LADDER,
    verify_bbm_1d,
    verify_bbm_limit,
    verify_ms_1d,
    verify_ms_limit,
)
from gaugefrac.quadrature import QuadratureSpec, digest
from gaugefrac.seminorm import METHODS, seminorm

TOOL = "gaugefrac"
MODES = ("seminorm", "verify-bbm", "verify-ms", "verify-bbm-1d", "verify-ms-1d", "body-info")
FORMATS = ("json", "csv")
CSV_FIELDS = (
    "mode", "s", "p", "n", "body_digest", "fn_digest",
    "value", "scaled_value", "std_error", "target", "rel_error", "verdict",
)
SWEEP_FIELDS = ("config_digest",) + CSV_FIELDS + ("error",)
OUT_DIR_ENV = "GAUGEFRAC_OUT_DIR"

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(ValueError):
    """A config that cannot be parsed or violates a precondition."""


def _version() -> str:
    from gaugefrac import __version__

    return __version__


@dataclass
class ExperimentConfig:
    mode: str
    body: dict | None = None
    function: dict | None = None
    p: float = 1.0
    s: float | None = None
    s_list: list | None = None
    method: str = "direct"
    model: str = "quadratic_in_gap"
    tolerance: float | None = None
    quadrature: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.s_list is not None:
            self.s_list = [float(v) for v in self.s_list]
        if self.s is not None:
            self.s = float(self.s)
        self.p = float(self.p)
        self.quadrature = dict(self.quadrature or {})

    # parsing ---------------------------------------------------------------

    @classmethod
    def from_dict(cls, data) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError(f"an experiment must be a JSON object, got {type(data).__name__}")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        if "mode" not in data:
            raise ConfigError("field 'mode' is required")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad field value: {exc}") from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def digest(self) -> str:
        # the output location does not change the experiment
        return digest({k: v for k, v in self.to_dict().items() if k not in ("out", "format")})

    # validation --------------------------------------------------------------

    def spec(self) -> QuadratureSpec:
        try:
            return QuadratureSpec.from_dict(self.quadrature)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"quadrature: {exc}") from None

    def make_body(self) -> ConvexBody:
        if self.body is None:
            raise ConfigError(f"mode {self.mode} requires field 'body'")
        try:
            return ConvexBody.from_dict(self.body)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"body: {exc}") from None

    def make_function(self) -> TestFunction:
        if self.function is None:
            raise ConfigError(f"mode {self.mode} requires field 'function'")
        try:
            return TestFunction.from_dict(self.function)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"function: {exc}") from None

    def ladder(self) -> list[float]:
        if self.s_list is not None:
            return self.s_list
        return list(BBM_LADDER if self.mode.startswith("verify-bbm") else MS_LADDER)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be json or csv; got {self.format!r}")
        if not (math.isfinite(self.p) and self.p >= 1):
            raise ConfigError("p must be a real >= 1")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {tuple(MODELS)}")
        for s in ([self.s] if self.s is not None else []) + (self.s_list or []):
            if not 0.0 < s < 1.0:
                raise ConfigError("s must lie in (0,1)")
        self.spec()
        if self.mode == "seminorm":
            if self.s is None:
                raise ConfigError("mode seminorm requires field 's'")
            self.make_body()
            self.make_function()
        elif self.mode in ("verify-bbm", "verify-ms"):
            self.make_body()
            self.make_function()
        elif self.mode in ("verify-bbm-1d", "verify-ms-1d"):
            if self.make_function().dim != 1:
                raise ConfigError(f"mode {self.mode} needs a one-dimensional function")
        else:
            self.make_body()
        if self.mode.startswith("verify") and len(self.ladder()) < 3:
            raise ConfigError("at least 3 values of s are needed to extrapolate")


def parse_config_text(text: str, source: str = "<config>"):
    """Parse config text into one ExperimentConfig or a list of them (a sweep)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(data, list):
        if not data:
            raise ConfigError(f"{source}: a sweep needs at least one experiment")
        out = []
        for i, item in enumerate(data):
            try:
                out.append(ExperimentConfig.from_dict(item))
            except ConfigError as exc:
                raise ConfigError(f"{source}: entry {i}: {exc}") from None
        return out
    try:
        return ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def dump_config(config) -> str:
    if isinstance(config, list):
        return json.dumps([c.to_dict() for c in config], indent=2, sort_keys=True)
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


# running ---------------------------------------------------------------------


def _row(mode, **kw) -> dict:
    row = dict.fromkeys(CSV_FIELDS, "")
    row["mode"] = mode
    row.update({k: v for k, v in kw.items() if v is not None})
    return row


def _report_rows(config, report, n, body_digest, fn_digest) -> list[dict]:
    rows = []
    for s, scaled, err in report.samples:
        factor = 1.0 - s if report.mode == "bbm" else s
        rows.append(
            _row(
                config.mode, s=s, p=config.p, n=n, body_digest=body_digest, fn_digest=fn_digest,
                value=scaled / factor, scaled_value=scaled, std_error=err,
                target=report.target, rel_error=report.rel_error, verdict=report.verdict,
            )
        )
    return rows


def _body_info(body: ConvexBody, p: float, spec: QuadratureSpec) -> dict:
    n = body.dim
    probes = [np.eye(n)[i] for i in range(n)] + [np.ones(n)]
    norm, err = lp_moment_norm_error(body, np.eye(n)[0], p, spec)
    return {
        "body": body.to_dict(),
        "volume": body.volume(),
        "gauge": {json.dumps(list(map(float, x))): float(body.gauge(x)) for x in probes},
        "support": {json.dumps(list(map(float, x))): float(body.support(x)) for x in probes},
        "moment_norm_e1": {"p": p, "value": norm, "std_error": err},
    }


def execute(config: ExperimentConfig) -> tuple[int, dict]:
    """Run one validated config; returns (exit code, result record)."""
    config.validate()
    spec = config.spec()
    record = {
        "tool": TOOL,
        "version": _version(),
        "config": config.to_dict(),
        "config_digest": config.digest,
        "seed": spec.seed,
        "spec_digest": spec.digest,
        "mode": config.mode,
    }
    code = EXIT_OK
    mode = config.mode
    if mode == "body-info":
        body = config.make_body()
        record["body_digest"] = body.digest
        record["result"] = _body_info(body, config.p, spec)
        record["rows"] = [_row(mode, p=config.p, n=body.dim, body_digest=body.digest, value=record["result"]["volume"])]
    elif mode == "seminorm":
        body, f = config.make_body(), config.make_function()
        if body.dim != f.dim:
            raise ConfigError(f"body dimension {body.dim} differs from function dimension {f.dim}")
        est = seminorm(f, body, config.s, config.p, spec, config.method)
        record.update(body_digest=body.digest, fn_digest=f.digest, result=est.to_dict())
        record["rows"] = [
            _row(mode, s=est.s, p=est.p, n=f.dim, body_digest=body.digest, fn_digest=f.digest,
                 value=est.value, scaled_value=est.value, std_error=est.std_error)
        ]
    else:
        f = config.make_function()
        kw = {"spec": spec, "model": config.model}
        if config.tolerance is not None:
            kw["tol"] = config.tolerance
        if mode in ("verify-bbm-1d", "verify-ms-1d"):
            fn = verify_bbm_1d if mode == "verify-bbm-1d" else verify_ms_1d
            report = fn(f, config.p, config.ladder(), **kw)
            body_digest = ""
        else:
            body = config.make_body()
            if body.dim != f.dim:
                raise ConfigError(f"body dimension {body.dim} differs from function dimension {f.dim}")
            fn = verify_bbm_limit if mode == "verify-bbm" else verify_ms_limit
            report = fn(f, body, config.p, config.ladder(), **kw)
            body_digest = body.digest
        record.update(body_digest=body_digest, fn_digest=f.digest, result=report.to_dict())
        record["rows"] = _report_rows(config, report, f.dim, body_digest, f.digest)
        if report.verdict != "pass":
            code = EXIT_FAIL
    return code, record


def render(record, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2, sort_keys=True) + "\n"
    return rows_to_csv(record["rows"], CSV_FIELDS)


def rows_to_csv(rows, fields) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k, "")) for k in fields})
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def write_atomic(path, text: str) -> Path:
    """Write via a temp file in the target directory and rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def default_out_path(config: ExperimentConfig, fmt: str) -> Path | None:
    if config.out:
        return Path(config.out)
    root = os.environ.get(OUT_DIR_ENV)
    if not root:
        return None
    return Path(root) / f"{config.mode}-{config.digest}.{fmt}"


# sweeps -------------------------------------------------------------------------


def _sweep_entry(config: ExperimentConfig) -> tuple[int, list[dict]]:
    try:
        code, record = execute(config)
    except (ValueError, ArithmeticError) as exc:
        row = dict.fromkeys(SWEEP_FIELDS, "")
        row.update(config_digest=config.digest, mode=config.mode, error=str(exc))
        return EXIT_ERROR, [row]
    rows = [{"config_digest": config.digest, **r, "error": ""} for r in record["rows"]]
    return code, rows


def sweep(configs, jobs: int = 1) -> tuple[int, list[dict]]:
    """Run every config; rows come back in input order, failures recorded per row.

    The exit code is 2 if any entry errored or failed its verdict.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("a sweep needs at least one experiment")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_entry, configs))
    else:
        results = [_sweep_entry(c) for c in configs]
    rows = [row for _, entry in results for row in entry]
    code = EXIT_OK if all(c == EXIT_OK for c, _ in results) else EXIT_FAIL
    return code, rows
