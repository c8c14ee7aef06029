"""Command-line pipeline: deltas, fit, threshold, sessionize, simulate, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
VALLEYFINDER_SEED overrides the fit seed when --seed is absent. All outputs
are flat JSON/JSONL files; identical inputs, flags and seed produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import em
from .errors import DataError, NumericalError, ValleyfinderError
from .histogram import build_histogram
from .ingest import (
    EPOCH_SECONDS,
    ColumnMap,
    FilterSpec,
    apply_filters,
    compute_deltas,
    detect_spikes,
    load_samples,
    parse_events,
    save_samples,
    write_events_csv,
    write_events_jsonl,
)
from .serde import (
    dump_json,
    fit_config_from_dict,
    fit_config_to_dict,
    fit_from_dict,
    fit_to_dict,
    histogram_from_dict,
    histogram_to_dict,
    load_json,
    session_to_dict,
    threshold_result_to_dict,
    write_jsonl,
)
from .sessions import session_summary, sessionize
from .synth import SynthSpec, generate_event_log
from .threshold import crossover_threshold, davies_bouldin, find_valley
from .types import FitConfig

SEED_ENV = "VALLEYFINDER_SEED"
DEFAULT_THRESHOLD_S = 3600  # the one-hour rule of thumb
DEFAULT_BIN_WIDTH = 0.25

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one pipeline run needs, as exported by the inspector UI."""

    input_path: str
    input_format: str  # csv | tsv | jsonl | samples
    columns: ColumnMap | None
    filters: FilterSpec
    fit_configs: tuple[FitConfig, ...]
    threshold_s: int | None
    out_dir: str
    bin_width_log2: float = DEFAULT_BIN_WIDTH

    def __post_init__(self):
        if not self.input_path or not self.out_dir:
            raise ValueError("input path and out_dir must be non-empty")
        if not self.fit_configs:
            raise ValueError("at least one FitConfig is required")
        if self.input_format not in ("csv", "tsv", "jsonl", "samples"):
            raise ValueError(f"unknown input format {self.input_format!r}")

    def to_dict(self) -> dict:
        return {
            "input": {
                "path": self.input_path,
                "format": self.input_format,
                "columns": self.columns.to_dict() if self.columns else None,
            },
            "filters": self.filters.to_dict(),
            "fit_configs": [fit_config_to_dict(c) for c in self.fit_configs],
            "threshold_s": self.threshold_s,
            "out_dir": self.out_dir,
            "bin_width_log2": self.bin_width_log2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        columns = d["input"].get("columns")
        return cls(
            input_path=d["input"]["path"],
            input_format=d["input"]["format"],
            columns=ColumnMap.from_dict(columns) if columns else None,
            filters=FilterSpec.from_dict(d.get("filters") or {}),
            fit_configs=tuple(fit_config_from_dict(c) for c in d["fit_configs"]),
            threshold_s=d.get("threshold_s"),
            out_dir=d["out_dir"],
            bin_width_log2=d.get("bin_width_log2", DEFAULT_BIN_WIDTH),
        )


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise DataError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return 0


def _column_map(args) -> ColumnMap:
    if args.ip_col or args.ua_col:
        if not (args.ip_col and args.ua_col):
            raise DataError("--ip-col and --ua-col must be used together")
        return ColumnMap(
            timestamp_field=args.ts_col,
            timestamp_format=args.ts_format,
            ip_field=args.ip_col,
            user_agent_field=args.ua_col,
            accept_language_field=args.lang_col,
        )
    return ColumnMap(user_field=args.user_col, timestamp_field=args.ts_col, timestamp_format=args.ts_format)


def _filter_spec(args) -> FilterSpec:
    return FilterSpec(
        min_delta_s=args.min_delta,
        exclude_exact_deltas=frozenset(args.exclude_delta or ()),
        exclude_users=frozenset(args.exclude_user or ()),
        max_events_per_user=args.max_events_per_user,
    )


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_input_samples(path, fmt: str, columns: ColumnMap | None):
    if fmt == "samples":
        return load_samples(path)
    if columns is None:
        raise DataError("event input needs a column map")
    parsed = parse_events(path, fmt, columns)
    return compute_deltas(parsed.events)


# -- subcommands ---------------------------------------------------------


def cmd_deltas(args) -> int:
    columns = _column_map(args)
    spec = _filter_spec(args)
    out = _out_dir(args.out)

    parsed = parse_events(args.input, args.format, columns)
    samples = compute_deltas(parsed.events)
    result = apply_filters(samples, spec)
    save_samples(out / "samples.jsonl", result.samples)

    spikes = detect_spikes(result.samples, window_s=args.spike_window) if result.samples else []
    dump_json(out / "spikes.json", [r.to_dict() for r in spikes])
    dump_json(
        out / "filter_report.json",
        {
            "n_records": parsed.n_records,
            "n_malformed": parsed.n_malformed,
            "n_events": len(parsed.events),
            "n_samples_extracted": len(samples),
            "n_samples_kept": len(result.samples),
            "removed": result.removed,
            "filters": spec.to_dict(),
        },
    )
    print(f"wrote {len(result.samples)} samples, {len(spikes)} spike report(s) to {out}")
    return EXIT_OK


def _fit_one(xs: np.ndarray, config: FitConfig) -> dict:
    fit = em.label_components(em.em_fit(xs, config))
    try:
        dbi = davies_bouldin(xs, fit).to_dict()
    except ValleyfinderError:
        dbi = None
    return {"k": config.k, "fit": fit_to_dict(fit), "bic": em.bic(fit), "dbi": dbi, "error": None}


def cmd_fit(args) -> int:
    if args.config:
        config = PipelineConfig.from_dict(load_json(args.config))
        samples = _load_input_samples(config.input_path, config.input_format, config.columns)
        filters = config.filters
        fit_configs = config.fit_configs
        bin_width = config.bin_width_log2
        out = _out_dir(args.out or config.out_dir)
    else:
        if not args.input:
            raise DataError("either --input or --config is required")
        if not args.out:
            raise DataError("--out is required when fitting from --input")
        samples = load_samples(args.input)
        filters = _filter_spec(args)
        seed = _resolve_seed(args.seed)
        ks = args.k or [2]
        fit_configs = tuple(
            FitConfig(
                k=k,
                seed=seed,
                restarts=args.restarts,
                max_iter=args.max_iter,
                rel_tol=args.rel_tol,
                sigma_floor=args.sigma_floor,
                init_strategy=args.init_strategy,
            )
            for k in ks
        )
        bin_width = args.bin_width
        out = _out_dir(args.out)

    filtered = apply_filters(samples, filters)
    xs = np.array([s.log2_delta for s in filtered.samples], dtype=np.float64)
    dump_json(out / "histogram.json", histogram_to_dict(build_histogram(xs, bin_width)))

    results = []
    errors: list[ValleyfinderError] = []
    for config in fit_configs:
        try:
            entry = _fit_one(xs, config)
        except ValleyfinderError as exc:
            print(f"k={config.k}: {exc}", file=sys.stderr)
            errors.append(exc)
            results.append({"k": config.k, "fit": None, "bic": None, "dbi": None, "error": str(exc)})
            continue
        dump_json(out / f"fit_k{config.k}.json", entry["fit"])
        results.append(entry)

    dump_json(
        out / "fits.json",
        {
            "n_samples": int(xs.size),
            "bin_width_log2": bin_width,
            "filters": filters.to_dict(),
            "configs": [fit_config_to_dict(c) for c in fit_configs],
            "results": results,
        },
    )
    if len(errors) == len(fit_configs):
        raise errors[0]  # nothing succeeded; surface the first failure
    print(f"wrote {len(fit_configs) - len(errors)} fit(s) to {out}")
    return EXIT_OK


def cmd_threshold(args) -> int:
    fits_doc = load_json(args.fits)
    entry = next((r for r in fits_doc["results"] if r["k"] == args.k), None)
    if entry is None:
        raise DataError(f"no fit for k={args.k} in {args.fits}")
    if entry.get("error"):
        raise DataError(f"fit for k={args.k} failed: {entry['error']}")
    fit = fit_from_dict(entry["fit"])

    result = crossover_threshold(fit)
    out = _out_dir(args.out)
    dump_json(out / "threshold.json", threshold_result_to_dict(result))

    hist_path = Path(args.histogram) if args.histogram else Path(args.fits).parent / "histogram.json"
    if not hist_path.is_file():
        raise DataError(f"no histogram at {hist_path}; pass --histogram")
    valley = find_valley(histogram_from_dict(load_json(hist_path)))
    dump_json(out / "valley.json", valley.to_dict())

    if abs(result.threshold_min - 60.0) / 60.0 > 1.0:
        print(
            f"warning: threshold {result.threshold_min:.1f} min is far from the one-hour rule of thumb; "
            "inspect the histogram before trusting it",
            file=sys.stderr,
        )
    print(f"threshold: {result.threshold_min:.2f} min ({result.threshold_s:.0f} s), valley found={valley.found}")
    return EXIT_OK


def cmd_sessionize(args) -> int:
    columns = _column_map(args)
    parsed = parse_events(args.input, args.format, columns)
    sessions = sessionize(parsed.events, args.threshold_s)
    out = _out_dir(args.out)
    write_jsonl(out / "sessions.jsonl", (session_to_dict(s) for s in sessions))
    dump_json(out / "session_summary.json", session_summary(sessions).to_dict())
    print(f"wrote {len(sessions)} sessions to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        spec = SynthSpec.from_dict(load_json(args.spec))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"bad synth spec {args.spec}: {exc}") from exc
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    events = generate_event_log(spec)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "jsonl":
        write_events_jsonl(out, events)
    else:
        write_events_csv(out, events)
    print(f"wrote {len(events)} events for {spec.n_users} user(s) to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    overrides = {}
    if args.restarts is not None:
        overrides["restarts"] = args.restarts
    server = serve(args.addr, args.workdir, ui_dir=args.ui_dir, fit_overrides=overrides)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (workdir {args.workdir})", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# -- wiring ---------------------------------------------------------------


def _add_input_flags(p: _Parser) -> None:
    p.add_argument("--input", required=True, help="event log file")
    p.add_argument("--format", choices=("csv", "tsv", "jsonl"), default="csv")
    p.add_argument("--user-col", default="user_id", help="column holding the user identifier")
    p.add_argument("--ts-col", default="timestamp_s", help="column holding the timestamp")
    p.add_argument("--ts-format", choices=(EPOCH_SECONDS, "iso8601"), default=EPOCH_SECONDS)
    p.add_argument("--ip-col", help="fingerprint: IP address column (with --ua-col)")
    p.add_argument("--ua-col", help="fingerprint: user-agent column")
    p.add_argument("--lang-col", help="fingerprint: accept-language column")


def _add_filter_flags(p: _Parser) -> None:
    p.add_argument("--min-delta", type=int, default=0, help="drop gaps shorter than this many seconds")
    p.add_argument("--exclude-delta", type=int, action="append", help="drop gaps of exactly this many seconds")
    p.add_argument("--exclude-user", action="append", help="drop all samples of this user")
    p.add_argument("--max-events-per-user", type=int, help="drop users with more events than this")


def build_parser() -> _Parser:
    parser = _Parser(prog="valleyfinder", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("deltas", help="extract per-user inter-activity samples from an event log")
    _add_input_flags(p)
    _add_filter_flags(p)
    p.add_argument("--spike-window", type=int, default=60, help="neighborhood half-width for spike detection")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_deltas)

    p = sub.add_parser("fit", help="fit Gaussian mixtures to extracted samples")
    p.add_argument("--input", help="samples JSONL from `deltas`")
    p.add_argument("--config", help="PipelineConfig JSON (as exported by the inspector UI)")
    _add_filter_flags(p)
    p.add_argument("--k", type=int, action="append", help="component count to try (repeatable; default 2)")
    p.add_argument("--seed", type=int, help=f"restart seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--sigma-floor", type=float, default=1e-3)
    p.add_argument("--init-strategy", choices=("quantile", "random"), default="quantile")
    p.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH, help="histogram bin width in log2 seconds")
    p.add_argument("--out", help="output directory (required unless --config provides one)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("threshold", help="derive the inactivity threshold from a chosen fit")
    p.add_argument("--fits", required=True, help="fits.json from `fit`")
    p.add_argument("--k", type=int, required=True, help="which fitted k to use")
    p.add_argument("--histogram", help="histogram JSON for the valley check (default: next to fits.json)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sessionize", help="split an event log into sessions")
    _add_input_flags(p)
    p.add_argument("--threshold-s", type=int, default=DEFAULT_THRESHOLD_S, help="inactivity threshold in seconds")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sessionize)

    p = sub.add_parser("simulate", help="generate a synthetic event log from a mixture spec")
    p.add_argument("--spec", required=True, help="SynthSpec JSON")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", required=True, help="output event file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the local inspector service")
    p.add_argument("--addr", default="127.0.0.1:8046", help="host:port to bind")
    p.add_argument("--workdir", required=True, help="directory containing samples.jsonl; fits are written here")
    p.add_argument("--ui-dir", help="static UI bundle to host (default: <workdir>/ui if present)")
    p.add_argument("--restarts", type=int, help="override EM restarts for interactive fits")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValleyfinderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
