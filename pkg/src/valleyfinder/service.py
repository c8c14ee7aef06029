"""Local HTTP/JSON service backing the fit inspector UI.

Single dataset, single process, unauthenticated: an analyst's tool. Reads
serve concurrently; fit computations deduplicate in-flight work per parameter
set and answer 409 for a duplicate request while one is running. Every fit is
also persisted to <workdir>/fits/<fit_id>.json in the canonical byte form the
CLI writes, so UI-accepted fits can be compared byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import em
from .errors import DataError, NumericalError, ValleyfinderError
from .histogram import build_histogram
from .ingest import FilterSpec, apply_filters, detect_spikes, load_samples
from .serde import (
    dumps_canonical,
    fit_config_to_dict,
    fit_from_dict,
    fit_to_dict,
    histogram_to_dict,
    threshold_result_to_dict,
)
from .threshold import crossover_threshold, davies_bouldin, find_valley
from .types import FitConfig

CURVE_POINTS = 512
DEFAULT_BIN_WIDTH = 0.25


class InspectorState:
    """Mutable server state: the loaded samples, active filters, finished fits."""

    def __init__(self, samples, workdir, ui_dir=None, fit_overrides: dict | None = None, fit_fn=None):
        self.base_samples = tuple(samples)
        self.workdir = Path(workdir)
        self.samples_path = self.workdir / "samples.jsonl"
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.fit_overrides = dict(fit_overrides or {})
        self.fit_fn = fit_fn if fit_fn is not None else em.em_fit
        self.filter_spec = FilterSpec()
        self._fits: dict[str, dict] = {}
        self._inflight: set[str] = set()
        self._lock = threading.Lock()
        self._filter_cache: tuple[FilterSpec, tuple, dict] | None = None

    def filtered(self) -> tuple[tuple, dict]:
        """Current samples under the active FilterSpec, plus removal counts."""
        with self._lock:
            spec = self.filter_spec
            if self._filter_cache is not None and self._filter_cache[0] == spec:
                return self._filter_cache[1], self._filter_cache[2]
        result = apply_filters(self.base_samples, spec)
        with self._lock:
            self._filter_cache = (spec, result.samples, result.removed)
        return result.samples, result.removed

    def xs(self) -> np.ndarray:
        samples, _ = self.filtered()
        return np.array([s.log2_delta for s in samples], dtype=np.float64)

    def get_fit(self, fit_id: str) -> dict | None:
        with self._lock:
            return self._fits.get(fit_id)

    def run_fit(self, k: int, seed: int, filters: FilterSpec | None):
        """Compute (or reuse) the fit for one parameter set; None means 409."""
        if filters is not None:
            with self._lock:
                self.filter_spec = filters
        with self._lock:
            spec = self.filter_spec
        fit_id = _fit_id(k, seed, spec)
        with self._lock:
            if fit_id in self._fits:
                return fit_id, self._fits[fit_id]
            if fit_id in self._inflight:
                return fit_id, None
            self._inflight.add(fit_id)
        try:
            entry = self._compute_fit(fit_id, k, seed, spec)
            with self._lock:
                self._fits[fit_id] = entry
            return fit_id, entry
        finally:
            with self._lock:
                self._inflight.discard(fit_id)

    def _compute_fit(self, fit_id: str, k: int, seed: int, spec: FilterSpec) -> dict:
        xs = self.xs()
        config = FitConfig(k=k, seed=seed, **self.fit_overrides)
        fit = em.label_components(self.fit_fn(xs, config))
        grid = np.linspace(xs.min(), xs.max(), CURVE_POINTS)
        curves = {
            "x": [float(v) for v in grid],
            "components": [
                [float(v) for v in c.weight * em.normal_pdf(grid, c.mean, c.stddev)]
                for c in fit.components
            ],
            "total": [float(v) for v in em.weighted_density(fit.components, grid)],
        }
        try:
            dbi = davies_bouldin(xs, fit).to_dict()
        except ValleyfinderError:
            dbi = None
        entry = {
            "fit": fit_to_dict(fit),
            "config": fit_config_to_dict(config),
            "filters": spec.to_dict(),
            "bic": em.bic(fit),
            "dbi": dbi,
            "curves": curves,
            "_xs": xs,
        }
        fits_dir = self.workdir / "fits"
        fits_dir.mkdir(parents=True, exist_ok=True)
        (fits_dir / f"{fit_id}.json").write_text(dumps_canonical(entry["fit"]), encoding="utf-8")
        return entry


def _fit_id(k: int, seed: int, spec: FilterSpec) -> str:
    payload = json.dumps({"k": k, "seed": seed, "filters": spec.to_dict()}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


class _Handler(BaseHTTPRequestHandler):
    server_version = "valleyfinder"
    state: InspectorState  # set by make_server

    # -- plumbing --------------------------------------------------------

    def log_message(self, fmt, *args):
        pass  # keep analyst terminals quiet

    def _send_json(self, status: int, obj) -> None:
        body = dumps_canonical(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"code": code, "message": message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        obj = json.loads(raw.decode("utf-8"))
        if not isinstance(obj, dict):
            raise ValueError("request body must be a JSON object")
        return obj

    # -- routing ---------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        try:
            if url.path == "/api/histogram":
                self._get_histogram(query)
            elif url.path == "/api/threshold":
                self._get_threshold(query)
            elif url.path == "/api/spikes":
                self._get_spikes()
            elif url.path == "/api/meta":
                self._get_meta()
            elif url.path.startswith("/api/"):
                self._send_error_json(404, "not_found", f"no endpoint {url.path}")
            else:
                self._serve_static(url.path)
        except (ValueError, KeyError) as exc:
            self._send_error_json(400, "bad_request", str(exc))
        except DataError as exc:
            self._send_error_json(400, "data_error", str(exc))
        except NumericalError as exc:
            self._send_error_json(400, "numerical_error", str(exc))

    def do_POST(self):
        url = urlparse(self.path)
        try:
            if url.path == "/api/fit":
                self._post_fit()
            elif url.path == "/api/filters":
                self._post_filters()
            else:
                self._send_error_json(404, "not_found", f"no endpoint {url.path}")
        except (ValueError, KeyError) as exc:
            self._send_error_json(400, "bad_request", str(exc))
        except DataError as exc:
            self._send_error_json(400, "data_error", str(exc))
        except NumericalError as exc:
            self._send_error_json(400, "numerical_error", str(exc))

    # -- endpoints -------------------------------------------------------

    def _get_histogram(self, query) -> None:
        raw = query.get("bin_width", [str(DEFAULT_BIN_WIDTH)])[0]
        bin_width = float(raw)
        if not bin_width > 0:
            raise ValueError(f"bin_width must be > 0, got {raw}")
        hist = build_histogram(self.state.xs(), bin_width)
        self._send_json(200, histogram_to_dict(hist))

    def _get_threshold(self, query) -> None:
        fit_id = query.get("fit_id", [None])[0]
        if not fit_id:
            raise ValueError("fit_id query parameter is required")
        entry = self.state.get_fit(fit_id)
        if entry is None:
            raise ValueError(f"unknown fit_id {fit_id!r}")
        fit = fit_from_dict(entry["fit"])
        result = crossover_threshold(fit)
        valley = find_valley(build_histogram(entry["_xs"], DEFAULT_BIN_WIDTH))
        self._send_json(200, {"threshold": threshold_result_to_dict(result), "valley": valley.to_dict()})

    def _get_spikes(self) -> None:
        samples, _ = self.state.filtered()
        if not samples:
            raise DataError("no samples left under the active filters")
        reports = detect_spikes(samples)
        self._send_json(200, [r.to_dict() for r in reports])

    def _get_meta(self) -> None:
        samples, _ = self.state.filtered()
        self._send_json(
            200,
            {
                "samples_path": str(self.state.samples_path.resolve()),
                "workdir": str(self.state.workdir.resolve()),
                "n_samples_total": len(self.state.base_samples),
                "n_samples_filtered": len(samples),
                "filters": self.state.filter_spec.to_dict(),
            },
        )

    def _post_fit(self) -> None:
        body = self._read_body()
        if "k" not in body:
            raise ValueError("k is required")
        k = body["k"]
        if not isinstance(k, int) or isinstance(k, bool) or not 2 <= k <= 4:
            raise ValueError(f"k must be an integer in [2, 4], got {k!r}")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
        filters = FilterSpec.from_dict(body["filters"]) if body.get("filters") is not None else None

        fit_id, entry = self.state.run_fit(k, seed, filters)
        if entry is None:
            self._send_error_json(409, "fit_in_progress", f"a fit for these parameters ({fit_id}) is already running")
            return
        self._send_json(200, {"fit_id": fit_id, **{key: v for key, v in entry.items() if key != "_xs"}})

    def _post_filters(self) -> None:
        body = self._read_body()
        spec = FilterSpec.from_dict(body)
        with self.state._lock:
            self.state.filter_spec = spec
        samples, removed = self.state.filtered()
        self._send_json(
            200,
            {
                "n_before": len(self.state.base_samples),
                "n_after": len(samples),
                "n_users": len({s.user_id for s in samples}),
                "removed": removed,
                "filters": spec.to_dict(),
            },
        )

    # -- static UI -------------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if self.state.ui_dir is None:
            self._send_error_json(404, "no_ui", "no UI bundle configured (serve --ui-dir)")
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.state.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.state.ui_dir)) or not target.is_file():
            self._send_error_json(404, "not_found", f"no such file {path}")
            return
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(host: str, port: int, state: InspectorState) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(address: str, workdir, ui_dir=None, fit_overrides: dict | None = None) -> ThreadingHTTPServer:
    """Build the server for `valleyfinder serve`; caller runs serve_forever()."""
    host, _, port_text = address.rpartition(":")
    if not host or not port_text.isdigit():
        raise DataError(f"address must be host:port, got {address!r}")
    workdir = Path(workdir)
    samples_file = workdir / "samples.jsonl"
    if not samples_file.is_file():
        raise DataError(f"workdir {workdir} has no samples.jsonl (run `valleyfinder deltas` first)")
    samples = load_samples(samples_file)
    if ui_dir is None:
        candidate = workdir / "ui"
        ui_dir = candidate if candidate.is_dir() else None
    state = InspectorState(samples, workdir, ui_dir=ui_dir, fit_overrides=fit_overrides)
    return make_server(host, int(port_text), state)
