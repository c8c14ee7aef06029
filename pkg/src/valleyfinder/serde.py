"""JSON schemas for the shared value types, plus canonical file helpers.

Wire names follow the published schemas (component fields are "mu", "sigma",
"lambda"); floats serialize with Python's shortest round-trip repr so that
parsing a dump always reproduces the exact value.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .types import (
    Event,
    FitConfig,
    Histogram,
    HistogramBin,
    InterActivitySample,
    Label,
    MixtureComponent,
    MixtureFit,
    Session,
    ThresholdResult,
)


def dumps_canonical(obj: Any) -> str:
    """Serialize to the one canonical text form used for every JSON artifact."""
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def dump_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps_canonical(obj), encoding="utf-8")


def load_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":"), ensure_ascii=False, allow_nan=False))
            fh.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


# -- domain types ------------------------------------------------------


def event_to_dict(event: Event) -> dict:
    d = {"user_id": event.user_id, "timestamp_s": event.timestamp_s}
    if event.kind is not None:
        d["kind"] = event.kind
    return d


def event_from_dict(d: dict) -> Event:
    return Event(user_id=d["user_id"], timestamp_s=d["timestamp_s"], kind=d.get("kind"))


def sample_to_dict(sample: InterActivitySample) -> dict:
    return {"user_id": sample.user_id, "delta_s": sample.delta_s, "log2_delta": sample.log2_delta}


def sample_from_dict(d: dict) -> InterActivitySample:
    return InterActivitySample(user_id=d["user_id"], delta_s=d["delta_s"], log2_delta=d.get("log2_delta"))


def component_to_dict(comp: MixtureComponent) -> dict:
    return {
        "mu": comp.mean,
        "sigma": comp.stddev,
        "lambda": comp.weight,
        "label": comp.label.value if comp.label is not None else None,
    }


def component_from_dict(d: dict) -> MixtureComponent:
    label = d.get("label")
    return MixtureComponent(
        mean=d["mu"],
        stddev=d["sigma"],
        weight=d["lambda"],
        label=Label(label) if label is not None else None,
    )


def fit_to_dict(fit: MixtureFit) -> dict:
    return {
        "components": [component_to_dict(c) for c in fit.components],
        "log_likelihood": fit.log_likelihood,
        "n": fit.n,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "seed": fit.seed,
        "degenerate": fit.degenerate,
    }


def fit_from_dict(d: dict, strict: bool = True) -> MixtureFit:
    """Parse a fit; strict=False skips invariant checks so validate_fit can diagnose."""
    fields = dict(
        components=tuple(component_from_dict(c) for c in d["components"]),
        log_likelihood=d["log_likelihood"],
        n=d["n"],
        iterations=d["iterations"],
        converged=d["converged"],
        seed=d["seed"],
        degenerate=d.get("degenerate", False),
    )
    if strict:
        return MixtureFit(**fields)
    return MixtureFit.unvalidated(**fields)


def fit_config_to_dict(config: FitConfig) -> dict:
    return {
        "k": config.k,
        "max_iter": config.max_iter,
        "rel_tol": config.rel_tol,
        "restarts": config.restarts,
        "seed": config.seed,
        "sigma_floor": config.sigma_floor,
        "init_strategy": config.init_strategy,
    }


def fit_config_from_dict(d: dict) -> FitConfig:
    base = FitConfig(k=d["k"])
    return FitConfig(
        k=d["k"],
        max_iter=d.get("max_iter", base.max_iter),
        rel_tol=d.get("rel_tol", base.rel_tol),
        restarts=d.get("restarts", base.restarts),
        seed=d.get("seed", base.seed),
        sigma_floor=d.get("sigma_floor", base.sigma_floor),
        init_strategy=d.get("init_strategy", base.init_strategy),
    )


def threshold_result_to_dict(result: ThresholdResult) -> dict:
    return {
        "t_log2": result.t_log2,
        "threshold_s": result.threshold_s,
        "threshold_min": result.threshold_min,
        "within_group": list(result.within_group),
        "between_group": list(result.between_group),
        "bracket": list(result.bracket),
    }


def threshold_result_from_dict(d: dict) -> ThresholdResult:
    return ThresholdResult(
        t_log2=d["t_log2"],
        threshold_s=d["threshold_s"],
        threshold_min=d["threshold_min"],
        within_group=tuple(d["within_group"]),
        between_group=tuple(d["between_group"]),
        bracket=tuple(d["bracket"]),
    )


def session_to_dict(session: Session) -> dict:
    return {
        "user_id": session.user_id,
        "start_s": session.start_s,
        "end_s": session.end_s,
        "n_events": session.n_events,
        "duration_s": session.duration_s,
    }


def session_from_dict(d: dict) -> Session:
    return Session(
        user_id=d["user_id"],
        start_s=d["start_s"],
        end_s=d["end_s"],
        n_events=d["n_events"],
        duration_s=d["duration_s"],
    )


def histogram_to_dict(hist: Histogram) -> dict:
    return {
        "bin_width_log2": hist.bin_width_log2,
        "n_total": hist.n_total,
        "bins": [
            {"lo_log2": b.lo_log2, "hi_log2": b.hi_log2, "count": b.count, "density": b.density}
            for b in hist.bins
        ],
    }


def histogram_from_dict(d: dict) -> Histogram:
    return Histogram(
        bin_width_log2=d["bin_width_log2"],
        bins=tuple(
            HistogramBin(lo_log2=b["lo_log2"], hi_log2=b["hi_log2"], count=b["count"], density=b["density"])
            for b in d["bins"]
        ),
        n_total=d["n_total"],
    )
