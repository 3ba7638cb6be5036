"""Serialization for traces and summaries.

Floats are rendered with repr (shortest round-trip), so identical runs produce
byte-identical files. Writes go through a temp file in the target directory
followed by an atomic rename; a crashed run never leaves a partial artifact.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

from .metrics import RunSummary
from .mixer import StepDecision, Trace

__all__ = [
    "atomic_write_text",
    "trace_to_dict",
    "trace_from_dict",
    "trace_to_json",
    "trace_csv_header",
    "trace_to_csv",
    "summaries_to_csv",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = (
    "strategy",
    "seeds",
    "balance_mean",
    "balance_se",
    "combined_mean",
    "combined_se",
    "entropy_mean",
)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text to path via temp-file + rename in the same directory."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def trace_to_dict(trace: Trace) -> dict:
    return {
        "strategy": trace.strategy,
        "seed": trace.seed,
        "final_scores": list(trace.final_scores),
        "decisions": [
            {
                "step": d.step,
                "raw_scores": list(d.raw_scores),
                "spot_prices": list(d.spot_prices),
                "sigma": d.sigma,
                "tte": d.tte,
                "bs_scores": list(d.bs_scores),
                "chosen": d.chosen,
            }
            for d in trace.decisions
        ],
    }


def trace_from_dict(payload: dict) -> Trace:
    decisions = tuple(
        StepDecision(
            step=int(d["step"]),
            raw_scores=tuple(float(v) for v in d["raw_scores"]),
            spot_prices=tuple(float(v) for v in d["spot_prices"]),
            sigma=float(d["sigma"]),
            tte=int(d["tte"]),
            bs_scores=tuple(float(v) for v in d["bs_scores"]),
            chosen=int(d["chosen"]),
        )
        for d in payload["decisions"]
    )
    return Trace(
        strategy=str(payload["strategy"]),
        seed=int(payload["seed"]),
        decisions=decisions,
        final_scores=tuple(float(v) for v in payload["final_scores"]),
    )


def trace_to_json(trace: Trace) -> str:
    return json.dumps(trace_to_dict(trace), indent=2) + "\n"


def trace_csv_header(num_prompts: int) -> str:
    cols = ["step"]
    cols += [f"raw_{i}" for i in range(num_prompts)]
    cols += [f"spot_{i}" for i in range(num_prompts)]
    cols += ["sigma", "tte"]
    cols += [f"bs_{i}" for i in range(num_prompts)]
    cols += ["chosen"]
    return ",".join(cols)


def trace_to_csv(trace: Trace) -> str:
    lines = [trace_csv_header(trace.num_prompts)]
    for d in trace.decisions:
        cells = [str(d.step)]
        cells += [repr(v) for v in d.raw_scores]
        cells += [repr(v) for v in d.spot_prices]
        cells += [repr(d.sigma), str(d.tte)]
        cells += [repr(v) for v in d.bs_scores]
        cells += [str(d.chosen)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def summaries_to_csv(summaries: Sequence[RunSummary]) -> str:
    lines = [",".join(SUMMARY_COLUMNS)]
    for s in summaries:
        lines.append(
            ",".join(
                [
                    s.strategy,
                    str(s.seeds),
                    repr(s.balance_mean),
                    repr(s.balance_se),
                    repr(s.combined_mean),
                    repr(s.combined_se),
                    repr(s.entropy_mean),
                ]
            )
        )
    return "\n".join(lines) + "\n"
