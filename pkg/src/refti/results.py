"""CSV tables and replay manifests.

The CSV header is ``scenario,iteration,seed,step,param_*,genome,kind,value``
with LF newlines and reals written to 17 significant digits.  The manifest
is JSON holding the fully resolved scenario and every run's seed; it has no
timestamps or host details, so a replay rewrites both files byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Tuple

from . import __version__
from .experiments import ResultTable, ScenarioSpec, run_scenario

RESULTS_FILE = "results.csv"
MANIFEST_FILE = "manifest.json"
FIXED_HEAD = ("scenario", "iteration", "seed", "step")
FIXED_TAIL = ("genome", "kind", "value")


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def header(param_names) -> Tuple[str, ...]:
    return FIXED_HEAD + tuple(f"param_{p}" for p in param_names) + FIXED_TAIL


def render_csv(table: ResultTable) -> str:
    names = table.param_names
    lines = [",".join(header(names))]
    for r in table.rows:
        params = dict(r.params)
        fields = [r.scenario, r.iteration, r.seed, r.step]
        fields += [params.get(p) for p in names]
        fields += [r.genome, r.kind, float(r.value)]
        lines.append(",".join(_csv_field(format_value(f)) for f in fields))
    return "\n".join(lines) + "\n"


def render_manifest(table: ResultTable) -> str:
    manifest = {
        "package": "refti",
        "version": __version__,
        "spec": table.spec.to_dict(),
        "results": RESULTS_FILE,
        "runs": table.runs,
    }
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_results(table: ResultTable, out_dir) -> Tuple[Path, Path]:
    """Write ``results.csv`` and ``manifest.json`` into ``out_dir``.

    Both files are rendered in memory first and moved into place whole, so
    a failure never leaves a truncated or header-less table behind.
    """
    if not table.rows:
        raise ValueError("refusing to write an empty result table")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    csv_text = render_csv(table)
    manifest_text = render_manifest(table)
    results_path = out / RESULTS_FILE
    manifest_path = out / MANIFEST_FILE
    _atomic_write(results_path, csv_text)
    _atomic_write(manifest_path, manifest_text)
    return results_path, manifest_path


def load_manifest(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    s = manifest["spec"]
    return ScenarioSpec(
        scenario=s["scenario"],
        base=s["base"],
        grid=s["grid"],
        iterations=int(s["iterations"]),
        seed=int(s["seed"]),
        preset=s.get("preset"),
    )


def replay(manifest_path, out_dir=None, workers: int = 1) -> Tuple[Path, Path]:
    """Re-run a manifest; by default the files are rewritten next to it."""
    spec = load_manifest(manifest_path)
    if out_dir is None:
        out_dir = Path(manifest_path).parent
    return emit_results(run_scenario(spec, workers=workers), out_dir)
