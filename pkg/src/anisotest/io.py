"""Pattern, results, and configuration file handling."""

import csv
import json

import numpy as np

from .geometry import PointPattern, Window
from .processes import GibbsLJ, LGCP, PLCP, Poisson, Strauss, Thomas

__all__ = [
    "read_pattern_csv",
    "write_pattern_csv",
    "RESULTS_HEADER",
    "write_results_csv",
    "read_results_csv",
    "write_results_json",
    "window_from_string",
    "model_from_dict",
    "model_to_dict",
    "study_config_from_dict",
]

RESULTS_HEADER = [
    "scenario_id",
    "model",
    "a",
    "window_side",
    "dss",
    "statistic",
    "replication",
    "n_tiles",
    "n_patterns",
    "n_failures",
    "rejection_rate",
    "size_exceedance",
]


def read_pattern_csv(path, window):
    """Parse an x,y pattern file against a declared window.

    A single non-numeric first row is accepted as a header.  Malformed
    rows, points outside the window, and duplicate points are all
    rejected with the offending line numbers.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected two columns, got {len(row)}")
            try:
                xy = (float(row[0]), float(row[1]))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ValueError(f"{path}: line {lineno}: non-numeric row {row!r}") from None
            rows.append((lineno, xy))
    pts = np.array([xy for _, xy in rows], dtype=float).reshape(-1, 2)
    if pts.shape[0]:
        inside = window.contains(pts)
        if not inside.all():
            bad = [rows[i][0] for i in np.flatnonzero(~inside)]
            raise ValueError(f"{path}: point(s) outside declared window at line(s) {bad}")
        _, first, counts = np.unique(pts, axis=0, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = [rows[i][0] for i in first[counts > 1]]
            raise ValueError(f"{path}: duplicate point(s), first occurrences at line(s) {dup}")
    return PointPattern(pts, window)


def write_pattern_csv(pat, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in pat.points:
            writer.writerow([repr(float(x)), repr(float(y))])


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(rows, path):
    """Write scenario result rows (dicts keyed by RESULTS_HEADER) as CSV."""
    if not rows:
        raise ValueError("no results to write")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow([_format_cell(row[k]) for k in RESULTS_HEADER])


def read_results_csv(path):
    """Parse a results CSV back into typed row dicts."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            row = dict(rec)
            row["scenario_id"] = int(row["scenario_id"])
            row["a"] = float(row["a"])
            row["window_side"] = float(row["window_side"])
            row["n_tiles"] = int(row["n_tiles"]) if row["n_tiles"] else None
            row["n_patterns"] = int(row["n_patterns"])
            row["n_failures"] = int(row["n_failures"])
            row["rejection_rate"] = float(row["rejection_rate"])
            row["size_exceedance"] = (
                float(row["size_exceedance"]) if row["size_exceedance"] else None
            )
            out.append(row)
    return out


def write_results_json(rows, path):
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def window_from_string(text):
    """Parse 'xmin,xmax,ymin,ymax' into a Window."""
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError("window must be 'xmin,xmax,ymin,ymax'")
    return Window(*parts)


_MODEL_KINDS = {
    "poisson": (Poisson, ("intensity",)),
    "lgcp": (LGCP, ("mu", "sigma2", "scale", "a", "theta")),
    "gibbs-lj": (GibbsLJ, ("chem", "rho", "sigma", "eps", "a", "theta")),
    "plcp": (PLCP, ("line_intensity", "points_per_length", "sigma_perp", "a", "theta")),
    "thomas": (Thomas, ("parent_intensity", "mean_offspring", "sigma")),
    "strauss": (Strauss, ("beta", "gamma", "interaction_range")),
}


def model_from_dict(doc):
    """Build a model spec from a {"kind": ..., params...} mapping."""
    kind = doc.get("kind")
    if kind not in _MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    cls, fields = _MODEL_KINDS[kind]
    kwargs = {k: doc[k] for k in doc if k != "kind"}
    unknown = set(kwargs) - set(fields)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)} for model {kind!r}")
    return cls(**kwargs)


def model_to_dict(spec):
    for kind, (cls, fields) in _MODEL_KINDS.items():
        if isinstance(spec, cls):
            return {"kind": kind, **{f: getattr(spec, f) for f in fields}}
    raise TypeError(f"unknown model spec {type(spec).__name__}")


def _window_from_json(value):
    if isinstance(value, (int, float)):
        return Window.square(float(value))
    return Window(*[float(v) for v in value])


def _replication_from_json(doc):
    from .study import McFitted, McMisspecified, McOracle, SRChoice, TilingChoice

    method = doc.get("method")
    if method == "mc-oracle":
        return McOracle()
    if method == "mc-fitted":
        return McFitted()
    if method == "mc-misspec":
        return McMisspecified()
    if method == "tiling":
        return TilingChoice(int(doc["k"]))
    if method == "sr":
        kwargs = {k: doc[k] for k in ("iters", "probe_count", "contact_kappa") if k in doc}
        return SRChoice(**kwargs)
    raise ValueError(f"unknown replication method {method!r}")


def study_config_from_dict(doc):
    """Build a StudyConfig from a JSON-style mapping.

    Models are {"kind": ...} mappings, windows are side lengths or
    [xmin, xmax, ymin, ymax] lists, replications are {"method": ...}
    mappings; the remaining keys mirror StudyConfig field names.
    """
    from .study import StudyConfig

    kwargs = dict(doc)
    kwargs["models"] = tuple(model_from_dict(m) for m in doc["models"])
    if "windows" in doc:
        kwargs["windows"] = tuple(_window_from_json(w) for w in doc["windows"])
    if "replications" in doc:
        kwargs["replications"] = tuple(_replication_from_json(r) for r in doc["replications"])
    for key in ("a_levels", "dss_list", "stat_kinds"):
        if key in doc:
            kwargs[key] = tuple(doc[key])
    return StudyConfig(**kwargs)
