"""Readers for experiment outputs: CSV tables, manifest.json and path dumps.

These are the only formats a downstream consumer (plotting, notebooks) needs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

# Column headers of every CSV file, keyed by experiment kind then file name.
SCHEMAS: dict[str, dict[str, list[str]]] = {
    "kernel-check": {
        "kernel.csv": ["m", "t", "r", "kernel", "levy_density"],
        "kernel_norm.csv": ["m", "t", "integral", "abs_error"],
    },
    "lk-check": {"lk.csv": ["d", "m", "xi", "psi", "residual"]},
    "sample-stats": {
        "sample_stats.csv": ["m", "eps", "n", "mean_jumps", "jumps_stderr", "expected_jumps", "ks_path",
                             "ks_subordination", "ks_critical"],
        "moments.csv": ["m", "beta", "r", "s", "t", "joint", "joint_stderr", "single_first", "single_second",
                        "product", "z"],
    },
    "weak-convergence": {"weak_convergence.csv": ["m", "ks", "mc_error", "n", "eps"]},
    "couple-distance": {
        "coupling.csv": ["m", "n", "median", "q25", "q75", "mean"],
        "coupling_samples.csv": ["path", "m", "sup_distance"],
    },
    "map-check": {
        "map_check.csv": ["d", "m", "r", "l", "l_over_r_minus_1"],
        "pushforward.csv": ["d", "m", "a", "b", "direct", "pullback", "rel_err"],
    },
    "fk-oracle": {
        "fk_oracle.csv": ["m", "x", "eps", "mc_re", "mc_im", "stderr_re", "reference", "abs_diff", "trunc_budget",
                          "split_budget", "alias_bound", "tolerance", "pass"],
    },
    "selftest": {"selftest.csv": ["check", "value", "expected", "abs_error", "tolerance", "pass"]},
    "certify-eps": {
        "certify.csv": ["m", "eps", "m2", "path_term", "phase_term", "compensator_term", "total", "char_residual",
                        "certified"],
    },
}
_PROFILE = ["m", "x", "u_re", "u_im", "u_stderr_re", "u_stderr_im", "diff_re", "diff_im", "diff_stderr_re",
            "diff_stderr_im"]
_CONVERGENCE = ["m", "sup_diff", "sup_stderr", "argmax_x", "l2_diff", "l2_stderr"]
for _kind in ("sup-convergence", "l2-convergence"):
    _stem = _kind.replace("-", "_")
    SCHEMAS[_kind] = {f"{_stem}.csv": _CONVERGENCE, f"{_stem}_profile.csv": _PROFILE}

PATH_DUMP_HEADER = ["path", "d", "mass", "horizon", "cutoff", "n_jumps", "times", "jumps"]


def read_csv(path) -> dict[str, list]:
    """Columns of a CSV file; numeric cells become floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list] = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                try:
                    cols[h].append(float(cell))
                except ValueError:
                    cols[h].append(cell)
    return cols


def load_manifest(out_dir) -> dict:
    """manifest.json of a run directory, checked against the file inventory."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    for key in ("config_hash", "config", "library_version", "wall_seconds", "status", "summary", "files"):
        if key not in manifest:
            raise ValueError(f"manifest missing '{key}'")
    kind = manifest["config"]["kind"]
    expected = SCHEMAS.get(kind, {})
    for name in manifest["files"]:
        header = next(csv.reader(open(out_dir / name, newline="")))
        if name in expected and header != expected[name]:
            raise ValueError(f"{name}: header {header} does not match schema {expected[name]}")
    return manifest


@dataclass
class DumpedPath:
    index: int
    d: int
    mass: float
    horizon: float
    cutoff: float
    times: list[float]
    jumps: list[list[float]]


def read_path_dump(path) -> list[DumpedPath]:
    """Parse a path dump written by the C++ writer."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != PATH_DUMP_HEADER:
            raise ValueError("not a path dump")
        for row in reader:
            idx, d, mass, horizon, cutoff, n, times, jumps = row
            d, n = int(d), int(n)
            t = [float(v) for v in times.split()]
            flat = [float(v) for v in jumps.split()]
            if len(t) != n or len(flat) != n * d:
                raise ValueError(f"path {idx}: inconsistent record")
            out.append(DumpedPath(int(idx), d, float(mass), float(horizon), float(cutoff), t,
                                  [flat[i * d:(i + 1) * d] for i in range(n)]))
    return out
