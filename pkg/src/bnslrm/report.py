"""CSV, manifest and plot output for strike sweeps."""
from __future__ import annotations

import csv
import json
from pathlib import Path

CSV_COLUMNS = ("preset", "t", "K", "xi_put", "xi_call", "se", "term_digital", "term_integral",
               "term_head", "c1_error", "L", "h", "seed")
_FLOAT_COLUMNS = ("t", "K", "xi_put", "xi_call", "se", "term_digital", "term_integral", "term_head",
                  "c1_error", "h")
# one colour per evaluation time, in increasing t
TIME_COLOURS = ("black", "red", "blue", "green", "orange", "purple")


def _fmt(x):
    # shortest decimal that round-trips
    return repr(float(x))


def sweep_rows(preset_name, sweep, config):
    for r in sweep.rows:
        yield {
            "preset": preset_name, "t": r.t, "K": r.K, "xi_put": r.xi_put, "xi_call": r.xi_call,
            "se": r.se, "term_digital": r.term_digital.mean, "term_integral": r.term_integral.mean,
            "term_head": r.term_head.mean, "c1_error": r.c1_error, "L": config.n_paths,
            "h": config.step_h, "seed": config.master_seed,
        }


def write_csv(path, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) if c in _FLOAT_COLUMNS else str(row[c]) for c in CSV_COLUMNS])
    return path


def read_csv(path):
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            row = dict(rec)
            for c in _FLOAT_COLUMNS:
                row[c] = float(row[c])
            row["L"] = int(row["L"])
            row["seed"] = int(row["seed"])
            rows.append(row)
    return rows


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def plot_rows(rows, out_dir):
    """One SVG per preset: ``xi_call`` against K, one curve per t. Returns the written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    written = []
    with matplotlib.rc_context({"svg.hashsalt": "bnslrm", "svg.fonttype": "none"}):
        for preset_name in sorted({r["preset"] for r in rows}):
            sub = [r for r in rows if r["preset"] == preset_name]
            fig, ax = plt.subplots(figsize=(7, 4.5))
            for colour, t in zip(TIME_COLOURS, sorted({r["t"] for r in sub})):
                pts = sorted((r["K"], r["xi_call"]) for r in sub if r["t"] == t)
                ax.plot([p[0] for p in pts], [p[1] for p in pts], color=colour, lw=1.2, label=f"t = {t:g}")
            ax.set_xlabel("strike K")
            ax.set_ylabel("LRM hedge ratio (call)")
            ax.set_title(preset_name)
            ax.grid(alpha=0.3)
            ax.legend()
            fig.tight_layout()
            path = out_dir / f"xi_call_{preset_name}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written


def plot_csv(csv_path, out_dir=None):
    csv_path = Path(csv_path)
    return plot_rows(read_csv(csv_path), out_dir or csv_path.parent)
