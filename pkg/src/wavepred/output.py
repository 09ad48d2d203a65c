"""CSV formatting, atomic writes and optional SVG plots rendered from CSV."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool,)) or v is None:
        return str(v)
    if isinstance(v, int) or (hasattr(v, "dtype") and v.dtype.kind in "iu"):
        return str(int(v))
    return "%.15g" % float(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def svg_from_csv(csv_path, x: str, ys: list[str], group: str | None = None,
                 logy: bool = False, logx: bool = False, title: str = "") -> str:
    """Render a line plot of CSV columns to SVG text (requires matplotlib)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "wavepred"
    header, rows = read_csv(csv_path)
    col = {name: i for i, name in enumerate(header)}
    groups: dict = {}
    for r in rows:
        groups.setdefault(r[col[group]] if group else "", []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for gname, grows in groups.items():
        xv = [float(r[col[x]]) for r in grows]
        for y in ys:
            yv = [abs(float(r[col[y]])) if logy else float(r[col[y]]) for r in grows]
            label = " ".join(s for s in (y if len(ys) > 1 else "", f"{group}={gname}" if group else "") if s)
            ax.plot(xv, yv, marker=".", label=label or y)
    if logy:
        ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_title(title)
    ax.legend(fontsize="small")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
