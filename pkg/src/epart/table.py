"""Result tables, CSV output and emitted plot scripts."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        if len(set(self.columns)) != len(self.columns):
            raise ValueError(f"duplicate column names in {self.columns}")
        for row in self.rows:
            self._check(row)

    def _check(self, row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values for {len(self.columns)} columns")

    def append(self, row) -> None:
        row = tuple(row)
        self._check(row)
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def note(self, key: str, value) -> None:
        self.metadata.append((key, format_value(value) if not isinstance(value, str) else value))


def format_value(x) -> str:
    """12 significant digits; integers stay integers; ``inf`` and ``nan`` spelled out."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, ".12g")


def render_csv(table: ResultTable, wall_time: float | None = None) -> str:
    buf = io.StringIO()
    for key, value in table.metadata:
        buf.write(f"# {key}: {value}\n")
    if wall_time is not None:
        buf.write(f"# wall_time_s: {wall_time:.3f}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(table: ResultTable, path: Path, wall_time: float | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(table, wall_time), encoding="utf-8")
    return path


def read_csv(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    """Metadata, header and raw rows of a CSV written by :func:`write_csv`."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


_PLOT_TEMPLATE = '''"""Plot {csv_name} to {svg_name}. Needs matplotlib."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
X, YS, GROUP = {x!r}, {ys!r}, {group!r}
LOGX = {logx!r}

lines = [l for l in (HERE / {csv_name!r}).read_text().splitlines() if not l.startswith("#")]
rows = list(csv.DictReader(lines))
fig, axes = plt.subplots(len(YS), 1, figsize=(6, 2.6 * len(YS)), sharex=True, squeeze=False)
for ax, y in zip(axes[:, 0], YS):
    series = defaultdict(list)
    for r in rows:
        series[r[GROUP] if GROUP else ""].append((float(r[X]), float(r[y])))
    for label, pts in series.items():
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".",
                label=f"{{GROUP}}={{label}}" if GROUP else None)
    ax.set_ylabel(y)
    if LOGX:
        ax.set_xscale("symlog", linthresh=1e-2)
    if GROUP and len(series) <= 12:
        ax.legend(fontsize="x-small")
axes[-1, 0].set_xlabel(X)
fig.tight_layout()
fig.savefig(HERE / {svg_name!r})
'''


def write_plot_script(csv_path: Path, x: str, ys, group: str | None = None,
                      logx: bool = False) -> Path:
    """Write a self-contained matplotlib script that turns the CSV into an SVG."""
    csv_path = Path(csv_path)
    script = csv_path.with_name(csv_path.stem + "_plot.py")
    script.write_text(_PLOT_TEMPLATE.format(csv_name=csv_path.name, svg_name=csv_path.stem + ".svg",
                                            x=x, ys=list(ys), group=group, logx=logx),
                      encoding="utf-8")
    return script
