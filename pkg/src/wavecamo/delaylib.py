"""Delay annotation sidecar: size rows, flip-flop timing, lookup tables.

A library carries, per gate kind, a small set of size rows (per-pin typical
delays, fastest row first), optional per-instance overrides, the flip-flop
timing triple, the buffer delay used as the camouflage-delay reporting unit,
and optional slew/load lookup tables for signoff-style re-verification.
"""

from __future__ import annotations

import json

import numpy as np


class DelayLibrary:
    """Delay data for a netlist.

    Attributes
    ----------
    kinds : dict
        kind -> {"rows": [[per-pin delay, ...], ...], "default_row": int}.
        A row shorter than a gate's fan-in repeats its last entry.
    instances : dict
        gate id -> same shape as a kind entry; overrides the kind.
    flipflop : dict
        {"t_su", "t_h", "t_cq", "launch_slew"}.
    buffer_delay : float
        Typical delay of the smallest buffer; the unit for reported
        camouflage delay.
    lookup : dict or None
        {"slew_axis", "load_axis", "base_load", "load_per_sink",
         "kinds": {kind: {"rows": [{"delay": 2D, "out_slew": 2D}, ...]}}}.
    """

    def __init__(self, kinds, flipflop, buffer_delay, instances=None,
                 lookup=None):
        self.kinds = kinds
        self.instances = instances or {}
        self.flipflop = flipflop
        self.buffer_delay = float(buffer_delay)
        self.lookup = lookup

    # -- size rows ---------------------------------------------------------

    def _entry(self, gate_id, kind):
        e = self.instances.get(gate_id)
        if e is not None:
            return e
        e = self.kinds.get(kind)
        if e is None:
            raise KeyError(f"no delay rows for kind {kind!r}")
        return e

    def n_levels(self, gate_id, kind) -> int:
        return len(self._entry(gate_id, kind)["rows"])

    def default_level(self, gate_id, kind) -> int:
        return int(self._entry(gate_id, kind).get("default_row", 0))

    def row(self, gate_id, kind, level):
        rows = self._entry(gate_id, kind)["rows"]
        if not 0 <= level < len(rows):
            raise IndexError(f"size level {level} out of range for {kind}")
        return rows[level]

    def pin_delays(self, gate_id, kind, level, n_pins):
        """Resolve a row to exactly n_pins entries (last entry repeats)."""
        row = self.row(gate_id, kind, level)
        return [float(row[min(i, len(row) - 1)]) for i in range(n_pins)]

    # -- flip-flop timing ---------------------------------------------------

    @property
    def t_su(self) -> float:
        return float(self.flipflop["t_su"])

    @property
    def t_h(self) -> float:
        return float(self.flipflop["t_h"])

    @property
    def t_cq(self) -> float:
        return float(self.flipflop["t_cq"])

    @property
    def launch_slew(self) -> float:
        return float(self.flipflop.get("launch_slew", 0.05))

    # -- lookup tables -------------------------------------------------------

    def has_lookup(self) -> bool:
        return self.lookup is not None

    def load_of(self, n_sinks: int) -> float:
        lk = self.lookup
        return float(lk["base_load"]) + float(lk["load_per_sink"]) * n_sinks

    def lookup_delay(self, kind, level, slew, load):
        """Bilinear delay/out-slew lookup with clamping.

        Returns
        -------
        (delay, out_slew, clamped) : (float, float, bool)
            `clamped` is True when slew or load fell outside the table and
            was clamped to the table edge.
        """
        lk = self.lookup
        tab = lk["kinds"][kind]["rows"][level]
        s_ax = np.asarray(lk["slew_axis"], dtype=float)
        l_ax = np.asarray(lk["load_axis"], dtype=float)
        d, c1 = _bilinear(s_ax, l_ax, np.asarray(tab["delay"], float),
                          slew, load)
        s, c2 = _bilinear(s_ax, l_ax, np.asarray(tab["out_slew"], float),
                          slew, load)
        return d, s, (c1 or c2)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "flipflop": self.flipflop,
            "buffer_delay": self.buffer_delay,
            "kinds": self.kinds,
        }
        if self.instances:
            doc["instances"] = self.instances
        if self.lookup is not None:
            doc["lookup"] = self.lookup
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DelayLibrary":
        doc = json.loads(text)
        return cls(doc["kinds"], doc["flipflop"], doc["buffer_delay"],
                   doc.get("instances"), doc.get("lookup"))


def _bilinear(x_axis, y_axis, grid, x, y):
    """Bilinear interpolation on a rectangular grid with edge clamping."""
    clamped = False
    if x < x_axis[0]:
        x, clamped = x_axis[0], True
    elif x > x_axis[-1]:
        x, clamped = x_axis[-1], True
    if y < y_axis[0]:
        y, clamped = y_axis[0], True
    elif y > y_axis[-1]:
        y, clamped = y_axis[-1], True
    i = int(np.searchsorted(x_axis, x, side="right") - 1)
    j = int(np.searchsorted(y_axis, y, side="right") - 1)
    i = min(max(i, 0), len(x_axis) - 2)
    j = min(max(j, 0), len(y_axis) - 2)
    x0, x1 = x_axis[i], x_axis[i + 1]
    y0, y1 = y_axis[j], y_axis[j + 1]
    fx = 0.0 if x1 == x0 else (x - x0) / (x1 - x0)
    fy = 0.0 if y1 == y0 else (y - y0) / (y1 - y0)
    v = (grid[i, j] * (1 - fx) * (1 - fy) + grid[i + 1, j] * fx * (1 - fy)
         + grid[i, j + 1] * (1 - fx) * fy + grid[i + 1, j + 1] * fx * fy)
    return float(v), clamped


# -- bundled default library -------------------------------------------------

# Size rows scale a kind's base delay by fast/typical/slow factors; the
# typical row is the parse-time default.
_BASE_DELAY = {
    "AND": 2.0, "NAND": 2.0, "OR": 2.0, "NOR": 2.0,
    "NOT": 1.0, "BUF": 1.0, "XOR": 2.4, "XNOR": 2.4,
}
_ROW_SCALE = (0.75, 1.0, 1.3)


def default_library(with_lookup: bool = True) -> DelayLibrary:
    """Build the library bundled with the benchmark circuits.

    Three size rows per kind (fast/typical/slow), flip-flop timing
    t_su=0.2 / t_h=0.1 / t_cq=0.3, buffer unit 1.0.  The lookup tables are
    centered so that at the reference slew (0.05) and single-sink load the
    interpolated delay equals the typical row, drifting below one percent
    across the table.
    """
    kinds = {}
    for kind, base in _BASE_DELAY.items():
        kinds[kind] = {
            "rows": [[round(base * s, 4)] for s in _ROW_SCALE],
            "default_row": 1,
        }
    flipflop = {"t_su": 0.2, "t_h": 0.1, "t_cq": 0.3, "launch_slew": 0.05}
    lookup = _default_lookup() if with_lookup else None
    return DelayLibrary(kinds, flipflop, 1.0, lookup=lookup)


def _default_lookup():
    slew_axis = [0.02, 0.05, 0.1, 0.2]
    load_axis = [1.0, 1.5, 2.0, 3.0]
    ref_slew, ref_load = 0.05, 1.0
    table_kinds = {}
    for kind, base in _BASE_DELAY.items():
        rows = []
        for scale in _ROW_SCALE:
            nominal = base * scale
            delay = []
            out_slew = []
            for s in slew_axis:
                drow = []
                srow = []
                for l in load_axis:
                    f = (1 + 0.02 * (s - ref_slew)) * (1 + 0.003 * (l - ref_load))
                    drow.append(round(nominal * f, 6))
                    srow.append(round(ref_slew * (1 + 0.1 * (l - ref_load)), 6))
                delay.append(drow)
                out_slew.append(srow)
            rows.append({"delay": delay, "out_slew": out_slew})
        table_kinds[kind] = {"rows": rows}
    return {
        "slew_axis": slew_axis,
        "load_axis": load_axis,
        "base_load": 0.5,
        "load_per_sink": 0.5,
        "kinds": table_kinds,
    }
