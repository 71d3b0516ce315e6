"""Exact log-index traces and their CSV / JSON-lines form.

One shape serves the matrix-group dimension traces, the abelian traces and
the graded density traces: rows ``(level, num_exp, den_exp)`` with the exact
ratio ``num_exp / den_exp``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

CSV_HEADER = "level,num_exp,den_exp,ratio_num,ratio_den"


@dataclass(frozen=True)
class TraceRow:
    level: int
    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError(f"level {self.level}: denominator must be positive")
        if not 0 <= self.num <= self.den:
            raise ValueError(f"level {self.level}: ratio {self.num}/{self.den} outside [0, 1]")

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.num, self.den)


@dataclass
class Trace:
    rows: list
    window: int | None = None
    flagged: bool = False
    notes: list = field(default_factory=list)

    def ratios(self) -> list:
        return [r.ratio for r in self.rows]

    def tail(self) -> list:
        w = self.window if self.window is not None else math.ceil(len(self.rows) / 2)
        w = max(1, min(w, len(self.rows)))
        return self.rows[-w:]

    @property
    def liminf_proxy(self) -> Fraction | None:
        """Minimum ratio over the tail window; a bound on data, not a limit."""
        if not self.rows:
            return None
        return min(r.ratio for r in self.tail())

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            q = r.ratio
            lines.append(f"{r.level},{r.num},{r.den},{q.numerator},{q.denominator}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        out = []
        for r in self.rows:
            q = r.ratio
            out.append(
                json.dumps(
                    {
                        "level": r.level,
                        "num_exp": r.num,
                        "den_exp": r.den,
                        "ratio": f"{q.numerator}/{q.denominator}",
                        "decimal": f"{float(q):.6f}",
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(out) + ("\n" if out else "")

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "jsonl":
            return self.to_jsonl()
        raise ValueError(f"unknown format {fmt!r}")


def parse_trace_csv(text: str) -> Trace:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError("missing trace CSV header")
    rows = []
    for ln in lines[1:]:
        level, num, den, rn, rd = (int(x) for x in ln.split(","))
        row = TraceRow(level, num, den)
        if row.ratio != Fraction(rn, rd):
            raise ValueError(f"inconsistent ratio on line {ln!r}")
        rows.append(row)
    return Trace(rows)


def fmt_fraction(q: Fraction) -> str:
    """``num/den`` followed by a 6-place decimal for display."""
    return f"{q.numerator}/{q.denominator} ({float(q):.6f})"
