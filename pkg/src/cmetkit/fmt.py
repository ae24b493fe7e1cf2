"""Display rounding shared by stats tables and report rendering.

All computations in the toolkit run at full float precision; rounding
happens only here, at render time, with decimal half-up semantics (so
0.71425 displays as 0.7143, never 0.7142 by banker's rounding).
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, places: int) -> Decimal:
    # repr() gives the shortest decimal that round-trips the float, which is
    # the value the reader sees; half-up is applied to that decimal form.
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)


def pct2(fraction: float) -> str:
    """Render a 0..1 fraction as a percentage with two decimals: 0.0915 -> '9.15'."""
    return str(round_half_up(fraction * 100.0, 2))


def fixed4(value: float) -> str:
    """Render a score to four decimals: 0.71423 -> '0.7142'."""
    return str(round_half_up(value, 4))
