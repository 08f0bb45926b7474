"""Plate layouts, concentration units and fold-N dilution series.

Concentrations are stored as log10 of mol/L in exact rational arithmetic,
so an 11-decade dilution ladder keeps exact decade spacing instead of
accumulating float error. Relative stocks (unquantified cultures labelled
"m", "n", ...) stay symbolic: only their fold relation to each other is
known, so they never become numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def _pow10_exponent(n: int) -> int | None:
    """Exponent k with n == 10**k, or None if n is not a power of ten."""
    if n < 1:
        return None
    k = 0
    while n % 10 == 0:
        n //= 10
        k += 1
    return k if n == 1 else None


def _log10_fraction(n: int) -> Fraction:
    """log10(n) as a Fraction; exact for powers of ten."""
    k = _pow10_exponent(n)
    if k is not None:
        return Fraction(k)
    return Fraction(math.log10(n))


@dataclass(frozen=True, order=True)
class MolarConcentration:
    """A concentration in mol/L, held as log10 so decade steps are exact.

    Ordering follows log10_molar, which equals ordering of the linear
    concentration.
    """

    log10_molar: Fraction

    def __post_init__(self):
        if not isinstance(self.log10_molar, Fraction):
            object.__setattr__(self, "log10_molar", Fraction(self.log10_molar))

    @classmethod
    def from_log10(cls, value: int | Fraction) -> "MolarConcentration":
        return cls(Fraction(value))

    @classmethod
    def from_molar(cls, value: float | str | Fraction) -> "MolarConcentration":
        """Parse a linear mol/L value; exact when it is a power of ten.

        Accepts scientific-notation strings ("1e-7"), floats and Fractions.
        Non-power-of-ten values fall back to a float log10, which still
        preserves ordering.
        """
        if isinstance(value, Fraction):
            frac = value
        elif isinstance(value, str):
            frac = Fraction(value)
        else:
            frac = Fraction(repr(float(value)))
        if frac <= 0:
            raise ValueError(f"concentration must be positive, got {value!r}")
        if frac.numerator == 1:
            k = _pow10_exponent(frac.denominator)
            if k is not None:
                return cls(Fraction(-k))
        elif frac.denominator == 1:
            k = _pow10_exponent(frac.numerator)
            if k is not None:
                return cls(Fraction(k))
        return cls(Fraction(math.log10(frac.numerator) - math.log10(frac.denominator)))

    @property
    def molar(self) -> float:
        """Linear concentration in mol/L."""
        return 10.0 ** float(self.log10_molar)

    def divide(self, fold: int) -> "MolarConcentration":
        return MolarConcentration(self.log10_molar - _log10_fraction(fold))

    def to_scientific(self) -> str:
        """Mol/L in scientific notation; "1e-10" style for exact decades."""
        if self.log10_molar.denominator == 1:
            return f"1e{self.log10_molar.numerator}"
        return format(self.molar, ".6g")

    def to_unit_string(self) -> str:
        """Human-readable form (100mM, 10pM, ...) for exact-decade values."""
        if self.log10_molar.denominator != 1:
            return self.to_scientific() + "M"
        k = self.log10_molar.numerator
        for exponent, unit in ((0, "M"), (-3, "mM"), (-6, "uM"), (-9, "nM"), (-12, "pM")):
            if 0 <= k - exponent <= 2:
                return f"{10 ** (k - exponent)}{unit}"
        return self.to_scientific() + "M"

    def __str__(self) -> str:
        return self.to_unit_string()


@dataclass(frozen=True)
class RelativeFactor:
    """A symbolic concentration: an unquantified stock divided by fold^k."""

    symbol: str
    divisor: int = 1

    def __post_init__(self):
        if not self.symbol:
            raise ValueError("relative factor needs a non-empty symbol")
        if self.divisor < 1:
            raise ValueError(f"divisor must be >= 1, got {self.divisor}")

    def divide(self, fold: int) -> "RelativeFactor":
        return RelativeFactor(self.symbol, self.divisor * fold)

    def _check_comparable(self, other) -> None:
        if not isinstance(other, RelativeFactor) or other.symbol != self.symbol:
            raise TypeError(f"cannot order {self} against {other}")

    def __lt__(self, other) -> bool:
        self._check_comparable(other)
        return self.divisor > other.divisor

    def __le__(self, other) -> bool:
        self._check_comparable(other)
        return self.divisor >= other.divisor

    def __gt__(self, other) -> bool:
        self._check_comparable(other)
        return self.divisor < other.divisor

    def __ge__(self, other) -> bool:
        self._check_comparable(other)
        return self.divisor <= other.divisor

    def __str__(self) -> str:
        return self.symbol if self.divisor == 1 else f"{self.symbol}/{self.divisor}"


Concentration = MolarConcentration | RelativeFactor


@dataclass(frozen=True)
class Sample:
    concentration: Concentration


@dataclass(frozen=True)
class Control:
    pass


@dataclass(frozen=True)
class Blank:
    pass


WellRole = Sample | Control | Blank

CONTROL = Control()
BLANK = Blank()


def role_name(role: WellRole) -> str:
    if isinstance(role, Sample):
        return "sample"
    if isinstance(role, Control):
        return "control"
    return "blank"


def make_dilution_series(stock: Concentration, fold: int, count: int) -> list[Concentration]:
    """Serial fold-N dilution: element i is stock / fold**i.

    Rejects count < 1 and fold < 2 as malformed protocols. The log-domain
    step is one shared value, so consecutive spacing is exact.
    """
    if count < 1:
        raise ValueError(f"dilution series needs count >= 1, got {count}")
    if fold < 2:
        raise ValueError(f"dilution fold must be >= 2, got {fold}")
    series: list[Concentration] = [stock]
    for _ in range(count - 1):
        series.append(series[-1].divide(fold))
    return series


def _ordered_strictly_decreasing(a: Concentration, b: Concentration) -> bool:
    try:
        return a > b
    except TypeError:
        # incomparable (different unit systems); do not reject
        return True


@dataclass(frozen=True)
class PlateLayout:
    """Ordered well -> role assignment for one dilution run.

    Well indices are 1-based, strictly increasing, within a 96-well plate.
    Sample concentrations must fall strictly with the well index, and each
    12-well plate row carries at most one blank.
    """

    wells: tuple[tuple[int, WellRole], ...]
    fold: int

    def __post_init__(self):
        if self.fold < 2:
            raise ValueError(f"fold must be >= 2, got {self.fold}")
        previous_index = 0
        previous_conc: Concentration | None = None
        blanks_per_row: dict[int, int] = {}
        for index, role in self.wells:
            if not previous_index < index <= 96:
                raise ValueError(f"well indices must be strictly increasing in [1, 96]; got {index}")
            previous_index = index
            if isinstance(role, Sample):
                if previous_conc is not None and not _ordered_strictly_decreasing(previous_conc, role.concentration):
                    raise ValueError(f"sample concentrations must strictly decrease; violated at well {index}")
                previous_conc = role.concentration
            elif isinstance(role, Blank):
                row = (index - 1) // 12
                blanks_per_row[row] = blanks_per_row.get(row, 0) + 1
                if blanks_per_row[row] > 1:
                    raise ValueError(f"more than one blank in plate row {row + 1}")

    def __len__(self) -> int:
        return len(self.wells)

    def role_of(self, well_index: int) -> WellRole:
        for index, role in self.wells:
            if index == well_index:
                return role
        raise KeyError(f"well {well_index} not in layout")

    def well_indices(self) -> list[int]:
        return [index for index, _ in self.wells]


FLUORESCEIN_STOCK = MolarConcentration.from_log10(-1)  # 100 mM


def fluorescein_layout() -> PlateLayout:
    """The 12-well fluorescein run: a fold-10 ladder from 100 mM, water last."""
    ladder = make_dilution_series(FLUORESCEIN_STOCK, 10, 11)
    wells = tuple((i + 1, Sample(c)) for i, c in enumerate(ladder)) + ((12, BLANK),)
    return PlateLayout(wells=wells, fold=10)


def gfp_layout(group_label: str) -> PlateLayout:
    """A 7-well GFP-yeast group: 5 fold-10 dilutions of a symbolic stock,
    then the non-fluorescent control and a water blank."""
    ladder = make_dilution_series(RelativeFactor(group_label), 10, 5)
    wells = tuple((i + 1, Sample(c)) for i, c in enumerate(ladder)) + ((6, CONTROL), (7, BLANK))
    return PlateLayout(wells=wells, fold=10)


class LayoutFormatError(ValueError):
    """Malformed layout config text."""


def parse_concentration(token: str) -> Concentration:
    """Concentration token: scientific notation mol/L or symbolic "m/100"."""
    token = token.strip()
    if not token:
        raise ValueError("empty concentration token")
    first = token[0]
    if first.isdigit() or first in "+-.":
        return MolarConcentration.from_molar(token)
    if "/" in token:
        symbol, _, divisor = token.partition("/")
        return RelativeFactor(symbol.strip(), int(divisor))
    return RelativeFactor(token)


def format_concentration(conc: Concentration) -> str:
    if isinstance(conc, MolarConcentration):
        return conc.to_scientific()
    return str(conc)


def parse_layout(text: str) -> PlateLayout:
    """Parse the line-oriented layout config format.

    One `fold,<n>` header line, then `well,<index>,<role>[,<conc>]` lines.
    Blank lines and `#` comments are skipped.
    """
    fold: int | None = None
    wells: list[tuple[int, WellRole]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            if fields[0] == "fold":
                fold = int(fields[1])
            elif fields[0] == "well":
                index = int(fields[1])
                kind = fields[2].lower()
                if kind == "sample":
                    wells.append((index, Sample(parse_concentration(fields[3]))))
                elif kind == "control":
                    wells.append((index, CONTROL))
                elif kind == "blank":
                    wells.append((index, BLANK))
                else:
                    raise ValueError(f"unknown role {fields[2]!r}")
            else:
                raise ValueError(f"unknown record {fields[0]!r}")
        except (IndexError, ValueError) as exc:
            raise LayoutFormatError(f"line {line_no}: {exc}") from exc
    if fold is None:
        raise LayoutFormatError("missing fold header line")
    if not wells:
        raise LayoutFormatError("layout defines no wells")
    return PlateLayout(wells=tuple(wells), fold=fold)


def format_layout(layout: PlateLayout) -> str:
    lines = [f"fold,{layout.fold}"]
    for index, role in layout.wells:
        if isinstance(role, Sample):
            lines.append(f"well,{index},sample,{format_concentration(role.concentration)}")
        else:
            lines.append(f"well,{index},{role_name(role)}")
    return "\n".join(lines) + "\n"
