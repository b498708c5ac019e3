"""
対数領域の大きさ表現（LogForm）

log(value) = const + Σ coef_i · L_i の線形形式で保持する。
L_i = log(1/p_i) は記号スケールで、その対数 log L_i 自体も下位スケールの
LogForm としてスケール表に登録される。係数は Fraction なので、同じスケールを
含む形式の差は厳密に打ち消し合う。

評価は mpmath で行い、exp が作業範囲を超えるスケールを含むときは
最上位スケールの係数の符号で大小を決める（L_{i+1} は L_i の任意の多項式より
はるかに大きい）。
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple, Union

import mpmath

# exp を実際に評価する上限（これを超える指数は記号のまま扱う）
EXP_CAP = mpmath.mpf(2) ** 53

Number = Union[int, float, str, "mpmath.mpf"]


@dataclass(frozen=True)
class LogForm:
    """log(value) = const + Σ coef·L_level"""

    const: mpmath.mpf = field(default_factory=lambda: mpmath.mpf(0))
    terms: Tuple[Tuple[int, Fraction], ...] = ()

    @classmethod
    def constant(cls, value: Number) -> "LogForm":
        return cls(mpmath.mpf(value), ())

    @classmethod
    def scale(cls, level: int, coef=1) -> "LogForm":
        return cls(mpmath.mpf(0), ((level, Fraction(coef)),))

    @classmethod
    def _build(cls, const, coefs: Mapping[int, Fraction]) -> "LogForm":
        terms = tuple(sorted((k, c) for k, c in coefs.items() if c != 0))
        return cls(mpmath.mpf(const), terms)

    @property
    def is_numeric(self) -> bool:
        return not self.terms

    def __add__(self, other) -> "LogForm":
        if not isinstance(other, LogForm):
            return LogForm(self.const + mpmath.mpf(other), self.terms)
        coefs: Dict[int, Fraction] = dict(self.terms)
        for k, c in other.terms:
            coefs[k] = coefs.get(k, Fraction(0)) + c
        return LogForm._build(self.const + other.const, coefs)

    __radd__ = __add__

    def __neg__(self) -> "LogForm":
        return LogForm(-self.const, tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other) -> "LogForm":
        if not isinstance(other, LogForm):
            return self + (-mpmath.mpf(other))
        return self + (-other)

    def __rsub__(self, other) -> "LogForm":
        return (-self) + other

    def __mul__(self, factor) -> "LogForm":
        f = Fraction(factor)
        return LogForm._build(
            self.const * mpmath.mpf(f.numerator) / f.denominator,
            {k: c * f for k, c in self.terms},
        )

    __rmul__ = __mul__

    def leading(self) -> Optional[Tuple[int, Fraction]]:
        """最上位スケールの (level, coef)"""
        return self.terms[-1] if self.terms else None

    def evaluate(self, scales: Mapping[int, "LogForm"]) -> Optional[mpmath.mpf]:
        """
        数値評価

        Returns:
            mpf。スケールの exp が EXP_CAP を超える場合は None
        """
        total = self.const
        for level, coef in self.terms:
            log_scale = scales[level].evaluate(scales)
            if log_scale is None or log_scale > EXP_CAP:
                return None
            total += mpmath.mpf(coef.numerator) / coef.denominator * mpmath.exp(log_scale)
        return total

    def sign(self, scales: Mapping[int, "LogForm"], slack=0) -> int:
        """符号（|value| <= slack は 0）"""
        value = self.evaluate(scales)
        if value is None:
            lead = self.leading()
            assert lead is not None
            return 1 if lead[1] > 0 else -1
        if abs(value) <= slack:
            return 0
        return 1 if value > 0 else -1

    def log_value(self, scales: Mapping[int, "LogForm"]) -> Optional[mpmath.mpf]:
        """
        log(value)（value > 0 の場合）

        評価できない形式では最上位項 coef·L_i で近似する。
        """
        value = self.evaluate(scales)
        if value is not None:
            return mpmath.log(value) if value > 0 else None
        lead = self.leading()
        if lead is None or lead[1] <= 0:
            return None
        log_scale = scales[lead[0]].evaluate(scales)
        if log_scale is None:
            return None
        return mpmath.log(mpmath.mpf(lead[1].numerator) / lead[1].denominator) + log_scale

    def to_dict(self) -> dict:
        return {
            "const": mpmath.nstr(self.const, mpmath.mp.dps),
            "terms": {str(k): f"{c.numerator}/{c.denominator}" for k, c in self.terms},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LogForm":
        return cls._build(
            mpmath.mpf(data["const"]),
            {int(k): Fraction(v) for k, v in data.get("terms", {}).items()},
        )

    def __str__(self) -> str:
        parts = [mpmath.nstr(self.const, 12)]
        for k, c in self.terms:
            parts.append(f"{'+' if c > 0 else '-'} {abs(c)}*L{k}")
        return " ".join(parts)


def form_max(a: LogForm, b: LogForm, scales: Mapping[int, LogForm]) -> LogForm:
    """大きい方の形式"""
    return a if (a - b).sign(scales) >= 0 else b


def log_of_scale(form: LogForm, scales: Mapping[int, LogForm]) -> LogForm:
    """
    L（数値または単一スケール）の対数 log L を LogForm で返す
    """
    if form.is_numeric:
        return LogForm.constant(mpmath.log(form.const))
    if len(form.terms) == 1 and form.terms[0][1] == 1 and form.const == 0:
        return scales[form.terms[0][0]]
    log_value = form.log_value(scales)
    if log_value is None:
        raise ValueError(f"log を評価できない形式: {form}")
    return LogForm.constant(log_value)
