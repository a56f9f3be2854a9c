"""Diagonal systems ``y' = diag(a_1(t), ..., a_n(t)) y`` and the builtin catalog."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

from .errors import ConfigError
from .expr import BinOp, CoefficientFunction, Neg, Num, Var
from .quad import START_GAP


@dataclass(frozen=True)
class DiagonalSystem:
    name: str
    coefficients: tuple
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if not coeffs:
            raise ValueError("a diagonal system needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))

    @property
    def dimension(self):
        return len(self.coefficients)

    @property
    def exact(self):
        return all(c.has_antiderivative for c in self.coefficients)

    def shifted(self, lam):
        """The system with every ``a_j`` replaced by ``a_j + lam``."""
        return DiagonalSystem(f"{self.name}+({lam!r})",
                              [shift_coefficient(c, lam) for c in self.coefficients],
                              self.parameters)


def _lit(x):
    x = float(x)
    return Num(x) if x >= 0 else Neg(Num(-x))


def shift_coefficient(f: CoefficientFunction, lam) -> CoefficientFunction:
    body = BinOp("+", f.body, _lit(lam))
    anti = None
    if f.antiderivative is not None:
        anti = BinOp("+", f.antiderivative, BinOp("*", _lit(lam), Var()))
    return CoefficientFunction(body, anti, f.domain_start, f"{f}+({lam!r})")


def constant_coefficient(c) -> CoefficientFunction:
    return CoefficientFunction(_lit(c), BinOp("*", _lit(c), Var()), 0.0, repr(float(c)))


def from_expressions(bodies: Sequence[str], antiderivatives: Optional[Sequence] = None,
                     name="inline", domain_start=0.0) -> DiagonalSystem:
    """Build a system from expression strings; missing antiderivatives may be ``None``."""
    antis = list(antiderivatives or [])
    if len(antis) > len(bodies):
        raise ValueError("more antiderivatives than coefficients")
    antis += [None] * (len(bodies) - len(antis))
    coeffs = [CoefficientFunction.from_text(b, a, domain_start) for b, a in zip(bodies, antis)]
    return DiagonalSystem(name, coeffs)


def _n(x):
    return f"({float(x)!r})"


def _planar_nubg(p):
    w1, w2 = _n(p["omega1"]), _n(p["omega2"])
    return [
        CoefficientFunction.from_text("sin(ln(t))+cos(ln(t))", "t*sin(ln(t))", START_GAP),
        CoefficientFunction.from_text(f"{w1}-{w2}*t*sin(t)",
                                      f"{w1}*t+{w2}*t*cos(t)-{w2}*sin(t)"),
    ]


def _intro_diagonal(p):
    w1, w2 = _n(p["omega1"]), _n(p["omega2"])
    return [
        CoefficientFunction.from_text(w1, f"{w1}*t"),
        CoefficientFunction.from_text(f"{w2}*t*sin(t)", f"{w2}*(sin(t)-t*cos(t))"),
    ]


def _no_ubg(p):
    return [CoefficientFunction.from_text("t*sin(t)+1", "sin(t)-t*cos(t)+t")]


def _no_ubg_literal(p):
    return [CoefficientFunction.from_text("t*(sin(t)+1)", "sin(t)-t*cos(t)+t^2/2")]


def _constant(p):
    n = max(int(k[1:]) for k in p)
    return [constant_coefficient(p.get(f"c{i}", 0.0)) for i in range(1, n + 1)]


CATALOG = MappingProxyType({
    "planar-nubg": (_planar_nubg, {"omega1": 4.0, "omega2": 2.0}),
    "intro-diagonal": (_intro_diagonal, {"omega1": 4.0, "omega2": 2.0}),
    "no-ubg-scalar": (_no_ubg, {}),
    "no-ubg-scalar-literal": (_no_ubg_literal, {}),
    "constant": (_constant, {"c1": 0.0}),
})

_CONST_KEY = re.compile(r"c[1-9][0-9]*$")


def builtin(name: str, overrides: Optional[Mapping[str, float]] = None) -> DiagonalSystem:
    """Materialize a catalog entry; ``overrides`` may only touch declared parameters.

    ``constant`` accepts ``c1``, ``c2``, ...; its dimension is the largest index
    given, unset entries being 0.
    """
    if name not in CATALOG:
        raise ConfigError(f"unknown builtin system; choose one of {', '.join(CATALOG)}", "builtin")
    make, defaults = CATALOG[name]
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        ok = key in defaults or (name == "constant" and _CONST_KEY.match(key))
        if not ok:
            allowed = "c1, c2, ..." if name == "constant" else (", ".join(defaults) or "none")
            raise ConfigError(f"unknown parameter for {name!r} (allowed: {allowed})", key)
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError("parameter must be finite", key)
        params[key] = value
    return DiagonalSystem(name, make(params), params)
