"""Family-spec strings such as ``two-param:alpha=1/2,theta=0`` and ``kill:base=(ewens:theta=1),beta=2``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

from . import decrement as dm
from . import levy
from .arith import fmt, is_exact, parse_number

GRAMMAR = """family spec grammar:
  ewens:theta=T                      T >= 0
  two-param:alpha=A,theta=T          0 <= A < 1, T >= 0
  beta-sb:gamma=G,theta=T            G > 0, T > 0   (W ~ beta(G, T))
  hook:d=D                           D >= 0
  gamma-harmonic:theta=T             T > 0
  alpha-renewal:alpha=A              0 < A < 1
  drift:d=D                          D > 0
  kill:base=(SPEC),beta=B            B >= 0, in the base's raw units
  sliced:base=(SPEC),theta=T         T >= 0
numbers: "1/2" and "3" are exact, "0.5" is a float"""


class FamilyError(ValueError):
    """Malformed or out-of-range family spec."""


@dataclass(frozen=True)
class Family:
    params: Tuple[str, ...]
    model: Callable[..., levy.LevyModel]
    matrix: Optional[Callable[..., dm.DecrementMatrix]] = None


FAMILIES: Dict[str, Family] = {
    "ewens": Family(("theta",), levy.ewens, dm.ewens),
    "two-param": Family(("alpha", "theta"), levy.TwoParameter, dm.two_param),
    "beta-sb": Family(("gamma", "theta"), levy.BetaStick, dm.beta_sb),
    "hook": Family(("d",), levy.Hook, dm.hook),
    "gamma-harmonic": Family(("theta",), levy.GammaHarmonic, dm.gamma_harmonic),
    "alpha-renewal": Family(("alpha",), lambda alpha: levy.TwoParameter(alpha, 0), dm.alpha_renewal),
    "drift": Family(("d",), levy.Drift),
    "kill": Family(("base", "beta"), levy.kill_deform),
    "sliced": Family(("base", "theta"), levy.sliced_transform),
}

# families exercised by "--families all"
STANDARD = (
    "ewens:theta=1/2",
    "ewens:theta=1",
    "ewens:theta=2",
    "two-param:alpha=1/2,theta=0",
    "two-param:alpha=1/2,theta=1/2",
    "two-param:alpha=3/10,theta=7/10",
    "beta-sb:gamma=2,theta=3",
    "hook:d=1",
    "gamma-harmonic:theta=1",
)


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: Tuple[Tuple[str, object], ...]

    def __getitem__(self, key):
        return dict(self.params)[key]

    def __str__(self) -> str:
        parts = []
        for key, value in self.params:
            text = f"({value})" if isinstance(value, FamilySpec) else fmt(value)
            parts.append(f"{key}={text}")
        return f"{self.name}:{','.join(parts)}"

    @property
    def exact(self) -> bool:
        return all(v.exact if isinstance(v, FamilySpec) else is_exact(v) for _, v in self.params)

    def as_float(self) -> "FamilySpec":
        return FamilySpec(self.name, tuple(
            (k, v.as_float() if isinstance(v, FamilySpec) else float(v)) for k, v in self.params))


def _split_top(text: str) -> list:
    """Split on commas that are not inside parentheses."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise FamilyError(f"unbalanced parentheses in {text!r}")
        elif ch == "," and depth == 0:
            out.append(text[start:i])
            start = i + 1
    if depth:
        raise FamilyError(f"unbalanced parentheses in {text!r}")
    out.append(text[start:])
    return out


def parse_family(text: str) -> FamilySpec:
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in FAMILIES:
        raise FamilyError(f"unknown family {name!r}")
    family = FAMILIES[name]
    given = {}
    for item in _split_top(rest) if rest.strip() else []:
        key, eq, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not value:
            raise FamilyError(f"expected key=value, got {item!r}")
        if key not in family.params:
            raise FamilyError(f"{name} takes {', '.join(family.params)}; got {key!r}")
        if key in given:
            raise FamilyError(f"duplicate parameter {key!r}")
        if key == "base":
            if not (value.startswith("(") and value.endswith(")")):
                raise FamilyError("base must be parenthesised: base=(SPEC)")
            given[key] = parse_family(value[1:-1])
        else:
            try:
                given[key] = parse_number(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise FamilyError(f"bad number {value!r} for {key}") from exc
    missing = [k for k in family.params if k not in given]
    if missing:
        raise FamilyError(f"{name} is missing {', '.join(missing)}")
    spec = FamilySpec(name, tuple((k, given[k]) for k in family.params))
    build_model(spec)  # surfaces the constructor's range errors
    return spec


def _as_spec(spec) -> FamilySpec:
    return parse_family(spec) if isinstance(spec, str) else spec


def _args(spec: FamilySpec) -> list:
    return [build_model(v) if isinstance(v, FamilySpec) else v for _, v in spec.params]


def build_model(spec) -> levy.LevyModel:
    spec = _as_spec(spec)
    try:
        return FAMILIES[spec.name].model(*_args(spec))
    except ValueError as exc:
        raise FamilyError(f"{spec}: {exc}") from exc


def build_decrement(spec, N: int, backend: str = "exact") -> dm.DecrementMatrix:
    """Decrement matrix up to level N, from the closed form when the family has one."""
    spec = _as_spec(spec)
    if backend not in ("exact", "float"):
        raise FamilyError(f"unknown backend {backend!r}")
    if backend == "exact" and not spec.exact:
        raise FamilyError(f"{spec} has decimal parameters; the exact backend needs fractions like 1/2")
    if backend == "float":
        spec = spec.as_float()
    family = FAMILIES[spec.name]
    try:
        if family.matrix is not None:
            q = family.matrix(*_args(spec), N)
        else:
            q = dm.from_levy(build_model(spec), N)
    except ValueError as exc:
        raise FamilyError(f"{spec}: {exc}") from exc
    if backend == "exact" and q.backend != "exact":
        raise FamilyError(f"{spec} has an irrational decrement matrix; use --backend float")
    q.label = str(spec)
    return q


def two_param_params(spec):
    """(alpha, theta) when the family belongs to the two-parameter class, else None."""
    spec = _as_spec(spec)
    if spec.name == "ewens":
        return Fraction(0), spec["theta"]
    if spec.name == "two-param":
        return spec["alpha"], spec["theta"]
    if spec.name == "alpha-renewal":
        return spec["alpha"], Fraction(0)
    return None


def structural_law(spec) -> levy.StructuralLaw:
    tp = two_param_params(spec)
    if tp is not None:
        return levy.StructuralLaw.two_param(*tp)
    return levy.StructuralLaw.from_model(build_model(spec))


def model_spec_string(model: levy.LevyModel) -> str:
    """Canonical spec for a model built from a named family."""
    name = model.name
    params = model.params()
    if isinstance(model, levy.TwoParameter) and model.alpha == 0:
        return str(FamilySpec("ewens", (("theta", model.theta),)))
    if name not in FAMILIES or set(params) != set(FAMILIES[name].params):
        raise FamilyError(f"{model!r} has no family spec")
    items = []
    for key in FAMILIES[name].params:
        value = params[key]
        items.append((key, parse_family(model_spec_string(value)) if isinstance(value, levy.LevyModel) else value))
    return str(FamilySpec(name, tuple(items)))


def expand_families(text: str) -> list:
    """'all' or a ';'-separated list of specs."""
    if text.strip() == "all":
        return [parse_family(s) for s in STANDARD]
    return [parse_family(s) for s in text.split(";") if s.strip()]
