"""Lévy data of multiplicative subordinators: Laplace exponents, binomial moments,
the kill and slice deformations, and the inverse problem from one-block moments.

Every model splits its raw exponent as ``raw = scale * shape``. The shape part is
exact whenever the parameters are rational; the scale may be irrational (Gamma
values) and is only needed when raw, unnormalized values are requested. All
decrement matrices depend on the shape alone.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from scipy import integrate, special

from .arith import FLOAT_TOL, binom, is_exact, num, rising

QUAD_ABS_TOL = 1e-12


class LevyModel:
    """Drift + measure on (0,1] described through its binomial moments."""

    name = "levy"

    def __init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    # -- to be provided by subclasses
    scale = Fraction(1)

    def shape_moment(self, n: int, m: int):
        raise NotImplementedError

    def raw_phi(self, rho: float) -> float:
        """Unnormalized exponent at a real argument (float)."""
        return float(self.scale) * float(self.shape_phi_real(rho))

    def shape_phi_real(self, rho: float):
        if float(rho).is_integer():
            return self.shape_phi(int(rho))
        raise ValueError(f"{self.name}: exponent at non-integer argument is not available")

    def params(self) -> dict:
        return {}

    # -- derived quantities
    def _memo(self, key, fn):
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = fn()
        with self._lock:
            self._cache.setdefault(key, value)
        return self._cache[key]

    def shape_phi(self, n: int):
        if n == 0:
            return Fraction(0)
        return self._memo(("phi", n), lambda: sum((self.shape_moment(n, m) for m in range(1, n + 1)), Fraction(0)))

    def phi(self, n: int):
        """Normalized exponent, phi(1) = 1."""
        if n == 0:
            return Fraction(0)
        return self.shape_phi(n) / self.shape_phi(1)

    def moment(self, n: int, m: int):
        """Normalized binomial moment Phi(n:m) / Phi(1)."""
        return self._memo(("mom", n, m), lambda: self.shape_moment(n, m)) / self.shape_phi(1)

    def q(self, n: int, m: int):
        return self._memo(("mom", n, m), lambda: self.shape_moment(n, m)) / self.shape_phi(n)

    def phi_sequence(self, N: int) -> List:
        """[0, phi(1), ..., phi(N)], normalized."""
        return [self.phi(n) for n in range(N + 1)]

    def exact_phi_ratio(self, rho, base) -> Optional[object]:
        """phi(rho)/phi(base) exactly if possible, else None."""
        if is_exact(rho) and is_exact(base) and Fraction(rho).denominator == 1 and Fraction(base).denominator == 1:
            return self.shape_phi(int(rho)) / self.shape_phi(int(base))
        return None

    def phi_ratio(self, rho, base):
        r = self.exact_phi_ratio(rho, base)
        if r is not None:
            return r
        return self.raw_phi(float(rho)) / self.raw_phi(float(base))

    @property
    def exact(self) -> bool:
        return is_exact(self.shape_moment(1, 1)) and is_exact(self.shape_moment(2, 1))

    def levy_density(self, x: float) -> float:
        """Density of the multiplicative Lévy measure on (0,1), raw units."""
        raise NotImplementedError(f"{self.name} has no density")

    drift_raw = 0.0
    atom_at_one_raw = 0.0

    def spec(self) -> str:
        from .families import model_spec_string

        return model_spec_string(self)

    def __repr__(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class TwoParameter(LevyModel):
    """Tail nu[x,1] = x^-alpha (1-x)^theta; (0, theta) is Ewens, theta = 0 has a unit atom at 1."""

    name = "two-param"

    def __init__(self, alpha, theta):
        super().__init__()
        self.alpha, self.theta = num(alpha), num(theta)
        if not (0 <= self.alpha < 1) or self.theta < 0:
            raise ValueError(f"two-parameter family needs 0 <= alpha < 1, theta >= 0 (got {alpha}, {theta})")
        a, t = self.alpha, self.theta
        if a == 0:
            self.scale = Fraction(1)
        else:
            self.scale = math.exp(math.lgamma(1 - a) + math.lgamma(1 + t) - math.lgamma(1 - a + t))

    def params(self):
        return {"alpha": self.alpha, "theta": self.theta}

    def shape_moment(self, n, m):
        a, t = self.alpha, self.theta
        body = a * rising(1 - a, m - 1) * rising(1 + t, n - m) + rising(1 - a, m) * rising(t, n - m)
        return binom(n, m) * body / rising(1 - a + t, n)

    def raw_phi(self, rho):
        a, t = float(self.alpha), float(self.theta)
        rho = float(rho)
        return rho * math.exp(math.lgamma(1 - a) + math.lgamma(rho + t) - math.lgamma(rho + 1 - a + t))

    def exact_phi_ratio(self, rho, base):
        if not (is_exact(rho) and is_exact(base) and is_exact(self.alpha) and is_exact(self.theta)):
            return None
        k = Fraction(rho) - Fraction(base)
        if k.denominator != 1 or k < 0:
            return None
        k = int(k)
        a, t = self.alpha, self.theta
        return Fraction(rho) / base * rising(base + t, k) / rising(base + 1 - a + t, k)

    def levy_density(self, x):
        a, t = float(self.alpha), float(self.theta)
        return a * x ** (-a - 1) * (1 - x) ** t + t * x ** (-a) * (1 - x) ** (t - 1)

    @property
    def atom_at_one_raw(self):
        return 1.0 if self.theta == 0 else 0.0


def ewens(theta) -> TwoParameter:
    return TwoParameter(0, theta)


class StickBreaking(LevyModel):
    """Probability measure of the stick-breaking factor W, no drift.

    ``moments(i, j)`` must return E[W^i (1-W)^j].
    """

    name = "stick"

    def __init__(self, moments: Callable[[int, int], object], raw_phi: Optional[Callable[[float], float]] = None,
                 density: Optional[Callable[[float], float]] = None, label: str = "custom"):
        super().__init__()
        self._moments = moments
        self._raw_phi = raw_phi
        self._density = density
        self.label = label

    def shape_moment(self, n, m):
        return binom(n, m) * self._moments(m, n - m)

    def raw_phi(self, rho):
        if self._raw_phi is not None:
            return float(self._raw_phi(float(rho)))
        if float(rho).is_integer():
            return float(self.shape_phi(int(rho)))
        if self._density is None:
            raise ValueError("custom stick-breaking law without density: only integer arguments")
        val, _ = integrate.quad(lambda x: (1 - (1 - x) ** rho) * self._density(x), 0, 1, epsabs=QUAD_ABS_TOL, limit=200)
        return val

    def levy_density(self, x):
        if self._density is None:
            raise NotImplementedError("no density given")
        return self._density(x)

    def params(self):
        return {"law": self.label}


class BetaStick(StickBreaking):
    """W ~ beta(gamma, theta)."""

    name = "beta-sb"

    def __init__(self, gamma, theta):
        self.gamma, self.theta = num(gamma), num(theta)
        if self.gamma <= 0 or self.theta <= 0:
            raise ValueError("beta stick-breaking needs gamma > 0, theta > 0")
        g, t = self.gamma, self.theta
        super().__init__(lambda i, j: rising(g, i) * rising(t, j) / rising(g + t, i + j), label=f"beta({g},{t})")

    def params(self):
        return {"gamma": self.gamma, "theta": self.theta}

    def raw_phi(self, rho):
        g, t = float(self.gamma), float(self.theta)
        rho = float(rho)
        return 1 - math.exp(special.betaln(g, t + rho) - special.betaln(g, t))

    def levy_density(self, x):
        g, t = float(self.gamma), float(self.theta)
        return math.exp((g - 1) * math.log(x) + (t - 1) * math.log1p(-x) - special.betaln(g, t))


def point_stick(x) -> StickBreaking:
    """Deterministic factor W = x (geometric paintbox)."""
    x = num(x)
    if not (0 < x <= 1):
        raise ValueError("point mass must lie in (0, 1]")
    return StickBreaking(lambda i, j: x ** i * (1 - x) ** j, raw_phi=lambda r: 1 - (1 - float(x)) ** r, label=f"point({x})")


def density_stick(pdf: Callable[[float], float], label: str = "density") -> StickBreaking:
    """W with a density on (0,1); moments by adaptive quadrature."""

    def moments(i, j):
        val, _ = integrate.quad(lambda x: x ** i * (1 - x) ** j * pdf(x), 0, 1, epsabs=QUAD_ABS_TOL, limit=200)
        return val

    return StickBreaking(moments, density=pdf, label=label)


class Hook(LevyModel):
    """Drift d plus unit atom at 1."""

    name = "hook"

    def __init__(self, d):
        super().__init__()
        self.d = num(d)
        if self.d < 0:
            raise ValueError("drift must be >= 0")

    def params(self):
        return {"d": self.d}

    def shape_moment(self, n, m):
        out = n * self.d if m == 1 else 0 * self.d
        if m == n:
            out += 1
        return out

    def raw_phi(self, rho):
        return float(rho) * float(self.d) + 1.0

    def levy_density(self, x):
        return 0.0

    drift_raw = property(lambda self: float(self.d))
    atom_at_one_raw = 1.0


class Drift(LevyModel):
    """Pure drift, all singletons."""

    name = "drift"

    def __init__(self, d=1):
        super().__init__()
        self.d = num(d)
        if self.d <= 0:
            raise ValueError("pure drift needs d > 0")

    def params(self):
        return {"d": self.d}

    def shape_moment(self, n, m):
        return n * self.d if m == 1 else 0 * self.d

    def raw_phi(self, rho):
        return float(rho) * float(self.d)

    def levy_density(self, x):
        return 0.0

    drift_raw = property(lambda self: float(self.d))


class GammaHarmonic(LevyModel):
    """Infinite measure x^-1 (1-x)^(theta-1) dx."""

    name = "gamma-harmonic"

    def __init__(self, theta):
        super().__init__()
        self.theta = num(theta)
        if self.theta <= 0:
            raise ValueError("gamma-harmonic needs theta > 0")

    def params(self):
        return {"theta": self.theta}

    def shape_moment(self, n, m):
        t = self.theta
        return binom(n, m) * math.factorial(m - 1) * rising(t, n - m) / rising(t, n)

    def raw_phi(self, rho):
        t = float(self.theta)
        return float(special.digamma(float(rho) + t) - special.digamma(t))

    def levy_density(self, x):
        return (1 - x) ** (float(self.theta) - 1) / x


class Killed(LevyModel):
    """base + beta * delta_1 (beta in the raw units of the base measure)."""

    name = "kill"

    def __init__(self, base: LevyModel, beta):
        super().__init__()
        self.base, self.beta = base, num(beta)
        if self.beta < 0:
            raise ValueError("kill mass must be >= 0")
        self.scale = base.scale

    def params(self):
        return {"base": self.base, "beta": self.beta}

    def shape_moment(self, n, m):
        out = self.base.shape_moment(n, m)
        if m == n:
            out = out + self.beta / self.scale
        return out

    def raw_phi(self, rho):
        return self.base.raw_phi(rho) + float(self.beta)

    def levy_density(self, x):
        return self.base.levy_density(x)

    drift_raw = property(lambda self: self.base.drift_raw)
    atom_at_one_raw = property(lambda self: self.base.atom_at_one_raw + float(self.beta))


class Sliced(LevyModel):
    """Exponent rho/(rho+theta) * Phi(rho+theta); moments by iterated differences."""

    name = "sliced"

    def __init__(self, base: LevyModel, theta):
        super().__init__()
        self.base, self.theta = base, num(theta)
        if self.theta < 0:
            raise ValueError("slice rate must be >= 0")
        t = self.theta
        self.scale = base.raw_phi(1 + t) / (1 + float(t)) if t != 0 else base.scale

    def params(self):
        return {"base": self.base, "theta": self.theta}

    def shape_phi(self, n):
        if n == 0:
            return Fraction(0)
        return self._memo(("phi", n), lambda: self._sliced_phi(n))

    def _sliced_phi(self, n):
        t = self.theta
        if t == 0:
            return self.base.phi(n)
        ratio = self.base.phi_ratio(n + t, 1 + t)
        return n * (1 + t) / (n + t) * ratio

    def shape_moment(self, n, m):
        seq = [self.shape_phi(j) for j in range(n + 1)]
        return phi_iterated_differences(seq, n, m)

    def raw_phi(self, rho):
        t = float(self.theta)
        rho = float(rho)
        return rho / (rho + t) * self.base.raw_phi(rho + t)


class MomentCallback(LevyModel):
    """User-supplied binomial moments Phi(n:m)."""

    name = "custom"

    def __init__(self, fn: Callable[[int, int], object], raw_phi: Optional[Callable[[float], float]] = None):
        super().__init__()
        self._fn, self._raw = fn, raw_phi

    def shape_moment(self, n, m):
        v = self._fn(n, m)
        if v < 0:
            raise ValueError(f"negative binomial moment at ({n},{m})")
        return v

    def raw_phi(self, rho):
        if self._raw is not None:
            return float(self._raw(float(rho)))
        return super().raw_phi(rho)


# ---------------------------------------------------------------- operations

def laplace_exponent(model: LevyModel, rho, normalized: bool = False):
    """Phi(rho). Integer arguments of the normalized exponent are exact."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if normalized:
        if is_exact(rho) and Fraction(rho).denominator == 1:
            return model.phi(int(rho))
        return model.raw_phi(float(rho)) / model.raw_phi(1.0)
    if is_exact(rho) and Fraction(rho).denominator == 1 and is_exact(model.scale):
        return model.scale * model.shape_phi(int(rho))
    return model.raw_phi(float(rho))


def binomial_moment(model: LevyModel, n: int, m: int, normalized: bool = False):
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if normalized:
        return model.moment(n, m)
    return model.scale * model.shape_moment(n, m)


def sliced_transform(model: LevyModel, theta) -> LevyModel:
    return Sliced(model, theta)


def kill_deform(model: LevyModel, beta) -> LevyModel:
    return Killed(model, beta)


def phi_iterated_differences(phi: Sequence, n: int, m: int):
    """Phi(n:m) = C(n,m) sum_j (-1)^(j+1) C(m,j) Phi(n-m+j), with phi[0] = 0."""
    if phi[0] != 0:
        raise ValueError("sequence must start with Phi(0) = 0")
    if not 1 <= m <= n < len(phi):
        raise ValueError(f"need 1 <= m <= n <= {len(phi) - 1}")
    total = 0 * phi[1]
    for j in range(m + 1):
        term = binom(m, j) * phi[n - m + j]
        total += term if j % 2 == 1 else -term
    return binom(n, m) * total


def check_completely_alternating(phi: Sequence, tol: float = 0.0) -> Tuple[bool, Optional[Tuple[int, int, object]]]:
    """True iff every Phi(n:m) >= 0; otherwise the first (n, m, value) violation."""
    for n in range(1, len(phi)):
        for m in range(1, n + 1):
            v = phi_iterated_differences(phi, n, m)
            if v < -tol:
                return False, (n, m, v)
    return True, None


class StructuralLaw:
    """Law of the size-biased gap, through its moments p(n) = E[P^(n-1)]."""

    def __init__(self, moment_fn: Callable[[int], object], beta_params: Optional[Tuple] = None, label: str = "custom"):
        self._fn = moment_fn
        self.beta_params = beta_params
        self.label = label
        self._cache = {}

    def p(self, n: int):
        if n < 1:
            raise ValueError("moments indexed from n = 1")
        if n not in self._cache:
            self._cache[n] = self._fn(n)
        return self._cache[n]

    def complement_moment(self, j: int):
        """E[(1-P)^j]."""
        if self.beta_params is not None:
            a, b = self.beta_params
            return rising(b, j) / rising(a + b, j)
        return sum(((-1) ** i * binom(j, i) * self.p(i + 1) for i in range(j + 1)), 0 * self.p(1))

    def mixed_moment(self, i: int, j: int):
        """E[P^i (1-P)^j]."""
        if self.beta_params is not None:
            a, b = self.beta_params
            return rising(a, i) * rising(b, j) / rising(a + b, i + j)
        return sum(((-1) ** l * binom(j, l) * self.p(i + l + 1) for l in range(j + 1)), 0 * self.p(1))

    def is_completely_monotone(self, N: int, tol: float = 0.0) -> bool:
        seq = [self.p(n) for n in range(1, N + 1)]
        for order in range(len(seq)):
            for start in range(len(seq) - order):
                d = sum(((-1) ** i * binom(order, i) * seq[start + i] for i in range(order + 1)), 0 * seq[0])
                if d < -tol:
                    return False
        return True

    @classmethod
    def beta(cls, a, b) -> "StructuralLaw":
        a, b = num(a), num(b)
        return cls(lambda n: rising(a, n - 1) / rising(a + b, n - 1), beta_params=(a, b), label=f"beta({a},{b})")

    @classmethod
    def one_block(cls) -> "StructuralLaw":
        return cls(lambda n: Fraction(1), label="one-block")

    @classmethod
    def two_param(cls, alpha, theta) -> "StructuralLaw":
        alpha, theta = num(alpha), num(theta)
        return cls.beta(1 - alpha, theta + alpha)

    @classmethod
    def from_model(cls, model: LevyModel) -> "StructuralLaw":
        return cls(lambda n: model.q(n, n), label=f"from {model!r}")

    @classmethod
    def from_moments(cls, seq: Sequence) -> "StructuralLaw":
        """seq[0] = p(1), seq[1] = p(2), ..."""
        return cls(lambda n: seq[n - 1], label="tabulated")


def phi_from_moments(p, N: int) -> List:
    """Recover the normalized exponent [0, Phi(1), ..., Phi(N)] from one-block probabilities.

    ``p`` is a StructuralLaw or a sequence with p[0] = p(1) = 1. When p(n) = 1 at an
    odd n the recursion is 0 = 0; the structure is then one-block at that level and
    Phi(n) = Phi(n-1) is forced by Phi(n:1) = 0.
    """
    get = p.p if isinstance(p, StructuralLaw) else (lambda n: p[n - 1])
    if get(1) != 1:
        raise ValueError("p(1) must equal 1")
    phi = [Fraction(0), Fraction(1)]
    for n in range(2, N + 1):
        pn = get(n)
        rhs = sum(((-1) ** (j + 1) * binom(n, j) * phi[j] for j in range(1, n)), 0 * pn)
        coeff = pn + (-1) ** n
        if coeff == 0 or (not is_exact(coeff) and abs(coeff) < FLOAT_TOL):
            if pn == 1 or (not is_exact(pn) and abs(pn - 1) < FLOAT_TOL):
                phi.append(phi[n - 1])
                continue
            raise ZeroDivisionError(f"degenerate moment p({n}) = {pn}")
        phi.append(rhs / coeff)
    return phi


def q32_from_moments(p2, p3):
    """Closed rational expression of q(3:2) through p(2), p(3)."""
    return (2 * p2 - 3 * p3 + p2 * p3) / (1 - p2)
