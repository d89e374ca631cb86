"""Block counts K_n, K_{n,r}: exact expectations, Monte Carlo summaries and limit diagnostics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from .arith import binom, is_exact, num
from .combinat import Composition
from .decrement import DecrementMatrix
from .levy import LevyModel, StructuralLaw
from . import samplers as smp

R_MAX = 20


# ---------------------------------------------------------------- counting

@dataclass(frozen=True)
class BlockStats:
    n: int
    K: int
    Kr: Dict[int, int]
    M: Optional[int] = None

    def k_r(self, r: int) -> int:
        return self.Kr.get(r, 0)


def count_blocks(c, M: Optional[int] = None) -> BlockStats:
    c = Composition(c)
    counts: Dict[int, int] = {}
    for part in c:
        counts[part] = counts.get(part, 0) + 1
    assert sum(r * k for r, k in counts.items()) == c.n
    return BlockStats(c.n, c.k, dict(sorted(counts.items())), M)


# ---------------------------------------------------------------- exact expectations

def expected_Kn_dp(q: DecrementMatrix, n: int):
    """E[K_n] = 1 + sum_m q(n:m) E[K_{n-m}], E[K_0] = 0."""
    if n > q.N:
        raise ValueError(f"n={n} exceeds matrix level {q.N}")
    exact = q.backend == "exact"
    ek = [Fraction(0) if exact else 0.0]
    for s in range(1, n + 1):
        row = q.row(s)
        if exact:
            ek.append(1 + sum((row[m - 1] * ek[s - m] for m in range(1, s + 1)), Fraction(0)))
        else:
            r = np.asarray(row, dtype=float)
            prev = np.asarray(ek[s - 1::-1], dtype=float)  # E[K_{s-m}] for m = 1..s
            ek.append(1.0 + float(r @ prev))
    return ek[n]


def expected_Kn_structural(law: StructuralLaw, n: int):
    """E[K_n] = sum_{j<n} E[(1-P)^j]."""
    return sum((law.complement_moment(j) for j in range(n)), 0 * law.p(1))


def expected_Knr_structural(law: StructuralLaw, n: int, r: int):
    """E[K_{n,r}] = C(n,r) E[P^(r-1) (1-P)^(n-r)]."""
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    return binom(n, r) * law.mixed_moment(r - 1, n - r)


def exp_functional_moments(model: LevyModel, alpha, k: int) -> float:
    """E[I_alpha^k] = k! / prod_{j=1}^k Phi(alpha j), with the model's unnormalized exponent."""
    out = 1.0
    for j in range(1, k + 1):
        phi = model.raw_phi(float(alpha) * j)
        if phi <= 0:
            raise ValueError(f"Phi({alpha}*{j}) = {phi} is not positive")
        out *= j / phi
    return out


def mittag_leffler_moment(alpha, theta, k: int) -> float:
    """Closed form prod_{j=1}^{k-1}(j alpha + theta) Gamma(theta+1) / (Gamma(k alpha + theta) (alpha Gamma(1-alpha))^k)."""
    a, t = float(alpha), float(theta)
    log = math.lgamma(t + 1) - math.lgamma(k * a + t) - k * math.log(a * math.gamma(1 - a))
    return math.exp(log) * math.prod(j * a + t for j in range(1, k))


# ---------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class SamplerSpec:
    """Which sampler mc_blocks runs, and with what parameters."""

    kind: str
    params: Tuple[Tuple[str, object], ...] = ()
    q: Optional[DecrementMatrix] = None

    KINDS = ("chain", "crp", "stickbreaking", "renewal", "bernoulli", "ordered-crp")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown sampler {self.kind!r}; choose from {', '.join(self.KINDS)}")
        if self.kind == "chain" and self.q is None:
            raise ValueError("chain sampler needs a decrement matrix")

    @property
    def has_gaps(self) -> bool:
        return self.kind == "stickbreaking"

    def draw(self, n: int, rng) -> Tuple[tuple, Optional[int]]:
        p = dict(self.params)
        if self.kind == "chain":
            return smp.sample_chain(self.q, n, rng), None
        if self.kind == "crp":
            return smp.sample_crp(p["alpha"], p["theta"], n, rng), None
        if self.kind == "stickbreaking":
            w = smp.point_w(p["w"]) if "w" in p else smp.beta_w(p["a"], p["b"])
            return smp.sample_stickbreaking(w, n, rng, with_gaps=True)
        if self.kind == "renewal":
            return smp.sample_renewal_composition(p["alpha"], n, rng), None
        if self.kind == "bernoulli":
            return smp.string_to_composition(smp.sample_bernoulli_string_dual_ewens(p["theta"], n, rng)), None
        return smp.sample_ordered_crp_alpha_alpha(p["alpha"], n, rng), None

    def __str__(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.kind}({args or (self.q.label if self.q is not None else '')})"


@dataclass(frozen=True)
class StatSummary:
    mean: float
    var: float
    se: float
    lo95: float
    hi95: float


@dataclass(frozen=True)
class McSummary:
    n: int
    reps: int
    seed: int
    sampler: str
    stats: Dict[str, StatSummary]
    samples: Dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def __getitem__(self, name: str) -> StatSummary:
        return self.stats[name]


def stat_names(r_max: int, with_gaps: bool) -> List[str]:
    names = ["K"] + [f"K_{r}" for r in range(1, r_max + 1)] + [f"K_>{r_max}"]
    return names + ["M"] if with_gaps else names


def _replicate_row(spec: SamplerSpec, n: int, seed: int, index: int, r_max: int) -> List[float]:
    comp, M = spec.draw(n, smp.RngStream(seed, index))
    stats = count_blocks(comp, M)
    row = [stats.K] + [stats.k_r(r) for r in range(1, r_max + 1)]
    row.append(sum(k for r, k in stats.Kr.items() if r > r_max))
    if spec.has_gaps:
        row.append(M)
    return row


def summarize(x: np.ndarray) -> StatSummary:
    reps = len(x)
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    se = math.sqrt(var / reps)
    return StatSummary(mean, var, se, mean - 1.959963984540054 * se, mean + 1.959963984540054 * se)


def mc_blocks(spec: SamplerSpec, n: int, reps: int, seed: int, r_max: int = R_MAX, workers: int = 1) -> McSummary:
    """Replicate i uses RngStream(seed, i); results are reduced in replicate order,
    so the summary does not depend on ``workers``."""
    if reps < 2:
        raise ValueError("need at least 2 replicates")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda i: _replicate_row(spec, n, seed, i, r_max), range(reps)))
    else:
        rows = [_replicate_row(spec, n, seed, i, r_max) for i in range(reps)]
    data = np.asarray(rows, dtype=float)
    names = stat_names(r_max, spec.has_gaps)
    return McSummary(n, reps, seed, str(spec), {name: summarize(data[:, j]) for j, name in enumerate(names)},
                     {name: data[:, j] for j, name in enumerate(names)})


# ---------------------------------------------------------------- stick-breaking moments and CLT

@dataclass(frozen=True)
class MomentSet:
    """m = E[-log(1-W)], sigma2 = Var[log(1-W)], m1 = E[-log W]."""

    m: float
    sigma2: float
    m1: float

    @property
    def degenerate(self) -> bool:
        return not (math.isfinite(self.m) and self.m > 0) or self.sigma2 <= 0 or not math.isfinite(self.sigma2)

    @classmethod
    def beta(cls, a, b) -> "MomentSet":
        a, b = float(a), float(b)
        return cls(
            m=float(special.digamma(a + b) - special.digamma(b)),
            sigma2=float(special.polygamma(1, b) - special.polygamma(1, a + b)),
            m1=float(special.digamma(a + b) - special.digamma(a)),
        )

    @classmethod
    def point(cls, x) -> "MomentSet":
        x = float(x)
        m = math.inf if x == 1 else -math.log1p(-x)
        return cls(m=m, sigma2=0.0, m1=-math.log(x))

    @classmethod
    def monte_carlo(cls, w_sampler: Callable[[np.random.Generator], float], reps: int, seed: int) -> "MomentSet":
        rng = smp.RngStream(seed).generator()
        w = np.array([w_sampler(rng) for _ in range(reps)])
        log1m = np.log1p(-w)
        return cls(m=float(-log1m.mean()), sigma2=float(log1m.var(ddof=1)), m1=float(-np.log(w).mean()))


@dataclass(frozen=True)
class CltReport:
    n: int
    reps: int
    moments: MomentSet
    mean_ratio: float
    var_ratio: float
    skew: float


def clt_case_a_diagnostic(a, b, n: int, reps: int, seed: int, workers: int = 1) -> CltReport:
    """Compare K_n for W ~ beta(a, b) with b_n = log n / m and a_n^2 = sigma2 m^-3 log n."""
    mom = MomentSet.beta(a, b)
    if mom.degenerate:
        raise ValueError("degenerate W: the normal limit needs 0 < m < inf and sigma2 > 0")
    spec = SamplerSpec("stickbreaking", (("a", a), ("b", b)))
    summary = mc_blocks(spec, n, reps, seed, r_max=1, workers=workers)
    k = summary.samples["K"]
    bn = math.log(n) / mom.m
    an2 = mom.sigma2 * math.log(n) / mom.m ** 3
    z = (k - bn) / math.sqrt(an2)
    zc = z - z.mean()
    skew = float(np.mean(zc ** 3) / np.mean(zc ** 2) ** 1.5) if np.any(zc) else 0.0
    return CltReport(n, reps, mom, float(k.mean()) / bn, float(k.var(ddof=1)) / an2, skew)


# ---------------------------------------------------------------- poissonised exponent

def _phi0(model: LevyModel, s: float) -> float:
    """Phi_0(s) = s d + int (1 - e^{-s x}) nu(dx) + atom (1 - e^{-s}), in log coordinates x = e^{-u}."""
    def integrand(u):
        x = math.exp(-u)
        return -math.expm1(-s * x) * model.levy_density(x) * x

    # the integrand is O(s e^{-u}) past u = log s, so 60 more units cover it to double precision
    split = max(math.log(s), 1.0) if s > 0 else 1.0
    a, _ = integrate.quad(integrand, 0, split, epsabs=0, epsrel=1e-10, limit=200)
    b, _ = integrate.quad(integrand, split, split + 60, epsabs=0, epsrel=1e-10, limit=200)
    out = a + b + s * float(model.drift_raw)
    atom = float(model.atom_at_one_raw)
    if atom:
        out += -math.expm1(-s) * atom
    return out


def phi012(model: LevyModel, n: float, lower: float = -60.0) -> Tuple[float, float, float]:
    """(Phi_0(n), Phi_1(n), Phi_2(n)) with Phi_k(n) = int_0^n Phi_0(s)^k ds / s.

    The outer integral runs in v = log s from ``lower``; below it the integrand is negligible.
    """
    phi0 = _phi0(model, float(n))

    def outer(k):
        val, _ = integrate.quad(lambda v: _phi0(model, math.exp(v)) ** k, lower, math.log(n),
                                epsabs=0, epsrel=1e-9, limit=400)
        return val

    return phi0, outer(1), outer(2)


def harmonic_float(n: int) -> float:
    return float(special.digamma(n + 1) + np.euler_gamma)


def ewens_mean_blocks(theta, n: int):
    """sum_{j=1}^n theta / (theta + j - 1)."""
    theta = num(theta)
    if is_exact(theta):
        return sum((theta / (theta + j - 1) for j in range(1, n + 1)), Fraction(0))
    return float(np.sum(theta / (theta + np.arange(n))))


def expected_Kn_beta(a: float, b: float, n: int) -> float:
    """E[K_n] for a beta(a, b) structural law in floating point: sum_{j<n} prod_{i<j} (b+i)/(a+b+i)."""
    i = np.arange(n - 1, dtype=float)
    terms = np.concatenate(([1.0], np.cumprod((b + i) / (a + b + i))))
    return float(terms.sum())


def expected_Knr_beta(a: float, b: float, n: int, r: int) -> float:
    """C(n,r) B(a+r-1, b+n-r) / B(a, b)."""
    log = (special.gammaln(n + 1) - special.gammaln(r + 1) - special.gammaln(n - r + 1)
           + special.betaln(a + r - 1, b + n - r) - special.betaln(a, b))
    return float(np.exp(log))
