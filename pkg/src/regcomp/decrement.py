"""Decrement matrices q(n:m) and everything computed from them."""

from __future__ import annotations

import io
import json
import math
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .arith import FLOAT_TOL, all_exact, binom, fmt, is_exact, num, rising
from .combinat import (
    Composition,
    DistributionTable,
    Partition,
    enumerate_compositions,
    enumerate_partitions,
    shape_count,
    symmetrize,
)
from .levy import LevyModel, phi_from_moments, phi_iterated_differences

ROW_TOL = 1e-10


class DecrementMatrix:
    """Rows q(n:.) for n = 1..N, each a probability vector on {1..n}.

    Rows are either given up front or produced on demand by ``row_fn`` (used for
    large float matrices). Either way the matrix is immutable from the outside.
    """

    def __init__(self, rows: Sequence[Sequence] = (), validate: bool = True, *,
                 row_fn: Optional[Callable[[int], Sequence]] = None, N: Optional[int] = None, label: str = ""):
        self._rows: Dict[int, tuple] = {}
        for n, row in enumerate(rows, start=1):
            self._rows[n] = tuple(num(x) if not isinstance(x, (float, np.floating)) else float(x) for x in row)
        self._row_fn = row_fn
        self.N = N if N is not None else len(self._rows)
        self.label = label
        self._lock = threading.Lock()
        self._cum: Dict[int, list] = {}
        if row_fn is None and self.N != len(self._rows):
            raise ValueError("N does not match the number of rows")
        if validate and self._rows:
            self._validate_rows()
            if self.N <= 60:
                bad = self.consistency_violation()
                if bad is not None:
                    raise ValueError(f"rows are not sampling consistent at n={bad}")

    @classmethod
    def lazy(cls, row_fn: Callable[[int], Sequence], N: int, label: str = "") -> "DecrementMatrix":
        return cls((), validate=False, row_fn=row_fn, N=N, label=label)

    # -- access
    def row(self, n: int) -> tuple:
        if not 1 <= n <= self.N:
            raise IndexError(f"row {n} outside 1..{self.N}")
        try:
            return self._rows[n]
        except KeyError:
            row = tuple(self._row_fn(n))
            with self._lock:
                self._rows.setdefault(n, row)
            return self._rows[n]

    def __call__(self, n: int, m: int):
        return self.row(n)[m - 1]

    def __getitem__(self, nm):
        n, m = nm
        return self(n, m)

    @property
    def rows(self) -> List[tuple]:
        return [self.row(n) for n in range(1, self.N + 1)]

    @property
    def backend(self) -> str:
        sample = [self.row(n) for n in range(1, min(self.N, 3) + 1)]
        return "exact" if all(all_exact(r) for r in sample) else "float"

    def cumulative(self, n: int) -> list:
        """Cumulative float row, cached for sampling."""
        try:
            return self._cum[n]
        except KeyError:
            cum = list(np.cumsum([float(x) for x in self.row(n)]))
            cum[-1] = max(cum[-1], 1.0)
            with self._lock:
                self._cum.setdefault(n, cum)
            return self._cum[n]

    def truncate(self, N: int) -> "DecrementMatrix":
        return DecrementMatrix([self.row(n) for n in range(1, N + 1)], validate=False, label=self.label)

    # -- validation
    def _validate_rows(self) -> None:
        for n, row in self._rows.items():
            if len(row) != n:
                raise ValueError(f"row {n} has length {len(row)}")
            if any(x < 0 for x in row):
                raise ValueError(f"row {n} has negative entries")
            s = sum(row)
            if (all_exact(row) and s != 1) or abs(float(s) - 1) > ROW_TOL:
                raise ValueError(f"row {n} sums to {s}")

    def consistency_violation(self, tol: float = 1e-10) -> Optional[int]:
        """First n whose row n-1 is not the thinning of row n, else None."""
        for n in range(2, self.N + 1):
            derived = thin_row(self.row(n), n - 1)
            have = self.row(n - 1)
            for a, b in zip(derived, have):
                if (is_exact(a) and is_exact(b) and a != b) or abs(float(a) - float(b)) > tol:
                    return n
        return None

    def equals(self, other: "DecrementMatrix", N: Optional[int] = None, tol: float = FLOAT_TOL) -> bool:
        N = N or min(self.N, other.N)
        for n in range(1, N + 1):
            for a, b in zip(self.row(n), other.row(n)):
                if is_exact(a) and is_exact(b):
                    if a != b:
                        return False
                elif abs(float(a) - float(b)) > tol:
                    return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,m,q\n")
        for n in range(1, self.N + 1):
            for m, x in enumerate(self.row(n), start=1):
                buf.write(f"{n},{m},{fmt(x)}\n")
        return buf.getvalue()

    def __repr__(self) -> str:
        return f"DecrementMatrix(N={self.N}{', ' + self.label if self.label else ''})"


# ---------------------------------------------------------------- constructors

def from_levy(model: LevyModel, N: int) -> DecrementMatrix:
    """q(n:m) = Phi(n:m) / Phi(n)."""
    rows = []
    for n in range(1, N + 1):
        total = model.shape_phi(n)
        if total == 0:
            raise ZeroDivisionError(f"Phi({n}) = 0")
        rows.append([model.shape_moment(n, m) / total for m in range(1, n + 1)])
    return DecrementMatrix(rows, validate=False, label=repr(model))


def from_phi_sequence(phi: Sequence, N: Optional[int] = None) -> DecrementMatrix:
    """Decrement matrix from a normalized exponent sequence [0, Phi(1), ...]."""
    N = N or len(phi) - 1
    rows = [[phi_iterated_differences(phi, n, m) / phi[n] for m in range(1, n + 1)] for n in range(1, N + 1)]
    return DecrementMatrix(rows, validate=False)


def thin_row(row: Sequence, n_prime: int) -> list:
    """Row n' induced from row n by hypergeometric thinning and conditioning on survival."""
    n = len(row)
    total = binom(n, n_prime)
    q0 = []
    for mp in range(0, n_prime + 1):
        s = 0 * row[0]
        for m, qm in enumerate(row, start=1):
            c = binom(n - m, n_prime - mp) * binom(m, mp)
            if c:
                s += qm * c
        q0.append(s / total)
    survive = 1 - q0[0]
    if survive == 0 or (not is_exact(survive) and abs(survive) < FLOAT_TOL):
        raise ZeroDivisionError(f"first block vanishes a.s. when thinning to {n_prime}")
    return [x / survive for x in q0[1:]]


def from_last_row(q_n: Sequence, validate: bool = True) -> DecrementMatrix:
    """All rows n' <= n determined by the last row."""
    row = [num(x) if not isinstance(x, float) else x for x in q_n]
    n = len(row)
    s = sum(row)
    if any(x < 0 for x in row) or (all_exact(row) and s != 1) or abs(float(s) - 1) > ROW_TOL:
        raise ValueError("last row must be a probability vector")
    rows = [thin_row(row, k) for k in range(1, n)] + [row]
    return DecrementMatrix(rows, validate=False)


def _closed_form(rows, label: str) -> DecrementMatrix:
    q = DecrementMatrix(rows, validate=False, label=label)
    q._validate_rows()
    return q


def _params(*xs):
    return [num(x) for x in xs]


def _rising_table(x, N: int) -> list:
    """[(x)_0, ..., (x)_N]."""
    out = [1 + 0 * x]
    for j in range(N):
        out.append(out[-1] * (x + j))
    return out


def ewens(theta, N: int) -> DecrementMatrix:
    (theta,) = _params(theta)
    if theta < 0:
        raise ValueError("Ewens needs theta >= 0")
    rise = _rising_table(theta, N)
    rows = []
    for n in range(1, N + 1):
        # (theta+1)_{n-1} = (theta)_n / theta, written without dividing by theta
        top = rise[n] / theta if theta else math.factorial(n - 1) + 0 * theta
        rows.append([binom(n, m) * rise[n - m] * math.factorial(m) / (top * n) for m in range(1, n + 1)])
    return _closed_form(rows, f"ewens({theta})")


def two_param(alpha, theta, N: int) -> DecrementMatrix:
    alpha, theta = _params(alpha, theta)
    if not 0 <= alpha < 1:
        raise ValueError("regenerative two-parameter compositions need 0 <= alpha < 1")
    if theta < 0:
        raise ValueError("regenerative two-parameter compositions need theta >= 0")
    # prefix products: rise_a[j] = (1-alpha)_j, up_t[j] = prod_{i=1}^{j-1} (theta+i)
    one = 1 + 0 * alpha * theta
    rise_a, up_t = [one], [one, one]
    for j in range(1, N + 1):
        rise_a.append(rise_a[-1] * (j - alpha))
        up_t.append(up_t[-1] * (theta + j))
    rows = []
    for n in range(1, N + 1):
        row = []
        for m in range(1, n):
            # (theta+n-m)_m = up_t[n] / up_t[n-m]
            row.append(binom(n, m) * rise_a[m - 1] * up_t[n - m] / up_t[n] * ((n - m) * alpha + m * theta) / n)
        row.append(rise_a[n - 1] / up_t[n])
        rows.append(row)
    return _closed_form(rows, f"two_param({alpha},{theta})")


def beta_sb(gamma, theta, N: int) -> DecrementMatrix:
    gamma, theta = _params(gamma, theta)
    if gamma <= 0 or theta <= 0:
        raise ValueError("beta stick-breaking needs gamma > 0, theta > 0")
    rise_g, rise_t, rise_gt = (_rising_table(x, N) for x in (gamma, theta, gamma + theta))
    rows = []
    for n in range(1, N + 1):
        denom = rise_gt[n] - rise_t[n]
        rows.append([binom(n, m) * rise_g[m] * rise_t[n - m] / denom for m in range(1, n + 1)])
    return _closed_form(rows, f"beta_sb({gamma},{theta})")


def hook(d, N: int) -> DecrementMatrix:
    (d,) = _params(d)
    if d < 0:
        raise ValueError("hook needs d >= 0")
    rows = []
    for n in range(1, N + 1):
        row = [0 * d] * n
        row[n - 1] = 1 / (1 + n * d)
        row[0] += n * d / (1 + n * d)
        rows.append(row)
    return _closed_form(rows, f"hook({d})")


def gamma_harmonic(theta, N: int) -> DecrementMatrix:
    (theta,) = _params(theta)
    if theta <= 0:
        raise ValueError("gamma-harmonic needs theta > 0")
    rise = _rising_table(theta, N)
    rows, h = [], 0 * theta
    for n in range(1, N + 1):
        h += 1 / (theta + n - 1)
        rows.append([math.factorial(n) * rise[n - m] / (m * math.factorial(n - m) * rise[n] * h)
                     for m in range(1, n + 1)])
    return _closed_form(rows, f"gamma_harmonic({theta})")


def renewal_step(alpha, m: int):
    """h(m) = alpha (1-alpha)_{m-1} / m!."""
    return alpha * rising(1 - alpha, m - 1) / math.factorial(m)


def alpha_renewal(alpha, N: int) -> DecrementMatrix:
    (alpha,) = _params(alpha)
    if not 0 < alpha < 1:
        raise ValueError("renewal construction needs 0 < alpha < 1")
    steps = [renewal_step(alpha, m) for m in range(1, N + 1)]
    rows = []
    for n in range(1, N + 1):
        row = steps[: n - 1]
        rows.append(row + [1 - sum(row, 0 * alpha)])
    return _closed_form(rows, f"alpha_renewal({alpha})")


def two_param_row_float(alpha: float, theta: float, n: int) -> np.ndarray:
    """Float row q(n:.) of the two-parameter matrix via log-gamma (for large n)."""
    a, t = float(alpha), float(theta)
    m = np.arange(1, n + 1, dtype=float)
    out = np.empty(n)
    mm = m[:-1]
    logc = gammaln(n + 1) - gammaln(mm + 1) - gammaln(n - mm + 1)
    log_rise_a = gammaln(mm - a) - gammaln(1 - a)
    log_rise_t = gammaln(t + n) - gammaln(t + n - mm)
    out[:-1] = np.exp(logc + log_rise_a - log_rise_t) * ((n - mm) * a + mm * t) / n
    out[-1] = math.exp(math.lgamma(n - a) - math.lgamma(1 - a) - (math.lgamma(t + n) - math.lgamma(t + 1)))
    return out


def two_param_lazy(alpha, theta, N: int) -> DecrementMatrix:
    return DecrementMatrix.lazy(lambda n: two_param_row_float(alpha, theta, n), N, label=f"two_param({alpha},{theta}) float")


# ---------------------------------------------------------------- CPF / PPF

def cpf(q: DecrementMatrix, c) -> object:
    """Product over tail sums: prod_j q(Lambda_j : lambda_j)."""
    c = Composition(c)
    if c.n > q.N:
        raise ValueError(f"composition of {c.n} exceeds matrix level {q.N}")
    out = Fraction(1)
    for lam, tail in zip(c, c.tail_sums()):
        out *= q(tail, lam)
    return out


def cpf_table(q: DecrementMatrix, n: int) -> DistributionTable:
    return DistributionTable(n, "composition", {c: cpf(q, c) for c in enumerate_compositions(n)})


def ppf(q: DecrementMatrix, lam) -> object:
    lam = Partition(lam)
    return sum((cpf(q, c) for c in lam.arrangements()), Fraction(0))


def ppf_table(q: DecrementMatrix, n: int) -> DistributionTable:
    return symmetrize(cpf_table(q, n))


def two_param_ppf(alpha, theta, lam) -> object:
    """Closed-form two-parameter partition probability."""
    alpha, theta = num(alpha), num(theta)
    lam = Partition(lam)
    n, k = lam.n, lam.k
    out = Fraction(shape_count(lam)) if is_exact(alpha) and is_exact(theta) else float(shape_count(lam))
    for i in range(1, k):
        out *= theta + alpha * i
    out /= rising(1 + theta, n - 1)
    for part in lam:
        out *= rising(1 - alpha, part - 1)
    return out


def two_param_ppf_table(alpha, theta, n: int) -> DistributionTable:
    return DistributionTable(n, "partition", {p: two_param_ppf(alpha, theta, p) for p in enumerate_partitions(n)})


# ---------------------------------------------------------------- Markovian

@dataclass(frozen=True)
class MarkovianPair:
    """Boundary rows q0 (law of the last part) and an interior decrement matrix q."""

    boundary: DecrementMatrix
    interior: DecrementMatrix

    @property
    def N(self) -> int:
        return min(self.boundary.N, self.interior.N)


def cpf_markovian(mp: MarkovianPair, c) -> object:
    """q0(n:lambda_k) * prod_{j<k} q(Lambda_j : lambda_j) with head sums Lambda_j."""
    c = Composition(c)
    if c.n > mp.N:
        raise ValueError("composition exceeds matrix level")
    if c.k == 0:
        return Fraction(1)
    heads = c.head_sums()
    out = mp.boundary(c.n, c[-1])
    for j in range(c.k - 1):
        out *= mp.interior(heads[j], c[j])
    return out


def cpf_markovian_table(mp: MarkovianPair, n: int) -> DistributionTable:
    return DistributionTable(n, "composition", {c: cpf_markovian(mp, c) for c in enumerate_compositions(n)})


def beta_mixed_moments(a, b) -> Callable[[int, int], object]:
    """(i, j) -> E[V^i (1-V)^j] for V ~ beta(a, b)."""
    a, b = num(a), num(b)
    return lambda i, j: rising(a, i) * rising(b, j) / rising(a + b, i + j)


def point_mixed_moments(v) -> Callable[[int, int], object]:
    v = num(v)
    return lambda i, j: (v ** i) * ((1 - v) ** j)


def meander_moment(v_moments: Callable[[int, int], object], n: int, m: int):
    """Phi0(n:m) = C(n,m) E[V^(n-m) (1-V)^m]: m of n balls fall in the meander gap [V, 1]."""
    return binom(n, m) * v_moments(n - m, m)


def markovian_from_meander(q: DecrementMatrix, v_moments: Callable[[int, int], object], N: Optional[int] = None) -> MarkovianPair:
    """q0(n:m) = Phi0(n:0) q(n:m) + Phi0(n:m)."""
    N = N or q.N
    rows = []
    for n in range(1, N + 1):
        empty = meander_moment(v_moments, n, 0)
        rows.append([empty * q(n, m) + meander_moment(v_moments, n, m) for m in range(1, n + 1)])
    boundary = DecrementMatrix(rows, validate=False, label="meander boundary")
    boundary._validate_rows()
    return MarkovianPair(boundary, q)


# ---------------------------------------------------------------- deletion kernels

@dataclass(frozen=True)
class DeletionKernel:
    """Row d(lambda, .) over the distinct part values of lambda."""

    shape: Partition
    d: Dict[int, object]

    def total(self):
        return sum(self.d.values(), Fraction(0))

    def to_json(self) -> str:
        return json.dumps({"shape": list(self.shape), "d": {str(m): fmt(v) for m, v in self.d.items()}})


def deletion_kernel(q: DecrementMatrix, lam) -> DeletionKernel:
    """d(lambda, m) = q(n:m) p(lambda minus m) / p(lambda)."""
    lam = Partition(lam)
    n = lam.n
    p_lam = ppf(q, lam)
    if p_lam == 0:
        raise ZeroDivisionError(f"p({tuple(lam)}) = 0: kernel row undefined")
    row = {}
    for m in sorted(set(lam), reverse=True):
        rest = lam.remove(m)
        p_rest = ppf(q, rest) if rest.n else Fraction(1)
        row[m] = q(n, m) * p_rest / p_lam
    return DeletionKernel(lam, row)


def d_tau(lam, m: int, tau) -> object:
    lam = Partition(lam)
    tau = num(tau)
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    if m not in lam:
        raise ValueError(f"{m} is not a part of {tuple(lam)}")
    n, k = lam.n, lam.k
    km = Counter(lam)[m]
    denom = 1 - tau + (k - 1) * tau
    if denom == 0:
        # tau = 1 and k = 1: the only part is deleted
        return Fraction(1) if is_exact(tau) else 1.0
    return Fraction(km, n) * ((n - m) * tau + m * (1 - tau)) / denom if is_exact(tau) else km / n * ((n - m) * tau + m * (1 - tau)) / denom


def d_tau_kernel(lam, tau) -> DeletionKernel:
    lam = Partition(lam)
    return DeletionKernel(lam, {m: d_tau(lam, m, tau) for m in sorted(set(lam), reverse=True)})


# ---------------------------------------------------------------- Green matrix

def green_dp(q: DecrementMatrix, n: int) -> list:
    """[g(n,1), ..., g(n,n)]: g(n,j) = P(chain started at n visits n+1-j)."""
    visit = [0 * q(1, 1)] * (n + 1)
    visit[n] = 1 + 0 * q(1, 1)
    for s in range(n - 1, 0, -1):
        acc = 0 * q(1, 1)
        for t in range(s + 1, n + 1):
            acc += visit[t] * q(t, t - s)
        visit[s] = acc
    return [visit[n + 1 - j] for j in range(1, n + 1)]


@dataclass(frozen=True)
class GreenMatrix:
    rows: tuple

    @property
    def N(self) -> int:
        return len(self.rows)

    def __call__(self, n: int, j: int):
        return self.rows[n - 1][j - 1]

    def to_csv(self, extra: Optional[Dict[str, Callable[[int, int], object]]] = None) -> str:
        extra = extra or {}
        buf = io.StringIO()
        buf.write(",".join(["n", "j", "g", *extra]) + "\n")
        for n, row in enumerate(self.rows, start=1):
            for j, g in enumerate(row, start=1):
                cells = [str(n), str(j), fmt(g)] + [fmt(fn(n, j)) for fn in extra.values()]
                buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def green_matrix(q: DecrementMatrix, N: Optional[int] = None) -> GreenMatrix:
    N = N or q.N
    return GreenMatrix(tuple(tuple(green_dp(q, n)) for n in range(1, N + 1)))


@dataclass(frozen=True)
class GreenComparison:
    n: int
    closed: list
    dp: list
    max_abs_delta: float
    variant: str


def green_closed_row(phi: Sequence, n: int, variant: str = "printed") -> list:
    """Closed-form row from a normalized exponent sequence.

    ``printed`` evaluates the displayed formula literally, with the inner sum over
    i = 0..j-1 of C(j-1, i); ``corrected`` sums over i = 0..n-j with C(n-j, i).
    """
    row = [None] * n
    for jj in range(1, n + 1):
        # jj plays the role of j in g(n, n-jj+1)
        if variant == "printed":
            terms = [(binom(jj - 1, i), jj + i) for i in range(jj)]
        elif variant == "corrected":
            terms = [(binom(n - jj, i), jj + i) for i in range(n - jj + 1)]
        else:
            raise ValueError(f"unknown variant {variant!r}")
        s = 0 * phi[1]
        for c, idx in terms:
            s += (-1) ** (idx - jj) * c / phi[idx]
        row[n - jj] = phi[jj] * binom(n, jj) * s
    return row


def green_closed(phi: Sequence, n: int, q: Optional[DecrementMatrix] = None, variant: str = "printed") -> GreenComparison:
    """Evaluate the closed form and report the elementwise gap to the DP row."""
    need = 2 * n - 1 if variant == "printed" else n
    if len(phi) <= need:
        raise ValueError(f"need Phi up to {need}")
    closed = green_closed_row(phi, n, variant)
    q = q or from_phi_sequence(phi, n)
    dp = green_dp(q, n)
    delta = max(abs(float(a) - float(b)) for a, b in zip(closed, dp))
    return GreenComparison(n, closed, dp, delta, variant)


# ---------------------------------------------------------------- reversibility

def first_part_one(phi: Sequence, n: int):
    """P(F_n = 1) = n (Phi(n) - Phi(n-1)) / Phi(n) under Phi(1) = 1."""
    return n * (phi[n] - phi[n - 1]) / phi[n]


def last_part_one(phi: Sequence, n: int):
    """P(L_n = 1) = n [1 - sum_{k=2}^n C(n-1,k-1) (-1)^k / Phi(k)] under Phi(1) = 1."""
    s = 0 * phi[1]
    for k in range(2, n + 1):
        s += binom(n - 1, k - 1) * (-1) ** k / phi[k]
    return n * (1 - s)


@dataclass(frozen=True)
class ReversibilityVerdict:
    reversible: bool
    alpha: object
    witness: Optional[int]
    first: list
    last: list

    def __str__(self) -> str:
        if self.reversible:
            return f"reversible-(alpha,alpha) with alpha={fmt(self.alpha)}"
        return f"not reversible (witness n={self.witness})"


def reversibility_check(phi_or_model, N: int, tol: float = FLOAT_TOL) -> ReversibilityVerdict:
    """Compare P(F_n=1) with P(L_n=1) for n <= N, then confirm the (alpha,alpha) exponent."""
    if isinstance(phi_or_model, LevyModel):
        phi = phi_or_model.phi_sequence(N)
    elif isinstance(phi_or_model, DecrementMatrix):
        phi = phi_from_moments([phi_or_model(n, n) for n in range(1, N + 1)], N)
    else:
        phi = list(phi_or_model)
    if phi[0] != 0 or phi[1] != 1:
        raise ValueError("reversibility formulas need Phi(0) = 0 and the normalization Phi(1) = 1")
    first, last = [], []
    witness = None
    for n in range(1, N + 1):
        f, l = first_part_one(phi, n), last_part_one(phi, n)
        first.append(f)
        last.append(l)
        same = f == l if is_exact(f) and is_exact(l) else abs(float(f) - float(l)) <= tol
        if not same and witness is None:
            witness = n
    alpha = phi[2] - 1 if N >= 2 else None
    if witness is None and alpha is not None:
        for n in range(1, N + 1):
            target = rising(1 + alpha, n - 1) / math.factorial(n - 1)
            ok = target == phi[n] if is_exact(target) and is_exact(phi[n]) else abs(float(target) - float(phi[n])) <= tol
            if not ok:
                witness = n
                break
        if not 0 <= alpha <= 1:
            witness = witness or 2
    return ReversibilityVerdict(witness is None, alpha, witness, first, last)
