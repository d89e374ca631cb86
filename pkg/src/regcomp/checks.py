"""Invariant suites run by ``regcomp check``; each returns a CheckResult."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

from . import asympt
from . import combinat as cb
from . import decrement as dm
from . import levy
from . import samplers as smp
from .arith import close, fmt
from .families import FamilyError, FamilySpec, build_decrement, build_model, structural_law, two_param_params

TOL = 1e-10


@dataclass
class CheckResult:
    suite: str
    passed: bool = True
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    def expect(self, ok: bool, what: str) -> None:
        self.checked += 1
        if not ok:
            self.passed = False
            self.failures.append(what)

    def __str__(self) -> str:
        head = f"{self.suite}: {'PASS' if self.passed else 'FAIL'} ({self.checked} checks)"
        return "\n".join([head] + [f"  {f}" for f in self.failures[:20]])


def _matrix(spec: FamilySpec, N: int) -> dm.DecrementMatrix:
    try:
        return build_decrement(spec, N, "exact")
    except FamilyError:
        return build_decrement(spec, N, "float")


def check_combinat(families, n_max) -> CheckResult:
    res = CheckResult("combinat")
    counts = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]
    for n in range(1, n_max + 1):
        comps = cb.enumerate_compositions(n)
        res.expect(len(comps) == 2 ** (n - 1), f"n={n}: {len(comps)} compositions")
        res.expect(all(cb.binary_decode(cb.binary_encode(c)) == c for c in comps), f"n={n}: binary code round trip")
        parts = cb.enumerate_partitions(n)
        if n < len(counts):
            res.expect(len(parts) == counts[n], f"n={n}: {len(parts)} partitions")
        res.expect(sum(cb.multinomial_count(c) for c in comps) == sum(
            cb.shape_count(p) * math.factorial(p.k) for p in parts), f"n={n}: ordered set partition count")
    return res


def check_levy(families, n_max) -> CheckResult:
    res = CheckResult("levy")
    for spec in families:
        model = build_model(spec)
        for n in range(1, n_max + 1):
            total = sum((model.shape_moment(n, m) for m in range(1, n + 1)), Fraction(0))
            res.expect(close(total, model.shape_phi(n), TOL), f"{spec} n={n}: moments do not sum to Phi")
        ok, witness = levy.check_completely_alternating(model.phi_sequence(n_max), tol=TOL)
        res.expect(ok, f"{spec}: not completely alternating at {witness}")
    return res


def check_consistency(families, n_max) -> CheckResult:
    res = CheckResult("consistency")
    for spec in families:
        q = _matrix(spec, n_max)
        res.expect(q.consistency_violation(TOL) is None, f"{spec}: rows fail hypergeometric thinning")
        prev = dm.cpf_table(q, 1)
        res.expect(prev.is_normalized(), f"{spec} n=1: CPF not normalized")
        for n in range(2, n_max + 1):
            table = dm.cpf_table(q, n)
            res.expect(table.is_normalized(), f"{spec} n={n}: CPF not normalized")
            res.expect(cb.sb_reduce_pushforward(table).equals(prev, TOL), f"{spec} n={n}: reduction does not give level {n - 1}")
            prev = table
    return res


def regeneration_holds(q: dm.DecrementMatrix, n: int, tol: float = TOL) -> List[str]:
    """Failures of: given lambda_1 = m, the rest is distributed as the CPF at n-m."""
    bad = []
    table = dm.cpf_table(q, n)
    for m in range(1, n):
        qm = q(n, m)
        if qm == 0:
            continue
        tail = cb.DistributionTable(n - m, "composition", {c[1:]: p / qm for c, p in table.entries.items() if c[0] == m})
        if not tail.equals(dm.cpf_table(q, n - m), tol):
            bad.append(f"n={n}, m={m}")
    return bad


def check_regeneration(families, n_max) -> CheckResult:
    res = CheckResult("regeneration")
    for spec in families:
        q = _matrix(spec, n_max)
        for n in range(2, n_max + 1):
            for where in regeneration_holds(q, n):
                res.expect(False, f"{spec}: tail law differs at {where}")
            res.checked += 1
    return res


def check_symmetrization(families, n_max) -> CheckResult:
    res = CheckResult("symmetrization")
    for spec in families:
        q = _matrix(spec, n_max)
        tp = two_param_params(spec)
        for n in range(1, n_max + 1):
            ppf = dm.ppf_table(q, n)
            res.expect(ppf.is_normalized(), f"{spec} n={n}: PPF not normalized")
            if tp is not None:
                target = dm.two_param_ppf_table(*tp, n)
                res.expect(ppf.equals(target, TOL), f"{spec} n={n}: PPF differs from the two-parameter formula")
    return res


def check_kernel(families, n_max) -> CheckResult:
    res = CheckResult("kernel")
    for spec in families:
        q = _matrix(spec, n_max)
        tp = two_param_params(spec)
        for n in range(1, n_max + 1):
            ppf = dm.ppf_table(q, n)
            mass = {m: 0 * q(1, 1) for m in range(1, n + 1)}
            for lam, p in ppf.support().items():
                row = dm.deletion_kernel(q, lam)
                res.expect(close(row.total(), 1, TOL), f"{spec} {tuple(lam)}: kernel row sums to {fmt(row.total())}")
                for m, d in row.d.items():
                    mass[m] += d * p
                if tp is not None and tp[0] + tp[1] > 0:
                    tau = tp[0] / (tp[0] + tp[1])
                    for m, d in row.d.items():
                        res.expect(close(d, dm.d_tau(lam, m, tau), TOL), f"{spec} {tuple(lam)}, m={m}: kernel is not d_tau")
            for m in range(1, n + 1):
                res.expect(close(mass[m], q(n, m), TOL), f"{spec} n={n}, m={m}: sum_lambda d p != q(n:m)")
    return res


def check_stationarity(families, n_max) -> CheckResult:
    res = CheckResult("stationarity")
    n_top = min(n_max, 6)
    for spec in families:
        q = _matrix(spec, n_top)
        for n in range(1, n_top + 1):
            for kind, table in (("composition", dm.cpf_table(q, n)), ("partition", dm.ppf_table(q, n))):
                states, matrix = smp.qchain_transition_matrix(q.row(n), n, kind)
                for s, row in matrix.items():
                    res.expect(close(sum(row.values()), 1, TOL), f"{spec} {kind} {tuple(s)}: row does not sum to 1")
                law = dict(table.entries)
                moved = smp.apply_transition(law, matrix)
                res.expect(cb.DistributionTable(n, kind, moved).equals(table, TOL), f"{spec} n={n}: {kind} law not stationary")
    return res


def check_reversibility(families, n_max) -> CheckResult:
    res = CheckResult("reversibility")
    for spec in families:
        q = _matrix(spec, n_max)
        model = build_model(spec)
        verdict = dm.reversibility_check(model, n_max)
        for n in range(1, n_max + 1):
            table = dm.cpf_table(q, n)
            first, last = cb.first_part_marginal(table), cb.last_part_marginal(table)
            res.expect(close(first[0], verdict.first[n - 1], TOL), f"{spec} n={n}: P(F_n=1) formula vs table")
            res.expect(close(last[0], verdict.last[n - 1], TOL), f"{spec} n={n}: P(L_n=1) formula vs table")
        symmetric = all(cb.reverse_pushforward(dm.cpf_table(q, n)).equals(dm.cpf_table(q, n), TOL) for n in range(1, n_max + 1))
        res.expect(symmetric == verdict.reversible, f"{spec}: verdict {verdict} disagrees with reversal of the CPF")
    return res


def check_moments_roundtrip(families, n_max) -> CheckResult:
    res = CheckResult("moments-roundtrip")
    for spec in families:
        q = _matrix(spec, n_max)
        phi = levy.phi_from_moments([q(n, n) for n in range(1, n_max + 1)], n_max)
        res.expect(dm.from_phi_sequence(phi).equals(q, tol=TOL), f"{spec}: Phi recovered from q(n:n) does not give q back")
        res.expect(dm.from_last_row(q.row(n_max)).equals(q, tol=TOL), f"{spec}: last row does not determine the matrix")
        if n_max >= 3:
            p2, p3 = q(2, 2), q(3, 3)
            if p2 != 1:
                res.expect(close(levy.q32_from_moments(p2, p3), q(3, 2), TOL), f"{spec}: q(3:2) identity")
    return res


def check_markovian(families, n_max) -> CheckResult:
    res = CheckResult("markovian")
    for spec in families:
        q = _matrix(spec, n_max)
        same = dm.MarkovianPair(q, q)
        for n in range(1, n_max + 1):
            table = dm.cpf_markovian_table(same, n)
            res.expect(table.equals(cb.reverse_pushforward(dm.cpf_table(q, n)), TOL),
                       f"{spec} n={n}: q0 = q is not the reversed regenerative CPF")
        meander = dm.markovian_from_meander(q, dm.beta_mixed_moments(1, 1))
        for n in range(1, n_max + 1):
            res.expect(dm.cpf_markovian_table(meander, n).is_normalized(), f"{spec} n={n}: Markovian CPF not normalized")
        tp = two_param_params(spec)
        if tp is not None and tp[1] > 0:
            alpha, theta = tp
            bridge = dm.markovian_from_meander(q, dm.beta_mixed_moments(theta, 1 - alpha))
            for n in range(1, n_max + 1):
                got = cb.symmetrize(dm.cpf_markovian_table(bridge, n))
                res.expect(got.equals(dm.two_param_ppf_table(alpha, theta - alpha, n), TOL),
                           f"{spec} n={n}: meander beta(theta,1-alpha) does not give the (alpha, theta-alpha) PPF")
    return res


def check_green(families, n_max) -> CheckResult:
    res = CheckResult("green")
    for spec in families:
        q = _matrix(spec, n_max)
        for n in range(1, n_max + 1):
            row = dm.green_dp(q, n)
            res.expect(row[0] == 1, f"{spec} n={n}: g(n,1) != 1")
            res.expect(all(-TOL <= g <= 1 + TOL for g in row), f"{spec} n={n}: g outside [0,1]")
            res.expect(close(sum(row), asympt.expected_Kn_dp(q, n), TOL), f"{spec} n={n}: sum_j g(n,j) != E[K_n]")
    return res


def check_asympt(families, n_max) -> CheckResult:
    res = CheckResult("asympt")
    for spec in families:
        q = _matrix(spec, n_max)
        law = structural_law(spec)
        for n in range(1, n_max + 1):
            ek = asympt.expected_Kn_dp(q, n)
            res.expect(close(ek, asympt.expected_Kn_structural(law, n), TOL), f"{spec} n={n}: DP vs structural E[K_n]")
            table = dm.cpf_table(q, n)
            for r in range(1, n + 1):
                enum = sum((p * asympt.count_blocks(c).k_r(r) for c, p in table.entries.items()), 0 * q(1, 1))
                res.expect(close(enum, asympt.expected_Knr_structural(law, n, r), TOL), f"{spec} n={n}, r={r}: E[K_n,r]")
    return res


SUITES: Dict[str, Callable[[list, int], CheckResult]] = {
    "consistency": check_consistency,
    "regeneration": check_regeneration,
    "symmetrization": check_symmetrization,
    "kernel": check_kernel,
    "stationarity": check_stationarity,
    "reversibility": check_reversibility,
    "moments-roundtrip": check_moments_roundtrip,
    "markovian": check_markovian,
    "levy": check_levy,
    "green": check_green,
    "asympt": check_asympt,
    "combinat": check_combinat,
}


def run_suite(name: str, families, n_max: int) -> CheckResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](list(families), n_max)
