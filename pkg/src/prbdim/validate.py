"""Self-check suites behind `prbdim validate`: cross-route identities,
Monte-Carlo consistency (CI-based, so small replication counts still give
an honest verdict), and the headline figure-level deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .compound import (CompoundSpec, bell_complete, bell_determinant,
                       ccdf_bell, ccdf_bell_literal, _ccdf_integral_batch, pmf)
from .congestion import (averaged_congestion, conditional_congestion,
                         expected_load)
from .dimension import dimension_prbs
from .scenario_io import bundled_scenario
from .simulate import empirical_ccdf, gamma_samples, wilson_interval
from .geometry import rng_stream, sample_roads, sample_users


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _convolved_pmf(weights, k_max: int) -> np.ndarray:
    """Brute-force reference: convolve per-level compound-Poisson PMFs."""
    out = np.zeros(k_max + 1)
    out[0] = 1.0
    for n, w in enumerate(weights, start=1):
        level = np.zeros(k_max + 1)
        # counts beyond k_max // n only feed indices beyond the table
        for c in range(0, k_max // n + 1):
            level[n * c] = math.exp(-w) * w ** c / math.factorial(c)
        out = np.convolve(out, level)[: k_max + 1]
    return out


def identities_suite(seed: int = 0, replications: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []

    listed = [
        (bell_complete([]) == 1, "B_0 = 1"),
        (bell_complete([7]) == 7, "B_1(x1) = x1"),
        (bell_complete([3, 4]) == 13, "B_2 = x1^2+x2"),
        (bell_complete([1, 1, 1]) == 5, "B_3(1,1,1) = 5"),
        (bell_complete([1, 1, 1, 1]) == 15, "B_4(1,1,1,1) = 15"),
    ]
    checks.append(Check("bell_listed_values", all(ok for ok, _ in listed),
                        "; ".join(d for _, d in listed)))

    agree = True
    for _ in range(30):
        p = int(rng.integers(0, 11))
        xs = [int(v) for v in rng.integers(-4, 5, p)]
        if bell_complete(xs) != bell_determinant(xs):
            agree = False
            break
    checks.append(Check("bell_recurrence_vs_determinant", agree,
                        "exact integer agreement, p <= 10"))

    binom_ok = True
    for _ in range(20):
        p = int(rng.integers(0, 9))
        xs = [int(v) for v in rng.integers(-3, 4, p)]
        ys = [int(v) for v in rng.integers(-3, 4, p)]
        lhs = bell_complete([a + b for a, b in zip(xs, ys)])
        rhs = sum(math.comb(p, i) * bell_complete(xs[: p - i]) * bell_complete(ys[:i])
                  for i in range(p + 1))
        if lhs != rhs:
            binom_ok = False
            break
    checks.append(Check("bell_binomial_relation", binom_ok,
                        "binomial-type identity exact, p <= 8"))

    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 5))
        spec = CompoundSpec(weights=rng.uniform(0, 1.5, n))
        table = pmf(spec, 40)
        ref = _convolved_pmf(spec.weights, 40)
        worst = max(worst, float(np.max(np.abs(table.probabilities - ref))))
    checks.append(Check("pmf_vs_convolution", worst <= 1e-10,
                        f"max |delta| = {worst:.3e} (tol 1e-10)"))

    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 11))
        spec = CompoundSpec(weights=rng.uniform(0, 2, n))
        ms = np.arange(0, 81)
        by_int = _ccdf_integral_batch(spec, ms)
        by_bell = np.array([ccdf_bell(spec, int(m)) for m in ms])
        worst = max(worst, float(np.max(np.abs(by_int - by_bell))))
    checks.append(Check("inversion_vs_bell_sum", worst <= 1e-6,
                        f"max |delta| = {worst:.3e} (tol 1e-6)"))

    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 5))
        spec = CompoundSpec(weights=rng.uniform(0, 1.0, n))
        for m in (0, 1, 5, 12, 20):
            worst = max(worst, abs(ccdf_bell_literal(spec, m) - ccdf_bell(spec, m)))
    checks.append(Check("literal_bell_path", worst <= 1e-10,
                        f"max |delta| = {worst:.3e} (tol 1e-10)"))
    return checks


def mc_suite(seed: int = 0, replications: int = 2000) -> list[Check]:
    doc = bundled_scenario("fig2_tau30").with_overrides(seed=seed, realizations=200)
    scn = doc.to_scenario()
    checks = []

    # conditional law: one fixed road set, empirical tail inside a wide CI
    road = sample_roads(scn.geometry, scn.cell_radius_km, scn.sampler,
                        rng_stream(seed, 0))
    m_star = max(1, int(round(expected_load(scn))))
    analytic = conditional_congestion(scn, road, m_star)
    hits = 0
    for i in range(replications):
        rng = rng_stream(seed + 1, i)
        drop = sample_users(scn.geometry, scn.cell_radius_km, road, rng)
        from .simulate import demand_of_drop
        hits += demand_of_drop(scn, drop) >= m_star
    lo, hi = wilson_interval(hits, replications, z=4.0)
    checks.append(Check("conditional_tail_in_ci", lo <= analytic <= hi,
                        f"analytic {analytic:.4f} in [{lo:.4f}, {hi:.4f}] "
                        f"({replications} replications)"))

    gammas, _, _ = gamma_samples(scn, replications)
    sample_se = float(gammas.std(ddof=1)) / math.sqrt(replications)
    load = expected_load(scn)
    diff = abs(float(gammas.mean()) - load)
    checks.append(Check("mean_load_vs_simulation", diff <= 5.0 * sample_se + 1e-9,
                        f"|{gammas.mean():.3f} - {load:.3f}| = {diff:.3f} "
                        f"<= 5*SE = {5 * sample_se:.3f}"))

    emp = empirical_ccdf(scn, np.array([m_star]), replications)
    curve = averaged_congestion(scn, np.array([m_star]))
    slack = (curve.stderr[0] * 4.0
             + (emp.ci_high[0] - emp.ci_low[0]))
    gap = abs(float(curve.pi[0]) - float(emp.ccdf[0]))
    checks.append(Check("averaged_vs_empirical", gap <= slack,
                        f"|analytic - empirical| = {gap:.4f} <= slack {slack:.4f}"))
    return checks


def figures_suite(seed: int = 0, replications: int = 2000) -> list[Check]:
    checks = []

    fig3 = bundled_scenario("fig3")
    deltas = {}
    for lam in (2.0, 10.0):
        q = replace(fig3.to_query(target=0.05), road_intensity=lam)
        deltas[lam] = dimension_prbs(q).required_m
    d3 = deltas[2.0] - deltas[10.0]
    checks.append(Check("fig3_lambda_delta", 20 <= d3 <= 45,
                        f"required_m({2.0}) - required_m({10.0}) = {d3} in [20, 45]"))

    for name, tau_label, lo, hi in (("fig6_mixed", "tau=30M", 55, 105),
                                    ("fig7", "tau=26M", 35, 70)):
        doc = bundled_scenario(name)
        with_im = dimension_prbs(doc.to_query(target=0.05)).required_m
        without = dimension_prbs(doc.to_query(target=0.05, noise_limited=True)).required_m
        d = with_im - without
        checks.append(Check(f"{name}_interference_delta", lo <= d <= hi,
                            f"{tau_label}: {with_im} - {without} = {d} in [{lo}, {hi}]"))

    doc = bundled_scenario("fig2_tau30").with_overrides(realizations=1000)
    scn = doc.to_scenario()
    ms = np.arange(0, 261)
    analytic = averaged_congestion(scn, ms)
    emp = empirical_ccdf(scn, ms, replications)
    gap = float(np.max(np.abs(analytic.pi - emp.ccdf)))
    tol = 0.02 + 3.0 * math.sqrt(0.25 / replications)
    checks.append(Check("fig2_agreement", gap <= tol,
                        f"max |analytic - empirical| = {gap:.4f} <= {tol:.4f} "
                        f"({replications} replications)"))
    return checks
