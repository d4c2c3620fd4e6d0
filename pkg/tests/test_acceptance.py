"""Release gate: one test per numbered acceptance criterion.

Each test prints a single ``criterion N: PASS/FAIL`` line through the
criterion_log fixture, so a full run ends with a nine-line scoreboard.
Tolerances and seeds are pinned on purpose; loosening one is a release
decision, not a test fix.  Every check is against an in-file oracle
(closed forms, brute-force reimplementations, Monte-Carlo error bars),
never against the library's own output recycled as expectation.
"""

import math
import time

import numpy as np

from distnull.criterion import (
    Criteria,
    NoSolution,
    QInterval,
    THUMB_RATIO,
    minimize_r,
    q_interval,
    r_crit,
    r_curve,
    rule_of_thumb,
)
from distnull.distributional import (
    DistributionalNull,
    ExperimentDesign,
    asymptotic_z_bound,
    degrees_of_freedom,
    dist_p_value,
    dist_t_crit,
    dist_z_crit,
    posterior_update,
    replication_probability,
)
from distnull.mc import SimConfig, fpr_vs_n, simulate_fpr, simulate_replication
from distnull.point import point_p_value, point_z_crit
from distnull.special import t_cdf, t_quantile
from distnull.varratio import MultiSiteRecord, all_cells, cell_q, ingest, summarize

TRIALS = 100_000
ALPHA = 0.05

# 30 probe probabilities spanning [1e-6, 1 - 1e-6], dense in the middle
# and pushed hard into both tails.
P_GRID = (
    [1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.025, 0.05]
    + [i / 20 for i in range(2, 19)]
    + [0.95, 0.975, 0.99, 0.999, 0.9999, 0.99999, 0.999999]
)


def test_criterion_1_special_function_fidelity(criterion_log):
    start = time.perf_counter()

    # nu = 1 (Cauchy) and nu = 2 have elementary CDFs.
    worst_closed = 0.0
    for x in np.linspace(-30.0, 30.0, 10_000):
        x = float(x)
        cauchy = 0.5 + math.atan(x) / math.pi
        nu2 = 0.5 + 0.5 * x / math.sqrt(2.0 + x * x)
        worst_closed = max(
            worst_closed,
            abs(t_cdf(x, 1.0) - cauchy),
            abs(t_cdf(x, 2.0) - nu2),
        )

    worst_round = 0.0
    for nu in (1.0, 2.0, 5.0, 10.0, 40.0, 200.0):
        for p in P_GRID:
            worst_round = max(worst_round, abs(t_cdf(t_quantile(p, nu), nu) - p))

    elapsed = time.perf_counter() - start
    ok = worst_closed <= 1e-12 and worst_round <= 1e-10 and elapsed < 1.0
    criterion_log(
        1,
        ok,
        f"closed-form dev {worst_closed:.2e} (<= 1e-12), "
        f"round-trip dev {worst_round:.2e} (<= 1e-10), {elapsed:.2f}s (< 1s)",
    )


def test_criterion_2_rule_of_thumb_bands(criterion_log):
    p10 = rule_of_thumb(0.05, 10.0).p_threshold
    p40 = rule_of_thumb(0.05, 40.0).p_threshold
    ok = 4e-4 <= p10 <= 6e-4 and 4e-5 <= p40 <= 6e-5
    criterion_log(
        2,
        ok,
        f"p_threshold(nu=10) = {p10:.4e} in [4e-4, 6e-4]; "
        f"p_threshold(nu=40) = {p40:.4e} in [4e-5, 6e-5]",
    )


def test_criterion_3_calibration_when_test_matches_truth(criterion_log):
    # Testing at the true q must reject at exactly alpha for every
    # sample size and heterogeneity level: the pivot is exact, so the
    # only deviation left is Monte-Carlo noise.
    worst = 0.0
    seed = 0
    for n in (5, 20, 100, 1000):
        for q in (0.0, 0.02, 0.05, 0.15, 0.35):
            cfg = SimConfig(
                design=ExperimentDesign.ONE_SAMPLE,
                n=n,
                q_true=q,
                trials=TRIALS,
                seed=seed,
            )
            rep = simulate_fpr(cfg, ALPHA, q_test=q)
            worst = max(worst, abs(rep.rate - ALPHA) / rep.mc_se)
            seed += 1
    ok = worst <= 3.0
    criterion_log(
        3, ok, f"20 (n, q) scenarios, worst |rate - 0.05| = {worst:.2f} mc_se (<= 3)"
    )


def test_criterion_4_point_null_false_positives_grow_with_n(criterion_log):
    # Ignoring real between-experiment variance (q_test = 0 against
    # q_true = 0.05) makes larger studies *more* likely to reject.
    base = SimConfig(
        design=ExperimentDesign.ONE_SAMPLE, n=10, q_true=0.05, trials=TRIALS, seed=0
    )
    rows = fpr_vs_n(base, ALPHA, [10, 100, 1000], q_test=0.0)
    rates = [rep.rate for _, rep in rows]
    ses = [rep.mc_se for _, rep in rows]
    separated = all(
        rates[i + 1] - rates[i] >= 3.0 * math.hypot(ses[i], ses[i + 1])
        for i in range(2)
    )
    ok = rates[0] < rates[1] < rates[2] and separated and rates[2] > 0.2
    criterion_log(
        4,
        ok,
        "rates at n = 10/100/1000: "
        f"{rates[0]:.4f} < {rates[1]:.4f} < {rates[2]:.4f}, "
        f"separated by >= 3 se, rate(1000) > 0.2",
    )


def test_criterion_5_replication_formula_matches_simulation(criterion_log):
    worst = 0.0
    seed = 100
    for t1 in (0.0, 2.0, 4.0, 8.0):
        for q in (0.02, 0.05, 0.2):
            for n in (10, 50):
                cfg = SimConfig(
                    design=ExperimentDesign.ONE_SAMPLE,
                    n=n,
                    q_true=q,
                    trials=TRIALS,
                    seed=seed,
                )
                rep = simulate_replication(t1, cfg, ALPHA)
                nu = degrees_of_freedom(ExperimentDesign.ONE_SAMPLE, n)
                p_r = replication_probability(t1, ALPHA, nu, n, DistributionalNull(q))
                worst = max(worst, abs(rep.rate - p_r) / rep.mc_se)
                seed += 1
    # q = 0 edge: the formula collapses to alpha no matter what t1 was.
    for t1 in (0.0, 3.0):
        cfg = SimConfig(
            design=ExperimentDesign.ONE_SAMPLE,
            n=20,
            q_true=0.0,
            trials=TRIALS,
            seed=seed,
        )
        rep = simulate_replication(t1, cfg, ALPHA)
        worst = max(worst, abs(rep.rate - ALPHA) / rep.mc_se)
        seed += 1
    ok = worst <= 3.0
    criterion_log(
        5,
        ok,
        f"26 (t1, q, n) scenarios incl. q = 0 edge, "
        f"worst |rate - p_r| = {worst:.2f} mc_se (<= 3)",
    )


def test_criterion_6_r_curve_unimodal_and_thumb_minimum(criterion_log):
    rng = np.random.default_rng(2024)
    grid_u = np.logspace(-4.0, 4.0, 10_000)
    for _ in range(100):
        alpha = float(rng.uniform(0.002, 0.45))
        beta = float(rng.uniform(alpha + 0.02, 0.99))
        nu = float(10 ** rng.uniform(0.0, 2.5))
        n = int(rng.integers(2, 1001))
        r = r_curve(Criteria(alpha=alpha, beta=beta), nu, n, grid_u / n)
        d = np.diff(r)
        k = int(np.argmin(r))
        # strictly down to an interior minimum, then strictly up
        assert 0 < k < r.size - 1, (alpha, beta, nu, n)
        assert np.all(d[:k] < 0.0) and np.all(d[k:] > 0.0), (alpha, beta, nu, n)

    # At beta = 0.5 the minimum has a closed form: qN = 2, and the
    # minimal critical value is THUMB_RATIO times the plain quantile.
    worst_qn = 0.0
    worst_r = 0.0
    for alpha, nu, n in ((0.05, 19.0, 20), (0.01, 8.0, 100), (0.25, 120.0, 5)):
        q_at_min, r_min = minimize_r(Criteria(alpha=alpha, beta=0.5), nu, n)
        worst_qn = max(worst_qn, abs(q_at_min * n - 2.0))
        worst_r = max(worst_r, abs(r_min - THUMB_RATIO * t_quantile(1.0 - alpha, nu)))
    ok = worst_qn <= 1e-6 and worst_r <= 1e-9
    criterion_log(
        6,
        ok,
        "100 random curves unimodal on a 10^4-point grid; beta = 0.5 minimum "
        f"off by {worst_qn:.1e} in qN (<= 1e-6), {worst_r:.1e} in value (<= 1e-9)",
    )


def test_criterion_7_q_interval_endpoints_invert_the_curve(criterion_log):
    rng = np.random.default_rng(7)
    worst_rel = 0.0
    floor_probes = 0
    for _ in range(50):
        alpha = float(rng.uniform(0.002, 0.45))
        beta = float(rng.uniform(alpha + 0.02, 0.99))
        nu = float(10 ** rng.uniform(0.0, 2.5))
        n = int(rng.integers(2, 1001))
        crit = Criteria(alpha=alpha, beta=beta)
        _, r_min = minimize_r(crit, nu, n)

        t1 = float(rng.uniform(1.0005, 6.0)) * r_min
        # ceiling far beyond any root these draws can produce, so q2 is
        # a genuine crossing rather than a censoring artifact
        res = q_interval(t1, crit, nu, n, q_ceiling=1e9)
        assert isinstance(res, QInterval) and not res.q2_censored, (alpha, beta, nu, n)
        for q_root in (res.q1, res.q2):
            rel = abs(r_crit(crit, nu, n, q_root).r_q - t1) / t1
            worst_rel = max(worst_rel, rel)
        mid = r_crit(crit, nu, n, 0.5 * (res.q1 + res.q2)).r_q
        assert mid <= t1 * (1.0 + 1e-8), (alpha, beta, nu, n)

        below = q_interval(0.999 * r_min, crit, nu, n, q_ceiling=1e9)
        assert isinstance(below, NoSolution), (alpha, beta, nu, n)
        floor_probes += 1
    ok = worst_rel <= 1e-8
    criterion_log(
        7,
        ok,
        f"50 solvable instances, worst endpoint residual {worst_rel:.2e} rel "
        f"(<= 1e-8); midpoint below |t1|; {floor_probes}/50 sub-floor probes "
        "returned no-solution",
    )


def _manual_variance(values, ddof):
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values) / (len(values) - ddof)


def _manual_quantile(values, p):
    ordered = sorted(values)
    h = (len(ordered) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(ordered) - 1)
    return ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo])


def _random_multisite_records(rng):
    records = []
    for m in range(4):
        for s in range(int(rng.integers(2, 6))):
            for _ in range(int(rng.integers(3, 21))):
                records.append(
                    MultiSiteRecord(
                        site=f"site{s}",
                        measure=f"m{m}",
                        value=float(rng.integers(-9, 10)),
                    )
                )
    return records


def test_criterion_8_variance_ratio_matches_brute_force(criterion_log):
    rng = np.random.default_rng(8)
    records = _random_multisite_records(rng)
    dataset, _ = ingest(records)

    # independent recomputation straight from the definition
    by_cell = {}
    for rec in records:
        by_cell.setdefault(rec.measure, {}).setdefault(rec.site, []).append(rec.value)

    worst = 0.0
    manual_qs = {}
    for measure, sites in by_cell.items():
        means = [sum(v) / len(v) for v in sites.values()]
        between = _manual_variance(means, 1)
        manual_qs[measure] = []
        for site, values in sites.items():
            within = _manual_variance(values, 1)
            q_manual = between / within
            cell = cell_q(dataset, measure, site)
            worst = max(
                worst,
                abs(cell.within_var - within) / within,
                abs(cell.between_var - between) / between,
                abs(cell.q - q_manual) / q_manual,
            )
            manual_qs[measure].append(q_manual)

    pooled = [q for qs in manual_qs.values() for q in qs]
    expected = {m: qs for m, qs in manual_qs.items()}
    expected["all"] = pooled
    for row in summarize(dataset):
        qs = expected[row.group]
        worst = max(
            worst,
            abs(row.mean_q - sum(qs) / len(qs)) / row.mean_q,
            abs(row.q_lo - _manual_quantile(qs, 0.025)) / max(row.q_lo, 1e-30),
            abs(row.q_hi - _manual_quantile(qs, 0.975)) / row.q_hi,
        )

    # power-of-2 cell and site counts keep every mean dyadic, so a x4
    # rescale and a +7 shift must reproduce the ratios bit for bit
    base = [
        MultiSiteRecord(f"s{s}", f"m{m}", float(rng.integers(-9, 10)))
        for m in range(2)
        for s in range(4)
        for _ in range(8)
    ]
    q_base = [c.q for c in all_cells(ingest(base)[0])]
    scaled = [MultiSiteRecord(r.site, r.measure, 4.0 * r.value) for r in base]
    shifted = [MultiSiteRecord(r.site, r.measure, r.value + 7.0) for r in base]
    exact = q_base == [c.q for c in all_cells(ingest(scaled)[0])] and q_base == [
        c.q for c in all_cells(ingest(shifted)[0])
    ]

    ok = worst <= 1e-12 and exact
    criterion_log(
        8,
        ok,
        f"cells and summaries match brute force within {worst:.2e} (<= 1e-12); "
        "x4 scale and +7 shift leave every q bit-identical",
    )


def test_criterion_9_q_zero_reduces_to_point_form(criterion_log):
    rng = np.random.default_rng(99)
    null0 = DistributionalNull(0.0)
    worst_p = 0.0
    worst_crit = 0.0
    worst_pr = 0.0
    exact_zeros = True
    for _ in range(200):
        z = float(rng.uniform(-6.0, 6.0))
        n = int(rng.integers(2, 1001))
        nu = float(10 ** rng.uniform(0.0, 2.7))
        alpha = float(rng.uniform(0.002, 0.45))
        t1 = z * math.sqrt(n)

        worst_p = max(
            worst_p, abs(dist_p_value(t1, nu, n, null0) - point_p_value(z, n, nu))
        )
        z_crit = point_z_crit(alpha, n, nu)
        scale = max(1.0, z_crit * math.sqrt(n))
        worst_crit = max(
            worst_crit,
            abs(dist_t_crit(alpha, nu, n, null0) - z_crit * math.sqrt(n)) / scale,
            abs(dist_z_crit(alpha, nu, n, null0) - z_crit) / scale,
        )
        worst_pr = max(
            worst_pr, abs(replication_probability(t1, alpha, nu, n, null0) - alpha)
        )

        post = posterior_update(float(rng.uniform(-3.0, 3.0)), n, null0)
        exact_zeros = exact_zeros and post.mu_n == 0.0 and post.shrinkage == 0.0
        exact_zeros = exact_zeros and post.var_n_over_sigma2 == 0.0
        exact_zeros = exact_zeros and asymptotic_z_bound(alpha, nu, null0) == 0.0

    ok = worst_p <= 1e-13 and worst_crit <= 1e-13 and worst_pr <= 1e-13 and exact_zeros
    criterion_log(
        9,
        ok,
        f"200 draws: p dev {worst_p:.1e}, critical-value dev {worst_crit:.1e}, "
        f"p_r - alpha dev {worst_pr:.1e} (all <= 1e-13); "
        "posterior and asymptotic bound exactly zero",
    )
