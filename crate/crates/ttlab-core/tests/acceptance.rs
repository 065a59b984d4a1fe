//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured values and the pinned tolerance.
//!
//! Every threshold is written out here; nothing is tuned at runtime. Run
//! with `cargo test -p ttlab-core --test acceptance -- --nocapture` to see
//! the per-criterion lines for passing tests too.

use ttlab_core::analytic::{
    exp_cdf, expected_outdegree_ge_series, mixture_mgf, rate_function, second_moment_upper_series,
    size_pmf_n1,
};
use ttlab_core::brw::{
    martingale_statistic, moment_sequence, sample_generation, sample_limit_recursive, EpsSign,
};
use ttlab_core::harness::{
    chi_square_from_counts, dkw_radius, ks_statistic, ks_two_sample, run, EmpiricalDistribution,
    ExperimentConfig, SampleSummary,
};
use ttlab_core::numeric::{ks_p_value_two_sample, ln_factorial};
use ttlab_core::rng::SeedSpec;
use ttlab_core::sampler::sample_tree_recursive;
use ttlab_core::stats;
use ttlab_core::tree::{SampleBudget, TreeParams};

const E: f64 = std::f64::consts::E;

fn seed() -> SeedSpec {
    SeedSpec::new(20260808, 0)
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    eprintln!("acceptance {criterion}: {status} — {detail}");
    assert!(pass, "{criterion}: {detail}");
}

/// Criterion 1: 10^5 samples of |T_{1,1}| match the pmf (m−1)/m! on bins
/// 1..8 plus tail by chi-square at the 1e-3 level; the oracle pmf sums to 1
/// and has mean e to 1e-12; runtime below 5 s.
#[test]
fn criterion_01_exact_n1_law() {
    let start = std::time::Instant::now();
    let pmf_total: f64 = (1..=200).map(size_pmf_n1).sum();
    let pmf_mean: f64 = (1..=200).map(|m| m as f64 * size_pmf_n1(m)).sum();
    assert!((pmf_total - 1.0).abs() < 1e-12, "pmf total {pmf_total}");
    assert!((pmf_mean - E).abs() < 1e-12, "pmf mean {pmf_mean}");

    let replicas = 100_000u64;
    let params = TreeParams::new(1, 1.0);
    let mut observed = [0u64; 10]; // bins 1..8 at indices 1..8, tail at 9
    for r in 0..replicas {
        let tree = sample_tree_recursive(params, seed().replica(r), SampleBudget::default())
            .expect("n=1 sampling");
        let size = stats::size(&tree).min(9) as usize;
        observed[size] += 1;
    }
    let mut expected = [0.0f64; 10];
    let mut head = 0.0;
    for m in 1..=8u64 {
        expected[m as usize] = size_pmf_n1(m) * replicas as f64;
        head += size_pmf_n1(m);
    }
    expected[9] = (1.0 - head) * replicas as f64;
    let chi = chi_square_from_counts(&observed[1..], &expected[1..]).unwrap();
    let elapsed = start.elapsed();
    report(
        "criterion 01 (exact n=1 size law)",
        chi.p_value > 1e-3 && elapsed.as_secs_f64() < 5.0,
        &format!(
            "chi2 = {:.3} (df {}), p = {:.5} vs alpha 1e-3; runtime {:.2?} < 5 s",
            chi.statistic, chi.dof, chi.p_value, elapsed
        ),
    );
}

/// Criterion 2: 10^4-replica mean of |T| within 4 SE of e^{np} for
/// (n,p) in {(4,1), (8,1), (10,0.5)}; runtime below 60 s.
#[test]
fn criterion_02_mean_size() {
    let start = std::time::Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for (n, p) in [(4u32, 1.0f64), (8, 1.0), (10, 0.5)] {
        let config = ExperimentConfig::new("size_limit", 10_000, seed())
            .with_params(TreeParams::new(n, p))
            .with_workers(workers());
        let result = run(&config).unwrap();
        let ok = result.verdicts["mean_within_4_se_of_one"];
        pass &= ok;
        detail.push_str(&format!(
            "({n},{p}): mean/e^np = {:.4} [{}]; ",
            result.estimates["mean_normalized_size"],
            if ok { "ok" } else { "off" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 60.0;
    detail.push_str(&format!("runtime {elapsed:.2?} < 60 s"));
    report("criterion 02 (mean size)", pass, &detail);
}

/// Criterion 3: KS(|T_{n,1}|/e^n vs Exp(1)) strictly decreasing over
/// n in {4, 8, 12} at 2000 replicas, and at most 0.05 at n = 12; runtime
/// below 10 min.
#[test]
fn criterion_03_size_limit_law() {
    let start = std::time::Instant::now();
    let mut distances = Vec::new();
    for n in [4u32, 8, 12] {
        let config = ExperimentConfig::new("size_limit", 2000, seed())
            .with_params(TreeParams::new(n, 1.0))
            .with_workers(workers());
        let result = run(&config).unwrap();
        distances.push(result.test_statistics["ks_vs_exp_cdf"]);
    }
    let decreasing = distances.windows(2).all(|w| w[0] > w[1]);
    let last_ok = distances[2] <= 0.05;
    let elapsed = start.elapsed();
    report(
        "criterion 03 (size limit law)",
        decreasing && last_ok && elapsed.as_secs_f64() < 600.0,
        &format!(
            "KS = {:.4} > {:.4} > {:.4}, final <= 0.05; runtime {:.2?} < 10 min",
            distances[0], distances[1], distances[2], elapsed
        ),
    );
}

/// Criterion 4: per-coordinate two-sample KS between tree-derived root
/// masses and the (E1 U1, E2 U1 U2) reference at n = 12, p = 1, m = 2,
/// 2000 replicas each side, not rejected at alpha = 1e-3.
///
/// Known calibration gap: at n = 12 the normalized root masses are still
/// measurably away from the limit law (the largest-label factor is
/// Beta(1,12)-like rather than exponential, KS gap about 0.02, and the
/// per-subtree size limit itself carries a gap about 0.05), so the
/// two-sample distance sits at 0.05–0.09 across seeds while the 1e-3
/// critical value at 2000 vs 2000 is 0.0616. The test states the criterion
/// as pinned and reports the measurement honestly.
#[test]
fn criterion_04_root_mass_joint_law() {
    let mut config = ExperimentConfig::new("root_mass", 2000, seed())
        .with_params(TreeParams::new(12, 1.0))
        .with_workers(workers());
    config.extra.m = Some(2);
    let result = run(&config).unwrap();
    let pass = result.verdicts["coord_0_not_rejected"] && result.verdicts["coord_1_not_rejected"];
    report(
        "criterion 04 (root mass joint law)",
        pass,
        &format!(
            "coord 0: D = {:.4}, p = {:.5}; coord 1: D = {:.4}, p = {:.5}; alpha = 1e-3 \
             (critical D at 2000 vs 2000 is 0.0616; the finite-n distributional gap at n = 12 \
             is itself ~0.05-0.07, so this pinned tolerance is not attainable at this scale)",
            result.test_statistics["ks_coord_0"],
            result.test_statistics["ks_p_value_coord_0"],
            result.test_statistics["ks_coord_1"],
            result.test_statistics["ks_p_value_coord_1"],
        ),
    );
}

/// Criterion 5: KS of 10^5 samples of Σ_{i≤64} E_i Π_{j≤i} U_j against
/// Exp(1) within the DKW radius at alpha = 1e-3.
#[test]
fn criterion_05_remark_identity() {
    let mut config =
        ExperimentConfig::new("remark_identity", 100_000, seed()).with_workers(workers());
    config.extra.truncation = Some(64);
    let result = run(&config).unwrap();
    report(
        "criterion 05 (remark identity)",
        result.verdicts["ks_within_dkw_radius"],
        &format!(
            "KS = {:.5} vs DKW radius {:.5} at alpha 1e-3; truncation tail mean 2^-64",
            result.test_statistics["ks_vs_exp_cdf"], result.test_statistics["dkw_radius"],
        ),
    );
}

/// Criterion 6: recursive vs spacings two-sample KS on size and height not
/// rejected at 1e-3 for (2,0.8), (3,0.7), (8,1) with 10^4 replicas; both
/// against the rejection oracle at (3,0.7) with truncation bound < 1e-6.
#[test]
fn criterion_06_sampler_equivalence() {
    let mut detail = String::new();
    let mut pass = true;
    for (n, p) in [(2u32, 0.8f64), (3, 0.7), (8, 1.0)] {
        let config = ExperimentConfig::new("sampler_equivalence", 10_000, seed())
            .with_params(TreeParams::new(n, p))
            .with_workers(workers());
        let result = run(&config).unwrap();
        for metric in ["size", "height"] {
            pass &= result.verdicts[&format!("{metric}_recursive_vs_spacings_not_rejected")];
        }
        detail.push_str(&format!(
            "({n},{p}): D_size = {:.4}, D_height = {:.4}; ",
            result.test_statistics["ks_size_recursive_vs_spacings"],
            result.test_statistics["ks_height_recursive_vs_spacings"],
        ));
        if (n, p) == (3, 0.7) {
            let bound = result.estimates["rejection_truncation_bound"];
            pass &= bound < 1e-6;
            for pair in ["recursive_vs_rejection", "spacings_vs_rejection"] {
                for metric in ["size", "height"] {
                    pass &= result.verdicts[&format!("{metric}_{pair}_not_rejected")];
                }
            }
            detail.push_str(&format!("rejection oracle bound = {bound:.2e} < 1e-6; "));
        }
    }
    report(
        "criterion 06 (sampler equivalence)",
        pass,
        &format!("{detail}alpha = 1e-3"),
    );
}

/// Criterion 7: mean H/(np) strictly increasing across np in {5, 10, 15}
/// (p = 0.5 grid), final value in [2.0, e + 0.1], and the union-bound tail
/// P(H >= e n p + 10) at most 0.01; 200 replicas; runtime below 15 min.
#[test]
fn criterion_07_height_scaling() {
    let start = std::time::Instant::now();
    let mut config = ExperimentConfig::new("height_scaling", 200, seed())
        .with_params(TreeParams::new(30, 0.5))
        .with_workers(workers());
    config.extra.n_grid = Some(vec![10, 20, 30]);
    let result = run(&config).unwrap();
    let elapsed = start.elapsed();
    let pass = result.verdicts["means_strictly_increasing"]
        && result.verdicts["final_mean_in_envelope"]
        && result.verdicts["union_bound_tail"]
        && elapsed.as_secs_f64() < 900.0;
    report(
        "criterion 07 (height scaling)",
        pass,
        &format!(
            "mean H/np = {:.3} < {:.3} < {:.3}, final in [2.0, {:.3}], tail freq {:.4} <= 0.01; \
             runtime {:.2?} < 15 min",
            result.estimates["mean_h_over_np_n010"],
            result.estimates["mean_h_over_np_n020"],
            result.estimates["mean_h_over_np_n030"],
            E + 0.1,
            result.estimates["freq_h_ge_e_np_plus_10_n030"],
            elapsed
        ),
    );
}

/// Criterion 8: at n = 12, p = 1, eps = 0.2 the mean fraction of vertices
/// with depth in [(1−eps)n, (1+eps)n] is at least 0.95 over 500 trees.
///
/// Known calibration gap: generation sizes track (np)^k/k! e^{-np}
/// profile weights, and Poisson(12) puts only ~0.53 of its mass within
/// ±20% of its mean (0.95 needs eps·sqrt(np) ≈ 2, i.e. n ≈ 96, where e^n
/// nodes cannot be sampled). The measured mean fraction is ~0.50. The test
/// states the pinned target and reports the measurement honestly.
#[test]
fn criterion_08_depth_concentration() {
    let mut config = ExperimentConfig::new("depth_concentration", 500, seed())
        .with_params(TreeParams::new(12, 1.0))
        .with_workers(workers());
    config.extra.eps = Some(0.2);
    let result = run(&config).unwrap();
    report(
        "criterion 08 (depth concentration)",
        result.verdicts["mean_fraction_ge_target"],
        &format!(
            "mean fraction in ±20% band = {:.4} (se {:.4}) vs target 0.95 \
             (the profile-weight mass of Poisson(12) in that band is ~0.53, so the pinned \
             target is not attainable at n = 12)",
            result.estimates["mean_fraction_in_band"], result.estimates["se_fraction_in_band"],
        ),
    );
}

/// Criterion 9: MC mean of L_{n,k}/e^n within 4 SE of the out-degree
/// series differences at n = 12 for k = 0..4, and the series at n = 100
/// within 2% of 2^{-(k+1)} for k = 0..4.
#[test]
fn criterion_09_degree_distribution() {
    let config = ExperimentConfig::new("degree_distribution", 2000, seed())
        .with_params(TreeParams::new(12, 1.0))
        .with_workers(workers());
    let result = run(&config).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for k in 0..=4u32 {
        pass &= result.verdicts[&format!("within_4_se_of_series_k{k}")];
        detail.push_str(&format!(
            "k={k}: MC {:.4} vs series {:.4}; ",
            result.estimates[&format!("mean_ratio_k{k}")],
            result.estimates[&format!("series_ratio_k{k}")],
        ));
    }
    let scale = (100f64).exp();
    let series = |k: u32| {
        expected_outdegree_ge_series(100, k, 700)
            .unwrap()
            .value
    };
    for k in 0..=4u32 {
        let ratio = (series(k) - series(k + 1)) / scale;
        let limit = (2.0f64).powi(-(k as i32) - 1);
        let rel = (ratio - limit).abs() / limit;
        pass &= rel < 0.02;
        detail.push_str(&format!("n=100 k={k}: rel gap {rel:.4}; "));
    }
    report(
        "criterion 09 (degree distribution)",
        pass,
        &format!("{detail}tolerances: 4 SE (MC), 2% (series vs limit)"),
    );
}

/// Criterion 10: the truncated second-moment series dominates the MC second
/// moment (within sampling error) and stays below 5 e^{2np} + tail for
/// (n,p) in {(2,1), (6,1)}.
#[test]
fn criterion_10_second_moment_bound() {
    let mut pass = true;
    let mut detail = String::new();
    for (n, p) in [(2u32, 1.0f64), (6, 1.0)] {
        let np = n as f64 * p;
        let series = second_moment_upper_series(n, p, 200).unwrap();
        let replicas = 10_000u64;
        let params = TreeParams::new(n, p);
        let squares: Vec<f64> = (0..replicas)
            .map(|r| {
                let tree =
                    sample_tree_recursive(params, seed().child(10).replica(r), SampleBudget::default())
                        .unwrap();
                let size = stats::size(&tree) as f64;
                size * size
            })
            .collect();
        let summary = SampleSummary::of(&squares);
        let dominates = summary.mean <= series.value + 4.0 * summary.se;
        let below_five = series.value <= 5.0 * (2.0 * np).exp() + series.tail_bound;
        pass &= dominates && below_five;
        detail.push_str(&format!(
            "({n},{p}): MC E|T|^2 = {:.1} (se {:.1}) vs series {:.1} vs 5e^{{2np}} = {:.1}; ",
            summary.mean,
            summary.se,
            series.value,
            5.0 * (2.0 * np).exp()
        ));
    }
    report("criterion 10 (second moment bound)", pass, &detail);
}

/// Criterion 11: E X_L = 1/2 within 4 SE for L in {0,4,8,12}; moment
/// recursion equals k!/2^k to 1e-12 for k <= 12; heap-sampled X_6 vs
/// recursion-sampled X_6 two-sample KS not rejected at 1e-3; KS(X_14 vs
/// 1 − e^{−2x}) below 0.02 with 10^4 replicas; mean max-term ratio strictly
/// decreasing over L in {4,8,12,16}.
#[test]
fn criterion_11_brw_martingale_suite() {
    let mut pass = true;
    let mut detail = String::new();

    // moment recursion against the closed form
    let moments = moment_sequence(12);
    for k in 0..=12u64 {
        let exact = (ln_factorial(k) - k as f64 * std::f64::consts::LN_2).exp();
        pass &= ((moments.a[k as usize] - exact) / exact).abs() < 1e-12;
    }
    detail.push_str("a_k = k!/2^k to 1e-12 for k <= 12; ");

    // means at {0,4,8,12} and the limit-law KS at 14, one harness run
    let mut config = ExperimentConfig::new("brw_martingale", 10_000, seed()).with_workers(workers());
    config.extra.l_grid = Some(vec![0, 4, 8, 12, 14]);
    let result = run(&config).unwrap();
    pass &= result.verdicts["means_within_4_se"];
    pass &= result.verdicts["ks_largest_below_tolerance"];
    detail.push_str(&format!(
        "E X_L in 4 SE of 1/2 at L in {{0,4,8,12,14}}; KS(X_14 vs Exp(1/2)) = {:.4} < 0.02; ",
        result.test_statistics["ks_x_largest_vs_exp_half"]
    ));

    // heap construction vs distributional recursion at L = 6
    let reps = 10_000u64;
    let heap: Vec<f64> = (0..reps)
        .map(|r| {
            martingale_statistic(
                &sample_generation(6, 0.0, EpsSign::None, seed().child(61).replica(r)).unwrap(),
            )
        })
        .collect();
    let recursive: Vec<f64> = (0..reps)
        .map(|r| sample_limit_recursive(6, seed().child(62).replica(r)).unwrap())
        .collect();
    let d = ks_two_sample(
        &EmpiricalDistribution::new(heap).unwrap(),
        &EmpiricalDistribution::new(recursive).unwrap(),
    );
    let p = ks_p_value_two_sample(d, reps as usize, reps as usize);
    pass &= p >= 1e-3;
    detail.push_str(&format!("heap vs recursion at L=6: D = {d:.4}, p = {p:.4}; "));

    // max-term ratio monotone decrease over {4,8,12,16}
    let mut config = ExperimentConfig::new("brw_martingale", 2000, seed()).with_workers(workers());
    config.extra.l_grid = Some(vec![4, 8, 12, 16]);
    let result = run(&config).unwrap();
    pass &= result.verdicts["max_ratio_strictly_decreasing"];
    detail.push_str(&format!(
        "max ratio {:.4} > {:.4} > {:.4} > {:.4}",
        result.estimates["mean_max_ratio_l04"],
        result.estimates["mean_max_ratio_l08"],
        result.estimates["mean_max_ratio_l12"],
        result.estimates["mean_max_ratio_l16"],
    ));
    report("criterion 11 (BRW martingale suite)", pass, &detail);
}

/// Criterion 12: the mixture MGF reduces to 1/(1−λ) at k = 1 to 1e-12;
/// rate_function(1, x) equals x − 1 − log x to 1e-8 on {0.2, 0.5, 0.9};
/// I(x) respects the logarithmic upper bound on k in {2,5,10}; the tilted
/// MC rate at k = 2, x = 0.8, n in {50,100} sits between I(x) − 2 SE and
/// the upper bound + 2 SE.
#[test]
fn criterion_12_cramer_module() {
    let mut pass = true;
    let mut detail = String::new();
    for lambda in [-2.0, -0.5, 0.25, 0.5, 0.9] {
        let got = mixture_mgf(1, lambda).unwrap();
        pass &= (got - 1.0 / (1.0 - lambda)).abs() < 1e-12;
    }
    detail.push_str("MGF(1, λ) = 1/(1−λ) to 1e-12; ");
    for x in [0.2, 0.5, 0.9] {
        let got = rate_function(1, x).unwrap().value;
        let exact = x - 1.0 - x.ln();
        pass &= (got - exact).abs() < 1e-8;
    }
    detail.push_str("I_1(x) = x − 1 − log x to 1e-8; ");
    for k in [2u32, 5, 10] {
        let hi = (k as f64 + 1.0) / 2.0;
        for i in 1..20 {
            let x = hi * i as f64 / 20.0;
            let r = rate_function(k, x).unwrap();
            pass &= r.value <= r.upper_bound + 1e-9;
        }
    }
    detail.push_str("I(x) <= log k − log x − 1 + φ(k) + 1e-9 on the grid; ");
    let mut config = ExperimentConfig::new("cramer_check", 100_000, seed()).with_workers(workers());
    config.extra.k = Some(2);
    config.extra.x = Some(0.8);
    config.extra.n_grid = Some(vec![50, 100]);
    let result = run(&config).unwrap();
    for n in [50u32, 100] {
        let band = result.verdicts[&format!("rate_in_band_n{n:04}")];
        let enough = !result.verdicts[&format!("insufficient_tail_mass_n{n:04}")];
        pass &= band && enough;
        detail.push_str(&format!(
            "n={n}: rate {:.4} in [I − 2SE, upper + 2SE] = [{:.4}, {:.4}]; ",
            result.estimates[&format!("rate_n{n:04}")],
            result.estimates["i_x"],
            result.estimates["upper_bound"],
        ));
    }
    report("criterion 12 (Cramér module)", pass, &detail);
}

/// Criterion 13: rerunning any experiment with a different worker count
/// yields a byte-identical canonical result document.
#[test]
fn criterion_13_determinism() {
    let mut pass = true;
    let mut detail = String::new();
    let configs = [
        ExperimentConfig::new("size_limit", 1000, seed()).with_params(TreeParams::new(6, 1.0)),
        {
            let mut c = ExperimentConfig::new("brw_martingale", 500, seed());
            c.extra.l_grid = Some(vec![0, 4]);
            c
        },
        ExperimentConfig::new("remark_identity", 2000, seed()),
    ];
    for config in configs {
        let one = run(&config.clone().with_workers(1)).unwrap();
        let many = run(&config.clone().with_workers(8)).unwrap();
        let identical = one.canonical_json() == many.canonical_json();
        pass &= identical;
        detail.push_str(&format!(
            "{}: 1 vs 8 workers {}; ",
            config.name,
            if identical { "identical" } else { "DIFFER" }
        ));
    }
    report("criterion 13 (determinism)", pass, &detail);
}

/// Sanity check used by several criteria: the empirical distribution and
/// one-sample KS machinery agree with a hand case.
#[test]
fn ks_machinery_hand_check() {
    let edf = EmpiricalDistribution::new(vec![std::f64::consts::LN_2]).unwrap();
    assert!((ks_statistic(&edf, exp_cdf) - 0.5).abs() < 1e-12);
    assert!((dkw_radius(10_000, 1e-3).unwrap() - 0.0195).abs() < 1e-4);
}
