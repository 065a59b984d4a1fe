//! Closed forms and series: expected size and generation sizes, the exact
//! n = 1 size law, the truncated second-moment upper bound, the out-degree
//! series, and the gamma-mixture MGF with its rate function.
//!
//! Every truncated series returns a rigorous tail bound; there are no silent
//! cutoffs.

use crate::numeric::{exp_series_tail_bound, ln_factorial, CompensatedSum};
use crate::tree::InvalidParams;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncation tail bound {bound:e} exceeds tolerance {tolerance:e}; raise l_max")]
    TailBoundTooLarge { bound: f64, tolerance: f64 },
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
}

/// A truncated series together with a rigorous bound on what was cut off.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
}

/// E|T| = e^{np}.
pub fn expected_size(n: u32, p: f64) -> f64 {
    (n as f64 * p).exp()
}

/// Expected number of vertices at depth k: (np)^k / k!.
pub fn expected_generation_size(n: u32, p: f64, k: u64) -> f64 {
    let np = n as f64 * p;
    if np == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * np.ln() - ln_factorial(k)).exp()
}

/// P(|T| = m) for n = 1, p = 1: (m − 1) / m!.
pub fn size_pmf_n1(m: u64) -> f64 {
    assert!(m >= 1, "size_pmf_n1: m must be at least 1");
    if m == 1 {
        return 0.0;
    }
    (((m - 1) as f64).ln() - ln_factorial(m)).exp()
}

/// Truncated upper bound on E|T|², decomposed as I + II + III:
/// I = e^{np}, II = Σ (2np)^ℓ/ℓ!, and III the double sum
/// Σ_{ℓ≥0} Σ_{m=1}^{ℓ} (np)^ℓ/ℓ! · (np)^m/m! · (1 + ℓ/m)
/// that the geometric-series bound on the overlap count produces.
///
/// Requires l_max large enough that the tail bound is below 1e-6 · e^{2np}.
pub fn second_moment_upper_series(
    n: u32,
    p: f64,
    l_max: u64,
) -> Result<SeriesValue, AnalyticError> {
    let np = n as f64 * p;
    let tolerance = 1e-6 * (2.0 * np).exp();
    let l = l_max as usize;
    // Poisson-style weights w[j] = (np)^j / j!
    let mut weights = vec![0.0f64; l + 1];
    weights[0] = 1.0;
    for j in 1..=l {
        weights[j] = weights[j - 1] * np / j as f64;
    }
    let term_i = np.exp();
    let mut term_ii = CompensatedSum::new();
    let mut w2 = 1.0f64; // (2np)^j / j!
    term_ii.add(w2);
    for j in 1..=l {
        w2 *= 2.0 * np / j as f64;
        term_ii.add(w2);
    }
    let mut term_iii = CompensatedSum::new();
    // Σ_m w[m] and Σ_m w[m]/m prefixes keep the double sum O(l_max).
    let mut sum_w = 0.0f64;
    let mut sum_w_over_m = 0.0f64;
    for (ell, &w) in weights.iter().enumerate() {
        if ell >= 1 {
            sum_w += w;
            sum_w_over_m += w / ell as f64;
        }
        term_iii.add(w * (sum_w + ell as f64 * sum_w_over_m));
    }
    // Tails: II is an exponential series in 2np; III is bounded by
    // e^{np} Σ_{ℓ>L} w[ℓ](1 + ℓ) = e^{np} (T(np, L) + np T(np, L−1)).
    let tail_ii = exp_series_tail_bound(2.0 * np, l_max);
    let tail_iii = np.exp()
        * (exp_series_tail_bound(np, l_max)
            + np * exp_series_tail_bound(np, l_max.saturating_sub(1)));
    let tail_bound = tail_ii + tail_iii;
    if tail_bound.is_nan() || tail_bound >= tolerance {
        return Err(AnalyticError::TailBoundTooLarge {
            bound: tail_bound,
            tolerance,
        });
    }
    Ok(SeriesValue {
        value: term_i + term_ii.value() + term_iii.value(),
        terms_used: l_max + 1,
        tail_bound,
    })
}

/// Truncated series for E L_{n,≥k} at p = 1:
/// Σ_{ℓ=0}^{l_max} n^ℓ/ℓ! · Π_{i=0}^{k−1} 1/(1 + ℓ/(n−i)).
///
/// The ℓ = 0 term (the root, product 1) is included explicitly.
pub fn expected_outdegree_ge_series(
    n: u32,
    k: u32,
    l_max: u64,
) -> Result<SeriesValue, AnalyticError> {
    if n < 1 {
        return Err(InvalidParams("n must be at least 1".into()).into());
    }
    if k > n {
        return Err(InvalidParams(format!("k = {k} exceeds n = {n}")).into());
    }
    let nf = n as f64;
    let tolerance = 1e-8 * nf.exp();
    let mut sum = CompensatedSum::new();
    let mut weight = 1.0f64; // n^ℓ / ℓ!
    for ell in 0..=l_max {
        if ell > 0 {
            weight *= nf / ell as f64;
        }
        let mut product = 1.0f64;
        for i in 0..k {
            product /= 1.0 + ell as f64 / (nf - i as f64);
        }
        sum.add(weight * product);
    }
    // the per-ℓ product is at most 1, so the Poisson tail bounds the cut
    let tail_bound = exp_series_tail_bound(nf, l_max);
    if tail_bound.is_nan() || tail_bound >= tolerance {
        return Err(AnalyticError::TailBoundTooLarge {
            bound: tail_bound,
            tolerance,
        });
    }
    Ok(SeriesValue {
        value: sum.value(),
        terms_used: l_max + 1,
        tail_bound,
    })
}

/// Limit of E L_{n,k} / e^{np}: 2^{-(k+1)}.
pub fn degree_limit(k: u32) -> f64 {
    (2.0f64).powi(-(k as i32) - 1)
}

/// MGF of X = Gamma(K) with K uniform on {1, …, k}:
/// (−1/(kλ)) (1 − (1−λ)^{−k}) for λ < 1, λ ≠ 0; 1 at λ = 0.
///
/// The removable singularity at 0 is evaluated by a 3-term Taylor expansion
/// below |λ| = 1e-6.
pub fn mixture_mgf(k: u32, lambda: f64) -> Result<f64, AnalyticError> {
    if k < 1 {
        return Err(InvalidParams("k must be at least 1".into()).into());
    }
    if lambda >= 1.0 {
        return Err(AnalyticError::Domain(format!(
            "MGF is infinite for lambda = {lambda} >= 1"
        )));
    }
    let kf = k as f64;
    if lambda.abs() < 1e-6 {
        let m1 = (kf + 1.0) / 2.0;
        let m2 = (kf + 1.0) * (kf + 2.0) / 6.0;
        let m3 = (kf + 1.0) * (kf + 2.0) * (kf + 3.0) / 24.0;
        return Ok(1.0 + lambda * (m1 + lambda * (m2 + lambda * m3)));
    }
    Ok(-1.0 / (kf * lambda) * (1.0 - (1.0 - lambda).powi(-(k as i32))))
}

/// Output of the Legendre–Fenchel transform of the mixture log-MGF.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFunctionResult {
    /// I(x), the large-deviations rate.
    pub value: f64,
    /// λ* < 0 where the supremum is attained.
    pub maximizer: f64,
    /// log k − log x − 1 + φ(k).
    pub upper_bound: f64,
    /// φ(k) = −log(1 − (1−λ*)^{−k}).
    pub phi_k: f64,
}

/// Lower-tail rate function I(x) = sup_λ (λx − log MGF(λ)) for the gamma
/// mixture, valid on 0 < x < (k+1)/2 where the supremum sits at some
/// λ* < 0. Bracketing plus golden-section search to |interval| < 1e-10.
pub fn rate_function(k: u32, x: f64) -> Result<RateFunctionResult, AnalyticError> {
    if k < 1 {
        return Err(InvalidParams("k must be at least 1".into()).into());
    }
    let kf = k as f64;
    if !(x > 0.0 && x < (kf + 1.0) / 2.0) {
        return Err(AnalyticError::Domain(format!(
            "x = {x} outside (0, (k+1)/2) = (0, {})",
            (kf + 1.0) / 2.0
        )));
    }
    let objective = |lambda: f64| -> f64 {
        let mgf = mixture_mgf(k, lambda).expect("lambda < 0 is inside the MGF domain");
        lambda * x - mgf.ln()
    };
    let right = -1e-12;
    let mut left = -(10.0f64).max(4.0 * kf / x);
    // J → −∞ as λ → −∞, so doubling finds a point past the maximum.
    for _ in 0..60 {
        if objective(left) < objective(left / 2.0) || !objective(left * 2.0).is_finite() {
            break;
        }
        left *= 2.0;
    }
    let (maximizer, value) = golden_section_max(objective, left, right, 1e-10);
    let phi_k = -(1.0 - (1.0 - maximizer).powi(-(k as i32))).ln();
    let upper_bound = kf.ln() - x.ln() - 1.0 + phi_k;
    Ok(RateFunctionResult {
        value,
        maximizer,
        upper_bound,
        phi_k,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// CDF of an Exponential(1): max(0, 1 − e^{−x}).
pub fn exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}
