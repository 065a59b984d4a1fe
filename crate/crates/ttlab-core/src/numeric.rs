//! Shared numeric kernels: log-gamma, regularized incomplete gamma,
//! Kolmogorov tail, compensated summation, and rigorous exponential-series
//! tail bounds.

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln(k!), exact for small k.
pub fn ln_factorial(k: u64) -> f64 {
    const EXACT: [f64; 21] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
        6227020800.0,
        87178291200.0,
        1307674368000.0,
        20922789888000.0,
        355687428096000.0,
        6402373705728000.0,
        121645100408832000.0,
        2432902008176640000.0,
    ];
    if k <= 20 {
        EXACT[k as usize].ln()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Upper regularized incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
///
/// Series for x < a + 1, Lentz continued fraction otherwise.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "regularized_gamma_q domain");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_cf(a, x)
    }
}

fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Survival function of a chi-square with `df` degrees of freedom.
pub fn chi_square_sf(stat: f64, df: f64) -> f64 {
    regularized_gamma_q(df / 2.0, stat / 2.0)
}

/// Kolmogorov distribution tail Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200u32 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_from_effective(d: f64, n_eff: f64) -> f64 {
    // Stephens' small-sample correction to the asymptotic Kolmogorov law.
    let root = n_eff.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * d)
}

/// Approximate p-value of a one-sample KS statistic.
pub fn ks_p_value_one_sample(d: f64, n: usize) -> f64 {
    ks_p_from_effective(d, n as f64)
}

/// Approximate p-value of a two-sample KS statistic.
pub fn ks_p_value_two_sample(d: f64, m: usize, n: usize) -> f64 {
    let m = m as f64;
    let n = n as f64;
    ks_p_from_effective(d, m * n / (m + n))
}

/// Neumaier compensated summation; keeps 2^L-term reductions exact enough
/// that evaluation order does not show up in the output.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Rigorous upper bound on the exponential-series tail Σ_{k>l} x^k / k!.
///
/// Bounds the tail by a geometric series with ratio x/(l+2); requires
/// l + 2 > x, otherwise returns infinity.
pub fn exp_series_tail_bound(x: f64, l: u64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let ratio = x / (l as f64 + 2.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_first = (l as f64 + 1.0) * x.ln() - ln_factorial(l + 1);
    ln_first.exp() / (1.0 - ratio)
}
