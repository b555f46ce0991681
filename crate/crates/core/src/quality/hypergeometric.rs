use crate::rule::Covering;

fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Upper tail `P(X >= p)` for `X ~ Hypergeometric(P + N, P, p + n)`.
///
/// The first tail term comes from log-gamma; later terms follow the
/// ratio recurrence, and the tail is summed with log-sum-exp.
pub fn hypergeometric_pvalue(c: &Covering) -> f64 {
    let population = c.total();
    let successes = c.total_pos;
    let draws = c.covered();
    let failures = c.total_neg;
    let lowest = draws.saturating_sub(failures);
    let highest = successes.min(draws);
    if c.p <= lowest {
        return 1.0;
    }
    if c.p > highest {
        return 0.0;
    }

    let mut log_term = ln_choose(successes, c.p) + ln_choose(failures, draws - c.p) - ln_choose(population, draws);
    let mut terms = Vec::with_capacity(highest - c.p + 1);
    terms.push(log_term);
    for k in c.p..highest {
        // t(k+1)/t(k) = (K - k)(n - k) / ((k + 1)(N - K - n + k + 1))
        let num = ((successes - k) * (draws - k)) as f64;
        let den = ((k + 1) * (failures + k + 1 - draws)) as f64;
        log_term += (num / den).ln();
        terms.push(log_term);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().clamp(0.0, 1.0)
}
