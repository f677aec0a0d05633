use crate::error::{Error, Result};

fn check(epsilon: f64, p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p = {p} must lie in (1, ∞); q is undefined otherwise")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// `h(t) = t/p + t^{−q/p}/q`, minimal at t = 1 with h(1) = 1.
pub fn young_h(t: f64, p: f64) -> f64 {
    let q = p / (p - 1.0);
    t / p + t.powf(-q / p) / q
}

/// `δ = min(h(1−ε), h(1+ε)) − 1`.
///
/// With `t = a^{p/q}/b` the hypothesis `a^p/p + b^q/q ≤ ab/(1−δ)` reads
/// `h(t) ≤ 1/(1−δ)`, which allows `h(t) − 1` up to `δ/(1−δ) > δ`. Pairs in
/// that margin satisfy the hypothesis with `|t − 1| ≥ ε`; see
/// [`young_delta_certified`].
pub fn young_delta(epsilon: f64, p: f64) -> Result<f64> {
    check(epsilon, p)?;
    Ok(young_h(1.0 - epsilon, p).min(young_h(1.0 + epsilon, p)) - 1.0)
}

/// `m/(1+2m)` with `m` = [`young_delta`]. Then `1/(1−δ) < 1 + m`, so the
/// hypothesis forces `h(t) < min(h(1−ε), h(1+ε))` and hence `|t − 1| < ε`.
pub fn young_delta_certified(epsilon: f64, p: f64) -> Result<f64> {
    let m = young_delta(epsilon, p)?;
    Ok(m / (1.0 + 2.0 * m))
}
