//! Log-normal random variables parameterized in the dB domain.
//!
//! A variate `Y` is described by the mean and standard deviation of
//! `10·log10(Y)`. Scaling, inversion and squaring stay inside the family, so
//! every SNR in the analytic engine is carried as a [`LogNormalDb`].
//!
//! Moment formulas use `λ = ln(10)/10`, the factor converting dB parameters to
//! the natural-log parameters of the underlying normal:
//!
//! ```text
//! E[Y]   = exp(λμ + (λσ)²/2)
//! Var[Y] = E[Y]² · (exp((λσ)²) − 1)
//! ```

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(10)/10`: converts dB parameters to natural-log parameters.
pub const LAMBDA: f64 = LN_10 / 10.0;

/// `10/ln(10)`: Jacobian factor of the dB transform in the pdf.
pub const XI: f64 = 10.0 / LN_10;

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
///
/// Evaluated as `erfc(x/√2)/2`, which keeps full relative precision deep in
/// the upper tail.
pub fn gaussian_tail_q(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("x", x, "must be finite"));
    }
    Ok(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// A log-normal variate whose dB value `10·log10(Y)` is `N(mu_db, sigma_db²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalDb {
    mu_db: f64,
    sigma_db: f64,
}

impl LogNormalDb {
    pub fn new(mu_db: f64, sigma_db: f64) -> Result<Self> {
        if !mu_db.is_finite() {
            return Err(Error::invalid("mu_db", mu_db, "must be finite"));
        }
        if !sigma_db.is_finite() || sigma_db < 0.0 {
            return Err(Error::invalid(
                "sigma_db",
                sigma_db,
                "must be finite and non-negative",
            ));
        }
        Ok(Self { mu_db, sigma_db })
    }

    /// Mean of the dB value.
    pub fn mu_db(&self) -> f64 {
        self.mu_db
    }

    /// Standard deviation of the dB value.
    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }

    /// Distribution of `m·Y` for a positive constant `m`.
    pub fn scale(self, m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid(
                "m",
                m,
                "scale factor must be positive and finite",
            ));
        }
        Self::new(self.mu_db + 10.0 * m.log10(), self.sigma_db)
    }

    /// Distribution of `1/Y`.
    pub fn reciprocal(self) -> Self {
        Self {
            mu_db: -self.mu_db,
            sigma_db: self.sigma_db,
        }
    }

    /// Distribution of `Y²`: both dB parameters double.
    pub fn square(self) -> Self {
        Self {
            mu_db: 2.0 * self.mu_db,
            sigma_db: 2.0 * self.sigma_db,
        }
    }

    /// `P(Y ≤ x) = Q((μ − 10·log10 x)/σ)`.
    ///
    /// With `sigma_db = 0` the variate is the constant `10^(μ/10)` and the
    /// CDF is a unit step at that point.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::invalid("x", x, "CDF argument must be positive"));
        }
        let x_db = 10.0 * x.log10();
        if self.sigma_db == 0.0 {
            return Ok(if x_db < self.mu_db { 0.0 } else { 1.0 });
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        gaussian_tail_q((self.mu_db - x_db) / self.sigma_db)
    }

    /// Density `ξ/(√(2π)·σ·x) · exp(−(10·log10 x − μ)²/(2σ²))`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(
                "x",
                x,
                "pdf argument must be positive and finite",
            ));
        }
        if self.sigma_db == 0.0 {
            return Err(Error::Domain(
                "pdf of a point mass (sigma_db = 0) is undefined".into(),
            ));
        }
        let z = (10.0 * x.log10() - self.mu_db) / self.sigma_db;
        Ok(XI / ((2.0 * PI).sqrt() * self.sigma_db * x) * (-0.5 * z * z).exp())
    }

    /// Linear-domain `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        let s = LAMBDA * self.sigma_db;
        let mean = (LAMBDA * self.mu_db + 0.5 * s * s).exp();
        (mean, mean * mean * (s * s).exp_m1())
    }

    /// Moment-matched fit: the unique member of the family with the given
    /// linear-domain mean and variance.
    ///
    /// With `Ψ = 1 + var/mean²`:
    /// `σ = (10/ln10)·√(ln Ψ)` and `μ = 10·log10(mean) − 5·log10(Ψ)`.
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::invalid("mean", mean, "must be positive and finite"));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::invalid(
                "variance",
                variance,
                "must be finite and non-negative",
            ));
        }
        let ln_psi = (variance / (mean * mean)).ln_1p();
        Self::new(
            10.0 * mean.log10() - 5.0 * ln_psi / LN_10,
            XI * ln_psi.sqrt(),
        )
    }
}

/// Result of a Wilkinson moment-matched sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilkinsonFit {
    /// Fitted log-normal for the sum.
    pub result: LogNormalDb,
    /// First raw moment of the sum.
    pub u1: f64,
    /// Second raw moment of the sum.
    pub u2: f64,
    /// Set when `ln u2 − 2 ln u1` came out negative and was clamped to zero.
    pub degenerate: bool,
}

/// Approximates `Σ Yᵢ` by a single log-normal matching its first two moments.
///
/// `correlations` holds the correlation coefficients `r_ij` between the
/// underlying normals; `None` means independent components. All exponents are
/// accumulated in the log domain with max-subtraction so components with dB
/// means of several hundred dB do not overflow.
pub fn wilkinson_sum(
    components: &[LogNormalDb],
    correlations: Option<&[Vec<f64>]>,
) -> Result<WilkinsonFit> {
    if components.is_empty() {
        return Err(Error::Domain(
            "Wilkinson sum needs at least one component".into(),
        ));
    }
    let n = components.len();
    if let Some(r) = correlations {
        validate_correlations(r, n)?;
    }
    let corr = |i: usize, j: usize| correlations.map_or(0.0, |r| r[i][j]);

    // Natural-log parameters of each component.
    let m: Vec<f64> = components.iter().map(|c| LAMBDA * c.mu_db).collect();
    let s: Vec<f64> = components.iter().map(|c| LAMBDA * c.sigma_db).collect();

    let first: Vec<f64> = (0..n).map(|i| m[i] + 0.5 * s[i] * s[i]).collect();
    let mut second = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        second.push(2.0 * m[i] + 2.0 * s[i] * s[i]);
        for j in i + 1..n {
            let cross =
                m[i] + m[j] + 0.5 * (s[i] * s[i] + s[j] * s[j] + 2.0 * corr(i, j) * s[i] * s[j]);
            second.push(cross + std::f64::consts::LN_2);
        }
    }
    let ln_u1 = log_sum_exp(&first);
    let ln_u2 = log_sum_exp(&second);

    let mut spread = ln_u2 - 2.0 * ln_u1;
    let mut degenerate = false;
    if spread < 0.0 {
        spread = 0.0;
        degenerate = true;
    }
    // A single component is returned verbatim; the log-domain round trip
    // would otherwise cost a few ulps.
    let result = if n == 1 {
        components[0]
    } else {
        LogNormalDb::new((2.0 * ln_u1 - 0.5 * ln_u2) / LAMBDA, spread.sqrt() / LAMBDA)?
    };
    Ok(WilkinsonFit {
        result,
        u1: ln_u1.exp(),
        u2: ln_u2.exp(),
        degenerate,
    })
}

fn validate_correlations(r: &[Vec<f64>], n: usize) -> Result<()> {
    if r.len() != n || r.iter().any(|row| row.len() != n) {
        return Err(Error::Domain(format!("correlation matrix must be {n}x{n}")));
    }
    for (i, row) in r.iter().enumerate() {
        if row[i] != 1.0 {
            return Err(Error::Domain(
                "correlation matrix must have a unit diagonal".into(),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::invalid("r_ij", v, "correlation must lie in [-1, 1]"));
            }
            if v != r[j][i] {
                return Err(Error::Domain("correlation matrix must be symmetric".into()));
            }
        }
    }
    Ok(())
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln(mu: f64, sigma: f64) -> LogNormalDb {
        LogNormalDb::new(mu, sigma).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / b.abs().max(a.abs())
        }
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(gaussian_tail_q(0.0).unwrap(), 0.5);
    }

    #[test]
    fn q_reflection() {
        for x in [0.5, 1.0, 3.0] {
            let s = gaussian_tail_q(-x).unwrap() + gaussian_tail_q(x).unwrap();
            assert!((s - 1.0).abs() < 1e-12, "x = {x}: {s}");
        }
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(gaussian_tail_q(f64::NAN).is_err());
        assert!(gaussian_tail_q(f64::INFINITY).is_err());
    }

    #[test]
    fn q_far_tail_underflows_cleanly() {
        let q = gaussian_tail_q(40.0).unwrap();
        assert!((0.0..=1e-300).contains(&q));
        assert_eq!(gaussian_tail_q(-40.0).unwrap(), 1.0);
    }

    #[test]
    fn scale_examples() {
        assert_eq!(ln(0.0, 4.0).scale(1.0).unwrap(), ln(0.0, 4.0));
        assert_eq!(ln(3.0, 2.0).scale(10.0).unwrap(), ln(13.0, 2.0));
        let v = ln(-2.0, 5.0).scale(0.01).unwrap();
        assert!((v.mu_db() + 22.0).abs() < 1e-12);
        assert_eq!(v.sigma_db(), 5.0);
    }

    #[test]
    fn scale_rejects_non_positive() {
        assert!(ln(0.0, 1.0).scale(0.0).is_err());
        assert!(ln(0.0, 1.0).scale(-2.0).is_err());
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(ln(0.0, 4.0).reciprocal(), ln(0.0, 4.0));
        assert_eq!(ln(7.0, 3.0).reciprocal(), ln(-7.0, 3.0));
        assert_eq!(ln(5.0, 2.0).reciprocal().reciprocal(), ln(5.0, 2.0));
    }

    #[test]
    fn square_examples() {
        assert_eq!(ln(0.0, 0.0).square(), ln(0.0, 0.0));
        assert_eq!(ln(3.0, 2.0).square(), ln(6.0, 4.0));
        assert_eq!(ln(-4.0, 1.5).square(), ln(-8.0, 3.0));
    }

    #[test]
    fn constructor_rejects_bad_fields() {
        assert!(LogNormalDb::new(f64::NAN, 1.0).is_err());
        assert!(LogNormalDb::new(0.0, -1.0).is_err());
        assert!(LogNormalDb::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_at_median_is_half() {
        assert!((ln(10.0, 3.0).cdf(10.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdf_one_sigma_above_median() {
        // Q(-1) = 0.841344746068542...
        let p = ln(0.0, 6.0).cdf(10f64.powf(0.6)).unwrap();
        assert!((p - 0.841_344_746_068_542_9).abs() < 1e-12, "{p}");
    }

    #[test]
    fn cdf_tends_to_one() {
        let v = ln(5.0, 2.0);
        let mut prev = 0.0;
        for k in 0..12 {
            let p = v.cdf(10f64.powi(k)).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        assert!(prev > 1.0 - 1e-12);
        assert_eq!(v.cdf(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn cdf_rejects_non_positive() {
        assert!(ln(0.0, 1.0).cdf(0.0).is_err());
        assert!(ln(0.0, 1.0).cdf(-1.0).is_err());
    }

    #[test]
    fn point_mass_step_cdf_and_no_pdf() {
        let v = ln(10.0, 0.0);
        assert_eq!(v.cdf(9.99).unwrap(), 0.0);
        assert_eq!(v.cdf(10.0).unwrap(), 1.0);
        assert!(v.pdf(10.0).is_err());
    }

    #[test]
    fn pdf_at_unity_for_zero_mean() {
        let expected = XI / ((2.0 * PI).sqrt() * 4.0);
        assert!(rel(ln(0.0, 4.0).pdf(1.0).unwrap(), expected) < 1e-15);
    }

    #[test]
    fn moments_of_point_mass() {
        assert_eq!(ln(0.0, 0.0).moments(), (1.0, 0.0));
    }

    #[test]
    fn moments_variance_equals_mean_squared() {
        // exp((λσ)²) = 2 exactly when λσ = √(ln 2).
        let sigma = XI * std::f64::consts::LN_2.sqrt();
        let (m, v) = ln(0.0, sigma).moments();
        assert!(rel(v, m * m) < 1e-12);
    }

    #[test]
    fn fit_examples() {
        assert_eq!(LogNormalDb::from_moments(1.0, 0.0).unwrap(), ln(0.0, 0.0));
        let v = LogNormalDb::from_moments(2.0, 3.0).unwrap();
        let (m, var) = v.moments();
        assert!(rel(m, 2.0) < 1e-9 && rel(var, 3.0) < 1e-9);
        let orig = ln(7.0, 5.0);
        let (m, var) = orig.moments();
        let back = LogNormalDb::from_moments(m, var).unwrap();
        assert!((back.mu_db() - 7.0).abs() < 1e-9);
        assert!((back.sigma_db() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_bad_moments() {
        assert!(LogNormalDb::from_moments(0.0, 1.0).is_err());
        assert!(LogNormalDb::from_moments(-1.0, 1.0).is_err());
        assert!(LogNormalDb::from_moments(1.0, -1.0).is_err());
    }

    #[test]
    fn wilkinson_single_component_is_identity() {
        let fit = wilkinson_sum(&[ln(5.0, 3.0)], None).unwrap();
        assert_eq!(fit.result, ln(5.0, 3.0));
        assert!(!fit.degenerate);
    }

    #[test]
    fn wilkinson_iid_pair_doubles_moments() {
        let c = ln(0.0, 4.0);
        let (m, v) = c.moments();
        let fit = wilkinson_sum(&[c, c], None).unwrap();
        let (fm, fv) = fit.result.moments();
        assert!(rel(fm, 2.0 * m) < 1e-9);
        assert!(rel(fv, 2.0 * v) < 1e-9);
    }

    #[test]
    fn wilkinson_pair_sums_moments() {
        let a = ln(0.0, 4.0);
        let b = ln(3.0, 6.0);
        let (ma, va) = a.moments();
        let (mb, vb) = b.moments();
        let fit = wilkinson_sum(&[a, b], None).unwrap();
        let (fm, fv) = fit.result.moments();
        assert!(rel(fm, ma + mb) < 1e-9);
        assert!(rel(fv, va + vb) < 1e-9);
        assert!(rel(fit.u1, ma + mb) < 1e-12);
        assert!(fit.u2 >= fit.u1 * fit.u1);
    }

    #[test]
    fn wilkinson_fully_correlated_identical_pair_is_doubling() {
        // r = 1 with identical components: the sum is exactly 2Y.
        let c = ln(1.0, 5.0);
        let r = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let fit = wilkinson_sum(&[c, c], Some(&r)).unwrap();
        let expected = c.scale(2.0).unwrap();
        assert!((fit.result.mu_db() - expected.mu_db()).abs() < 1e-9);
        assert!((fit.result.sigma_db() - expected.sigma_db()).abs() < 1e-6);
    }

    #[test]
    fn wilkinson_survives_huge_means() {
        let fit = wilkinson_sum(&[ln(400.0, 3.0), ln(-400.0, 3.0), ln(395.0, 2.0)], None).unwrap();
        assert!(fit.result.mu_db().is_finite());
        assert!(fit.result.sigma_db().is_finite());
        assert!(fit.result.mu_db() > 399.0);
    }

    #[test]
    fn wilkinson_point_masses_are_degenerate_or_exact() {
        let fit = wilkinson_sum(&[ln(0.0, 0.0), ln(0.0, 0.0)], None).unwrap();
        assert!((fit.result.mu_db() - 10.0 * 2f64.log10()).abs() < 1e-9);
        assert!(fit.result.sigma_db() < 1e-6);
    }

    #[test]
    fn wilkinson_rejects_malformed_correlations() {
        let c = ln(0.0, 1.0);
        assert!(wilkinson_sum(&[], None).is_err());
        let wrong_dim = vec![vec![1.0]];
        assert!(wilkinson_sum(&[c, c], Some(&wrong_dim)).is_err());
        let asym = vec![vec![1.0, 0.2], vec![0.3, 1.0]];
        assert!(wilkinson_sum(&[c, c], Some(&asym)).is_err());
        let diag = vec![vec![0.9, 0.0], vec![0.0, 1.0]];
        assert!(wilkinson_sum(&[c, c], Some(&diag)).is_err());
        let range = vec![vec![1.0, 1.5], vec![1.5, 1.0]];
        assert!(wilkinson_sum(&[c, c], Some(&range)).is_err());
    }
}
