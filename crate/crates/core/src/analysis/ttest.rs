use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided unequal-variance t-test of `a` against `b`.
///
/// The p-value is `I_{df/(df+t²)}(df/2, 1/2)`, the regularized incomplete
/// beta form of the Student-t tail.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Argument("non-finite value in t-test sample".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let sa = va / na;
    let sb = vb / nb;
    let se2 = sa + sb;
    if se2 <= 0.0 {
        return Err(Error::ZeroVariance("both t-test samples".into()));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let x = df / (df + t * t);
    let p = beta_reg(df / 2.0, 0.5, x).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(WelchTest {
        t,
        p,
        df,
        mean_a: ma,
        mean_b: mb,
        n_a: a.len(),
        n_b: b.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.5, 4.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn swap_negates_t() {
        let a = [1.0, 2.0, 3.5, 4.0, 2.2];
        let b = [3.0, 5.0, 4.5, 6.1];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
        assert_eq!(ab.df, ba.df);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).is_err());
    }

    #[test]
    fn extreme_separation_keeps_p_positive() {
        let a: Vec<f64> = (0..50).map(|i| 1000.0 + f64::from(i) * 1e-3).collect();
        let b: Vec<f64> = (0..50).map(|i| f64::from(i) * 1e-3).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p > 0.0 && r.p < 1e-100);
    }
}
