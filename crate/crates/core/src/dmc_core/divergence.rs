use super::distribution::FiniteDistribution;
use crate::error::{Error, Result};

/// Divergences on bare probability slices of equal length.
pub mod raw {
    use crate::error::{Error, Result};

    pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
        check_len(p, q)?;
        let mut d = 0.0;
        for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
            if a > 0.0 {
                if b <= 0.0 {
                    return Err(Error::AbsoluteContinuityViolation(format!(
                        "P({i}) = {a} but Q({i}) = 0"
                    )));
                }
                d += a * (a / b).ln();
            }
        }
        Ok(d.max(0.0))
    }

    pub fn tv(p: &[f64], q: &[f64]) -> Result<f64> {
        check_len(p, q)?;
        Ok((0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()).min(1.0))
    }

    pub fn chi2(p: &[f64], q: &[f64]) -> Result<f64> {
        check_len(p, q)?;
        let mut c = 0.0;
        for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
            if b > 0.0 {
                c += (a - b) * (a - b) / b;
            } else if a > 0.0 {
                return Err(Error::AbsoluteContinuityViolation(format!(
                    "P({i}) = {a} but Q({i}) = 0"
                )));
            }
        }
        Ok(c)
    }

    fn check_len(p: &[f64], q: &[f64]) -> Result<()> {
        if p.len() != q.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} vs {} atoms",
                p.len(),
                q.len()
            )));
        }
        Ok(())
    }
}

fn check_alphabets(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<()> {
    if !p.same_alphabet(q) {
        return Err(Error::AlphabetMismatch(
            "distributions live on different alphabets".into(),
        ));
    }
    Ok(())
}

/// Relative entropy `D(P‖Q)` in nats.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_alphabets(p, q)?;
    raw::kl(p.probs(), q.probs())
}

/// Variational distance `½Σ|P − Q|`.
pub fn total_variation(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_alphabets(p, q)?;
    raw::tv(p.probs(), q.probs())
}

/// Chi-squared distance `Σ(P − Q)²/Q`.
pub fn chi_squared(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_alphabets(p, q)?;
    raw::chi2(p.probs(), q.probs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> FiniteDistribution {
        FiniteDistribution::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[0.5, 0.5])).unwrap(),
            0.0
        );
        let v = kl_divergence(&d(&[0.89, 0.11]), &d(&[0.11, 0.89])).unwrap();
        assert!((v - 0.78 * (0.89f64 / 0.11).ln()).abs() < 1e-14);
        assert!((v - 1.6308).abs() < 1e-4);
        let v = kl_divergence(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuityViolation(_))
        ));
    }

    #[test]
    fn tv_examples() {
        assert_eq!(
            total_variation(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(),
            0.0
        );
        assert_eq!(
            total_variation(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            1.0
        );
        let v = total_variation(&d(&[0.55, 0.45]), &d(&[0.45, 0.55])).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        assert!(matches!(
            total_variation(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn chi2_examples() {
        let v = chi_squared(&d(&[0.45, 0.55]), &d(&[0.55, 0.45])).unwrap();
        assert!((v - (0.01 / 0.55 + 0.01 / 0.45)).abs() < 1e-15);
        assert!((v - 0.040404).abs() < 1e-6);
        let v = chi_squared(&d(&[0.75, 0.25]), &d(&[0.5, 0.5])).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    fn pmf(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, k).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..=8).prop_flat_map(|k| (pmf(k), pmf(k)))
    }

    proptest! {
        #[test]
        fn pinsker((p, q) in pair()) {
            let kl = raw::kl(&p, &q).unwrap();
            let tv = raw::tv(&p, &q).unwrap();
            prop_assert!(tv * tv <= 0.5 * kl + 1e-12);
        }

        #[test]
        fn tv_is_a_metric((p, q) in pair(), seed in 0u64..1000) {
            let k = p.len();
            let r: Vec<f64> = (0..k).map(|i| ((i as u64 * 7919 + seed) % 97 + 1) as f64).collect();
            let s: f64 = r.iter().sum();
            let r: Vec<f64> = r.into_iter().map(|x| x / s).collect();
            prop_assert!((raw::tv(&p, &q).unwrap() - raw::tv(&q, &p).unwrap()).abs() < 1e-15);
            prop_assert!(raw::tv(&p, &r).unwrap() <= raw::tv(&p, &q).unwrap() + raw::tv(&q, &r).unwrap() + 1e-15);
        }

        #[test]
        fn chi2_dominates_kl((p, q) in pair()) {
            // D(P‖Q) ≤ log(1 + χ²(P‖Q))
            let kl = raw::kl(&p, &q).unwrap();
            let c = raw::chi2(&p, &q).unwrap();
            prop_assert!(kl <= (1.0 + c).ln() + 1e-12);
        }
    }
}
