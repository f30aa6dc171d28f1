use crate::{Error, Result};

/// Standardized values with the statistics used to produce them.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population (1/N) standard deviation.
    pub std: f64,
}

/// Centers `v` and scales it to unit population standard deviation.
pub fn standardize(v: &[f64]) -> Result<Standardized> {
    if v.len() < 2 {
        return Err(Error::argument("standardize needs at least 2 values"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::argument("standardize: non-finite value"));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if !std.is_finite() || std <= 0.0 {
        return Err(Error::DegenerateVariable("zero variance".into()));
    }
    Ok(Standardized {
        values: v.iter().map(|x| (x - mean) / std).collect(),
        mean,
        std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_points() {
        assert_eq!(standardize(&[1.0, 3.0]).unwrap().values, vec![-1.0, 1.0]);
    }

    #[test]
    fn three_points() {
        let s = standardize(&[2.0, 4.0, 6.0]).unwrap();
        let r = 1.5f64.sqrt();
        for (a, b) in s.values.iter().zip([-r, 0.0, r]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.mean, 4.0);
        assert!((s.std - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(standardize(&[2.0, 2.0, 2.0]), Err(Error::DegenerateVariable(_))));
        assert!(standardize(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn output_has_zero_mean_unit_std(v in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-6));
            let s = standardize(&v).unwrap().values;
            let n = s.len() as f64;
            let m = s.iter().sum::<f64>() / n;
            let sd = (s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((sd - 1.0).abs() < 1e-9);
        }

        #[test]
        fn idempotent(v in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-6));
            let once = standardize(&v).unwrap().values;
            let twice = standardize(&once).unwrap().values;
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn power_of_two_scaling_is_bit_exact(
            v in prop::collection::vec(-1e3f64..1e3, 2..100),
            k in -8i32..8,
        ) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-6));
            let a = 2f64.powi(k);
            let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
            prop_assert_eq!(standardize(&scaled).unwrap().values, standardize(&v).unwrap().values);
        }

        #[test]
        fn affine_equivariance(
            v in prop::collection::vec(-10f64..10.0, 2..100),
            a in 0.1f64..10.0,
            b in -10f64..10.0,
        ) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-3));
            let t: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            for (p, q) in standardize(&t).unwrap().values.iter().zip(standardize(&v).unwrap().values) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
