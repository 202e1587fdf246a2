//! Products of many factors that stay finite for very large `N`.
//!
//! Up to [`DIRECT_PRODUCT_MAX`] factors are multiplied directly. Longer
//! products accumulate `sum ln|f|` and the phase (or sign) separately, so that
//! a result like `(2/3)^(N/2)` with `N ~ 10^4` is not lost to underflow until it
//! drops below `e^-700`, where it is reported as an exact zero with
//! [`Product::underflow`] set.

use num_complex::Complex64 as C64;

/// Longest product evaluated by plain multiplication.
pub const DIRECT_PRODUCT_MAX: usize = 64;

/// `ln|product|` below which the result is flushed to zero.
pub const LOG_UNDERFLOW: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Product<T> {
    pub value: T,
    pub underflow: bool,
}

/// Product of complex factors.
pub fn complex_product<I>(factors: I) -> Product<C64>
where
    I: ExactSizeIterator<Item = C64>,
{
    if factors.len() <= DIRECT_PRODUCT_MAX {
        let value = factors.fold(C64::new(1.0, 0.0), |acc, f| acc * f);
        return Product { value, underflow: false };
    }
    let mut log_mag = 0.0;
    let mut phase = 0.0;
    for f in factors {
        if f.re == 0.0 && f.im == 0.0 {
            return Product { value: C64::new(0.0, 0.0), underflow: false };
        }
        log_mag += f.norm().ln();
        phase += f.arg();
    }
    if log_mag < LOG_UNDERFLOW {
        return Product { value: C64::new(0.0, 0.0), underflow: true };
    }
    Product { value: C64::from_polar(log_mag.exp(), phase), underflow: false }
}

/// Product of real factors; the sign is tracked by parity so the result is
/// exactly real.
pub fn real_product<I>(factors: I) -> Product<f64>
where
    I: ExactSizeIterator<Item = f64>,
{
    if factors.len() <= DIRECT_PRODUCT_MAX {
        return Product { value: factors.product(), underflow: false };
    }
    let mut log_mag = 0.0;
    let mut negative = false;
    for f in factors {
        if f == 0.0 {
            return Product { value: 0.0, underflow: false };
        }
        log_mag += f.abs().ln();
        negative ^= f < 0.0;
    }
    if log_mag < LOG_UNDERFLOW {
        return Product { value: 0.0, underflow: true };
    }
    let mag = log_mag.exp();
    Product { value: if negative { -mag } else { mag }, underflow: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn long_product_tracks_magnitude_and_phase() {
        let n = 3000;
        let f = C64::from_polar((2.0f64 / 3.0).sqrt(), 0.001);
        let p = complex_product(std::iter::repeat_n(f, n));
        assert!(!p.underflow);
        let expected_log = n as f64 * 0.5 * (2.0f64 / 3.0).ln();
        assert!((p.value.norm().ln() - expected_log).abs() < 1e-9);
        assert!((p.value.arg() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn deep_underflow_flags_zero() {
        let p = complex_product(std::iter::repeat_n(C64::new(0.5, 0.0), 2000));
        assert_eq!(p.value, C64::new(0.0, 0.0));
        assert!(p.underflow);
        let p = real_product(std::iter::repeat_n(-0.5, 2000));
        assert_eq!(p.value, 0.0);
        assert!(p.underflow);
    }

    #[test]
    fn exact_zero_factor_is_exact() {
        let mut fs = vec![C64::new(0.9, 0.1); 100];
        fs[50] = C64::new(0.0, 0.0);
        let p = complex_product(fs.into_iter());
        assert_eq!(p.value, C64::new(0.0, 0.0));
        assert!(!p.underflow);
        let mut rs = vec![0.9; 100];
        rs[3] = 0.0;
        assert_eq!(real_product(rs.into_iter()), Product { value: 0.0, underflow: false });
    }

    #[test]
    fn real_sign_parity() {
        let fs: Vec<f64> = (0..101).map(|i| if i % 2 == 0 { -0.99 } else { 0.99 }).collect();
        let p = real_product(fs.into_iter());
        assert!(p.value < 0.0);
        assert!((p.value + 0.99f64.powi(101)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn log_path_matches_direct(mags in proptest::collection::vec(0.5f64..1.0, 65..200),
                                   phases in proptest::collection::vec(-3.0f64..3.0, 200)) {
            let fs: Vec<C64> = mags.iter().zip(&phases).map(|(&m, &p)| C64::from_polar(m, p)).collect();
            let direct = fs.iter().fold(C64::new(1.0, 0.0), |acc, f| acc * f);
            let p = complex_product(fs.into_iter());
            let scale = direct.norm().max(1e-300);
            prop_assert!((p.value - direct).norm() <= 1e-11 * scale);
        }
    }
}
