//! Small numeric helpers shared by preprocessing and the detectors.

/// Linear-interpolation quantile ("type 7"): `h = (n-1) * q/100`, interpolate
/// between the surrounding order statistics.
///
/// `q` is a percentage in `[0, 100]`. Panics on an empty slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    assert!((0.0..=100.0).contains(&q), "quantile out of range: {q}");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&sorted, q)
}

/// Same as [`quantile`] but assumes `sorted` is already ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= n {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 50.0)
}

pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty slice");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (ddof 0).
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Median absolute deviation from the median.
pub fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates_between_order_statistics() {
        let v = vec![0.0, 10.0];
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 100.0), 10.0);
        assert_eq!(quantile(&v, 50.0), 5.0);
        assert_eq!(quantile(&v, 25.0), 2.5);
    }

    #[test]
    fn quantile_matches_numpy_type7() {
        // numpy.quantile([1,2,3,4], 0.4) == 2.2
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert!((quantile(&v, 40.0) - 2.2).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn mad_of_constant_is_zero() {
        assert_eq!(mad(&[5.0, 5.0, 5.0]), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn quantile_is_bounded_and_monotone(
            mut values in proptest::collection::vec(-1e6f64..1e6, 1..64),
            a in 0.0f64..100.0,
            b in 0.0f64..100.0,
        ) {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let q_lo = quantile(&values, lo);
            let q_hi = quantile(&values, hi);
            proptest::prop_assert!(min <= q_lo && q_hi <= max);
            proptest::prop_assert!(q_lo <= q_hi);
            // The input order must not matter.
            values.sort_by(f64::total_cmp);
            proptest::prop_assert_eq!(quantile(&values, lo), q_lo);
        }

        #[test]
        fn shifting_values_shifts_median_and_preserves_mad(
            values in proptest::collection::vec(-1e3f64..1e3, 1..64),
            shift in -1e3f64..1e3,
        ) {
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let tol = 1e-9 * (1.0 + shift.abs());
            proptest::prop_assert!((median(&shifted) - (median(&values) + shift)).abs() <= tol);
            proptest::prop_assert!((mad(&shifted) - mad(&values)).abs() <= tol);
        }
    }
}
