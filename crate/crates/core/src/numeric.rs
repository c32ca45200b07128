//! Floating-point helpers shared by the metrics.
//!
//! Aggregate losses and total costs are computed with an exact (Shewchuk)
//! summation so that results do not depend on record order and so that
//! simple cases stay exact: ten costs of `0.1` sum to `1.0`, and the mean of
//! `n` copies of `x` is `x`.

/// Error-free accumulator holding the running sum as a list of
/// non-overlapping partials.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        if x != 0.0 {
            self.partials.push(x);
        }
    }

    /// Correctly rounded value of the accumulated sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // half-even correction when the discarded tail sits exactly on a tie
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Correctly rounded sum of `values`.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(values);
    acc.value()
}

/// Arithmetic mean with a residual correction step.
///
/// The quotient of the rounded sum by `n` is refined with the exactly
/// computed remainder `sum - q*n`, which makes the result exact whenever the
/// true mean is representable. Returns `None` for an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mut acc = ExactSum::new();
    acc.extend(values.iter().copied());
    let q = acc.value() / n;
    if !q.is_finite() {
        return Some(q);
    }
    let p = q * n;
    let e = q.mul_add(n, -p);
    acc.add(-p);
    acc.add(-e);
    Some(q + acc.value() / n)
}

/// Formats `x` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenths_sum_to_one() {
        assert_eq!(exact_sum(std::iter::repeat_n(0.1, 10)), 1.0);
        assert_ne!(std::iter::repeat_n(0.1, 10).sum::<f64>(), 1.0);
    }

    #[test]
    fn sum_is_order_independent() {
        let v = [1e16, 1.0, -1e16, 3.5, 1e-3];
        let mut r = v;
        r.reverse();
        assert_eq!(exact_sum(v), exact_sum(r));
        assert_eq!(exact_sum(v), 4.501);
    }

    #[test]
    fn mean_of_copies_is_exact() {
        let a = 0.01 * 0.01;
        for n in 1..200 {
            assert_eq!(mean(&vec![a; n]), Some(a), "n = {n}");
        }
        // the uncorrected quotient is off for some n
        assert!((1..200).any(|n| exact_sum(vec![a; n]) / n as f64 != a));
    }

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(mean(&[]), None);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.1875, 6), "0.1875");
        assert_eq!(format_significant(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_significant(123456789.0, 6), "1.23457e8");
        assert_eq!(format_significant(0.00001234, 6), "1.234e-5");
        assert_eq!(format_significant(-2.5, 6), "-2.5");
        assert_eq!(format_significant(100.0, 6), "100");
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(0.08750000000000001, 6), "0.0875");
    }
}
