//! Small numeric helpers shared across modules.

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Smallest `t >= 0` with `part * 2^t >= total`, i.e. `ceil(log2(total / part))`
/// computed without rounding error (scaling by powers of two is exact).
pub fn ceil_log2_ratio(total: f64, part: f64) -> u32 {
    assert!(part > 0.0 && total.is_finite(), "ratio needs a positive part");
    let mut t = 0u32;
    let mut scaled = part;
    while scaled < total {
        scaled *= 2.0;
        t += 1;
    }
    t
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    ceil_log2_ratio(n as f64, 1.0)
}

/// Smallest integer `t >= 0` with `start * base^t >= target`.
pub fn steps_to_reach(start: f64, base: f64, target: f64) -> u32 {
    assert!(start > 0.0 && base > 1.0);
    let mut t = 0u32;
    let mut x = start;
    while x < target {
        x *= base;
        t += 1;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(2, 5), 0);
        assert_eq!(binomial(99, 4), 3_764_376);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(ceil_log2_ratio(16.0, 8.0), 1);
        assert_eq!(ceil_log2_ratio(16.0, 16.0), 0);
        assert_eq!(steps_to_reach(1.5, 1.5, 1.0), 0);
        assert_eq!(steps_to_reach(1.0, 2.0, 9.0), 4);
    }
}
