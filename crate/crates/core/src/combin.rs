//! Binomial coefficients in exact and log form, and k-subset (un)ranking.

/// Exact binomial coefficient, `None` on u128 overflow. Zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let a = acc / g;
        let d = den / g;
        acc = a.checked_mul(num / d)?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Binomial as u64, for sizes that are known to be small (clause pools etc).
pub fn binomial_u64(n: u64, k: u64) -> u64 {
    binomial(n, k)
        .and_then(|v| u64::try_from(v).ok())
        .expect("binomial coefficient exceeds u64")
}

/// Table of `ln(i!)` for `i <= len`, built with compensated summation.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for i in 1..=max {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_fact(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`, or `-inf` when the coefficient is zero.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.table[n] - self.table[k] - self.table[n - k]
        }
    }
}

/// Lexicographic rank of an ascending k-subset of `0..n`.
pub fn rank_subset(n: u32, subset: &[u32]) -> u64 {
    let k = subset.len() as u32;
    let mut rank = 0u64;
    let mut prev: i64 = -1;
    for (i, &v) in subset.iter().enumerate() {
        let remaining = k - i as u32 - 1;
        for skipped in (prev + 1) as u32..v {
            rank += binomial_u64((n - skipped - 1) as u64, remaining as u64);
        }
        prev = v as i64;
    }
    rank
}

/// Inverse of [`rank_subset`].
pub fn unrank_subset(n: u32, k: u32, mut rank: u64, out: &mut Vec<u32>) {
    out.clear();
    let mut next = 0u32;
    for i in 0..k {
        let remaining = (k - i - 1) as u64;
        loop {
            let block = binomial_u64((n - next - 1) as u64, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(12, 3), Some(220));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
        assert!(binomial(300, 150).is_none());
    }

    #[test]
    fn ln_binomial_matches_exact() {
        let t = LnFactorials::new(200);
        for &(n, k) in &[(12usize, 3usize), (60, 30), (100, 7), (5, 0)] {
            let exact = binomial(n as u64, k as u64).unwrap() as f64;
            assert!((t.ln_binomial(n, k) - exact.ln()).abs() < 1e-12);
        }
        assert_eq!(t.ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn subset_ranking_round_trips() {
        let mut buf = Vec::new();
        let total = binomial_u64(7, 3);
        let mut seen = Vec::new();
        for r in 0..total {
            unrank_subset(7, 3, r, &mut buf);
            assert!(buf.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(rank_subset(7, &buf), r);
            seen.push(buf.clone());
        }
        seen.dedup();
        assert_eq!(seen.len() as u64, total);
        assert_eq!(seen[0], vec![0, 1, 2]);
    }
}
