//! Bitstring helpers. Qubit 0 is the most significant bit of an `n`-bit word.

/// Value of qubit `q` in the `n`-bit word `x`.
#[inline]
pub fn bit(x: u64, n: usize, q: usize) -> bool {
    (x >> (n - 1 - q)) & 1 == 1
}

/// Mask selecting qubit `q` of an `n`-bit word.
#[inline]
pub fn mask(n: usize, q: usize) -> u64 {
    1u64 << (n - 1 - q)
}

#[inline]
pub fn weight(x: u64) -> usize {
    x.count_ones() as usize
}

pub fn to_string(x: u64, n: usize) -> String {
    (0..n).map(|q| if bit(x, n, q) { '1' } else { '0' }).collect()
}

pub fn parse(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 64 {
        return None;
    }
    s.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Reverses the qubit order of an `n`-bit word.
pub fn reverse(x: u64, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    x.reverse_bits() >> (64 - n)
}

/// All `n`-bit words of Hamming weight `k` in ascending order.
pub fn weight_class(n: usize, k: usize) -> Vec<u64> {
    WeightClass::new(n, k).collect()
}

/// Iterator over the `n`-bit words of weight `k`, ascending (Gosper's hack).
#[derive(Clone, Debug)]
pub struct WeightClass {
    next: Option<u64>,
    limit: u64,
}

impl WeightClass {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n <= 63, "weight classes are limited to 63-bit words");
        let next = if k > n { None } else { Some(if k == 0 { 0 } else { (1u64 << k) - 1 }) };
        WeightClass { next, limit: (1u64 << n) - 1 }
    }
}

impl Iterator for WeightClass {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let x = self.next?;
        self.next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            let succ = (((r ^ x) >> 2) / c) | r;
            (succ <= self.limit).then_some(succ)
        };
        Some(x)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_is_qubit_zero() {
        assert!(bit(0b1000, 4, 0));
        assert!(!bit(0b1000, 4, 3));
        assert_eq!(to_string(3, 4), "0011");
        assert_eq!(parse("10000"), Some(16));
    }

    #[test]
    fn weight_class_matches_filter() {
        for n in 1..=10 {
            for k in 0..=n {
                let direct: Vec<u64> = (0..1u64 << n).filter(|x| weight(*x) == k).collect();
                assert_eq!(weight_class(n, k), direct, "n={n} k={k}");
                assert_eq!(binomial(n, k), direct.len() as u64);
            }
        }
    }

    #[test]
    fn reverse_is_involution() {
        assert_eq!(reverse(0b11000, 5), 0b00011);
        assert_eq!(reverse(0b01010, 5), 0b01010);
        for x in 0..64u64 {
            assert_eq!(reverse(reverse(x, 6), 6), x);
        }
    }
}
