use crate::error::{domain, Result};

/// The n-dimensional Legendre polynomial P_{n,k}(t), normalised so that
/// P_{n,k}(1) = 1 (a rescaled Gegenbauer polynomial of index (n-2)/2).
pub fn legendre(n: usize, k: usize, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("legendre requires n >= 2, got {n}")));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(domain(format!("legendre requires t in [-1, 1], got {t}")));
    }
    Ok(legendre_unchecked(n, k, t))
}

pub(crate) fn legendre_unchecked(n: usize, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let mut p0 = 1.0;
    let mut p1 = t;
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + nf - 2.0) * t * p1 - jf * p0) / (jf + nf - 2.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// dim H_k in n dimensions: C(k+n-1, n-1) - C(k+n-3, n-1).
pub fn harmonic_dimension(n: usize, k: usize) -> usize {
    fn binom(a: i64, b: i64) -> i64 {
        if b < 0 || a < b || a < 0 {
            return 0;
        }
        let mut r: i64 = 1;
        for i in 0..b {
            r = r * (a - i) / (i + 1);
        }
        r
    }
    let (n, k) = (n as i64, k as i64);
    (binom(k + n - 1, n - 1) - binom(k + n - 3, n - 1)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degrees() {
        for n in 2..7 {
            for i in 0..=20 {
                let t = -1.0 + 0.1 * i as f64;
                assert_eq!(legendre(n, 0, t).unwrap(), 1.0);
                assert!((legendre(n, 1, t).unwrap() - t).abs() < 1e-15);
            }
        }
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            let p2 = legendre(3, 2, t).unwrap();
            assert!((p2 - 0.5 * (3.0 * t * t - 1.0)).abs() < 1e-15);
            // n = 2 gives Chebyshev polynomials
            let c = legendre(2, 5, t).unwrap();
            assert!((c - (5.0 * t.clamp(-1.0, 1.0).acos()).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn normalised_at_one_and_bounded() {
        for n in 2..9 {
            for k in 0..=30 {
                assert!((legendre(n, k, 1.0).unwrap() - 1.0).abs() < 1e-12);
                for i in 0..=200 {
                    let t = -1.0 + 0.01 * i as f64;
                    assert!(legendre(n, k, t).unwrap().abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(legendre(3, 2, 1.5).is_err());
        assert!(legendre(1, 2, 0.0).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(harmonic_dimension(2, 0), 1);
        assert_eq!(harmonic_dimension(2, 4), 2);
        assert_eq!(harmonic_dimension(3, 4), 9);
        assert_eq!(harmonic_dimension(4, 2), 9);
    }
}
