//! Exact arithmetic in the cyclotomic integers `Z[zeta_N]`.
//!
//! Elements are integer polynomials in `zeta = e^{2 pi i / N}` reduced modulo
//! the cyclotomic polynomial `Phi_N`, so equality (and in particular vanishing
//! of a sum of roots of unity) is decided without any floating point.

use num_integer::Integer;

use crate::group::RationalAngle;

/// Coefficients of `Phi_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1 = prod_{d | n} Phi_d
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            poly = exact_div(&poly, &cyclotomic_polynomial(d));
        }
    }
    poly
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    debug_assert_eq!(den[dn], 1);
    let qlen = rem.len() - dn;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        for (j, &b) in den.iter().enumerate() {
            rem[i + j] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&v| v == 0));
    quot
}

/// An element of `Z[zeta_N]` in reduced form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicInt {
    n: u64,
    coeffs: Vec<i64>,
}

impl CyclotomicInt {
    pub fn zero(n: u64) -> Self {
        Self { n, coeffs: Vec::new() }
    }

    /// Build `sum_k c_k zeta_N^{e_k}` from exponents taken modulo `N`.
    pub fn from_terms(n: u64, terms: impl IntoIterator<Item = (i64, u64)>) -> Self {
        let mut raw = vec![0i64; n as usize];
        for (c, e) in terms {
            raw[(e % n) as usize] += c;
        }
        let phi = cyclotomic_polynomial(n);
        let deg = phi.len() - 1;
        for i in (deg..raw.len()).rev() {
            let c = raw[i];
            if c != 0 {
                for (j, &p) in phi.iter().enumerate() {
                    raw[i - deg + j] -= c * p;
                }
            }
        }
        raw.truncate(deg);
        while raw.last() == Some(&0) {
            raw.pop();
        }
        Self { n, coeffs: raw }
    }

    /// `sum_k c_k e^{2 pi i theta_k}` for rational angles `theta_k`.
    pub fn from_angles<'a>(terms: impl IntoIterator<Item = (i64, &'a RationalAngle)> + Clone) -> Self {
        let n = terms
            .clone()
            .into_iter()
            .fold(1u64, |acc, (_, a)| acc.lcm(&a.denominator()));
        Self::from_terms(
            n,
            terms.into_iter().map(|(c, a)| (c, a.numerator() * (n / a.denominator()))),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }
}

/// Exact test that `sum_k c_k e^{2 pi i theta_k}` vanishes.
pub fn sum_vanishes(terms: &[(i64, RationalAngle)]) -> bool {
    CyclotomicInt::from_angles(terms.iter().map(|(c, a)| (*c, a))).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for n in 2..20u64 {
            assert!(CyclotomicInt::from_terms(n, (0..n).map(|e| (1, e))).is_zero(), "n = {n}");
        }
    }

    #[test]
    fn nonzero_sums() {
        assert!(!CyclotomicInt::from_terms(4, [(1, 0), (1, 1)]).is_zero());
        // 1 + i - 1 - i = 0 but 1 + i + 1 - i = 2
        assert!(CyclotomicInt::from_terms(4, [(1, 0), (1, 1), (1, 2), (1, 3)]).is_zero());
        assert!(!CyclotomicInt::from_terms(4, [(1, 0), (1, 1), (1, 0), (1, 3)]).is_zero());
    }

    #[test]
    fn mixed_denominators() {
        // 1 + w + w^2 = 0 with w a cube root, written against other halves
        let a = [
            (1, RationalAngle::new(0, 1)),
            (1, RationalAngle::new(1, 3)),
            (1, RationalAngle::new(2, 3)),
            (1, RationalAngle::new(1, 2)),
            (1, RationalAngle::new(0, 1)),
        ];
        assert!(sum_vanishes(&a));
        assert!(!sum_vanishes(&a[..4]));
    }
}
