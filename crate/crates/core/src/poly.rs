//! Real polynomials in the monomial basis.

use crate::dd::Dd;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coefficients with magnitude at or below this count as zero when
/// classifying parity.
pub const PARITY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// A real polynomial `a0 + a1 x + ... + ad x^d`.
///
/// Trailing zero coefficients are trimmed on construction, so the stored
/// leading coefficient is nonzero. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySpec {
    coeffs: Vec<f64>,
}

impl PolySpec {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        PolySpec { coeffs }
    }

    pub fn zero() -> Self {
        PolySpec { coeffs: Vec::new() }
    }

    /// The monomial `x^j`.
    pub fn monomial(j: usize) -> Self {
        let mut c = vec![0.0; j + 1];
        c[j] = 1.0;
        PolySpec { coeffs: c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn parity(&self) -> Parity {
        let nz = |j: usize| self.coeffs[j].abs() > PARITY_EPS;
        let even = (0..self.coeffs.len()).step_by(2).any(nz);
        let odd = (1..self.coeffs.len()).step_by(2).any(nz);
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Horner evaluation in f64.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    /// Horner evaluation carried out in double-double.
    pub fn eval_dd(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Dd::ZERO, |acc, &a| acc.mul_f64(x) + Dd::new(a))
            .to_f64()
    }

    /// `p(alpha x)`: coefficient `a_j` becomes `a_j alpha^j`.
    pub fn scale_arg(&self, alpha: f64) -> Self {
        let mut pow = 1.0;
        let c = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = a * pow;
                pow *= alpha;
                v
            })
            .collect();
        PolySpec::new(c)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        PolySpec::new(self.coeffs.iter().map(|a| a * lambda).collect())
    }

    pub fn add(&self, other: &PolySpec) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |c: &[f64], j: usize| c.get(j).copied().unwrap_or(0.0);
        PolySpec::new(
            (0..n)
                .map(|j| get(&self.coeffs, j) + get(&other.coeffs, j))
                .collect(),
        )
    }

    /// Product by coefficient convolution.
    pub fn mul(&self, other: &PolySpec) -> Self {
        if self.is_zero() || other.is_zero() {
            return PolySpec::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolySpec::new(c)
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &PolySpec) -> Self {
        let mut acc = PolySpec::zero();
        for &a in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&PolySpec::new(vec![a]));
        }
        acc
    }

    /// Splits into the even-index and odd-index parts. Both keep the
    /// original indexing, so their sum is `self` exactly.
    pub fn split_parity(&self) -> (PolySpec, PolySpec) {
        let pick = |want: usize| {
            PolySpec::new(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| if j % 2 == want { a } else { 0.0 })
                    .collect(),
            )
        };
        (pick(0), pick(1))
    }

    /// Coefficients in the Chebyshev basis, `self = sum c_k T_k`, computed in
    /// double-double through the recurrence `x T_k = (T_{k+1} + T_{|k-1|}) / 2`.
    pub fn to_chebyshev(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![Dd::ZERO; n];
        // Chebyshev expansion of the current power x^j.
        let mut pw = vec![Dd::ZERO; n.max(1)];
        pw[0] = Dd::new(1.0);
        for (j, &a) in self.coeffs.iter().enumerate() {
            if j > 0 {
                let mut next = vec![Dd::ZERO; n];
                for k in 0..j {
                    let c = pw[k];
                    if k == 0 {
                        next[1] = next[1] + c;
                    } else {
                        let half = c.mul_f64(0.5);
                        next[k + 1] = next[k + 1] + half;
                        next[k - 1] = next[k - 1] + half;
                    }
                }
                pw = next;
            }
            for k in 0..=j {
                out[k] = out[k] + pw[k].mul_f64(a);
            }
        }
        out.into_iter().map(Dd::to_f64).collect()
    }
}

impl fmt::Display for PolySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:?}")?;
        }
        write!(f, "]")
    }
}

/// Monomial coefficients of the Chebyshev polynomial `T_n`.
pub fn chebyshev_t(n: usize) -> PolySpec {
    let mut prev = PolySpec::new(vec![1.0]);
    if n == 0 {
        return prev;
    }
    let mut cur = PolySpec::monomial(1);
    let two_x = PolySpec::new(vec![0.0, 2.0]);
    for _ in 1..n {
        let next = two_x.mul(&cur).add(&prev.scale(-1.0));
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let (e, o) = PolySpec::new(vec![0.0, 1.0, 0.5]).split_parity();
        assert_eq!(e.coeffs(), &[0.0, 0.0, 0.5]);
        assert_eq!(o.coeffs(), &[0.0, 1.0]);

        let (e, o) = PolySpec::new(vec![1.0, 1.0, 1.0, 1.0]).split_parity();
        assert_eq!(e.coeffs(), &[1.0, 0.0, 1.0]);
        assert_eq!(o.coeffs(), &[0.0, 1.0, 0.0, 1.0]);

        let p = PolySpec::new(vec![1.0, 0.0, -3.0]);
        let (e, o) = p.split_parity();
        assert_eq!(e, p);
        assert!(o.is_zero());
    }

    #[test]
    fn parity_classification() {
        assert_eq!(PolySpec::new(vec![0.0, 1.0]).parity(), Parity::Odd);
        assert_eq!(PolySpec::new(vec![1.0, 1e-13, 2.0]).parity(), Parity::Even);
        assert_eq!(PolySpec::new(vec![1.0, 1.0]).parity(), Parity::Mixed);
    }

    #[test]
    fn regression_product() {
        let f = PolySpec::new(vec![0.0, 1.0, 0.5]);
        let g = PolySpec::new(vec![0.0, 1.0, -0.5]);
        assert_eq!(f.mul(&g).coeffs(), &[0.0, 0.0, 1.0, 0.0, -0.25]);
    }

    #[test]
    fn compose_matches_pointwise() {
        let f = PolySpec::new(vec![0.5, -1.0, 2.0]);
        let g = PolySpec::new(vec![1.0, 0.0, 0.0, -0.25]);
        let h = g.compose(&f);
        for &x in &[-0.7, 0.0, 0.3, 1.1] {
            assert!((h.eval(x) - g.eval(f.eval(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_round_trip() {
        for n in 0..12 {
            let c = chebyshev_t(n).to_chebyshev();
            for (k, v) in c.iter().enumerate() {
                let want = if k == n { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "T_{n}: c[{k}] = {v}");
            }
        }
    }

    #[test]
    fn chebyshev_values() {
        for n in 0..20 {
            let t = chebyshev_t(n);
            for &x in &[-1.0, -0.3, 0.25, 0.9, 1.0] {
                let want = (n as f64 * f64::acos(x)).cos();
                assert!((t.eval_dd(x) - want).abs() < 1e-11);
            }
        }
    }
}
