//! Phase angles for quantum signal processing.
//!
//! Convention `Wx`: the signal operator is
//! `W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]` and the sequence
//! `phi_0..phi_d` realizes `U = e^{i phi_0 Z} prod_j W(x) e^{i phi_j Z}`.
//! A solution encodes `P(x) = Re U[0,0]`.

use crate::cost::linf_norm;
use crate::poly::{Parity, PolySpec};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

/// Tag of the only convention produced here.
pub const CONVENTION_WX: &str = "Wx";

const MAX_STEPS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    /// `phi_0..phi_d`, each in `(-pi, pi]`.
    pub angles: Vec<f64>,
    pub convention: String,
}

impl PhaseSequence {
    pub fn new(angles: Vec<f64>) -> Self {
        PhaseSequence {
            angles: angles.into_iter().map(wrap).collect(),
            convention: CONVENTION_WX.to_string(),
        }
    }

    pub fn degree(&self) -> usize {
        self.angles.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QspError {
    #[error("polynomial has mixed parity")]
    NotFixedParity,
    #[error("polynomial sup-norm {0} on [-1, 1] exceeds 1")]
    SupNormExceedsOne(f64),
    #[error("phase solver did not converge (residual {0:e})")]
    NoConvergence(f64),
}

/// Even and odd parts of `p`, with the original indexing.
pub fn split_parity(p: &PolySpec) -> (PolySpec, PolySpec) {
    p.split_parity()
}

fn wrap(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

#[derive(Clone, Copy, Debug)]
struct M2([C64; 4]);

impl M2 {
    const ID: M2 = M2([
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]);

    fn mul(self, o: M2) -> M2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        M2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    fn phase(phi: f64) -> M2 {
        let z = C64::new(0.0, 0.0);
        M2([C64::from_polar(1.0, phi), z, z, C64::from_polar(1.0, -phi)])
    }

    /// `i Z e^{i phi Z}`.
    fn dphase(phi: f64) -> M2 {
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        M2([i * C64::from_polar(1.0, phi), z, z, -i * C64::from_polar(1.0, -phi)])
    }

    fn signal(x: f64) -> M2 {
        let s = C64::new(0.0, (1.0 - x * x).max(0.0).sqrt());
        let x = C64::new(x, 0.0);
        M2([x, s, s, x])
    }
}

fn product(angles: &[f64], x: f64) -> M2 {
    let w = M2::signal(x);
    angles[1..]
        .iter()
        .fold(M2::phase(angles[0]), |acc, &p| acc.mul(w).mul(M2::phase(p)))
}

/// Top-left entry of the QSP product at `x`.
pub fn evaluate_phases(phi: &PhaseSequence, x: f64) -> C64 {
    product(&phi.angles, x).0[0]
}

/// The full 2x2 QSP product, row-major.
pub fn qsp_matrix(phi: &PhaseSequence, x: f64) -> [C64; 4] {
    product(&phi.angles, x).0
}

/// `Re U[0,0]` and its gradient with respect to every phase.
fn value_and_grad(angles: &[f64], x: f64) -> (f64, Vec<f64>) {
    let d = angles.len() - 1;
    let w = M2::signal(x);
    // prefix[j] = everything left of the e^{i phi_j Z} factor
    let mut prefix = Vec::with_capacity(d + 1);
    prefix.push(M2::ID);
    let mut acc = M2::phase(angles[0]);
    for &p in &angles[1..] {
        let left = acc.mul(w);
        prefix.push(left);
        acc = left.mul(M2::phase(p));
    }
    let mut suffix = vec![M2::ID; d + 1];
    for j in (0..d).rev() {
        suffix[j] = w.mul(M2::phase(angles[j + 1])).mul(suffix[j + 1]);
    }
    let grad = (0..=d)
        .map(|j| prefix[j].mul(M2::dphase(angles[j])).mul(suffix[j]).0[0].re)
        .collect();
    (acc.0[0].re, grad)
}

fn expand(reduced: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|j| reduced[j.min(d - j)]).collect()
}

struct Problem {
    d: usize,
    nodes: Vec<f64>,
    target: Vec<f64>,
}

impl Problem {
    fn residual(&self, reduced: &[f64]) -> DVector<f64> {
        let full = expand(reduced, self.d);
        DVector::from_iterator(
            self.nodes.len(),
            self.nodes
                .iter()
                .zip(&self.target)
                .map(|(&x, &t)| product(&full, x).0[0].re - t),
        )
    }

    fn jacobian(&self, reduced: &[f64]) -> DMatrix<f64> {
        let full = expand(reduced, self.d);
        let n = reduced.len();
        let mut jac = DMatrix::zeros(self.nodes.len(), n);
        for (r, &x) in self.nodes.iter().enumerate() {
            let (_, g) = value_and_grad(&full, x);
            for (j, gj) in g.iter().enumerate() {
                jac[(r, j.min(self.d - j))] += gj;
            }
        }
        jac
    }

    fn numeric_jacobian(&self, reduced: &[f64]) -> DMatrix<f64> {
        let h = 1e-7;
        let n = reduced.len();
        let mut jac = DMatrix::zeros(self.nodes.len(), n);
        for j in 0..n {
            let mut up = reduced.to_vec();
            let mut dn = reduced.to_vec();
            up[j] += h;
            dn[j] -= h;
            let col = (self.residual(&up) - self.residual(&dn)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        jac
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped step along the solution of `jac * delta = res`; `None` when no
/// step length reduces the residual.
fn damped_step(
    prob: &Problem,
    x: &[f64],
    res: &DVector<f64>,
    jac: DMatrix<f64>,
) -> Option<(Vec<f64>, DVector<f64>)> {
    let delta = jac.lu().solve(res)?;
    let r0 = max_abs(res);
    let mut t = 1.0;
    for _ in 0..30 {
        let cand: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a - t * b).collect();
        let r = prob.residual(&cand);
        if max_abs(&r) < r0 {
            return Some((cand, r));
        }
        t *= 0.5;
    }
    None
}

fn newton(prob: &Problem, mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let mut res = prob.residual(&x);
    for _ in 0..MAX_STEPS {
        if max_abs(&res) <= 1e-15 {
            break;
        }
        let step = damped_step(prob, &x, &res, prob.jacobian(&x))
            .or_else(|| damped_step(prob, &x, &res, prob.numeric_jacobian(&x)));
        match step {
            Some((nx, nr)) => {
                x = nx;
                res = nr;
            }
            None => break,
        }
    }
    let r = max_abs(&res);
    (x, r)
}

/// Solves for symmetric phases with `Re U[0,0] = p(x)` on `[-1, 1]`.
///
/// `p` must have fixed parity and sup-norm at most 1. The result is checked
/// against `p` at the Chebyshev points `cos(k pi / 2d)`, `k = 0..=2d`, and
/// rejected unless every residual is within `tol`.
pub fn solve_phases(p: &PolySpec, tol: f64) -> Result<PhaseSequence, QspError> {
    let parity = p.parity();
    if parity == Parity::Mixed {
        return Err(QspError::NotFixedParity);
    }
    let keep = usize::from(parity == Parity::Odd);
    let p = PolySpec::new(
        p.coeffs()
            .iter()
            .enumerate()
            .map(|(j, &a)| if j % 2 == keep { a } else { 0.0 })
            .collect(),
    );
    let sup = linf_norm(&p, 1.0);
    if sup > 1.0 + 1e-9 {
        return Err(QspError::SupNormExceedsOne(sup));
    }
    let d = if p.is_zero() { keep } else { p.degree() };
    if d == 0 {
        let c = p.coeffs().first().copied().unwrap_or(0.0).clamp(-1.0, 1.0);
        return Ok(PhaseSequence::new(vec![c.acos()]));
    }

    let check = |angles: &[f64]| -> f64 {
        (0..=2 * d)
            .map(|k| {
                let x = (PI * k as f64 / (2 * d) as f64).cos();
                (product(angles, x).0[0].re - p.eval_dd(x)).abs()
            })
            .fold(0.0, f64::max)
    };

    let zero = vec![0.0; d + 1];
    if check(&zero) <= tol {
        return Ok(PhaseSequence::new(zero));
    }

    let n = d.div_ceil(2) + usize::from(d % 2 == 0);
    let nodes: Vec<f64> = (1..=n)
        .map(|k| ((2 * k - 1) as f64 * PI / (4 * n) as f64).cos())
        .collect();
    let target = nodes.iter().map(|&x| p.eval_dd(x)).collect();
    let prob = Problem { d, nodes, target };
    let mut seed = vec![0.0; n];
    seed[0] = FRAC_PI_4;
    let (sol, _) = newton(&prob, seed);
    let full = expand(&sol, d);
    let r = check(&full);
    if r <= tol {
        Ok(PhaseSequence::new(full))
    } else {
        Err(QspError::NoConvergence(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::chebyshev_t;

    /// `T_n` by the three-term recurrence.
    fn cheb(n: usize, x: f64) -> f64 {
        let (mut a, mut b) = (1.0, x);
        if n == 0 {
            return a;
        }
        for _ in 1..n {
            (a, b) = (b, 2.0 * x * b - a);
        }
        b
    }

    #[test]
    fn zero_phases_give_chebyshev() {
        for n in 0..=30 {
            let phi = PhaseSequence::new(vec![0.0; n + 1]);
            for k in 0..=50 {
                let x = -1.0 + 2.0 * k as f64 / 50.0;
                let v = evaluate_phases(&phi, x);
                assert!((v.re - cheb(n, x)).abs() < 1e-12, "n={n} x={x}");
                assert!(v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_is_unimodular() {
        let phi = PhaseSequence::new(vec![0.3, -1.2, 2.5, 0.7]);
        assert!((evaluate_phases(&phi, 1.0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_two_gives_zero_phases() {
        let phi = solve_phases(&chebyshev_t(2), 1e-10).unwrap();
        assert_eq!(phi.angles, vec![0.0; 3]);
        assert_eq!(phi.convention, "Wx");
    }

    #[test]
    fn identity_polynomial() {
        let phi = solve_phases(&PolySpec::new(vec![0.0, 1.0]), 1e-12).unwrap();
        for k in 0..=20 {
            let x = -1.0 + k as f64 / 10.0;
            assert!((evaluate_phases(&phi, x).re - x).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaled_regression_polynomial() {
        // 4x^2 - 4x^4 has sup-norm 1; shrink it off the boundary.
        let p = PolySpec::new(vec![0.0, 0.0, 4.0, 0.0, -4.0]).scale(1.0 - 1e-6);
        let phi = solve_phases(&p, 1e-8).unwrap();
        assert_eq!(phi.angles.len(), 5);
        for k in 0..=100 {
            let x = -1.0 + k as f64 / 50.0;
            assert!((evaluate_phases(&phi, x).re - p.eval(x)).abs() <= 1e-8);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            solve_phases(&PolySpec::new(vec![0.1, 0.2]), 1e-8),
            Err(QspError::NotFixedParity)
        );
        assert!(matches!(
            solve_phases(&PolySpec::new(vec![0.0, 1.5]), 1e-8),
            Err(QspError::SupNormExceedsOne(s)) if (s - 1.5).abs() < 1e-12
        ));
    }

    #[test]
    fn constant_polynomial() {
        let phi = solve_phases(&PolySpec::new(vec![0.3]), 1e-12).unwrap();
        assert!((evaluate_phases(&phi, 0.4).re - 0.3).abs() < 1e-12);
    }
}
