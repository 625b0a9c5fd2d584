//! Polynomial norms used by the cost model.

use crate::poly::PolySpec;
use crate::C64;

const INVPHI: f64 = 0.618_033_988_749_894_8;

/// `sum |a_j| alpha^j`.
pub fn l1_norm(p: &PolySpec, alpha: f64) -> f64 {
    let mut pow = 1.0;
    let mut s = 0.0;
    for &a in p.coeffs() {
        s += a.abs() * pow;
        pow *= alpha;
    }
    s
}

/// Maximizes `f` on `[lo, hi]` by golden-section search, assuming a single
/// local maximum in the bracket.
fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    while hi - lo > width {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// Samples `f` at `xs` (sorted ascending), then refines every local maximum
/// of the samples within its neighbouring bracket.
fn sampled_max(f: &impl Fn(f64) -> f64, xs: &[f64], periodic: bool) -> f64 {
    let n = xs.len();
    let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = v.iter().cloned().fold(0.0, f64::max);
    for k in 0..n {
        let (l, r) = if periodic {
            ((k + n - 1) % n, (k + 1) % n)
        } else {
            (k.saturating_sub(1), (k + 1).min(n - 1))
        };
        let is_max = (l == k || v[k] > v[l]) && (r == k || v[k] >= v[r]);
        if !is_max || l == k && r == k {
            continue;
        }
        let (a, b) = if periodic {
            let h = xs[1] - xs[0];
            (xs[k] - h, xs[k] + h)
        } else {
            (xs[l], xs[r])
        };
        best = best.max(golden_max(f, a, b, 1e-12));
    }
    best
}

/// `max_{|x| <= 1} |p(alpha x)|`.
///
/// Sampled at 4097 Chebyshev nodes; every sampled local maximum is refined
/// by golden-section search.
pub fn linf_norm(p: &PolySpec, alpha: f64) -> f64 {
    if p.degree() == 0 {
        return p.coeffs().first().map_or(0.0, |a| a.abs());
    }
    let n = 4096;
    let mut xs: Vec<f64> = (0..=n)
        .map(|k| (std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    xs.reverse();
    let f = |x: f64| p.eval_dd(alpha * x).abs();
    sampled_max(&f, &xs, false)
}

/// `max_{|z| = 1} |sum_j c_j z^j|` where `c` are the Chebyshev coefficients of
/// `p(alpha x)`.
pub fn gqet_norm(p: &PolySpec, alpha: f64) -> f64 {
    let c = p.scale_arg(alpha).to_chebyshev();
    if c.len() <= 1 {
        return c.first().map_or(0.0, |a| a.abs());
    }
    let n = 4096.max(64 * c.len());
    let tau = std::f64::consts::TAU;
    let xs: Vec<f64> = (0..n).map(|k| tau * k as f64 / n as f64).collect();
    let f = |t: f64| {
        let z = C64::from_polar(1.0, t);
        c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a).norm()
    };
    sampled_max(&f, &xs, true)
}
