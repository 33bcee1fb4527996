//! Small numerical kernels shared by the analytical modules: Gauss-Hermite
//! rules, bracketed root finding, golden-section search and a stable
//! pairwise mean.

use crate::error::{Error, Result};

/// Gauss-Hermite rule for integrals of the form `∫ e^{-x²} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `order`-point rule by Newton iteration on the orthonormal
    /// Hermite recurrence.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(crate::error::invalid("order", "Gauss-Hermite order must be >= 1"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let half = n.div_ceil(2);
        let mut z = 0.0_f64;
        for i in 0..half {
            z = match i {
                0 => {
                    let m = (2 * n + 1) as f64;
                    m.sqrt() - 1.85575 * m.powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(Z)]` for `Z ~ N(mean, sd²)`.
    pub fn normal_expectation<F: Fn(f64) -> f64>(&self, mean: f64, sd: f64, f: F) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sd;
        let acc: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mean + scale * x))
            .sum();
        acc / std::f64::consts::PI.sqrt()
    }
}

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NoRoot("Brent iteration limit".into()))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Pairwise-summed mean; the result does not depend on how the slice was
/// produced, only on its order.
pub fn pairwise_mean(xs: &[f64]) -> f64 {
    fn sum(xs: &[f64]) -> f64 {
        if xs.len() <= 16 {
            xs.iter().sum()
        } else {
            let (l, r) = xs.split_at(xs.len() / 2);
            sum(l) + sum(r)
        }
    }
    if xs.is_empty() {
        return f64::NAN;
    }
    sum(xs) / xs.len() as f64
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = pairwise_mean(xs);
    if n < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_mean(&dev) * n as f64 / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Kolmogorov distance between the empirical CDF of `samples` and `cdf`.
/// `samples` is sorted in place; non-finite values count as `+∞`.
pub fn ks_distance<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        if !x.is_finite() {
            d = d.max(1.0 - i as f64 / n);
            break;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Deterministic per-unit generator: one ChaCha8 key for the master seed,
/// one stream per `(domain, unit)` pair. Results never depend on which
/// thread ran which unit.
pub fn stream_rng(seed: u64, domain: u32, unit: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 40) ^ unit);
    rng
}
