use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::MatrixError;
use crate::scalar::{format_f64, Rational};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre on `[-w, w]`: `panels` equal panels of `order` nodes.
fn composite_rule(half_width: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = 2.0 * half_width / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = -half_width + h * (p as f64 + 0.5);
        out.extend(base.iter().map(|&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w)));
    }
    out
}

/// Tensor product of per-axis rules, parallel over the first axis.
fn tensor_quadrature(rules: &[Vec<(f64, f64)>], f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let dims = rules.len();
    let rest_total: usize = rules[1..].iter().map(|r| r.len()).product();
    let parts: Vec<f64> = rules[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = 0.0;
            let mut point = vec![0.0; dims];
            point[0] = x0;
            for rest in 0..rest_total {
                let mut weight = w0;
                let mut r = rest;
                for (axis, rule) in rules.iter().enumerate().skip(1) {
                    let (x, w) = rule[r % rule.len()];
                    point[axis] = x;
                    weight *= w;
                    r /= rule.len();
                }
                acc += weight * f(&point);
            }
            acc
        })
        .collect();
    parts.iter().sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizationReport {
    pub n: usize,
    pub lambda: Vec<String>,
    /// Quadrature against unit Lebesgue measure on diagonal entries and real/imaginary parts.
    pub lebesgue: String,
    /// The same times the Riemannian volume factor `2^{N(N−1)/2}` of `tr(dM²)` on off-diagonals.
    pub metric: String,
    pub closed_form: String,
    pub relative_error: String,
    pub convention: &'static str,
    pub pass: bool,
}

/// `∫ exp(−½ tr ΛM²) dM` over `N × N` Hermitian matrices, `N ∈ {1, 2}`, against
/// `2^{N(N−1)/2} (2π)^{N²/2} Π λ_r^{−1/2} Π_{i<j} (λ_i+λ_j)^{−1}`.
pub fn gaussian_normalization_check(lambda: &[Rational], tol: f64) -> Result<NormalizationReport, MatrixError> {
    let n = lambda.len();
    if n == 0 || n > 2 {
        return Err(MatrixError::Unsupported(format!("quadrature only for N <= 2, got N = {n}")));
    }
    let l: Vec<f64> = lambda.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
    if l.iter().any(|x| !(*x > 0.0)) {
        return Err(MatrixError::InvalidSpec("λ must be positive".into()));
    }
    // tr ΛM² = Σ_i λ_i (M²)_ii, (M²)_ii = Σ_j |M_ij|²
    let integrand = |p: &[f64]| -> f64 {
        match n {
            1 => (-0.5 * l[0] * p[0] * p[0]).exp(),
            _ => {
                let off = p[2] * p[2] + p[3] * p[3];
                let tr = l[0] * (p[0] * p[0] + off) + l[1] * (p[1] * p[1] + off);
                (-0.5 * tr).exp()
            }
        }
    };
    let dims = n * n;
    // exponent −½ c x² per axis: c = λ_i on diagonals, λ_1 + λ_2 on off-diagonal parts
    let coef: Vec<f64> = if n == 1 { vec![l[0]] } else { vec![l[0], l[1], l[0] + l[1], l[0] + l[1]] };
    // ±8σ per axis: the neglected tails are below 1e−14
    let rules = |(panels, order): (usize, usize)| -> Vec<Vec<(f64, f64)>> {
        coef.iter().map(|c| composite_rule(8.0 / c.sqrt(), panels, order)).collect()
    };
    let (coarse, fine) = if n == 1 { ((8, 8), (16, 10)) } else { ((8, 7), (8, 8)) };
    let a = tensor_quadrature(&rules(coarse), &integrand);
    let b = tensor_quadrature(&rules(fine), &integrand);
    if ((a - b) / b).abs() > tol.min(1e-8) {
        return Err(MatrixError::NumericError(format!("rules {coarse:?} and {fine:?} differ: {a} vs {b}")));
    }
    let jac = 2f64.powi((n * (n - 1) / 2) as i32);
    let metric = b * jac;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut closed = jac * two_pi.powf(dims as f64 / 2.0) * l.iter().map(|x| x.powf(-0.5)).product::<f64>();
    for i in 0..n {
        for j in i + 1..n {
            closed /= l[i] + l[j];
        }
    }
    let rel = ((metric - closed) / closed).abs();
    Ok(NormalizationReport {
        n,
        lambda: lambda.iter().map(crate::scalar::format_rational).collect(),
        lebesgue: format_f64(b),
        metric: format_f64(metric),
        closed_form: format_f64(closed),
        relative_error: format_f64(rel),
        convention: "dM = Π dM_ii Π_{i<j} 2 dRe M_ij dIm M_ij",
        pass: rel <= tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HciZReport {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub samples: u64,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl HciZReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x": [format_f64(self.x[0]), format_f64(self.x[1])],
            "y": [format_f64(self.y[0]), format_f64(self.y[1])],
            "samples": self.samples,
            "seed": self.seed,
            "estimate": format_f64(self.estimate),
            "stderr": format_f64(self.stderr),
            "closed_form": format_f64(self.closed_form),
            "tolerance": format_f64(self.tolerance),
            "pass": self.pass,
        })
    }
}

/// `(e^{x₁y₁+x₂y₂} − e^{x₁y₂+x₂y₁}) / ((x₁−x₂)(y₁−y₂))`, with the coincident limits.
pub fn hciz_closed_form(x: [f64; 2], y: [f64; 2]) -> f64 {
    let dx = x[0] - x[1];
    let dy = y[0] - y[1];
    match (dx == 0.0, dy == 0.0) {
        (true, _) => (x[0] * (y[0] + y[1])).exp(),
        (_, true) => (y[0] * (x[0] + x[1])).exp(),
        _ => ((x[0] * y[0] + x[1] * y[1]).exp() - (x[0] * y[1] + x[1] * y[0]).exp()) / (dx * dy),
    }
}

/// Haar unitary 2×2 by Gram–Schmidt on a complex Ginibre matrix; only `|U_ij|²` is returned.
/// Gram–Schmidt fixes the phases of the triangular factor's diagonal to be positive.
fn haar_moduli(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let mut z = [[(0.0f64, 0.0f64); 2]; 2];
    for row in z.iter_mut() {
        for e in row.iter_mut() {
            *e = (StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
    }
    // columns c0 = (z00, z10), c1 = (z01, z11)
    let n0 = (z[0][0].0.powi(2) + z[0][0].1.powi(2) + z[1][0].0.powi(2) + z[1][0].1.powi(2)).sqrt();
    let q0 = [(z[0][0].0 / n0, z[0][0].1 / n0), (z[1][0].0 / n0, z[1][0].1 / n0)];
    // ⟨q0, c1⟩ = Σ conj(q0_i) c1_i
    let ip = (0..2).fold((0.0, 0.0), |acc, i| {
        let (a, b) = q0[i];
        let (c, d) = z[i][1];
        (acc.0 + a * c + b * d, acc.1 + a * d - b * c)
    });
    let mut v = [z[0][1], z[1][1]];
    for i in 0..2 {
        let (a, b) = q0[i];
        v[i].0 -= ip.0 * a - ip.1 * b;
        v[i].1 -= ip.0 * b + ip.1 * a;
    }
    let n1 = (v[0].0.powi(2) + v[0].1.powi(2) + v[1].0.powi(2) + v[1].1.powi(2)).sqrt();
    let m = |p: (f64, f64), s: f64| (p.0 * p.0 + p.1 * p.1) / (s * s);
    [[m(q0[0], 1.0), m(v[0], n1)], [m(q0[1], 1.0), m(v[1], n1)]]
}

const CHUNK: u64 = 4096;

/// Monte Carlo `E exp(tr X U Y U*)` over Haar `U ∈ U(2)`. Samples are drawn in fixed chunks,
/// chunk `c` from `ChaCha8(seed)` on stream `c`, and reduced in chunk order, so the estimate is
/// bit-identical for a given seed and sample count regardless of thread count.
pub fn hciz_check(x: [f64; 2], y: [f64; 2], samples: u64, seed: u64) -> HciZReport {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let u = haar_moduli(&mut rng);
                let mut tr = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        tr += x[i] * y[j] * u[i][j];
                    }
                }
                let f = tr.exp();
                sum += f;
                sq += f * f;
            }
            (sum, sq, count)
        })
        .collect();
    let (sum, sq, count) = partial.iter().fold((0.0, 0.0, 0u64), |a, p| (a.0 + p.0, a.1 + p.1, a.2 + p.2));
    let nf = count.max(1) as f64;
    let estimate = sum / nf;
    let var = ((sq / nf - estimate * estimate) * nf / (nf - 1.0).max(1.0)).max(0.0);
    let stderr = (var / nf).sqrt();
    let closed_form = hciz_closed_form(x, y);
    // a zero-variance estimator is compared at rounding level
    let tolerance = (5.0 * stderr).max(1e-12 * closed_form.abs().max(1.0));
    HciZReport {
        x,
        y,
        samples: count,
        seed,
        estimate,
        stderr,
        closed_form,
        tolerance,
        pass: (estimate - closed_form).abs() <= tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_gaussians() {
        for c in [1.0f64, 2.0, 3.0] {
            let r = composite_rule(8.0 / c.sqrt(), 8, 8);
            let v: f64 = r.iter().map(|(x, w)| w * (-0.5 * c * x * x).exp()).sum();
            assert!((v / (2.0 * std::f64::consts::PI / c).sqrt() - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn haar_moduli_are_doubly_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = haar_moduli(&mut rng);
            for i in 0..2 {
                assert!((u[i][0] + u[i][1] - 1.0).abs() < 1e-12);
                assert!((u[0][i] + u[1][i] - 1.0).abs() < 1e-12);
            }
        }
    }
}
