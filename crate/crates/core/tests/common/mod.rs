//! Test-side oracles, written without the library's solver or matrix code.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use jointmeas::bloch::BlochVector;

pub type M2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `w/2 (1 + s v·σ)` written out entry by entry.
pub fn weighted_projector(w: f64, v: [f64; 3], s: f64) -> M2 {
    let h = 0.5 * w;
    [
        [c(h * (1.0 + s * v[2]), 0.0), c(h * s * v[0], -h * s * v[1])],
        [c(h * s * v[0], h * s * v[1]), c(h * (1.0 - s * v[2]), 0.0)],
    ]
}

pub fn madd(a: &M2, b: &M2) -> M2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn max_diff(a: &M2, b: &M2) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

pub fn identity() -> M2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn zero() -> M2 {
    [[c(0.0, 0.0); 2]; 2]
}

/// Smaller eigenvalue of a Hermitian 2×2 matrix.
pub fn min_eig(m: &M2) -> f64 {
    let (a, d) = (m[0][0].re, m[1][1].re);
    let off = m[0][1].norm();
    0.5 * (a + d) - (0.25 * (a - d).powi(2) + off * off).sqrt()
}

/// `Tr(ρ E)` with `ρ = ½(1 + r·σ)`.
pub fn born(r: [f64; 3], e: &M2) -> f64 {
    let rho = weighted_projector(1.0, r, 1.0);
    let mut t = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            t += rho[i][j] * e[j][i];
        }
    }
    t.re
}

pub fn arr(v: &BlochVector<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// `cos 2θ_max = (2p − 1)/(2p² − 2p + 1)`: the largest angle for which
/// `α² + β² = 2(p² + (1−p)²)` and `αβ cos 2θ = 2p − 1` have a real solution.
pub fn theta_max_oracle(p: f64) -> f64 {
    let m = 2.0 * p * p - 2.0 * p + 1.0;
    0.5 * ((2.0 * p - 1.0) / m).acos()
}

/// 25 values of `p` in `(0.5, 0.95]`, 24 values of θ in `[0, 0.95 θ_max]`,
/// plus `(0.5, 45°)`: 601 points.
pub fn lattice() -> Vec<(f64, f64)> {
    let mut out = vec![(0.5, std::f64::consts::FRAC_PI_4)];
    for i in 1..=25 {
        let p = 0.5 + 0.018 * i as f64;
        let tmax = theta_max_oracle(p);
        for j in 0..24 {
            out.push((p, 0.95 * tmax * j as f64 / 23.0));
        }
    }
    out
}

/// Residual of the construction conditions `|αa + βb| = 2p`,
/// `|αa − βb| = 2(1 − p)` for unit vectors at angle 2θ. L1 so the minimum is
/// a kink that a shrinking grid resolves to full precision.
fn residual(alpha: f64, beta: f64, p: f64, cos2: f64) -> f64 {
    let plus = (alpha * alpha + beta * beta + 2.0 * alpha * beta * cos2)
        .max(0.0)
        .sqrt();
    let minus = (alpha * alpha + beta * beta - 2.0 * alpha * beta * cos2)
        .max(0.0)
        .sqrt();
    (plus - 2.0 * p).abs() + (minus - 2.0 * (1.0 - p)).abs()
}

/// Brute-force `(α, β)` with `α ≤ β` on `[0, 1]²`: a 256×256 grid, then 80
/// rounds of a 21×21 grid shrinking around the best point.
pub fn brute_force(p: f64, theta: f64) -> (f64, f64) {
    let cos2 = (2.0 * theta).cos();
    let n = 256;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        for j in i..=n {
            let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
            let r = residual(a, b, p, cos2);
            if r < best.0 {
                best = (r, a, b);
            }
        }
    }
    let mut h = 2.0 / n as f64;
    for _ in 0..80 {
        let (_, a0, b0) = best;
        for i in -10..=10 {
            for j in -10..=10 {
                let a = (a0 + h * i as f64 / 10.0).clamp(0.0, 1.0);
                let b = (b0 + h * j as f64 / 10.0).clamp(a, 1.0);
                let r = residual(a, b, p, cos2);
                if r < best.0 {
                    best = (r, a, b);
                }
            }
        }
        h *= 0.5;
    }
    (best.1, best.2)
}

pub fn random_unit<R: Rng>(rng: &mut R) -> BlochVector<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    BlochVector::new(s * phi.cos(), s * phi.sin(), z)
}

/// A unit vector at angle `2θ` from `a`, rotated about `a` by `phi`.
pub fn partner(a: &BlochVector<f64>, theta: f64, phi: f64) -> BlochVector<f64> {
    let helper = if a.z.abs() < 0.9 {
        BlochVector::unit_z()
    } else {
        BlochVector::unit_x()
    };
    let e1 = a.cross(&helper).normalized().unwrap();
    let e2 = a.cross(&e1);
    let (s, c) = (2.0 * theta).sin_cos();
    a.scale(c) + (e1.scale(phi.cos()) + e2.scale(phi.sin())).scale(s)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
