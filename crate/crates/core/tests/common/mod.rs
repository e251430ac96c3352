//! Independent reference values for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

/// `J_n(x)` for `n ∈ {0, 1}` from the power series; accurate for `|x| ≲ 10`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J₁′(x) = J₀(x) − J₁(x)/x`.
pub fn bessel_j1_prime(x: f64) -> f64 {
    bessel_j(0, x) - bessel_j(1, x) / x
}

/// Root of `f` in `[lo, hi]` by bisection; `f` must change sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of `J₁′`.
pub fn j1_prime_first_zero() -> f64 {
    bisect(bessel_j1_prime, 1.0, 3.0)
}

/// Neumann heat kernel of `[0, l]` for the generator `d²/dx²`.
pub fn kernel_1d(l: f64, t: f64, a: f64, b: f64) -> f64 {
    let mut s = 1.0;
    for n in 1..2000 {
        let k = n as f64 * PI / l;
        let e = (-k * k * t).exp();
        if e < 1e-17 {
            break;
        }
        s += 2.0 * e * (k * a).cos() * (k * b).cos();
    }
    s / l
}

/// Neumann heat kernel of `[0, l] × [0, h]`.
pub fn rect_kernel(l: f64, h: f64, t: f64, x: [f64; 2], y: [f64; 2]) -> f64 {
    kernel_1d(l, t, x[0], y[0]) * kernel_1d(h, t, x[1], y[1])
}

/// `P(X_t ≤ x)` for the reflected motion on `[0, l]` started at `a`.
pub fn marginal_cdf_1d(l: f64, t: f64, a: f64, x: f64) -> f64 {
    let mut s = x / l;
    for n in 1..2000 {
        let k = n as f64 * PI / l;
        let e = (-k * k * t).exp();
        if e < 1e-17 {
            break;
        }
        s += 2.0 * e * (k * a).cos() * (k * x).sin() / (n as f64 * PI);
    }
    s
}

/// Mean of `f` over a triangle by uniform subdivision into `m²` pieces.
pub fn triangle_mean(p: [[f64; 2]; 3], m: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let at = |i: f64, j: f64| {
        let (u, v) = (i / m as f64, j / m as f64);
        [
            p[0][0] + u * (p[1][0] - p[0][0]) + v * (p[2][0] - p[0][0]),
            p[0][1] + u * (p[1][1] - p[0][1]) + v * (p[2][1] - p[0][1]),
        ]
    };
    let mut s = 0.0;
    let mut n = 0usize;
    for i in 0..m {
        for j in 0..m - i {
            let (a, b, c) = (at(i as f64, j as f64), at(i as f64 + 1.0, j as f64), at(i as f64, j as f64 + 1.0));
            s += f([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
            n += 1;
            if j + 1 < m - i {
                let d = at(i as f64 + 1.0, j as f64 + 1.0);
                s += f([(b[0] + c[0] + d[0]) / 3.0, (b[1] + c[1] + d[1]) / 3.0]);
                n += 1;
            }
        }
    }
    s / n as f64
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// `P(T ≤ t)` for the first passage of `√2·W` over a level at distance `c`.
pub fn first_passage_cdf(c: f64, t: f64) -> f64 {
    2.0 * (1.0 - normal_cdf(c / (2.0 * t).sqrt()))
}

/// Median of that first passage time.
pub fn first_passage_median(c: f64) -> f64 {
    bisect(|t| first_passage_cdf(c, t) - 0.5, 1e-3 * c * c, 1e3 * c * c)
}

#[test]
fn oracle_self_checks() {
    assert!((bessel_j(0, 2.404825557695773)).abs() < 1e-12);
    assert!((j1_prime_first_zero() - 1.841183781340659).abs() < 1e-10);
    assert!((first_passage_median(2.0) / 4.0 - 1.0991).abs() < 1e-3);
    let l = 3.0;
    assert!((marginal_cdf_1d(l, 0.7, 1.0, l) - 1.0).abs() < 1e-12);
    let mass: f64 = (0..3000).map(|i| kernel_1d(l, 0.7, 1.0, (i as f64 + 0.5) * l / 3000.0) * l / 3000.0).sum();
    assert!((mass - 1.0).abs() < 1e-9);
    let m = triangle_mean([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 8, |p| p[0]);
    assert!((m - 1.0 / 3.0).abs() < 1e-12);
}
