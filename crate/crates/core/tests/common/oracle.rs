//! Independent reference implementations shared by unit and integration tests.

use num_complex::Complex64;

/// Double-exponential quadrature on `[a, b]`. The integrand receives the
/// abscissa together with its exact distances to both endpoints so that
/// endpoint singularities can be evaluated without cancellation.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let t_max = 4.0;
    let term = |t: f64| -> f64 {
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let ch = s.cosh();
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() / (ch * ch);
        let ca = (b - a) / (1.0 + (-2.0 * s).exp());
        let cb = (b - a) / (1.0 + (2.0 * s).exp());
        if ca == 0.0 || cb == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = mid + half * s.tanh();
        let v = f(x, ca, cb) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut k = 1.0;
    while k * h <= t_max {
        sum += term(k * h) + term(-k * h);
        k += 1.0;
    }
    let mut estimate = sum * h;
    for _ in 0..14 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += term(t) + term(-t);
            t += 2.0 * h;
        }
        let next = sum * h;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `exp(x) K_nu(x)` from the integral representation over `cosh`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    let t_max = (1.0 + 745.0 / x).acosh();
    tanh_sinh(
        |t, _, _| {
            let sh = (0.5 * t).sinh();
            (-2.0 * x * sh * sh).exp() * (nu * t).cosh()
        },
        0.0,
        t_max,
        1e-14,
    )
}

pub fn elliptic_k(k: f64) -> f64 {
    tanh_sinh(
        |th, _, _| 1.0 / (1.0 - (k * th.sin()).powi(2)).sqrt(),
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-14,
    )
}

pub fn elliptic_e(k: f64) -> f64 {
    tanh_sinh(
        |th, _, _| (1.0 - (k * th.sin()).powi(2)).sqrt(),
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-14,
    )
}

/// Photon absorption kernel from its defining integral.
pub fn photon_kernel(x: f64, z: f64, plus: bool) -> f64 {
    if x <= 1.0 + z {
        return 0.0;
    }
    let sign = if plus { 1.0 } else { -1.0 };
    tanh_sinh(
        |y, dy1, dyz| {
            let num = y * (x - y) + sign * z;
            let d1 = (dy1 * (y + 1.0)).sqrt();
            let d2 = (dyz * (x - y + z)).sqrt();
            num / (d1 * d2)
        },
        1.0,
        x - z,
        1e-13,
    )
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the Hermitian one doubled.
pub fn hermitian_eigenvalues_dense(a: &[Vec<Complex64>]) -> Vec<f64> {
    let n = a.len();
    let m = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = a[ii][jj];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.into_iter().step_by(2).collect()
}
