//! Special functions: modified Bessel functions of the second kind, complete
//! elliptic integrals, the normalized sinc and the photon absorption kernels.

use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Order of the modified Bessel function of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

/// Kind of complete elliptic integral, parameterised by the modulus `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipticKind {
    First,
    Second,
}

/// Which photon absorption kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSign {
    Plus,
    Minus,
}

/// Arguments of the photon absorption kernel: photon energy `x` and gap
/// ratio `z`, both in units of the smaller reference gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonKernelArgs {
    pub x: f64,
    pub z: f64,
    pub sign: KernelSign,
}

impl PhotonKernelArgs {
    pub fn new(x: f64, z: f64, sign: KernelSign) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::domain(
                "photon kernel",
                format!("x = {x} must be >= 0"),
            ));
        }
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::domain(
                "photon kernel",
                format!("z = {z} must lie in (0, 1]"),
            ));
        }
        Ok(Self { x, z, sign })
    }
}

/// `sin(pi x) / (pi x)`, equal to one at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let px = PI * x;
    if px.abs() < 1e-4 {
        let p2 = px * px;
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
    }
    px.sin() / px
}

/// `K_n(x)` for `x > 0`.
pub fn bessel_k(order: BesselOrder, x: f64) -> Result<f64> {
    let s = bessel_k_scaled(order, x)?;
    Ok(s * (-x).exp())
}

/// `exp(x) K_n(x)` for `x > 0`; stays finite for large arguments.
pub fn bessel_k_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    let (k0, k1) = bessel_k01_scaled(x)?;
    Ok(match order {
        BesselOrder::Zero => k0,
        BesselOrder::One => k1,
    })
}

/// Both `exp(x) K_0(x)` and `exp(x) K_1(x)`.
pub fn bessel_k01_scaled(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::domain(
            "bessel_k",
            format!("argument {x} must be > 0"),
        ));
    }
    if x.is_infinite() {
        return Ok((0.0, 0.0));
    }
    if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        Ok((k0 * e, k1 * e))
    } else {
        k01_continued_fraction(x)
    }
}

// Ascending series around the origin.
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    // term0 = q^k / (k!)^2, term1 = q^k / (k! (k+1)!)
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut harmonic = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term0 *= q / (kf * kf);
            term1 *= q / (kf * (kf + 1.0));
            harmonic += 1.0 / kf;
        }
        let psi1 = harmonic - EULER_GAMMA;
        let psi2 = psi1 + 1.0 / (kf + 1.0);
        i0 += term0;
        i1 += term1;
        s0 += harmonic * term0;
        s1 += (psi1 + psi2) * term1;
        if term0 < 1e-18 * i0 && k > 2 {
            break;
        }
    }
    i1 *= 0.5 * x;
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

// Steed's continued fraction with Temme's normalisation sum, valid for x >= 2.
fn k01_continued_fraction(x: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("bessel continued fraction"));
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// Complete elliptic integral in the modulus convention, `0 <= k < 1`
/// (`k = 1` is allowed for the second kind).
pub fn elliptic_complete(kind: EllipticKind, k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::domain(
            "elliptic",
            format!("modulus {k} outside [0, 1]"),
        ));
    }
    if k == 1.0 {
        return match kind {
            EllipticKind::First => Err(Error::domain("elliptic", "K diverges at k = 1")),
            EllipticKind::Second => Ok(1.0),
        };
    }
    let mut a = 1.0;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let kk = FRAC_PI_2 / a;
    Ok(match kind {
        EllipticKind::First => kk,
        EllipticKind::Second => kk * (1.0 - sum),
    })
}

/// Photon absorption kernel: the Cooper-pair breaking density of states for a
/// photon of energy `x` across a junction with gap ratio `z`. Vanishes below
/// the threshold `x = 1 + z`.
pub fn photon_kernel(args: PhotonKernelArgs) -> f64 {
    let PhotonKernelArgs { x, z, sign } = args;
    if x <= 1.0 + z {
        return 0.0;
    }
    let a2 = (x - z + 1.0) * (x + z - 1.0);
    let a = a2.sqrt();
    let k = ((x - z - 1.0) * (x + z + 1.0) / a2).sqrt().min(1.0);
    let e = elliptic_complete(EllipticKind::Second, k).expect("modulus in range");
    match sign {
        KernelSign::Plus => a * e,
        KernelSign::Minus => {
            let kk = elliptic_complete(EllipticKind::First, k).expect("modulus below one");
            a * e - 4.0 * z / a * kk
        }
    }
}
