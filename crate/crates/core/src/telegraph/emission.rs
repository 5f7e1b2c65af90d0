use super::Parity;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Bivariate normal in the IQ plane (volts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian2 {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl Gaussian2 {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let g = Self { mean, cov };
        g.validate()?;
        Ok(g)
    }

    pub fn isotropic(mean: [f64; 2], sigma: f64) -> Result<Self> {
        Self::new(mean, [[sigma * sigma, 0.0], [0.0, sigma * sigma]])
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cov;
        let finite = self
            .mean
            .iter()
            .chain(c.iter().flatten())
            .all(|v| v.is_finite());
        if !finite || c[0][1] != c[1][0] || c[0][0] <= 0.0 || self.det() <= 0.0 {
            return Err(Error::domain(
                "covariance",
                format!("{c:?} must be finite, symmetric and positive definite"),
            ));
        }
        Ok(())
    }

    fn det(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    pub fn log_pdf(&self, p: [f64; 2]) -> f64 {
        let det = self.det();
        let dx = p[0] - self.mean[0];
        let dy = p[1] - self.mean[1];
        let q = (self.cov[1][1] * dx * dx - 2.0 * self.cov[0][1] * dx * dy
            + self.cov[0][0] * dy * dy)
            / det;
        -0.5 * q - (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let l00 = self.cov[0][0].sqrt();
        let l10 = self.cov[1][0] / l00;
        let l11 = (self.cov[1][1] - l10 * l10).sqrt();
        let u: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        [self.mean[0] + l00 * u, self.mean[1] + l10 * u + l11 * v]
    }

    /// Weighted maximum-likelihood estimate.
    pub(crate) fn from_weighted(
        points: &[[f64; 2]],
        weights: impl Iterator<Item = f64> + Clone,
    ) -> Option<Self> {
        let total: f64 = weights.clone().sum();
        if total <= 0.0 {
            return None;
        }
        let mut m = [0.0; 2];
        for (p, w) in points.iter().zip(weights.clone()) {
            m[0] += w * p[0];
            m[1] += w * p[1];
        }
        m[0] /= total;
        m[1] /= total;
        let mut c = [[0.0; 2]; 2];
        for (p, w) in points.iter().zip(weights) {
            let d = [p[0] - m[0], p[1] - m[1]];
            c[0][0] += w * d[0] * d[0];
            c[0][1] += w * d[0] * d[1];
            c[1][1] += w * d[1] * d[1];
        }
        let c01 = c[0][1] / total;
        let g = Gaussian2 {
            mean: m,
            cov: [[c[0][0] / total, c01], [c01, c[1][1] / total]],
        };
        g.validate().ok().map(|_| g)
    }
}

/// Three transmon-state clusters and the state mixtures seen in each parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionModel {
    pub states: [Gaussian2; 3],
    pub even_weights: [f64; 3],
    pub odd_weights: [f64; 3],
}

impl EmissionModel {
    /// Clusters separated by several widths, with imperfect parity mapping:
    /// even shows mostly |0>, odd mostly |1> with some |2>.
    pub fn typical() -> Self {
        let s = 0.3e-3;
        let g = |x, y| Gaussian2::isotropic([x, y], s).expect("valid cluster");
        Self {
            states: [g(-1.0e-3, 0.0), g(1.0e-3, 0.0), g(1.0e-3, 1.6e-3)],
            even_weights: [0.94, 0.05, 0.01],
            odd_weights: [0.05, 0.85, 0.10],
        }
    }

    /// Each parity maps onto a single state.
    pub fn ideal(states: [Gaussian2; 3]) -> Self {
        Self {
            states,
            even_weights: [1.0, 0.0, 0.0],
            odd_weights: [0.0, 1.0, 0.0],
        }
    }

    pub fn weights(&self, parity: Parity) -> &[f64; 3] {
        match parity {
            Parity::Even => &self.even_weights,
            Parity::Odd => &self.odd_weights,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.states {
            s.validate()?;
        }
        for w in [&self.even_weights, &self.odd_weights] {
            validate_weights(w)?;
        }
        Ok(())
    }

    pub fn fidelity(&self, samples: usize, seed: u64) -> f64 {
        parity_fidelity(
            &[self.even_weights, self.odd_weights],
            &self.states,
            samples,
            seed,
        )
    }
}

pub(crate) fn validate_weights(w: &[f64; 3]) -> Result<()> {
    let sum: f64 = w.iter().sum();
    if w.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::domain(
            "mixture weights",
            format!("{w:?} must be non-negative and sum to 1"),
        ));
    }
    Ok(())
}

/// Most likely calibration state; ties go to the lower index.
pub fn classify_point(states: &[Gaussian2; 3], p: [f64; 2]) -> u8 {
    let mut best = 0;
    let mut best_l = states[0].log_pdf(p);
    for (k, s) in states.iter().enumerate().skip(1) {
        let l = s.log_pdf(p);
        if l > best_l {
            best = k;
            best_l = l;
        }
    }
    best as u8
}

pub fn classify_shots(trace: &super::ShotTrace) -> Vec<u8> {
    trace
        .iq
        .iter()
        .map(|p| classify_point(&trace.calibration, *p))
        .collect()
}

/// Parity readout of classified shots: +1 for the ground state, -1 otherwise.
pub fn parity_signal(states: &[u8]) -> Vec<f64> {
    states
        .iter()
        .map(|&s| if s == 0 { 1.0 } else { -1.0 })
        .collect()
}

fn log_mixture(weights: &[f64; 3], logs: &[f64; 3]) -> f64 {
    let terms: Vec<f64> = weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, l)| w.ln() + l)
        .collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// One minus the overlap `integral min(p_even, p_odd)` of the two parity
/// emission densities, estimated by Monte Carlo from their equal mixture.
pub fn parity_fidelity(
    weights: &[[f64; 3]; 2],
    states: &[Gaussian2; 3],
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mix = [0.0; 3];
    for k in 0..3 {
        mix[k] = 0.5 * (weights[0][k] + weights[1][k]);
    }
    let mut acc = 0.0;
    for _ in 0..samples.max(1) {
        let u: f64 = rng.gen();
        let k = if u < mix[0] {
            0
        } else if u < mix[0] + mix[1] {
            1
        } else {
            2
        };
        let p = states[k].sample(&mut rng);
        let logs = [
            states[0].log_pdf(p),
            states[1].log_pdf(p),
            states[2].log_pdf(p),
        ];
        let le = log_mixture(&weights[0], &logs);
        let lo = log_mixture(&weights[1], &logs);
        // 2 min(a, b) / (a + b) written to survive underflow
        let ratio = if le == f64::NEG_INFINITY || lo == f64::NEG_INFINITY {
            0.0
        } else {
            2.0 / (1.0 + (le - lo).abs().exp())
        };
        acc += ratio;
    }
    (1.0 - acc / samples.max(1) as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_pdf_matches_closed_form() {
        let g = Gaussian2::new([0.1, -0.2], [[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let det: f64 = 2.0 - 0.25;
        let expect = -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln();
        assert!((g.log_pdf([0.1, -0.2]) - expect).abs() < 1e-14);
        assert!(Gaussian2::new([0.0; 2], [[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(Gaussian2::new([0.0; 2], [[1.0, 0.1], [0.2, 1.0]]).is_err());
    }

    #[test]
    fn classify_ties_to_lowest() {
        let states = [
            Gaussian2::isotropic([-1.0, 0.0], 1.0).unwrap(),
            Gaussian2::isotropic([1.0, 0.0], 1.0).unwrap(),
            Gaussian2::isotropic([5.0, 5.0], 1.0).unwrap(),
        ];
        assert_eq!(classify_point(&states, [0.0, 0.0]), 0);
        assert_eq!(classify_point(&states, [1.0, 0.0]), 1);
        assert_eq!(classify_point(&states, [5.0, 5.0]), 2);
    }

    #[test]
    fn fidelity_limits() {
        let m = EmissionModel::typical();
        let same = [m.even_weights, m.even_weights];
        assert!(parity_fidelity(&same, &m.states, 10_000, 1) < 1e-12);
        let far = [
            Gaussian2::isotropic([-1.0, 0.0], 1e-3).unwrap(),
            Gaussian2::isotropic([1.0, 0.0], 1e-3).unwrap(),
            Gaussian2::isotropic([0.0, 1.0], 1e-3).unwrap(),
        ];
        let disjoint = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert_eq!(parity_fidelity(&disjoint, &far, 10_000, 1), 1.0);
        let f = m.fidelity(200_000, 7);
        assert!((f - 0.89).abs() < 0.01, "{f}");
    }
}
