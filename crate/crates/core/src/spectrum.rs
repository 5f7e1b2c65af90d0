//! Charge-basis transmon Hamiltonian with higher Josephson harmonics and the
//! derived level structure: transition frequencies, parity splittings and
//! charge dispersion.

use crate::linalg::banded_hermitian_eigenvalues;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default charge-basis cutoff: states `-15..=15`.
pub const DEFAULT_N_CUT: usize = 15;

/// Largest number of levels returned by [`levels`].
pub const MAX_LEVELS: usize = 6;

/// Largest supported number of Josephson harmonics.
pub const MAX_HARMONICS: usize = 4;

/// Loop phase of the lower sweet spot of an asymmetric SQUID.
pub const LOWER_SWEET_SPOT: f64 = PI;

/// Electrical parameters of a SQUID transmon at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonParams {
    /// Charging energy, GHz.
    pub ec: f64,
    /// Harmonic amplitudes of junction a, `[E_1, E_2, ...]`, GHz.
    pub harmonics_a: Vec<f64>,
    /// Harmonic amplitudes of junction b, same length as `harmonics_a`.
    pub harmonics_b: Vec<f64>,
    /// Loop phase `2 pi Phi / Phi_0`, radians.
    pub flux: f64,
}

impl TransmonParams {
    pub fn new(ec: f64, harmonics_a: Vec<f64>, harmonics_b: Vec<f64>, flux: f64) -> Result<Self> {
        let p = Self {
            ec,
            harmonics_a,
            harmonics_b,
            flux,
        };
        p.validate()?;
        Ok(p)
    }

    /// A single cosine junction with Josephson energy `ej`.
    pub fn single_junction(ec: f64, ej: f64) -> Result<Self> {
        Self::new(ec, vec![ej], vec![0.0], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ec > 0.0 && self.ec.is_finite()) {
            return Err(Error::domain(
                "transmon",
                format!("charging energy {} must be > 0", self.ec),
            ));
        }
        let m = self.harmonics_a.len();
        if m == 0 || m > MAX_HARMONICS || m != self.harmonics_b.len() {
            return Err(Error::domain(
                "transmon",
                format!("need 1..={MAX_HARMONICS} harmonics per junction, equal lengths"),
            ));
        }
        if self
            .harmonics_a
            .iter()
            .chain(&self.harmonics_b)
            .any(|v| !v.is_finite())
        {
            return Err(Error::domain("transmon", "non-finite harmonic amplitude"));
        }
        if self.harmonics_a[0] < 0.0 || self.harmonics_b[0] < 0.0 {
            return Err(Error::domain(
                "transmon",
                "first-harmonic amplitudes must be >= 0",
            ));
        }
        if !self.flux.is_finite() {
            return Err(Error::domain("transmon", "flux must be finite"));
        }
        Ok(())
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics_a.len()
    }

    /// Magnitude of the first-harmonic coupling of the loop at its flux bias.
    pub fn effective_ej(&self) -> f64 {
        let phase = Complex64::from_polar(1.0, self.flux);
        (self.harmonics_a[0] + self.harmonics_b[0] * phase).norm()
    }
}

/// Banded Hermitian Hamiltonian in the charge basis `n = -n_cut..=n_cut`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeHamiltonian {
    n_cut: usize,
    diagonal: Vec<f64>,
    /// Coupling `<n|H|n+m>` for `m = 1..=M`, identical along each band.
    bands: Vec<Complex64>,
}

impl ChargeHamiltonian {
    pub fn dim(&self) -> usize {
        2 * self.n_cut + 1
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len()
    }

    /// Matrix element `<row|H|col>` with rows and columns indexed from zero.
    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        if row == col {
            return Complex64::new(self.diagonal[row], 0.0);
        }
        let (m, upper) = if col > row {
            (col - row, true)
        } else {
            (row - col, false)
        };
        match self.bands.get(m - 1) {
            Some(z) if upper => *z,
            Some(z) => z.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.element(i, j));
            }
        }
        out
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        banded_hermitian_eigenvalues(&self.to_dense(), self.dim(), self.bandwidth())
    }
}

/// Builds the Hamiltonian at offset charge `ng`.
pub fn hamiltonian(params: &TransmonParams, ng: f64, n_cut: usize) -> Result<ChargeHamiltonian> {
    params.validate()?;
    let m = params.harmonics();
    if n_cut < m + 4 {
        return Err(Error::domain(
            "hamiltonian",
            format!("n_cut {n_cut} must be at least {} for {m} harmonics", m + 4),
        ));
    }
    if !ng.is_finite() {
        return Err(Error::domain("hamiltonian", "offset charge must be finite"));
    }
    let nc = n_cut as f64;
    let diagonal = (0..2 * n_cut + 1)
        .map(|i| {
            let n = i as f64 - nc;
            4.0 * params.ec * (n - ng) * (n - ng)
        })
        .collect();
    let bands = (0..m)
        .map(|k| {
            let order = (k + 1) as f64;
            let phase = Complex64::from_polar(1.0, order * params.flux);
            -0.5 * (params.harmonics_a[k] + params.harmonics_b[k] * phase)
        })
        .collect();
    Ok(ChargeHamiltonian {
        n_cut,
        diagonal,
        bands,
    })
}

/// Lowest levels at one offset charge, measured from the ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub ng: f64,
    pub levels: Vec<f64>,
}

impl SpectrumPoint {
    /// Transition frequency `E_j - E_i`.
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.levels[j] - self.levels[i]
    }
}

fn check_level(level: usize, n_cut: usize) -> Result<()> {
    if level >= MAX_LEVELS {
        return Err(Error::domain(
            "levels",
            format!("at most {MAX_LEVELS} levels are available"),
        ));
    }
    if level + 3 > n_cut {
        return Err(Error::Truncation {
            level,
            n_cut,
            needed: level + 3,
        });
    }
    Ok(())
}

fn absolute_levels(
    params: &TransmonParams,
    ng: f64,
    n_cut: usize,
    count: usize,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("levels", "level count must be positive"));
    }
    check_level(count - 1, n_cut)?;
    let mut ev = hamiltonian(params, ng, n_cut)?.eigenvalues()?;
    ev.truncate(count);
    Ok(ev)
}

/// The lowest `count` levels relative to the ground state.
pub fn levels(
    params: &TransmonParams,
    ng: f64,
    n_cut: usize,
    count: usize,
) -> Result<SpectrumPoint> {
    let ev = absolute_levels(params, ng, n_cut, count)?;
    let e0 = ev[0];
    Ok(SpectrumPoint {
        ng,
        levels: ev.iter().map(|e| e - e0).collect(),
    })
}

/// Transition frequency `f_ij` at one offset charge.
pub fn transition(
    params: &TransmonParams,
    ng: f64,
    n_cut: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    Ok(levels(params, ng, n_cut, i.max(j) + 1)?.transition(i, j))
}

const GRID_POINTS: usize = 21;

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_max(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Maximum of `f` over `[0, 1/2]` by a coarse grid followed by golden-section
/// refinement around the best grid point. Endpoints are always evaluated.
/// With `mirrored`, `f(x) = f(1/2 - x)` is assumed and half the grid is reused.
fn maximise_over_half_period(mut f: impl FnMut(f64) -> Result<f64>, mirrored: bool) -> Result<f64> {
    let step = 0.5 / (GRID_POINTS - 1) as f64;
    let mut grid = [0.0; GRID_POINTS];
    for i in 0..GRID_POINTS {
        let j = GRID_POINTS - 1 - i;
        grid[i] = if mirrored && j < i {
            grid[j]
        } else {
            f(i as f64 * step)?
        };
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, v) in grid.iter().enumerate() {
        if *v > best.1 {
            best = (i, *v);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 * step;
    let hi = ((best.0 + 1).min(GRID_POINTS - 1)) as f64 * step;
    // the peak is quadratic, so this pins the value to ~1e-13
    let (_, refined) = golden_max(&mut f, lo, hi, 1e-7)?;
    Ok(refined.max(best.1))
}

/// Parity splitting of transition `i -> j`: the largest difference between
/// the frequency at `ng` and at `ng + 1/2`, i.e. between the two parity
/// branches.
pub fn parity_splitting(params: &TransmonParams, n_cut: usize, i: usize, j: usize) -> Result<f64> {
    check_level(i.max(j), n_cut)?;
    maximise_over_half_period(
        |ng| {
            let f_a = transition(params, ng, n_cut, i, j)?;
            let f_b = transition(params, ng + 0.5, n_cut, i, j)?;
            Ok((f_a - f_b).abs())
        },
        true,
    )
}

/// Peak-to-peak variation of the absolute energy of level `i` with offset
/// charge.
pub fn charge_dispersion(params: &TransmonParams, n_cut: usize, i: usize) -> Result<f64> {
    let energy = |ng: f64| -> Result<f64> { Ok(absolute_levels(params, ng, n_cut, i + 1)?[i]) };
    let max = maximise_over_half_period(energy, false)?;
    let min = -maximise_over_half_period(|ng| Ok(-energy(ng)?), false)?;
    Ok(max - min)
}
