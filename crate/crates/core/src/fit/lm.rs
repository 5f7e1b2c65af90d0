use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

type ResidualFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;

/// A box-constrained least-squares problem: minimise `sum (w_i r_i(p))^2`.
pub struct FitProblem<'a> {
    pub residual: Box<ResidualFn<'a>>,
    pub initial: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Optional per-residual multipliers.
    pub weights: Option<Vec<f64>>,
}

impl<'a> FitProblem<'a> {
    /// Unbounded problem.
    pub fn new(
        residual: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a,
        initial: Vec<f64>,
    ) -> Self {
        let n = initial.len();
        Self {
            residual: Box::new(residual),
            initial,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            weights: None,
        }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut r = (self.residual)(p)?;
        if let Some(w) = &self.weights {
            if w.len() != r.len() {
                return Err(Error::Fit(format!(
                    "{} weights for {} residuals",
                    w.len(),
                    r.len()
                )));
            }
            for (ri, wi) in r.iter_mut().zip(w) {
                *ri *= wi;
            }
        }
        Ok(r)
    }

    fn project(&self, p: &mut [f64]) {
        for ((v, lo), hi) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the largest gradient component falls below this.
    pub gtol: f64,
    /// Stop when the relative step length falls below this.
    pub xtol: f64,
    /// Stop when an accepted step reduces the cost by less than this fraction.
    pub ftol: f64,
    /// Starting damping; zero gives plain Gauss-Newton until a step fails.
    pub initial_lambda: f64,
    /// Evaluate Jacobian columns concurrently.
    pub parallel_jacobian: bool,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gtol: 1e-12,
            xtol: 1e-12,
            ftol: 1e-15,
            initial_lambda: 1e-3,
            parallel_jacobian: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ZeroResidual,
    Gradient,
    Step,
    Cost,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: Vec<f64>,
    /// Euclidean norm of the weighted residual vector.
    pub residual_norm: f64,
    pub residuals: Vec<f64>,
    /// `(J^T J)^-1` scaled by the residual variance; absent when singular.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
}

impl FitReport {
    /// Standard errors from the covariance diagonal.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| (0..c.len()).map(|i| c[i][i].max(0.0).sqrt()).collect())
    }

    /// Correlation coefficient between parameters `i` and `j`.
    pub fn correlation(&self, i: usize, j: usize) -> Option<f64> {
        let c = self.covariance.as_ref()?;
        let d = (c[i][i] * c[j][j]).sqrt();
        (d > 0.0).then(|| c[i][j] / d)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn jacobian(problem: &FitProblem, p: &[f64], m: usize, parallel: bool) -> Result<DMatrix<f64>> {
    let column = |j: usize| -> Result<Vec<f64>> {
        let h = (1e-6 * p[j].abs()).max(1e-9);
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[j] = (p[j] + h).min(problem.upper[j]);
        lo[j] = (p[j] - h).max(problem.lower[j]);
        let span = hi[j] - lo[j];
        if span == 0.0 {
            return Ok(vec![0.0; m]);
        }
        let rh = problem.evaluate(&hi)?;
        let rl = problem.evaluate(&lo)?;
        if !all_finite(&rh) || !all_finite(&rl) {
            return Err(Error::Fit(
                "non-finite residual while differencing the Jacobian".into(),
            ));
        }
        Ok(rh.iter().zip(&rl).map(|(a, b)| (a - b) / span).collect())
    };
    let cols: Vec<Vec<f64>> = if parallel {
        (0..p.len())
            .into_par_iter()
            .map(column)
            .collect::<Result<_>>()?
    } else {
        (0..p.len()).map(column).collect::<Result<_>>()?
    };
    Ok(DMatrix::from_fn(m, p.len(), |i, j| cols[j][i]))
}

fn covariance(jac: &DMatrix<f64>, cost2: f64) -> Option<Vec<Vec<f64>>> {
    let (m, n) = jac.shape();
    let jtj = jac.transpose() * jac;
    let inv = jtj.clone().cholesky()?.inverse();
    if !inv.iter().all(|v| v.is_finite()) {
        return None;
    }
    let scale = if m > n { cost2 / (m - n) as f64 } else { 1.0 };
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| inv[(i, j)] * scale).collect())
            .collect(),
    )
}

/// Levenberg-Marquardt with a central-difference Jacobian and projection onto
/// the parameter box. Deterministic for fixed inputs.
pub fn least_squares(problem: &FitProblem, options: &LmOptions) -> Result<FitReport> {
    let n = problem.initial.len();
    if problem.lower.len() != n || problem.upper.len() != n {
        return Err(Error::Fit("bounds do not match the parameter count".into()));
    }
    if problem.lower.iter().zip(&problem.upper).any(|(l, u)| l > u) {
        return Err(Error::Fit("lower bound above upper bound".into()));
    }
    let mut x = problem.initial.clone();
    problem.project(&mut x);
    let mut r = problem.evaluate(&x)?;
    let mut evaluations = 1;
    if !all_finite(&r) {
        return Err(Error::Fit(
            "non-finite residual at the initial guess".into(),
        ));
    }
    let m = r.len();
    if m < n {
        return Err(Error::RankDeficient(format!(
            "{m} residuals for {n} parameters"
        )));
    }
    let mut cost = norm2(&r);
    let finish = |x: Vec<f64>,
                  r: Vec<f64>,
                  iterations,
                  evaluations,
                  termination,
                  converged|
     -> Result<FitReport> {
        let jac = jacobian(problem, &x, r.len(), options.parallel_jacobian)?;
        let c2 = norm2(&r);
        Ok(FitReport {
            covariance: covariance(&jac, c2),
            residual_norm: c2.sqrt(),
            params: x,
            residuals: r,
            iterations,
            evaluations,
            converged,
            termination,
        })
    };
    if cost == 0.0 {
        return finish(x, r, 0, evaluations, Termination::ZeroResidual, true);
    }
    let mut lambda = options.initial_lambda;
    for iter in 1..=options.max_iter {
        let jac = jacobian(problem, &x, m, options.parallel_jacobian)?;
        evaluations += 2 * n;
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * &rv;
        if g.amax() < options.gtol {
            return finish(x, r, iter - 1, evaluations, Termination::Gradient, true);
        }
        let jtj = jac.transpose() * &jac;
        let scale: Vec<f64> = (0..n)
            .map(|i| if jtj[(i, i)] > 0.0 { jtj[(i, i)] } else { 1.0 })
            .collect();
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * scale[i];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda = if lambda == 0.0 { 1e-9 } else { lambda * 10.0 };
                    continue;
                }
            };
            let mut x_new: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut x_new);
            let dx = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let xn = norm2(&x).sqrt();
            let small_step = dx <= options.xtol * (xn + options.xtol);
            let trial = problem.evaluate(&x_new);
            evaluations += 1;
            match trial {
                Ok(r_new) if all_finite(&r_new) && norm2(&r_new) < cost => {
                    let cost_new = norm2(&r_new);
                    let reduction = cost - cost_new;
                    x = x_new;
                    r = r_new;
                    cost = cost_new;
                    lambda *= 0.1;
                    if lambda < 1e-12 {
                        lambda = 0.0;
                    }
                    accepted = true;
                    if cost == 0.0 {
                        return finish(x, r, iter, evaluations, Termination::ZeroResidual, true);
                    }
                    if small_step {
                        return finish(x, r, iter, evaluations, Termination::Step, true);
                    }
                    if reduction <= options.ftol * cost {
                        return finish(x, r, iter, evaluations, Termination::Cost, true);
                    }
                    break;
                }
                _ => {
                    if small_step {
                        return finish(x, r, iter, evaluations, Termination::Step, true);
                    }
                    lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
                }
            }
        }
        if !accepted {
            return finish(x, r, iter, evaluations, Termination::Step, true);
        }
    }
    finish(
        x,
        r,
        options.max_iter,
        evaluations,
        Termination::MaxIterations,
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_problem_in_one_step() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 3.1, 4.9, 7.2, 8.8];
        let problem = FitProblem::new(
            |p: &[f64]| {
                Ok(xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| p[0] + p[1] * x - y)
                    .collect())
            },
            vec![1.0, 1.0],
        );
        let opts = LmOptions {
            initial_lambda: 0.0,
            max_iter: 1,
            ..Default::default()
        };
        let rep = least_squares(&problem, &opts).unwrap();
        // normal equations by hand
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let icpt = (sy - slope * sx) / n;
        // a single step lands on the solution up to differencing error
        assert!((rep.params[0] - icpt).abs() < 1e-7 && (rep.params[1] - slope).abs() < 1e-7);
        assert_eq!(rep.iterations, 1);
        assert!(rep.covariance.is_some());
    }

    #[test]
    fn rosenbrock() {
        let problem = FitProblem::new(
            |p: &[f64]| Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]),
            vec![-1.2, 1.0],
        );
        let rep = least_squares(&problem, &LmOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(
            (rep.params[0] - 1.0).abs() < 1e-8 && (rep.params[1] - 1.0).abs() < 1e-8,
            "{:?}",
            rep.params
        );
    }

    #[test]
    fn zero_residual_start() {
        let problem = FitProblem::new(|p: &[f64]| Ok(vec![p[0] - 2.0, p[0] - 2.0]), vec![2.0]);
        let rep = least_squares(&problem, &LmOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.termination, Termination::ZeroResidual);
    }

    #[test]
    fn bounds_are_respected() {
        let problem = FitProblem::new(
            |p: &[f64]| Ok(vec![p[0] - 5.0, 0.1 * (p[0] - 5.0)]),
            vec![0.0],
        )
        .with_bounds(vec![-1.0], vec![3.0]);
        let rep = least_squares(&problem, &LmOptions::default()).unwrap();
        assert!((rep.params[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_start_and_underdetermined() {
        let nan = FitProblem::new(|_: &[f64]| Ok(vec![f64::NAN, 1.0]), vec![0.0]);
        assert!(least_squares(&nan, &LmOptions::default()).is_err());
        let under = FitProblem::new(|p: &[f64]| Ok(vec![p[0] + p[1]]), vec![0.0, 0.0]);
        assert!(matches!(
            least_squares(&under, &LmOptions::default()),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn exponential_decay() {
        let problem = FitProblem::new(
            |p: &[f64]| {
                let r: Vec<f64> = (0..8)
                    .map(|i| {
                        let t = i as f64 * 0.4;
                        p[0] * (-p[1] * t).exp() - 2.0 * (-0.7 * t).exp()
                    })
                    .collect();
                Ok(r)
            },
            vec![0.5, 3.0],
        );
        let rep = least_squares(&problem, &LmOptions::default()).unwrap();
        assert!(rep.residual_norm < 1e-10);
        assert!((rep.params[1] - 0.7).abs() < 1e-8);
    }
}
