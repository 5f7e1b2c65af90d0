use super::emission::{classify_point, parity_fidelity, Gaussian2};
use super::{Parity, ShotTrace};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest trace accepted by the fit.
pub const MIN_SHOTS: usize = 1000;

/// Hidden-Markov model over parity with state-mixture emissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmModel {
    /// `transition[p][q]`: probability of going from parity p to q in one shot.
    pub transition: [[f64; 2]; 2],
    /// Mixture weights over the three clusters, indexed by parity.
    pub weights: [[f64; 3]; 2],
    pub initial: [f64; 2],
    pub states: [Gaussian2; 3],
}

impl HmmModel {
    fn swapped(&self) -> Self {
        Self {
            transition: [
                [self.transition[1][1], self.transition[1][0]],
                [self.transition[0][1], self.transition[0][0]],
            ],
            weights: [self.weights[1], self.weights[0]],
            initial: [self.initial[1], self.initial[0]],
            states: self.states,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the log-likelihood gain per shot.
    pub tol: f64,
    /// Re-estimate cluster means and covariances as well (off by default:
    /// the calibration clusters are held fixed).
    pub refit_gaussians: bool,
    /// Starting point; derived from a smoothed classification when absent.
    pub initial: Option<HmmModel>,
    pub fidelity_samples: usize,
    pub fidelity_seed: u64,
}

impl Default for HmmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-9,
            refit_gaussians: false,
            initial: None,
            fidelity_samples: 1_000_000,
            fidelity_seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HmmResult {
    pub tau_p_even: f64,
    pub tau_p_odd: f64,
    pub fidelity: f64,
    pub model: HmmModel,
    /// Fraction of shots whose posterior favours even parity.
    pub occupancy_even: f64,
    pub iterations: usize,
    pub log_likelihood: Vec<f64>,
    #[serde(skip)]
    pub posterior_path: Vec<Parity>,
}

/// Per-shot cluster likelihoods, scaled so the largest is 1, plus the
/// dropped log offsets.
struct Emissions {
    lik: Vec<[f64; 3]>,
    offset: f64,
}

impl Emissions {
    fn new(iq: &[[f64; 2]], states: &[Gaussian2; 3]) -> Self {
        let mut offset = 0.0;
        let lik = iq
            .iter()
            .map(|p| {
                let l = [
                    states[0].log_pdf(*p),
                    states[1].log_pdf(*p),
                    states[2].log_pdf(*p),
                ];
                let m = l[0].max(l[1]).max(l[2]);
                offset += m;
                [(l[0] - m).exp(), (l[1] - m).exp(), (l[2] - m).exp()]
            })
            .collect();
        Self { lik, offset }
    }

    fn parity_lik(&self, t: usize, w: &[[f64; 3]; 2]) -> [f64; 2] {
        let l = &self.lik[t];
        [
            w[0][0] * l[0] + w[0][1] * l[1] + w[0][2] * l[2],
            w[1][0] * l[0] + w[1][1] * l[1] + w[1][2] * l[2],
        ]
    }
}

fn initial_model(trace: &ShotTrace) -> Result<HmmModel> {
    let classes: Vec<u8> = trace
        .iq
        .iter()
        .map(|p| classify_point(&trace.calibration, *p))
        .collect();
    // majority vote over a short window, |0> counting as even
    const HALF: usize = 3;
    let n = classes.len();
    let odd_prefix: Vec<usize> = std::iter::once(0)
        .chain(classes.iter().scan(0, |acc, &c| {
            *acc += (c != 0) as usize;
            Some(*acc)
        }))
        .collect();
    let parity: Vec<usize> = (0..n)
        .map(|t| {
            let lo = t.saturating_sub(HALF);
            let hi = (t + HALF + 1).min(n);
            let odd = odd_prefix[hi] - odd_prefix[lo];
            (2 * odd > hi - lo) as usize
        })
        .collect();
    let mut counts = [[1.0f64; 2]; 2];
    for w in parity.windows(2) {
        counts[w[0]][w[1]] += 1.0;
    }
    let mut hist = [[1.0f64; 3]; 2];
    for (p, c) in parity.iter().zip(&classes) {
        hist[*p][*c as usize] += 1.0;
    }
    if parity.iter().all(|&p| p == parity[0]) {
        return Err(Error::Degenerate(
            "classified trace shows a single parity".into(),
        ));
    }
    let mut transition = [[0.0; 2]; 2];
    let mut weights = [[0.0; 3]; 2];
    for p in 0..2 {
        let row: f64 = counts[p].iter().sum();
        let h: f64 = hist[p].iter().sum();
        for q in 0..2 {
            transition[p][q] = counts[p][q] / row;
        }
        for k in 0..3 {
            // keep every weight off zero so EM can move it
            weights[p][k] = 0.98 * hist[p][k] / h + 0.02 / 3.0;
        }
    }
    Ok(HmmModel {
        transition,
        weights,
        initial: [0.5, 0.5],
        states: trace.calibration,
    })
}

struct Pass {
    log_likelihood: f64,
    gamma: Vec<[f64; 2]>,
    xi: [[f64; 2]; 2],
    /// Responsibility of each cluster, summed over parities, per shot
    /// (filled only when requested).
    cluster_resp: Option<Vec<[f64; 3]>>,
    weight_num: [[f64; 3]; 2],
}

fn forward_backward(em: &Emissions, model: &HmmModel, want_clusters: bool) -> Pass {
    let n = em.lik.len();
    let a = &model.transition;
    let w = &model.weights;
    let mut alpha = vec![[0.0f64; 2]; n];
    let mut scale = vec![0.0f64; n];
    let mut b = vec![[0.0f64; 2]; n];
    for t in 0..n {
        b[t] = em.parity_lik(t, w);
        let mut next = if t == 0 {
            [model.initial[0] * b[0][0], model.initial[1] * b[0][1]]
        } else {
            let prev = alpha[t - 1];
            [
                (prev[0] * a[0][0] + prev[1] * a[1][0]) * b[t][0],
                (prev[0] * a[0][1] + prev[1] * a[1][1]) * b[t][1],
            ]
        };
        let c = next[0] + next[1];
        next[0] /= c;
        next[1] /= c;
        alpha[t] = next;
        scale[t] = c;
    }
    let log_likelihood = scale.iter().map(|c| c.ln()).sum::<f64>() + em.offset;
    let mut beta = [1.0f64, 1.0];
    let mut gamma = vec![[0.0f64; 2]; n];
    let mut xi = [[0.0f64; 2]; 2];
    let mut weight_num = [[0.0f64; 3]; 2];
    let mut cluster_resp = want_clusters.then(|| vec![[0.0f64; 3]; n]);
    for t in (0..n).rev() {
        let g = [alpha[t][0] * beta[0], alpha[t][1] * beta[1]];
        let gs = g[0] + g[1];
        let g = [g[0] / gs, g[1] / gs];
        gamma[t] = g;
        let l = &em.lik[t];
        for p in 0..2 {
            if b[t][p] > 0.0 {
                for k in 0..3 {
                    let r = g[p] * w[p][k] * l[k] / b[t][p];
                    weight_num[p][k] += r;
                    if let Some(cr) = cluster_resp.as_mut() {
                        cr[t][k] += r;
                    }
                }
            }
        }
        if t > 0 {
            let c = scale[t];
            let bb = [b[t][0] * beta[0] / c, b[t][1] * beta[1] / c];
            for p in 0..2 {
                for q in 0..2 {
                    xi[p][q] += alpha[t - 1][p] * a[p][q] * bb[q];
                }
            }
            beta = [
                a[0][0] * bb[0] + a[0][1] * bb[1],
                a[1][0] * bb[0] + a[1][1] * bb[1],
            ];
        }
    }
    Pass {
        log_likelihood,
        gamma,
        xi,
        cluster_resp,
        weight_num,
    }
}

fn m_step(pass: &Pass, model: &HmmModel) -> HmmModel {
    let mut next = *model;
    for p in 0..2 {
        let row = pass.xi[p][0] + pass.xi[p][1];
        if row > 0.0 {
            for q in 0..2 {
                next.transition[p][q] = pass.xi[p][q] / row;
            }
        }
        let tot: f64 = pass.weight_num[p].iter().sum();
        if tot > 0.0 {
            for k in 0..3 {
                next.weights[p][k] = pass.weight_num[p][k] / tot;
            }
        }
    }
    next.initial = pass.gamma[0];
    next
}

/// Expectation-maximisation fit of the parity HMM. Cluster shapes come from
/// the trace calibration and stay fixed unless `refit_gaussians` is set.
pub fn hmm_fit(trace: &ShotTrace, options: &HmmOptions) -> Result<HmmResult> {
    trace.validate()?;
    if trace.len() < MIN_SHOTS {
        return Err(Error::domain(
            "trace",
            format!("{} shots, need at least {MIN_SHOTS}", trace.len()),
        ));
    }
    let mut model = match options.initial {
        Some(m) => m,
        None => initial_model(trace)?,
    };
    let mut em = Emissions::new(&trace.iq, &model.states);
    let mut history = Vec::new();
    let n = trace.len() as f64;
    let mut converged = false;
    let mut pass = forward_backward(&em, &model, options.refit_gaussians);
    for _ in 0..options.max_iter {
        history.push(pass.log_likelihood);
        let len = history.len();
        if len >= 2 {
            let gain = history[len - 1] - history[len - 2];
            debug_assert!(
                gain >= -1e-9 * history[len - 1].abs(),
                "log-likelihood decreased by {gain}"
            );
            if gain.abs() / n < options.tol {
                converged = true;
                break;
            }
        }
        model = m_step(&pass, &model);
        if let Some(resp) = pass.cluster_resp.as_ref() {
            for k in 0..3 {
                if let Some(g) = Gaussian2::from_weighted(&trace.iq, resp.iter().map(|r| r[k])) {
                    model.states[k] = g;
                }
            }
            em = Emissions::new(&trace.iq, &model.states);
        }
        pass = forward_backward(&em, &model, options.refit_gaussians);
    }
    let mut gamma = pass.gamma;
    if model.weights[1][0] > model.weights[0][0] {
        model = model.swapped();
        for g in gamma.iter_mut() {
            g.swap(0, 1);
        }
    }
    let occupancy_even = gamma.iter().map(|g| g[0]).sum::<f64>() / n;
    let t_rep = trace.t_rep;
    let p_eo = model.transition[0][1];
    let p_oe = model.transition[1][0];
    // single-parity data can drift for ever, so judge degeneracy first
    if let Some(why) = degeneracy(occupancy_even, p_eo, p_oe) {
        return Err(Error::Degenerate(why));
    }
    if !converged {
        return Err(Error::EmNotConverged {
            iterations: options.max_iter,
            log_likelihood: history,
        });
    }
    let posterior_path: Vec<Parity> = gamma
        .iter()
        .map(|g| {
            if g[0] >= g[1] {
                Parity::Even
            } else {
                Parity::Odd
            }
        })
        .collect();
    let (tau_e, tau_o) = (t_rep / p_eo, t_rep / p_oe);
    let fidelity = parity_fidelity(
        &model.weights,
        &model.states,
        options.fidelity_samples,
        options.fidelity_seed,
    );
    Ok(HmmResult {
        tau_p_even: tau_e,
        tau_p_odd: tau_o,
        fidelity,
        model,
        occupancy_even,
        iterations: history.len(),
        log_likelihood: history,
        posterior_path,
    })
}

fn degeneracy(occupancy_even: f64, p_eo: f64, p_oe: f64) -> Option<String> {
    let minority = occupancy_even.min(1.0 - occupancy_even);
    if minority < 0.01 {
        return Some(format!(
            "one parity holds only {:.2}% of the trace",
            100.0 * minority
        ));
    }
    if !(p_eo > 0.0 && p_oe > 0.0) {
        return Some("no switching between parities".into());
    }
    if p_eo.max(p_oe) > 0.5 {
        return Some(format!(
            "a parity dwells for {:.2} repetitions on average",
            1.0 / p_eo.max(p_oe)
        ));
    }
    None
}

/// Most probable parity sequence under `model`.
#[allow(clippy::needless_range_loop)]
pub fn viterbi_path(trace: &ShotTrace, model: &HmmModel) -> Vec<Parity> {
    let n = trace.iq.len();
    if n == 0 {
        return Vec::new();
    }
    let em = Emissions::new(&trace.iq, &model.states);
    let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let la = [
        [ln(model.transition[0][0]), ln(model.transition[0][1])],
        [ln(model.transition[1][0]), ln(model.transition[1][1])],
    ];
    let mut back = vec![[0u8; 2]; n];
    let b0 = em.parity_lik(0, &model.weights);
    let mut delta = [
        ln(model.initial[0]) + ln(b0[0]),
        ln(model.initial[1]) + ln(b0[1]),
    ];
    for t in 1..n {
        let b = em.parity_lik(t, &model.weights);
        let mut next = [0.0; 2];
        for q in 0..2 {
            let stay = delta[q] + la[q][q];
            let cross = delta[1 - q] + la[1 - q][q];
            // ties keep the current parity
            let (v, from) = if cross > stay {
                (cross, 1 - q)
            } else {
                (stay, q)
            };
            next[q] = v + ln(b[q]);
            back[t][q] = from as u8;
        }
        delta = next;
    }
    let mut state = if delta[1] > delta[0] { 1 } else { 0 };
    let mut path = vec![Parity::Even; n];
    for t in (0..n).rev() {
        path[t] = Parity::from_index(state);
        state = back[t][state] as usize;
    }
    path
}

#[cfg(test)]
mod tests {
    use super::super::{simulate, switch_count, EmissionModel, TelegraphParams};
    use super::*;

    fn quick() -> HmmOptions {
        HmmOptions {
            fidelity_samples: 50_000,
            ..Default::default()
        }
    }

    #[test]
    fn recovers_rates_on_typical_emissions() {
        let p = TelegraphParams::from_dwell_times(1.2e-3, 1.0e-3, 80e-6, 1 << 16).unwrap();
        let sim = simulate(&p, &EmissionModel::typical(), 21).unwrap();
        let r = hmm_fit(&sim.trace, &quick()).unwrap();
        assert!(
            (r.tau_p_even / 1.2e-3 - 1.0).abs() < 0.1,
            "{}",
            r.tau_p_even
        );
        assert!((r.tau_p_odd / 1.0e-3 - 1.0).abs() < 0.1, "{}", r.tau_p_odd);
        assert!(r
            .log_likelihood
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
        assert!((r.fidelity - 0.89).abs() < 0.03, "{}", r.fidelity);
    }

    #[test]
    fn swapped_start_gives_same_answer() {
        let p = TelegraphParams::from_dwell_times(1.0e-3, 0.8e-3, 80e-6, 1 << 14).unwrap();
        let sim = simulate(&p, &EmissionModel::typical(), 4).unwrap();
        let init = initial_model(&sim.trace).unwrap();
        let a = hmm_fit(
            &sim.trace,
            &HmmOptions {
                initial: Some(init),
                ..quick()
            },
        )
        .unwrap();
        let b = hmm_fit(
            &sim.trace,
            &HmmOptions {
                initial: Some(init.swapped()),
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(a.tau_p_even, b.tau_p_even);
        assert_eq!(a.tau_p_odd, b.tau_p_odd);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn ideal_emissions_decode_exactly() {
        let states = [
            Gaussian2::isotropic([-1.0, 0.0], 0.05).unwrap(),
            Gaussian2::isotropic([1.0, 0.0], 0.05).unwrap(),
            Gaussian2::isotropic([0.0, 1.5], 0.05).unwrap(),
        ];
        let p = TelegraphParams::from_dwell_times(1e-3, 1e-3, 80e-6, 20_000).unwrap();
        let sim = simulate(&p, &EmissionModel::ideal(states), 8).unwrap();
        let r = hmm_fit(&sim.trace, &quick()).unwrap();
        let path = viterbi_path(&sim.trace, &r.model);
        assert_eq!(path, sim.parities);
        assert_eq!(r.posterior_path, sim.parities);
    }

    #[test]
    fn viterbi_close_to_posterior_and_counts_switches() {
        let p = TelegraphParams::from_dwell_times(1.2e-3, 1.2e-3, 80e-6, 1 << 16).unwrap();
        let sim = simulate(&p, &EmissionModel::typical(), 2).unwrap();
        let r = hmm_fit(&sim.trace, &quick()).unwrap();
        let path = viterbi_path(&sim.trace, &r.model);
        let n = path.len() as f64;
        let switches = switch_count(&path) as f64;
        let expect = n * 80e-6 / 1.2e-3;
        assert!(
            (switches - expect).abs() < 3.0 * expect.sqrt() + 0.05 * expect,
            "{switches} vs {expect}"
        );
        let differ = path
            .iter()
            .zip(&r.posterior_path)
            .filter(|(a, b)| a != b)
            .count();
        assert!((differ as f64) < 0.05 * n, "{differ}");
    }

    #[test]
    fn constant_parity_is_rejected() {
        let p = TelegraphParams {
            gamma_eo: 0.0,
            gamma_oe: 0.0,
            t_rep: 80e-6,
            n_shots: 1 << 15,
        };
        let sim = simulate(&p, &EmissionModel::typical(), 1).unwrap();
        let r = hmm_fit(&sim.trace, &quick());
        assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
        let path = viterbi_path(
            &sim.trace,
            &HmmModel {
                transition: [[0.999, 0.001], [0.001, 0.999]],
                weights: [
                    EmissionModel::typical().even_weights,
                    EmissionModel::typical().odd_weights,
                ],
                initial: [0.5, 0.5],
                states: EmissionModel::typical().states,
            },
        );
        assert!(path.iter().all(|&x| x == path[0]));
    }

    #[test]
    fn non_convergence_carries_history() {
        let p = TelegraphParams::from_dwell_times(1e-3, 1e-3, 80e-6, 4000).unwrap();
        let sim = simulate(&p, &EmissionModel::typical(), 1).unwrap();
        match hmm_fit(
            &sim.trace,
            &HmmOptions {
                max_iter: 2,
                tol: 0.0,
                ..quick()
            },
        ) {
            Err(Error::EmNotConverged { log_likelihood, .. }) => {
                assert_eq!(log_likelihood.len(), 2)
            }
            other => panic!("{other:?}"),
        }
    }
}
