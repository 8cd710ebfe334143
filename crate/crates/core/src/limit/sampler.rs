//! Monte-Carlo sampler of the Poisson limit hypergraph: at a vertex with
//! value tau, hyperedges arrive as a Poisson count with mean
//! `(eta/tau) sum_{j=1}^{k-1} (log M)^j / j!`; an edge's non-root size is j
//! with probability proportional to `(log M)^j / j!` and each non-root
//! coordinate is drawn with density `1/(t log M)` on [1, M] (i.e. M^Uniform).
//! Recursion runs to depth m and every vertex is marked independently with
//! probability `1 - e^{-eta/tau}`. The eta factor scales edge and mark
//! intensities alike: both arise from class counts proportional to the
//! number of samples drawn.

#[cfg(test)]
use super::funcs::exp_k;
use super::LimitParams;
use crate::process::trial_rng;
use crate::witness::{chi, MarkedHypergraph};
use crate::{Error, KBound, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// A sampled limit hypergraph: vertices are indices into `values`.
#[derive(Debug, Clone)]
pub struct SampledHypergraph {
    pub graph: MarkedHypergraph<u32>,
    /// values[v] is the renormalized coordinate of vertex v; values[0] = rho.
    pub values: Vec<f64>,
}

/// Cumulative weights (log M)^j / j! for j = 1..k-1 (finite cutoff) used to
/// draw edge sizes; the total is the Poisson intensity at tau = 1.
struct EdgeSizeDist {
    cumulative: Vec<f64>,
    total: f64,
}

impl EdgeSizeDist {
    fn new(multiplier: f64, k: KBound) -> Self {
        let lm = multiplier.ln();
        // total = exp_k(log M) - 1; accumulate terms until the cutoff or
        // they stop contributing
        let mut cumulative = Vec::new();
        let mut term = 1.0;
        let mut total = 0.0;
        let cap = match k {
            KBound::Finite(k) => k.saturating_sub(1) as usize,
            KBound::Inf => 4096,
        };
        for j in 1..=cap {
            term *= lm / j as f64;
            total += term;
            cumulative.push(total);
            if matches!(k, KBound::Inf) && term < total * 1e-16 {
                break;
            }
        }
        EdgeSizeDist { cumulative, total }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen::<f64>() * self.total;
        match self.cumulative.iter().position(|&c| u < c) {
            Some(idx) => idx + 1,
            None => self.cumulative.len(),
        }
    }
}

/// Draw one limit hypergraph rooted at `rho` (finite M, finite m).
pub fn sample_h(params: &LimitParams, rng: &mut impl Rng) -> Result<SampledHypergraph> {
    params.validate()?;
    if params.multiplier.is_infinite() {
        return Err(Error::InvalidParam("sampler needs finite M".into()));
    }
    let sizes = EdgeSizeDist::new(params.multiplier, params.k);
    let mut values = vec![params.rho];
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut levels: BTreeMap<u32, u32> = BTreeMap::new();
    levels.insert(0, 0);
    let mut frontier: Vec<u32> = vec![0];
    for level in 1..=params.m {
        let mut next = Vec::new();
        for &v in &frontier {
            let lambda = params.eta * sizes.total / values[v as usize];
            let n_edges = if lambda > 0.0 {
                Poisson::new(lambda)
                    .map_err(|e| Error::Internal(format!("poisson: {e}")))?
                    .sample(rng) as usize
            } else {
                0
            };
            for _ in 0..n_edges {
                let j = sizes.sample(rng);
                let mut edge = vec![v];
                for _ in 0..j {
                    let value = params.multiplier.powf(rng.gen::<f64>());
                    let id = values.len() as u32;
                    values.push(value);
                    levels.insert(id, level);
                    next.push(id);
                    edge.push(id);
                }
                edges.push(edge);
            }
        }
        frontier = next;
    }
    // marks: independent per vertex with probability 1 - e^{-eta/tau}
    let marks: BTreeSet<u32> = values
        .iter()
        .enumerate()
        .filter(|(_, &tau)| rng.gen::<f64>() < -f64::exp_m1(-params.eta / tau))
        .map(|(i, _)| i as u32)
        .collect();
    Ok(SampledHypergraph {
        graph: MarkedHypergraph { root: 0, hyperedges: edges, marks, levels },
        values,
    })
}

/// Monte-Carlo estimate of theta: the fraction of `n` samples whose root
/// satisfies chi, with the binomial standard error. Samples are drawn on
/// independent seeded streams, so the estimate is reproducible and
/// thread-count independent.
pub fn estimate_theta_mc(params: &LimitParams, n: u64, seed: u64) -> Result<(f64, f64)> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParam("need at least one sample".into()));
    }
    let hits: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let sample = sample_h(params, &mut rng).expect("sampler failed");
            chi(&sample.graph, 0u32) as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Ok((p, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::funcs::theta;
    use crate::witness::is_tree_like;

    #[test]
    fn k_one_has_no_edges_and_marks_root() {
        let params = LimitParams {
            m: 3,
            multiplier: 10.0,
            k: KBound::Finite(1),
            eta: 0.5,
            rho: 2.0,
        };
        let n = 200_000u64;
        let mut hits = 0u64;
        for i in 0..n {
            let mut rng = trial_rng(9, i);
            let s = sample_h(&params, &mut rng).unwrap();
            assert!(s.graph.hyperedges.is_empty());
            hits += s.graph.marks.contains(&0) as u64;
        }
        let p = hits as f64 / n as f64;
        let expect = 1.0 - (-0.25f64).exp();
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((p - expect).abs() <= 3.0 * sigma, "p = {p}, expect {expect}");
    }

    #[test]
    fn root_edge_count_mean_matches_intensity() {
        // (M, k, rho) = (10, 3, 1) at eta = 1: mean edge count is the raw
        // intensity log 10 + (log 10)^2 / 2
        let params = LimitParams {
            m: 1,
            multiplier: 10.0,
            k: KBound::Finite(3),
            eta: 1.0,
            rho: 1.0,
        };
        let lm = 10.0f64.ln();
        let expect = lm + lm * lm / 2.0;
        let n = 100_000u64;
        let mut total = 0u64;
        let mut sq = 0.0f64;
        for i in 0..n {
            let mut rng = trial_rng(31, i);
            let s = sample_h(&params, &mut rng).unwrap();
            total += s.graph.hyperedges.len() as u64;
            sq += (s.graph.hyperedges.len() as f64 - expect).powi(2);
        }
        let mean = total as f64 / n as f64;
        let sigma = (sq / n as f64 / n as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 3.0 * sigma,
            "mean {mean}, expect {expect} +- {sigma}"
        );
        // cross-check the intensity against exp_k(log M) - 1
        let total_mass = exp_k(KBound::Finite(3), lm) - 1.0;
        assert!((total_mass - expect).abs() < 1e-12);
    }

    #[test]
    fn samples_are_tree_like() {
        let params = LimitParams {
            m: 3,
            multiplier: 10.0,
            k: KBound::Finite(4),
            eta: 0.5,
            rho: 1.0,
        };
        for i in 0..1000 {
            let mut rng = trial_rng(17, i);
            let s = sample_h(&params, &mut rng).unwrap();
            assert!(is_tree_like(&s.graph).is_some(), "sample {i} not tree-like");
        }
    }

    #[test]
    fn mc_matches_closed_form_for_m_zero() {
        for k in [KBound::Finite(2), KBound::Finite(4), KBound::Inf] {
            let params = LimitParams { m: 0, multiplier: 10.0, k, eta: 0.4, rho: 1.5 };
            let (p, se) = estimate_theta_mc(&params, 100_000, 23).unwrap();
            let expect = 1.0 - (-0.4f64 / 1.5).exp();
            assert!((p - expect).abs() <= 3.0 * se, "k {k:?}: {p} vs {expect}");
        }
    }

    #[test]
    fn mc_matches_analytic_theta_spot() {
        let params = LimitParams {
            m: 3,
            multiplier: 10.0,
            k: KBound::Finite(4),
            eta: 0.5,
            rho: 2.0,
        };
        let analytic = theta(&params).unwrap();
        let (p, se) = estimate_theta_mc(&params, 100_000, 7).unwrap();
        assert!(
            (p - analytic).abs() <= 3.0 * se.max(1e-4),
            "mc {p} vs analytic {analytic} (se {se})"
        );
    }

    #[test]
    fn mc_deterministic_for_seed() {
        let params = LimitParams {
            m: 2,
            multiplier: 10.0,
            k: KBound::Finite(3),
            eta: 0.5,
            rho: 1.0,
        };
        let a = estimate_theta_mc(&params, 20_000, 3).unwrap();
        let b = estimate_theta_mc(&params, 20_000, 3).unwrap();
        assert_eq!(a, b);
    }
}
