//! The one-body preconditioned collocation operator.
//!
//! Unknowns are weighted surface velocities `μ_k = √W_k B_k λ_k`, one block
//! per particle. With `λ̂_k = (√W_k B_k)^+ μ_k` the operator reads
//!
//! ```text
//! (Ĝ μ)_k = μ_k + Σ_{k' ≠ k} √W_k G(k, k') λ̂_{k'}
//! ```
//!
//! and is applied matrix-free: the cross terms are summed directly from the
//! packed sources of every other particle.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::adaptive::{ParticleDiscretization, SolverParams, Template};
use crate::error::Result;
use crate::kernels::PackedSources;
use crate::system::block::assemble_matrix;
use crate::system::gmres::LinearOperator;
use crate::system::linalg::ColMat;
use crate::system::pinv::{apply_pinv_many, one_body_factorization, PinvFactors};
use crate::system::weights::sqrt_weights;

/// Factorizations keyed by template signature and truncation level, for
/// reuse across solves.
#[derive(Default)]
pub struct FactorCache {
    map: Mutex<HashMap<String, Arc<PinvFactors>>>,
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.lock().expect("cache lock").clear();
    }

    fn get_or_build(
        &self,
        template: &Template,
        mu: f64,
        params: &SolverParams,
    ) -> Result<Arc<PinvFactors>> {
        let key = format!("{};eps={:e}", template.signature, params.eps_trunc);
        if let Some(f) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(factor_template(template, mu, params)?);
        self.map.lock().expect("cache lock").insert(key, f.clone());
        Ok(f)
    }
}

/// Factorizes the weighted self block of a template in its local frame.
pub fn factor_template(template: &Template, mu: f64, params: &SolverParams) -> Result<PinvFactors> {
    let sw = sqrt_weights(&template.weights);
    let b = assemble_matrix(&template.colloc, &template.sources, mu, Some(&sw))?;
    one_body_factorization(b, params.eps_trunc)
}

pub struct BlockOperator {
    mu: f64,
    discs: Vec<ParticleDiscretization>,
    factors: Vec<Arc<PinvFactors>>,
    sqrt_w: Vec<Vec<f64>>,
    row_offsets: Vec<usize>,
    dim: usize,
    // Particles sharing a template, in first-appearance order.
    groups: Vec<Vec<usize>>,
}

fn rotate_blocks(frame: &Matrix3<f64>, v: &mut [f64], transpose: bool) {
    for c in v.chunks_exact_mut(3) {
        let x = Vector3::new(c[0], c[1], c[2]);
        let y = if transpose { frame.tr_mul(&x) } else { frame * x };
        c.copy_from_slice(y.as_slice());
    }
}

impl BlockOperator {
    pub fn new(
        discs: Vec<ParticleDiscretization>,
        mu: f64,
        params: &SolverParams,
        cache: Option<&FactorCache>,
    ) -> Result<Self> {
        let mut by_sig: BTreeMap<&str, usize> = BTreeMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, d) in discs.iter().enumerate() {
            let g = *by_sig.entry(d.template.signature.as_str()).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(k);
        }
        let mut factors = vec![None; discs.len()];
        for g in &groups {
            let t = &discs[g[0]].template;
            let f = match cache {
                Some(c) => c.get_or_build(t, mu, params)?,
                None => Arc::new(factor_template(t, mu, params)?),
            };
            for &k in g {
                factors[k] = Some(f.clone());
            }
        }
        let mut row_offsets = Vec::with_capacity(discs.len() + 1);
        row_offsets.push(0);
        for d in &discs {
            row_offsets.push(row_offsets.last().unwrap() + 3 * d.n_colloc());
        }
        Ok(BlockOperator {
            mu,
            sqrt_w: discs.iter().map(|d| sqrt_weights(d.weights())).collect(),
            dim: *row_offsets.last().unwrap(),
            row_offsets,
            factors: factors.into_iter().map(|f| f.expect("every particle factored")).collect(),
            discs,
            groups,
        })
    }

    pub fn discretizations(&self) -> &[ParticleDiscretization] {
        &self.discs
    }

    pub fn factors(&self, particle: usize) -> &PinvFactors {
        &self.factors[particle]
    }

    /// One representative particle per distinct template.
    pub fn template_representatives(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g[0]).collect()
    }

    pub fn sqrt_weights(&self, particle: usize) -> &[f64] {
        &self.sqrt_w[particle]
    }

    pub fn row_range(&self, particle: usize) -> std::ops::Range<usize> {
        self.row_offsets[particle]..self.row_offsets[particle + 1]
    }

    /// Number of scalar collocation equations.
    pub fn dim_equations(&self) -> usize {
        self.dim
    }

    pub fn n_unknowns(&self) -> usize {
        self.discs.iter().map(|d| 3 * d.n_sources()).sum()
    }

    /// Global source strengths `λ̂_k` for each input vector, indexed
    /// `[rhs][particle]`.
    pub fn strengths_many(&self, xs: &[&[f64]]) -> Vec<Vec<Vec<f64>>> {
        let nrhs = xs.len();
        let mut out: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); self.discs.len()]; nrhs];
        let per_group: Vec<Vec<(usize, usize, Vec<f64>)>> = self
            .groups
            .par_iter()
            .map(|g| {
                let f = &self.factors[g[0]];
                let mut cols = Vec::with_capacity(g.len() * nrhs);
                for &k in g {
                    let range = self.row_range(k);
                    for x in xs {
                        let mut v = x[range.clone()].to_vec();
                        rotate_blocks(&self.discs[k].frame, &mut v, true);
                        cols.push(v);
                    }
                }
                let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
                let lam = apply_pinv_many(f, &ColMat::from_columns(f.rows, &refs));
                let mut res = Vec::with_capacity(refs.len());
                for (gi, &k) in g.iter().enumerate() {
                    for r in 0..nrhs {
                        let mut l = lam.col(gi * nrhs + r).to_vec();
                        rotate_blocks(&self.discs[k].frame, &mut l, false);
                        res.push((r, k, l));
                    }
                }
                res
            })
            .collect();
        for (r, k, l) in per_group.into_iter().flatten() {
            out[r][k] = l;
        }
        out
    }

    pub fn strengths(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.strengths_many(&[x]).pop().expect("one input")
    }

    /// Cross-particle velocities `Σ_{k'≠k} G(k, k') λ_{k'}` at every
    /// collocation point, unweighted, indexed `[rhs][row]`.
    pub fn cross_velocities(&self, lambdas: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
        let nrhs = lambdas.len();
        let packed: Vec<PackedSources> = self
            .discs
            .par_iter()
            .enumerate()
            .map(|(k, d)| {
                let s: Vec<&[f64]> = lambdas.iter().map(|l| l[k].as_slice()).collect();
                PackedSources::new_many(&d.sources.entries, &s)
            })
            .collect();
        let targets: Vec<(usize, usize)> = self
            .discs
            .iter()
            .enumerate()
            .flat_map(|(k, d)| (0..d.n_colloc()).map(move |i| (k, i)))
            .collect();
        let vel: Vec<Vec<Vector3<f64>>> = targets
            .par_iter()
            .map(|&(k, i)| {
                let x = &self.discs[k].colloc.points[i];
                let mut u = vec![Vector3::zeros(); nrhs];
                for (kp, p) in packed.iter().enumerate() {
                    if kp != k {
                        p.add_velocities(x, self.mu, &mut u);
                    }
                }
                u
            })
            .collect();
        (0..nrhs)
            .map(|r| vel.iter().flat_map(|u| u[r].iter().copied().collect::<Vec<_>>()).collect())
            .collect()
    }
}

impl LinearOperator for BlockOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_many(&[x]).pop().expect("one output")
    }

    fn apply_many(&self, xs: &[&[f64]]) -> Vec<Vec<f64>> {
        if self.discs.len() < 2 {
            return xs.iter().map(|x| x.to_vec()).collect();
        }
        let lambdas = self.strengths_many(xs);
        let cross = self.cross_velocities(&lambdas);
        xs.iter()
            .zip(cross)
            .map(|(x, mut u)| {
                for k in 0..self.discs.len() {
                    let range = self.row_range(k);
                    let sw = &self.sqrt_w[k];
                    for (i, c) in u[range.clone()].chunks_exact_mut(3).enumerate() {
                        for v in c {
                            *v *= sw[i];
                        }
                    }
                    for (ui, xi) in u[range.clone()].iter_mut().zip(&x[range]) {
                        *ui += xi;
                    }
                }
                u
            })
            .collect()
    }
}
