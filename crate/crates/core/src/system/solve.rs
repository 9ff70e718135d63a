//! Building and solving the preconditioned collocation system.

use std::time::Instant;

use nalgebra::Vector3;

use crate::adaptive::{
    distinct_templates, plan_discretization, realize_discretization, DiscretizationPlan,
    SolverParams,
};
use crate::boundary::{boundary_data, Scene, SphereState};
use crate::error::{Error, Result};
use crate::geometry::NodeSet;
use crate::kernels::SourceSet;
use crate::system::gmres::{gmres_many, GmresOutcome};
use crate::system::operator::{BlockOperator, FactorCache};

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Per-particle sources with the computed strengths.
    pub sources: Vec<SourceSet>,
    /// Converged weighted surface unknowns.
    pub surface_coeffs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// Seconds spent on discretization and factorization (shared by all
    /// right-hand sides of one system).
    pub setup_time: f64,
    pub gmres_time: f64,
    pub wall_time: f64,
    pub n_unknowns: usize,
    pub n_equations: usize,
    /// Largest strength component.
    pub max_strength: f64,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// A discretized scene with its one-body factorizations.
pub struct System {
    pub scene: Scene,
    pub params: SolverParams,
    pub plan: DiscretizationPlan,
    pub operator: BlockOperator,
    pub setup_time: f64,
}

impl System {
    pub fn build(scene: &Scene, params: &SolverParams) -> Result<Self> {
        Self::build_with_cache(scene, params, None)
    }

    pub fn build_with_cache(
        scene: &Scene,
        params: &SolverParams,
        cache: Option<&FactorCache>,
    ) -> Result<Self> {
        let t0 = Instant::now();
        params.validate()?;
        let plan = plan_discretization(scene, params)?;
        let discs = realize_discretization(&plan, scene, params)?;
        let operator = BlockOperator::new(discs, scene.viscosity, params, cache)?;
        Ok(System {
            scene: scene.clone(),
            params: params.clone(),
            plan,
            operator,
            setup_time: t0.elapsed().as_secs_f64(),
        })
    }

    pub fn collocation(&self) -> Vec<NodeSet> {
        self.operator
            .discretizations()
            .iter()
            .map(|d| d.colloc.clone())
            .collect()
    }

    pub fn n_equations(&self) -> usize {
        self.operator.dim_equations()
    }

    pub fn n_unknowns(&self) -> usize {
        self.operator.n_unknowns()
    }

    pub fn distinct_templates(&self) -> usize {
        distinct_templates(self.operator.discretizations())
    }

    /// No-slip data for the scene's own motions and background flow.
    pub fn scene_data(&self) -> Vec<Vector3<f64>> {
        boundary_data(&self.scene, &self.collocation())
    }

    /// No-slip data for other rigid motions of the same configuration.
    pub fn motion_data(&self, motions: &[SphereState]) -> Result<Vec<Vector3<f64>>> {
        if motions.len() != self.scene.len() {
            return Err(Error::InvalidArgument(format!(
                "{} motions for {} spheres",
                motions.len(),
                self.scene.len()
            )));
        }
        let mut scene = self.scene.clone();
        for (s, m) in scene.spheres.iter_mut().zip(motions) {
            s.velocity = m.velocity;
            s.angular_velocity = m.angular_velocity;
        }
        Ok(boundary_data(&scene, &self.collocation()))
    }

    fn weighted_rhs(&self, data: &[Vector3<f64>]) -> Result<Vec<f64>> {
        let n = self.operator.dim_equations();
        if 3 * data.len() != n {
            return Err(Error::InvalidArgument(format!(
                "boundary data has {} points, system has {}",
                data.len(),
                n / 3
            )));
        }
        let mut b = Vec::with_capacity(n);
        for k in 0..self.scene.len() {
            let range = self.operator.row_range(k);
            let sw = self.operator.sqrt_weights(k);
            for (i, u) in data[range.start / 3..range.end / 3].iter().enumerate() {
                b.extend(u.iter().map(|v| v * sw[i]));
            }
        }
        Ok(b)
    }

    pub fn solve(&self) -> Result<SolveResult> {
        self.solve_data(&self.scene_data())
    }

    pub fn solve_data(&self, data: &[Vector3<f64>]) -> Result<SolveResult> {
        Ok(self.solve_many(&[data.to_vec()])?.pop().expect("one result"))
    }

    /// Solves for several boundary data sets at once; GMRES advances them
    /// in lockstep so every operator pass serves all of them.
    pub fn solve_many(&self, data: &[Vec<Vector3<f64>>]) -> Result<Vec<SolveResult>> {
        let t0 = Instant::now();
        let rhs: Vec<Vec<f64>> = data.iter().map(|d| self.weighted_rhs(d)).collect::<Result<_>>()?;
        let refs: Vec<&[f64]> = rhs.iter().map(|b| b.as_slice()).collect();
        let outcomes = gmres_many(
            &self.operator,
            &refs,
            self.params.gmres_tol,
            self.params.gmres_maxiter,
        )?;
        let gmres_time = t0.elapsed().as_secs_f64();
        let xs: Vec<&[f64]> = outcomes.iter().map(|o| o.solution.as_slice()).collect();
        let lambdas = self.operator.strengths_many(&xs);
        Ok(outcomes
            .iter()
            .zip(lambdas)
            .map(|(o, lam)| self.result(o, lam, gmres_time))
            .collect())
    }

    fn result(&self, o: &GmresOutcome, lambdas: Vec<Vec<f64>>, gmres_time: f64) -> SolveResult {
        let mut max_strength = 0.0f64;
        let sources = self
            .operator
            .discretizations()
            .iter()
            .zip(&lambdas)
            .map(|(d, l)| {
                max_strength = l.iter().fold(max_strength, |m, v| m.max(v.abs()));
                let mut s = d.sources.clone();
                s.set_strengths(l);
                s
            })
            .collect();
        SolveResult {
            sources,
            surface_coeffs: o.solution.clone(),
            iterations: o.iterations,
            converged: o.converged,
            residual_history: o.history.clone(),
            setup_time: self.setup_time,
            gmres_time,
            wall_time: self.setup_time + gmres_time,
            n_unknowns: self.n_unknowns(),
            n_equations: self.n_equations(),
            max_strength,
        }
    }
}

/// Discretizes and solves `scene` in one call.
pub fn solve(scene: &Scene, params: &SolverParams) -> Result<SolveResult> {
    System::build(scene, params)?.solve()
}
