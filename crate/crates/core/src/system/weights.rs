//! Collocation quadrature weights: the surface area each node represents.
//!
//! Rows of the collocation system are scaled by the square roots of these
//! weights, so that the discrete least-squares norm approximates the L2
//! norm on the sphere even where caps cluster extra nodes.

use std::f64::consts::PI;

use crate::adaptive::{NodeGroup, ParticleDiscretization, SolverParams};

/// Weights for nodes tagged with `groups`: the base grid shares the full
/// sphere, each cap shares its own solid angle.
pub fn weights_for_groups(groups: &[NodeGroup], params: &SolverParams) -> Vec<f64> {
    let count = |g: NodeGroup| groups.iter().filter(|&&h| h == g).count() as f64;
    let mut cache: Vec<(NodeGroup, f64)> = Vec::new();
    groups
        .iter()
        .map(|&g| {
            if let Some(&(_, w)) = cache.iter().find(|(h, _)| *h == g) {
                return w;
            }
            let area = match g {
                NodeGroup::Base => 4.0 * PI,
                NodeGroup::Cap1(_) => params.cap_policy.solid_angle(params.beta1),
                NodeGroup::Cap2(_) => params.cap_policy.solid_angle(params.beta2),
            };
            let w = area / count(g);
            cache.push((g, w));
            w
        })
        .collect()
}

pub fn collocation_weights(disc: &ParticleDiscretization, params: &SolverParams) -> Vec<f64> {
    weights_for_groups(&disc.template.groups, params)
}

pub fn sqrt_weights(weights: &[f64]) -> Vec<f64> {
    weights.iter().map(|w| w.sqrt()).collect()
}
