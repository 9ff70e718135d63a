//! Singular spectrum of a one-body block and its exponential-decay fit.

use crate::adaptive::{plan_discretization, realize_discretization, SolverParams};
use crate::boundary::{BackgroundFlow, Scene, SphereState};
use crate::error::{Error, Result};
use crate::geometry::Point3;

use super::operator::factor_template;

/// Fit of `σ_j ≈ A R_p^{c √(j/3)}` over the resolved part of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFit {
    /// Decay constant `c` in the exponent.
    pub decay: f64,
    /// `ln A`.
    pub intercept: f64,
    /// Number of singular values used.
    pub used: usize,
    /// Ratio of the largest to the smallest singular value.
    pub condition: f64,
}

/// Relative floor below which singular values are treated as roundoff.
pub const SPECTRUM_FLOOR: f64 = 1e-13;

/// Least-squares fit of `ln σ_j` against `√(j/3)` (j counted from 1),
/// using the values above `SPECTRUM_FLOOR * σ_max`. The index is divided by
/// three because each source point carries three unknowns.
pub fn fit_spectrum(sigma: &[f64], r_proxy: f64) -> Result<SpectrumFit> {
    if !(r_proxy > 0.0 && r_proxy < 1.0) {
        return Err(Error::InvalidArgument(format!("proxy radius must lie in (0, 1), got {r_proxy}")));
    }
    let smax = sigma.first().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = sigma
        .iter()
        .enumerate()
        .take_while(|(_, &s)| s > SPECTRUM_FLOOR * smax)
        .map(|(j, s)| (((j + 1) as f64 / 3.0).sqrt(), s.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Numerical(format!(
            "only {} resolved singular values, need at least 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let smin = sigma.last().copied().unwrap_or(0.0);
    Ok(SpectrumFit {
        decay: slope / r_proxy.ln(),
        intercept: my - slope * mx,
        used: pts.len(),
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
    })
}

/// Singular values (descending) of the weighted one-body matrix of an
/// isolated sphere with the given discretization.
pub fn singular_spectrum(params: &SolverParams, mu: f64) -> Result<Vec<f64>> {
    params.validate()?;
    let scene = Scene::new(mu, BackgroundFlow::None, vec![SphereState::fixed(Point3::zeros())])?;
    let plan = plan_discretization(&scene, params)?;
    let discs = realize_discretization(&plan, &scene, params)?;
    Ok(factor_template(&discs[0].template, mu, params)?.singular_values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_decay() {
        let rp: f64 = 0.63;
        let sigma: Vec<f64> = (1..=600)
            .map(|j| 2.0 * rp.powf(1.1 * (j as f64 / 3.0).sqrt()))
            .collect();
        let fit = fit_spectrum(&sigma, rp).unwrap();
        assert!((fit.decay - 1.1).abs() < 1e-10);
        assert!((fit.intercept - 2f64.ln()).abs() < 1e-10);
        assert_eq!(fit.used, 600);
    }

    #[test]
    fn floor_excludes_roundoff_tail() {
        let mut sigma = vec![1.0, 0.5, 0.25, 0.125];
        sigma.extend([1e-15, 1e-16]);
        let fit = fit_spectrum(&sigma, 0.5).unwrap();
        assert_eq!(fit.used, 4);
        assert!(fit_spectrum(&[1.0, 1e-20], 0.5).is_err());
    }
}
