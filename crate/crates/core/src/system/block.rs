//! Dense target-from-source blocks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3};
use crate::kernels::{SourceEntry, SourceSet};
use crate::system::linalg::ColMat;

/// Dense block mapping the stacked strengths of one source set to the
/// velocities at a set of targets.
#[derive(Clone, Debug)]
pub struct DenseBlock {
    pub matrix: ColMat,
    pub source_particle: usize,
}

impl DenseBlock {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

pub fn assemble_block(targets: &NodeSet, sources: &SourceSet, mu: f64) -> Result<DenseBlock> {
    let matrix = assemble_matrix(&targets.points, &sources.entries, mu, None)?;
    Ok(DenseBlock {
        matrix,
        source_particle: sources.particle,
    })
}

/// `3 targets x 3 sources` matrix with rows optionally scaled by
/// `row_scale[i]` (one factor per target point).
pub fn assemble_matrix(
    targets: &[Point3],
    sources: &[SourceEntry],
    mu: f64,
    row_scale: Option<&[f64]>,
) -> Result<ColMat> {
    if let Some(s) = row_scale {
        assert_eq!(s.len(), targets.len(), "one row scale per target");
    }
    let rows = 3 * targets.len();
    let cols = 3 * sources.len();
    let mut data = vec![0.0; rows * cols];
    if rows == 0 || cols == 0 {
        return Ok(ColMat::from_col_major(rows, cols, data));
    }
    // Each source fills three contiguous columns.
    data.par_chunks_mut(3 * rows)
        .zip(sources.par_iter())
        .enumerate()
        .try_for_each(|(j, (chunk, src))| -> Result<()> {
            for (i, x) in targets.iter().enumerate() {
                let m = src.response(x, mu).map_err(|_| {
                    Error::SingularEvaluation(format!(
                        "collocation point {i} coincides with source {j}"
                    ))
                })?;
                let w = row_scale.map_or(1.0, |s| s[i]);
                for c in 0..3 {
                    let col = &mut chunk[c * rows + 3 * i..c * rows + 3 * i + 3];
                    for r in 0..3 {
                        col[r] = w * m[(r, c)];
                    }
                }
            }
            Ok(())
        })?;
    Ok(ColMat::from_col_major(rows, cols, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::eval_sources;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn single_stokeslet_block() {
        let targets = NodeSet {
            points: vec![Point3::new(1.0, 0.0, 0.0)],
            radius: 1.0,
            center: Point3::zeros(),
        };
        let sources = SourceSet::new(0, vec![SourceEntry::stokeslet(Point3::zeros(), Vector3::zeros())]);
        let b = assemble_block(&targets, &sources, 1.0).unwrap();
        let expect = [2.0, 1.0, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                let v = if i == j { expect[i] / (8.0 * PI) } else { 0.0 };
                assert!((b.matrix.get(i, j) - v).abs() < 1e-16);
            }
        }
    }

    fn random_case(seed: u64) -> (NodeSet, SourceSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets = crate::geometry::fibonacci_sphere(20, 1.0, Point3::zeros()).unwrap();
        let mut entries = Vec::new();
        for i in 0..8 {
            let loc = crate::geometry::random_unit_vector(&mut rng) * 0.6;
            let s = Vector3::new(rng.gen(), rng.gen(), rng.gen());
            entries.push(match i % 4 {
                0 => SourceEntry::stokeslet(loc, s),
                1 => SourceEntry::rotlet(loc, s),
                2 => SourceEntry::dipole(loc, s),
                _ => SourceEntry::stresslet(loc, s, loc),
            });
        }
        (targets, SourceSet::new(0, entries))
    }

    #[test]
    fn block_times_strengths_matches_field() {
        let (targets, sources) = random_case(1);
        let b = assemble_block(&targets, &sources, 0.7).unwrap();
        let u = b.matrix.matvec(&sources.strengths());
        for (i, x) in targets.points.iter().enumerate() {
            let direct = eval_sources(x, &sources, 0.7).unwrap();
            for c in 0..3 {
                assert!((u[3 * i + c] - direct[c]).abs() <= 1e-14 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn swapping_sources_swaps_columns() {
        let (targets, mut sources) = random_case(2);
        let b = assemble_block(&targets, &sources, 1.0).unwrap();
        sources.entries.swap(1, 4);
        let b2 = assemble_block(&targets, &sources, 1.0).unwrap();
        for c in 0..3 {
            assert_eq!(b.matrix.col(3 + c), b2.matrix.col(12 + c));
            assert_eq!(b.matrix.col(12 + c), b2.matrix.col(3 + c));
        }
    }

    #[test]
    fn coincident_point_is_an_error() {
        let targets = NodeSet {
            points: vec![Point3::zeros()],
            radius: 1.0,
            center: Point3::zeros(),
        };
        let sources = SourceSet::new(0, vec![SourceEntry::stokeslet(Point3::zeros(), Vector3::zeros())]);
        assert!(matches!(
            assemble_block(&targets, &sources, 1.0),
            Err(Error::SingularEvaluation(_))
        ));
    }
}
