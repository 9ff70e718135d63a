//! Full (unrestarted) GMRES with modified Gram-Schmidt, able to advance
//! several right-hand sides in lockstep so that their operator
//! applications can be batched.

use crate::error::{Error, Result};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// Applies the operator to several vectors. Override when a batch is
    /// cheaper than separate calls.
    fn apply_many(&self, xs: &[&[f64]]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| self.apply(x)).collect()
    }
}

/// A dense matrix given row by row, mainly for tests.
pub struct DenseOperator {
    pub rows: Vec<Vec<f64>>,
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual estimate before the first iteration (1, or 0 for a
    /// zero right-hand side) and after each iteration.
    pub history: Vec<f64>,
}

impl GmresOutcome {
    pub fn final_residual(&self) -> f64 {
        *self.history.last().expect("history is never empty")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Krylov {
    basis: Vec<Vec<f64>>,
    // Columns of the Hessenberg matrix after the Givens rotations, i.e. R.
    r: Vec<Vec<f64>>,
    cs: Vec<f64>,
    sn: Vec<f64>,
    g: Vec<f64>,
    beta: f64,
    history: Vec<f64>,
    done: bool,
    converged: bool,
}

impl Krylov {
    fn new(b: &[f64], tol: f64) -> Self {
        let beta = norm(b);
        let mut k = Krylov {
            basis: Vec::new(),
            r: Vec::new(),
            cs: Vec::new(),
            sn: Vec::new(),
            g: vec![beta],
            beta,
            history: Vec::new(),
            done: false,
            converged: false,
        };
        if beta == 0.0 {
            k.history.push(0.0);
            k.done = true;
            k.converged = true;
        } else {
            k.history.push(1.0);
            k.basis.push(b.iter().map(|v| v / beta).collect());
            if 1.0 <= tol {
                k.done = true;
                k.converged = true;
            }
        }
        k
    }

    fn iterations(&self) -> usize {
        self.r.len()
    }

    fn current(&self) -> &[f64] {
        self.basis.last().expect("basis is nonempty while iterating")
    }

    /// Extends the Krylov space with `w = A v_j`.
    fn step(&mut self, mut w: Vec<f64>, tol: f64) {
        let j = self.r.len();
        let mut h = Vec::with_capacity(j + 2);
        for v in &self.basis {
            let hij = dot(&w, v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
            h.push(hij);
        }
        let hnext = norm(&w);
        for i in 0..j {
            let (c, s) = (self.cs[i], self.sn[i]);
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let (a, b) = (h[j], hnext);
        let rho = a.hypot(b);
        let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b / rho) };
        h[j] = rho;
        self.cs.push(c);
        self.sn.push(s);
        let gj = self.g[j];
        self.g[j] = c * gj;
        self.g.push(-s * gj);
        self.r.push(h);

        let rel = self.g[j + 1].abs() / self.beta;
        self.history.push(rel);
        // A vanishing new basis vector means the solution lies in the
        // current space.
        let breakdown = hnext <= 1e-14 * rho.max(f64::MIN_POSITIVE);
        if rel <= tol || breakdown {
            self.done = true;
            self.converged = rel <= tol || breakdown;
        } else {
            self.basis.push(w.iter().map(|v| v / hnext).collect());
        }
    }

    fn solution(&self, n: usize) -> Vec<f64> {
        let k = self.r.len();
        let mut y = self.g[..k].to_vec();
        for i in (0..k).rev() {
            for l in i + 1..k {
                y[i] -= self.r[l][i] * y[l];
            }
            y[i] /= self.r[i][i];
        }
        let mut x = vec![0.0; n];
        for (yi, v) in y.iter().zip(&self.basis) {
            for (xj, vj) in x.iter_mut().zip(v) {
                *xj += yi * vj;
            }
        }
        x
    }
}

fn check_args<A: LinearOperator + ?Sized>(op: &A, rhs: &[&[f64]], tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("GMRES tolerance must be positive, got {tol}")));
    }
    for b in rhs {
        if b.len() != op.dim() {
            return Err(Error::InvalidArgument(format!(
                "right-hand side has length {}, operator dimension is {}",
                b.len(),
                op.dim()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("right-hand side is not finite".into()));
        }
    }
    Ok(())
}

/// Solves `A x_i = b_i` for every right-hand side, starting from zero.
/// Unconverged systems return the last (minimal-residual) iterate.
pub fn gmres_many<A: LinearOperator + ?Sized>(
    op: &A,
    rhs: &[&[f64]],
    tol: f64,
    maxiter: usize,
) -> Result<Vec<GmresOutcome>> {
    check_args(op, rhs, tol)?;
    let n = op.dim();
    let maxiter = maxiter.min(n.max(1));
    let mut states: Vec<Krylov> = rhs.iter().map(|b| Krylov::new(b, tol)).collect();
    loop {
        let active: Vec<usize> = (0..states.len())
            .filter(|&i| !states[i].done && states[i].iterations() < maxiter)
            .collect();
        if active.is_empty() {
            break;
        }
        let inputs: Vec<&[f64]> = active.iter().map(|&i| states[i].current()).collect();
        let outputs = op.apply_many(&inputs);
        for (&i, w) in active.iter().zip(outputs) {
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "operator produced non-finite values at iteration {}",
                    states[i].iterations() + 1
                )));
            }
            states[i].step(w, tol);
        }
    }
    Ok(states
        .into_iter()
        .map(|s| GmresOutcome {
            solution: if s.beta == 0.0 { vec![0.0; n] } else { s.solution(n) },
            iterations: s.iterations(),
            converged: s.converged,
            history: s.history,
        })
        .collect())
}

pub fn gmres<A: LinearOperator + ?Sized>(
    op: &A,
    rhs: &[f64],
    tol: f64,
    maxiter: usize,
) -> Result<GmresOutcome> {
    Ok(gmres_many(op, &[rhs], tol, maxiter)?.pop().expect("one outcome"))
}
