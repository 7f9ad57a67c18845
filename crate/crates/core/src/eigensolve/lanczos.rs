//! Shift-invert Lanczos in the M-inner product with full reorthogonalization,
//! locking of converged pairs and restarts deflated against the locked set.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ldl::Ldl;
use super::{relative_residual, EigenError, Eigenpair, SolveOptions};
use crate::fem::SparseSymMatrix;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Locked {
    mu: f64,
    x: Vec<f64>,
    mx: Vec<f64>,
}

struct Ritz {
    mu: f64,
    dist: f64,
    estimate: f64,
    theta: f64,
    s: Vec<f64>,
}

pub(super) struct ShiftInvert<'a> {
    pub k: &'a SparseSymMatrix,
    pub m: &'a SparseSymMatrix,
    pub ldl: Ldl,
    pub sigma: f64,
    pub target: f64,
}

impl ShiftInvert<'_> {
    /// Removes the M-components along the locked vectors (twice).
    fn deflate(&self, locked: &[Locked], w: &mut [f64]) {
        for _ in 0..2 {
            for l in locked {
                let c = dot(&l.mx, w);
                axpy(-c, &l.x, w);
            }
        }
    }

    /// One Lanczos run of at most `steps` steps from `start`.
    fn run(&self, start: &[f64], locked: &[Locked], steps: usize) -> (Vec<Vec<f64>>, Vec<Ritz>) {
        let n = self.k.n;
        let mut v = start.to_vec();
        self.deflate(locked, &mut v);
        let mut mv = self.m.mul(&v);
        let nrm = dot(&v, &mv).sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        mv.iter_mut().for_each(|x| *x /= nrm);
        let mut basis = vec![v];
        let mut mbasis = vec![mv];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        loop {
            let j = basis.len() - 1;
            self.ldl.solve(&mbasis[j], &mut w);
            let a = dot(&mbasis[j], &w);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            self.deflate(locked, &mut w);
            for _ in 0..2 {
                for (q, mq) in basis.iter().zip(&mbasis) {
                    let c = dot(mq, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let mw = self.m.mul(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();
            alpha.push(a);
            beta.push(b);
            if basis.len() >= steps || b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            basis.push(w.iter().map(|x| x / b).collect());
            mbasis.push(mw.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let last_beta = beta[m - 1];
        let mut ritz: Vec<Ritz> = (0..m)
            .filter(|&i| eig.eigenvalues[i] != 0.0)
            .map(|i| {
                let theta = eig.eigenvalues[i];
                let mu = self.sigma + 1.0 / theta;
                let s: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                Ritz { mu, dist: (mu - self.target).abs(), estimate: (last_beta * s[m - 1]).abs(), theta, s }
            })
            .collect();
        ritz.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.mu.total_cmp(&b.mu)));
        (basis, ritz)
    }

    fn ritz_vector(basis: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; basis[0].len()];
        for (q, &c) in basis.iter().zip(s) {
            axpy(c, q, &mut y);
        }
        y
    }

    /// The `count` eigenpairs nearest the target, M-orthonormal, sorted by μ.
    pub fn solve(&self, count: usize, opts: &SolveOptions) -> Result<Vec<Eigenpair>, EigenError> {
        let n = self.k.n;
        let steps = opts.basis.unwrap_or((2 * count + 20).max(40)).min(n);
        let lock_tol = 0.1 * opts.tol;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let random = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<f64>>();
        let mut locked: Vec<Locked> = Vec::new();
        let mut start = random(&mut rng);
        let mut fresh = true;
        let mut best_pending = f64::INFINITY;
        let kth = |locked: &[Locked]| {
            if locked.len() < count {
                return f64::INFINITY;
            }
            let mut d: Vec<f64> = locked.iter().map(|l| (l.mu - self.target).abs()).collect();
            d.sort_by(f64::total_cmp);
            d[count - 1]
        };
        let mut done = false;
        let mut restarts = 0;
        while restarts < opts.max_restarts {
            restarts += 1;
            let avail = n - locked.len();
            if avail == 0 {
                done = locked.len() >= count;
                break;
            }
            let (basis, ritz) = self.run(&start, &locked, steps.min(avail));
            let cutoff_before = kth(&locked);
            let mut nearer_lock = false;
            let mut pending: Vec<(f64, Vec<f64>)> = Vec::new();
            best_pending = f64::INFINITY;
            for r in ritz.iter().take(count) {
                if r.dist >= cutoff_before {
                    break;
                }
                if r.estimate > 1e-4 * r.theta.abs() {
                    pending.push((r.dist, Self::ritz_vector(&basis, &r.s)));
                    continue;
                }
                let mut y = Self::ritz_vector(&basis, &r.s);
                let res = relative_residual(self.k, self.m, &y, r.mu);
                if res > lock_tol {
                    best_pending = best_pending.min(res);
                    pending.push((r.dist, y));
                    continue;
                }
                self.deflate(&locked, &mut y);
                let my = self.m.mul(&y);
                let nrm = dot(&y, &my).sqrt();
                if nrm < 0.5 {
                    // Already locked: a copy regrown from rounding.
                    continue;
                }
                let x: Vec<f64> = y.iter().map(|v| v / nrm).collect();
                let mx: Vec<f64> = my.iter().map(|v| v / nrm).collect();
                locked.push(Locked { mu: self.k.quad_form(&x, &x), x, mx });
                nearer_lock = true;
            }
            let cutoff = kth(&locked);
            pending.retain(|(d, _)| *d < cutoff);
            if locked.len() >= count && pending.is_empty() {
                if fresh && !nearer_lock {
                    done = true;
                    break;
                }
                start = random(&mut rng);
                fresh = true;
            } else if !pending.is_empty() {
                start = vec![0.0; n];
                for (_, y) in &pending {
                    let s = dot(y, &self.m.mul(y)).sqrt();
                    axpy(1.0 / s, y, &mut start);
                }
                // A little noise keeps hidden multiplicities reachable.
                let noise = random(&mut rng);
                axpy(1e-3 / (n as f64).sqrt(), &noise, &mut start);
                fresh = false;
            } else {
                start = random(&mut rng);
                fresh = true;
            }
        }
        if !done {
            return Err(EigenError::ConvergenceFailure {
                restarts,
                locked: locked.len(),
                wanted: count,
                residual: best_pending,
            });
        }
        locked.sort_by(|a, b| (a.mu - self.target).abs().total_cmp(&(b.mu - self.target).abs()).then(a.mu.total_cmp(&b.mu)));
        locked.truncate(count);
        Ok(rayleigh_ritz(self.k, self.m, locked.into_iter().map(|l| l.x).collect()))
    }
}

/// Rayleigh–Ritz on span(xs): M-orthonormal pairs sorted by μ, each with a
/// deterministic sign (largest-magnitude coefficient positive).
fn rayleigh_ritz(k: &SparseSymMatrix, m: &SparseSymMatrix, xs: Vec<Vec<f64>>) -> Vec<Eigenpair> {
    let c = xs.len();
    let kx: Vec<Vec<f64>> = xs.iter().map(|x| k.mul(x)).collect();
    let mx: Vec<Vec<f64>> = xs.iter().map(|x| m.mul(x)).collect();
    let a = DMatrix::from_fn(c, c, |i, j| 0.5 * (dot(&xs[i], &kx[j]) + dot(&xs[j], &kx[i])));
    let b = DMatrix::from_fn(c, c, |i, j| 0.5 * (dot(&xs[i], &mx[j]) + dot(&xs[j], &mx[i])));
    let l = b.cholesky().expect("locked vectors are M-orthonormal").l();
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    let reduced = &linv * a * linv.transpose();
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let eig = SymmetricEigen::new(reduced);
    let coef = linv.transpose() * &eig.eigenvectors;
    let zero_level = 1e-12 * k.norm() / m.norm();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order
        .into_iter()
        .map(|col| {
            let mut u = vec![0.0; xs[0].len()];
            for (i, x) in xs.iter().enumerate() {
                axpy(coef[(i, col)], x, &mut u);
            }
            let nrm = m.quad_form(&u, &u).sqrt();
            let (imax, _) = u.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let sign = if u[imax] < 0.0 { -1.0 } else { 1.0 };
            u.iter_mut().for_each(|v| *v *= sign / nrm);
            let mut mu = k.quad_form(&u, &u);
            // The Neumann ground state: μ is rounding noise.
            if mu.abs() < zero_level {
                mu = 0.0;
            }
            let residual = relative_residual(k, m, &u, mu);
            Eigenpair { mu, coeffs: u, residual }
        })
        .collect()
}
