//! Sequential minimal optimization for the C-SVM dual
//!
//! min ½ αᵀQα − eᵀα  s.t.  yᵀα = 0, 0 ≤ α ≤ C,  Q_ij = y_i y_j K(x_i, x_j)
//!
//! using second-order working set selection and an LRU cache of kernel rows.
//! Shrinking is not implemented.

use std::collections::HashMap;
use std::rc::Rc;

use super::ClassifierError;
use crate::features::entropy::exp_neg;

/// Kernel parameters and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// KKT tolerance the solution must meet.
    pub tol: f64,
    pub max_iter: usize,
    pub cache_bytes: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self {
            c,
            gamma,
            tol: 1e-3,
            max_iter: 10_000_000,
            cache_bytes: 256 << 20,
        }
    }
}

/// Solver result in terms of the training rows.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    /// Indices of rows with non-zero multipliers.
    pub support: Vec<usize>,
    /// `α_i · y_i` for each support row.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    /// Decision value of each support row as tracked by the solver.
    pub support_decisions: Vec<f64>,
    pub iterations: usize,
}

const TAU: f64 = 1e-12;

#[inline]
pub(crate) fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    exp_neg(gamma * d2)
}

/// `out[j] = rbf(xi, x_j)` for every row of `x`.
pub(crate) fn rbf_row(xi: &[f64], x: &[f64], gamma: f64, out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            return unsafe { rbf_row_avx2(xi, x, gamma, out) };
        }
    }
    rbf_row_generic(xi, x, gamma, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn rbf_row_avx2(xi: &[f64], x: &[f64], gamma: f64, out: &mut [f64]) {
    rbf_row_generic(xi, x, gamma, out)
}

#[inline(always)]
fn rbf_row_generic(xi: &[f64], x: &[f64], gamma: f64, out: &mut [f64]) {
    for (o, xj) in out.iter_mut().zip(x.chunks_exact(xi.len())) {
        *o = xi.iter().zip(xj).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() * gamma;
    }
    for o in out.iter_mut() {
        *o = exp_neg(*o);
    }
}

struct KernelCache<'a> {
    x: &'a [f64],
    cols: usize,
    gamma: f64,
    rows: HashMap<usize, (Rc<[f64]>, u64)>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [f64], cols: usize, gamma: f64, cache_bytes: usize) -> Self {
        let n = x.len() / cols;
        let capacity = (cache_bytes / (8 * n.max(1))).max(2);
        Self {
            x,
            cols,
            gamma,
            rows: HashMap::new(),
            capacity,
            clock: 0,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.cols..(i + 1) * self.cols]
    }

    fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        let clock = self.clock;
        if let Some(entry) = self.rows.get_mut(&i) {
            entry.1 = clock;
            return entry.0.clone();
        }
        if self.rows.len() >= self.capacity {
            let oldest = self
                .rows
                .iter()
                .min_by_key(|(_, (_, stamp))| *stamp)
                .map(|(&k, _)| k)
                .expect("cache is non-empty");
            self.rows.remove(&oldest);
        }
        let xi = self.point(i);
        let mut row = vec![0.0; self.x.len() / self.cols];
        rbf_row(xi, self.x, self.gamma, &mut row);
        let row: Rc<[f64]> = row.into();
        self.rows.insert(i, (row.clone(), clock));
        row
    }
}

/// Train on standardized row-major `x` (`cols` features per row).
pub fn train_rbf_svm(
    x: &[f64],
    cols: usize,
    labels: &[bool],
    params: &SvmParams,
) -> Result<SmoSolution, ClassifierError> {
    let n = labels.len();
    if cols == 0 || x.len() != n * cols {
        return Err(ClassifierError::Shape(format!(
            "{} values for {n} rows of {cols} features",
            x.len()
        )));
    }
    if !(params.c > 0.0 && params.gamma > 0.0 && params.tol > 0.0) {
        return Err(ClassifierError::Shape("C, gamma and tol must be positive".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == n {
        return Err(ClassifierError::SingleClass);
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let c = params.c;
    // Stop with headroom so recomputed decision values still meet `tol`.
    let eps = params.tol * 0.5;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelCache::new(x, cols, params.gamma, params.cache_bytes);
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            break;
        }
        let ki = cache.row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            if in_low(alpha[t], y[t]) {
                let v = y[t] * grad[t];
                gmax2 = gmax2.max(v);
                let b = gmax + v;
                if b > 0.0 {
                    let quad = (2.0 - 2.0 * ki[t]).max(TAU);
                    let obj = -b * b / quad;
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < eps || j == usize::MAX {
            break;
        }
        iterations += 1;
        if iterations > params.max_iter {
            return Err(ClassifierError::NonConvergence {
                iterations: params.max_iter,
            });
        }
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = (2.0 + 2.0 * (-ki[j])).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let di = (ai - old_i) * y[i];
        let dj = (aj - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let rho = {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] >= c {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    };

    let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let dual_coefs = support.iter().map(|&t| alpha[t] * y[t]).collect();
    // grad_t = y_t·Σ α_s y_s K_ts − 1, so the decision value is y_t(grad_t + 1) − ρ.
    let support_decisions = support
        .iter()
        .map(|&t| y[t] * (grad[t] + 1.0) - rho)
        .collect();
    Ok(SmoSolution {
        support,
        dual_coefs,
        bias: -rho,
        support_decisions,
        iterations,
    })
}
