//! Dense reference solution of the SVM dual through a general-purpose
//! interior-point QP solver.

#![allow(dead_code)]

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT};

fn csc_from_dense(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> f64) -> CscMatrix<f64> {
    let mut colptr = vec![0];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for j in 0..cols {
        for i in 0..rows {
            let v = entry(i, j);
            if v != 0.0 {
                rowval.push(i);
                nzval.push(v);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows, cols, colptr, rowval, nzval)
}

/// Maximum of `Σα − ½ αᵀQα` over `0 ≤ α ≤ c`, `yᵀα = 0`, where
/// `Q_ij = y_i y_j gram[i][j]`. Returns `(objective, alphas)`.
pub fn svm_dual(gram: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q_entry = |i: usize, j: usize| y[i] * y[j] * gram[i][j];
    let p = csc_from_dense(n, n, |i, j| if i <= j { q_entry(i, j) } else { 0.0 });
    let lin = vec![-1.0; n];
    // rows: equality yᵀα = 0, then −α ≤ 0, then α ≤ c
    let a = csc_from_dense(1 + 2 * n, n, |r, j| {
        if r == 0 {
            y[j]
        } else if r == 1 + j {
            -1.0
        } else if r == 1 + n + j {
            1.0
        } else {
            0.0
        }
    });
    let mut b = vec![0.0; 1 + 2 * n];
    for v in b.iter_mut().skip(1 + n) {
        *v = c;
    }
    let cones = [ZeroConeT(1), NonnegativeConeT(2 * n)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .unwrap();
    let mut solver = DefaultSolver::new(&p, &lin, &a, &b, &cones, settings).unwrap();
    solver.solve();
    assert!(
        matches!(
            solver.solution.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved
        ),
        "reference QP failed: {:?}",
        solver.solution.status
    );
    let alphas = solver.solution.x.clone();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * q_entry(i, j);
        }
    }
    (alphas.iter().sum::<f64>() - 0.5 * quad, alphas)
}
