//! Evaluation of β∧(dβ)^k and (dβ)^k on explicit tangent vectors.
//!
//! Wedge products use the determinant convention, so that
//! `(dx∧dy)(e_x, e_y) = 1` and `(dz∧dx∧dy)(e_z, e_x, e_y) = 1`.
//! Every value is an explicit alternating sum over permutations.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

const MAX_ARITY: usize = 5;

pub(crate) struct PermTable {
    pub perms: Vec<(Vec<usize>, f64)>,
}

fn inversion_sign(p: &[usize]) -> f64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn permutations(m: usize) -> &'static PermTable {
    static TABLES: OnceLock<Vec<PermTable>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_ARITY)
            .map(|m| PermTable {
                perms: (0..m)
                    .permutations(m)
                    .map(|p| {
                        let s = inversion_sign(&p);
                        (p, s)
                    })
                    .collect(),
            })
            .collect()
    });
    assert!(m <= MAX_ARITY, "arity {m} exceeds {MAX_ARITY}");
    &tables[m]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(dβ)^k` evaluated on the pulled-back data `w[i][j] = dβ(v_i, v_j)`, with `2k` vectors.
pub fn omega_power_pulled(w: &DMatrix<f64>, k: usize) -> f64 {
    let m = 2 * k;
    assert_eq!(w.nrows(), m);
    if k == 0 {
        return 1.0;
    }
    let table = permutations(m);
    let mut acc = 0.0;
    for (p, s) in &table.perms {
        let mut term = *s;
        for i in 0..k {
            term *= w[(p[2 * i], p[2 * i + 1])];
        }
        acc += term;
    }
    acc / 2f64.powi(k as i32)
}

/// `β∧(dβ)^k` evaluated on pulled-back data: `b[i] = β(v_i)`, `w[i][j] = dβ(v_i, v_j)`,
/// with `2k + 1` vectors.
pub fn beta_omega_power_pulled(b: &[f64], w: &DMatrix<f64>, k: usize) -> f64 {
    let m = 2 * k + 1;
    assert_eq!(b.len(), m);
    assert_eq!(w.nrows(), m);
    let table = permutations(m);
    let mut acc = 0.0;
    for (p, s) in &table.perms {
        let mut term = *s * b[p[0]];
        if term == 0.0 {
            continue;
        }
        for i in 0..k {
            term *= w[(p[2 * i + 1], p[2 * i + 2])];
        }
        acc += term;
    }
    acc / 2f64.powi(k as i32)
}

fn pull_back(beta: &DVector<f64>, omega: &DMatrix<f64>, vecs: &[DVector<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let m = vecs.len();
    let b: Vec<f64> = vecs.iter().map(|v| beta.dot(v)).collect();
    let ov: Vec<DVector<f64>> = vecs.iter().map(|v| omega * v).collect();
    let mut w = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            // dβ(v_i, v_j) = v_iᵀ Ω v_j
            w[(i, j)] = vecs[i].dot(&ov[j]);
        }
    }
    (b, w)
}

/// `(dβ)^k(v_1, …, v_{2k})` for ambient covector/matrix data.
pub fn omega_power(omega: &DMatrix<f64>, vecs: &[DVector<f64>]) -> f64 {
    assert!(vecs.len() % 2 == 0);
    let beta = DVector::zeros(omega.nrows());
    let (_, w) = pull_back(&beta, omega, vecs);
    omega_power_pulled(&w, vecs.len() / 2)
}

/// `(β∧(dβ)^k)(v_0, …, v_{2k})` for ambient covector/matrix data.
pub fn beta_omega_power(beta: &DVector<f64>, omega: &DMatrix<f64>, vecs: &[DVector<f64>]) -> f64 {
    assert!(vecs.len() % 2 == 1);
    let (b, w) = pull_back(beta, omega, vecs);
    beta_omega_power_pulled(&b, &w, (vecs.len() - 1) / 2)
}

/// Liouville normalization 1/n! applied to reported volumes.
pub fn liouville_scale(n: usize) -> f64 {
    1.0 / factorial(n)
}
