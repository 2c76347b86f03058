//! 3x3 Hermitian matrices with a cyclic complex Jacobi eigensolver.

use std::ops::{Add, Mul};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm3(pub [[Complex64; 3]; 3]);

/// Eigenvalues in descending order; `vectors[i]` belongs to `values[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen3 {
    pub values: [f64; 3],
    pub vectors: [[Complex64; 3]; 3],
}

impl Herm3 {
    pub fn zero() -> Self {
        Herm3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Herm3::from_diag([1.0, 1.0, 1.0])
    }

    pub fn from_diag(d: [f64; 3]) -> Self {
        let mut m = Herm3::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `k k^H`.
    pub fn outer(k: &[Complex64; 3]) -> Self {
        let mut m = Herm3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = k[i] * k[j].conj();
            }
        }
        m
    }

    /// `V diag(values) V^H` with `vectors[i]` as the columns of `V`.
    pub fn from_eigen(values: [f64; 3], vectors: &[[Complex64; 3]; 3]) -> Self {
        let mut m = Herm3::zero();
        for (l, v) in values.iter().zip(vectors) {
            for i in 0..3 {
                for j in 0..3 {
                    m.0[i][j] += v[i] * v[j].conj() * *l;
                }
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.0[i][i].re).sum()
    }

    /// Largest `|a_ij - conj(a_ji)|`, including imaginary diagonal parts.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in i..3 {
                d = d.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        d
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Herm3) -> Herm3 {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= other.0[i][j];
            }
        }
        m
    }

    fn off_diagonal_norm(&self) -> f64 {
        self.0[0][1].norm_sqr() + self.0[0][2].norm_sqr() + self.0[1][2].norm_sqr()
    }

    /// Eigen-decomposition of the Hermitian part. Eigenvectors are unit norm
    /// with their first non-negligible component real and positive.
    pub fn eigh(&self) -> Eigen3 {
        let mut a = self.0;
        // enforce exact Hermitian symmetry from the upper triangle
        for i in 0..3 {
            a[i][i] = Complex64::new(a[i][i].re, 0.0);
            for j in i + 1..3 {
                a[j][i] = a[i][j].conj();
            }
        }
        let mut v = [[ZERO; 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = ONE;
        }
        let scale = Herm3(a).frobenius();
        for _ in 0..MAX_SWEEPS {
            if Herm3(a).off_diagonal_norm() <= (f64::EPSILON * scale).powi(2) * 1e-4 {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                rotate(&mut a, &mut v, p, q);
            }
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| a[j][j].re.total_cmp(&a[i][i].re));
        let mut values = [0.0; 3];
        let mut vectors = [[ZERO; 3]; 3];
        for (slot, &src) in order.iter().enumerate() {
            values[slot] = a[src][src].re;
            let col = [v[0][src], v[1][src], v[2][src]];
            vectors[slot] = gauge_fix(col);
        }
        Eigen3 { values, vectors }
    }
}

/// One Jacobi step zeroing `a[p][q]`; `v` accumulates the unitary.
fn rotate(a: &mut [[Complex64; 3]; 3], v: &mut [[Complex64; 3]; 3], p: usize, q: usize) {
    let z = a[p][q];
    let mag = z.norm();
    if mag == 0.0 {
        return;
    }
    let phase = z / mag;
    let theta = (a[q][q].re - a[p][p].re) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U = D J with D = diag(1, conj(phase)) on (p, q)
    let mut u = [[ZERO; 3]; 3];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = ONE;
    }
    u[p][p] = Complex64::new(c, 0.0);
    u[p][q] = Complex64::new(s, 0.0);
    u[q][p] = -phase.conj() * s;
    u[q][q] = phase.conj() * c;

    let au = matmul(a, &u);
    let mut uh = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            uh[i][j] = u[j][i].conj();
        }
    }
    *a = matmul(&uh, &au);
    a[p][q] = ZERO;
    a[q][p] = ZERO;
    for i in 0..3 {
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
    }
    *v = matmul(v, &u);
}

fn matmul(x: &[[Complex64; 3]; 3], y: &[[Complex64; 3]; 3]) -> [[Complex64; 3]; 3] {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

fn gauge_fix(mut col: [Complex64; 3]) -> [Complex64; 3] {
    let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return col;
    }
    if let Some(lead) = col.iter().find(|z| z.norm() > 1e-12 * norm).copied() {
        let rot = lead.conj() / (lead.norm() * norm);
        col.iter_mut().for_each(|z| *z *= rot);
    }
    col
}

impl Add for Herm3 {
    type Output = Herm3;
    fn add(mut self, rhs: Herm3) -> Herm3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for Herm3 {
    type Output = Herm3;
    fn mul(mut self, rhs: f64) -> Herm3 {
        self.0.iter_mut().flatten().for_each(|z| *z *= rhs);
        self
    }
}
