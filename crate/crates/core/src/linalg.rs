//! Dense 4x4 helpers for metric work: inversion, products, signature.

pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

pub fn max_abs(a: &Mat4) -> f64 {
    let mut m: f64 = 0.0;
    for row in a {
        for &x in row {
            m = m.max(x.abs());
        }
    }
    m
}

/// Inverse by Gauss-Jordan with partial pivoting. Returns `None` when the
/// pivot underflows relative to the matrix scale.
pub fn invert(a: &Mat4) -> Option<Mat4> {
    let mut aug = [[0.0f64; 8]; 4];
    for i in 0..4 {
        aug[i][..4].copy_from_slice(&a[i]);
        aug[i][4 + i] = 1.0;
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if aug[row][col].abs() > aug[pivot][col].abs() {
                pivot = row;
            }
        }
        if aug[pivot][col].abs() < 1e-300 * scale {
            return None;
        }
        aug.swap(col, pivot);
        let inv_p = 1.0 / aug[col][col];
        for j in 0..8 {
            aug[col][j] *= inv_p;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = aug[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..8 {
                aug[row][j] -= f * aug[col][j];
            }
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        out[i].copy_from_slice(&aug[i][4..]);
    }
    Some(out)
}

pub fn determinant(a: &Mat4) -> f64 {
    // Expansion via LU with partial pivoting.
    let mut m = *a;
    let mut det = 1.0;
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for j in col..4 {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric 4x4 by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &Mat4) -> [f64; 4] {
    let mut m = *a;
    for _ in 0..64 {
        let mut off: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                off = off.max(m[i][j].abs());
            }
        }
        if off < 1e-15 * max_abs(&m).max(1e-300) {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let tau = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut rot = IDENTITY;
                rot[p][p] = c;
                rot[q][q] = c;
                rot[p][q] = s;
                rot[q][p] = -s;
                let rt = transpose(&rot);
                m = mat_mul(&rt, &mat_mul(&m, &rot));
            }
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2], m[3][3]];
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Count of negative eigenvalues; a Lorentzian metric has exactly one.
pub fn negative_eigenvalue_count(a: &Mat4) -> usize {
    sym_eigenvalues(a).iter().filter(|&&e| e < 0.0).count()
}

/// Solves `a x = b` for 4-vectors by Gauss-Jordan.
pub fn solve4(a: &Mat4, b: &[f64; 4]) -> Option<[f64; 4]> {
    let inv = invert(a)?;
    let mut x = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            x[i] += inv[i][j] * b[j];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diag() {
        let a = [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, -4.0, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let inv = invert(&a).unwrap();
        assert!(max_abs_diff(&mat_mul(&a, &inv), &IDENTITY) < 1e-15);
        assert!((determinant(&a) + 4.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // Block diagonal: [[2,1],[1,2]] has spectrum {1,3}; [[2,b],[b,0]]
        // with b = sqrt(3) has trace 2 and det -3, so spectrum {3,-1}.
        let b = 3.0f64.sqrt();
        let a = [
            [2.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, b],
            [0.0, 0.0, b, 0.0],
        ];
        let ev = sym_eigenvalues(&a);
        let expect = [-1.0, 1.0, 3.0, 3.0];
        for (got, want) in ev.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn lorentzian_signature_count() {
        let minkowski = [
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(negative_eigenvalue_count(&minkowski), 1);
    }
}
