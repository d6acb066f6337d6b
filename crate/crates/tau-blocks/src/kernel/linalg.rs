use super::scalar::Scalar;
use super::KernelError;

pub type Matrix = Vec<Vec<Scalar>>;

/// Solves `a x = b` by exact Gaussian elimination.
pub fn solve(a: &Matrix, b: &[Scalar]) -> Result<Vec<Scalar>, KernelError> {
    let n = a.len();
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(KernelError::SingularMatrix(n))?;
        m.swap(col, pivot);
        let inv = m[col][col].inv()?;
        for k in col..=n {
            m[col][k] = &m[col][k] * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for k in col..=n {
                let d = &m[col][k] * &f;
                m[r][k] -= &d;
            }
        }
    }
    Ok(m.into_iter().map(|mut r| r.pop().unwrap_or_default()).collect())
}

/// Exact determinant by fraction-tracking elimination.
pub fn determinant(a: &Matrix) -> Scalar {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Scalar::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Scalar::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det = &det * &m[col][col];
        let inv = m[col][col].inv().expect("nonzero pivot");
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for k in col..n {
                let d = &m[col][k] * &f;
                m[r][k] -= &d;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = vec![vec![Scalar::int(2), Scalar::int(1)], vec![Scalar::int(1), Scalar::int(3)]];
        let x = solve(&a, &[Scalar::int(3), Scalar::int(5)]).unwrap();
        assert_eq!(x, vec![Scalar::frac(4, 5), Scalar::frac(7, 5)]);
        assert_eq!(determinant(&a), Scalar::int(5));
        let s = vec![vec![Scalar::int(1), Scalar::int(2)], vec![Scalar::int(2), Scalar::int(4)]];
        assert!(solve(&s, &[Scalar::one(), Scalar::one()]).is_err());
    }
}
