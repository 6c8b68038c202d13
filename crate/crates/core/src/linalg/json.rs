//! Hermitian matrix JSON: `{"dim": n, "re": [[...]], "im": [[...]]}`.
//!
//! An optional `"dims"` array names the tensor factors (product must equal `dim`).
//! `"im"` may be omitted for real matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_hermitian(m: &HermitianMatrix, dims: Option<Vec<usize>>) -> Self {
        let n = m.dim();
        let re = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j).re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j).im).collect())
            .collect();
        MatrixJson {
            dim: n,
            dims,
            re,
            im: Some(im),
        }
    }

    /// Validates shape and hermiticity; returns the matrix and factor dims.
    pub fn to_hermitian(&self) -> Result<(HermitianMatrix, Vec<usize>)> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Parse("matrix dim must be positive".into()));
        }
        let check = |rows: &Vec<Vec<f64>>, what: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("\"{what}\" must be a {n}x{n} array")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        let data = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
                Complex64::new(self.re[i][j], im)
            })
            .collect();
        let m = HermitianMatrix::new(ComplexMatrix::new(n, n, data)?)?;
        let dims = match &self.dims {
            Some(d) => {
                if d.iter().product::<usize>() != n || d.contains(&0) {
                    return Err(Error::Parse(format!(
                        "factor dims {d:?} do not multiply to {n}"
                    )));
                }
                d.clone()
            }
            None => vec![n],
        };
        Ok((m, dims))
    }
}

pub fn parse_hermitian(text: &str) -> Result<(HermitianMatrix, Vec<usize>)> {
    let j: MatrixJson = serde_json::from_str(text)?;
    j.to_hermitian()
}
