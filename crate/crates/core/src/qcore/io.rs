//! JSON exchange format for matrices and Choi matrices.
//!
//! A matrix is `{dim, rows: [[[re, im], ...], ...]}` (row-major); a Choi
//! matrix additionally carries `{dimB, dimR}`. Serde implementations for
//! the validated types route through these structs, so deserialization
//! re-runs the type invariants.

use super::{CMat, C64, ChoiMatrix, DensityOperator, HermitianOperator, InputState, QcoreError};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self { dim, rows }
    }

    pub fn to_cmat(&self) -> Result<CMat, QcoreError> {
        if self.rows.len() != self.dim || self.rows.iter().any(|r| r.len() != self.dim) {
            return Err(QcoreError::DimMismatch {
                context: format!("matrix JSON claims dim {}, rows disagree", self.dim),
            });
        }
        let mut m = CMat::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = C64::new(re, im);
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiJson {
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(rename = "dimR")]
    pub dim_r: usize,
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_cmat(self.mat()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = j.to_cmat().map_err(DeError::custom)?;
        HermitianOperator::new(m).map_err(DeError::custom)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_cmat(self.mat()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = j.to_cmat().map_err(DeError::custom)?;
        DensityOperator::from_mat(m).map_err(DeError::custom)
    }
}

impl Serialize for ChoiMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = MatrixJson::from_cmat(self.mat());
        ChoiJson { dim_b: self.dim_b(), dim_r: self.dim_r(), dim: m.dim, rows: m.rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ChoiJson::deserialize(d)?;
        let m = MatrixJson { dim: j.dim, rows: j.rows }.to_cmat().map_err(DeError::custom)?;
        ChoiMatrix::from_mat(j.dim_b, j.dim_r, m).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct InputStateJson {
    #[serde(rename = "phiR")]
    phi_r: DensityOperator,
}

impl Serialize for InputState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InputStateJson { phi_r: self.phi_r().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InputState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = InputStateJson::deserialize(d)?;
        Ok(InputState::from_phi_r(j.phi_r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let n = crate::qcore::random_channel(9, 2, 2).unwrap();
        let text = serde_json::to_string(&n).unwrap();
        let back: ChoiMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(n.mat(), back.mat());
        assert!(text.contains("\"dimB\""));
    }

    #[test]
    fn invalid_choi_rejected_on_read() {
        let bad = r#"{"dimB":2,"dimR":2,"dim":4,"rows":[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[3,0]]]}"#;
        assert!(serde_json::from_str::<ChoiMatrix>(bad).is_err());
    }
}
