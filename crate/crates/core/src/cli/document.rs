use std::f64::consts::PI;
use std::fmt;

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::gram::{
    angle_gram_from_vertices, hyperbolic_dual, spherical_dual, AngleGramMatrix, AngleMatrix,
    DistanceGramMatrix, Geometry, SimplexVertices,
};
use crate::matrix_core::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DocKind {
    AngleMatrix,
    AngleGram,
    DistanceGram,
    Vertices,
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocKind::AngleMatrix => "angle_matrix",
            DocKind::AngleGram => "angle_gram",
            DocKind::DistanceGram => "distance_gram",
            DocKind::Vertices => "vertices",
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Decimal(String),
}

/// Rows of numbers or decimal strings; strings are parsed to the nearest
/// double.
pub fn deserialize_rows<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    let raw: Vec<Vec<Entry>> = Vec::deserialize(d)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, e)| match e {
                    Entry::Number(x) => Ok(x),
                    Entry::Decimal(s) => s.trim().parse::<f64>().map_err(|_| {
                        serde::de::Error::custom(format!("entry ({i},{j}) is not a decimal: {s:?}"))
                    }),
                })
                .collect()
        })
        .collect()
}

/// A matrix or vertex list with its interpretation. For `vertices`, row `i`
/// holds the coordinates of vertex `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub kind: DocKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    #[serde(deserialize_with = "deserialize_rows")]
    pub data: Vec<Vec<f64>>,
}

impl MatrixDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixDocument =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn from_matrix(kind: DocKind, geometry: Option<Geometry>, m: &SymMatrix) -> Self {
        MatrixDocument {
            kind,
            n: m.dim() - 1,
            geometry,
            data: m.to_rows(),
        }
    }

    pub fn from_vertices(v: &SimplexVertices) -> Self {
        MatrixDocument {
            kind: DocKind::Vertices,
            n: v.n(),
            geometry: Some(v.geometry()),
            data: v.vertices(),
        }
    }

    /// Shape, finiteness and (for matrix kinds) exact symmetry.
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Input("n must be at least 1".into()));
        }
        let m = self.n + 1;
        if self.data.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.data.len(),
            });
        }
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Input(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i, j));
            }
        }
        if self.kind != DocKind::Vertices {
            for i in 0..m {
                for j in i + 1..m {
                    if self.data[i][j] != self.data[j][i] {
                        return Err(Error::NotSymmetric(i, j));
                    }
                }
            }
        }
        Ok(())
    }

    fn sym(&self) -> Result<SymMatrix> {
        SymMatrix::from_rows(&self.data)
    }

    fn require_geometry(&self) -> Result<Geometry> {
        self.geometry
            .ok_or_else(|| Error::Input(format!("{} document needs a geometry", self.kind)))
    }

    /// Angle matrix, converting from degrees when asked. Diagonal entries
    /// within `1e-12` of `π` are snapped to `π`.
    pub fn angle_matrix(&self, degrees: bool) -> Result<AngleMatrix> {
        self.expect_kind(DocKind::AngleMatrix)?;
        let a = self.sym()?;
        let m = a.dim();
        let conv = |x: f64| if degrees { x.to_radians() } else { x };
        let snapped = SymMatrix::from_upper(m, |i, j| {
            let x = conv(a[(i, j)]);
            if i == j && (x - PI).abs() <= 1e-12 {
                PI
            } else {
                x
            }
        });
        AngleMatrix::new(snapped)
    }

    pub fn distance_gram(&self) -> Result<DistanceGramMatrix> {
        self.expect_kind(DocKind::DistanceGram)?;
        DistanceGramMatrix::new(self.sym()?, self.require_geometry()?)
    }

    pub fn vertices(&self) -> Result<SimplexVertices> {
        self.expect_kind(DocKind::Vertices)?;
        SimplexVertices::from_vertices(&self.data, self.require_geometry()?)
    }

    /// Angle Gram of whatever the document describes, classified with `tol`.
    pub fn to_angle_gram(&self, tol: f64, degrees: bool) -> Result<AngleGramMatrix> {
        match self.kind {
            DocKind::AngleMatrix => {
                let am = self.angle_matrix(degrees)?;
                let g = SymMatrix::from_upper(am.n() + 1, |i, j| {
                    if i == j {
                        1.0
                    } else {
                        -am.get(i, j).cos()
                    }
                });
                AngleGramMatrix::new(g, tol)
            }
            DocKind::AngleGram => AngleGramMatrix::new(self.sym()?, tol),
            DocKind::DistanceGram => {
                let g = self.distance_gram()?;
                let (a, _) = match g.geometry() {
                    Geometry::Spherical => spherical_dual(&g)?,
                    Geometry::Hyperbolic => hyperbolic_dual(&g)?,
                };
                AngleGramMatrix::new(a.matrix().clone(), tol)
            }
            DocKind::Vertices => {
                let a = angle_gram_from_vertices(&self.vertices()?)?;
                AngleGramMatrix::new(a.matrix().clone(), tol)
            }
        }
    }

    fn expect_kind(&self, kind: DocKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Input(format!("expected a {kind} document, got {}", self.kind)))
        }
    }
}
