//! JSON model files.
//!
//! ```json
//! {"kind":"static","n":2,"p":1,"mean":[0,0,0],"cov":[[...],[...],[...]]}
//! {"kind":"spectral","n":1,"p":1,"mean":[0,0],"grid_size":1024,
//!  "spectrum":{"type":"samples","values":[[[[re,im],...],...],...]}}
//! {"kind":"spectral",...,"spectrum":{"type":"arma","num":[[[...]]],"den":[[[...]]]}}
//! ```
//!
//! Complex entries are `[re, im]` pairs. An `arma` spectrum describes a
//! shaping filter `H` (see [`ArmaFilter`]) and is evaluated on the grid at
//! load time; models are always written back as samples.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ArmaFilter, JointGaussian, SpectralModel, DEFAULT_GRID_SIZE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelFile {
    Static {
        n: usize,
        p: usize,
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    Spectral {
        n: usize,
        p: usize,
        mean: Vec<f64>,
        #[serde(default = "default_grid_size")]
        grid_size: usize,
        spectrum: SpectrumFile,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumFile {
    Samples {
        values: Vec<Vec<Vec<[f64; 2]>>>,
    },
    Arma {
        num: Vec<Vec<Vec<f64>>>,
        den: Vec<Vec<Vec<f64>>>,
    },
}

fn default_grid_size() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Static(JointGaussian),
    Spectral(SpectralModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Static(_) => "static",
            Model::Spectral(_) => "spectral",
        }
    }
}

fn square_rows<T: Clone>(rows: &[Vec<T>], what: &str) -> Result<(usize, Vec<T>)> {
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Validation(vec![format!(
                "{what}: row {i} has {} entries, expected {n}",
                r.len()
            )]));
        }
        flat.extend_from_slice(r);
    }
    Ok((n, flat))
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelFile::Static { n, p, mean, cov } => {
                let (q, flat) = square_rows(&cov, "cov")?;
                let cov = DMatrix::from_row_slice(q, q, &flat);
                Ok(Model::Static(JointGaussian::new(
                    n,
                    p,
                    DVector::from_vec(mean),
                    cov,
                )?))
            }
            ModelFile::Spectral {
                n,
                p,
                mean,
                grid_size,
                spectrum,
            } => {
                let mean = DVector::from_vec(mean);
                let model = match spectrum {
                    SpectrumFile::Samples { values } => {
                        if values.len() != grid_size {
                            return Err(Error::Validation(vec![format!(
                                "grid_size is {grid_size} but {} spectrum samples were given",
                                values.len()
                            )]));
                        }
                        let mut mats = Vec::with_capacity(values.len());
                        for (k, rows) in values.iter().enumerate() {
                            let (q, flat) = square_rows(rows, &format!("spectrum sample {k}"))?;
                            let flat: Vec<Complex64> =
                                flat.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                            mats.push(DMatrix::from_row_slice(q, q, &flat));
                        }
                        SpectralModel::new(n, p, mean, mats)?
                    }
                    SpectrumFile::Arma { num, den } => {
                        SpectralModel::from_arma(n, p, mean, grid_size, &ArmaFilter { num, den })?
                    }
                };
                Ok(Model::Spectral(model))
            }
        }
    }

    pub fn from_model(model: &Model) -> Self {
        match model {
            Model::Static(m) => ModelFile::Static {
                n: m.n(),
                p: m.p(),
                mean: m.mean().iter().copied().collect(),
                cov: rows_of(m.cov(), |x| *x),
            },
            Model::Spectral(m) => ModelFile::Spectral {
                n: m.n(),
                p: m.p(),
                mean: m.mean().iter().copied().collect(),
                grid_size: m.grid_size(),
                spectrum: SpectrumFile::Samples {
                    values: m.values().iter().map(|s| rows_of(s, |x| [x.re, x.im])).collect(),
                },
            },
        }
    }
}

pub(crate) fn rows_of<T: nalgebra::Scalar, U>(m: &DMatrix<T>, f: impl Fn(&T) -> U) -> Vec<Vec<U>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
        .collect()
}

pub fn parse_model(json: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(json)?;
    file.into_model()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let text = fs::read_to_string(path)?;
    parse_model(&text)
}

/// Canonical JSON encoding (fixed field order).
pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string(&ModelFile::from_model(model)).expect("model files always serialize")
}
