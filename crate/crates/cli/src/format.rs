//! Versioned JSON file formats. Indices are 1-based; complex matrices are
//! split into real and imaginary parts; a number may be a JSON float or an
//! exact `"p/q"` string.

use std::str::FromStr;

use edlkit_core::hypergraph::SubsetCollection;
use edlkit_core::qcore::{self, CMat, C64, CVec, DenseState, PureVector, Subset};
use edlkit_core::symmetric::{DickeMixture, ExactMixture, SymmetricCoeffs};
use edlkit_core::graphstate::SimpleGraph;
use edlkit_core::witness::{Certificate, Witness};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const STATE_FORMAT: &str = "edlkit-state-v1";
pub const GRAPH_FORMAT: &str = "edlkit-graph-v1";
pub const COLLECTION_FORMAT: &str = "edlkit-collection-v1";
pub const WITNESS_FORMAT: &str = "edlkit-witness-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Exact(String),
}

impl Num {
    pub fn rational(&self) -> Result<BigRational, CliError> {
        match self {
            Num::Exact(s) => BigRational::from_str(s.trim())
                .map_err(|_| CliError::input("BAD_NUMBER", format!("{s:?} is not a p/q rational"))),
            Num::Float(x) => BigRational::from_float(*x)
                .ok_or_else(|| CliError::input("BAD_NUMBER", format!("{x} is not finite"))),
        }
    }

    pub fn float(&self) -> Result<f64, CliError> {
        match self {
            Num::Float(x) => Ok(*x),
            Num::Exact(_) => self
                .rational()?
                .to_f64()
                .ok_or_else(|| CliError::input("BAD_NUMBER", "rational out of f64 range")),
        }
    }
}

fn floats(v: &[Num]) -> Result<Vec<f64>, CliError> {
    v.iter().map(Num::float).collect()
}

fn float_rows(rows: &[Vec<Num>]) -> Result<Vec<Vec<f64>>, CliError> {
    rows.iter().map(|r| floats(r)).collect()
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| Num::Float(x)).collect()
}

/// `edlkit-state-v1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format: String,
    pub n: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_real: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_imag: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_real: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_imag: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_real: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_imag: Option<Vec<Vec<Num>>>,
}

/// A parsed state. Rational Dicke weights keep their exact form.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Diagonal { lambda: DickeMixture, exact: Option<ExactMixture> },
    Symmetric(SymmetricCoeffs),
    Pure(PureVector),
    Dense(DenseState),
}

fn need<'a, T>(field: &'a Option<T>, name: &str, kind: &str) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| CliError::input("MISSING_FIELD", format!("kind {kind} needs field {name}")))
}

fn complex_matrix(re: &[Vec<Num>], im: Option<&Vec<Vec<Num>>>, dim: usize, name: &str) -> Result<CMat, CliError> {
    let re = float_rows(re)?;
    let im = match im {
        Some(m) => float_rows(m)?,
        None => vec![vec![0.0; dim]; dim],
    };
    for m in [&re, &im] {
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(CliError::input("DIM_MISMATCH", format!("{name} must be {dim}x{dim}")));
        }
    }
    Ok(CMat::from_fn(dim, dim, |r, k| C64::new(re[r][k], im[r][k])))
}

fn matrix_parts(m: &CMat) -> (Vec<Vec<Num>>, Vec<Vec<Num>>) {
    let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<Num>> {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| Num::Float(f(r, k))).collect()).collect()
    };
    (rows(&|r, k| m[(r, k)].re), rows(&|r, k| m[(r, k)].im))
}

impl StateFile {
    fn blank(n: usize, kind: &str) -> Self {
        StateFile {
            format: STATE_FORMAT.into(),
            n,
            kind: kind.into(),
            rational: false,
            lambda: None,
            a_real: None,
            a_imag: None,
            amp_real: None,
            amp_imag: None,
            rho_real: None,
            rho_imag: None,
        }
    }

    pub fn parse(&self) -> Result<State, CliError> {
        if self.format != STATE_FORMAT {
            return Err(CliError::input("UNKNOWN_FORMAT", format!("expected {STATE_FORMAT}, got {:?}", self.format)));
        }
        let n = self.n;
        let kind = self.kind.as_str();
        match kind {
            "dicke_diagonal" => {
                let lam = need(&self.lambda, "lambda", kind)?;
                if lam.len() != n + 1 {
                    return Err(CliError::input("DIM_MISMATCH", format!("lambda needs {} entries", n + 1)));
                }
                if self.rational {
                    let exact = ExactMixture::new(lam.iter().map(Num::rational).collect::<Result<_, _>>()?)?;
                    Ok(State::Diagonal { lambda: exact.to_float(), exact: Some(exact) })
                } else {
                    Ok(State::Diagonal { lambda: DickeMixture::new(floats(lam)?)?, exact: None })
                }
            }
            "symmetric" => {
                let a = complex_matrix(need(&self.a_real, "a_real", kind)?, self.a_imag.as_ref(), n + 1, "a")?;
                Ok(State::Symmetric(SymmetricCoeffs::new(n, a)?))
            }
            "pure_dense" => {
                let re = floats(need(&self.amp_real, "amp_real", kind)?)?;
                let im = match &self.amp_imag {
                    Some(v) => floats(v)?,
                    None => vec![0.0; re.len()],
                };
                if re.len() != im.len() {
                    return Err(CliError::input("DIM_MISMATCH", "amp_real and amp_imag differ in length"));
                }
                let amps = CVec::from_iterator(re.len(), re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)));
                Ok(State::Pure(PureVector::new(n, amps)?))
            }
            "dense" => {
                let dim = 1usize
                    .checked_shl(n as u32)
                    .filter(|_| n <= edlkit_core::qcore::MAX_DENSE_QUBITS)
                    .ok_or(edlkit_core::Error::TooLarge(n))?;
                let m = complex_matrix(need(&self.rho_real, "rho_real", kind)?, self.rho_imag.as_ref(), dim, "rho")?;
                Ok(State::Dense(DenseState::from_matrix(n, m)?))
            }
            other => Err(CliError::input("UNKNOWN_KIND", format!("unknown state kind {other:?}"))),
        }
    }

    pub fn from_state(s: &State) -> Self {
        match s {
            State::Diagonal { exact: Some(e), .. } => {
                let mut f = StateFile::blank(e.n(), "dicke_diagonal");
                f.rational = true;
                f.lambda = Some(e.lambda().iter().map(|r| Num::Exact(r.to_string())).collect());
                f
            }
            State::Diagonal { lambda, exact: None } => {
                let mut f = StateFile::blank(lambda.n(), "dicke_diagonal");
                f.lambda = Some(nums(lambda.lambda()));
                f
            }
            State::Symmetric(a) => {
                let mut f = StateFile::blank(a.n(), "symmetric");
                let (re, im) = matrix_parts(a.matrix());
                f.a_real = Some(re);
                f.a_imag = Some(im);
                f
            }
            State::Pure(p) => {
                let mut f = StateFile::blank(p.n(), "pure_dense");
                f.amp_real = Some(p.amplitudes().iter().map(|z| Num::Float(z.re)).collect());
                f.amp_imag = Some(p.amplitudes().iter().map(|z| Num::Float(z.im)).collect());
                f
            }
            State::Dense(d) => {
                let mut f = StateFile::blank(d.n(), "dense");
                let (re, im) = matrix_parts(d.matrix());
                f.rho_real = Some(re);
                f.rho_imag = Some(im);
                f
            }
        }
    }
}

impl State {
    pub fn n(&self) -> usize {
        match self {
            State::Diagonal { lambda, .. } => lambda.n(),
            State::Symmetric(a) => a.n(),
            State::Pure(p) => p.n(),
            State::Dense(d) => d.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            State::Diagonal { .. } => "dicke_diagonal",
            State::Symmetric(_) => "symmetric",
            State::Pure(_) => "pure_dense",
            State::Dense(_) => "dense",
        }
    }

    pub fn to_dense(&self) -> Result<DenseState, CliError> {
        Ok(match self {
            State::Diagonal { lambda, .. } => lambda.to_coeffs().to_dense()?,
            State::Symmetric(a) => a.to_dense()?,
            State::Pure(p) => p.density(),
            State::Dense(d) => d.clone(),
        })
    }

    /// The state vector when the state has rank one.
    pub fn as_pure(&self) -> Result<Option<PureVector>, CliError> {
        if let State::Pure(p) = self {
            return Ok(Some(p.clone()));
        }
        let rho = self.to_dense()?;
        let eig = qcore::eigh(rho.matrix());
        let (top, &val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty spectrum");
        if val < 1.0 - 1e-9 {
            return Ok(None);
        }
        let v = eig.eigenvectors.column(top).into_owned();
        Ok(Some(PureVector::normalized(rho.n(), v)?))
    }
}

/// `edlkit-graph-v1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub format: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn parse(&self) -> Result<SimpleGraph, CliError> {
        if self.format != GRAPH_FORMAT {
            return Err(CliError::input("UNKNOWN_FORMAT", format!("expected {GRAPH_FORMAT}, got {:?}", self.format)));
        }
        let e: Vec<(usize, usize)> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        Ok(SimpleGraph::new(self.n, &e)?)
    }

    pub fn from_graph(g: &SimpleGraph) -> Self {
        GraphFile { format: GRAPH_FORMAT.into(), n: g.n(), edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect() }
    }
}

/// `edlkit-collection-v1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionFile {
    pub format: String,
    pub n: usize,
    pub subsets: Vec<Vec<usize>>,
}

impl CollectionFile {
    pub fn parse(&self) -> Result<SubsetCollection, CliError> {
        if self.format != COLLECTION_FORMAT {
            return Err(CliError::input(
                "UNKNOWN_FORMAT",
                format!("expected {COLLECTION_FORMAT}, got {:?}", self.format),
            ));
        }
        Ok(SubsetCollection::from_index_lists(self.n, &self.subsets)?)
    }

    pub fn from_collection(c: &SubsetCollection) -> Self {
        CollectionFile { format: COLLECTION_FORMAT.into(), n: c.n(), subsets: c.to_index_lists() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub real: Vec<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<Num>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let (real, imag) = matrix_parts(m);
        MatrixJson { real, imag: Some(imag) }
    }

    pub fn parse(&self, dim: usize, name: &str) -> Result<CMat, CliError> {
        complex_matrix(&self.real, self.imag.as_ref(), dim, name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub subset: Vec<usize>,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub subset: Vec<usize>,
    pub p: MatrixJson,
    pub q: MatrixJson,
}

/// `edlkit-witness-v1`: `W = sum_S H_S (x) I`, plus optional decompositions
/// `W = P + Q^{T_S}` per bipartition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub format: String,
    pub n: usize,
    pub blocks: Vec<BlockJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateJson>,
}

impl WitnessFile {
    pub fn parse(&self) -> Result<Witness, CliError> {
        if self.format != WITNESS_FORMAT {
            return Err(CliError::input("UNKNOWN_FORMAT", format!("expected {WITNESS_FORMAT}, got {:?}", self.format)));
        }
        let n = self.n;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let s = Subset::from_indices(n, &b.subset)?;
            blocks.push((s, b.matrix.parse(1 << s.len(), "witness block")?));
        }
        let mut w = Witness::from_blocks(n, blocks)?;
        for ct in &self.certificates {
            let s = Subset::from_indices(n, &ct.subset)?;
            w.certificates.push(Certificate { s, p: ct.p.parse(1 << n, "P")?, q: ct.q.parse(1 << n, "Q")? });
        }
        Ok(w)
    }

    pub fn from_witness(w: &Witness) -> Self {
        WitnessFile {
            format: WITNESS_FORMAT.into(),
            n: w.n(),
            blocks: w
                .blocks()
                .iter()
                .map(|(s, h)| BlockJson { subset: s.indices(), matrix: MatrixJson::from_matrix(h) })
                .collect(),
            certificates: w
                .certificates
                .iter()
                .map(|ct| CertificateJson {
                    subset: ct.s.indices(),
                    p: MatrixJson::from_matrix(&ct.p),
                    q: MatrixJson::from_matrix(&ct.q),
                })
                .collect(),
        }
    }
}
