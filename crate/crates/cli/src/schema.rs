//! Problem-file schema. Every rational is a string (`"p/q"`, or `"a+bi"`
//! over ℚ(i)); errors carry the JSON path of the offending field.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use tqft_algebra::complexes::{Complex, Sdr};
use tqft_algebra::error::EngineError;
use tqft_algebra::exactlin::{parse_rational, GaussRational, GradedMap, GradedSpace, Mat, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl InputError {
    pub fn at(path: &str, msg: impl fmt::Display) -> Self {
        InputError(format!("{}: {}", path, msg))
    }
}

pub type Matrix = Vec<Vec<String>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: String,
    pub payload: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceIn {
    pub parity: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdrIn {
    pub space: SpaceIn,
    pub retract: SpaceIn,
    pub q: Matrix,
    /// Zero when absent.
    #[serde(default)]
    pub q_r: Option<Matrix>,
    pub i: Matrix,
    pub pi: Matrix,
    pub h: Matrix,
}

/// `Σ ε^eps · matrix`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermIn {
    pub eps: u32,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpIn {
    pub arity: usize,
    pub terms: Vec<TermIn>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdrPayload {
    pub sdr: SdrIn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferPayload {
    pub sdr: SdrIn,
    #[serde(default)]
    pub operations: Vec<OpIn>,
    #[serde(default = "default_arity")]
    pub max_arity: usize,
    #[serde(default)]
    pub mc: Option<Vec<TermIn>>,
}

fn default_arity() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeIn {
    Idempotent,
    Truncated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TqmPayload {
    pub sdr: SdrIn,
    pub operations: Vec<OpIn>,
    /// S-expression such as `"(m2 (m2 L1 L2) L3)"`.
    pub graph: String,
    pub edges: Vec<String>,
    #[serde(default = "default_mode")]
    pub mode: ModeIn,
}

fn default_mode() -> ModeIn {
    ModeIn::Idempotent
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeIn {
    pub space: SpaceIn,
    pub w: SpaceIn,
    pub q: Matrix,
    pub g: Matrix,
    pub g_minus: Matrix,
    pub i_w: Matrix,
    pub pi_w: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyModeIn {
    Simplified,
    Full,
    /// Decided from the data.
    Auto,
}

/// `U = Σ_a t_a M_a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyIn {
    pub mode: FamilyModeIn,
    pub linear: Vec<Matrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutativityPayload {
    pub hodge: HodgeIn,
    pub family: FamilyIn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyvectorIn {
    /// Coefficients of `W′`, lowest degree first.
    pub w_prime: Vec<String>,
    pub cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcovPayload {
    pub model: PolyvectorIn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaitoPayload {
    pub n: usize,
    /// Search for a good section with `S` of z-degree at most this bound
    /// instead of testing the monomial one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_bound: Option<u32>,
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| InputError::at(&path_of(e.path()), e.inner()))
}

pub fn payload<T: DeserializeOwned>(v: &Value) -> Result<T, InputError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let p = e.path().to_string();
        let path = if p == "." { "payload".to_string() } else { format!("payload.{}", p) };
        InputError::at(&path, e.inner())
    })
}

fn path_of(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." {
        "<root>".into()
    } else {
        s
    }
}

/// Scalars the front end can read.
pub trait Num: Scalar {
    const FIELD: &'static str;
    fn parse_exact(s: &str) -> Option<Self>;
}

impl Num for Rational {
    const FIELD: &'static str = "q";
    fn parse_exact(s: &str) -> Option<Self> {
        parse_rational(s)
    }
}

impl Num for GaussRational {
    const FIELD: &'static str = "qi";
    fn parse_exact(s: &str) -> Option<Self> {
        GaussRational::parse(s)
    }
}

pub fn engine(path: &str, e: EngineError) -> InputError {
    InputError::at(path, e)
}

pub fn scalar<C: Num>(s: &str, path: &str) -> Result<C, InputError> {
    C::parse_exact(s).ok_or_else(|| {
        InputError::at(path, format!("malformed {} number {:?}", if C::FIELD == "q" { "rational" } else { "Gaussian rational" }, s))
    })
}

pub fn matrix<C: Num>(m: &Matrix, rows: usize, cols: usize, path: &str) -> Result<Mat<C>, InputError> {
    if m.len() != rows {
        return Err(InputError::at(path, format!("expected {} rows, found {}", rows, m.len())));
    }
    let mut out = Mat::zeros(rows, cols, &C::zero_s());
    for (r, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(InputError::at(&format!("{}[{}]", path, r), format!("expected {} entries, found {}", cols, row.len())));
        }
        for (c, s) in row.iter().enumerate() {
            out.set(r, c, scalar(s, &format!("{}[{}][{}]", path, r, c))?);
        }
    }
    Ok(out)
}

pub fn graded<C: Num>(
    m: &Matrix,
    src: &GradedSpace,
    tgt: &GradedSpace,
    parity: u8,
    path: &str,
) -> Result<GradedMap<C>, InputError> {
    let mat = matrix(m, tgt.dim(), src.dim(), path)?;
    GradedMap::new(src.clone(), tgt.clone(), parity, mat).map_err(|e| engine(path, e))
}

pub fn space(s: &SpaceIn, path: &str) -> Result<GradedSpace, InputError> {
    if let Some(i) = s.parity.iter().position(|&p| p > 1) {
        return Err(InputError::at(&format!("{}.parity[{}]", path, i), "parity must be 0 or 1"));
    }
    match &s.labels {
        None => Ok(GradedSpace::from_parities(&s.parity)),
        Some(l) if l.len() != s.parity.len() => Err(InputError::at(
            &format!("{}.labels", path),
            format!("{} labels for {} basis vectors", l.len(), s.parity.len()),
        )),
        Some(l) => Ok(GradedSpace::new(l.clone(), s.parity.clone())),
    }
}

pub fn sdr<C: Num>(s: &SdrIn, path: &str) -> Result<Sdr<C>, InputError> {
    let v = space(&s.space, &format!("{}.space", path))?;
    let vr = space(&s.retract, &format!("{}.retract", path))?;
    let q = graded(&s.q, &v, &v, 1, &format!("{}.q", path))?;
    let qr = match &s.q_r {
        Some(m) => graded(m, &vr, &vr, 1, &format!("{}.q_r", path))?,
        None => GradedMap::zero(&vr, &vr, 1, &C::zero_s()),
    };
    Ok(Sdr {
        v: Complex::new(v.clone(), q).map_err(|e| engine(&format!("{}.q", path), e))?,
        vr: Complex::new(vr.clone(), qr).map_err(|e| engine(&format!("{}.q_r", path), e))?,
        i: graded(&s.i, &vr, &v, 0, &format!("{}.i", path))?,
        pi: graded(&s.pi, &v, &vr, 0, &format!("{}.pi", path))?,
        h: graded(&s.h, &v, &v, 1, &format!("{}.h", path))?,
    })
}

/// Renders a map back into the file format.
pub fn render<C: Scalar>(m: &Mat<C>) -> Matrix {
    (0..m.rows).map(|r| (0..m.cols).map(|c| m.get(r, c).render()).collect()).collect()
}
