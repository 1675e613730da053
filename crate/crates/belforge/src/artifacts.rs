//! Binary artifacts for encoder parameters, PCA transforms and indexes.
//!
//! Every file starts with an 8-byte magic and a `u32` format version. All
//! integers are little-endian `u64` (flags `u8`), reals little-endian IEEE
//! 754 `f64`, matrices row-major.

use belforge_core::ann::{AnnError, FlatIndex, IvfIndex, Neighbor, NeighborSearch, PcaTransform};
use belforge_core::encoder::{EncodeError, EncoderConfig, EncoderParams};
use belforge_core::linalg::Matrix;

pub const FORMAT_VERSION: u32 = 1;
const PARAMS_MAGIC: &[u8; 8] = b"BFPARAMS";
const PCA_MAGIC: &[u8; 8] = b"BFPCA\0\0\0";
const INDEX_MAGIC: &[u8; 8] = b"BFINDEX\0";

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("not a {0} artifact")]
    Magic(&'static str),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("artifact is truncated")]
    Truncated,
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid artifact: {0}")]
    Invalid(String),
}

impl From<EncodeError> for ArtifactError {
    fn from(e: EncodeError) -> Self {
        ArtifactError::Invalid(e.to_string())
    }
}

impl From<AnnError> for ArtifactError {
    fn from(e: AnnError) -> Self {
        ArtifactError::Invalid(e.to_string())
    }
}

struct Out(Vec<u8>);

impl Out {
    fn new(magic: &[u8; 8]) -> Self {
        let mut v = magic.to_vec();
        v.extend(FORMAT_VERSION.to_le_bytes());
        Out(v)
    }

    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }

    fn u64(&mut self, x: u64) {
        self.0.extend(x.to_le_bytes());
    }

    fn len(&mut self, x: usize) {
        self.u64(x as u64);
    }

    fn reals(&mut self, xs: &[f64]) {
        self.0.reserve(xs.len() * 8);
        for x in xs {
            self.0.extend(x.to_le_bytes());
        }
    }

    fn matrix(&mut self, m: &Matrix) {
        self.len(m.rows());
        self.len(m.cols());
        self.reals(m.as_slice());
    }
}

struct In<'a> {
    bytes: &'a [u8],
}

impl<'a> In<'a> {
    fn new(bytes: &'a [u8], magic: &[u8; 8], what: &'static str) -> Result<Self, ArtifactError> {
        if bytes.len() < 12 || &bytes[..8] != magic {
            return Err(ArtifactError::Magic(what));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(ArtifactError::Version(version));
        }
        Ok(In { bytes: &bytes[12..] })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ArtifactError> {
        if self.bytes.len() < n {
            return Err(ArtifactError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, ArtifactError> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64, ArtifactError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize, ArtifactError> {
        usize::try_from(self.u64()?).map_err(|_| ArtifactError::Invalid("length overflows".into()))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>, ArtifactError> {
        let bytes = self.take(n.checked_mul(8).ok_or(ArtifactError::Truncated)?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }

    fn matrix(&mut self) -> Result<Matrix, ArtifactError> {
        let (r, c) = (self.len()?, self.len()?);
        let n = r.checked_mul(c).ok_or(ArtifactError::Truncated)?;
        let data = self.reals(n)?;
        Ok(Matrix::from_vec(r, c, data).expect("sized above"))
    }

    fn flag(&mut self) -> Result<bool, ArtifactError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(ArtifactError::Invalid(format!("flag byte {b}"))),
        }
    }

    fn end(self) -> Result<(), ArtifactError> {
        match self.bytes.len() {
            0 => Ok(()),
            n => Err(ArtifactError::Trailing(n)),
        }
    }
}

pub fn encode_params(p: &EncoderParams) -> Vec<u8> {
    let mut o = Out::new(PARAMS_MAGIC);
    let c = &p.config;
    for x in [c.n_min, c.n_max, c.buckets, c.hidden, c.dim] {
        o.len(x);
    }
    o.u8(c.normalize_output as u8);
    o.u8(c.lowercase as u8);
    o.matrix(&p.w1);
    o.reals(&p.b1);
    o.matrix(&p.w2);
    o.reals(&p.b2);
    o.0
}

/// Loads and validates encoder parameters.
pub fn decode_params(bytes: &[u8]) -> Result<EncoderParams, ArtifactError> {
    let mut r = In::new(bytes, PARAMS_MAGIC, "encoder parameter")?;
    let config = EncoderConfig {
        n_min: r.len()?,
        n_max: r.len()?,
        buckets: r.len()?,
        hidden: r.len()?,
        dim: r.len()?,
        normalize_output: r.flag()?,
        lowercase: r.flag()?,
    };
    config.validate()?;
    let w1 = r.matrix()?;
    let b1 = r.reals(config.hidden)?;
    let w2 = r.matrix()?;
    let b2 = r.reals(config.dim)?;
    r.end()?;
    let p = EncoderParams { config, w1, b1, w2, b2 };
    p.validate()?;
    Ok(p)
}

pub fn encode_pca(t: &PcaTransform) -> Vec<u8> {
    let mut o = Out::new(PCA_MAGIC);
    o.len(t.mean().len());
    o.reals(t.mean());
    o.matrix(t.projection());
    o.len(t.explained_variance().len());
    o.reals(t.explained_variance());
    o.0
}

pub fn decode_pca(bytes: &[u8]) -> Result<PcaTransform, ArtifactError> {
    let mut r = In::new(bytes, PCA_MAGIC, "PCA transform")?;
    let d = r.len()?;
    let mean = r.reals(d)?;
    let projection = r.matrix()?;
    let k = r.len()?;
    let var = r.reals(k)?;
    r.end()?;
    Ok(PcaTransform::from_parts(mean, projection, var)?)
}

/// A flat or inverted-file index as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnIndex {
    Flat(FlatIndex),
    Ivf(IvfIndex),
}

impl AnnIndex {
    pub fn flat(&self) -> &FlatIndex {
        match self {
            AnnIndex::Flat(f) => f,
            AnnIndex::Ivf(i) => i.flat(),
        }
    }

    pub fn search(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
        match self {
            AnnIndex::Flat(f) => f.search(query, top_k),
            AnnIndex::Ivf(i) => i.search(query, top_k, i.nprobe()),
        }
    }
}

impl NeighborSearch for AnnIndex {
    fn search_neighbors(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
        self.search(query, top_k)
    }

    fn is_empty(&self) -> bool {
        self.flat().is_empty()
    }
}

pub fn encode_index(index: &AnnIndex) -> Vec<u8> {
    let mut o = Out::new(INDEX_MAGIC);
    let flat = index.flat();
    o.u8(matches!(index, AnnIndex::Ivf(_)) as u8);
    o.matrix(flat.vectors());
    o.len(flat.ids().len());
    for &id in flat.ids() {
        o.u64(id);
    }
    if let AnnIndex::Ivf(ivf) = index {
        o.len(ivf.nprobe());
        o.matrix(ivf.centroids());
        for list in ivf.lists() {
            o.len(list.len());
            for &row in list {
                o.len(row);
            }
        }
    }
    o.0
}

pub fn decode_index(bytes: &[u8]) -> Result<AnnIndex, ArtifactError> {
    let mut r = In::new(bytes, INDEX_MAGIC, "index")?;
    let ivf = r.flag()?;
    let vectors = r.matrix()?;
    let n = r.len()?;
    let ids = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let flat = FlatIndex::from_stored(vectors, ids)?;
    if !ivf {
        r.end()?;
        return Ok(AnnIndex::Flat(flat));
    }
    let nprobe = r.len()?;
    let centroids = r.matrix()?;
    let mut lists = Vec::with_capacity(centroids.rows());
    for _ in 0..centroids.rows() {
        let len = r.len()?;
        if len > flat.len() {
            return Err(ArtifactError::Invalid("list longer than the index".into()));
        }
        lists.push((0..len).map(|_| r.len()).collect::<Result<Vec<_>, _>>()?);
    }
    r.end()?;
    Ok(AnnIndex::Ivf(IvfIndex::from_parts(flat, centroids, lists, nprobe)?))
}
