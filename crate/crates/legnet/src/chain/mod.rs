//! Integer chains.
//!
//! A 1-chain is a finite sum of arcs with integer multiplicities. Arcs are
//! identified by [`Handle`]s rather than by geometry, so cancellation is exact:
//! the same arc traversed backwards is the same handle with the opposite sign.
//! 2-chains live in [`region`]; circuits of crossing curves in [`circuit`].

pub mod circuit;
pub mod region;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::s3::{path_length, SampledPath, C2};

pub use circuit::{extract_circuits, find_crossings, ArcRef, Circuit, Crossing, PtscCurve};
pub use region::{multiplicity_at, Chain2, IsoDiagnostics, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("arc {0} is not registered")]
    UnknownArc(Handle),
    #[error("arc endpoints do not match its geometry ({0:e} apart)")]
    EndpointMismatch(f64),
    #[error("cannot resolve region arrangement: {0}")]
    Arrangement(String),
    #[error("invalid region: {0}")]
    Region(String),
    #[error("ambiguous crossing data: {0}")]
    Crossing(String),
    #[error("component {index} is not positively transverse (η = {eta:e} at t = {t})")]
    NotTransverse { index: usize, t: f64, eta: f64 },
}

static NEXT_HANDLE: AtomicU64 = AtomicU64::new(1);
static NEXT_POINT: AtomicU64 = AtomicU64::new(1);

/// Identity of an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handle(pub u64);

impl Handle {
    /// A handle never returned before in this process.
    pub fn fresh() -> Handle {
        Handle(NEXT_HANDLE.fetch_add(1, Ordering::Relaxed))
    }

    /// The first of `n` consecutive fresh handles.
    pub fn reserve(n: u64) -> Handle {
        Handle(NEXT_HANDLE.fetch_add(n.max(1), Ordering::Relaxed))
    }

    pub fn offset(self, k: u64) -> Handle {
        Handle(self.0 + k)
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

impl Serialize for Handle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Handle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.strip_prefix('h')
            .and_then(|n| n.parse().ok())
            .map(Handle)
            .ok_or_else(|| serde::de::Error::custom(format!("bad handle id `{s}`")))
    }
}

/// Identity of an arc endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub u64);

impl PointId {
    pub fn fresh() -> PointId {
        PointId(NEXT_POINT.fetch_add(1, Ordering::Relaxed))
    }

    pub fn reserve(n: u64) -> PointId {
        PointId(NEXT_POINT.fetch_add(n.max(1), Ordering::Relaxed))
    }

    pub fn offset(self, k: u64) -> PointId {
        PointId(self.0 + k)
    }
}

/// A formal sum of arcs. Zero multiplicities are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Chain1 {
    terms: BTreeMap<Handle, i64>,
}

impl Chain1 {
    pub fn new() -> Self {
        Chain1::default()
    }

    pub fn arc(h: Handle, m: i64) -> Self {
        let mut c = Chain1::new();
        c.add_term(h, m);
        c
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Handle, i64)>) -> Self {
        let mut c = Chain1::new();
        for (h, m) in terms {
            c.add_term(h, m);
        }
        c
    }

    pub fn add_term(&mut self, h: Handle, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.terms.entry(h).or_insert(0);
        *e += m;
        if *e == 0 {
            self.terms.remove(&h);
        }
    }

    pub fn add_assign(&mut self, other: &Chain1) {
        for (&h, &m) in &other.terms {
            self.add_term(h, m);
        }
    }

    pub fn sub_assign(&mut self, other: &Chain1) {
        for (&h, &m) in &other.terms {
            self.add_term(h, -m);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn multiplicity(&self, h: Handle) -> i64 {
        self.terms.get(&h).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Handle, i64)> + '_ {
        self.terms.iter().map(|(&h, &m)| (h, m))
    }

    /// Replaces every occurrence of `from` by `sign·to`.
    pub fn substitute(&mut self, from: Handle, to: Handle, sign: i64) {
        if let Some(m) = self.terms.remove(&from) {
            self.add_term(to, sign * m);
        }
    }
}

/// `a + b`.
pub fn chain_add(a: &Chain1, b: &Chain1) -> Chain1 {
    let mut c = a.clone();
    c.add_assign(b);
    c
}

/// `−a`.
pub fn chain_negate(a: &Chain1) -> Chain1 {
    Chain1 { terms: a.terms.iter().map(|(&h, &m)| (h, -m)).collect() }
}

impl std::ops::Add for &Chain1 {
    type Output = Chain1;
    fn add(self, o: &Chain1) -> Chain1 {
        chain_add(self, o)
    }
}

impl std::ops::Sub for &Chain1 {
    type Output = Chain1;
    fn sub(self, o: &Chain1) -> Chain1 {
        let mut c = self.clone();
        c.sub_assign(o);
        c
    }
}

impl std::ops::Neg for &Chain1 {
    type Output = Chain1;
    fn neg(self) -> Chain1 {
        chain_negate(self)
    }
}

impl Serialize for Chain1 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            handle: Handle,
            mult: i64,
        }
        #[derive(Serialize)]
        struct Doc {
            terms: Vec<Term>,
        }
        Doc { terms: self.terms().map(|(handle, mult)| Term { handle, mult }).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Chain1 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            handle: Handle,
            mult: i64,
        }
        #[derive(Deserialize)]
        struct Doc {
            terms: Vec<Term>,
        }
        let doc = Doc::deserialize(d)?;
        Ok(Chain1::from_terms(doc.terms.into_iter().map(|t| (t.handle, t.mult))))
    }
}

/// Signed multiset of points, the boundary of a 1-chain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointChain {
    terms: BTreeMap<PointId, i64>,
}

impl PointChain {
    pub fn add_term(&mut self, p: PointId, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.terms.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.terms.remove(&p);
        }
    }

    pub fn add_assign(&mut self, other: &PointChain) {
        for (&p, &m) in &other.terms {
            self.add_term(p, m);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn multiplicity(&self, p: PointId) -> i64 {
        self.terms.get(&p).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (PointId, i64)> + '_ {
        self.terms.iter().map(|(&p, &m)| (p, m))
    }
}

/// An oriented arc: a handle, its geometry and its endpoint identities.
#[derive(Clone, Debug)]
pub struct OrientedArc {
    pub handle: Handle,
    pub geometry: Option<Arc<SampledPath>>,
    pub tail: PointId,
    pub head: PointId,
    pub length: f64,
}

impl OrientedArc {
    /// An arc with geometry; its length is computed by quadrature.
    pub fn new(handle: Handle, geometry: SampledPath, tail: PointId, head: PointId) -> Self {
        let length = path_length(&geometry);
        OrientedArc { handle, geometry: Some(Arc::new(geometry)), tail, head, length }
    }

    /// An arc known only by its endpoints and length.
    pub fn abstract_arc(handle: Handle, tail: PointId, head: PointId, length: f64) -> Self {
        OrientedArc { handle, geometry: None, tail, head, length }
    }

    /// Checks the geometry endpoints against the supplied positions.
    pub fn check_endpoints(&self, tail: &C2, head: &C2, tol: f64) -> Result<(), ChainError> {
        if let Some(g) = &self.geometry {
            let (Some(a), Some(b)) = (g.start(), g.end()) else { return Ok(()) };
            let d = a.distance(tail).max(b.distance(head));
            if d > tol {
                return Err(ChainError::EndpointMismatch(d));
            }
        }
        Ok(())
    }
}

/// Arcs by handle.
#[derive(Clone, Debug, Default)]
pub struct ArcRegistry {
    arcs: HashMap<Handle, OrientedArc>,
}

impl ArcRegistry {
    pub fn new() -> Self {
        ArcRegistry::default()
    }

    pub fn insert(&mut self, arc: OrientedArc) {
        self.arcs.insert(arc.handle, arc);
    }

    pub fn get(&self, h: Handle) -> Option<&OrientedArc> {
        self.arcs.get(&h)
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// `Σ m·(head − tail)`.
pub fn boundary(c: &Chain1, arcs: &ArcRegistry) -> Result<PointChain, ChainError> {
    let mut out = PointChain::default();
    for (h, m) in c.terms() {
        let arc = arcs.get(h).ok_or(ChainError::UnknownArc(h))?;
        out.add_term(arc.head, m);
        out.add_term(arc.tail, -m);
    }
    Ok(out)
}

/// `Σ |m|·len`.
pub fn chain_length(c: &Chain1, arcs: &ArcRegistry) -> Result<f64, ChainError> {
    c.terms().try_fold(0.0, |acc, (h, m)| {
        let arc = arcs.get(h).ok_or(ChainError::UnknownArc(h))?;
        Ok(acc + m.unsigned_abs() as f64 * arc.length)
    })
}
