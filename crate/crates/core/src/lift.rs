//! 2-lifts, iterated lift specifications and the covering map.
//!
//! A 2-lift doubles every node. Node `x` of the base becomes `x` (copy 0) and
//! `x + n` (copy 1), where `n` is the size of that node class. Base edge
//! `e = (v, c)` becomes lifted edges `2e` and `2e + 1`:
//!
//! | sign | edge `2e`      | edge `2e + 1`  |
//! |------|----------------|----------------|
//! | 0    | `(v0, c0)`     | `(v1, c1)`     |
//! | 1    | `(v0, c1)`     | `(v1, c0)`     |
//!
//! With this layout the covering map is `id mod base_size` at every depth.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TannerGraph;

/// One bit per edge of the graph being lifted: `false` keeps the two edge
/// copies parallel, `true` crosses them.
///
/// Ordering is lexicographic from edge 0, which is the tie-break order used
/// by guided selection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SignVector(Vec<bool>);

impl SignVector {
    pub fn new(bits: Vec<bool>) -> Self {
        SignVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        SignVector(vec![false; len])
    }

    /// The vector whose bit `j` is bit `j` of `index`. Enumerating
    /// `0..2^len` visits every sign vector of length `len`.
    pub fn from_index(len: usize, index: u64) -> Self {
        SignVector((0..len).map(|j| j < 64 && index >> j & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Number of crossed edges mod 2.
    pub fn parity(&self) -> bool {
        self.0.iter().filter(|&&b| b).count() % 2 == 1
    }

    /// Lowercase hex with bit `i` stored at position `i % 8` of byte `i / 8`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.0.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        hex::encode(bytes)
    }

    pub fn from_hex(len: usize, text: &str) -> Result<Self> {
        let bytes = hex::decode(text).map_err(|e| Error::Parse(format!("sign vector hex: {e}")))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Parse(format!(
                "sign vector of length {len} needs {} hex bytes, found {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let bits: Vec<bool> = (0..bytes.len() * 8)
            .map(|i| bytes[i / 8] >> (i % 8) & 1 == 1)
            .collect();
        if bits[len..].iter().any(|&b| b) {
            return Err(Error::Parse(
                "sign vector hex has bits set past its length".into(),
            ));
        }
        Ok(SignVector(bits[..len].to_vec()))
    }
}

impl From<Vec<bool>> for SignVector {
    fn from(bits: Vec<bool>) -> Self {
        SignVector(bits)
    }
}

/// Builds a sign vector from 0/1 integers; any nonzero value is a crossing.
impl From<&[u8]> for SignVector {
    fn from(bits: &[u8]) -> Self {
        SignVector(bits.iter().map(|&b| b != 0).collect())
    }
}

/// Applies one 2-lift to `g`.
pub fn apply_2lift(g: &TannerGraph, signs: &SignVector) -> Result<TannerGraph> {
    if signs.len() != g.num_edges() {
        return Err(Error::SignLengthMismatch {
            expected: g.num_edges(),
            got: signs.len(),
            stage: None,
        });
    }
    let (nv, nc) = (g.num_vars(), g.num_checks());
    let mut edges = Vec::with_capacity(2 * g.num_edges());
    for (&(v, c), &crossed) in g.edges().iter().zip(signs.bits()) {
        if crossed {
            edges.push((v, c + nc));
            edges.push((v + nv, c));
        } else {
            edges.push((v, c));
            edges.push((v + nv, c + nc));
        }
    }
    TannerGraph::new(2 * nv, 2 * nc, edges)
}

/// Independent fair bits, one per edge.
pub fn random_sign_vector<R: Rng + ?Sized>(edge_count: usize, rng: &mut R) -> SignVector {
    SignVector((0..edge_count).map(|_| rng.random::<bool>()).collect())
}

/// A protograph plus the sign vectors of successive 2-lifts.
///
/// Stage `i` acts on the output of stage `i - 1` and so has `E * 2^i` bits,
/// where `E` is the protograph edge count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LiftSpecDocument", into = "LiftSpecDocument")]
pub struct LiftSpec {
    pub base: TannerGraph,
    pub stages: Vec<SignVector>,
    /// Seed the stages were drawn from, when they were drawn at random.
    pub seed: Option<u64>,
}

impl LiftSpec {
    pub fn new(base: TannerGraph, stages: Vec<SignVector>, seed: Option<u64>) -> Result<Self> {
        let spec = LiftSpec { base, stages, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks stage lengths against `E, 2E, 4E, ...`.
    pub fn validate(&self) -> Result<()> {
        let mut expected = self.base.num_edges();
        for (i, s) in self.stages.iter().enumerate() {
            if s.len() != expected {
                return Err(Error::SignLengthMismatch {
                    expected,
                    got: s.len(),
                    stage: Some(i),
                });
            }
            expected *= 2;
        }
        Ok(())
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn blocklength(&self) -> usize {
        self.base.num_vars() << self.stages.len()
    }

    pub fn description_bits(&self) -> DescriptionSize {
        description_bits(self)
    }
}

/// Folds [`apply_2lift`] over the stages of `spec`.
pub fn apply_lift_spec(spec: &LiftSpec) -> Result<TannerGraph> {
    let mut g = spec.base.clone();
    for (i, s) in spec.stages.iter().enumerate() {
        g = apply_2lift(&g, s).map_err(|e| match e {
            Error::SignLengthMismatch { expected, got, .. } => Error::SignLengthMismatch {
                expected,
                got,
                stage: Some(i),
            },
            other => other,
        })?;
    }
    Ok(g)
}

/// Base node covered by node `lifted_id` of an `n`-stage lift of a node
/// class with `base_size` members.
pub fn project(lifted_id: usize, n: usize, base_size: usize) -> Result<usize> {
    let limit = lifted_size(base_size, n)?;
    if lifted_id >= limit {
        return Err(Error::InvalidNode {
            kind: "lifted",
            id: lifted_id,
            limit,
        });
    }
    Ok(lifted_id % base_size)
}

fn lifted_size(base_size: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|n| 1usize.checked_shl(n))
        .and_then(|f| f.checked_mul(base_size))
        .ok_or_else(|| {
            Error::InvalidArgument(format!("{n}-stage lift of {base_size} nodes overflows"))
        })
}

/// Covering-map coordinates of a lifted node: the base node it covers and
/// the copy chosen at each stage.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeLabel {
    pub base_id: usize,
    pub path: Vec<bool>,
}

impl NodeLabel {
    pub fn of(lifted_id: usize, n: usize, base_size: usize) -> Result<Self> {
        let base_id = project(lifted_id, n, base_size)?;
        let block = lifted_id / base_size;
        let path = (0..n).map(|i| block >> i & 1 == 1).collect();
        Ok(NodeLabel { base_id, path })
    }

    pub fn to_id(&self, base_size: usize) -> usize {
        let block = self
            .path
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
        block * base_size + self.base_id
    }
}

/// Bits needed to describe a lift: the iterated 2-lift sign vectors versus
/// one arbitrary permutation per protograph edge for a direct `2^n`-lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionSize {
    pub two_lift_bits: u128,
    pub conventional_bits: u128,
}

pub fn description_bits(spec: &LiftSpec) -> DescriptionSize {
    description_size(spec.base.num_edges() as u64, spec.num_stages() as u32)
}

/// `E * (2^n - 1)` against `E * ceil(log2((2^n)!))`.
pub fn description_size(edges: u64, stages: u32) -> DescriptionSize {
    let e = edges as u128;
    let lift_factor = 1u128 << stages;
    DescriptionSize {
        two_lift_bits: e * (lift_factor - 1),
        conventional_bits: e * ceil_log2_factorial(lift_factor as u64) as u128,
    }
}

/// Exact `ceil(log2(n!))`.
pub fn ceil_log2_factorial(n: u64) -> u64 {
    let f = product(1, n);
    let bits = f.bits();
    // n! is a power of two only for n <= 2.
    if f.trailing_zeros() == Some(bits - 1) {
        bits - 1
    } else {
        bits
    }
}

fn product(lo: u64, hi: u64) -> BigUint {
    if lo > hi {
        return BigUint::from(1u32);
    }
    if hi - lo < 16 {
        return (lo..=hi).fold(BigUint::from(1u32), |acc, k| acc * k);
    }
    let mid = lo + (hi - lo) / 2;
    product(lo, mid) * product(mid + 1, hi)
}

const LIFT_SPEC_FORMAT: &str = "lift-spec";
const LIFT_SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageDocument {
    pub length: usize,
    pub hex: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftSpecDocument {
    pub format: String,
    pub version: u32,
    pub base: TannerGraph,
    pub stages: Vec<StageDocument>,
    pub seed: Option<u64>,
}

impl From<LiftSpec> for LiftSpecDocument {
    fn from(spec: LiftSpec) -> Self {
        LiftSpecDocument {
            format: LIFT_SPEC_FORMAT.into(),
            version: LIFT_SPEC_VERSION,
            stages: spec
                .stages
                .iter()
                .map(|s| StageDocument {
                    length: s.len(),
                    hex: s.to_hex(),
                })
                .collect(),
            base: spec.base,
            seed: spec.seed,
        }
    }
}

impl TryFrom<LiftSpecDocument> for LiftSpec {
    type Error = Error;

    fn try_from(doc: LiftSpecDocument) -> Result<Self> {
        if doc.format != LIFT_SPEC_FORMAT || doc.version != LIFT_SPEC_VERSION {
            return Err(Error::Parse(format!(
                "unsupported lift spec {:?} version {}",
                doc.format, doc.version
            )));
        }
        let stages = doc
            .stages
            .iter()
            .map(|s| SignVector::from_hex(s.length, &s.hex))
            .collect::<Result<Vec<_>>>()?;
        LiftSpec::new(doc.base, stages, doc.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Girth;
    use crate::seed;
    use proptest::prelude::*;
    use rand::SeedableRng;

    const SEED_42_FIXTURE: [u8; 4] = [0, 1, 0, 1];

    fn k22() -> TannerGraph {
        TannerGraph::from_multiplicity_matrix(&[[1, 1], [1, 1]]).unwrap()
    }

    fn signs(bits: &[u8]) -> SignVector {
        SignVector::from(bits)
    }

    #[test]
    fn single_edge_lifts() {
        let g = TannerGraph::from_multiplicity_matrix(&[[1]]).unwrap();
        let flat = apply_2lift(&g, &signs(&[0])).unwrap();
        assert_eq!(flat.edges(), &[(0, 0), (1, 1)]);
        let twisted = apply_2lift(&g, &signs(&[1])).unwrap();
        assert_eq!(twisted.edges(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn twisted_four_cycle_becomes_eight_cycle() {
        let lifted = apply_2lift(&k22(), &signs(&[1, 0, 0, 0])).unwrap();
        assert_eq!(
            (lifted.num_vars(), lifted.num_checks(), lifted.num_edges()),
            (4, 4, 8)
        );
        assert_eq!(lifted.girth(), Girth::Finite(8));
        assert_eq!(lifted.node_degrees(), (vec![2; 4], vec![2; 4]));
    }

    #[test]
    fn sign_length_is_checked() {
        assert!(matches!(
            apply_2lift(&k22(), &signs(&[1, 0])),
            Err(Error::SignLengthMismatch {
                expected: 4,
                got: 2,
                stage: None
            })
        ));
        let spec = LiftSpec {
            base: k22(),
            stages: vec![SignVector::zeros(4), SignVector::zeros(4)],
            seed: None,
        };
        assert!(matches!(
            apply_lift_spec(&spec),
            Err(Error::SignLengthMismatch {
                expected: 8,
                got: 4,
                stage: Some(1)
            })
        ));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn random_signs() {
        let mut rng = seed::stream(1, &[]);
        assert!(random_sign_vector(0, &mut rng).is_empty());

        // Regression fixture for ChaCha8 seeded with 42.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let fixed = random_sign_vector(4, &mut rng);
        let mut again = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        assert_eq!(fixed, random_sign_vector(4, &mut again));
        assert_eq!(fixed, SignVector::from(SEED_42_FIXTURE.as_slice()));
    }

    #[test]
    fn lift_spec_examples() {
        let identity = LiftSpec::new(k22(), vec![], None).unwrap();
        assert_eq!(apply_lift_spec(&identity).unwrap(), k22());

        let flat = LiftSpec::new(k22(), vec![SignVector::zeros(4)], None).unwrap();
        let two_copies = apply_lift_spec(&flat).unwrap();
        assert_eq!(two_copies.num_edges(), 8);
        for &(v, c) in two_copies.edges() {
            assert_eq!(v / 2, c / 2, "untwisted lift never crosses copies");
        }

        let mut second = vec![0u8; 8];
        second[0] = 1;
        let spec = LiftSpec::new(k22(), vec![signs(&[1, 0, 0, 0]), signs(&second)], None).unwrap();
        let g = apply_lift_spec(&spec).unwrap();
        assert_eq!((g.num_vars(), g.num_checks(), g.num_edges()), (8, 8, 16));
        assert_eq!(g.girth(), Girth::Finite(16));
        assert_eq!(spec.blocklength(), 8);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(1, 0, 2).unwrap(), 1);
        assert_eq!(project(3, 1, 2).unwrap(), 1);
        assert!(matches!(project(4, 1, 2), Err(Error::InvalidNode { .. })));
        assert!(project(0, 0, 0).is_err());

        let label = NodeLabel::of(13, 3, 3).unwrap();
        assert_eq!(label.base_id, 1);
        assert_eq!(label.path, vec![false, false, true]);
        assert_eq!(label.to_id(3), 13);
    }

    #[test]
    fn lifted_edges_cover_base_edges() {
        let base = TannerGraph::from_multiplicity_matrix(&[[2, 1], [0, 1]]).unwrap();
        let lifted = apply_2lift(&base, &signs(&[1, 0, 1, 1])).unwrap();
        for (e, &(v, c)) in lifted.edges().iter().enumerate() {
            let pv = project(v, 1, base.num_vars()).unwrap();
            let pc = project(c, 1, base.num_checks()).unwrap();
            assert_eq!((pv, pc), base.edges()[e / 2]);
        }
    }

    #[test]
    fn description_examples() {
        assert_eq!(description_size(4, 0).two_lift_bits, 0);
        assert_eq!(description_size(4, 0).conventional_bits, 0);
        let d = description_size(4, 3);
        assert_eq!((d.two_lift_bits, d.conventional_bits), (28, 64));
        assert_eq!(ceil_log2_factorial(8), 16);
        assert_eq!(ceil_log2_factorial(1), 0);
        assert_eq!(ceil_log2_factorial(2), 1);
        assert_eq!(ceil_log2_factorial(3), 3);
        assert_eq!(ceil_log2_factorial(4), 5);
    }

    #[test]
    fn hex_round_trip_and_validation() {
        let s = signs(&[1, 0, 1, 1, 0, 0, 0, 0, 1]);
        assert_eq!(s.to_hex(), "0d01");
        assert_eq!(SignVector::from_hex(9, "0d01").unwrap(), s);
        assert!(SignVector::from_hex(9, "0d03").is_err());
        assert!(SignVector::from_hex(9, "0d").is_err());
        assert!(SignVector::from_hex(0, "").unwrap().is_empty());
    }

    #[test]
    fn lift_spec_json_round_trip() {
        let spec = LiftSpec::new(k22(), vec![signs(&[1, 0, 0, 1])], Some(5)).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: LiftSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let broken = text.replace("\"length\":4", "\"length\":5");
        assert!(serde_json::from_str::<LiftSpec>(&broken).is_err());
    }

    proptest! {
        #[test]
        fn from_index_enumerates_distinct_vectors(len in 1usize..6) {
            let all: std::collections::BTreeSet<SignVector> =
                (0..1u64 << len).map(|i| SignVector::from_index(len, i)).collect();
            prop_assert_eq!(all.len(), 1 << len);
        }

        #[test]
        fn node_label_bijection(base_size in 1usize..5, n in 0usize..4) {
            for id in 0..base_size << n {
                let label = NodeLabel::of(id, n, base_size).unwrap();
                prop_assert_eq!(label.to_id(base_size), id);
            }
        }
    }
}
