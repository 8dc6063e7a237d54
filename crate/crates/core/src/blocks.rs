//! Product-block systems: the data model, the pair condition and its
//! verifier, summary statistics, and validity-preserving symmetries.
//!
//! A system over GF(q) is a family of `q` blocks `B_s ⊆ GF(q)` indexed by
//! the field elements. It is valid when `(b - a)(s - r) != 1` for every
//! `a ∈ B_r`, `b ∈ B_s`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Field, FieldElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("expected {expected} blocks for GF({expected}), got {got}")]
    BlockCount { expected: u32, got: usize },
    #[error("block {label}: member {code} is out of range for GF({q})")]
    MemberOutOfRange { label: usize, code: u64, q: u32 },
    #[error("block {label}: member {code} appears more than once")]
    DuplicateMember { label: usize, code: u32 },
    #[error("scale factor must be nonzero")]
    ZeroScale,
}

/// `q` blocks indexed by the elements of GF(q); each block is kept sorted.
#[derive(Clone)]
pub struct BlockSystem {
    field: Arc<Field>,
    blocks: Vec<Vec<FieldElement>>,
}

impl PartialEq for BlockSystem {
    fn eq(&self, other: &Self) -> bool {
        self.field.spec() == other.field.spec() && self.blocks == other.blocks
    }
}

impl Eq for BlockSystem {}

impl fmt::Debug for BlockSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockSystem")
            .field("q", &self.q())
            .field("blocks", &self.codes())
            .finish()
    }
}

impl BlockSystem {
    pub fn new(field: Arc<Field>, blocks: Vec<Vec<FieldElement>>) -> Result<Self, BlockError> {
        let q = field.order();
        if blocks.len() != q as usize {
            return Err(BlockError::BlockCount {
                expected: q,
                got: blocks.len(),
            });
        }
        let mut blocks = blocks;
        for (label, block) in blocks.iter_mut().enumerate() {
            if let Some(x) = block.iter().find(|x| x.code() >= q) {
                return Err(BlockError::MemberOutOfRange {
                    label,
                    code: x.code() as u64,
                    q,
                });
            }
            block.sort_unstable();
            if let Some(w) = block.windows(2).find(|w| w[0] == w[1]) {
                return Err(BlockError::DuplicateMember {
                    label,
                    code: w[0].code(),
                });
            }
        }
        Ok(BlockSystem { field, blocks })
    }

    pub fn from_codes(field: Arc<Field>, blocks: Vec<Vec<u32>>) -> Result<Self, BlockError> {
        let blocks = blocks
            .into_iter()
            .map(|b| b.into_iter().map(FieldElement::from_code).collect())
            .collect();
        Self::new(field, blocks)
    }

    /// Every block equal to the same set.
    pub fn constant(field: Arc<Field>, block: &[FieldElement]) -> Result<Self, BlockError> {
        let q = field.order() as usize;
        Self::new(field, vec![block.to_vec(); q])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }

    /// `B_s`, sorted ascending.
    pub fn block(&self, label: FieldElement) -> &[FieldElement] {
        &self.blocks[label.index()]
    }

    pub fn blocks(&self) -> &[Vec<FieldElement>] {
        &self.blocks
    }

    pub fn codes(&self) -> Vec<Vec<u32>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|x| x.code()).collect())
            .collect()
    }

    /// Pairs `(label, block)` in label order.
    pub fn iter(&self) -> impl Iterator<Item = (FieldElement, &[FieldElement])> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(s, b)| (FieldElement::from_code(s as u32), b.as_slice()))
    }

    /// Distinct symbols used by the system.
    pub fn symbols(&self) -> BTreeSet<FieldElement> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Elements that belong to every block.
    pub fn shared_elements(&self) -> Vec<FieldElement> {
        let mut iter = self.blocks.iter();
        let first = match iter.next() {
            Some(b) => b.clone(),
            None => return Vec::new(),
        };
        iter.fold(first, |acc, b| {
            acc.into_iter()
                .filter(|x| b.binary_search(x).is_ok())
                .collect()
        })
    }

    /// The system `B_s = {a}` for all `s`, for some `a`.
    pub fn is_constant_singleton(&self) -> bool {
        let first = &self.blocks[0];
        first.len() == 1 && self.blocks.iter().all(|b| b == first)
    }
}

/// A violating quadruple: `a ∈ B_r`, `b ∈ B_s`, `r < s`, `(b - a)(s - r) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conflict {
    pub r: FieldElement,
    pub a: FieldElement,
    pub s: FieldElement,
    pub b: FieldElement,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.r, self.a, self.s, self.b)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn count(&self) -> usize {
        self.conflicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemStats {
    pub k_min: usize,
    pub k_max: usize,
    /// Present iff all blocks have the same size.
    pub uniform_k: Option<usize>,
    /// Exact number of distinct symbols used.
    pub t: usize,
    /// Total size `Σ |B_s|`.
    pub v: usize,
}

/// The pair condition for `a ∈ B_r`, `b ∈ B_s`.
#[inline]
pub fn check_pair(
    field: &Field,
    r: FieldElement,
    a: FieldElement,
    s: FieldElement,
    b: FieldElement,
) -> bool {
    field.mul(field.sub(b, a), field.sub(s, r)) != FieldElement::ONE
}

/// `forbidden[d]` is the single element difference `b - a` that conflicts
/// with label difference `d = s - r`, i.e. `d^{-1}`. Index 0 is unused.
pub fn forbidden_differences(field: &Field) -> Vec<FieldElement> {
    std::iter::once(FieldElement::ZERO)
        .chain(
            field
                .nonzero_elements()
                .map(|d| field.inv(d).expect("nonzero")),
        )
        .collect()
}

/// Every conflicting cross-block pair, reported once with `r < s`,
/// sorted by `(r, a, s, b)`.
pub fn verify(system: &BlockSystem) -> ConflictReport {
    let field = system.field();
    let forbidden = forbidden_differences(field);
    let mut conflicts = Vec::new();
    for (r, block_r) in system.iter() {
        if block_r.is_empty() {
            continue;
        }
        for (s, block_s) in system.iter().skip(r.index() + 1) {
            if block_s.is_empty() {
                continue;
            }
            let need = forbidden[field.sub(s, r).index()];
            for &a in block_r {
                let b = field.add(a, need);
                if block_s.binary_search(&b).is_ok() {
                    conflicts.push(Conflict { r, a, s, b });
                }
            }
        }
    }
    conflicts.sort_unstable();
    ConflictReport { conflicts }
}

pub fn is_valid(system: &BlockSystem) -> bool {
    let field = system.field();
    let forbidden = forbidden_differences(field);
    system.iter().all(|(r, block_r)| {
        system.iter().skip(r.index() + 1).all(|(s, block_s)| {
            let need = forbidden[field.sub(s, r).index()];
            block_r
                .iter()
                .all(|&a| block_s.binary_search(&field.add(a, need)).is_err())
        })
    })
}

pub fn stats(system: &BlockSystem) -> SystemStats {
    let sizes = system.blocks().iter().map(Vec::len);
    let k_min = sizes.clone().min().unwrap_or(0);
    let k_max = sizes.clone().max().unwrap_or(0);
    SystemStats {
        k_min,
        k_max,
        uniform_k: (k_min == k_max).then_some(k_min),
        t: system.symbols().len(),
        v: sizes.sum(),
    }
}

/// Symmetries of the pair condition. Each maps valid systems to valid systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    /// Every member `x` becomes `x + c`.
    TranslateElements(FieldElement),
    /// `B'_s = B_{s - c}`.
    TranslateLabels(FieldElement),
    /// `B'_s = { λx : x ∈ B_{λs} }`.
    Scale(FieldElement),
    /// `B'_s = { -x : x ∈ B_{-s} }`.
    Negate,
}

pub fn transform(system: &BlockSystem, kind: Transform) -> Result<BlockSystem, BlockError> {
    let field = system.field();
    let map_members = |block: &[FieldElement], f: &dyn Fn(FieldElement) -> FieldElement| {
        block.iter().map(|&x| f(x)).collect::<Vec<_>>()
    };
    let blocks: Vec<Vec<FieldElement>> = match kind {
        Transform::TranslateElements(c) => system
            .blocks()
            .iter()
            .map(|b| map_members(b, &|x| field.add(x, c)))
            .collect(),
        Transform::TranslateLabels(c) => field
            .elements()
            .map(|s| system.block(field.sub(s, c)).to_vec())
            .collect(),
        Transform::Scale(lambda) => {
            if lambda == FieldElement::ZERO {
                return Err(BlockError::ZeroScale);
            }
            field
                .elements()
                .map(|s| {
                    map_members(system.block(field.mul(lambda, s)), &|x| {
                        field.mul(lambda, x)
                    })
                })
                .collect()
        }
        Transform::Negate => field
            .elements()
            .map(|s| map_members(system.block(field.neg(s)), &|x| field.neg(x)))
            .collect(),
    };
    BlockSystem::new(system.field_arc().clone(), blocks)
}
