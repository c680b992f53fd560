//! CNF formulas, literals and literal permutations.
//!
//! Literals use the dense encoding `2 * (var - 1) + polarity`, so negation is
//! a single XOR and literal codes double as vertex ids in the model graph.

use alloc::vec::Vec;
use core::fmt;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

/// A literal, encoded as `2 * (var - 1)` (positive) or `2 * (var - 1) + 1`
/// (negative).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Lit(u32);

impl Lit {
    /// Positive literal of the 1-based variable `var`.
    #[inline]
    pub fn positive(var: u32) -> Lit {
        debug_assert!(var >= 1);
        Lit(2 * (var - 1))
    }

    /// Negative literal of the 1-based variable `var`.
    #[inline]
    pub fn negative(var: u32) -> Lit {
        debug_assert!(var >= 1);
        Lit(2 * (var - 1) + 1)
    }

    #[inline]
    pub const fn from_code(code: u32) -> Lit {
        Lit(code)
    }

    /// Converts a signed DIMACS literal. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Lit> {
        match value {
            0 => None,
            v if v > 0 => Some(Lit::positive(v as u32)),
            v => Some(Lit::negative(v.unsigned_abs() as u32)),
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let var = i64::from(self.var());
        if self.is_negative() {
            -var
        } else {
            var
        }
    }

    #[inline]
    pub const fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// 1-based variable.
    #[inline]
    pub const fn var(self) -> u32 {
        self.0 / 2 + 1
    }

    #[inline]
    pub const fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub const fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// The positive literal of the same variable.
    #[inline]
    pub const fn positive_of(self) -> Lit {
        Lit(self.0 & !1)
    }
}

impl core::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        self.negate()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Errors raised while building a [`Formula`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("literal {lit} references variable {var} beyond num_vars = {num_vars}")]
    VariableOutOfRange { lit: i64, var: u32, num_vars: u32 },
}

/// A CNF formula.
///
/// `clauses` keeps the input order (with in-clause duplicate literals removed)
/// for re-emission. Symmetry reasoning works on the deduplicated clause set:
/// `distinct` holds each canonical (sorted) clause once, in order of first
/// appearance, and `occurrence` indexes it by literal.
#[derive(Clone)]
pub struct Formula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    distinct: Vec<Vec<Lit>>,
    lookup: HashTable<u32>,
    hasher: DefaultHashBuilder,
    occurrence: Vec<Vec<u32>>,
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Formula")
            .field("num_vars", &self.num_vars)
            .field("clauses", &self.clauses)
            .finish()
    }
}

fn canonical(clause: &[Lit]) -> Vec<Lit> {
    let mut c = clause.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

impl Formula {
    /// Builds a formula. Clauses may contain duplicate literals; they are
    /// removed (keeping first occurrences) in the ordered list.
    pub fn new<I, C>(num_vars: u32, clauses: I) -> Result<Formula, FormulaError>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[Lit]>,
    {
        let hasher = DefaultHashBuilder::default();
        let mut f = Formula {
            num_vars,
            clauses: Vec::new(),
            distinct: Vec::new(),
            lookup: HashTable::new(),
            hasher,
            occurrence: (0..2 * num_vars as usize).map(|_| Vec::new()).collect(),
        };
        for clause in clauses {
            f.push_clause(clause.as_ref())?;
        }
        Ok(f)
    }

    fn push_clause(&mut self, clause: &[Lit]) -> Result<(), FormulaError> {
        let mut ordered: Vec<Lit> = Vec::with_capacity(clause.len());
        for &l in clause {
            if l.var() > self.num_vars {
                return Err(FormulaError::VariableOutOfRange {
                    lit: l.to_dimacs(),
                    var: l.var(),
                    num_vars: self.num_vars,
                });
            }
            if !ordered.contains(&l) {
                ordered.push(l);
            }
        }
        let canon = canonical(&ordered);
        self.clauses.push(ordered);

        let hash = self.hasher.hash_one(canon.as_slice());
        let distinct = &self.distinct;
        if self
            .lookup
            .find(hash, |&id| distinct[id as usize] == canon)
            .is_some()
        {
            return Ok(());
        }
        let id = self.distinct.len() as u32;
        for &l in &canon {
            self.occurrence[l.index()].push(id);
        }
        let distinct = &self.distinct;
        let hasher = &self.hasher;
        self.lookup.insert_unique(hash, id, |&other| {
            hasher.hash_one(distinct[other as usize].as_slice())
        });
        self.distinct.push(canon);
        Ok(())
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_literals(&self) -> usize {
        2 * self.num_vars as usize
    }

    /// Clauses in input order.
    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// The deduplicated clause set, each clause sorted.
    pub fn clause_set(&self) -> &[Vec<Lit>] {
        &self.distinct
    }

    /// Ids (into [`Formula::clause_set`]) of the clauses containing `lit`.
    pub fn occurrences(&self, lit: Lit) -> &[u32] {
        &self.occurrence[lit.index()]
    }

    /// Whether the canonical form of `clause` is in the clause set.
    pub fn contains_clause(&self, clause: &[Lit]) -> bool {
        let canon = canonical(clause);
        self.contains_canonical(&canon)
    }

    fn contains_canonical(&self, canon: &[Lit]) -> bool {
        let hash = self.hasher.hash_one(canon);
        self.lookup
            .find(hash, |&id| self.distinct[id as usize] == canon)
            .is_some()
    }

    /// Checks whether `phi` maps the clause set onto itself.
    ///
    /// Only clauses touching the support are inspected; the rest are fixed.
    pub fn check_automorphism(&self, phi: &LiteralPermutation) -> Result<(), NotAutomorphism> {
        if !phi.is_negation_consistent() {
            return Err(NotAutomorphism::NegationInconsistent);
        }
        if let Some(&(l, _)) = phi.pairs().iter().find(|(l, _)| l.var() > self.num_vars) {
            return Err(NotAutomorphism::OutOfRange(l));
        }
        // dense image table: cheaper than a search per literal
        let mut table: Vec<Lit> = (0..self.num_literals() as u32).map(Lit::from_code).collect();
        for &(l, img) in phi.pairs() {
            table[l.index()] = img;
        }
        let mut image = Vec::new();
        for &(l, _) in phi.pairs() {
            for &id in self.occurrences(l) {
                let clause = &self.distinct[id as usize];
                // each clause is checked once, from its smallest moved literal
                if clause.iter().any(|&x| x < l && table[x.index()] != x) {
                    continue;
                }
                image.clear();
                image.extend(clause.iter().map(|&l| table[l.index()]));
                image.sort_unstable();
                image.dedup();
                if image != *clause && !self.contains_canonical(&image) {
                    return Err(NotAutomorphism::ClauseImageMissing { clause: id });
                }
            }
        }
        Ok(())
    }

    pub fn is_automorphism(&self, phi: &LiteralPermutation) -> bool {
        self.check_automorphism(phi).is_ok()
    }

    /// Whether `assignment` (indexed by variable - 1) satisfies every clause.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.distinct.iter().all(|c| {
            c.iter()
                .any(|l| assignment[(l.var() - 1) as usize] != l.is_negative())
        })
    }
}

/// Reason a permutation was rejected by [`Formula::check_automorphism`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum NotAutomorphism {
    #[error("permutation is not negation-consistent")]
    NegationInconsistent,
    #[error("permutation moves literal {0} outside the formula")]
    OutOfRange(Lit),
    #[error("image of clause {clause} is not in the formula")]
    ClauseImageMissing { clause: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("mapping is not a bijection on its support")]
    NotBijective,
    #[error("list lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("lists are not pairwise disjoint")]
    NotDisjoint,
    #[error("conflicting images for literal {0} and its negation")]
    ConflictingImages(Lit),
}

/// A sparse permutation of literals. Only moved points are stored, sorted by
/// source literal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LiteralPermutation {
    pairs: Vec<(Lit, Lit)>,
}

impl fmt::Debug for LiteralPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("}")
    }
}

impl LiteralPermutation {
    pub fn identity() -> LiteralPermutation {
        LiteralPermutation { pairs: Vec::new() }
    }

    /// Builds a permutation from `(from, to)` pairs. Fixed points are dropped;
    /// the image set must equal the source set and sources must be unique.
    pub fn from_pairs<I>(pairs: I) -> Result<LiteralPermutation, PermutationError>
    where
        I: IntoIterator<Item = (Lit, Lit)>,
    {
        let mut pairs: Vec<(Lit, Lit)> = pairs.into_iter().filter(|(a, b)| a != b).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(PermutationError::NotBijective);
        }
        let mut sources: Vec<Lit> = pairs.iter().map(|p| p.0).collect();
        let mut images: Vec<Lit> = pairs.iter().map(|p| p.1).collect();
        sources.sort_unstable();
        images.sort_unstable();
        if sources != images {
            return Err(PermutationError::NotBijective);
        }
        Ok(LiteralPermutation { pairs })
    }

    #[inline]
    pub fn apply(&self, l: Lit) -> Lit {
        match self.pairs.binary_search_by_key(&l, |p| p.0) {
            Ok(i) => self.pairs[i].1,
            Err(_) => l,
        }
    }

    /// Moved literals paired with their images, sorted by source.
    pub fn pairs(&self) -> &[(Lit, Lit)] {
        &self.pairs
    }

    pub fn support(&self) -> impl Iterator<Item = Lit> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn support_len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_negation_consistent(&self) -> bool {
        self.pairs.iter().all(|&(l, img)| self.apply(l.negate()) == img.negate())
    }

    /// `self` followed by `other`: `l -> other(self(l))`.
    pub fn then(&self, other: &LiteralPermutation) -> LiteralPermutation {
        let mut points: Vec<Lit> = self.support().chain(other.support()).collect();
        points.sort_unstable();
        points.dedup();
        let pairs = points
            .into_iter()
            .map(|l| (l, other.apply(self.apply(l))))
            .filter(|(a, b)| a != b)
            .collect();
        LiteralPermutation { pairs }
    }

    pub fn inverse(&self) -> LiteralPermutation {
        let mut pairs: Vec<(Lit, Lit)> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort_unstable();
        LiteralPermutation { pairs }
    }

    /// Sorted variables whose literals are moved.
    pub fn support_vars(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self.support().map(Lit::var).collect();
        vars.dedup();
        vars
    }
}

/// Image of a clause under `phi`, sorted and deduplicated.
pub fn apply_permutation(clause: &[Lit], phi: &LiteralPermutation) -> Vec<Lit> {
    let mut image: Vec<Lit> = clause.iter().map(|&l| phi.apply(l)).collect();
    image.sort_unstable();
    image.dedup();
    image
}

/// The permutation exchanging `a[i]` with `b[i]` for every `i`.
pub fn transpose(a: &[Lit], b: &[Lit]) -> Result<LiteralPermutation, PermutationError> {
    if a.len() != b.len() {
        return Err(PermutationError::LengthMismatch(a.len(), b.len()));
    }
    let mut all: Vec<Lit> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(PermutationError::NotDisjoint);
    }
    let mut pairs: Vec<(Lit, Lit)> = Vec::with_capacity(2 * a.len());
    for (&x, &y) in a.iter().zip(b) {
        pairs.push((x, y));
        pairs.push((y, x));
    }
    pairs.sort_unstable();
    Ok(LiteralPermutation { pairs })
}

/// Extends `phi` to the negations of its support: a literal outside the
/// support whose negation is moved is sent to the negation of that image.
pub fn fix(phi: &LiteralPermutation) -> Result<LiteralPermutation, PermutationError> {
    let mut pairs: Vec<(Lit, Lit)> = phi.pairs.clone();
    for &(l, img) in &phi.pairs {
        let neg = l.negate();
        match phi.pairs.binary_search_by_key(&neg, |p| p.0) {
            Ok(i) => {
                if phi.pairs[i].1 != img.negate() {
                    return Err(PermutationError::ConflictingImages(l));
                }
            }
            Err(_) => pairs.push((neg, img.negate())),
        }
    }
    LiteralPermutation::from_pairs(pairs)
}
