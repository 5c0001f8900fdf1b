//! Separation-condition checking and twin collapse.
//!
//! Two indices are twins when their matrix columns are identical, i.e. the
//! same set of orbit points lies within epsilon of both. For such a pair no
//! witness z with R[i][z] != R[j][z] can exist in either direction, so the
//! pair violates the separation condition; every other pair has a witness by
//! definition. Columns equal rows here because the matrix is symmetric.

use std::collections::HashMap;

use crate::matrix::RecurrenceMatrix;

/// Verdict on the separation condition plus the witnesses of failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationReport {
    /// True exactly when no violating pair exists, i.e. all columns are
    /// pairwise distinct; this is the injectivity witness reconstruction
    /// relies on.
    pub satisfied: bool,
    /// Pairs (i, j), i < j, admitting no separating witness in either
    /// direction: exactly the pairs sharing a twin class.
    pub violating_pairs: Vec<(usize, usize)>,
    /// Partition of 0..n into classes of identical columns, ordered by first
    /// occurrence; singletons included.
    pub twin_classes: Vec<Vec<usize>>,
    /// Number of twin classes (distinct columns).
    pub n_effective: usize,
}

impl SeparationReport {
    /// Stable key: value rendering for reports and golden diffs. Pair lists
    /// are capped to keep reports readable on badly degenerate inputs.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        const MAX_PAIRS: usize = 100;
        let mut out = String::new();
        let nontrivial = self.twin_classes.iter().filter(|c| c.len() > 1).count();
        let n: usize = self.twin_classes.iter().map(|c| c.len()).sum();
        writeln!(out, "satisfied: {}", self.satisfied).unwrap();
        writeln!(out, "n: {n}").unwrap();
        writeln!(out, "n_effective: {}", self.n_effective).unwrap();
        writeln!(out, "twin_classes_nontrivial: {nontrivial}").unwrap();
        writeln!(out, "violating_pairs: {}", self.violating_pairs.len()).unwrap();
        if !self.violating_pairs.is_empty() {
            let mut line = String::from("pairs:");
            for (i, j) in self.violating_pairs.iter().take(MAX_PAIRS) {
                write!(line, " ({i},{j})").unwrap();
            }
            if self.violating_pairs.len() > MAX_PAIRS {
                write!(line, " ... and {} more", self.violating_pairs.len() - MAX_PAIRS)
                    .unwrap();
            }
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

/// Groups indices by identical rows (= columns). Returns the class index of
/// every point and the member lists in first-occurrence order.
pub(crate) fn twin_partition(r: &RecurrenceMatrix) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = r.n();
    let mut class_of = vec![0usize; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<&[u64], usize> = HashMap::new();
    for (i, slot) in class_of.iter_mut().enumerate() {
        let row = r.row_words(i);
        let class = *seen.entry(row).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        *slot = class;
        members[class].push(i);
    }
    (class_of, members)
}

/// Checks the separation condition on every unordered pair: a pair fails
/// exactly when no orbit point is within epsilon of one but not the other,
/// which happens exactly for identical columns. Word-level row comparison
/// (padding bits are zero) makes this O(n^2 / 64) instead of a cubic scan.
pub fn check_separation(r: &RecurrenceMatrix) -> SeparationReport {
    let (_, members) = twin_partition(r);
    let mut violating_pairs = Vec::new();
    for class in &members {
        for a in 0..class.len() {
            for b in (a + 1)..class.len() {
                violating_pairs.push((class[a], class[b]));
            }
        }
    }
    violating_pairs.sort_unstable();
    SeparationReport {
        satisfied: violating_pairs.is_empty(),
        n_effective: members.len(),
        twin_classes: members,
        violating_pairs,
    }
}

/// Quotients the matrix over twin classes, keeping the first occurrence of
/// each class as its representative (time order preserved). Returns the
/// quotient and the surjection old index -> class index. The quotient has
/// pairwise distinct columns: if two quotient rows agreed everywhere, the
/// underlying full rows would agree too and the classes would have merged.
pub fn collapse_twins(r: &RecurrenceMatrix) -> (RecurrenceMatrix, Vec<usize>) {
    let (class_of, members) = twin_partition(r);
    let reps: Vec<usize> = members.iter().map(|c| c[0]).collect();
    let k = reps.len();
    let mut q = RecurrenceMatrix::zeroed(k, r.epsilon(), r.metric());
    for (a, &ra) in reps.iter().enumerate() {
        for (b, &rb) in reps.iter().enumerate() {
            if r.get(ra, rb) {
                q.set(a, b);
            }
        }
    }
    (q, class_of)
}
