use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::{lit, DetectFailure, DetectedStructure, Detector, JohnsonStructure, RowStructure};
use crate::cnf::{transpose, Lit, LiteralPermutation};
use crate::refine::{group_by_color, Coloring};

/// An orbit split into one block per Johnson label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JohnsonAttachment {
    /// `blocks[i][c]` is the member of column `c` in the block of label
    /// `i + 1`.
    pub blocks: Vec<Vec<Lit>>,
}

/// Result of Johnson detection with attached orbits.
#[derive(Debug, Clone)]
pub struct JohnsonOutcome {
    pub structure: DetectedStructure,
    /// Row structures over the columns of each attachment.
    pub rows: Vec<DetectedStructure>,
    /// Indices into `others` of the attached orbits.
    pub attached: Vec<usize>,
}

const NO_INDEX: u32 = u32::MAX;

fn triangular_root(k: usize) -> Option<u32> {
    let mut n = 1usize;
    while n * (n - 1) / 2 < k {
        n += 1;
    }
    (n * (n - 1) / 2 == k).then_some(n as u32)
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct LabelState<'s> {
    sigma: &'s [u32],
    index: Vec<u32>,
    ad: Vec<Option<Vec<u32>>>,
}

impl<'a> Detector<'a> {
    /// Johnson action on 2-subsets, without attached orbits.
    pub fn detect_johnson(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
    ) -> Result<DetectedStructure, DetectFailure> {
        self.detect_johnson_extended(base, sigma, &[]).map(|o| o.structure)
    }

    /// Johnson detection followed by the search for orbits in `others` whose
    /// members split `sigma` along a single label.
    pub fn detect_johnson_extended(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
        others: &[Vec<u32>],
    ) -> Result<JohnsonOutcome, DetectFailure> {
        let (n, labels) = self.johnson_labels(base, sigma)?;
        let mut attachments = Vec::new();
        let mut attached = Vec::new();
        for (i, tau) in others.iter().enumerate() {
            if let Some(a) = self.johnson_attachment(base, sigma, n, &labels, tau) {
                attachments.push(a);
                attached.push(i);
            }
        }
        let generators = match self.johnson_generators(sigma, n, &labels, &attachments) {
            Ok(g) => g,
            Err(_) if !attachments.is_empty() => {
                attachments.clear();
                attached.clear();
                self.johnson_generators(sigma, n, &labels, &[])?
            }
            Err(e) => return Err(e),
        };
        let mut rows = Vec::new();
        for a in &attachments {
            if let Some(r) = self.attachment_rows(a) {
                rows.push(r);
            }
        }
        let mut labeled: Vec<(Lit, [u32; 2])> = sigma
            .iter()
            .zip(&labels)
            .map(|(&x, p)| (lit(x), [p[0] + 1, p[1] + 1]))
            .collect();
        labeled.sort_by_key(|&(l, p)| (p, l));
        let structure = self.cover(DetectedStructure::Johnson(JohnsonStructure {
            n,
            labels: labeled,
            attachments,
            generators,
            covered_colors: Vec::new(),
        }));
        Ok(JohnsonOutcome {
            structure,
            rows,
            attached,
        })
    }

    /// Labels every member of `sigma` by a 2-subset of `0..n`.
    fn johnson_labels(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
    ) -> Result<(u32, Vec<[u32; 2]>), DetectFailure> {
        if sigma.len() < 28 {
            return Err(DetectFailure::SizeGate);
        }
        let n = triangular_root(sigma.len()).ok_or(DetectFailure::SizeGate)?;
        let mut index = vec![NO_INDEX; self.graph.literal_vertices() as usize];
        for (i, &x) in sigma.iter().enumerate() {
            index[x as usize] = i as u32;
        }
        let mut state = LabelState {
            sigma,
            index,
            ad: vec![None; sigma.len()],
        };
        let mut labels: Vec<Vec<u32>> = vec![Vec::new(); sigma.len()];
        let mut vnr = 0u32;
        while let Some(v) = labels.iter().position(|l| l.len() <= 1) {
            let v = v as u32;
            let ad_v = self.adjacent(base, &mut state, v)?;
            let w = *ad_v.first().ok_or(DetectFailure::FragmentCount)?;
            let ad_w = self.adjacent(base, &mut state, w)?;
            let pair = self.ir_sequence(base, &[sigma[v as usize], sigma[w as usize]]);
            let singles: Vec<u32> = group_by_color(&pair.coloring, sigma)
                .into_iter()
                .filter(|(_, g)| g.len() == 1)
                .map(|(_, g)| state.index[g[0] as usize])
                .filter(|&x| x != v && x != w)
                .collect();
            self.release(pair, base);
            let [y] = singles[..] else {
                return Err(DetectFailure::MissingSingleton);
            };
            let ad_y = self.adjacent(base, &mut state, y)?;

            let set = |a: u32, b: u32, ad_a: &[u32], ad_b: &[u32], skip: u32| -> Vec<u32> {
                let mut e = vec![a, b];
                e.extend(intersect_sorted(ad_a, ad_b).into_iter().filter(|&x| x != skip));
                e
            };
            let sets = [
                set(v, y, &ad_v, &ad_y, w),
                set(v, w, &ad_v, &ad_w, y),
                set(w, y, &ad_w, &ad_y, v),
            ];
            let mut fresh = false;
            for e in &sets {
                let mut common: Vec<u32> = labels[e[0] as usize].clone();
                for &x in &e[1..] {
                    common.retain(|l| labels[x as usize].contains(l));
                }
                if common.is_empty() {
                    for &x in e {
                        let l = &mut labels[x as usize];
                        l.push(vnr);
                        if l.len() > 2 {
                            return Err(DetectFailure::NotBijective);
                        }
                    }
                    vnr += 1;
                    fresh = true;
                }
            }
            if !fresh {
                return Err(DetectFailure::NoFreshLabels);
            }
            if vnr > n {
                return Err(DetectFailure::NotBijective);
            }
        }
        if vnr != n {
            return Err(DetectFailure::NotBijective);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(sigma.len());
        for l in labels {
            let pair = [l[0].min(l[1]), l[0].max(l[1])];
            if pair[0] == pair[1] || !seen.insert(pair) {
                return Err(DetectFailure::NotBijective);
            }
            out.push(pair);
        }
        Ok((n, out))
    }

    /// Sorted indices of the members of `sigma` sharing one label with `x`:
    /// the smaller non-singleton fragment after individualizing `x`.
    fn adjacent(
        &mut self,
        base: &Coloring,
        state: &mut LabelState<'_>,
        x: u32,
    ) -> Result<Vec<u32>, DetectFailure> {
        if let Some(ad) = &state.ad[x as usize] {
            return Ok(ad.clone());
        }
        let report = self.ir(base, state.sigma[x as usize]);
        let groups = group_by_color(&report.coloring, state.sigma);
        self.release(report, base);
        if groups.len() != 3 {
            return Err(DetectFailure::FragmentCount);
        }
        let mut non_singleton: Vec<&Vec<u32>> = groups.iter().map(|(_, g)| g).filter(|g| g.len() > 1).collect();
        if non_singleton.len() != 2 {
            return Err(DetectFailure::FragmentCount);
        }
        non_singleton.sort_by_key(|g| g.len());
        let mut ad: Vec<u32> = non_singleton[0].iter().map(|&m| state.index[m as usize]).collect();
        ad.sort_unstable();
        state.ad[x as usize] = Some(ad.clone());
        Ok(ad)
    }

    /// Blocks of `tau` per label, if individualizing each member splits
    /// `sigma` into the literals of one label and the rest.
    fn johnson_attachment(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
        n: u32,
        labels: &[[u32; 2]],
        tau: &[u32],
    ) -> Option<JohnsonAttachment> {
        if tau.is_empty() || !tau.len().is_multiple_of(n as usize) {
            return None;
        }
        let b = tau.len() / n as usize;
        let mut label_of: BTreeMap<u32, u32> = BTreeMap::new();
        let mut tau_groups: Vec<Vec<Vec<u32>>> = Vec::with_capacity(tau.len());
        let pos: BTreeMap<u32, usize> = sigma.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for &u in tau {
            let report = self.ir(base, u);
            let groups = group_by_color(&report.coloring, sigma);
            if groups.len() != 2 {
                return None;
            }
            let own = groups.iter().map(|(_, g)| g).find(|g| g.len() == n as usize - 1)?;
            let mut common: Vec<u32> = labels[pos[&own[0]]].to_vec();
            for m in &own[1..] {
                let p = labels[pos[m]];
                common.retain(|l| p.contains(l));
            }
            let [label] = common[..] else {
                return None;
            };
            label_of.insert(u, label);
            if b > 1 {
                tau_groups.push(group_by_color(&report.coloring, tau).into_iter().map(|(_, g)| g).collect());
            }
            self.release(report, base);
        }
        let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        for (&u, &l) in &label_of {
            blocks[l as usize].push(u);
        }
        if blocks.iter().any(|blk| blk.len() != b) {
            return None;
        }
        let columns: Vec<Vec<u32>> = if b == 1 {
            vec![(0..n as usize).map(|i| blocks[i][0]).collect()]
        } else {
            column_correspondence(tau, &label_of, &tau_groups, n)?
        };
        // blocks[i][c]: member of column c with label i
        let mut out = vec![Vec::with_capacity(b); n as usize];
        for column in &columns {
            let mut by_label: Vec<Option<u32>> = vec![None; n as usize];
            for &m in column {
                by_label[label_of[&m] as usize] = Some(m);
            }
            for (i, m) in by_label.into_iter().enumerate() {
                out[i].push(lit(m?));
            }
        }
        Some(JohnsonAttachment { blocks: out })
    }

    fn johnson_generators(
        &mut self,
        sigma: &[u32],
        n: u32,
        labels: &[[u32; 2]],
        attachments: &[JohnsonAttachment],
    ) -> Result<Vec<LiteralPermutation>, DetectFailure> {
        let by_pair: BTreeMap<[u32; 2], u32> = labels
            .iter()
            .zip(sigma)
            .map(|(&p, &x)| (p, x))
            .collect();
        let mut generators = Vec::with_capacity(n as usize - 1);
        for t in 0..n - 1 {
            let swap = |l: u32| {
                if l == t {
                    t + 1
                } else if l == t + 1 {
                    t
                } else {
                    l
                }
            };
            let mut pairs: Vec<(Lit, Lit)> = Vec::new();
            for (&x, p) in sigma.iter().zip(labels) {
                let (a, b) = (swap(p[0]), swap(p[1]));
                let image = [a.min(b), a.max(b)];
                if image != *p {
                    pairs.push((lit(x), lit(by_pair[&image])));
                }
            }
            for a in attachments {
                for (&u, &w) in a.blocks[t as usize].iter().zip(&a.blocks[t as usize + 1]) {
                    pairs.push((u, w));
                    pairs.push((w, u));
                }
            }
            let phi = LiteralPermutation::from_pairs(pairs).map_err(|_| DetectFailure::Verification)?;
            generators.push(self.verified(phi)?);
        }
        Ok(generators)
    }

    /// Consecutive transpositions of the columns of an attachment, as a row
    /// structure with one row per column.
    fn attachment_rows(&mut self, a: &JohnsonAttachment) -> Option<DetectedStructure> {
        let b = a.blocks.first()?.len();
        if b < 2 {
            return None;
        }
        let rows: Vec<Vec<Lit>> = (0..b).map(|c| a.blocks.iter().map(|blk| blk[c]).collect()).collect();
        let mut generators = Vec::with_capacity(b - 1);
        for pair in rows.windows(2) {
            let phi = transpose(&pair[0], &pair[1]).ok()?;
            generators.push(self.verified(phi).ok()?);
        }
        Some(self.cover(DetectedStructure::Row(RowStructure {
            rows,
            generators,
            covered_colors: Vec::new(),
        })))
    }
}

/// Groups `tau` into columns: a column meets every block exactly once. For
/// each member the candidate fragments are those missing its own block and
/// meeting every other block once; the first rank at which all candidate
/// choices are mutually consistent wins.
fn column_correspondence(
    tau: &[u32],
    label_of: &BTreeMap<u32, u32>,
    tau_groups: &[Vec<Vec<u32>>],
    n: u32,
) -> Option<Vec<Vec<u32>>> {
    let candidates: Vec<Vec<&Vec<u32>>> = tau
        .iter()
        .zip(tau_groups)
        .map(|(u, groups)| {
            let own = label_of[u];
            groups
                .iter()
                .filter(|g| {
                    if g.len() != n as usize - 1 {
                        return false;
                    }
                    let mut seen: Vec<u32> = g.iter().map(|m| label_of[m]).collect();
                    seen.sort_unstable();
                    seen.dedup();
                    seen.len() == g.len() && !seen.contains(&own)
                })
                .collect()
        })
        .collect();
    let ranks = candidates.iter().map(Vec::len).min()?;
    let pos: BTreeMap<u32, usize> = tau.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for r in 0..ranks {
        let column_of: Vec<Vec<u32>> = (0..tau.len())
            .map(|i| {
                let mut c = candidates[i][r].clone();
                c.push(tau[i]);
                c.sort_unstable();
                c
            })
            .collect();
        let consistent = column_of
            .iter()
            .all(|c| c.iter().all(|m| column_of[pos[m]] == *c));
        if consistent {
            let columns: BTreeSet<Vec<u32>> = column_of.into_iter().collect();
            return Some(columns.into_iter().collect());
        }
    }
    None
}
