//! Ordered bi-trees: two ternary trees joined at their roots, grown one
//! split at a time and recorded by their chronicle of split nodes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{mu_phase, phi, ResonantTuple};

/// Id of the first root.
pub const R1: usize = 0;
/// Id of the second root.
pub const R2: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    parent: Option<usize>,
    children: Option<[usize; 3]>,
    conj: bool,
}

/// Bi-tree together with the order in which its nodes were split. Node ids
/// follow creation order, so the chronicle determines the tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedBiTree {
    nodes: Vec<Node>,
    chronicle: Vec<usize>,
}

impl Default for OrderedBiTree {
    fn default() -> Self {
        Self::roots()
    }
}

impl OrderedBiTree {
    /// The two joined roots with no split yet. `r2` carries the conjugate.
    pub fn roots() -> Self {
        Self {
            nodes: vec![
                Node { parent: None, children: None, conj: false },
                Node { parent: None, children: None, conj: true },
            ],
            chronicle: Vec::new(),
        }
    }

    /// The unique first-generation tree.
    pub fn first() -> Self {
        Self::roots().extend(R1).expect("r1 is terminal")
    }

    /// Replays a chronicle of split ids.
    pub fn from_chronicle(chronicle: &[usize]) -> Result<Self> {
        chronicle.iter().try_fold(Self::roots(), |t, &a| t.extend(a))
    }

    /// Splits terminal `a` into three ordered children. The first split must be at `r1`.
    pub fn extend(&self, a: usize) -> Result<Self> {
        if a >= self.nodes.len() || self.nodes[a].children.is_some() || (self.chronicle.is_empty() && a != R1) {
            return Err(Error::NotTerminal(a));
        }
        let mut next = self.clone();
        let base = next.nodes.len();
        let conj = next.nodes[a].conj;
        for flip in [false, true, false] {
            next.nodes.push(Node { parent: Some(a), children: None, conj: conj ^ flip });
        }
        next.nodes[a].children = Some([base, base + 1, base + 2]);
        next.chronicle.push(a);
        Ok(next)
    }

    /// Number of splits.
    pub fn generations(&self) -> usize {
        self.chronicle.len()
    }

    pub fn chronicle(&self) -> &[usize] {
        &self.chronicle
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_terminal(&self, a: usize) -> bool {
        a < self.nodes.len() && self.nodes[a].children.is_none()
    }

    /// Terminal ids in increasing order.
    pub fn terminals(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&a| self.is_terminal(a)).collect()
    }

    pub fn non_terminals(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&a| !self.is_terminal(a)).collect()
    }

    pub fn children(&self, a: usize) -> Option<[usize; 3]> {
        self.nodes.get(a).and_then(|n| n.children)
    }

    pub fn parent(&self, a: usize) -> Option<usize> {
        self.nodes.get(a).and_then(|n| n.parent)
    }

    /// Whether node `a` carries a complex conjugate.
    pub fn is_conj(&self, a: usize) -> bool {
        self.nodes[a].conj
    }

    /// `+1` for plain nodes, `-1` for conjugated ones.
    pub fn conj_sign(&self, a: usize) -> i64 {
        if self.nodes[a].conj {
            -1
        } else {
            1
        }
    }

    /// Root (`R1` or `R2`) above node `a`.
    pub fn root_of(&self, mut a: usize) -> usize {
        while let Some(p) = self.nodes[a].parent {
            a = p;
        }
        a
    }

    /// Node sets of the two trees under `r1` and `r2`.
    pub fn projections(&self) -> (Projection, Projection) {
        let pick = |r: usize| {
            let nodes: Vec<usize> = (0..self.nodes.len()).filter(|&a| self.root_of(a) == r).collect();
            let terminals = nodes.iter().copied().filter(|&a| self.is_terminal(a)).collect();
            Projection { root: r, nodes, terminals }
        };
        (pick(R1), pick(R2))
    }

    fn shape(&self, a: usize, out: &mut String) {
        match self.nodes[a].children {
            None => out.push('T'),
            Some([x, y, z]) => {
                out.push('(');
                self.shape(x, out);
                out.push(' ');
                self.shape(y, out);
                out.push(' ');
                self.shape(z, out);
                out.push(')');
            }
        }
    }

    /// `"[tree1 | tree2] @ [split ids]"`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("[");
        self.shape(R1, &mut s);
        s.push_str(" | ");
        self.shape(R2, &mut s);
        s.push_str("] @ [");
        let ids: Vec<String> = self.chronicle.iter().map(|a| a.to_string()).collect();
        s.push_str(&ids.join(", "));
        s.push(']');
        s
    }

    /// Parses [`Self::to_text`] output; the shape must agree with the chronicle.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("{m}: {text:?}"));
        let (shape, chron) = text.split_once('@').ok_or_else(|| bad("missing '@'"))?;
        let chron = chron.trim().strip_prefix('[').and_then(|c| c.strip_suffix(']')).ok_or_else(|| bad("chronicle"))?;
        let ids = chron
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| bad("split id")))
            .collect::<Result<Vec<_>>>()?;
        let tree = Self::from_chronicle(&ids)?;
        let normalized: String = shape.split_whitespace().collect::<Vec<_>>().join(" ");
        let expected = tree.to_text();
        let expected_shape = expected.split('@').next().unwrap_or("").trim();
        if normalized != expected_shape {
            return Err(bad("shape does not match chronicle"));
        }
        Ok(tree)
    }
}

impl fmt::Display for OrderedBiTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// One side of a bi-tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub root: usize,
    pub nodes: Vec<usize>,
    pub terminals: Vec<usize>,
}

impl Projection {
    /// True when the side is the bare root.
    pub fn is_bare_root(&self) -> bool {
        self.nodes.len() == 1
    }
}

/// `2^{J-1} J!`.
pub fn cardinality(j: u32) -> u64 {
    if j == 0 {
        return 1;
    }
    (1..=j as u64).product::<u64>() << (j - 1)
}

/// Every ordered bi-tree of generation `J`, in lexicographic chronicle order.
pub fn enumerate_ordered(j: usize) -> Result<Vec<OrderedBiTree>> {
    if !(1..=6).contains(&j) {
        return Err(Error::InvalidParameter(format!("J = {j} outside 1..=6")));
    }
    let mut level = vec![OrderedBiTree::first()];
    for _ in 1..j {
        level = level
            .iter()
            .flat_map(|t| t.terminals().into_iter().map(move |a| t.extend(a).expect("terminal")))
            .collect();
    }
    Ok(level)
}

/// Frequencies on every node, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexAssignment {
    pub freqs: Vec<i64>,
}

impl IndexAssignment {
    pub fn root(&self) -> i64 {
        self.freqs[R1]
    }

    /// Definition check: equal roots, the three-term relation at every split
    /// node and `{n_a, n_a2}` disjoint from `{n_a1, n_a3}`.
    pub fn is_valid(&self, tree: &OrderedBiTree) -> bool {
        if self.freqs.len() != tree.node_count() || self.freqs[R1] != self.freqs[R2] {
            return false;
        }
        tree.non_terminals().into_iter().all(|a| {
            let [x, y, z] = tree.children(a).expect("non-terminal");
            let (na, n1, n2, n3) = (self.freqs[a], self.freqs[x], self.freqs[y], self.freqs[z]);
            na == n1 - n2 + n3 && na != n1 && na != n3 && n2 != n1 && n2 != n3
        })
    }
}

/// All index assignments with `n_r = n_root` and every frequency in `[-N, N]`.
pub fn enumerate_index_assignments(tree: &OrderedBiTree, n_root: i64, box_n: i64) -> Vec<IndexAssignment> {
    let mut out = Vec::new();
    if n_root.abs() > box_n {
        return out;
    }
    let mut freqs = vec![0i64; tree.node_count()];
    freqs[R1] = n_root;
    freqs[R2] = n_root;
    fill(tree, 0, box_n, &mut freqs, &mut out);
    out
}

fn fill(tree: &OrderedBiTree, j: usize, box_n: i64, freqs: &mut Vec<i64>, out: &mut Vec<IndexAssignment>) {
    let Some(&a) = tree.chronicle.get(j) else {
        out.push(IndexAssignment { freqs: freqs.clone() });
        return;
    };
    let [x, y, z] = tree.children(a).expect("split node");
    let na = freqs[a];
    for n1 in -box_n..=box_n {
        if n1 == na {
            continue;
        }
        for n3 in (-box_n).max(na - n1 - box_n)..=box_n.min(na - n1 + box_n) {
            if n3 == na {
                continue;
            }
            freqs[x] = n1;
            freqs[y] = n1 + n3 - na;
            freqs[z] = n3;
            fill(tree, j + 1, box_n, freqs, out);
        }
    }
}

/// Frequencies, phases and conjugation signs of each generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationData {
    pub tuples: Vec<ResonantTuple>,
    /// `n1^4 - n2^4 + n3^4 - n^4` of each generation.
    pub phi: Vec<i64>,
    pub mu: Vec<i64>,
    /// `+1` when the split node is plain, `-1` when conjugated.
    pub sign: Vec<i64>,
    /// Accumulated phase `sum_{k<=j} sign_k phi_k`, the exponent that
    /// actually appears after `j` differentiations by parts.
    pub phi_tilde: Vec<i64>,
}

pub fn generation_data(tree: &OrderedBiTree, a: &IndexAssignment) -> Result<GenerationData> {
    if !a.is_valid(tree) {
        return Err(Error::InvalidParameter("index assignment violates the tree constraints".into()));
    }
    let mut g = GenerationData { tuples: vec![], phi: vec![], mu: vec![], sign: vec![], phi_tilde: vec![] };
    let mut acc = 0i64;
    for &node in tree.chronicle() {
        let [x, y, z] = tree.children(node).expect("split node");
        let t = ResonantTuple::from_parts(a.freqs[x], a.freqs[y], a.freqs[z], a.freqs[node])?;
        let p = phi(&t)?;
        let s = tree.conj_sign(node);
        acc = acc.checked_add(s * p).ok_or(Error::Overflow(t.max_abs()))?;
        g.tuples.push(t);
        g.phi.push(p);
        g.mu.push(mu_phase(&t)?);
        g.sign.push(s);
        g.phi_tilde.push(acc);
    }
    Ok(g)
}

/// Number of pairs (root, assignment) in the box with `n_fixed = m` and
/// `mu_j = nu_j` for every generation.
pub fn count_constrained(tree: &OrderedBiTree, fixed: usize, m: i64, nus: &[i64], box_n: i64) -> Result<u64> {
    if fixed >= tree.node_count() {
        return Err(Error::InvalidParameter(format!("node {fixed} not in tree")));
    }
    if nus.len() != tree.generations() {
        return Err(Error::SizeMismatch { expected: tree.generations(), got: nus.len() });
    }
    let mut count = 0;
    for root in -box_n..=box_n {
        for a in enumerate_index_assignments(tree, root, box_n) {
            if a.freqs[fixed] != m {
                continue;
            }
            let g = generation_data(tree, &a)?;
            if g.mu == nus {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_and_cardinality() {
        let sizes: Vec<usize> = (1..=4).map(|j| enumerate_ordered(j).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 4, 24, 192]);
        assert_eq!((1..=5).map(cardinality).collect::<Vec<_>>(), vec![1, 4, 24, 192, 1920]);
        assert!(enumerate_ordered(0).is_err());
        assert!(enumerate_ordered(7).is_err());
    }

    #[test]
    fn first_tree_layout() {
        let t = OrderedBiTree::first();
        assert_eq!(t.terminals(), vec![1, 2, 3, 4]);
        assert_eq!(t.node_count(), 5);
        assert!(!t.is_conj(2) && t.is_conj(3) && !t.is_conj(4) && t.is_conj(R2));
        let (p1, p2) = t.projections();
        assert!(p2.is_bare_root());
        assert_eq!(p1.terminals, vec![2, 3, 4]);
    }

    #[test]
    fn extension_rules() {
        assert!(OrderedBiTree::roots().extend(R2).is_err());
        let t = OrderedBiTree::first();
        assert_eq!(t.extend(R1), Err(Error::NotTerminal(R1)));
        assert_eq!(t.extend(99), Err(Error::NotTerminal(99)));
        let twice = t.extend(3).unwrap().extend(6).unwrap();
        assert_eq!(twice.generations(), 3);
        assert_eq!(twice.node_count(), 11);
        assert!(!twice.is_conj(6) && twice.is_conj(7));
    }

    #[test]
    fn text_round_trip() {
        for t in enumerate_ordered(3).unwrap() {
            let text = t.to_text();
            assert_eq!(OrderedBiTree::parse(&text).unwrap(), t, "{text}");
        }
        assert_eq!(OrderedBiTree::first().to_text(), "[(T T T) | T] @ [0]");
        assert!(OrderedBiTree::parse("[T | T] @ [0]").is_err());
    }

    #[test]
    fn small_assignment_counts() {
        let t = OrderedBiTree::first();
        let got = enumerate_index_assignments(&t, 0, 1);
        let triples: Vec<_> = got.iter().map(|a| (a.freqs[2], a.freqs[3], a.freqs[4])).collect();
        assert_eq!(triples, vec![(-1, 0, 1), (1, 0, -1)]);
        assert!(enumerate_index_assignments(&t, 0, 0).is_empty());
    }

    #[test]
    fn counting_with_odd_mu_is_zero() {
        let t = OrderedBiTree::first();
        assert_eq!(count_constrained(&t, 2, 1, &[-3], 4).unwrap(), 0);
        assert_eq!(count_constrained(&t, 2, 1, &[0], 4).unwrap(), 0);
    }
}
