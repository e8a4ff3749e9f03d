//! Merging per-class priority partial orders into one total order.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::syntax::{PriorityDecl, QName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriorityError {
    #[error("invalid operator priorities: {}", render_cycle(.0))]
    Cycle(Vec<QName>),
    #[error("unknown priority `{0}`")]
    Unknown(QName),
}

fn render_cycle(nodes: &[QName]) -> String {
    let mut parts: Vec<String> = nodes.iter().map(ToString::to_string).collect();
    if let Some(first) = parts.first().cloned() {
        parts.push(first);
    }
    parts.join(" < ")
}

/// Rank 0 is the implicit bottom priority of unprioritized operators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriorityOrder {
    rank: HashMap<QName, u32>,
}

pub const BOTTOM: u32 = 0;

impl PriorityOrder {
    pub fn rank(&self, q: &QName) -> Option<u32> {
        self.rank.get(q).copied()
    }

    /// Rank of an optional (already qualified) priority.
    pub fn rank_or_bottom(&self, q: Option<&QName>) -> u32 {
        q.and_then(|q| self.rank(q)).unwrap_or(BOTTOM)
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Names sorted by rank.
    pub fn sorted(&self) -> Vec<QName> {
        let mut v: Vec<(&QName, &u32)> = self.rank.iter().collect();
        v.sort_by_key(|(_, r)| **r);
        v.into_iter().map(|(q, _)| q.clone()).collect()
    }

    /// Lowest rank a candidate must have to fill an operand slot.
    pub fn slot_min_rank(&self, owner: Option<&QName>, annotation: Option<&QName>) -> u32 {
        match (annotation, owner) {
            (Some(q), _) => self.rank_or_bottom(Some(q)),
            (None, Some(p)) => self.rank_or_bottom(Some(p)) + 1,
            (None, None) => BOTTOM,
        }
    }

    pub fn operand_admits(&self, owner: Option<&QName>, annotation: Option<&QName>, candidate: Option<&QName>) -> bool {
        self.rank_or_bottom(candidate) >= self.slot_min_rank(owner, annotation)
    }
}

/// Qualifies a priority reference written inside `owner`.
pub fn qualify(owner: &str, q: &QName) -> QName {
    if q.is_simple() {
        QName::qualified(owner, q.last())
    } else {
        q.clone()
    }
}

/// Builds the total order. `decls` are in import order then declaration
/// order, which also breaks ties between unordered priorities.
pub fn merge(decls: &[(String, PriorityDecl)], import_constraints: &[(QName, QName)]) -> Result<PriorityOrder, PriorityError> {
    let mut nodes: Vec<QName> = Vec::new();
    let mut index: HashMap<QName, usize> = HashMap::new();
    for (owner, d) in decls {
        for n in &d.names {
            let q = QName::qualified(owner, n);
            if !index.contains_key(&q) {
                index.insert(q.clone(), nodes.len());
                nodes.push(q);
            }
        }
    }
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    let mut add_edge = |lo: &QName, hi: &QName| -> Result<(), PriorityError> {
        let l = *index.get(lo).ok_or_else(|| PriorityError::Unknown(lo.clone()))?;
        let h = *index.get(hi).ok_or_else(|| PriorityError::Unknown(hi.clone()))?;
        edges[l].insert(h);
        Ok(())
    };
    for (owner, d) in decls {
        for (lo, hi) in &d.constraints {
            add_edge(&qualify(owner, lo), &qualify(owner, hi))?;
        }
    }
    for (lo, hi) in import_constraints {
        add_edge(lo, hi)?;
    }

    let n = nodes.len();
    let mut indeg = vec![0usize; n];
    for outs in &edges {
        for &h in outs {
            indeg[h] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut rank = HashMap::new();
    let mut next = BOTTOM + 1;
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        rank.insert(nodes[i].clone(), next);
        next += 1;
        for &h in &edges[i] {
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.insert(h);
            }
        }
    }
    if rank.len() < n {
        let remaining: Vec<bool> = (0..n).map(|i| !rank.contains_key(&nodes[i])).collect();
        let cycle = find_cycle(&edges, &remaining);
        return Err(PriorityError::Cycle(cycle.into_iter().map(|i| nodes[i].clone()).collect()));
    }
    Ok(PriorityOrder { rank })
}

/// Every node left after Kahn's algorithm lies on or leads to a cycle;
/// walking any remaining successor must revisit a node.
fn find_cycle(edges: &[BTreeSet<usize>], remaining: &[bool]) -> Vec<usize> {
    let start = remaining.iter().position(|&r| r).expect("a remaining node");
    let mut path = vec![start];
    let mut pos_in_path: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = *edges[cur].iter().find(|&&h| remaining[h]).expect("remaining nodes have remaining successors");
        if let Some(&p) = pos_in_path.get(&next) {
            return path[p..].to_vec();
        }
        pos_in_path.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> QName {
        QName::parse(s).unwrap()
    }

    fn decl(names: &[&str], cons: &[(&str, &str)]) -> PriorityDecl {
        PriorityDecl {
            names: names.iter().map(|s| s.to_string()).collect(),
            constraints: cons.iter().map(|(a, b)| (q(a), q(b))).collect(),
        }
    }

    fn map_utils() -> (String, PriorityDecl) {
        ("MapUtils".into(), decl(&["p1", "p2", "p3"], &[("p1", "p2"), ("p2", "p3")]))
    }

    fn predef() -> (String, PriorityDecl) {
        ("Pre".into(), decl(&["add"], &[]))
    }

    #[test]
    fn chain_is_ordered() {
        let o = merge(&[map_utils()], &[]).unwrap();
        let r = |s| o.rank(&q(s)).unwrap();
        assert!(r("MapUtils.p1") < r("MapUtils.p2") && r("MapUtils.p2") < r("MapUtils.p3"));
    }

    #[test]
    fn import_constraints_interleave() {
        let o = merge(
            &[predef(), map_utils()],
            &[(q("MapUtils.p2"), q("Pre.add")), (q("Pre.add"), q("MapUtils.p3"))],
        )
        .unwrap();
        let r = |s| o.rank(&q(s)).unwrap();
        assert!(r("MapUtils.p2") < r("Pre.add") && r("Pre.add") < r("MapUtils.p3"));
    }

    #[test]
    fn two_cycle() {
        let err = merge(&[("D".into(), decl(&["a", "b"], &[("a", "b"), ("b", "a")]))], &[]).unwrap_err();
        let PriorityError::Cycle(nodes) = &err else { panic!() };
        let mut names: Vec<String> = nodes.iter().map(ToString::to_string).collect();
        names.sort();
        assert_eq!(names, ["D.a", "D.b"]);
        assert!(err.to_string().starts_with("invalid operator priorities: D."));
    }

    #[test]
    fn unknown_priority() {
        let err = merge(&[map_utils()], &[(q("MapUtils.p9"), q("MapUtils.p1"))]).unwrap_err();
        assert_eq!(err, PriorityError::Unknown(q("MapUtils.p9")));
    }

    #[test]
    fn admits_decision_table() {
        let o = merge(&[map_utils()], &[]).unwrap();
        let names = [None, Some(q("MapUtils.p1")), Some(q("MapUtils.p2")), Some(q("MapUtils.p3"))];
        let rank = |x: &Option<QName>| match x {
            None => 0,
            Some(n) => n.last()[1..].parse::<u32>().unwrap(),
        };
        for owner in &names {
            for ann in &names {
                for cand in &names {
                    let expected = match (ann, owner) {
                        (Some(_), _) => rank(cand) >= rank(ann),
                        (None, Some(_)) => rank(cand) > rank(owner),
                        (None, None) => true,
                    };
                    assert_eq!(o.operand_admits(owner.as_ref(), ann.as_ref(), cand.as_ref()), expected);
                }
            }
        }
    }

    #[test]
    fn if_exists_slots() {
        let o = merge(&[map_utils()], &[]).unwrap();
        let p1 = q("MapUtils.p1");
        let p2 = q("MapUtils.p2");
        assert!(o.operand_admits(Some(&p1), Some(&p1), Some(&p1)));
        assert!(!o.operand_admits(Some(&p1), None, Some(&p1)));
        assert!(o.operand_admits(Some(&p1), None, Some(&p2)));
    }

    fn dag() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..10).prop_flat_map(|n| {
            let pairs = proptest::collection::vec((0..n, 0..n), 0..20);
            (Just(n), pairs.prop_map(|ps| ps.into_iter().filter(|(a, b)| a < b).collect()))
        })
    }

    proptest! {
        #[test]
        fn merge_is_linear_extension((n, edges) in dag()) {
            let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
            let d = PriorityDecl {
                names: names.clone(),
                constraints: edges.iter().map(|(a, b)| (q(&names[*a]), q(&names[*b]))).collect(),
            };
            let o = merge(&[("G".into(), d.clone())], &[]).unwrap();
            for (a, b) in &edges {
                let ra = o.rank(&QName::qualified("G", &names[*a])).unwrap();
                let rb = o.rank(&QName::qualified("G", &names[*b])).unwrap();
                prop_assert!(ra < rb);
            }
            prop_assert_eq!(o.clone(), merge(&[("G".into(), d)], &[]).unwrap());
        }

        #[test]
        fn admits_is_monotone(a in 0u32..4, c1 in 0u32..4, c2 in 0u32..4) {
            let o = merge(&[map_utils()], &[]).unwrap();
            let name = |i: u32| (i > 0).then(|| q(&format!("MapUtils.p{i}")));
            let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            let ann = name(a);
            if o.operand_admits(None, ann.as_ref(), name(lo).as_ref()) {
                prop_assert!(o.operand_admits(None, ann.as_ref(), name(hi).as_ref()));
            }
        }
    }
}
