#![allow(dead_code)]

use strongcluster::forest::RootedForest;
use strongcluster::gen::{generate, Family, FamilySpec, IdScheme};
use strongcluster::{Graph, IdAssignment};

pub const FAMILIES: [&str; 7] = ["path", "cycle", "grid", "tree", "hypercube", "star", "gnp"];

pub const SIZES: [usize; 22] = [
    2, 3, 4, 5, 6, 7, 8, 11, 16, 23, 32, 50, 64, 100, 128, 200, 256, 512, 1000, 1024, 2048, 4096,
];

/// Index and reversed order, five seeded permutations, and one scattered
/// assignment over the whole identifier space.
pub fn schemes() -> Vec<(IdScheme, u64)> {
    let mut s = vec![(IdScheme::Index, 0), (IdScheme::Reversed, 0)];
    s.extend((1..=5).map(|seed| (IdScheme::Permuted, seed)));
    s.push((IdScheme::Scattered, 11));
    s
}

#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub spec: FamilySpec,
    pub n: usize,
}

impl Case {
    pub fn build(&self) -> (Graph, IdAssignment) {
        generate(&self.spec).expect("corpus specs are valid")
    }
}

/// Every family at every size up to `max_n` (deduplicated by actual node
/// count) under every identifier scheme.
pub fn corpus(max_n: usize) -> Vec<Case> {
    let mut out = Vec::new();
    for name in FAMILIES {
        let mut seen = Vec::new();
        for &size in SIZES.iter().filter(|&&s| s <= max_n) {
            let family = Family::sized(name, size).unwrap();
            let n = family.node_count();
            if seen.contains(&n) || n > max_n {
                continue;
            }
            seen.push(n);
            for (scheme, seed) in schemes() {
                let spec = FamilySpec {
                    family,
                    seed,
                    ids: scheme,
                };
                out.push(Case {
                    label: format!("{name}(n={n}, ids={scheme:?}/{seed})"),
                    spec,
                    n,
                });
            }
        }
    }
    out
}

/// Same members, parents and depths.
pub fn same_forest(a: &RootedForest, b: &RootedForest) -> bool {
    a.universe() == b.universe()
        && (0..a.universe()).all(|v| {
            a.is_member(v) == b.is_member(v)
                && a.parent(v) == b.parent(v)
                && a.depth(v) == b.depth(v)
        })
}

/// All edge subsets of `K_n` whose graph is connected.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<_> = (0..pairs.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        // Union-find connectivity.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut parts = n;
        for &(u, v) in &edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                parts -= 1;
            }
        }
        if parts == 1 {
            out.push(edges);
        }
    }
    out
}
