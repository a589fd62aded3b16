//! Ground graph-coloring instances.
//!
//! The generator emits the grounded k-coloring encoding directly, with the
//! node/color/edge facts pre-evaluated away: a choice fact per node and
//! color, a support rule for `colored(n)` per choice, a coverage constraint
//! per node, a constraint per node and unordered color pair, and an
//! adjacency constraint per edge and color (larger endpoint first). A
//! general grounder is out of scope; these programs are the benchmark
//! family the blocker pipelines run on.

use std::collections::{BTreeMap, BTreeSet};

use aspomit::{Atom, Head, Program, RuleShape};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Color constants in emission order; `colors = k` uses the first `k`.
pub const COLOR_NAMES: [&str; 8] = [
    "red", "green", "blue", "yellow", "cyan", "magenta", "orange", "violet",
];

/// Attempts [`GraphInstance::random_unsatisfiable`] makes before giving up.
const UNSAT_SEARCH_ATTEMPTS: u64 = 1000;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("a graph needs at least one node")]
    NoNodes,
    #[error("at least 2 colors are required, got {0}")]
    TooFewColors(usize),
    #[error("at most {max} colors are supported, got {got}")]
    TooManyColors { got: usize, max: usize },
    #[error("edge ({0},{0}) is a self-loop")]
    SelfLoop(u32),
    #[error("edge ({0},{1}) mentions a node outside 1..={2}")]
    EdgeOutOfRange(u32, u32, u32),
    #[error("cannot place {want} edges on {nodes} nodes (at most {max})")]
    TooManyEdges { want: usize, nodes: u32, max: usize },
    #[error("no instance that needs more than {colors} colors found in {attempts} attempts")]
    UnsatSearchExhausted { colors: usize, attempts: u64 },
}

/// An undirected graph over nodes `1..=nodes` plus the number of colors.
#[derive(Debug, Clone)]
pub struct GraphInstance {
    nodes: u32,
    /// Normalized unordered pairs, smaller endpoint first.
    edges: BTreeSet<(u32, u32)>,
    colors: usize,
    /// Seed the edges were sampled with; 0 for fixed graphs.
    pub seed: u64,
}

impl GraphInstance {
    pub fn new(
        nodes: u32,
        edges: impl IntoIterator<Item = (u32, u32)>,
        colors: usize,
        seed: u64,
    ) -> Result<GraphInstance, InstanceError> {
        if nodes == 0 {
            return Err(InstanceError::NoNodes);
        }
        if colors < 2 {
            return Err(InstanceError::TooFewColors(colors));
        }
        if colors > COLOR_NAMES.len() {
            return Err(InstanceError::TooManyColors {
                got: colors,
                max: COLOR_NAMES.len(),
            });
        }
        let mut normalized = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(InstanceError::SelfLoop(a));
            }
            if a == 0 || b == 0 || a > nodes || b > nodes {
                return Err(InstanceError::EdgeOutOfRange(a, b, nodes));
            }
            normalized.insert((a.min(b), a.max(b)));
        }
        Ok(GraphInstance {
            nodes,
            edges: normalized,
            colors,
            seed,
        })
    }

    /// Samples `edge_count` distinct edges uniformly without replacement.
    pub fn random(
        nodes: u32,
        edge_count: usize,
        colors: usize,
        seed: u64,
    ) -> Result<GraphInstance, InstanceError> {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for a in 1..=nodes {
            for b in (a + 1)..=nodes {
                pairs.push((a, b));
            }
        }
        if edge_count > pairs.len() {
            return Err(InstanceError::TooManyEdges {
                want: edge_count,
                nodes,
                max: pairs.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pairs.shuffle(&mut rng);
        pairs.truncate(edge_count);
        GraphInstance::new(nodes, pairs, colors, seed)
    }

    /// Resamples from derived seeds until the graph is not k-colorable, so
    /// the generated program is unsatisfiable.
    pub fn random_unsatisfiable(
        nodes: u32,
        edge_count: usize,
        colors: usize,
        seed: u64,
    ) -> Result<GraphInstance, InstanceError> {
        for attempt in 0..UNSAT_SEARCH_ATTEMPTS {
            let derived = seed.wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15));
            let g = GraphInstance::random(nodes, edge_count, colors, derived)?;
            if !g.colorable() {
                return Ok(g);
            }
        }
        Err(InstanceError::UnsatSearchExhausted {
            colors,
            attempts: UNSAT_SEARCH_ATTEMPTS,
        })
    }

    pub fn nodes(&self) -> u32 {
        self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    /// Brute-force k-colorability check by backtracking; the independent
    /// oracle the generated programs are validated against.
    pub fn colorable(&self) -> bool {
        let n = self.nodes as usize;
        let mut adjacent = vec![Vec::new(); n + 1];
        for &(a, b) in &self.edges {
            adjacent[a as usize].push(b as usize);
            adjacent[b as usize].push(a as usize);
        }
        fn assign(
            v: usize,
            n: usize,
            k: usize,
            adjacent: &[Vec<usize>],
            color: &mut [usize],
        ) -> bool {
            if v > n {
                return true;
            }
            for c in 0..k {
                if adjacent[v].iter().all(|&w| color[w] != c) {
                    color[v] = c;
                    if assign(v + 1, n, k, adjacent, color) {
                        return true;
                    }
                    color[v] = usize::MAX;
                }
            }
            false
        }
        let mut color = vec![usize::MAX; n + 1];
        assign(1, n, self.colors, &adjacent, &mut color)
    }
}

/// Named fixed graphs: `non2col9` (9 nodes whose only odd cycle is the
/// triangle 1-2-3, 2 colors), `non3col8` (8 nodes containing the clique
/// 1-2-3-4, 3 colors), `triangle` (3 colors), and `single` (one node,
/// 2 colors).
pub fn preset(name: &str) -> Option<GraphInstance> {
    let g = match name {
        "non2col9" => GraphInstance::new(
            9,
            [
                (1, 2),
                (1, 3),
                (2, 3),
                (1, 6),
                (6, 7),
                (2, 7),
                (2, 8),
                (8, 9),
                (3, 9),
                (3, 4),
                (4, 5),
                (1, 5),
            ],
            2,
            0,
        ),
        "non3col8" => GraphInstance::new(
            8,
            [
                (1, 2),
                (1, 3),
                (1, 4),
                (2, 3),
                (2, 4),
                (3, 4),
                (1, 5),
                (4, 5),
                (1, 6),
                (2, 6),
                (2, 7),
                (3, 7),
                (3, 8),
                (4, 8),
            ],
            3,
            0,
        ),
        "triangle" => GraphInstance::new(3, [(1, 2), (1, 3), (2, 3)], 3, 0),
        "single" => GraphInstance::new(1, [], 2, 0),
        _ => return None,
    };
    Some(g.expect("presets are valid instances"))
}

pub const PRESET_NAMES: [&str; 4] = ["non2col9", "non3col8", "triangle", "single"];

/// A generated ground coloring program plus its object groups (node name to
/// the atoms about that node), the unit the initial-omission strategies
/// select by.
#[derive(Debug, Clone)]
pub struct GroundColoring {
    pub program: Program,
    pub groups: BTreeMap<String, Vec<Atom>>,
}

fn chosen(n: u32, color: &str) -> Atom {
    Atom::new(format!("chosenColor({n},{color})"))
}

fn colored(n: u32) -> Atom {
    Atom::new(format!("colored({n})"))
}

/// Emits the ground coloring program for an instance: choice facts, support
/// rules, coverage constraints, same-node color-pair constraints, and
/// adjacency constraints, in that order.
pub fn generate_ground_coloring(g: &GraphInstance) -> GroundColoring {
    let palette = &COLOR_NAMES[..g.colors];
    let mut shapes: Vec<RuleShape> = Vec::new();
    for color in palette {
        for n in 1..=g.nodes {
            shapes.push((Head::Choice(chosen(n, color)), vec![], vec![], vec![]));
        }
    }
    for color in palette {
        for n in 1..=g.nodes {
            shapes.push((
                Head::Plain(colored(n)),
                vec![chosen(n, color)],
                vec![],
                vec![],
            ));
        }
    }
    for n in 1..=g.nodes {
        shapes.push((Head::Bottom, vec![], vec![colored(n)], vec![]));
    }
    for n in 1..=g.nodes {
        for (i, c1) in palette.iter().enumerate() {
            for c2 in &palette[i + 1..] {
                shapes.push((
                    Head::Bottom,
                    vec![chosen(n, c1), chosen(n, c2)],
                    vec![],
                    vec![],
                ));
            }
        }
    }
    for color in palette {
        for &(a, b) in &g.edges {
            shapes.push((
                Head::Bottom,
                vec![chosen(b, color), chosen(a, color)],
                vec![],
                vec![],
            ));
        }
    }
    let program = Program::new(shapes);
    let width = g.nodes.to_string().len();
    let mut groups = BTreeMap::new();
    for n in 1..=g.nodes {
        let mut atoms: Vec<Atom> = palette.iter().map(|c| chosen(n, c)).collect();
        atoms.push(colored(n));
        groups.insert(format!("n{n:0width$}"), atoms);
    }
    GroundColoring { program, groups }
}
