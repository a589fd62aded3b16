//! Bundled example programs, addressable as `fixture:NAME` wherever the
//! binary accepts a program input.
//!
//! The set covers the worked examples the integration tests pin down: the
//! toggle program and its unsatisfiable twin, the small debugging examples
//! (spurious support, a disregarded positive loop, a disregarded odd loop),
//! a positive dependency chain, the two non-colorable graph encodings, and
//! the expected blocker rule set of the nine-node graph.

use std::collections::BTreeMap;

use aspomit::parser;
use aspomit::{Atom, Program};

use crate::gcolor;

const TOGGLE: &str = "c :- not d.\nd :- not c.\na :- not b, c.\nb :- d.\n";
const TOGGLE_UNSAT: &str = "c :- not d.\nd :- not c.\na :- not b, c.\nb :- not b.\n";
const SPURIOUS_SUPPORT: &str = "c :- not d.\nd :- not c.\na :- not d, c.\nb :- a.\n";
const POSITIVE_LOOP: &str = "a :- b.\nb :- not c, a.\n";
const ODD_LOOP: &str = "a :- b.\nb :- not a, c.\nc.\n";
const CHAIN: &str = "b :- d.\nd :- c, a.\na :- c.\nc.\n";

/// The minimal blocker rule set of `non2col9-k2`: what remains after
/// omitting every atom of nodes 4 through 9.
const NON2COL9_BLOCKER: &str = "\
{chosenColor(1,red)}.
{chosenColor(2,red)}.
{chosenColor(3,red)}.
{chosenColor(1,green)}.
{chosenColor(2,green)}.
{chosenColor(3,green)}.
colored(1) :- chosenColor(1,red).
colored(2) :- chosenColor(2,red).
colored(3) :- chosenColor(3,red).
colored(1) :- chosenColor(1,green).
colored(2) :- chosenColor(2,green).
colored(3) :- chosenColor(3,green).
:- not colored(1).
:- not colored(2).
:- not colored(3).
:- chosenColor(1,red), chosenColor(1,green).
:- chosenColor(2,red), chosenColor(2,green).
:- chosenColor(3,red), chosenColor(3,green).
:- chosenColor(2,red), chosenColor(1,red).
:- chosenColor(3,red), chosenColor(1,red).
:- chosenColor(3,red), chosenColor(2,red).
:- chosenColor(2,green), chosenColor(1,green).
:- chosenColor(3,green), chosenColor(1,green).
:- chosenColor(3,green), chosenColor(2,green).
";

/// A fixture program, with object groups when it comes from the
/// graph-coloring generator.
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub program: Program,
    pub groups: Option<BTreeMap<String, Vec<Atom>>>,
}

struct Entry {
    name: &'static str,
    summary: &'static str,
    source: Source,
}

enum Source {
    Text(&'static str),
    Coloring(&'static str),
}

const ENTRIES: [Entry; 9] = [
    Entry {
        name: "toggle",
        summary: "two answer sets {c, a} and {d, b}; omitting {b, d} admits the spurious {c}",
        source: Source::Text(TOGGLE),
    },
    Entry {
        name: "toggle-unsat",
        summary: "unsatisfiable toggle variant; its minimal blocker is {b}",
        source: Source::Text(TOGGLE_UNSAT),
    },
    Entry {
        name: "spurious-support",
        summary:
            "omitting {a, d} leaves {b} spurious: b kept its support rule while a was guessed away",
        source: Source::Text(SPURIOUS_SUPPORT),
    },
    Entry {
        name: "positive-loop",
        summary:
            "a and b support each other positively; omitting {a} hides the unfounded loop under {b}",
        source: Source::Text(POSITIVE_LOOP),
    },
    Entry {
        name: "odd-loop",
        summary: "a and b form an odd loop; omitting {a, b} makes {c} spurious",
        source: Source::Text(ODD_LOOP),
    },
    Entry {
        name: "chain",
        summary: "positive dependency chain c, a, d, b; refinement-bound example",
        source: Source::Text(CHAIN),
    },
    Entry {
        name: "non2col9-k2",
        summary:
            "2-coloring of a 9-node graph whose only odd cycle is the triangle 1-2-3; unsatisfiable",
        source: Source::Coloring("non2col9"),
    },
    Entry {
        name: "non3col8-k3",
        summary: "3-coloring of an 8-node graph containing the clique 1-2-3-4; unsatisfiable",
        source: Source::Coloring("non3col8"),
    },
    Entry {
        name: "non2col9-k2-blocker",
        summary: "expected minimal blocker rule set of non2col9-k2 (everything about nodes 1-3)",
        source: Source::Text(NON2COL9_BLOCKER),
    },
];

/// All fixture names, in listing order.
pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

/// Loads a fixture by name.
pub fn load(name: &str) -> Option<Fixture> {
    let entry = ENTRIES.iter().find(|e| e.name == name)?;
    let (program, groups) = match entry.source {
        Source::Text(text) => {
            let program = parser::parse(text).expect("fixture sources parse");
            (program, None)
        }
        Source::Coloring(preset) => {
            let g = gcolor::preset(preset).expect("fixture presets exist");
            let out = gcolor::generate_ground_coloring(&g);
            (out.program, Some(out.groups))
        }
    };
    Some(Fixture {
        name: entry.name,
        summary: entry.summary,
        program,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use aspomit::solver;

    #[test]
    fn every_fixture_loads_and_parses() {
        for name in names() {
            let f = load(name).unwrap();
            assert!(!f.program.rules().is_empty(), "{name} is empty");
            assert!(!f.summary.is_empty());
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(load("no-such-fixture").is_none());
    }

    #[test]
    fn blocker_fixture_matches_the_generated_abstraction() {
        use aspomit::abstraction;
        use aspomit::OmissionSet;
        let full = load("non2col9-k2").unwrap();
        let expected = load("non2col9-k2-blocker").unwrap();
        let keep = |n: u32| n <= 3;
        let omission = OmissionSet::new(
            full.program
                .universe()
                .iter()
                .filter(|a| {
                    let text = a.text();
                    let node: u32 = text
                        .trim_end_matches(')')
                        .rsplit('(')
                        .next()
                        .and_then(|args| args.split(',').next())
                        .and_then(|n| n.parse().ok())
                        .expect("coloring atoms carry the node first");
                    !keep(node)
                })
                .cloned(),
        );
        assert_eq!(omission.len(), 18);
        let abstracted = abstraction::omit(&full.program, &omission);
        assert_eq!(abstracted.rules().len(), 24);
        assert_eq!(
            abstracted.shape_multiset(),
            expected.program.shape_multiset()
        );
        assert!(!solver::is_satisfiable(&abstracted).unwrap());
    }
}
