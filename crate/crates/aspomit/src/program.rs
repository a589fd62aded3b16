//! Ground-program data model: atoms, rules, programs, interpretations, and
//! omission sets, plus the atom-level dependency graphs shared by the
//! abstraction and debugging layers.
//!
//! Atom identity is exact string equality of the ground term text; arguments
//! are never interpreted. All types are immutable values after construction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

/// Reserved prefix for tool-introduced atoms. User input containing it is
/// rejected by the parser.
pub const GENERATED_PREFIX: &str = "__";

/// A ground atom, e.g. `a` or `chosenColor(1,red)`.
///
/// Cheap to clone; the text is shared.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    /// Builds an atom from its exact ground text.
    pub fn new(text: impl AsRef<str>) -> Self {
        Atom(Arc::from(text.as_ref()))
    }

    pub fn text(&self) -> &str {
        &self.0
    }

    /// True for tool-introduced atoms (reserved `__` prefix).
    pub fn generated(&self) -> bool {
        self.0.starts_with(GENERATED_PREFIX)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({})", self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

/// Rule head: `⊥` for constraints, a plain atom, a choice atom `{α}`, or a
/// disjunction (parse-and-split only; never reaches the solver or the
/// abstraction operator).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Head {
    Bottom,
    Plain(Atom),
    Choice(Atom),
    Disjunction(Vec<Atom>),
}

impl Head {
    /// The head atom for plain and choice heads, `None` for `⊥` and
    /// disjunctions.
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Head::Plain(a) | Head::Choice(a) => Some(a),
            Head::Bottom | Head::Disjunction(_) => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Head::Bottom)
    }
}

/// Head plus the three body parts in input order, the raw material of
/// [`Program::new`].
pub type RuleShape = (Head, Vec<Atom>, Vec<Atom>, Vec<Atom>);

/// [`Rule::shape_key`]: head plus body parts as sets, name-free.
pub type ShapeKey = (Head, BTreeSet<Atom>, BTreeSet<Atom>, BTreeSet<Atom>);

/// A ground rule `H ← B+, not B−, not not B±±`.
///
/// Body parts are duplicate-free and keep insertion order so that serialized
/// output is stable. An atom may appear in more than one part (`x, not x` is
/// a legal, never-applicable body).
#[derive(Clone, Debug)]
pub struct Rule {
    /// Dense ordinal within the owning program (0-based input order).
    pub id: usize,
    /// Stable rule-name token `r1`, `r2`, …; transformed rules keep the name
    /// of their source rule.
    pub name: String,
    pub head: Head,
    pos: Vec<Atom>,
    neg: Vec<Atom>,
    negneg: Vec<Atom>,
}

fn dedup(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = HashSet::new();
    atoms
        .into_iter()
        .filter(|a| seen.insert(a.clone()))
        .collect()
}

impl Rule {
    pub fn new(
        id: usize,
        name: impl Into<String>,
        head: Head,
        pos: Vec<Atom>,
        neg: Vec<Atom>,
        negneg: Vec<Atom>,
    ) -> Self {
        Rule {
            id,
            name: name.into(),
            head,
            pos: dedup(pos),
            neg: dedup(neg),
            negneg: dedup(negneg),
        }
    }

    pub fn pos_body(&self) -> &[Atom] {
        &self.pos
    }

    pub fn neg_body(&self) -> &[Atom] {
        &self.neg
    }

    pub fn negneg_body(&self) -> &[Atom] {
        &self.negneg
    }

    /// All body atoms B±(r) = B+ ∪ B− (double-negated atoms included, they
    /// only occur in generated meta-programs).
    pub fn body_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.pos
            .iter()
            .chain(self.neg.iter())
            .chain(self.negneg.iter())
    }

    pub fn body_is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty() && self.negneg.is_empty()
    }

    /// True iff I ⊨ B(r): B+ ⊆ I, B− ∩ I = ∅, B±± ⊆ I.
    pub fn body_satisfied(&self, i: &Interpretation) -> bool {
        self.pos.iter().all(|a| i.contains(a))
            && self.neg.iter().all(|a| !i.contains(a))
            && self.negneg.iter().all(|a| i.contains(a))
    }

    /// Shape equality: same name, head, and body parts as sets. Used by
    /// program-identity checks that ignore rule ids.
    pub fn same_shape(&self, other: &Rule) -> bool {
        self.name == other.name
            && self.head == other.head
            && as_set(&self.pos) == as_set(&other.pos)
            && as_set(&self.neg) == as_set(&other.neg)
            && as_set(&self.negneg) == as_set(&other.negneg)
    }

    /// Shape key without the rule name, for set comparisons of serialized
    /// rule sets (golden-file matching "up to rule order").
    pub fn shape_key(&self) -> ShapeKey {
        (
            self.head.clone(),
            as_set(&self.pos),
            as_set(&self.neg),
            as_set(&self.negneg),
        )
    }
}

fn as_set(v: &[Atom]) -> BTreeSet<Atom> {
    v.iter().cloned().collect()
}

/// An ordered set of rules together with the atom universe 𝒜.
///
/// The universe lists every atom occurring in a rule (first-occurrence
/// order: head, then positive, negative, and double-negated body) plus any
/// declared-but-unused atoms carried over from a source program.
#[derive(Clone, Debug)]
pub struct Program {
    rules: Vec<Rule>,
    universe: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl Program {
    /// Builds a program from rule shapes, assigning ids `0..n` and names
    /// `r1..rn` in order.
    pub fn new(shapes: Vec<RuleShape>) -> Self {
        let rules = shapes
            .into_iter()
            .enumerate()
            .map(|(i, (head, pos, neg, negneg))| {
                Rule::new(i, format!("r{}", i + 1), head, pos, neg, negneg)
            })
            .collect();
        Self::from_rules(rules)
    }

    /// Builds a program from fully-formed rules, re-assigning dense ids but
    /// keeping the given names. Names must be unique.
    pub fn from_rules(rules: Vec<Rule>) -> Self {
        let mut rules = rules;
        for (i, r) in rules.iter_mut().enumerate() {
            r.id = i;
        }
        debug_assert!(
            rules.iter().map(|r| &r.name).collect::<HashSet<_>>().len() == rules.len(),
            "rule names must be unique"
        );
        let mut prog = Program {
            rules,
            universe: Vec::new(),
            index: HashMap::new(),
        };
        let atoms: Vec<Atom> = prog
            .rules
            .iter()
            .flat_map(|r| {
                r.head
                    .atom()
                    .into_iter()
                    .cloned()
                    .chain(match &r.head {
                        Head::Disjunction(ds) => ds.clone(),
                        _ => Vec::new(),
                    })
                    .chain(r.body_atoms().cloned())
                    .collect::<Vec<_>>()
            })
            .collect();
        for a in atoms {
            prog.push_universe(a);
        }
        prog
    }

    /// Extends the universe with atoms that occur in no rule (kept atoms of
    /// an abstraction whose rules were all dropped, for example).
    pub fn with_universe(mut self, extra: impl IntoIterator<Item = Atom>) -> Self {
        for a in extra {
            self.push_universe(a);
        }
        self
    }

    fn push_universe(&mut self, a: Atom) {
        if !self.index.contains_key(&a) {
            self.index.insert(a.clone(), self.universe.len());
            self.universe.push(a);
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Rule {
        &self.rules[id]
    }

    /// The atom universe 𝒜 in first-occurrence order.
    pub fn universe(&self) -> &[Atom] {
        &self.universe
    }

    pub fn universe_contains(&self, a: &Atom) -> bool {
        self.index.contains_key(a)
    }

    pub fn atom_id(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn has_choice_heads(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.head, Head::Choice(_)))
    }

    pub fn has_disjunctive_heads(&self) -> bool {
        self.rules
            .iter()
            .any(|r| matches!(r.head, Head::Disjunction(_)))
    }

    /// def(α,Π): the rules whose head atom (plain or choice) equals α.
    /// Unknown atoms yield an empty set.
    pub fn def_of(&self, alpha: &Atom) -> Vec<&Rule> {
        self.rules
            .iter()
            .filter(|r| r.head.atom() == Some(alpha))
            .collect()
    }

    /// Program identity up to rule ids: same rule multiset (by name and
    /// shape) and same universe as a set.
    pub fn same_program(&self, other: &Program) -> bool {
        if self.rules.len() != other.rules.len() {
            return false;
        }
        let mut sorted_a: Vec<&Rule> = self.rules.iter().collect();
        let mut sorted_b: Vec<&Rule> = other.rules.iter().collect();
        sorted_a.sort_by(|x, y| x.name.cmp(&y.name));
        sorted_b.sort_by(|x, y| x.name.cmp(&y.name));
        sorted_a
            .iter()
            .zip(sorted_b.iter())
            .all(|(x, y)| x.same_shape(y))
            && self.universe.iter().collect::<BTreeSet<_>>()
                == other.universe.iter().collect::<BTreeSet<_>>()
    }

    /// Multiset of head/body shapes, ignoring both ids and names. Used for
    /// golden rule-set comparisons "up to rule order".
    pub fn shape_multiset(&self) -> BTreeMap<ShapeKey, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rules {
            *m.entry(r.shape_key()).or_insert(0) += 1;
        }
        m
    }

    /// The same rules and universe under fresh sequential names `r1..rn` in
    /// the current rule order. Meta-program builders renumber first so that
    /// generated rule tags are short and collision-free.
    pub fn renumbered(&self) -> Program {
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Rule::new(
                    i,
                    format!("r{}", i + 1),
                    r.head.clone(),
                    r.pos.clone(),
                    r.neg.clone(),
                    r.negneg.clone(),
                )
            })
            .collect();
        Program::from_rules(rules).with_universe(self.universe.iter().cloned())
    }
}

/// A finite set of atoms; interpretations, answer sets, and abstract answer
/// sets all use this shape.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub struct Interpretation(BTreeSet<Atom>);

impl Interpretation {
    pub fn empty() -> Self {
        Interpretation(BTreeSet::new())
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Interpretation(atoms.into_iter().collect())
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    pub fn insert(&mut self, a: Atom) {
        self.0.insert(a);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    /// I|_keep: the projection of this interpretation to the given atoms.
    pub fn project(&self, keep: &BTreeSet<Atom>) -> Interpretation {
        Interpretation(self.0.intersection(keep).cloned().collect())
    }

    /// Drops all generated (`__`-prefixed) atoms.
    pub fn strip_generated(&self) -> Interpretation {
        Interpretation(self.0.iter().filter(|a| !a.generated()).cloned().collect())
    }

    /// Renders as `{a, b}` with atoms in lexicographic order.
    pub fn display(&self) -> String {
        let inner: Vec<&str> = self.0.iter().map(|a| a.text()).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

/// The omission set A together with the "⊥ is omitted too" flag used for
/// total omission (omit(Π, 𝒜∪{⊥}) = ∅).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OmissionSet {
    omitted: BTreeSet<Atom>,
    includes_bottom: bool,
}

impl OmissionSet {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        OmissionSet {
            omitted: atoms.into_iter().collect(),
            includes_bottom: false,
        }
    }

    pub fn with_bottom(mut self) -> Self {
        self.includes_bottom = true;
        self
    }

    pub fn includes_bottom(&self) -> bool {
        self.includes_bottom
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.omitted
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.omitted.contains(a)
    }

    pub fn len(&self) -> usize {
        self.omitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omitted.is_empty()
    }

    /// Ā: the kept part of the given universe.
    pub fn kept(&self, universe: &[Atom]) -> BTreeSet<Atom> {
        universe
            .iter()
            .filter(|a| !self.omitted.contains(a))
            .cloned()
            .collect()
    }
}

/// A dependency edge H(r) → α with the sign of the body literal that
/// induced it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeSign {
    Positive,
    Negative,
}

/// Atom-level dependency graphs G_Π (signed) and G_Π⁺ (positive only),
/// plus tightness (acyclicity of the positive graph).
#[derive(Clone, Debug)]
pub struct DependencyGraphs {
    pub full: Vec<(Atom, Atom, EdgeSign)>,
    pub positive: Vec<(Atom, Atom)>,
    pub is_tight: bool,
}

/// Builds G_Π and G_Π⁺ for a program without disjunctive heads. Choice
/// heads contribute edges like plain heads; constraints contribute none.
pub fn dependency_graphs(program: &Program) -> DependencyGraphs {
    debug_assert!(!program.has_disjunctive_heads());
    let mut full = Vec::new();
    let mut positive = Vec::new();
    for r in program.rules() {
        let Some(h) = r.head.atom() else { continue };
        for a in r.pos_body() {
            full.push((h.clone(), a.clone(), EdgeSign::Positive));
            positive.push((h.clone(), a.clone()));
        }
        for a in r.neg_body() {
            full.push((h.clone(), a.clone(), EdgeSign::Negative));
        }
    }
    let is_tight = acyclic(&positive);
    DependencyGraphs {
        full,
        positive,
        is_tight,
    }
}

fn acyclic(edges: &[(Atom, Atom)]) -> bool {
    let mut adj: HashMap<&Atom, Vec<&Atom>> = HashMap::new();
    let mut nodes: BTreeSet<&Atom> = BTreeSet::new();
    for (from, to) in edges {
        adj.entry(from).or_default().push(to);
        nodes.insert(from);
        nodes.insert(to);
    }
    // Iterative DFS with colors: 0 unseen, 1 on stack, 2 done.
    let mut color: HashMap<&Atom, u8> = HashMap::new();
    for start in &nodes {
        if color.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack = vec![(*start, 0usize)];
        color.insert(start, 1);
        while let Some((node, next)) = stack.pop() {
            let succs = adj.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next < succs.len() {
                stack.push((node, next + 1));
                let s = succs[next];
                match color.get(s).copied().unwrap_or(0) {
                    0 => {
                        color.insert(s, 1);
                        stack.push((s, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                color.insert(node, 2);
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Atom {
        Atom::new(s)
    }

    #[test]
    fn body_parts_collapse_duplicates() {
        let r = Rule::new(
            0,
            "r1",
            Head::Plain(atom("a")),
            vec![atom("b"), atom("b")],
            vec![atom("b")],
            vec![],
        );
        assert_eq!(r.pos_body(), &[atom("b")]);
        assert_eq!(r.neg_body(), &[atom("b")]);
    }

    #[test]
    fn universe_keeps_first_occurrence_order() {
        let p = Program::new(vec![
            (Head::Plain(atom("c")), vec![], vec![atom("d")], vec![]),
            (
                Head::Plain(atom("a")),
                vec![atom("c")],
                vec![atom("b")],
                vec![],
            ),
        ]);
        let texts: Vec<&str> = p.universe().iter().map(|a| a.text()).collect();
        assert_eq!(texts, vec!["c", "d", "a", "b"]);
    }

    #[test]
    fn generated_flag_follows_prefix() {
        assert!(atom("__c(a)").generated());
        assert!(!atom("c").generated());
    }

    #[test]
    fn tightness_detects_positive_cycle() {
        // a ← b. b ← not c, a.  (positive cycle a ↔ b)
        let p = Program::new(vec![
            (Head::Plain(atom("a")), vec![atom("b")], vec![], vec![]),
            (
                Head::Plain(atom("b")),
                vec![atom("a")],
                vec![atom("c")],
                vec![],
            ),
        ]);
        let g = dependency_graphs(&p);
        assert!(!g.is_tight);
        assert_eq!(g.positive.len(), 2);
        assert_eq!(g.full.len(), 3);
    }

    #[test]
    fn renumbering_assigns_fresh_sequential_names() {
        let p = Program::from_rules(vec![
            Rule::new(
                0,
                "r2__c",
                Head::Plain(atom("a")),
                vec![atom("b")],
                vec![],
                vec![],
            ),
            Rule::new(1, "r9", Head::Plain(atom("b")), vec![], vec![], vec![]),
        ])
        .with_universe([atom("z")]);
        let r = p.renumbered();
        let names: Vec<&str> = r.rules().iter().map(|x| x.name.as_str()).collect();
        assert_eq!(names, vec!["r1", "r2"]);
        assert_eq!(r.universe(), p.universe());
    }
}
