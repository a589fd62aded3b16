//! Explains spurious abstract answer sets by building a tagged debugging
//! meta-program over the original rules. The meta-program re-evaluates every
//! rule under the pinned abstract interpretation, lets dedicated abnormality
//! atoms absorb the mismatches (unsatisfied rules, unsupported atoms, loop
//! violations), and derives `badomit` verdicts that name the omitted atoms
//! responsible. Loop membership is computed natively and cross-checked
//! against a generated reachability program solved by the solver module.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::abstraction;
use crate::program::{Atom, Head, Interpretation, OmissionSet, Program, Rule, GENERATED_PREFIX};
use crate::solver::{self, Objective, SolveError, SolveRequest};

#[derive(Debug, Error)]
pub enum DebugError {
    #[error("{0} is not an answer set of the abstract program")]
    NotAnAbstractAnswerSet(String),
    #[error("malformed tag atom `{0}`: {1}")]
    MalformedTagAtom(String, String),
    #[error("debug program has no answer set")]
    NoAnswerSet,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Verdict category carried by a `badomit` tag.
///
/// `Type1` marks an original rule that is falsified although its weakened
/// counterpart fired; `Type2` marks an atom kept true without support while
/// the weakened rule for it fired; `Type3` marks loop behaviour (an odd loop
/// or unfounded positive loop) that omission disregarded; `Type4` propagates
/// blame through rules that were dropped entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeTag {
    Type1,
    Type2,
    Type3,
    Type4,
}

impl TypeTag {
    pub const ALL: [TypeTag; 4] = [
        TypeTag::Type1,
        TypeTag::Type2,
        TypeTag::Type3,
        TypeTag::Type4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TypeTag::Type1 => "type1",
            TypeTag::Type2 => "type2",
            TypeTag::Type3 => "type3",
            TypeTag::Type4 => "type4",
        }
    }

    pub fn parse(text: &str) -> Option<TypeTag> {
        TypeTag::ALL.into_iter().find(|t| t.label() == text)
    }
}

/// An omitted atom blamed for a spurious abstract answer set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BadOmission {
    pub atom: Atom,
    pub type_tag: TypeTag,
}

impl BadOmission {
    pub fn new(atom: impl AsRef<str>, type_tag: TypeTag) -> Self {
        BadOmission {
            atom: Atom::new(atom),
            type_tag,
        }
    }
}

/// The vocabulary of generated atoms used by debug programs.
///
/// Rendering is injective over (kind, args): every variant maps to a unique
/// `__`-prefixed functor, so tags can never collide with user atoms (the
/// parser rejects user atoms starting with the generated prefix).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TagAtom {
    /// The body of the named rule holds.
    Ap(String),
    /// The body of the named rule is blocked.
    Bl(String),
    /// The named rule's plain head derivation is switched off.
    Ko(String),
    /// The named rule fires but its head is false.
    AbP(String),
    /// The atom is true although all of its rules are blocked.
    AbC(Atom),
    /// The atom is true by loop-abnormality fiat.
    AbL(Atom),
    /// Verdict: the atom was badly omitted, with a category.
    BadOmit(Atom, TypeTag),
    /// Projection of `BadOmit` onto the atom alone.
    BadOmitAtom(Atom),
    /// The named rule's remaining body holds under the abstract answer set.
    AbsAp(String),
    /// The named rule was weakened into a choice rule.
    Changed(String),
    /// The named rule was weakened or dropped.
    Modified(String),
    /// The named rule was dropped.
    Omitted(String),
    /// The atom is omitted.
    OmittedAtom(Atom),
    /// The atom is omitted from the named rule's body.
    OmittedAtomFrom(Atom, String),
    /// The two atoms lie on a cycle with odd negative parity.
    InOddLoop(Atom, Atom),
    /// The two atoms lie on a positive cycle.
    InPosLoop(Atom, Atom),
    /// The atom's loop abnormality is tied to the omission.
    Faulty(Atom),
    /// Some faulty atom exists; gate for loop abnormalities.
    SomeFaulty,
    /// The named rule has this head atom.
    HeadOf(String, Atom),
    /// Complement atom introduced by choice expansion.
    Compl(Atom),
}

impl TagAtom {
    pub fn render(&self) -> Atom {
        let text = match self {
            TagAtom::Ap(r) => format!("__ap({r})"),
            TagAtom::Bl(r) => format!("__bl({r})"),
            TagAtom::Ko(r) => format!("__ko({r})"),
            TagAtom::AbP(r) => format!("__ab_p({r})"),
            TagAtom::AbC(a) => format!("__ab_c({})", a.text()),
            TagAtom::AbL(a) => format!("__ab_l({})", a.text()),
            TagAtom::BadOmit(a, t) => format!("__badomit({},{})", a.text(), t.label()),
            TagAtom::BadOmitAtom(a) => format!("__badomit({})", a.text()),
            TagAtom::AbsAp(r) => format!("__absAp({r})"),
            TagAtom::Changed(r) => format!("__changed({r})"),
            TagAtom::Modified(r) => format!("__modified({r})"),
            TagAtom::Omitted(r) => format!("__omitted({r})"),
            TagAtom::OmittedAtom(a) => format!("__omittedAtom({})", a.text()),
            TagAtom::OmittedAtomFrom(a, r) => format!("__omittedAtomFrom({},{r})", a.text()),
            TagAtom::InOddLoop(x, y) => format!("__inOddLoop({},{})", x.text(), y.text()),
            TagAtom::InPosLoop(x, y) => format!("__inPosLoop({},{})", x.text(), y.text()),
            TagAtom::Faulty(a) => format!("__faulty({})", a.text()),
            TagAtom::SomeFaulty => "__someFaulty".to_string(),
            TagAtom::HeadOf(r, h) => format!("__head({r},{})", h.text()),
            TagAtom::Compl(a) => return solver::complement_atom(a),
        };
        Atom::new(text)
    }

    /// Decodes a generated atom back into its tag. Returns `None` for atoms
    /// outside the tag vocabulary (including user atoms).
    pub fn parse(atom: &Atom) -> Option<TagAtom> {
        let rest = atom.text().strip_prefix(GENERATED_PREFIX)?;
        if rest == "someFaulty" {
            return Some(TagAtom::SomeFaulty);
        }
        let open = rest.find('(')?;
        let functor = &rest[..open];
        let args_text = rest[open + 1..].strip_suffix(')')?;
        let args = split_top_level(args_text)?;
        match (functor, args.as_slice()) {
            ("ap", [r]) => Some(TagAtom::Ap(r.to_string())),
            ("bl", [r]) => Some(TagAtom::Bl(r.to_string())),
            ("ko", [r]) => Some(TagAtom::Ko(r.to_string())),
            ("ab_p", [r]) => Some(TagAtom::AbP(r.to_string())),
            ("ab_c", [a]) => Some(TagAtom::AbC(Atom::new(a))),
            ("ab_l", [a]) => Some(TagAtom::AbL(Atom::new(a))),
            ("badomit", [a]) => Some(TagAtom::BadOmitAtom(Atom::new(a))),
            ("badomit", [a, t]) => TypeTag::parse(t).map(|tag| TagAtom::BadOmit(Atom::new(a), tag)),
            ("absAp", [r]) => Some(TagAtom::AbsAp(r.to_string())),
            ("changed", [r]) => Some(TagAtom::Changed(r.to_string())),
            ("modified", [r]) => Some(TagAtom::Modified(r.to_string())),
            ("omitted", [r]) => Some(TagAtom::Omitted(r.to_string())),
            ("omittedAtom", [a]) => Some(TagAtom::OmittedAtom(Atom::new(a))),
            ("omittedAtomFrom", [a, r]) => {
                Some(TagAtom::OmittedAtomFrom(Atom::new(a), r.to_string()))
            }
            ("inOddLoop", [x, y]) => Some(TagAtom::InOddLoop(Atom::new(x), Atom::new(y))),
            ("inPosLoop", [x, y]) => Some(TagAtom::InPosLoop(Atom::new(x), Atom::new(y))),
            ("faulty", [a]) => Some(TagAtom::Faulty(Atom::new(a))),
            ("head", [r, h]) => Some(TagAtom::HeadOf(r.to_string(), Atom::new(h))),
            ("c", [a]) => Some(TagAtom::Compl(Atom::new(a))),
            _ => None,
        }
    }
}

/// Splits `a,b(c,d),e` into `["a", "b(c,d)", "e"]`. Returns `None` on
/// unbalanced parentheses or empty segments.
fn split_top_level(text: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&text[start..]);
    if parts.iter().any(|p| p.is_empty()) {
        return None;
    }
    Some(parts)
}

/// Normal form used by the debug builders: disjunctive heads split, choice
/// heads expanded, rules renamed `r1..rn`.
pub fn normalize(program: &Program) -> Program {
    solver::expand_choices(&abstraction::split_disjunctive(program)).renumbered()
}

/// Accumulates rules with dense ids and caller-supplied unique names.
struct RuleBag(Vec<Rule>);

impl RuleBag {
    fn new() -> Self {
        RuleBag(Vec::new())
    }

    fn push(
        &mut self,
        name: String,
        head: Head,
        pos: Vec<Atom>,
        neg: Vec<Atom>,
        negneg: Vec<Atom>,
    ) {
        let id = self.0.len();
        self.0.push(Rule::new(id, name, head, pos, neg, negneg));
    }

    fn fact(&mut self, name: String, atom: Atom) {
        self.push(name, Head::Plain(atom), vec![], vec![], vec![]);
    }
}

/// Concatenates rule sections into one program with fresh dense ids.
fn assemble(sections: Vec<Vec<Rule>>) -> Program {
    let mut rules = Vec::new();
    for r in sections.into_iter().flatten() {
        let id = rules.len();
        rules.push(Rule::new(
            id,
            r.name.clone(),
            r.head.clone(),
            r.pos_body().to_vec(),
            r.neg_body().to_vec(),
            r.negneg_body().to_vec(),
        ));
    }
    Program::from_rules(rules)
}

fn head_in_omission(rule: &Rule, omission: &OmissionSet) -> bool {
    match rule.head.atom() {
        Some(h) => omission.contains(h),
        None => omission.includes_bottom(),
    }
}

fn touched(rule: &Rule, omission: &OmissionSet) -> bool {
    rule.body_atoms().any(|a| omission.contains(a))
}

/// The rule-evaluation layer: for every rule, its head is rederived from an
/// applicability atom (switchable via `ko`), and a blockage atom records
/// each way the body can fail. Constraints contribute no head rule; their
/// violation is caught separately. Facts are applicable unconditionally and
/// can never be blocked.
pub fn build_meta(program: &Program) -> Program {
    Program::from_rules(build_meta_rules(program))
}

fn build_meta_rules(program: &Program) -> Vec<Rule> {
    debug_assert!(!program.has_choice_heads() && !program.has_disjunctive_heads());
    let mut bag = RuleBag::new();
    for r in program.rules() {
        let ap = TagAtom::Ap(r.name.clone()).render();
        if let Some(h) = r.head.atom() {
            bag.push(
                format!("{}__h", r.name),
                Head::Plain(h.clone()),
                vec![ap.clone()],
                vec![TagAtom::Ko(r.name.clone()).render()],
                vec![],
            );
        }
        bag.push(
            format!("{}__ap", r.name),
            Head::Plain(ap),
            r.pos_body().to_vec(),
            r.neg_body().to_vec(),
            r.negneg_body().to_vec(),
        );
        let bl = TagAtom::Bl(r.name.clone()).render();
        let mut i = 0;
        for a in r.pos_body() {
            i += 1;
            bag.push(
                format!("{}__bl{i}", r.name),
                Head::Plain(bl.clone()),
                vec![],
                vec![a.clone()],
                vec![],
            );
        }
        for a in r.neg_body() {
            i += 1;
            bag.push(
                format!("{}__bl{i}", r.name),
                Head::Plain(bl.clone()),
                vec![],
                vec![],
                vec![a.clone()],
            );
        }
        for a in r.negneg_body() {
            i += 1;
            bag.push(
                format!("{}__bl{i}", r.name),
                Head::Plain(bl.clone()),
                vec![],
                vec![a.clone()],
                vec![],
            );
        }
    }
    bag.0
}

/// The abnormality layer on top of [`build_meta`].
///
/// Rules whose body touches the omission but whose head survives get their
/// plain derivation switched off and replaced by a choice, with `ab_p`
/// recording a fired-but-false rule. Every kept atom gets a choice that can
/// hold it true while all of its rules are blocked, with `ab_c` recording
/// that unsupported truth. Every atom gets a guarded `ab_l` escape hatch for
/// loop behaviour.
pub fn build_aux_meta(program: &Program, omission: &OmissionSet) -> Program {
    Program::from_rules(build_aux_meta_rules(program, omission))
}

fn build_aux_meta_rules(program: &Program, omission: &OmissionSet) -> Vec<Rule> {
    debug_assert!(!program.has_choice_heads() && !program.has_disjunctive_heads());
    let mut bag = RuleBag::new();
    for r in program.rules() {
        if !touched(r, omission) || head_in_omission(r, omission) {
            continue;
        }
        let ap = TagAtom::Ap(r.name.clone()).render();
        bag.fact(
            format!("{}__ko", r.name),
            TagAtom::Ko(r.name.clone()).render(),
        );
        let ab_p = TagAtom::AbP(r.name.clone()).render();
        match r.head.atom() {
            Some(h) => {
                bag.push(
                    format!("{}__tp", r.name),
                    Head::Choice(h.clone()),
                    vec![ap.clone()],
                    vec![],
                    vec![],
                );
                bag.push(
                    format!("{}__abp", r.name),
                    Head::Plain(ab_p),
                    vec![ap],
                    vec![h.clone()],
                    vec![],
                );
            }
            None => bag.push(
                format!("{}__abp", r.name),
                Head::Plain(ab_p),
                vec![ap],
                vec![],
                vec![],
            ),
        }
    }
    for alpha in program.universe() {
        if omission.contains(alpha) {
            continue;
        }
        let bls: Vec<Atom> = program
            .def_of(alpha)
            .iter()
            .map(|r| TagAtom::Bl(r.name.clone()).render())
            .collect();
        bag.push(
            format!("tc({})", alpha.text()),
            Head::Choice(alpha.clone()),
            bls.clone(),
            vec![],
            vec![],
        );
        let mut body = vec![alpha.clone()];
        body.extend(bls);
        bag.push(
            format!("tcab({})", alpha.text()),
            Head::Plain(TagAtom::AbC(alpha.clone()).render()),
            body,
            vec![],
            vec![],
        );
    }
    for alpha in program.universe() {
        let ab_l = TagAtom::AbL(alpha.clone()).render();
        bag.push(
            format!("ta({})", alpha.text()),
            Head::Choice(ab_l.clone()),
            vec![],
            vec![TagAtom::AbC(alpha.clone()).render()],
            vec![],
        );
        bag.push(
            format!("tas({})", alpha.text()),
            Head::Plain(alpha.clone()),
            vec![ab_l],
            vec![],
            vec![],
        );
    }
    bag.0
}

/// Atom pairs lying on dependency cycles: `odd` pairs are mutually reachable
/// with odd negative parity one way and even the other; `pos` pairs are
/// mutually reachable through positive edges alone. Both relations include
/// reflexive pairs for atoms on such cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopPairs {
    pub odd: BTreeSet<(Atom, Atom)>,
    pub pos: BTreeSet<(Atom, Atom)>,
}

/// Computes loop pairs natively: parity-labelled reachability on the product
/// graph of atoms and negation parity, plus transitive closure of positive
/// edges. Edges run from each rule's head atom to each of its body atoms;
/// negative for the negated body, positive otherwise. Double-negated
/// literals and headless rules contribute no edges.
pub fn loop_pairs(program: &Program) -> LoopPairs {
    let universe = program.universe();
    let n = universe.len();
    let mut pos_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut neg_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for r in program.rules() {
        let Some(h) = r.head.atom() else { continue };
        let hid = program.atom_id(h).expect("head atom in universe");
        for b in r.pos_body() {
            pos_edges.insert((hid, program.atom_id(b).expect("body atom in universe")));
        }
        for b in r.neg_body() {
            neg_edges.insert((hid, program.atom_id(b).expect("body atom in universe")));
        }
    }
    let mut in_pos: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_neg: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(x, y) in &pos_edges {
        in_pos[y].push(x);
    }
    for &(x, y) in &neg_edges {
        in_neg[y].push(x);
    }

    // reach[(x*n+y)*2+p]: a walk x -> .. -> y with negation parity p exists.
    let mut reach = vec![false; n * n * 2];
    let mut work: Vec<(usize, usize, usize)> = Vec::new();
    let add = |reach: &mut Vec<bool>,
               work: &mut Vec<(usize, usize, usize)>,
               x: usize,
               y: usize,
               p: usize| {
        let slot = (x * n + y) * 2 + p;
        if !reach[slot] {
            reach[slot] = true;
            work.push((x, y, p));
        }
    };
    for &(x, y) in &pos_edges {
        add(&mut reach, &mut work, x, y, 0);
    }
    for &(x, y) in &neg_edges {
        add(&mut reach, &mut work, x, y, 1);
    }
    while let Some((y, z, p)) = work.pop() {
        for &x in &in_pos[y] {
            add(&mut reach, &mut work, x, z, p);
        }
        for &x in &in_neg[y] {
            add(&mut reach, &mut work, x, z, 1 - p);
        }
    }

    let mut pos_reach = vec![false; n * n];
    let mut pos_work: Vec<(usize, usize)> = Vec::new();
    for &(x, y) in &pos_edges {
        if !pos_reach[x * n + y] {
            pos_reach[x * n + y] = true;
            pos_work.push((x, y));
        }
    }
    while let Some((y, z)) = pos_work.pop() {
        for &x in &in_pos[y] {
            if !pos_reach[x * n + z] {
                pos_reach[x * n + z] = true;
                pos_work.push((x, z));
            }
        }
    }

    let mut pairs = LoopPairs::default();
    for x in 0..n {
        for y in 0..n {
            if reach[(x * n + y) * 2 + 1] && reach[(y * n + x) * 2] {
                pairs.odd.insert((universe[x].clone(), universe[y].clone()));
            }
            if pos_reach[x * n + y] && pos_reach[y * n + x] {
                pairs.pos.insert((universe[x].clone(), universe[y].clone()));
            }
        }
    }
    pairs
}

/// The loop pairs of [`loop_pairs`] as ground facts.
pub fn loop_facts(program: &Program) -> Vec<Rule> {
    let mut bag = RuleBag::new();
    push_loop_facts(&mut bag, &loop_pairs(program));
    bag.0
}

fn push_loop_facts(bag: &mut RuleBag, pairs: &LoopPairs) {
    for (x, y) in &pairs.odd {
        bag.fact(
            format!("f_oddloop({},{})", x.text(), y.text()),
            TagAtom::InOddLoop(x.clone(), y.clone()).render(),
        );
    }
    for (x, y) in &pairs.pos {
        bag.fact(
            format!("f_posloop({},{})", x.text(), y.text()),
            TagAtom::InPosLoop(x.clone(), y.clone()).render(),
        );
    }
}

/// A ground positive program whose least model contains `__inOddLoop(x,y)`
/// and `__inPosLoop(x,y)` exactly for the loop pairs of the input. Used as
/// an independent oracle for [`loop_pairs`].
pub fn reference_loop_program(program: &Program) -> Program {
    let universe = program.universe();
    let mut bag = RuleBag::new();
    let atom_tag = |x: &Atom| Atom::new(format!("__atom({})", x.text()));
    let head_tag = |r: &Rule, h: &Atom| Atom::new(format!("__head({},{})", r.name, h.text()));
    let pos_body_tag =
        |r: &Rule, b: &Atom| Atom::new(format!("__posBody({},{})", r.name, b.text()));
    let neg_body_tag =
        |r: &Rule, b: &Atom| Atom::new(format!("__negBody({},{})", r.name, b.text()));
    let pos_edge = |x: &Atom, y: &Atom| Atom::new(format!("__posEdge({},{})", x.text(), y.text()));
    let neg_edge = |x: &Atom, y: &Atom| Atom::new(format!("__negEdge({},{})", x.text(), y.text()));
    let even = |x: &Atom, y: &Atom| Atom::new(format!("__even({},{})", x.text(), y.text()));
    let odd = |x: &Atom, y: &Atom| Atom::new(format!("__odd({},{})", x.text(), y.text()));
    let pos_dep = |x: &Atom, y: &Atom| Atom::new(format!("__posDep({},{})", x.text(), y.text()));

    for x in universe {
        bag.fact(format!("lr_atom({})", x.text()), atom_tag(x));
    }
    let mut pos_edges: BTreeSet<(Atom, Atom)> = BTreeSet::new();
    let mut neg_edges: BTreeSet<(Atom, Atom)> = BTreeSet::new();
    for r in program.rules() {
        let Some(h) = r.head.atom() else { continue };
        bag.fact(format!("lr_head({})", r.name), head_tag(r, h));
        for b in r.pos_body() {
            bag.fact(
                format!("lr_pb({},{})", r.name, b.text()),
                pos_body_tag(r, b),
            );
            bag.push(
                format!("lr_pe({},{})", r.name, b.text()),
                Head::Plain(pos_edge(h, b)),
                vec![head_tag(r, h), pos_body_tag(r, b)],
                vec![],
                vec![],
            );
            pos_edges.insert((h.clone(), b.clone()));
        }
        for b in r.neg_body() {
            bag.fact(
                format!("lr_nb({},{})", r.name, b.text()),
                neg_body_tag(r, b),
            );
            bag.push(
                format!("lr_ne({},{})", r.name, b.text()),
                Head::Plain(neg_edge(h, b)),
                vec![head_tag(r, h), neg_body_tag(r, b)],
                vec![],
                vec![],
            );
            neg_edges.insert((h.clone(), b.clone()));
        }
    }
    for (x, y) in &pos_edges {
        bag.push(
            format!("lr_eb({},{})", x.text(), y.text()),
            Head::Plain(even(x, y)),
            vec![pos_edge(x, y)],
            vec![],
            vec![],
        );
        for z in universe {
            bag.push(
                format!("lr_ec({},{},{})", x.text(), y.text(), z.text()),
                Head::Plain(even(x, z)),
                vec![pos_edge(x, y), even(y, z), atom_tag(z)],
                vec![],
                vec![],
            );
            bag.push(
                format!("lr_oc({},{},{})", x.text(), y.text(), z.text()),
                Head::Plain(odd(x, z)),
                vec![pos_edge(x, y), odd(y, z), atom_tag(z)],
                vec![],
                vec![],
            );
        }
        bag.push(
            format!("lr_db({},{})", x.text(), y.text()),
            Head::Plain(pos_dep(x, y)),
            vec![pos_edge(x, y)],
            vec![],
            vec![],
        );
        for z in universe {
            bag.push(
                format!("lr_dc({},{},{})", x.text(), y.text(), z.text()),
                Head::Plain(pos_dep(x, z)),
                vec![pos_edge(x, y), pos_dep(y, z), atom_tag(z)],
                vec![],
                vec![],
            );
        }
    }
    for (x, y) in &neg_edges {
        bag.push(
            format!("lr_ob({},{})", x.text(), y.text()),
            Head::Plain(odd(x, y)),
            vec![neg_edge(x, y)],
            vec![],
            vec![],
        );
        for z in universe {
            bag.push(
                format!("lr_on({},{},{})", x.text(), y.text(), z.text()),
                Head::Plain(odd(x, z)),
                vec![neg_edge(x, y), even(y, z), atom_tag(z)],
                vec![],
                vec![],
            );
            bag.push(
                format!("lr_en({},{},{})", x.text(), y.text(), z.text()),
                Head::Plain(even(x, z)),
                vec![neg_edge(x, y), odd(y, z), atom_tag(z)],
                vec![],
                vec![],
            );
        }
    }
    for x in universe {
        for y in universe {
            bag.push(
                format!("lr_ol({},{})", x.text(), y.text()),
                Head::Plain(TagAtom::InOddLoop(x.clone(), y.clone()).render()),
                vec![odd(x, y), even(y, x)],
                vec![],
                vec![],
            );
            bag.push(
                format!("lr_pl({},{})", x.text(), y.text()),
                Head::Plain(TagAtom::InPosLoop(x.clone(), y.clone()).render()),
                vec![pos_dep(x, y), pos_dep(y, x)],
                vec![],
                vec![],
            );
        }
    }
    Program::from_rules(bag.0)
}

/// Loop pairs read off the least model of [`reference_loop_program`].
pub fn reference_loop_pairs(program: &Program) -> LoopPairs {
    let model = solver::least_model(&reference_loop_program(program));
    let mut pairs = LoopPairs::default();
    for atom in model.iter() {
        match TagAtom::parse(atom) {
            Some(TagAtom::InOddLoop(x, y)) => {
                pairs.odd.insert((x, y));
            }
            Some(TagAtom::InPosLoop(x, y)) => {
                pairs.pos.insert((x, y));
            }
            _ => {}
        }
    }
    pairs
}

/// True when the rule's body restricted to kept atoms holds under the
/// abstract interpretation. Atoms outside the interpretation's vocabulary
/// (like choice complements) read as false.
fn abs_ap_holds(rule: &Rule, omission: &OmissionSet, interp: &Interpretation) -> bool {
    rule.pos_body()
        .iter()
        .filter(|a| !omission.contains(a))
        .all(|a| interp.contains(a))
        && rule
            .neg_body()
            .iter()
            .filter(|a| !omission.contains(a))
            .all(|a| !interp.contains(a))
        && rule
            .negneg_body()
            .iter()
            .filter(|a| !omission.contains(a))
            .all(|a| interp.contains(a))
}

/// Options for bad-omission determination. `type4` additionally propagates
/// blame through dropped rules whose heads are already blamed.
#[derive(Debug, Clone, Copy, Default)]
pub struct DebugOptions {
    pub type4: bool,
}

/// The verdict layer: bookkeeping facts about how omission transformed each
/// rule, loop facts, and ground instances of the bad-omission schemas.
pub fn build_badomit(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
    opts: DebugOptions,
) -> Result<Program, DebugError> {
    let abstract_program = abstraction::omit(program, omission);
    if !solver::is_answer_set(&abstract_program, interp) {
        return Err(DebugError::NotAnAbstractAnswerSet(interp.display()));
    }
    Ok(Program::from_rules(build_badomit_rules(
        program, omission, interp, opts,
    )))
}

fn build_badomit_rules(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
    opts: DebugOptions,
) -> Vec<Rule> {
    let outcome = abstraction::omit_program(program, omission);
    let modified: BTreeSet<usize> = outcome
        .omitted_rules
        .union(&outcome.changed_rules)
        .copied()
        .collect();
    let omitted_atoms: Vec<Atom> = program
        .universe()
        .iter()
        .filter(|a| omission.contains(a))
        .cloned()
        .collect();
    let omitted_set: BTreeSet<Atom> = omitted_atoms.iter().cloned().collect();
    let mut from_by_rule: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
    for r in program.rules() {
        let mut seen = BTreeSet::new();
        for a in r.body_atoms() {
            if omission.contains(a) && seen.insert(a.clone()) {
                from_by_rule.entry(r.id).or_default().push(a.clone());
            }
        }
    }
    let abs_ap: Vec<bool> = program
        .rules()
        .iter()
        .map(|r| abs_ap_holds(r, omission, interp))
        .collect();
    let pairs = loop_pairs(program);

    let mut bag = RuleBag::new();
    for r in program.rules() {
        if let Some(h) = r.head.atom() {
            bag.fact(
                format!("f_head({})", r.name),
                TagAtom::HeadOf(r.name.clone(), h.clone()).render(),
            );
        }
    }
    for id in &outcome.omitted_rules {
        let name = &program.rule(*id).name;
        bag.fact(
            format!("f_omitted({name})"),
            TagAtom::Omitted(name.clone()).render(),
        );
    }
    for id in &outcome.changed_rules {
        let name = &program.rule(*id).name;
        bag.fact(
            format!("f_changed({name})"),
            TagAtom::Changed(name.clone()).render(),
        );
    }
    for id in &modified {
        let name = &program.rule(*id).name;
        bag.fact(
            format!("f_modified({name})"),
            TagAtom::Modified(name.clone()).render(),
        );
    }
    for a in &omitted_atoms {
        bag.fact(
            format!("f_oatom({})", a.text()),
            TagAtom::OmittedAtom(a.clone()).render(),
        );
    }
    for (id, atoms) in &from_by_rule {
        let name = &program.rule(*id).name;
        for a in atoms {
            bag.fact(
                format!("f_ofrom({},{name})", a.text()),
                TagAtom::OmittedAtomFrom(a.clone(), name.clone()).render(),
            );
        }
    }
    for (r, holds) in program.rules().iter().zip(&abs_ap) {
        if *holds {
            bag.fact(
                format!("f_absap({})", r.name),
                TagAtom::AbsAp(r.name.clone()).render(),
            );
        }
    }
    push_loop_facts(&mut bag, &pairs);

    // Unsatisfied original rule, applicable in the abstraction.
    for r in program.rules() {
        if !touched(r, omission) || head_in_omission(r, omission) || !abs_ap[r.id] {
            continue;
        }
        let Some(from) = from_by_rule.get(&r.id) else {
            continue;
        };
        for x in from {
            bag.push(
                format!("bo1({},{})", r.name, x.text()),
                Head::Plain(TagAtom::BadOmit(x.clone(), TypeTag::Type1).render()),
                vec![
                    TagAtom::AbP(r.name.clone()).render(),
                    TagAtom::AbsAp(r.name.clone()).render(),
                    TagAtom::Modified(r.name.clone()).render(),
                    TagAtom::OmittedAtomFrom(x.clone(), r.name.clone()).render(),
                ],
                vec![],
                vec![],
            );
        }
    }
    // Unsupported head, with the weakened rule applicable in the abstraction.
    for id in &outcome.changed_rules {
        let r = program.rule(*id);
        if !abs_ap[r.id] {
            continue;
        }
        let h = r.head.atom().expect("changed rules keep their head");
        let Some(from) = from_by_rule.get(&r.id) else {
            continue;
        };
        for x in from {
            bag.push(
                format!("bo2({},{})", r.name, x.text()),
                Head::Plain(TagAtom::BadOmit(x.clone(), TypeTag::Type2).render()),
                vec![
                    TagAtom::HeadOf(r.name.clone(), h.clone()).render(),
                    TagAtom::AbC(h.clone()).render(),
                    TagAtom::AbsAp(r.name.clone()).render(),
                    TagAtom::Changed(r.name.clone()).render(),
                    TagAtom::OmittedAtomFrom(x.clone(), r.name.clone()).render(),
                ],
                vec![],
                vec![],
            );
        }
    }
    // Loop behaviour. A loop abnormality is tied to the omission when the
    // loop carries an omitted atom, or when the definition of a loop member
    // was weakened or dropped by the omission while still applicable in the
    // abstraction; blame falls on that partner atom or on the atoms omitted
    // from that definition. Without the second sanction, interpretations
    // resting on a loop whose support was manufactured by a weakened rule
    // would leave the debug program without any answer set; without the
    // partner blame, loops blamed through a partner would yield verdict-free
    // answer sets.
    let mut faulty_defined: BTreeSet<Atom> = BTreeSet::new();
    let loop_families = [(&pairs.odd, "o", true), (&pairs.pos, "p", false)];
    for (set, suffix, is_odd) in loop_families {
        for (x, x1) in set.iter() {
            let in_loop = if is_odd {
                TagAtom::InOddLoop(x.clone(), x1.clone()).render()
            } else {
                TagAtom::InPosLoop(x.clone(), x1.clone()).render()
            };
            if omitted_set.contains(x1) {
                bag.push(
                    format!("fl{suffix}d({},{})", x.text(), x1.text()),
                    Head::Plain(TagAtom::Faulty(x.clone()).render()),
                    vec![
                        TagAtom::AbL(x.clone()).render(),
                        in_loop.clone(),
                        TagAtom::OmittedAtom(x1.clone()).render(),
                    ],
                    vec![],
                    vec![],
                );
                faulty_defined.insert(x.clone());
                bag.push(
                    format!("bo3d{suffix}({},{})", x.text(), x1.text()),
                    Head::Plain(TagAtom::BadOmit(x1.clone(), TypeTag::Type3).render()),
                    vec![
                        TagAtom::Faulty(x.clone()).render(),
                        in_loop.clone(),
                        TagAtom::OmittedAtom(x1.clone()).render(),
                    ],
                    vec![],
                    vec![],
                );
            }
            for r in program.def_of(x1) {
                if !modified.contains(&r.id) || !abs_ap[r.id] {
                    continue;
                }
                let Some(from) = from_by_rule.get(&r.id) else {
                    continue;
                };
                bag.push(
                    format!("fl{suffix}m({},{},{})", x.text(), x1.text(), r.name),
                    Head::Plain(TagAtom::Faulty(x.clone()).render()),
                    vec![
                        TagAtom::AbL(x.clone()).render(),
                        in_loop.clone(),
                        TagAtom::HeadOf(r.name.clone(), x1.clone()).render(),
                        TagAtom::Modified(r.name.clone()).render(),
                        TagAtom::AbsAp(r.name.clone()).render(),
                    ],
                    vec![],
                    vec![],
                );
                faulty_defined.insert(x.clone());
                for z in from {
                    bag.push(
                        format!(
                            "bo3m{suffix}({},{},{},{})",
                            x.text(),
                            x1.text(),
                            r.name,
                            z.text()
                        ),
                        Head::Plain(TagAtom::BadOmit(z.clone(), TypeTag::Type3).render()),
                        vec![
                            TagAtom::Faulty(x.clone()).render(),
                            in_loop.clone(),
                            TagAtom::HeadOf(r.name.clone(), x1.clone()).render(),
                            TagAtom::Modified(r.name.clone()).render(),
                            TagAtom::AbsAp(r.name.clone()).render(),
                            TagAtom::OmittedAtomFrom(z.clone(), r.name.clone()).render(),
                        ],
                        vec![],
                        vec![],
                    );
                }
            }
        }
    }
    // Blame through the faulty atom's own modified definitions.
    for r in program.rules() {
        if !modified.contains(&r.id) || !abs_ap[r.id] {
            continue;
        }
        let Some(x) = r.head.atom() else { continue };
        let Some(from) = from_by_rule.get(&r.id) else {
            continue;
        };
        for z in from {
            bag.push(
                format!("bo3({},{})", r.name, z.text()),
                Head::Plain(TagAtom::BadOmit(z.clone(), TypeTag::Type3).render()),
                vec![
                    TagAtom::Faulty(x.clone()).render(),
                    TagAtom::HeadOf(r.name.clone(), x.clone()).render(),
                    TagAtom::Modified(r.name.clone()).render(),
                    TagAtom::AbsAp(r.name.clone()).render(),
                    TagAtom::OmittedAtomFrom(z.clone(), r.name.clone()).render(),
                ],
                vec![],
                vec![],
            );
        }
    }
    for x in &faulty_defined {
        bag.push(
            format!("sf({})", x.text()),
            Head::Plain(TagAtom::SomeFaulty.render()),
            vec![TagAtom::Faulty(x.clone()).render()],
            vec![],
            vec![],
        );
    }
    for alpha in program.universe() {
        bag.push(
            format!("guard({})", alpha.text()),
            Head::Bottom,
            vec![TagAtom::AbL(alpha.clone()).render()],
            vec![TagAtom::SomeFaulty.render()],
            vec![],
        );
    }
    for a in &omitted_atoms {
        for t in TypeTag::ALL {
            bag.push(
                format!(
                    "boproj{}({})",
                    t.label().trim_start_matches("type"),
                    a.text()
                ),
                Head::Plain(TagAtom::BadOmitAtom(a.clone()).render()),
                vec![TagAtom::BadOmit(a.clone(), t).render()],
                vec![],
                vec![],
            );
        }
    }
    if opts.type4 {
        for id in &outcome.omitted_rules {
            let r = program.rule(*id);
            let Some(a1) = r.head.atom() else { continue };
            if !abs_ap[r.id] {
                continue;
            }
            let Some(from) = from_by_rule.get(&r.id) else {
                continue;
            };
            for a2 in from {
                bag.push(
                    format!("bo4({},{})", r.name, a2.text()),
                    Head::Plain(TagAtom::BadOmit(a2.clone(), TypeTag::Type4).render()),
                    vec![
                        TagAtom::Omitted(r.name.clone()).render(),
                        TagAtom::HeadOf(r.name.clone(), a1.clone()).render(),
                        TagAtom::AbsAp(r.name.clone()).render(),
                        TagAtom::BadOmitAtom(a1.clone()).render(),
                        TagAtom::OmittedAtomFrom(a2.clone(), r.name.clone()).render(),
                    ],
                    vec![],
                    vec![],
                );
            }
        }
    }
    bag.0
}

/// A fully assembled debug program plus the bookkeeping needed to interpret
/// its answer sets.
#[derive(Debug, Clone)]
pub struct DebugProgram {
    /// The complete debug program.
    pub program: Program,
    /// The normal form of the input the rule tags refer to.
    pub normalized: Program,
    /// Omitted atoms present in the input universe, in universe order.
    pub omitted: Vec<Atom>,
    /// The kept user-level universe the query layer pins.
    pub kept_user: BTreeSet<Atom>,
    /// Atom-level verdict projections, used as the minimization objective.
    pub markers: BTreeSet<Atom>,
}

/// Builds the full debug program for an abstract answer set: rule evaluation
/// and abnormality layers over the normalized input, verdict layer, and a
/// query layer pinning the kept atoms to the abstract answer set.
pub fn build_debug_program(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
    opts: DebugOptions,
) -> Result<DebugProgram, DebugError> {
    let abstract_program = abstraction::omit(program, omission);
    if !solver::is_answer_set(&abstract_program, interp) {
        return Err(DebugError::NotAnAbstractAnswerSet(interp.display()));
    }
    let normalized = normalize(program);
    let kept_user: BTreeSet<Atom> = program
        .universe()
        .iter()
        .filter(|a| !omission.contains(a))
        .cloned()
        .collect();
    let sections = vec![
        build_meta_rules(&normalized),
        build_aux_meta_rules(&normalized, omission),
        build_badomit_rules(&normalized, omission, interp, opts),
        abstraction::build_query(interp, &kept_user),
    ];
    let omitted: Vec<Atom> = normalized
        .universe()
        .iter()
        .filter(|a| omission.contains(a))
        .cloned()
        .collect();
    let markers: BTreeSet<Atom> = omitted
        .iter()
        .map(|a| TagAtom::BadOmitAtom(a.clone()).render())
        .collect();
    Ok(DebugProgram {
        program: assemble(sections),
        normalized,
        omitted,
        kept_user,
        markers,
    })
}

/// Abnormality atoms reported alongside the verdicts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Abnormalities {
    /// Names of rules that fire although their head is false.
    pub ab_p: BTreeSet<String>,
    /// Atoms true without support.
    pub ab_c: BTreeSet<Atom>,
    /// Atoms true by loop-abnormality fiat.
    pub ab_l: BTreeSet<Atom>,
}

/// Outcome of debugging one abstract answer set.
#[derive(Debug, Clone)]
pub struct DebugReport {
    /// The chosen answer set of the debug program, tags included.
    pub answer_set: Interpretation,
    /// Decoded verdicts; empty exactly when the abstract answer set is
    /// concrete.
    pub bad_omissions: BTreeSet<BadOmission>,
    pub abnormalities: Abnormalities,
}

impl DebugReport {
    /// Decodes verdicts and abnormality tags out of a debug-program answer
    /// set.
    pub fn from_answer_set(answer_set: Interpretation) -> Result<DebugReport, DebugError> {
        let bad_omissions = extract_bad_omissions(&answer_set)?;
        let abnormalities = collect_abnormalities(&answer_set);
        Ok(DebugReport {
            answer_set,
            bad_omissions,
            abnormalities,
        })
    }
}

/// Debugs an abstract answer set: first probes for a verdict-free answer set
/// of the debug program (present exactly when the interpretation is
/// concrete); otherwise reports one answer set blaming a minimal number of
/// omitted atoms.
pub fn debug(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
    opts: DebugOptions,
) -> Result<DebugReport, DebugError> {
    let dp = build_debug_program(program, omission, interp, opts)?;
    let probe = SolveRequest::new(dp.program.clone())
        .with_objective(dp.markers.clone(), Objective::Bound(0))
        .with_limit(1);
    let result = solver::solve(&probe)?;
    let chosen = match result.raw_answer_sets.first() {
        Some(raw) => raw.clone(),
        None => {
            let minimize = SolveRequest::new(dp.program.clone())
                .with_objective(dp.markers.clone(), Objective::Minimize)
                .with_limit(1);
            let result = solver::solve(&minimize)?;
            result
                .raw_answer_sets
                .first()
                .cloned()
                .ok_or(DebugError::NoAnswerSet)?
        }
    };
    DebugReport::from_answer_set(chosen)
}

/// Decodes the verdict tags of a debug-program answer set. Atom-level
/// projections are skipped; anything else under the `__badomit` functor must
/// decode cleanly.
pub fn extract_bad_omissions(report: &Interpretation) -> Result<BTreeSet<BadOmission>, DebugError> {
    let mut out = BTreeSet::new();
    for atom in report.iter() {
        let text = atom.text();
        let Some(rest) = text.strip_prefix("__badomit") else {
            continue;
        };
        let malformed = |why: &str| DebugError::MalformedTagAtom(text.to_string(), why.to_string());
        let inner = rest
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| malformed("expected `__badomit(..)`"))?;
        let args = split_top_level(inner).ok_or_else(|| malformed("unbalanced arguments"))?;
        match args.as_slice() {
            [_atom] => {}
            [atom, tag] => {
                let type_tag =
                    TypeTag::parse(tag).ok_or_else(|| malformed("unknown verdict type"))?;
                out.insert(BadOmission {
                    atom: Atom::new(atom),
                    type_tag,
                });
            }
            _ => return Err(malformed("expected one or two arguments")),
        }
    }
    Ok(out)
}

fn collect_abnormalities(report: &Interpretation) -> Abnormalities {
    let mut ab = Abnormalities::default();
    for atom in report.iter() {
        match TagAtom::parse(atom) {
            Some(TagAtom::AbP(r)) => {
                ab.ab_p.insert(r);
            }
            Some(TagAtom::AbC(a)) => {
                ab.ab_c.insert(a);
            }
            Some(TagAtom::AbL(a)) => {
                ab.ab_l.insert(a);
            }
            _ => {}
        }
    }
    ab
}

/// An upper bound on the refinement iterations needed to eliminate any one
/// spurious abstract answer set: the maximum number of positive rule-graph
/// edges on a simple path that starts at a rule touching the omission and
/// continues through rules whose heads are omitted.
pub fn refinement_bound(program: &Program, omission: &OmissionSet) -> usize {
    fn head_atoms(r: &Rule) -> Vec<&Atom> {
        match &r.head {
            Head::Plain(a) | Head::Choice(a) => vec![a],
            Head::Disjunction(atoms) => atoms.iter().collect(),
            Head::Bottom => vec![],
        }
    }
    let rules = program.rules();
    let n = rules.len();
    // Positive edge i -> j: rule i depends on rule j's head outside its
    // negated body.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in rules.iter().enumerate() {
        let neg: BTreeSet<&Atom> = r.neg_body().iter().collect();
        let body: BTreeSet<&Atom> = r.body_atoms().collect();
        for (j, r2) in rules.iter().enumerate() {
            if i == j {
                continue;
            }
            if head_atoms(r2)
                .iter()
                .any(|h| body.contains(*h) && !neg.contains(*h))
            {
                adj[i].push(j);
            }
        }
    }
    let omitted_head: Vec<bool> = rules
        .iter()
        .map(|r| head_atoms(r).iter().any(|h| omission.contains(h)))
        .collect();

    fn longest(
        i: usize,
        adj: &[Vec<usize>],
        omitted_head: &[bool],
        visited: &mut Vec<bool>,
    ) -> usize {
        let mut best = 0;
        for &j in &adj[i] {
            if !omitted_head[j] || visited[j] {
                continue;
            }
            visited[j] = true;
            best = best.max(1 + longest(j, adj, omitted_head, visited));
            visited[j] = false;
        }
        best
    }

    let mut best = 0;
    let mut visited = vec![false; n];
    for (i, r) in rules.iter().enumerate() {
        if !touched(r, omission) {
            continue;
        }
        visited[i] = true;
        best = best.max(longest(i, &adj, &omitted_head, &mut visited));
        visited[i] = false;
    }
    best
}
