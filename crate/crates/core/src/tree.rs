//! The annotated-tree data model: an ordered rooted tree with suffix links on
//! internal nodes and a first letter on every edge.
//!
//! Node 0 is always the root. The auxiliary node `⊥` (parent of the root) is a
//! convention of the decision algorithms and is never materialized: the root's
//! incoming edge carries the wildcard letter, and the root's suffix link to
//! `⊥` is implied.

use std::fmt;
use thiserror::Error;

pub type NodeId = usize;
pub const ROOT: NodeId = 0;

/// One printable edge letter. `$` is the reserved terminator and may only
/// label leaf edges; `?` is the wildcard on the implicit `⊥ → root` edge.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub const TERMINATOR: Letter = Letter(b'$');
    pub const WILDCARD: Letter = Letter(b'?');

    /// Accepts any printable ASCII character.
    pub fn new(byte: u8) -> Option<Letter> {
        byte.is_ascii_graphic().then_some(Letter(byte))
    }

    pub fn byte(self) -> u8 {
        self.0
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }

    pub fn is_terminator(self) -> bool {
        self == Self::TERMINATOR
    }

    pub fn is_wildcard(self) -> bool {
        self == Self::WILDCARD
    }

    /// Canonical child order: wildcard, then terminator, then plain letters.
    pub fn rank(self) -> u16 {
        match self.0 {
            b'?' => 0,
            b'$' => 1,
            b => 2 + b as u16,
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.as_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Ordered rooted tree with per-edge first letters and suffix links on
/// internal nodes. Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct AnnotatedTree {
    parents: Vec<NodeId>,
    letters: Vec<Letter>,
    children: Vec<Vec<(Letter, NodeId)>>,
    links: Vec<Option<NodeId>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("field lengths disagree")]
    LengthMismatch,
    #[error("node {0} has an invalid parent")]
    BadParent(NodeId),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("the root must not carry an explicit suffix link")]
    RootLink,
}

impl AnnotatedTree {
    pub fn single_root() -> AnnotatedTree {
        AnnotatedTree {
            parents: vec![ROOT],
            letters: vec![Letter::WILDCARD],
            children: vec![Vec::new()],
            links: vec![None],
        }
    }

    /// Builds a tree from parallel per-node arrays. `parents[0]` must be 0 and
    /// `letters[0]`/`links[0]` are forced to the root conventions. Child lists
    /// are derived in canonical letter order. Only tree-ness is enforced here;
    /// shape rules are reported by [`validate_preconditions`].
    pub fn from_parts(
        parents: Vec<NodeId>,
        mut letters: Vec<Letter>,
        mut links: Vec<Option<NodeId>>,
    ) -> Result<AnnotatedTree, ModelError> {
        let n = parents.len();
        if n == 0 || letters.len() != n || links.len() != n {
            return Err(ModelError::LengthMismatch);
        }
        if parents[ROOT] != ROOT {
            return Err(ModelError::BadParent(ROOT));
        }
        if links[ROOT].is_some() {
            return Err(ModelError::RootLink);
        }
        for (v, &p) in parents.iter().enumerate() {
            if p >= n || (v != ROOT && p == v) {
                return Err(ModelError::BadParent(v));
            }
            if let Some(t) = links[v] {
                if t >= n {
                    return Err(ModelError::BadParent(v));
                }
            }
        }
        letters[ROOT] = Letter::WILDCARD;
        links[ROOT] = None;

        let mut children: Vec<Vec<(Letter, NodeId)>> = vec![Vec::new(); n];
        for v in 1..n {
            children[parents[v]].push((letters[v], v));
        }
        for list in &mut children {
            list.sort_by_key(|&(l, id)| (l.rank(), id));
        }

        let tree = AnnotatedTree { parents, letters, children, links };
        // reachability doubles as the acyclicity check
        let mut seen = vec![false; n];
        let mut stack = vec![ROOT];
        seen[ROOT] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(_, c) in &tree.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                    stack.push(c);
                }
            }
        }
        if count != n {
            let bad = seen.iter().position(|s| !s).unwrap();
            return Err(ModelError::Unreachable(bad));
        }
        Ok(tree)
    }

    /// Internal constructor that keeps the given child order (parse uses it to
    /// preserve file order). The caller guarantees coherence.
    pub(crate) fn assemble(
        parents: Vec<NodeId>,
        letters: Vec<Letter>,
        children: Vec<Vec<(Letter, NodeId)>>,
        links: Vec<Option<NodeId>>,
    ) -> AnnotatedTree {
        AnnotatedTree { parents, letters, children, links }
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v].is_empty() && v != ROOT
    }

    /// Internal = root or branching node (anything that has children, plus the
    /// root of the single-node tree).
    pub fn is_internal(&self, v: NodeId) -> bool {
        !self.is_leaf(v)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        (v != ROOT).then(|| self.parents[v])
    }

    /// Letter on the edge from the parent; the root reports the wildcard of
    /// the implicit `⊥ → root` edge.
    pub fn letter(&self, v: NodeId) -> Letter {
        self.letters[v]
    }

    pub fn children(&self, v: NodeId) -> &[(Letter, NodeId)] {
        &self.children[v]
    }

    pub fn child_by_letter(&self, v: NodeId, letter: Letter) -> Option<NodeId> {
        self.children[v].iter().find(|&&(l, _)| l == letter).map(|&(_, c)| c)
    }

    pub fn link(&self, v: NodeId) -> Option<NodeId> {
        self.links[v]
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&v| self.is_leaf(v))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Children sorted by canonical letter order (the stored order may be file
    /// order).
    pub fn sorted_children(&self, v: NodeId) -> Vec<(Letter, NodeId)> {
        let mut list = self.children[v].clone();
        list.sort_by_key(|&(l, id)| (l.rank(), id));
        list
    }

    /// Preorder traversal in stored child order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(_, c) in self.children[v].iter().rev() {
                stack.push(c);
            }
        }
        order
    }

    /// Canonical form: children sorted by letter, nodes renumbered in preorder.
    /// Two trees are equal as inputs exactly when their canonical forms are
    /// identical.
    pub fn canonicalized(&self) -> AnnotatedTree {
        let n = self.node_count();
        let mut order = self.children.clone();
        for list in &mut order {
            list.sort_by_key(|&(l, id)| (l.rank(), id));
        }
        let mut new_of = vec![usize::MAX; n];
        let mut stack = vec![ROOT];
        let mut next = 0;
        while let Some(v) = stack.pop() {
            new_of[v] = next;
            next += 1;
            for &(_, c) in order[v].iter().rev() {
                stack.push(c);
            }
        }
        let mut parents = vec![ROOT; n];
        let mut letters = vec![Letter::WILDCARD; n];
        let mut links = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for old in 0..n {
            let nv = new_of[old];
            if old != ROOT {
                parents[nv] = new_of[self.parents[old]];
                letters[nv] = self.letters[old];
            }
            links[nv] = self.links[old].map(|t| new_of[t]);
            children[nv] = order[old].iter().map(|&(l, c)| (l, new_of[c])).collect();
        }
        AnnotatedTree { parents, letters, children, links }
    }
}

impl fmt::Debug for AnnotatedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnnotatedTree({} nodes)", self.node_count())
    }
}

/// True when the two trees are identical after canonicalization (child order
/// carries no information beyond the letters).
pub fn canonical_equal(a: &AnnotatedTree, b: &AnnotatedTree) -> bool {
    a.canonicalized() == b.canonicalized()
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 means the document as a whole.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("node id {0} out of range")]
    DanglingNode(usize),
    #[error("duplicate first letter '{0}' among siblings")]
    DuplicateSiblingLetter(char),
    #[error("suffix link on leaf node {0}")]
    LinkOnLeaf(NodeId),
    #[error("suffix link target {0} is a leaf")]
    LinkTargetLeaf(NodeId),
    #[error("the root cannot be a child")]
    RootAsChild,
    #[error("node {0} has more than one parent")]
    SecondParent(NodeId),
    #[error("duplicate suffix link for node {0}")]
    DuplicateLink(NodeId),
    #[error("the root suffix link is implied and must not be written")]
    RootLink,
    #[error("internal node {0} is missing a suffix link")]
    MissingLink(NodeId),
    #[error("internal node {0} has exactly one child")]
    UnaryInternal(NodeId),
    #[error("terminator letter on the internal edge into node {0}")]
    TerminatorOnInternalEdge(NodeId),
    #[error("wildcard letter on the edge into node {0}")]
    WildcardLetter(NodeId),
    #[error("node {0} is not connected to the root")]
    UnreachableNode(NodeId),
}

impl ParseErrorKind {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use ParseErrorKind::*;
        match self {
            Syntax(_) => "SYNTAX",
            DanglingNode(_) => "DANGLING_REF",
            DuplicateSiblingLetter(_) => "SIBLING_LETTERS",
            LinkOnLeaf(_) => "SLINK_ON_LEAF",
            LinkTargetLeaf(_) => "SLINK_TARGET_LEAF",
            RootAsChild => "ROOT_AS_CHILD",
            SecondParent(_) => "MULTI_PARENT",
            DuplicateLink(_) => "DUPLICATE_SLINK",
            RootLink => "ROOT_SLINK",
            MissingLink(_) => "MISSING_SLINK",
            UnaryInternal(_) => "UNARY_INTERNAL",
            TerminatorOnInternalEdge(_) => "TERMINATOR_ON_INTERNAL_EDGE",
            WildcardLetter(_) => "WILDCARD_LETTER",
            UnreachableNode(_) => "UNREACHABLE_NODE",
        }
    }
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses the line-oriented tree format:
///
/// ```text
/// nodes <n>
/// edge <parent> <child> <letter>     # n-1 lines, any order
/// slink <from> <to>                  # one per internal non-root node
/// ```
///
/// `#` starts a comment. Children keep file order.
pub fn parse_tree(text: &str) -> Result<AnnotatedTree, ParseError> {
    let mut n: Option<usize> = None;
    let mut parents: Vec<Option<NodeId>> = Vec::new();
    let mut letters: Vec<Option<Letter>> = Vec::new();
    let mut letter_lines: Vec<usize> = Vec::new();
    let mut children: Vec<Vec<(Letter, NodeId)>> = Vec::new();
    let mut links: Vec<Option<NodeId>> = Vec::new();
    let mut link_lines: Vec<usize> = Vec::new();
    let mut edge_count = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut tokens = line.split_whitespace();
        let Some(head) = tokens.next() else { continue };
        match head {
            "nodes" => {
                if n.is_some() {
                    return Err(err(line_no, ParseErrorKind::Syntax("repeated 'nodes' line".into())));
                }
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("expected 'nodes <n>' with n >= 1".into())))?;
                n = Some(count);
                parents = vec![None; count];
                letters = vec![None; count];
                letter_lines = vec![0; count];
                children = vec![Vec::new(); count];
                links = vec![None; count];
                link_lines = vec![0; count];
            }
            "edge" => {
                let count = n.ok_or_else(|| err(line_no, ParseErrorKind::Syntax("'nodes' must come first".into())))?;
                let p: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("expected 'edge <parent> <child> <letter>'".into())))?;
                let c: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("expected 'edge <parent> <child> <letter>'".into())))?;
                let letter_tok = tokens
                    .next()
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("missing edge letter".into())))?;
                if tokens.next().is_some() {
                    return Err(err(line_no, ParseErrorKind::Syntax("trailing tokens".into())));
                }
                if letter_tok.len() != 1 {
                    return Err(err(line_no, ParseErrorKind::Syntax(format!("edge letter '{letter_tok}' must be one character"))));
                }
                let letter = Letter::new(letter_tok.as_bytes()[0])
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax(format!("unprintable edge letter '{letter_tok}'"))))?;
                if p >= count {
                    return Err(err(line_no, ParseErrorKind::DanglingNode(p)));
                }
                if c >= count {
                    return Err(err(line_no, ParseErrorKind::DanglingNode(c)));
                }
                if c == ROOT {
                    return Err(err(line_no, ParseErrorKind::RootAsChild));
                }
                if letter.is_wildcard() {
                    return Err(err(line_no, ParseErrorKind::WildcardLetter(c)));
                }
                if parents[c].is_some() {
                    return Err(err(line_no, ParseErrorKind::SecondParent(c)));
                }
                if children[p].iter().any(|&(l, _)| l == letter) {
                    return Err(err(line_no, ParseErrorKind::DuplicateSiblingLetter(letter.as_char())));
                }
                parents[c] = Some(p);
                letters[c] = Some(letter);
                letter_lines[c] = line_no;
                children[p].push((letter, c));
                edge_count += 1;
            }
            "slink" => {
                let count = n.ok_or_else(|| err(line_no, ParseErrorKind::Syntax("'nodes' must come first".into())))?;
                let f: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("expected 'slink <from> <to>'".into())))?;
                let t: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, ParseErrorKind::Syntax("expected 'slink <from> <to>'".into())))?;
                if tokens.next().is_some() {
                    return Err(err(line_no, ParseErrorKind::Syntax("trailing tokens".into())));
                }
                if f >= count {
                    return Err(err(line_no, ParseErrorKind::DanglingNode(f)));
                }
                if t >= count {
                    return Err(err(line_no, ParseErrorKind::DanglingNode(t)));
                }
                if f == ROOT {
                    return Err(err(line_no, ParseErrorKind::RootLink));
                }
                if links[f].is_some() {
                    return Err(err(line_no, ParseErrorKind::DuplicateLink(f)));
                }
                links[f] = Some(t);
                link_lines[f] = line_no;
            }
            other => {
                return Err(err(line_no, ParseErrorKind::Syntax(format!("unknown directive '{other}'"))));
            }
        }
    }

    let count = n.ok_or_else(|| err(0, ParseErrorKind::Syntax("missing 'nodes' line".into())))?;
    if edge_count != count - 1 {
        return Err(err(
            0,
            ParseErrorKind::Syntax(format!("expected {} edge lines, found {edge_count}", count - 1)),
        ));
    }
    for v in 1..count {
        if parents[v].is_none() {
            return Err(err(0, ParseErrorKind::UnreachableNode(v)));
        }
    }
    // connectivity (cycles would leave nodes unreached)
    let mut seen = vec![false; count];
    seen[ROOT] = true;
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        for &(_, c) in &children[v] {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(err(0, ParseErrorKind::UnreachableNode(v)));
    }

    for v in 0..count {
        let is_leaf = children[v].is_empty() && v != ROOT;
        if is_leaf {
            if links[v].is_some() {
                return Err(err(link_lines[v], ParseErrorKind::LinkOnLeaf(v)));
            }
        } else {
            if v != ROOT && children[v].len() == 1 {
                return Err(err(0, ParseErrorKind::UnaryInternal(v)));
            }
            if v != ROOT && links[v].is_none() {
                return Err(err(0, ParseErrorKind::MissingLink(v)));
            }
            if v != ROOT && letters[v] == Some(Letter::TERMINATOR) {
                return Err(err(letter_lines[v], ParseErrorKind::TerminatorOnInternalEdge(v)));
            }
        }
        if let Some(t) = links[v] {
            if children[t].is_empty() && t != ROOT {
                return Err(err(link_lines[v], ParseErrorKind::LinkTargetLeaf(t)));
            }
        }
    }

    let parents = parents
        .into_iter()
        .enumerate()
        .map(|(v, p)| if v == ROOT { ROOT } else { p.unwrap() })
        .collect();
    let letters = letters
        .into_iter()
        .enumerate()
        .map(|(v, l)| if v == ROOT { Letter::WILDCARD } else { l.unwrap() })
        .collect();
    Ok(AnnotatedTree::assemble(parents, letters, children, links))
}

/// Serializes to the text format in canonical form: nodes renumbered in
/// preorder with children sorted by letter, so equal trees print identically.
pub fn serialize_tree(t: &AnnotatedTree) -> String {
    let c = t.canonicalized();
    let mut out = format!("nodes {}\n", c.node_count());
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        for &(_, ch) in c.children(v).iter().rev() {
            stack.push(ch);
        }
        if v != ROOT {
            out.push_str(&format!("edge {} {} {}\n", c.parents[v], v, c.letter(v)));
        }
    }
    for v in 1..c.node_count() {
        if let Some(target) = c.link(v) {
            out.push_str(&format!("slink {v} {target}\n"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Validation and string depths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Structural shape: branching factor, link placement, reserved letters.
    Shape,
    /// Two siblings share a first letter.
    SiblingLetters,
    /// Suffix-link chains must reach the root acyclically with consistent
    /// depths (every derived internal edge length positive).
    P1,
    /// The link of a node's parent must have a child with the same letter.
    P2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<(Rule, NodeId)>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_rule(&self) -> Option<Rule> {
        self.failures.first().map(|&(r, _)| r)
    }

    fn has(&self, rule: Rule) -> bool {
        self.failures.iter().any(|&(r, _)| r == rule)
    }
}

/// Checks every precondition a suffix tree must satisfy. Violations are data,
/// not errors; the report lists all of them, Shape and SiblingLetters first.
pub fn validate_preconditions(t: &AnnotatedTree) -> ValidationReport {
    let n = t.node_count();
    let mut failures = Vec::new();

    for v in 0..n {
        if t.is_leaf(v) {
            if t.link(v).is_some() {
                failures.push((Rule::Shape, v));
            }
            continue;
        }
        if v != ROOT {
            if t.children(v).len() == 1 {
                failures.push((Rule::Shape, v));
            }
            if t.link(v).is_none() {
                failures.push((Rule::Shape, v));
            }
            if t.letter(v).is_terminator() {
                failures.push((Rule::Shape, v));
            }
        }
        if let Some(target) = t.link(v) {
            if t.is_leaf(target) {
                failures.push((Rule::Shape, v));
            }
        }
    }
    for v in 0..n {
        if v != ROOT && t.letter(v).is_wildcard() {
            failures.push((Rule::Shape, v));
        }
        let mut ls: Vec<Letter> = t.children(v).iter().map(|&(l, _)| l).collect();
        ls.sort();
        if ls.windows(2).any(|w| w[0] == w[1]) {
            failures.push((Rule::SiblingLetters, v));
        }
    }

    // P1: every internal link chain reaches the root without repetition.
    // depth = number of link hops to the root; derived edge lengths must be
    // positive.
    let mut depth: Vec<Option<u64>> = vec![None; n];
    depth[ROOT] = Some(0);
    let mut state = vec![0u8; n]; // 0 fresh, 1 on stack, 2 done
    state[ROOT] = 2;
    for start in 0..n {
        if t.is_leaf(start) || state[start] != 0 {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        let broken = loop {
            if state[cur] == 2 {
                break false;
            }
            if state[cur] == 1 {
                break true; // cycle
            }
            state[cur] = 1;
            chain.push(cur);
            match t.link(cur) {
                Some(next) if t.is_internal(next) => cur = next,
                _ => break true, // missing link or leaf target; Shape already flagged
            }
        };
        if broken {
            for &v in &chain {
                state[v] = 2;
                failures.push((Rule::P1, v));
            }
        } else {
            let base = depth[cur].unwrap();
            for (i, &v) in chain.iter().rev().enumerate() {
                state[v] = 2;
                depth[v] = Some(base + 1 + i as u64);
            }
        }
    }
    for v in 0..n {
        if v == ROOT || t.is_leaf(v) {
            continue;
        }
        if let (Some(dv), Some(dp)) = (depth[v], depth[t.parents[v]]) {
            if dv <= dp {
                failures.push((Rule::P1, v));
            }
        }
    }

    // P2: for every non-root node, the parent's link target has a child with
    // the same first letter ('?' on the implicit root edge matches anything).
    for v in 1..n {
        let p = t.parents[v];
        if p == ROOT {
            continue;
        }
        let Some(u) = t.link(p) else { continue };
        if t.child_by_letter(u, t.letter(v)).is_none() {
            failures.push((Rule::P2, v));
        }
    }

    failures.sort_by_key(|&(r, v)| {
        let o = match r {
            Rule::Shape => 0,
            Rule::SiblingLetters => 1,
            Rule::P1 => 2,
            Rule::P2 => 3,
        };
        (o, v)
    });
    ValidationReport { failures }
}

/// True when the tree only fails (if anything) the suffix-link rules; used by
/// generators that need structurally sound but possibly unrealizable trees.
pub fn shape_ok(report: &ValidationReport) -> bool {
    !report.has(Rule::Shape) && !report.has(Rule::SiblingLetters)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DepthError {
    #[error("derived length of the edge into node {0} is not positive")]
    NonpositiveEdge(NodeId),
    #[error("suffix link chain from node {0} does not reach the root")]
    BrokenChain(NodeId),
}

impl DepthError {
    pub fn code(&self) -> &'static str {
        match self {
            DepthError::NonpositiveEdge(_) => "NONPOSITIVE_EDGE",
            DepthError::BrokenChain(_) => "BROKEN_CHAIN",
        }
    }
}

/// String depths of internal nodes (number of suffix-link hops to the root)
/// and derived lengths of internal edges. Leaves have unknown depth.
#[derive(Debug, Clone)]
pub struct Depths {
    pub depth: Vec<Option<u64>>,
    /// Indexed by the lower node of the edge; `None` for leaf edges.
    pub edge_len: Vec<Option<u64>>,
}

pub fn compute_string_depths(t: &AnnotatedTree) -> Result<Depths, DepthError> {
    let n = t.node_count();
    let mut depth: Vec<Option<u64>> = vec![None; n];
    depth[ROOT] = Some(0);
    for start in 0..n {
        if t.is_leaf(start) || depth[start].is_some() {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        while depth[cur].is_none() {
            chain.push(cur);
            match t.link(cur) {
                Some(next) if t.is_internal(next) && !chain.contains(&next) => cur = next,
                _ => return Err(DepthError::BrokenChain(start)),
            }
        }
        let base = depth[cur].unwrap();
        for (i, &v) in chain.iter().rev().enumerate() {
            depth[v] = Some(base + 1 + i as u64);
        }
    }
    let mut edge_len = vec![None; n];
    for v in 1..n {
        if t.is_leaf(v) {
            continue;
        }
        let dv = depth[v].unwrap();
        let dp = depth[t.parents[v]].unwrap();
        if dv <= dp {
            return Err(DepthError::NonpositiveEdge(v));
        }
        edge_len[v] = Some(dv - dp);
    }
    Ok(Depths { depth, edge_len })
}

/// Preorder entry/exit times, for subtree membership tests.
pub(crate) fn preorder_intervals(t: &AnnotatedTree) -> (Vec<usize>, Vec<usize>) {
    let n = t.node_count();
    let mut tin = vec![0; n];
    let mut tout = vec![0; n];
    let mut clock = 0;
    let mut stack = vec![(ROOT, false)];
    while let Some((v, done)) = stack.pop() {
        if done {
            tout[v] = clock;
            continue;
        }
        tin[v] = clock;
        clock += 1;
        stack.push((v, true));
        for &(_, c) in t.children(v).iter().rev() {
            stack.push((c, false));
        }
    }
    (tin, tout)
}

pub(crate) fn in_subtree(tin: &[usize], tout: &[usize], anc: NodeId, v: NodeId) -> bool {
    tin[anc] <= tin[v] && tout[v] <= tout[anc]
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const TREE_ABAAA_DOLLAR: &str = "\
# terminated input, three internal nodes
nodes 9
edge 0 1 $
edge 0 2 a
edge 0 3 b
edge 2 4 $
edge 2 5 a
edge 2 6 b
edge 5 7 $
edge 5 8 a
slink 2 0
slink 5 2
";

    pub const TREE_ABABAA: &str = "\
nodes 9
edge 0 1 a
edge 0 2 b
edge 1 3 a
edge 1 4 b
edge 4 5 a
edge 4 6 b
edge 2 7 a
edge 2 8 b
slink 1 0
slink 2 1
slink 4 2
";

    #[test]
    fn parse_nine_node_terminated_tree() {
        let t = parse_tree(TREE_ABAAA_DOLLAR).unwrap();
        assert_eq!(t.node_count(), 9);
        assert_eq!(t.leaf_count(), 6);
        assert_eq!(t.link(2), Some(0));
        assert_eq!(t.link(5), Some(2));
        assert_eq!(t.child_by_letter(0, Letter::new(b'a').unwrap()), Some(2));
        assert_eq!(t.child_by_letter(2, Letter::TERMINATOR), Some(4));
        assert_eq!(t.parent(8), Some(5));
    }

    #[test]
    fn parse_single_node() {
        let t = parse_tree("nodes 1\n").unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(t.is_internal(ROOT));
        assert_eq!(t.leaf_count(), 0);
    }

    #[test]
    fn parse_rejects_duplicate_sibling_letters() {
        let doc = "nodes 3\nedge 0 1 a\nedge 0 2 a\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "SIBLING_LETTERS");
        assert_eq!(e.line, 3);
    }

    #[test]
    fn parse_rejects_link_on_leaf() {
        let doc = "nodes 3\nedge 0 1 a\nedge 0 2 b\nslink 1 0\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "SLINK_ON_LEAF");
    }

    #[test]
    fn parse_rejects_dangling_reference() {
        let doc = "nodes 3\nedge 0 1 a\nedge 0 7 b\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "DANGLING_REF");
    }

    #[test]
    fn parse_rejects_unary_internal_node() {
        let doc = "nodes 3\nedge 0 1 a\nedge 1 2 b\nslink 1 0\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "UNARY_INTERNAL");
    }

    #[test]
    fn parse_allows_unary_root() {
        let t = parse_tree("nodes 2\nedge 0 1 a\n").unwrap();
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn parse_rejects_missing_slink() {
        let doc = "nodes 5\nedge 0 1 a\nedge 0 2 b\nedge 1 3 a\nedge 1 4 b\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "MISSING_SLINK");
    }

    #[test]
    fn parse_rejects_terminator_inside() {
        let doc = "nodes 5\nedge 0 1 $\nedge 0 2 b\nedge 1 3 a\nedge 1 4 b\nslink 1 0\n";
        let e = parse_tree(doc).unwrap_err();
        assert_eq!(e.kind.code(), "TERMINATOR_ON_INTERNAL_EDGE");
    }

    #[test]
    fn parse_rejects_syntax_garbage() {
        assert_eq!(parse_tree("frob 1\n").unwrap_err().kind.code(), "SYNTAX");
        assert_eq!(parse_tree("nodes 2\n").unwrap_err().kind.code(), "SYNTAX");
    }

    #[test]
    fn serialize_roundtrip_is_canonical_fixed_point() {
        let t = parse_tree(TREE_ABABAA).unwrap();
        let s1 = serialize_tree(&t);
        let t2 = parse_tree(&s1).unwrap();
        assert!(canonical_equal(&t, &t2));
        assert_eq!(s1, serialize_tree(&t2));
    }

    #[test]
    fn serialize_single_root() {
        assert_eq!(serialize_tree(&AnnotatedTree::single_root()), "nodes 1\n");
    }

    #[test]
    fn canonical_equal_ignores_child_order() {
        let a = parse_tree("nodes 3\nedge 0 1 a\nedge 0 2 b\n").unwrap();
        let b = parse_tree("nodes 3\nedge 0 2 b\nedge 0 1 a\n").unwrap();
        assert!(canonical_equal(&a, &b));
        // different ids as well
        let c = parse_tree("nodes 3\nedge 0 2 a\nedge 0 1 b\n").unwrap();
        assert!(canonical_equal(&a, &c));
    }

    #[test]
    fn canonical_equal_sees_link_differences() {
        let a = parse_tree("nodes 5\nedge 0 1 a\nedge 0 2 b\nedge 1 3 a\nedge 1 4 b\nslink 1 0\n").unwrap();
        let mut links = vec![None; 5];
        links[1] = Some(1);
        let b = AnnotatedTree::from_parts(
            vec![0, 0, 0, 1, 1],
            vec![
                Letter::WILDCARD,
                Letter::new(b'a').unwrap(),
                Letter::new(b'b').unwrap(),
                Letter::new(b'a').unwrap(),
                Letter::new(b'b').unwrap(),
            ],
            links,
        )
        .unwrap();
        assert!(!canonical_equal(&a, &b));
    }

    #[test]
    fn validate_accepts_terminated_fixture() {
        let t = parse_tree(TREE_ABAAA_DOLLAR).unwrap();
        assert!(validate_preconditions(&t).ok());
    }

    #[test]
    fn validate_accepts_plain_fixture() {
        let t = parse_tree(TREE_ABABAA).unwrap();
        assert!(validate_preconditions(&t).ok());
    }

    #[test]
    fn validate_flags_link_cycle_as_p1() {
        // two internal nodes pointing at each other never reach the root
        let doc = "\
nodes 7
edge 0 1 a
edge 0 2 b
edge 1 3 a
edge 1 4 b
edge 2 5 a
edge 2 6 b
slink 1 2
slink 2 1
";
        let t = parse_tree(doc).unwrap();
        let report = validate_preconditions(&t);
        assert!(!report.ok());
        assert!(report.failures.iter().any(|&(r, _)| r == Rule::P1));
    }

    #[test]
    fn validate_flags_missing_letter_witness_as_p2() {
        // node 1 links to the root, but the root has no 'c' child to match
        // the edge 1 -> 4
        let doc = "\
nodes 5
edge 0 1 a
edge 0 2 b
edge 1 3 a
edge 1 4 c
slink 1 0
";
        let t = parse_tree(doc).unwrap();
        let report = validate_preconditions(&t);
        assert_eq!(report.failures, vec![(Rule::P2, 4)]);
    }

    #[test]
    fn depths_of_terminated_fixture() {
        let t = parse_tree(TREE_ABAAA_DOLLAR).unwrap();
        let d = compute_string_depths(&t).unwrap();
        assert_eq!(d.depth[0], Some(0));
        assert_eq!(d.depth[2], Some(1));
        assert_eq!(d.depth[5], Some(2));
        assert_eq!(d.depth[7], None);
        assert_eq!(d.edge_len[2], Some(1));
        assert_eq!(d.edge_len[5], Some(1));
        assert_eq!(d.edge_len[7], None);
    }

    #[test]
    fn depths_of_single_root() {
        let d = compute_string_depths(&AnnotatedTree::single_root()).unwrap();
        assert_eq!(d.depth, vec![Some(0)]);
    }

    #[test]
    fn depths_reject_nonpositive_edge() {
        // node 2 links to the root, node 1 links to node 2: depth(1) = 2,
        // but node 2 is a child of node 1, so its derived edge length is -1.
        let doc = "\
nodes 7
edge 0 1 a
edge 1 2 a
edge 1 3 b
edge 2 4 a
edge 2 5 b
edge 0 6 b
slink 1 2
slink 2 0
";
        let t = parse_tree(doc).unwrap();
        let e = compute_string_depths(&t).unwrap_err();
        assert_eq!(e.code(), "NONPOSITIVE_EDGE");
        // the same inconsistency is a P1 violation for the validator
        assert!(validate_preconditions(&t).failures.iter().any(|&(r, _)| r == Rule::P1));
    }
}
