//! Game graphs, subgame views and the line-oriented game file format.
//!
//! A game file looks like this:
//!
//! ```text
//! buchi 4
//! # <id> <owner> <buchi> <succ>[,<succ>...]
//! 0 1 0 0
//! 1 2 1 0,2
//! 2 1 0 2,1
//! 3 2 1 2
//! ```
//!
//! State lines may appear in any order. A state token that is not an integer
//! is a symbolic name; names receive the ids left unused by numeric
//! declarations, in declaration order.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::set::StateSet;

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("owner and buchi tables disagree on the state count ({owners} vs {flags})")]
    LengthMismatch { owners: usize, flags: usize },
    #[error("state {state} has no successors")]
    NoSuccessors { state: StateId },
    #[error("state {state} has dangling successor {succ} (state count {n})")]
    DanglingSuccessor {
        state: StateId,
        succ: StateId,
        n: usize,
    },
    #[error("state {state} lists successor {succ} more than once")]
    DuplicateEdge { state: StateId, succ: StateId },
}

/// A two-player game graph with a Büchi set.
///
/// Adjacency is stored in compressed rows; predecessor rows are the exact
/// transpose of the successor rows. The graph is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    owner: Vec<Player>,
    buchi: Vec<bool>,
    succ_start: Vec<usize>,
    succ: Vec<StateId>,
    pred_start: Vec<usize>,
    pred: Vec<StateId>,
    max_outdegree: usize,
}

impl GameGraph {
    /// Builds a graph from per-state successor lists, validating every
    /// structural invariant.
    pub fn new(
        owner: Vec<Player>,
        buchi: Vec<bool>,
        successors: Vec<Vec<StateId>>,
    ) -> Result<GameGraph, GraphError> {
        let n = owner.len();
        if buchi.len() != n || successors.len() != n {
            return Err(GraphError::LengthMismatch {
                owners: n,
                flags: if buchi.len() != n {
                    buchi.len()
                } else {
                    successors.len()
                },
            });
        }
        let mut seen = vec![usize::MAX; n];
        let mut succ_start = Vec::with_capacity(n + 1);
        let mut succ = Vec::new();
        let mut in_degree = vec![0usize; n];
        let mut max_outdegree = 0;
        for (s, list) in successors.iter().enumerate() {
            if list.is_empty() {
                return Err(GraphError::NoSuccessors { state: s });
            }
            succ_start.push(succ.len());
            for &t in list {
                if t >= n {
                    return Err(GraphError::DanglingSuccessor {
                        state: s,
                        succ: t,
                        n,
                    });
                }
                if seen[t] == s {
                    return Err(GraphError::DuplicateEdge { state: s, succ: t });
                }
                seen[t] = s;
                in_degree[t] += 1;
                succ.push(t);
            }
            max_outdegree = max_outdegree.max(list.len());
        }
        succ_start.push(succ.len());

        let mut pred_start = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for d in &in_degree {
            pred_start.push(acc);
            acc += d;
        }
        pred_start.push(acc);
        let mut fill = pred_start.clone();
        let mut pred = vec![0; succ.len()];
        for s in 0..n {
            for &t in &succ[succ_start[s]..succ_start[s + 1]] {
                pred[fill[t]] = s;
                fill[t] += 1;
            }
        }

        Ok(GameGraph {
            owner,
            buchi,
            succ_start,
            succ,
            pred_start,
            pred,
            max_outdegree,
        })
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.owner.len()
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.succ.len()
    }

    /// Maximum out-degree over all states.
    pub fn max_outdegree(&self) -> usize {
        self.max_outdegree
    }

    pub fn owner(&self, s: StateId) -> Player {
        self.owner[s]
    }

    pub fn is_buchi(&self, s: StateId) -> bool {
        self.buchi[s]
    }

    #[inline]
    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.succ[self.succ_start[s]..self.succ_start[s + 1]]
    }

    #[inline]
    pub fn predecessors(&self, s: StateId) -> &[StateId] {
        &self.pred[self.pred_start[s]..self.pred_start[s + 1]]
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.n()
    }

    pub fn buchi_set(&self) -> StateSet {
        StateSet::from_iter(self.n(), self.states().filter(|&s| self.buchi[s]))
    }

    pub fn buchi_count(&self) -> usize {
        self.buchi.iter().filter(|&&b| b).count()
    }

    pub fn states_of(&self, player: Player) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(move |&s| self.owner[s] == player)
    }

    pub fn full_view(&self) -> StateSet {
        StateSet::full(self.n())
    }

    /// Returns the successor lists in stored order.
    pub fn adjacency(&self) -> Vec<Vec<StateId>> {
        self.states().map(|s| self.successors(s).to_vec()).collect()
    }
}

/// The subgame `G ↾ alive`: a mask over a base graph, never a copy.
#[derive(Clone, Copy)]
pub struct SubgameView<'a> {
    graph: &'a GameGraph,
    alive: &'a StateSet,
}

impl<'a> SubgameView<'a> {
    pub fn new(graph: &'a GameGraph, alive: &'a StateSet) -> Self {
        debug_assert_eq!(graph.n(), alive.universe());
        SubgameView { graph, alive }
    }

    pub fn graph(&self) -> &'a GameGraph {
        self.graph
    }

    pub fn alive(&self) -> &'a StateSet {
        self.alive
    }

    #[inline]
    pub fn is_alive(&self, s: StateId) -> bool {
        self.alive.contains(s)
    }

    /// `E(s) ∩ alive`, in stored order.
    pub fn successors(&self, s: StateId) -> impl Iterator<Item = StateId> + 'a {
        let alive = self.alive;
        self.graph
            .successors(s)
            .iter()
            .copied()
            .filter(move |&t| alive.contains(t))
    }

    pub fn predecessors(&self, s: StateId) -> impl Iterator<Item = StateId> + 'a {
        let alive = self.alive;
        self.graph
            .predecessors(s)
            .iter()
            .copied()
            .filter(move |&t| alive.contains(t))
    }

    /// Same base graph, restricted further to `alive`.
    pub fn restrict<'b>(&self, alive: &'b StateSet) -> SubgameView<'b>
    where
        'a: 'b,
    {
        SubgameView::new(self.graph, alive)
    }
}

/// True iff every alive state keeps at least one alive successor.
pub fn validate_subgame(view: &SubgameView<'_>) -> bool {
    view.alive()
        .iter()
        .all(|s| view.successors(s).next().is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("missing `buchi <n>` header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("expected `<id> <owner> <buchi> <succ>[,<succ>...]`, found {0} fields")]
    FieldCount(usize),
    #[error("invalid state id `{0}`")]
    BadId(String),
    #[error("owner must be 1 or 2, found `{0}`")]
    BadOwner(String),
    #[error("buchi flag must be 0 or 1, found `{0}`")]
    BadBuchiFlag(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("more than {0} states declared")]
    TooManyStates(usize),
    #[error("dangling successor `{0}`")]
    DanglingSuccessor(String),
    #[error("state `{0}` has no successors")]
    NoSuccessors(String),
    #[error("state `{state}` lists successor `{succ}` twice")]
    DuplicateEdge { state: String, succ: String },
    #[error("state {0} is never declared")]
    MissingState(StateId),
}

struct Decl<'t> {
    line: usize,
    id_col: usize,
    id: &'t str,
    owner: Player,
    buchi: bool,
    succ_col: usize,
    succs: Vec<&'t str>,
}

fn fields_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((st, &line[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st, &line[st..]));
    }
    out
}

/// Parses a game file.
pub fn parse_game(bytes: &[u8]) -> Result<GameGraph, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        ParseError {
            line,
            column,
            kind: ParseErrorKind::NotUtf8,
        }
    })?;
    parse_game_str(text)
}

pub fn parse_game_str(text: &str) -> Result<GameGraph, ParseError> {
    let err = |line: usize, column: usize, kind| ParseError { line, column, kind };

    let mut n: Option<usize> = None;
    let mut decls: Vec<Decl<'_>> = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = fields_with_columns(raw);
        let Some(count) = n else {
            let (col, kw) = fields[0];
            if kw != "buchi" {
                return Err(err(line_no, col + 1, ParseErrorKind::MissingHeader));
            }
            if fields.len() != 2 {
                return Err(err(
                    line_no,
                    col + 1,
                    ParseErrorKind::BadHeader("expected exactly `buchi <n>`".into()),
                ));
            }
            let (ncol, ntok) = fields[1];
            match ntok.parse::<usize>() {
                Ok(v) if v > 0 => n = Some(v),
                _ => {
                    return Err(err(
                        line_no,
                        ncol + 1,
                        ParseErrorKind::BadHeader(format!("invalid state count `{ntok}`")),
                    ))
                }
            }
            continue;
        };
        if fields.len() != 4 {
            return Err(err(line_no, 1, ParseErrorKind::FieldCount(fields.len())));
        }
        if decls.len() == count {
            return Err(err(
                line_no,
                fields[0].0 + 1,
                ParseErrorKind::TooManyStates(count),
            ));
        }
        let owner = match fields[1].1 {
            "1" => Player::One,
            "2" => Player::Two,
            other => {
                return Err(err(
                    line_no,
                    fields[1].0 + 1,
                    ParseErrorKind::BadOwner(other.into()),
                ))
            }
        };
        let buchi = match fields[2].1 {
            "0" => false,
            "1" => true,
            other => {
                return Err(err(
                    line_no,
                    fields[2].0 + 1,
                    ParseErrorKind::BadBuchiFlag(other.into()),
                ))
            }
        };
        let succs: Vec<&str> = fields[3].1.split(',').collect();
        if succs.iter().any(|s| s.is_empty()) {
            return Err(err(
                line_no,
                fields[3].0 + 1,
                ParseErrorKind::NoSuccessors(fields[0].1.into()),
            ));
        }
        decls.push(Decl {
            line: line_no,
            id_col: fields[0].0 + 1,
            id: fields[0].1,
            owner,
            buchi,
            succ_col: fields[3].0 + 1,
            succs,
        });
    }
    let Some(n) = n else {
        return Err(err(last_line, 1, ParseErrorKind::MissingHeader));
    };

    // Resolve declared ids: numeric tokens first, then names fill the gaps.
    let mut ids: HashMap<&str, StateId> = HashMap::new();
    let mut taken = vec![false; n];
    let mut resolved: Vec<Option<StateId>> = vec![None; decls.len()];
    for (k, d) in decls.iter().enumerate() {
        if let Ok(v) = d.id.parse::<usize>() {
            if v >= n {
                return Err(err(d.line, d.id_col, ParseErrorKind::BadId(d.id.into())));
            }
            if taken[v] {
                return Err(err(
                    d.line,
                    d.id_col,
                    ParseErrorKind::DuplicateState(d.id.into()),
                ));
            }
            taken[v] = true;
            resolved[k] = Some(v);
        }
    }
    let mut free = (0..n).filter(|&i| !taken[i]);
    for (k, d) in decls.iter().enumerate() {
        if resolved[k].is_some() {
            continue;
        }
        if ids.contains_key(d.id) {
            return Err(err(
                d.line,
                d.id_col,
                ParseErrorKind::DuplicateState(d.id.into()),
            ));
        }
        let v = free
            .next()
            .ok_or_else(|| err(d.line, d.id_col, ParseErrorKind::TooManyStates(n)))?;
        ids.insert(d.id, v);
        resolved[k] = Some(v);
    }
    drop(free);

    let mut owner = vec![Player::One; n];
    let mut buchi = vec![false; n];
    let mut succ: Vec<Option<Vec<StateId>>> = vec![None; n];
    for (k, d) in decls.iter().enumerate() {
        let id = resolved[k].expect("resolved above");
        let mut list = Vec::with_capacity(d.succs.len());
        let mut col = d.succ_col;
        for tok in &d.succs {
            let target = match tok.parse::<usize>() {
                Ok(v) if v < n => v,
                Ok(_) => {
                    return Err(err(
                        d.line,
                        col,
                        ParseErrorKind::DanglingSuccessor((*tok).into()),
                    ))
                }
                Err(_) => match ids.get(tok) {
                    Some(&v) => v,
                    None => {
                        return Err(err(
                            d.line,
                            col,
                            ParseErrorKind::DanglingSuccessor((*tok).into()),
                        ))
                    }
                },
            };
            if list.contains(&target) {
                return Err(err(
                    d.line,
                    col,
                    ParseErrorKind::DuplicateEdge {
                        state: d.id.into(),
                        succ: (*tok).into(),
                    },
                ));
            }
            list.push(target);
            col += tok.len() + 1;
        }
        owner[id] = d.owner;
        buchi[id] = d.buchi;
        succ[id] = Some(list);
    }
    let mut successors = Vec::with_capacity(n);
    for (s, list) in succ.into_iter().enumerate() {
        match list {
            Some(l) => successors.push(l),
            None => return Err(err(last_line, 1, ParseErrorKind::MissingState(s))),
        }
    }
    GameGraph::new(owner, buchi, successors)
        .map_err(|e| err(last_line, 1, ParseErrorKind::BadHeader(e.to_string())))
}

/// Canonical text form: states in id order, successors in stored order.
pub fn serialize_game(g: &GameGraph) -> Vec<u8> {
    let mut out = String::with_capacity(16 + g.n() * 12 + g.m() * 4);
    out.push_str(&format!("buchi {}\n", g.n()));
    for s in g.states() {
        out.push_str(&format!(
            "{} {} {} ",
            s,
            g.owner(s).index(),
            u8::from(g.is_buchi(s))
        ));
        let succs = g.successors(s);
        for (k, t) in succs.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&t.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}
