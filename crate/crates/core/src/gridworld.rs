//! Gridworld environments: layout generation, error-state placement, move
//! dynamics and the BFS distance oracle.
//!
//! Coordinates are interior cells only; the boundary walls are implicit and
//! every out-of-bounds move is a collision.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{derive_seed, rng_from_seed};

/// Rejection-sampling budget for [`generate_grid`].
pub const MAX_GENERATION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("no connected layout found after {attempts} attempts (wall ratio {wall_ratio} too high for {rows}x{cols})")]
    UnreachableAfterRetries {
        rows: usize,
        cols: usize,
        wall_ratio: f64,
        attempts: usize,
    },
    #[error("cannot place {requested} error cells: only {available} open cells available")]
    InsufficientOpenCells { requested: usize, available: usize },
    #[error("invalid grid arguments: {0}")]
    InvalidArguments(String),
    #[error("grid invariant violated: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl From<[usize; 2]> for Position {
    fn from([row, col]: [usize; 2]) -> Self {
        Self { row, col }
    }
}

impl From<Position> for [usize; 2] {
    fn from(p: Position) -> Self {
        [p.row, p.col]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GameAction {
    Up,
    Down,
    Left,
    Right,
}

impl GameAction {
    pub const ALL: [GameAction; 4] = [
        GameAction::Up,
        GameAction::Down,
        GameAction::Left,
        GameAction::Right,
    ];

    pub fn offset(self) -> (isize, isize) {
        match self {
            GameAction::Up => (-1, 0),
            GameAction::Down => (1, 0),
            GameAction::Left => (0, -1),
            GameAction::Right => (0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GameAction::Up => "Up",
            GameAction::Down => "Down",
            GameAction::Left => "Left",
            GameAction::Right => "Right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        GameAction::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for GameAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The set of agents (1-based) that may err in a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorTag(BTreeSet<usize>);

impl ErrorTag {
    pub fn new(agents: impl IntoIterator<Item = usize>) -> Result<Self, GridError> {
        let set: BTreeSet<usize> = agents.into_iter().collect();
        if set.is_empty() {
            return Err(GridError::InvalidArguments("error tag with no agents".into()));
        }
        if set.contains(&0) {
            return Err(GridError::InvalidArguments("agent indices are 1-based".into()));
        }
        Ok(Self(set))
    }

    pub fn single(agent: usize) -> Self {
        Self::new([agent]).expect("agent index must be >= 1")
    }

    pub fn joint(agents: impl IntoIterator<Item = usize>) -> Self {
        Self::new(agents).expect("joint tag needs at least one 1-based agent")
    }

    /// `E1..EN` single-agent tags followed by the all-agent joint tag.
    pub fn universe(team_size: usize) -> Vec<ErrorTag> {
        let mut tags: Vec<ErrorTag> = (1..=team_size).map(ErrorTag::single).collect();
        if team_size > 1 {
            tags.push(ErrorTag::joint(1..=team_size));
        }
        tags
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.contains(&agent)
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `E1`, `E2`, `EJ` for `{1,2}`, and `EJ_1_2_3` style for other joint sets.
    pub fn label(&self) -> String {
        if self.0.len() == 1 {
            format!("E{}", self.0.iter().next().unwrap())
        } else if self.0.iter().copied().eq([1, 2]) {
            "EJ".to_string()
        } else {
            let ids: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
            format!("EJ_{}", ids.join("_"))
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        if label == "EJ" {
            return Some(Self::joint([1, 2]));
        }
        if let Some(rest) = label.strip_prefix("EJ_") {
            let ids: Option<Vec<usize>> = rest.split('_').map(|s| s.parse().ok()).collect();
            return Self::new(ids?).ok();
        }
        label.strip_prefix('E')?.parse().ok().and_then(|a| Self::new([a]).ok())
    }

    /// ASCII glyph: the agent digit for single-agent tags, `J` for joint tags.
    fn glyph(&self) -> char {
        if self.0.len() == 1 {
            let a = *self.0.iter().next().unwrap();
            if a <= 9 {
                return char::from_digit(a as u32, 10).unwrap();
            }
        }
        'J'
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub walls: BTreeSet<Position>,
    pub start: Position,
    pub goal: Position,
    pub error_cells: BTreeMap<Position, ErrorTag>,
    pub wall_ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub new_pos: Position,
    pub collided: bool,
    pub reached_goal: bool,
}

impl GridSpec {
    pub fn in_bounds(&self, p: Position) -> bool {
        p.row < self.rows && p.col < self.cols
    }

    pub fn is_open(&self, p: Position) -> bool {
        self.in_bounds(p) && !self.walls.contains(&p)
    }

    pub fn error_tag(&self, p: Position) -> Option<&ErrorTag> {
        self.error_cells.get(&p)
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.rows)
            .flat_map(move |r| (0..self.cols).map(move |c| Position::new(r, c)))
            .filter(move |p| !self.walls.contains(p))
    }

    fn neighbor(&self, p: Position, action: GameAction) -> Option<Position> {
        let (dr, dc) = action.offset();
        let row = p.row.checked_add_signed(dr)?;
        let col = p.col.checked_add_signed(dc)?;
        let next = Position::new(row, col);
        self.is_open(next).then_some(next)
    }

    /// One move. Walls and the implicit boundary leave the agent in place.
    pub fn step(&self, pos: Position, action: GameAction) -> StepOutcome {
        match self.neighbor(pos, action) {
            Some(next) => StepOutcome {
                new_pos: next,
                collided: false,
                reached_goal: next == self.goal,
            },
            None => StepOutcome {
                new_pos: pos,
                collided: true,
                reached_goal: pos == self.goal,
            },
        }
    }

    /// Shortest move counts to the goal for every cell (walls and unreachable
    /// cells are absent).
    pub fn bfs_distances(&self) -> DistanceMap {
        let mut dist = vec![None; self.rows * self.cols];
        if !self.is_open(self.goal) {
            return DistanceMap { cols: self.cols, dist };
        }
        let idx = |p: Position| p.row * self.cols + p.col;
        let mut queue = VecDeque::new();
        dist[idx(self.goal)] = Some(0u32);
        queue.push_back(self.goal);
        while let Some(p) = queue.pop_front() {
            let d = dist[idx(p)].unwrap();
            // moves are reversible, so distances *to* the goal equal BFS from it
            for a in GameAction::ALL {
                if let Some(n) = self.neighbor(p, a) {
                    if dist[idx(n)].is_none() {
                        dist[idx(n)] = Some(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        DistanceMap { cols: self.cols, dist }
    }

    /// Checks every structural invariant of a grid.
    pub fn validate(&self) -> Result<(), GridError> {
        let bad = |m: String| Err(GridError::InvariantViolation(m));
        if self.rows == 0 || self.cols == 0 {
            return bad("grid must have at least one row and column".into());
        }
        for (name, p) in [("start", self.start), ("goal", self.goal)] {
            if !self.in_bounds(p) {
                return bad(format!("{name} {p} out of bounds"));
            }
            if self.walls.contains(&p) {
                return bad(format!("{name} {p} is a wall"));
            }
            if self.error_cells.contains_key(&p) {
                return bad(format!("{name} {p} is an error cell"));
            }
        }
        if self.start == self.goal {
            return bad("start equals goal".into());
        }
        if let Some(w) = self.walls.iter().find(|w| !self.in_bounds(**w)) {
            return bad(format!("wall {w} out of bounds"));
        }
        for p in self.error_cells.keys() {
            if !self.is_open(*p) {
                return bad(format!("error cell {p} is not an open cell"));
            }
        }
        if !(0.0..=1.0).contains(&self.wall_ratio) {
            return bad(format!("wall_ratio {} outside [0,1]", self.wall_ratio));
        }
        if self.bfs_distances().get(self.start).is_none() {
            return bad("goal unreachable from start".into());
        }
        Ok(())
    }

    /// Text board: `S` start, `G` goal, `#` wall, `.` open, digit for a
    /// single-agent error cell, `J` for a joint error cell.
    pub fn render_ascii(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.glyph_at(Position::new(r, c)));
            }
            out.push('\n');
        }
        out
    }

    pub(crate) fn glyph_at(&self, p: Position) -> char {
        if p == self.start {
            'S'
        } else if p == self.goal {
            'G'
        } else if self.walls.contains(&p) {
            '#'
        } else if let Some(tag) = self.error_cells.get(&p) {
            tag.glyph()
        } else {
            '.'
        }
    }

    /// Inverse of [`GridSpec::render_ascii`]. `J` parses as the `{1,2}`
    /// joint tag; `wall_ratio` is recomputed from the layout and `seed` is 0.
    pub fn parse_ascii(text: &str) -> Result<Self, GridError> {
        let lines: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        if rows == 0 || cols == 0 {
            return Err(GridError::InvalidArguments("empty board".into()));
        }
        let mut walls = BTreeSet::new();
        let mut error_cells = BTreeMap::new();
        let (mut start, mut goal) = (None, None);
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(GridError::InvalidArguments(format!(
                    "line {} has {} cells, expected {cols}",
                    r + 1,
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let p = Position::new(r, c);
                match ch {
                    '.' => {}
                    '#' => {
                        walls.insert(p);
                    }
                    'S' if start.is_none() => start = Some(p),
                    'G' if goal.is_none() => goal = Some(p),
                    'J' => {
                        error_cells.insert(p, ErrorTag::joint([1, 2]));
                    }
                    d if d.is_ascii_digit() && d != '0' => {
                        error_cells.insert(p, ErrorTag::single(d.to_digit(10).unwrap() as usize));
                    }
                    other => {
                        return Err(GridError::InvalidArguments(format!(
                            "unexpected glyph '{other}' at line {}, column {}",
                            r + 1,
                            c + 1
                        )))
                    }
                }
            }
        }
        let start = start.ok_or_else(|| GridError::InvalidArguments("board has no start".into()))?;
        let goal = goal.ok_or_else(|| GridError::InvalidArguments("board has no goal".into()))?;
        let eligible = rows * cols - 2;
        let grid = GridSpec {
            rows,
            cols,
            wall_ratio: if eligible == 0 { 0.0 } else { walls.len() as f64 / eligible as f64 },
            walls,
            start,
            goal,
            error_cells,
            seed: 0,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Dense per-cell distance-to-goal table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    cols: usize,
    dist: Vec<Option<u32>>,
}

impl DistanceMap {
    pub fn get(&self, p: Position) -> Option<u32> {
        if p.col >= self.cols {
            return None;
        }
        self.dist.get(p.row * self.cols + p.col).copied().flatten()
    }
}

/// A grid together with its precomputed distance oracle.
#[derive(Debug, Clone)]
pub struct Board {
    pub grid: GridSpec,
    pub distances: DistanceMap,
}

impl Board {
    pub fn new(grid: GridSpec) -> Self {
        let distances = grid.bfs_distances();
        Self { grid, distances }
    }

    pub fn optimal_length(&self) -> Option<u32> {
        self.distances.get(self.grid.start)
    }
}

fn check_generation_args(
    rows: usize,
    cols: usize,
    wall_ratio: f64,
    start: Position,
    goal: Position,
) -> Result<(), GridError> {
    let bad = |m: String| Err(GridError::InvalidArguments(m));
    if rows < 2 || cols < 2 {
        return bad(format!("grid must be at least 2x2, got {rows}x{cols}"));
    }
    if !(0.0..1.0).contains(&wall_ratio) {
        return bad(format!("wall_ratio {wall_ratio} outside [0,1)"));
    }
    if start == goal {
        return bad("start equals goal".into());
    }
    let probe = GridSpec {
        rows,
        cols,
        walls: BTreeSet::new(),
        start,
        goal,
        error_cells: BTreeMap::new(),
        wall_ratio,
        seed: 0,
    };
    if !probe.in_bounds(start) || !probe.in_bounds(goal) {
        return bad("start or goal out of bounds".into());
    }
    Ok(())
}

/// Random wall layout with `round(wall_ratio * eligible)` walls and a
/// start-to-goal path.
///
/// Uniform wall sets are drawn and rejected until one is connected. Dense
/// ratios on larger boards practically never connect, so once the budget is
/// spent the walls are instead placed one at a time in a seeded random order,
/// skipping any cell that would cut the start from the goal.
pub fn generate_grid(
    rows: usize,
    cols: usize,
    wall_ratio: f64,
    start: Position,
    goal: Position,
    seed: u64,
) -> Result<GridSpec, GridError> {
    check_generation_args(rows, cols, wall_ratio, start, goal)?;
    let eligible: Vec<Position> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
        .filter(|p| *p != start && *p != goal)
        .collect();
    let target = (wall_ratio * eligible.len() as f64).round() as usize;
    let mut grid = GridSpec {
        rows,
        cols,
        walls: BTreeSet::new(),
        start,
        goal,
        error_cells: BTreeMap::new(),
        wall_ratio,
        seed,
    };

    let mut rng = rng_from_seed(derive_seed(seed, "walls/rejection"));
    let mut cells = eligible.clone();
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let (chosen, _) = cells.partial_shuffle(&mut rng, target);
        grid.walls = chosen.iter().copied().collect();
        if grid.bfs_distances().get(start).is_some() {
            return Ok(grid);
        }
    }

    let mut rng = rng_from_seed(derive_seed(seed, "walls/constrained"));
    let mut order = eligible;
    order.shuffle(&mut rng);
    grid.walls.clear();
    for p in order {
        if grid.walls.len() == target {
            break;
        }
        grid.walls.insert(p);
        if grid.bfs_distances().get(start).is_none() {
            grid.walls.remove(&p);
        }
    }
    if grid.walls.len() == target {
        Ok(grid)
    } else {
        Err(GridError::UnreachableAfterRetries {
            rows,
            cols,
            wall_ratio,
            attempts: MAX_GENERATION_ATTEMPTS,
        })
    }
}

/// Places `count_per_type` cells of every tag in `types` on open cells.
///
/// The candidate cells are shuffled once per seed and tags are dealt
/// round-robin, so the placement for `k` is a prefix of the placement for
/// `k + 1`. Existing error cells are replaced.
pub fn add_error_states(
    grid: &GridSpec,
    count_per_type: usize,
    types: &[ErrorTag],
    seed: u64,
) -> Result<GridSpec, GridError> {
    let mut candidates: Vec<Position> = grid
        .open_cells()
        .filter(|p| *p != grid.start && *p != grid.goal)
        .collect();
    let requested = count_per_type * types.len();
    if requested > candidates.len() {
        return Err(GridError::InsufficientOpenCells {
            requested,
            available: candidates.len(),
        });
    }
    let mut rng = rng_from_seed(derive_seed(seed, "errors"));
    candidates.shuffle(&mut rng);
    let mut out = grid.clone();
    out.error_cells = candidates
        .into_iter()
        .take(requested)
        .enumerate()
        .map(|(i, p)| (p, types[i % types.len()].clone()))
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_grid(rows: usize, cols: usize) -> GridSpec {
        GridSpec {
            rows,
            cols,
            walls: BTreeSet::new(),
            start: Position::new(0, 0),
            goal: Position::new(rows - 1, cols - 1),
            error_cells: BTreeMap::new(),
            wall_ratio: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn two_by_two_open() {
        let g = generate_grid(2, 2, 0.0, Position::new(0, 0), Position::new(1, 1), 99).unwrap();
        assert!(g.walls.is_empty());
        assert_eq!(g.bfs_distances().get(g.start), Some(2));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_grid(6, 8, 0.4, Position::new(0, 0), Position::new(5, 7), 11).unwrap();
        let b = generate_grid(6, 8, 0.4, Position::new(0, 0), Position::new(5, 7), 11).unwrap();
        assert_eq!(a, b);
        let c = generate_grid(6, 8, 0.4, Position::new(0, 0), Position::new(5, 7), 12).unwrap();
        assert_ne!(a.walls, c.walls);
    }

    #[test]
    fn dense_paper_size_grid_connects() {
        let g = generate_grid(10, 15, 0.6, Position::new(0, 0), Position::new(9, 14), 7).unwrap();
        let d = g.bfs_distances();
        assert_eq!(d.get(g.goal), Some(0));
        assert!(d.get(g.start).is_some());
        assert_eq!(g.walls.len(), (0.6f64 * 148.0).round() as usize);
        g.validate().unwrap();
    }

    #[test]
    fn impossible_density_reports_unreachable() {
        let err = generate_grid(2, 2, 0.99, Position::new(0, 0), Position::new(1, 1), 1).unwrap_err();
        assert!(matches!(err, GridError::UnreachableAfterRetries { .. }));
    }

    #[test]
    fn bad_arguments_rejected() {
        let p = Position::new;
        assert!(generate_grid(1, 5, 0.0, p(0, 0), p(0, 4), 0).is_err());
        assert!(generate_grid(3, 3, 1.0, p(0, 0), p(2, 2), 0).is_err());
        assert!(generate_grid(3, 3, 0.0, p(1, 1), p(1, 1), 0).is_err());
        assert!(generate_grid(3, 3, 0.0, p(0, 0), p(3, 0), 0).is_err());
    }

    #[test]
    fn step_semantics() {
        let mut g = open_grid(3, 3);
        g.walls.insert(Position::new(1, 2));
        let out = g.step(Position::new(1, 1), GameAction::Right);
        assert_eq!(out, StepOutcome { new_pos: Position::new(1, 1), collided: true, reached_goal: false });
        let out = g.step(Position::new(2, 1), GameAction::Right);
        assert_eq!(out, StepOutcome { new_pos: Position::new(2, 2), collided: false, reached_goal: true });
        let out = g.step(Position::new(0, 0), GameAction::Up);
        assert_eq!(out, StepOutcome { new_pos: Position::new(0, 0), collided: true, reached_goal: false });
        let out = g.step(Position::new(0, 0), GameAction::Left);
        assert!(out.collided);
    }

    #[test]
    fn corridor_distances() {
        let g = GridSpec { goal: Position::new(0, 4), ..open_grid(1, 5) };
        let d = g.bfs_distances();
        let got: Vec<_> = (0..5).map(|c| d.get(Position::new(0, c))).collect();
        assert_eq!(got, vec![Some(4), Some(3), Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn enclosed_cell_unreachable() {
        let mut g = open_grid(3, 5);
        // (0,2) is boxed in by two walls and the top boundary
        for p in [(0, 1), (0, 3), (1, 2)] {
            g.walls.insert(Position::new(p.0, p.1));
        }
        assert_eq!(g.bfs_distances().get(Position::new(0, 2)), None);
        assert_eq!(g.bfs_distances().get(Position::new(0, 1)), None);
        assert_eq!(g.bfs_distances().get(Position::new(0, 0)), Some(6));
    }

    #[test]
    fn center_wall_three_by_three() {
        let mut g = open_grid(3, 3);
        g.walls.insert(Position::new(1, 1));
        // hand BFS: (2,2)=0, (1,2)=(2,1)=1, (0,2)=(2,0)=2, (0,1)=(1,0)=3, (0,0)=4
        let d = g.bfs_distances();
        assert_eq!(d.get(Position::new(0, 0)), Some(4));
        assert_eq!(d.get(Position::new(0, 1)), Some(3));
        assert_eq!(d.get(Position::new(1, 1)), None);
    }

    #[test]
    fn error_placement_counts_and_nesting() {
        let g = generate_grid(6, 8, 0.3, Position::new(0, 0), Position::new(5, 7), 3).unwrap();
        let types = ErrorTag::universe(2);
        let zero = add_error_states(&g, 0, &types, 5).unwrap();
        assert!(zero.error_cells.is_empty());
        let two = add_error_states(&g, 2, &types, 5).unwrap();
        assert_eq!(two.error_cells.len(), 6);
        for t in &types {
            assert_eq!(two.error_cells.values().filter(|v| *v == t).count(), 2);
        }
        let three = add_error_states(&g, 3, &types, 5).unwrap();
        for (p, t) in &two.error_cells {
            assert_eq!(three.error_cells.get(p), Some(t));
        }
        assert_eq!(three.walls, g.walls);
        assert_eq!((three.start, three.goal), (g.start, g.goal));
        three.validate().unwrap();
    }

    #[test]
    fn error_placement_capacity() {
        let g = open_grid(2, 2);
        let err = add_error_states(&g, 1, &ErrorTag::universe(2), 0).unwrap_err();
        assert_eq!(err, GridError::InsufficientOpenCells { requested: 3, available: 2 });
    }

    #[test]
    fn ascii_round_trip() {
        let g = GridSpec { goal: Position::new(0, 2), ..open_grid(1, 3) };
        assert_eq!(g.render_ascii(), "S.G\n");
        let base = generate_grid(6, 8, 0.4, Position::new(0, 0), Position::new(5, 7), 8).unwrap();
        let with_errors = add_error_states(&base, 2, &ErrorTag::universe(2), 1).unwrap();
        let text = with_errors.render_ascii();
        for glyph in ['S', 'G', '1', '2', 'J'] {
            assert!(text.contains(glyph), "missing {glyph} in\n{text}");
        }
        let back = GridSpec::parse_ascii(&text).unwrap();
        assert_eq!(back.walls, with_errors.walls);
        assert_eq!(back.error_cells, with_errors.error_cells);
        assert_eq!((back.start, back.goal), (with_errors.start, with_errors.goal));
        assert!((back.wall_ratio - with_errors.wall_ratio).abs() <= 1.0 / 46.0);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(GridSpec::parse_ascii("S?G\n").is_err());
        assert!(GridSpec::parse_ascii("S.\n.\n").is_err());
        assert!(GridSpec::parse_ascii("S#G\n").is_err());
    }

    #[test]
    fn tag_labels() {
        assert_eq!(ErrorTag::single(1).label(), "E1");
        assert_eq!(ErrorTag::joint([1, 2]).label(), "EJ");
        assert_eq!(ErrorTag::joint([1, 2, 3]).label(), "EJ_1_2_3");
        for t in ErrorTag::universe(3) {
            assert_eq!(ErrorTag::from_label(&t.label()), Some(t));
        }
        assert!(ErrorTag::new([]).is_err());
    }
}
