//! Grid and maze benchmark families.
//!
//! Both are cell worlds with four movement actions (north, east, south, west).
//! The intended move succeeds with a probability in the slip interval; the
//! remaining mass goes to the two lateral moves. Moves into a wall leave the
//! robot in place. Every cell world has an extra initial state that places the
//! robot uniformly at random, and observations reveal only which of the four
//! neighbouring cells are walls.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Interval, IntervalPomdp, Successors};

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;
pub const WEST: usize = 3;
pub const NUM_MOVES: usize = 4;

/// `(dx, dy)` of each action with `y` growing towards the north.
const MOVES: [(i64, i64); NUM_MOVES] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

/// Canonical maze: rows listed north to south, `G` marks the goal.
pub const MAZE_LAYOUT: &str = "\
..............G
.#.#.#.#.#.#.##
.#.#.#.#.#.#.##
";

pub fn check_slip(slip: Interval) -> Result<()> {
    if !(slip.lo > 0.0 && slip.lo <= slip.hi && slip.hi <= 1.0) {
        return Err(Error::InvalidModel(format!(
            "slip interval [{}, {}] must satisfy 0 < lo <= hi <= 1",
            slip.lo, slip.hi
        )));
    }
    if slip.hi == 1.0 && slip.lo < 1.0 {
        return Err(Error::GraphPreservation(format!(
            "slip interval [{}, 1] gives lateral moves a zero lower bound",
            slip.lo
        )));
    }
    Ok(())
}

/// Cells of a world, indexed by their `(x, y)` position.
struct Cells {
    index: BTreeMap<(i64, i64), usize>,
}

impl Cells {
    fn step(&self, from: (i64, i64), action: usize) -> (i64, i64) {
        let (dx, dy) = MOVES[action];
        let to = (from.0 + dx, from.1 + dy);
        if self.index.contains_key(&to) {
            to
        } else {
            from
        }
    }

    fn walls(&self, at: (i64, i64)) -> [bool; NUM_MOVES] {
        std::array::from_fn(|a| self.step(at, a) == at)
    }

    /// Successors of moving with `action` from `at`, merged per target cell.
    fn movement(&self, at: (i64, i64), action: usize, slip: Interval) -> Successors {
        let mut merged: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        let mut add = |cell: (i64, i64), lo: f64, hi: f64| {
            let e = merged.entry(self.index[&cell]).or_insert((0.0, 0.0));
            e.0 += lo;
            e.1 += hi;
        };
        add(self.step(at, action), slip.lo, slip.hi);
        if slip.lo < 1.0 {
            let (lo, hi) = ((1.0 - slip.hi) / 2.0, (1.0 - slip.lo) / 2.0);
            add(self.step(at, (action + 1) % NUM_MOVES), lo, hi);
            add(self.step(at, (action + 3) % NUM_MOVES), lo, hi);
        }
        merged
            .into_iter()
            .map(|(t, (lo, hi))| (t, Interval::new(lo, hi.min(1.0))))
            .collect()
    }
}

/// Assigns observation indices in order of first appearance.
#[derive(Default)]
struct ObservationTable {
    ids: BTreeMap<[bool; NUM_MOVES], usize>,
    count: usize,
}

impl ObservationTable {
    fn wall_pattern(&mut self, walls: [bool; NUM_MOVES]) -> usize {
        *self.ids.entry(walls).or_insert_with(|| {
            self.count += 1;
            self.count - 1
        })
    }

    fn fresh(&mut self) -> usize {
        self.count += 1;
        self.count - 1
    }
}

fn self_loop(s: usize) -> Vec<Successors> {
    vec![vec![(s, Interval::point(1.0))]; NUM_MOVES]
}

fn uniform_over(states: &[usize]) -> Vec<Successors> {
    let p = 1.0 / states.len() as f64;
    vec![states.iter().map(|&t| (t, Interval::point(p))).collect(); NUM_MOVES]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    /// Trap cells as `(x, y)`, `x` growing east and `y` growing north.
    pub traps: Vec<(usize, usize)>,
}

impl Default for GridLayout {
    /// The 4x4 instance with two traps (18 states).
    fn default() -> Self {
        Self {
            width: 4,
            height: 4,
            traps: vec![(1, 2), (2, 0)],
        }
    }
}

/// State index of grid cell `(x, y)`; state 0 is the initial state and the
/// last state is the absorbing crash state.
pub fn grid_state(layout: &GridLayout, x: usize, y: usize) -> usize {
    1 + y * layout.width + x
}

/// Grid world: reach the north-east corner without stepping into a trap.
///
/// A trap sends the robot to an absorbing crash state. The corner is
/// absorbing and forms both the target and the goal set; every move outside
/// it costs one. The initial state places the robot uniformly on a cell that
/// is neither a trap nor the corner.
pub fn gen_grid(width: usize, height: usize, slip: Interval, traps: &[(usize, usize)]) -> Result<IntervalPomdp> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidModel(format!("grid {width}x{height} must be at least 2x2")));
    }
    check_slip(slip)?;
    let layout = GridLayout {
        width,
        height,
        traps: traps.to_vec(),
    };
    let corner = (width - 1, height - 1);
    let mut trap_set = BTreeSet::new();
    for &t in traps {
        if t.0 >= width || t.1 >= height {
            return Err(Error::InvalidModel(format!("trap {t:?} outside the {width}x{height} grid")));
        }
        if t == corner {
            return Err(Error::InvalidModel(format!("trap {t:?} covers the target corner")));
        }
        trap_set.insert(t);
    }

    let num_states = width * height + 2;
    let crash = num_states - 1;
    let cells = Cells {
        index: (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| ((x as i64, y as i64), grid_state(&layout, x, y)))
            .collect(),
    };
    let target = grid_state(&layout, corner.0, corner.1);

    let mut obs = ObservationTable::default();
    let mut observation = vec![0; num_states];
    let mut transitions = vec![Vec::new(); num_states];
    let mut cost = vec![vec![0.0; NUM_MOVES]; num_states];
    observation[0] = obs.fresh();
    let mut spawn = Vec::new();
    for (&(x, y), &s) in &cells.index {
        let at = (x as usize, y as usize);
        observation[s] = obs.wall_pattern(cells.walls((x, y)));
        transitions[s] = if s == target {
            self_loop(s)
        } else if trap_set.contains(&at) {
            vec![vec![(crash, Interval::point(1.0))]; NUM_MOVES]
        } else {
            spawn.push(s);
            cost[s] = vec![1.0; NUM_MOVES];
            (0..NUM_MOVES).map(|a| cells.movement((x, y), a, slip)).collect()
        };
    }
    spawn.sort_unstable();
    transitions[0] = uniform_over(&spawn);
    transitions[crash] = self_loop(crash);
    observation[crash] = obs.fresh();

    let model = IntervalPomdp {
        num_states,
        num_actions: NUM_MOVES,
        num_observations: obs.count,
        initial: 0,
        transitions,
        cost,
        observation,
        targets: [target].into(),
        goals: [target].into(),
    };
    model.validate()?;
    Ok(model)
}

/// Grid with the default layout.
pub fn gen_default_grid(slip: Interval) -> Result<IntervalPomdp> {
    let layout = GridLayout::default();
    gen_grid(layout.width, layout.height, slip, &layout.traps)
}

/// Maze world built from [`MAZE_LAYOUT`] (30 states).
pub fn gen_maze(slip: Interval) -> Result<IntervalPomdp> {
    gen_maze_from_layout(MAZE_LAYOUT, slip)
}

/// Maze world from a text layout: `.` is a free cell, `G` the goal cell and
/// anything else a wall, rows listed from north to south.
///
/// State 0 places the robot uniformly on a non-goal cell; the remaining states
/// are the cells in reading order. The goal is absorbing and is both the goal
/// and the target set. Each move costs one.
pub fn gen_maze_from_layout(layout: &str, slip: Interval) -> Result<IntervalPomdp> {
    check_slip(slip)?;
    let rows: Vec<&str> = layout.lines().filter(|l| !l.trim().is_empty()).collect();
    let height = rows.len() as i64;
    let mut index = BTreeMap::new();
    let mut order = Vec::new();
    let mut goal = None;
    for (r, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            if ch == '.' || ch == 'G' {
                let pos = (x as i64, height - 1 - r as i64);
                let s = 1 + order.len();
                index.insert(pos, s);
                order.push(pos);
                if ch == 'G' {
                    if goal.is_some() {
                        return Err(Error::InvalidModel("maze layout has more than one goal".into()));
                    }
                    goal = Some(s);
                }
            }
        }
    }
    let goal = goal.ok_or_else(|| Error::InvalidModel("maze layout has no goal cell".into()))?;
    if order.len() < 2 {
        return Err(Error::InvalidModel("maze layout needs a cell besides the goal".into()));
    }
    let cells = Cells { index };

    let num_states = order.len() + 1;
    let mut obs = ObservationTable::default();
    let mut observation = vec![0; num_states];
    let mut transitions = vec![Vec::new(); num_states];
    let mut cost = vec![vec![0.0; NUM_MOVES]; num_states];
    observation[0] = obs.fresh();
    for (i, &pos) in order.iter().enumerate() {
        let s = i + 1;
        observation[s] = obs.wall_pattern(cells.walls(pos));
        if s == goal {
            transitions[s] = self_loop(s);
        } else {
            cost[s] = vec![1.0; NUM_MOVES];
            transitions[s] = (0..NUM_MOVES).map(|a| cells.movement(pos, a, slip)).collect();
        }
    }
    let spawn: Vec<usize> = (1..num_states).filter(|&s| s != goal).collect();
    transitions[0] = uniform_over(&spawn);

    let model = IntervalPomdp {
        num_states,
        num_actions: NUM_MOVES,
        num_observations: obs.count,
        initial: 0,
        transitions,
        cost,
        observation,
        targets: [goal].into(),
        goals: [goal].into(),
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        assert_eq!(gen_default_grid(Interval::point(0.98)).unwrap().num_states, 18);
        assert_eq!(gen_maze(Interval::point(0.97)).unwrap().num_states, 30);
    }

    #[test]
    fn lateral_mass_merges_at_walls() {
        // South-west corner moving north: east lateral is free, west lateral
        // is a wall and stays in place.
        let m = gen_default_grid(Interval::new(0.9, 0.98)).unwrap();
        let s = grid_state(&GridLayout::default(), 0, 0);
        let succ = &m.transitions[s][NORTH];
        assert_eq!(succ.len(), 3);
        let stay = succ.iter().find(|(t, _)| *t == s).unwrap().1;
        assert!((stay.lo - 0.01).abs() < 1e-15 && (stay.hi - 0.05).abs() < 1e-15);
    }

    #[test]
    fn deterministic_slip_has_single_successor() {
        let m = gen_default_grid(Interval::point(1.0)).unwrap();
        for s in 1..17 {
            for a in 0..NUM_MOVES {
                assert_eq!(m.transitions[s][a].len(), 1);
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(gen_grid(4, 4, Interval::point(0.98), &[(3, 3)]).is_err());
        assert!(gen_grid(1, 4, Interval::point(0.98), &[]).is_err());
        assert!(gen_maze(Interval::new(0.5, 1.0)).is_err());
        assert!(gen_maze(Interval::new(0.0, 0.5)).is_err());
    }
}
