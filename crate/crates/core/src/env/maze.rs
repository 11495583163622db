use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DEFAULT_RETRY_CAP;
use crate::error::{Error, Result};
use crate::mdp::ControlledMarkovProcess;

pub const DEFAULT_SUCCESS_PROB: f64 = 0.7;
pub const DEFAULT_WALL_DENSITY: f64 = 0.25;

/// Compass moves, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MazeAction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl MazeAction {
    pub const ALL: [MazeAction; 4] = [
        MazeAction::North,
        MazeAction::East,
        MazeAction::South,
        MazeAction::West,
    ];

    fn offset(self) -> (isize, isize) {
        match self {
            MazeAction::North => (0, -1),
            MazeAction::East => (1, 0),
            MazeAction::South => (0, 1),
            MazeAction::West => (-1, 0),
        }
    }
}

/// Planar grid maze. Free cells are the states, numbered in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeSpec {
    pub width: usize,
    pub height: usize,
    /// Row-major, `walls[y * width + x]`.
    pub walls: Vec<bool>,
    pub success_prob: f64,
    pub wall_density: f64,
}

impl MazeSpec {
    pub fn open(width: usize, height: usize) -> Self {
        MazeSpec {
            width,
            height,
            walls: vec![false; width * height],
            success_prob: DEFAULT_SUCCESS_PROB,
            wall_density: DEFAULT_WALL_DENSITY,
        }
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|w| **w).count()
    }

    pub fn is_free(&self, x: usize, y: usize) -> bool {
        !self.walls[y * self.width + x]
    }

    /// Grid coordinates of every state.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|&(x, y)| self.is_free(x, y))
            .collect()
    }

    /// State index of a free cell.
    pub fn state_of(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.width || y >= self.height || !self.is_free(x, y) {
            return None;
        }
        let before = self.walls[..y * self.width + x]
            .iter()
            .filter(|w| !**w)
            .count();
        Some(before)
    }

    fn neighbor(&self, x: usize, y: usize, action: MazeAction) -> Option<(usize, usize)> {
        let (dx, dy) = action.offset();
        let nx = x.checked_add_signed(dx)?;
        let ny = y.checked_add_signed(dy)?;
        (nx < self.width && ny < self.height && self.is_free(nx, ny)).then_some((nx, ny))
    }

    fn free_connected(&self) -> bool {
        let cells = self.free_cells();
        let Some(&start) = cells.first() else {
            return false;
        };
        let mut seen = vec![false; self.walls.len()];
        seen[start.1 * self.width + start.0] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some((x, y)) = queue.pop_front() {
            for action in MazeAction::ALL {
                if let Some((nx, ny)) = self.neighbor(x, y, action) {
                    let i = ny * self.width + nx;
                    if !seen[i] {
                        seen[i] = true;
                        reached += 1;
                        queue.push_back((nx, ny));
                    }
                }
            }
        }
        reached == cells.len()
    }
}

/// Transition kernel of a maze. The intended move happens with
/// `success_prob`; otherwise the agent moves to a uniformly chosen adjacent
/// free cell. Blocked moves leave the agent where it is.
pub fn maze_kernel(spec: &MazeSpec) -> Result<ControlledMarkovProcess> {
    if spec.walls.len() != spec.width * spec.height {
        return Err(Error::Dimension(format!(
            "{} wall flags for a {}x{} grid",
            spec.walls.len(),
            spec.width,
            spec.height
        )));
    }
    if !(0.0..=1.0).contains(&spec.success_prob) {
        return Err(Error::invalid("maze", "success probability outside [0, 1]"));
    }
    let cells = spec.free_cells();
    if cells.is_empty() {
        return Err(Error::invalid("maze", "no free cells"));
    }
    let n = cells.len();
    let index = |x: usize, y: usize| spec.state_of(x, y).expect("free cell");
    let mut transitions = Vec::with_capacity(n);
    for &(x, y) in &cells {
        let here = index(x, y);
        let adjacent: Vec<usize> = MazeAction::ALL
            .iter()
            .filter_map(|&a| spec.neighbor(x, y, a))
            .map(|(nx, ny)| index(nx, ny))
            .collect();
        let per_action = MazeAction::ALL
            .iter()
            .map(|&action| {
                let mut row = vec![0.0; n];
                let target = spec
                    .neighbor(x, y, action)
                    .map_or(here, |(nx, ny)| index(nx, ny));
                row[target] += spec.success_prob;
                let slip = 1.0 - spec.success_prob;
                if adjacent.is_empty() {
                    row[here] += slip;
                } else {
                    for &cell in &adjacent {
                        row[cell] += slip / adjacent.len() as f64;
                    }
                }
                row
            })
            .collect();
        transitions.push(per_action);
    }
    ControlledMarkovProcess::new(transitions, vec![1.0 / n as f64; n])
}

/// Random maze with the default slip and wall parameters.
pub fn sample_maze<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    rng: &mut R,
) -> Result<(ControlledMarkovProcess, MazeSpec)> {
    sample_maze_with(
        width,
        height,
        DEFAULT_SUCCESS_PROB,
        DEFAULT_WALL_DENSITY,
        DEFAULT_RETRY_CAP,
        rng,
    )
}

/// Walls are i.i.d. Bernoulli(`wall_density`). Mazes with more than a
/// quarter of the cells walled, or whose free cells are not connected, are
/// redrawn.
pub fn sample_maze_with<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    success_prob: f64,
    wall_density: f64,
    retry_cap: usize,
    rng: &mut R,
) -> Result<(ControlledMarkovProcess, MazeSpec)> {
    if width * height < 4 {
        return Err(Error::invalid(
            "maze",
            format!("{width}x{height} has fewer than 4 cells"),
        ));
    }
    if !(0.0..=1.0).contains(&wall_density) {
        return Err(Error::invalid("maze", "wall density outside [0, 1]"));
    }
    let cells = width * height;
    for _ in 0..retry_cap {
        let walls: Vec<bool> = (0..cells)
            .map(|_| rng.random::<f64>() < wall_density)
            .collect();
        let spec = MazeSpec {
            width,
            height,
            walls,
            success_prob,
            wall_density,
        };
        if 4 * spec.wall_count() > cells || !spec.free_connected() {
            continue;
        }
        let cmp = maze_kernel(&spec)?;
        return Ok((cmp, spec));
    }
    Err(Error::RetryCapExceeded {
        what: "maze",
        attempts: retry_cap,
    })
}
