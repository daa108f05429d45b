use crate::abstraction::Mapping;
use crate::error::{Error, Result};
use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Moves of the grid actions, in action order: north, south, west, east.
pub const MOVES: [(i64, i64); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

/// Four-action grid world; `y` grows southwards.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorldSpec<T> {
    pub width: usize,
    pub height: usize,
    /// Block of every cell, row-major; `None` is a wall.
    pub blocks: Vec<Option<usize>>,
    /// Probability that a uniformly random move replaces the chosen one.
    pub slip: T,
    /// Per-step reward of each listed cell, whatever the action.
    pub rewards: Vec<((usize, usize), T)>,
    /// Cells that keep the agent forever.
    pub absorbing: Vec<(usize, usize)>,
    pub starts: Vec<(usize, usize)>,
    pub gamma: T,
}

/// A built grid: the model, the block mapping and the cell of every state.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub mdp: GroundMdp<T>,
    pub mapping: Mapping,
    pub cells: Vec<(usize, usize)>,
    pub width: usize,
}

impl<T> Grid<T> {
    /// State index of a cell; panics on walls, which have no state.
    pub fn state(&self, x: usize, y: usize) -> usize {
        self.cells.iter().position(|&c| c == (x, y)).unwrap_or_else(|| panic!("({x}, {y}) is a wall"))
    }
}

impl<T: Real> GridWorldSpec<T> {
    fn block_at(&self, x: i64, y: i64) -> Option<usize> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        self.blocks[y as usize * self.width + x as usize]
    }

    pub fn build(&self) -> Result<Grid<T>> {
        if self.blocks.len() != self.width * self.height {
            return Err(Error::Dimension("grid coloring size".into()));
        }
        if self.starts.is_empty() {
            return Err(Error::InvalidModel("grid needs a start cell".into()));
        }
        let mut cells = Vec::new();
        let mut index = vec![usize::MAX; self.blocks.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.blocks[y * self.width + x].is_some() {
                    index[y * self.width + x] = cells.len();
                    cells.push((x, y));
                }
            }
        }
        let state_of = |x: usize, y: usize| -> Result<usize> {
            match index.get(y * self.width + x) {
                Some(&i) if i != usize::MAX && x < self.width => Ok(i),
                _ => Err(Error::InvalidModel(format!("cell ({x}, {y}) is not walkable"))),
            }
        };
        let n = cells.len();
        let na = MOVES.len();
        let mut t = vec![T::zero(); n * na * n];
        let mut r = vec![T::zero(); n * na];
        let slip_each = self.slip / T::lit(na as f64);
        for (s, &(x, y)) in cells.iter().enumerate() {
            let reward = self.rewards.iter().find(|(c, _)| *c == (x, y)).map_or(T::zero(), |&(_, v)| v);
            let absorbing = self.absorbing.contains(&(x, y));
            for a in 0..na {
                r[s * na + a] = reward;
                let row = &mut t[(s * na + a) * n..(s * na + a + 1) * n];
                if absorbing {
                    row[s] = T::one();
                    continue;
                }
                for (m, &(dx, dy)) in MOVES.iter().enumerate() {
                    let w = if m == a { T::one() - self.slip + slip_each } else { slip_each };
                    if w == T::zero() {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    let next = if self.block_at(nx, ny).is_some() { state_of(nx as usize, ny as usize)? } else { s };
                    row[next] += w;
                }
            }
        }
        let mut start = vec![T::zero(); n];
        let w = T::one() / T::lit(self.starts.len() as f64);
        for &(x, y) in &self.starts {
            start[state_of(x, y)?] += w;
        }
        let num_blocks = self.blocks.iter().flatten().max().map_or(0, |&b| b + 1);
        let map = cells.iter().map(|&(x, y)| self.blocks[y * self.width + x].expect("walkable")).collect();
        let mapping = Mapping::new(map, num_blocks)?;
        let mdp = GroundMdp::new(n, na, t, r, self.gamma, start)?;
        Ok(Grid { mdp, mapping, cells, width: self.width })
    }
}

pub const CORRIDOR_GREEN: usize = 0;
pub const CORRIDOR_GRAY: usize = 1;
pub const CORRIDOR_YELLOW: usize = 2;

/// Corridor cells `s1` and `s2`: the two entries of the gray corridor.
pub const CORRIDOR_S1: (usize, usize) = (0, 2);
pub const CORRIDOR_S2: (usize, usize) = (10, 2);

/// Deterministic corridor: a green corridor (row 0, x 0..=10) with doors at x 0
/// and x 10 into a gray corridor (row 2, x 0..=20) that ends at an absorbing
/// yellow cell (21, 2) paying 1 per step. The yellow cell is 21 steps from `s1`
/// and 11 from `s2`.
pub fn corridor_spec<T: Real>(gamma: T) -> GridWorldSpec<T> {
    let (w, h) = (22, 3);
    let mut blocks = vec![None; w * h];
    for x in 0..=10 {
        blocks[x] = Some(CORRIDOR_GREEN);
    }
    blocks[w] = Some(CORRIDOR_GREEN);
    blocks[w + 10] = Some(CORRIDOR_GREEN);
    for x in 0..=20 {
        blocks[2 * w + x] = Some(CORRIDOR_GRAY);
    }
    blocks[2 * w + 21] = Some(CORRIDOR_YELLOW);
    GridWorldSpec {
        width: w,
        height: h,
        blocks,
        slip: T::zero(),
        rewards: vec![((21, 2), T::one())],
        absorbing: vec![(21, 2)],
        starts: vec![(5, 0)],
        gamma,
    }
}

pub fn build_corridor_grid<T: Real>(gamma: T) -> Result<Grid<T>> {
    corridor_spec(gamma).build()
}

pub const TWO_REGION_GRAY: usize = 0;
pub const TWO_REGION_GREEN: usize = 1;
pub const TWO_REGION_YELLOW: usize = 2;

/// 9x6 grid: a gray hall (rows 3..=5) below a green room (x 0..=4, rows 0..=1,
/// doors at x 2..=4 of row 2) and a yellow room (x 6..=8, rows 0..=1, doors at
/// x 7..=8 of row 2). Column 5 separates the rooms. The far corner of the yellow
/// room pays 1.
pub fn two_region_spec<T: Real>(gamma: T, slip: T) -> GridWorldSpec<T> {
    let (w, h) = (9, 6);
    let mut blocks = vec![None; w * h];
    for y in 0..2 {
        for x in 0..5 {
            blocks[y * w + x] = Some(TWO_REGION_GREEN);
        }
        for x in 6..9 {
            blocks[y * w + x] = Some(TWO_REGION_YELLOW);
        }
    }
    for x in 2..5 {
        blocks[2 * w + x] = Some(TWO_REGION_GREEN);
    }
    for x in 7..9 {
        blocks[2 * w + x] = Some(TWO_REGION_YELLOW);
    }
    for y in 3..6 {
        for x in 0..w {
            blocks[y * w + x] = Some(TWO_REGION_GRAY);
        }
    }
    GridWorldSpec {
        width: w,
        height: h,
        blocks,
        slip,
        rewards: vec![((8, 0), T::one())],
        absorbing: Vec::new(),
        starts: vec![(0, 0)],
        gamma,
    }
}

pub fn build_two_region_grid<T: Real>(gamma: T, slip: T) -> Result<Grid<T>> {
    two_region_spec(gamma, slip).build()
}
